//! Per-step system dynamics: battery evolution, traffic carried and dropped
//! at both tiers, macro-site grid draw and the weighted step cost.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mode::SplitMode;
use crate::power_model::{mbs_power, vsc_power, NodePowerParams};

/// Absolute slack (kWh) applied to the strict battery-threshold test.
pub const BATTERY_TOLERANCE: f64 = 1e-12;

/// Storage of every vSC.
#[derive(Debug, Clone, PartialEq)]
pub struct BatteryParams {
    /// kWh.
    pub capacity: f64,
    /// kWh. Post-step levels must stay strictly above it.
    pub threshold: f64,
    /// kWh per vSC at t = 0.
    pub initial: Vec<f64>,
}

impl BatteryParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.capacity > 0.0 && self.capacity.is_finite()) {
            return Err(Error::config("battery.capacity_kwh", "must be > 0"));
        }
        if !(self.threshold >= 0.0 && self.threshold < self.capacity) {
            return Err(Error::config(
                "battery.threshold_fraction",
                "threshold must lie in [0, capacity)",
            ));
        }
        for (i, &b) in self.initial.iter().enumerate() {
            if !(0.0..=self.capacity).contains(&b) {
                return Err(Error::config(
                    format!("battery.initial_kwh[{i}]"),
                    format!("{b} outside [0, capacity]"),
                ));
            }
        }
        Ok(())
    }

    /// Strict `level > threshold`, with [`BATTERY_TOLERANCE`] of slack.
    pub fn is_feasible(&self, level: f64) -> bool {
        level > self.threshold + BATTERY_TOLERANCE
    }
}

/// Radio capacities and the grid-power normalization constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityParams {
    /// Mbps each vSC can carry.
    pub vsc_capacity: f64,
    /// Mbps the macro cell can carry.
    pub mbs_capacity: f64,
    /// Watts mapped to a unit power cost.
    pub p_max: f64,
}

impl CapacityParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("capacity.vsc_mbps", self.vsc_capacity),
            ("capacity.mbs_mbps", self.mbs_capacity),
            ("capacity.p_max_watts", self.p_max),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(name, "must be > 0"));
            }
        }
        Ok(())
    }
}

/// Cost weights; they must sum to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Weights {
    /// Weight of grid power.
    pub w1: f64,
    /// Weight of the drop rate.
    pub w2: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights { w1: 0.5, w2: 0.5 }
    }
}

impl Weights {
    pub fn validate(&self) -> Result<()> {
        if !(self.w1 >= 0.0 && self.w2 >= 0.0) {
            return Err(Error::config("weights", "w1 and w2 must both be >= 0"));
        }
        if (self.w1 + self.w2 - 1.0).abs() > 1e-9 {
            return Err(Error::config(
                "weights",
                format!("w1 + w2 must equal 1, got {}", self.w1 + self.w2),
            ));
        }
        Ok(())
    }
}

/// How grid watts enter the cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostNormalization {
    /// Divide by `p_max`.
    #[default]
    PMax,
    /// Use watts as they are.
    RawWatts,
}

/// Mode vector and batteries of the cluster at one timestep.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    pub modes: Vec<SplitMode>,
    pub batteries: Vec<f64>,
    pub t: usize,
}

/// Result of operating the cluster for one step in a given mode vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepOutcome {
    pub grid_watts: f64,
    pub drop_rate: f64,
    pub cost: f64,
}

/// One battery update: charge with the harvest (clipped at capacity), then
/// pay the step's draw. Values below the threshold or zero are returned
/// unchanged; the caller decides feasibility.
pub fn battery_step(
    batteries: &[f64],
    harvest: &[f64],
    modes: &[SplitMode],
    loads: &[f64],
    vsc: &NodePowerParams,
    capacity: f64,
    delta_t: f64,
) -> Result<Vec<f64>> {
    batteries
        .iter()
        .zip(harvest)
        .zip(modes.iter().zip(loads))
        .map(|((&b, &e), (&m, &l))| Ok(charge(b, e, capacity) - vsc_power(vsc, m, l)? * delta_t / 1000.0))
        .collect()
}

/// `min(b + e, capacity)`.
pub fn charge(battery: f64, harvest: f64, capacity: f64) -> f64 {
    (battery + harvest).min(capacity)
}

/// Traffic split between tiers for one step.
#[derive(Debug, Clone, PartialEq)]
pub struct CarriedLoads {
    /// Carried / capacity per vSC.
    pub vsc_loads: Vec<f64>,
    /// Carried / capacity at the macro cell.
    pub mbs_load: f64,
    pub drop_rate: f64,
    /// Mbps carried by the vSCs together.
    pub vsc_carried: f64,
    pub mbs_carried: f64,
    pub dropped: f64,
    pub offered: f64,
}

/// Active vSCs serve their own hotspot up to capacity. Their excess, the
/// demand of switched-off vSCs and the macro background all go to the macro
/// cell, which carries up to its capacity; the rest is dropped.
pub fn carried_loads(modes: &[SplitMode], demand: &[f64], mbs_background: f64, caps: &CapacityParams) -> CarriedLoads {
    let mut vsc_loads = Vec::with_capacity(modes.len());
    let mut vsc_carried = 0.0;
    let mut to_mbs = mbs_background;
    for (&m, &d) in modes.iter().zip(demand) {
        if m == SplitMode::Off {
            vsc_loads.push(0.0);
            to_mbs += d;
        } else {
            let carried = d.min(caps.vsc_capacity);
            vsc_loads.push(carried / caps.vsc_capacity);
            vsc_carried += carried;
            to_mbs += d - carried;
        }
    }
    let mbs_carried = to_mbs.min(caps.mbs_capacity);
    let dropped = to_mbs - mbs_carried;
    let offered = demand.iter().sum::<f64>() + mbs_background;
    let drop_rate = if offered > 0.0 {
        (dropped / offered).clamp(0.0, 1.0)
    } else {
        0.0
    };
    CarriedLoads {
        vsc_loads,
        mbs_load: mbs_carried / caps.mbs_capacity,
        drop_rate,
        vsc_carried,
        mbs_carried,
        dropped,
        offered,
    }
}

/// Parameters of the per-step cost that do not change over time.
#[derive(Debug, Clone, PartialEq)]
pub struct CostModel {
    pub vsc: NodePowerParams,
    pub mbs: NodePowerParams,
    pub caps: CapacityParams,
    pub weights: Weights,
    pub normalization: CostNormalization,
}

impl CostModel {
    /// Weighted cost of grid power and drop rate.
    pub fn weigh(&self, grid_watts: f64, drop_rate: f64) -> f64 {
        let power = match self.normalization {
            CostNormalization::PMax => grid_watts / self.caps.p_max,
            CostNormalization::RawWatts => grid_watts,
        };
        self.weights.w1 * power + self.weights.w2 * drop_rate
    }

    /// Outcome of running `modes` against one step's demand.
    pub fn step(
        &self,
        modes: &[SplitMode],
        demand: &[f64],
        mbs_background: f64,
    ) -> Result<(StepOutcome, CarriedLoads)> {
        let loads = carried_loads(modes, demand, mbs_background, &self.caps);
        let grid_watts = mbs_power(&self.mbs, &self.vsc, modes, &loads.vsc_loads, loads.mbs_load)?;
        let outcome = StepOutcome {
            grid_watts,
            drop_rate: loads.drop_rate,
            cost: self.weigh(grid_watts, loads.drop_rate),
        };
        Ok((outcome, loads))
    }
}

/// Default normalization: macro draw with every vSC in CRAN and every load
/// at its maximum.
pub fn default_p_max(mbs: &NodePowerParams, vsc: &NodePowerParams, n_vsc: usize) -> Result<f64> {
    mbs_power(mbs, vsc, &vec![SplitMode::Cran; n_vsc], &vec![1.0; n_vsc], 1.0)
}
