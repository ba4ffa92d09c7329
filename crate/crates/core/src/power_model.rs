//! Base station power draw from GOPS-rated baseband work, radio front end and
//! overhead.
//!
//! Baseband work is split into a load-independent part (CPU idle, OFDM,
//! filtering) and a load-dependent part (frequency-domain processing, FEC).
//! Where each part runs depends on the functional split of the vSC: whatever
//! the vSC does not process locally is processed by the macro site's pool.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mode::SplitMode;

/// Baseband processing effort in GOPS. The load-dependent fields are the
/// values at full load.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasebandGops {
    pub cpu: f64,
    pub ofdm: f64,
    pub filter: f64,
    pub fd_linear: f64,
    pub fd_nonlinear: f64,
    pub fec: f64,
}

impl BasebandGops {
    pub fn vsc_default() -> Self {
        BasebandGops {
            cpu: 200.0,
            filter: 160.0,
            ofdm: 80.0,
            fd_linear: 30.0,
            fd_nonlinear: 10.0,
            fec: 20.0,
        }
    }

    /// The macro site only has aggregate figures (630 GOPS static, 215 GOPS
    /// load dependent); both are split in the small-cell proportions.
    pub fn mbs_default() -> Self {
        let small = Self::vsc_default();
        let stat = small.cpu + small.ofdm + small.filter;
        let dyn_ = small.fd_linear + small.fd_nonlinear + small.fec;
        let s = 630.0 / stat;
        let d = 215.0 / dyn_;
        BasebandGops {
            cpu: small.cpu * s,
            ofdm: small.ofdm * s,
            filter: small.filter * s,
            fd_linear: small.fd_linear * d,
            fd_nonlinear: small.fd_nonlinear * d,
            fec: small.fec * d,
        }
    }

    fn fields(&self) -> [(&'static str, f64); 6] {
        [
            ("cpu", self.cpu),
            ("ofdm", self.ofdm),
            ("filter", self.filter),
            ("fd_linear", self.fd_linear),
            ("fd_nonlinear", self.fd_nonlinear),
            ("fec", self.fec),
        ]
    }
}

/// Radio front end and overhead of a node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioPower {
    pub rf: f64,
    pub pa: f64,
    /// Overhead as a fraction of everything else the node draws.
    pub overhead_fraction: f64,
}

impl RadioPower {
    pub fn vsc_default() -> Self {
        RadioPower {
            rf: 2.6,
            pa: 71.4,
            overhead_fraction: 0.0,
        }
    }

    pub fn mbs_default() -> Self {
        RadioPower {
            rf: 9.18,
            pa: 1100.0,
            overhead_fraction: 0.1,
        }
    }
}

/// Everything needed to turn a node's operating point into watts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodePowerParams {
    pub baseband: BasebandGops,
    pub radio: RadioPower,
    /// GOPS delivered per watt.
    pub gops_per_watt: f64,
    /// Draw of a switched-off node.
    #[serde(default)]
    pub sleep_watts: f64,
}

impl NodePowerParams {
    pub fn vsc_default() -> Self {
        NodePowerParams {
            baseband: BasebandGops::vsc_default(),
            radio: RadioPower::vsc_default(),
            gops_per_watt: 8.0,
            sleep_watts: 0.0,
        }
    }

    pub fn mbs_default() -> Self {
        NodePowerParams {
            baseband: BasebandGops::mbs_default(),
            radio: RadioPower::mbs_default(),
            gops_per_watt: 8.0,
            sleep_watts: 0.0,
        }
    }

    /// Checks the type invariants; `prefix` names the config section.
    pub fn validate(&self, prefix: &str) -> Result<()> {
        for (name, v) in self.baseband.fields() {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(
                    format!("{prefix}.baseband.{name}"),
                    format!("must be a finite value >= 0, got {v}"),
                ));
            }
        }
        let r = &self.radio;
        if !(r.rf >= 0.0 && r.rf.is_finite()) {
            return Err(Error::config(format!("{prefix}.radio.rf"), "must be >= 0"));
        }
        if !(r.pa >= 0.0 && r.pa.is_finite()) {
            return Err(Error::config(format!("{prefix}.radio.pa"), "must be >= 0"));
        }
        if !(0.0..=1.0).contains(&r.overhead_fraction) {
            return Err(Error::config(
                format!("{prefix}.radio.overhead_fraction"),
                "must lie in [0, 1]",
            ));
        }
        if !(self.gops_per_watt > 0.0 && self.gops_per_watt.is_finite()) {
            return Err(Error::config(format!("{prefix}.gops_per_watt"), "must be > 0"));
        }
        if !(self.sleep_watts >= 0.0 && self.sleep_watts.is_finite()) {
            return Err(Error::config(format!("{prefix}.sleep_watts"), "must be >= 0"));
        }
        Ok(())
    }
}

fn check_load(load: f64) -> Result<()> {
    if (0.0..=1.0).contains(&load) {
        Ok(())
    } else {
        Err(Error::LoadDomain(load))
    }
}

/// Load-independent baseband draw (CPU idle, OFDM, filtering).
pub fn bb1_watts(p: &NodePowerParams) -> f64 {
    let b = &p.baseband;
    (b.cpu + b.ofdm + b.filter) / p.gops_per_watt
}

/// Load-dependent baseband draw. The non-linear FD share grows with the
/// square of the load.
pub fn bb2_watts(p: &NodePowerParams, load: f64) -> Result<f64> {
    check_load(load)?;
    let b = &p.baseband;
    Ok((b.fd_linear * load + b.fd_nonlinear * load * load + b.fec * load) / p.gops_per_watt)
}

/// Draw of a vSC in `mode` while carrying `load` of its radio capacity.
pub fn vsc_power(p: &NodePowerParams, mode: SplitMode, load: f64) -> Result<f64> {
    check_load(load)?;
    let baseband = match mode {
        SplitMode::Off => return Ok(p.sleep_watts),
        SplitMode::Cran => 0.0,
        SplitMode::UpperLower => bb1_watts(p),
        SplitMode::MacPhy => bb1_watts(p) + bb2_watts(p, load)?,
    };
    Ok((baseband + p.radio.rf + p.radio.pa) * (1.0 + p.radio.overhead_fraction))
}

/// Draw of the macro site: its own radio and baseband plus the share of vSC
/// baseband processing that the split pushes into the central pool.
///
/// Traffic of switched-off vSCs is expected to be already folded into
/// `mbs_load`.
pub fn mbs_power(
    p: &NodePowerParams,
    vsc_params: &NodePowerParams,
    modes: &[SplitMode],
    vsc_loads: &[f64],
    mbs_load: f64,
) -> Result<f64> {
    debug_assert_eq!(modes.len(), vsc_loads.len());
    let mut total = bb1_watts(p) + bb2_watts(p, mbs_load)? + p.radio.rf + p.radio.pa;
    for (&mode, &load) in modes.iter().zip(vsc_loads) {
        match mode {
            SplitMode::Cran => total += bb1_watts(vsc_params) + bb2_watts(vsc_params, load)?,
            SplitMode::UpperLower => total += bb2_watts(vsc_params, load)?,
            SplitMode::MacPhy | SplitMode::Off => check_load(load)?,
        }
    }
    Ok(total * (1.0 + p.radio.overhead_fraction))
}
