//! Run configuration: a TOML document that fully specifies one experiment,
//! and the validated [`Scenario`] built from it.
//!
//! Every key has a default, so `n_vsc = 1` alone is a valid config. Omitted
//! sections take the values below:
//!
//! | key | default |
//! |---|---|
//! | `n_vsc` | 3 |
//! | `horizon` | 21 steps |
//! | `delta_t_hours` | 1.0 |
//! | `start_day`, `start_hour` | 0 (Monday), 0.0 |
//! | `seed` | 0 |
//! | `weights.w1`, `weights.w2` | 0.5, 0.5 |
//! | `cost_normalization` | `p_max` |
//! | `power.vsc`, `power.mbs` | small-cell / macro reference figures, 8 GOPS/W |
//! | `battery.capacity_kwh` | 2.0 |
//! | `battery.threshold_fraction` | 0.2 |
//! | `battery.initial_kwh` | 1.0 (scalar or one value per vSC) |
//! | `capacity.vsc_mbps`, `capacity.mbs_mbps` | 25, 35 |
//! | `capacity.p_max_watts` | macro draw with all vSCs in CRAN at full load |
//! | `solar.season` | `january` (`july` also bundled) |
//! | `traffic.users_per_vsc` | 90 |
//! | `traffic.heavy_ratio` | 0.5 |
//! | `traffic.heavy_rate`, `traffic.ordinary_rate` | 900, 112.5 MB/h |
//! | `traffic.profile` | `residential` (`office` or a 7×24 table) |
//! | `traffic.mbs_background` | 0.0 |
//! | `traffic.jitter` | 0.0 (seeded multiplicative noise on demand) |
//! | `traces_file` | unset; relative paths resolve against the config file |
//! | `solver.*` | see [`SolverConfig`] |
//! | `policy.switch_off_check` | `projected` |

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::{default_p_max, BatteryParams, CapacityParams, CostModel, CostNormalization, Weights};
use crate::error::{Error, Result};
use crate::power_model::NodePowerParams;
use crate::traces::{
    office_profile, read_traces_file, residential_profile, synth_solar, synth_traffic, SolarParams, TraceSet,
    TrafficParams, WeekTime, WeeklyProfile,
};

/// Names of the bundled presets.
pub const PRESETS: [&str; 4] = ["residential_jan", "residential_jul", "office_jan", "office_jul"];

fn preset_source(name: &str) -> Option<&'static str> {
    Some(match name {
        "residential_jan" => include_str!("../presets/residential_jan.toml"),
        "residential_jul" => include_str!("../presets/residential_jul.toml"),
        "office_jan" => include_str!("../presets/office_jan.toml"),
        "office_jul" => include_str!("../presets/office_jul.toml"),
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n_vsc: usize,
    pub horizon: usize,
    pub delta_t_hours: f64,
    pub start_day: usize,
    pub start_hour: f64,
    pub seed: u64,
    pub weights: Weights,
    pub cost_normalization: CostNormalization,
    pub power: PowerConfig,
    pub battery: BatteryConfig,
    pub capacity: CapacityConfig,
    pub solar: SolarConfig,
    pub traffic: TrafficConfig,
    pub traces_file: Option<PathBuf>,
    pub solver: SolverConfig,
    pub policy: PolicyConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            n_vsc: 3,
            horizon: 21,
            delta_t_hours: 1.0,
            start_day: 0,
            start_hour: 0.0,
            seed: 0,
            weights: Weights::default(),
            cost_normalization: CostNormalization::default(),
            power: PowerConfig::default(),
            battery: BatteryConfig::default(),
            capacity: CapacityConfig::default(),
            solar: SolarConfig::default(),
            traffic: TrafficConfig::default(),
            traces_file: None,
            solver: SolverConfig::default(),
            policy: PolicyConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerConfig {
    pub vsc: NodePowerParams,
    pub mbs: NodePowerParams,
}

impl Default for PowerConfig {
    fn default() -> Self {
        PowerConfig {
            vsc: NodePowerParams::vsc_default(),
            mbs: NodePowerParams::mbs_default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialBattery {
    Uniform(f64),
    PerVsc(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BatteryConfig {
    pub capacity_kwh: f64,
    pub threshold_fraction: f64,
    pub initial_kwh: InitialBattery,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        BatteryConfig {
            capacity_kwh: 2.0,
            threshold_fraction: 0.2,
            initial_kwh: InitialBattery::Uniform(1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CapacityConfig {
    pub vsc_mbps: f64,
    pub mbs_mbps: f64,
    pub p_max_watts: Option<f64>,
}

impl Default for CapacityConfig {
    fn default() -> Self {
        CapacityConfig {
            vsc_mbps: 25.0,
            mbs_mbps: 35.0,
            p_max_watts: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Season {
    #[default]
    January,
    July,
}

/// A season preset with optional per-field overrides.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolarConfig {
    pub season: Season,
    pub panel_area: Option<f64>,
    pub efficiency: Option<f64>,
    pub peak_irradiance: Option<f64>,
    pub daylight_hours: Option<f64>,
    pub solar_noon: Option<f64>,
}

impl SolarConfig {
    pub fn params(&self) -> SolarParams {
        let base = match self.season {
            Season::January => SolarParams::january(),
            Season::July => SolarParams::july(),
        };
        SolarParams {
            panel_area: self.panel_area.unwrap_or(base.panel_area),
            efficiency: self.efficiency.unwrap_or(base.efficiency),
            peak_irradiance: self.peak_irradiance.unwrap_or(base.peak_irradiance),
            daylight_hours: self.daylight_hours.unwrap_or(base.daylight_hours),
            solar_noon: self.solar_noon.unwrap_or(base.solar_noon),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileName {
    Residential,
    Office,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProfileConfig {
    Named(ProfileName),
    Table(Box<WeeklyProfile>),
}

impl ProfileConfig {
    pub fn table(&self) -> WeeklyProfile {
        match self {
            ProfileConfig::Named(ProfileName::Residential) => residential_profile(),
            ProfileConfig::Named(ProfileName::Office) => office_profile(),
            ProfileConfig::Table(t) => **t,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrafficConfig {
    pub users_per_vsc: f64,
    pub heavy_ratio: f64,
    pub heavy_rate: f64,
    pub ordinary_rate: f64,
    pub profile: ProfileConfig,
    pub mbs_background: f64,
    /// Half-width of the uniform multiplicative noise applied per vSC and
    /// step; 0 disables it.
    pub jitter: f64,
}

impl Default for TrafficConfig {
    fn default() -> Self {
        TrafficConfig {
            users_per_vsc: 90.0,
            heavy_ratio: 0.5,
            heavy_rate: 900.0,
            ordinary_rate: 112.5,
            profile: ProfileConfig::Named(ProfileName::Residential),
            mbs_background: 0.0,
            jitter: 0.0,
        }
    }
}

impl TrafficConfig {
    pub fn params(&self) -> TrafficParams {
        TrafficParams {
            users_per_vsc: self.users_per_vsc,
            heavy_ratio: self.heavy_ratio,
            heavy_rate: self.heavy_rate,
            ordinary_rate: self.ordinary_rate,
            profile: self.profile.table(),
            mbs_background: self.mbs_background,
        }
    }
}

/// Search switches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Literal per-node label correcting: one label per (t, mode vector),
    /// children in code order, no dominance and no lower bound. Fast but not
    /// guaranteed optimal.
    pub fidelity_mode: bool,
    /// Seed UPPER with the best static policy.
    pub warm_start: bool,
    /// Prune children against UPPER. Off leaves only battery feasibility
    /// and dominance.
    pub bound_pruning: bool,
    /// Add a lower bound on the remaining cost when pruning against UPPER.
    pub lower_bound: bool,
    /// Search first-stage subtrees on the rayon pool.
    pub parallel: bool,
    /// Largest number of sequences brute force may enumerate.
    pub enumeration_cap: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            fidelity_mode: false,
            warm_start: true,
            bound_pruning: true,
            lower_bound: true,
            parallel: false,
            enumeration_cap: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwitchOffCheck {
    /// Keep the fixed mode only if the battery after the step stays above
    /// the threshold.
    #[default]
    Projected,
    /// Keep the fixed mode while the battery before the step is above the
    /// threshold.
    Current,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyConfig {
    pub switch_off_check: SwitchOffCheck,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let field = e
                .span()
                .map(|s| format!("bytes {}..{}", s.start, s.end))
                .unwrap_or_else(|| "<document>".into());
            Error::config(field, e.message().to_string())
        })
    }

    pub fn preset(name: &str) -> Result<Self> {
        let src = preset_source(name).ok_or_else(|| {
            Error::config(
                "preset",
                format!("unknown preset `{name}`, expected one of {PRESETS:?}"),
            )
        })?;
        Self::from_toml(src)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON form (sorted keys) of the config after
    /// defaulting. Key order in the source file does not matter.
    pub fn digest(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        let canonical = serde_json::to_string(&value).expect("json");
        hex(&Sha256::digest(canonical.as_bytes()))
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// A validated, immutable experiment.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub n_vsc: usize,
    pub horizon: usize,
    pub delta_t: f64,
    pub cost: CostModel,
    pub battery: BatteryParams,
    pub traces: TraceSet,
    /// Digest of the config, extended with the trace file bytes when one is
    /// used.
    pub digest: String,
}

impl Scenario {
    /// Validates `config` and materializes its traces. Relative trace paths
    /// resolve against `base_dir`.
    pub fn from_config(config: ScenarioConfig, base_dir: Option<&Path>) -> Result<Self> {
        let c = &config;
        if c.n_vsc == 0 {
            return Err(Error::config("n_vsc", "must be >= 1"));
        }
        if c.n_vsc > 8 {
            return Err(Error::config("n_vsc", "at most 8 vSCs are supported"));
        }
        if c.horizon == 0 {
            return Err(Error::config("horizon", "must be >= 1"));
        }
        if !(c.delta_t_hours > 0.0 && c.delta_t_hours.is_finite()) {
            return Err(Error::config("delta_t_hours", "must be > 0"));
        }
        if c.start_day > 6 {
            return Err(Error::config("start_day", "must lie in 0..=6"));
        }
        if !(0.0..24.0).contains(&c.start_hour) {
            return Err(Error::config("start_hour", "must lie in [0, 24)"));
        }
        if !(0.0..=1.0).contains(&c.traffic.jitter) {
            return Err(Error::config("traffic.jitter", "must lie in [0, 1]"));
        }
        if !(0.0..1.0).contains(&c.battery.threshold_fraction) {
            return Err(Error::config("battery.threshold_fraction", "must lie in [0, 1)"));
        }
        c.weights.validate()?;
        c.power.vsc.validate("power.vsc")?;
        c.power.mbs.validate("power.mbs")?;

        let initial = match &c.battery.initial_kwh {
            InitialBattery::Uniform(b) => vec![*b; c.n_vsc],
            InitialBattery::PerVsc(v) if v.len() == c.n_vsc => v.clone(),
            InitialBattery::PerVsc(v) => {
                return Err(Error::config(
                    "battery.initial_kwh",
                    format!("expected {} values, found {}", c.n_vsc, v.len()),
                ))
            }
        };
        let battery = BatteryParams {
            capacity: c.battery.capacity_kwh,
            threshold: c.battery.threshold_fraction * c.battery.capacity_kwh,
            initial,
        };
        battery.validate()?;

        let p_max = match c.capacity.p_max_watts {
            Some(p) => p,
            None => default_p_max(&c.power.mbs, &c.power.vsc, c.n_vsc)?,
        };
        let caps = CapacityParams {
            vsc_capacity: c.capacity.vsc_mbps,
            mbs_capacity: c.capacity.mbs_mbps,
            p_max,
        };
        caps.validate()?;

        let solar = c.solar.params();
        solar.validate()?;
        let traffic = c.traffic.params();
        traffic.validate()?;

        let mut digest = c.digest();
        let traces = match &c.traces_file {
            Some(path) => {
                let path = match base_dir {
                    Some(dir) if path.is_relative() => dir.join(path),
                    _ => path.clone(),
                };
                let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
                digest = hex(&Sha256::digest(
                    format!("{digest}{}", hex(&Sha256::digest(&bytes))).as_bytes(),
                ));
                read_traces_file(&path, c.n_vsc, c.horizon)?
            }
            None => generate_traces(c, &solar, &traffic),
        };
        traces.validate(c.n_vsc, c.horizon)?;

        Ok(Scenario {
            n_vsc: c.n_vsc,
            horizon: c.horizon,
            delta_t: c.delta_t_hours,
            cost: CostModel {
                vsc: c.power.vsc,
                mbs: c.power.mbs,
                caps,
                weights: c.weights,
                normalization: c.cost_normalization,
            },
            battery,
            traces,
            digest,
            config,
        })
    }

    pub fn preset(name: &str) -> Result<Self> {
        Self::from_config(ScenarioConfig::preset(name)?, None)
    }

    /// Same scenario with the traces replaced.
    pub fn with_traces(mut self, traces: TraceSet) -> Result<Self> {
        traces.validate(self.n_vsc, self.horizon)?;
        self.traces = traces;
        Ok(self)
    }

    pub fn solver(&self) -> &SolverConfig {
        &self.config.solver
    }

    pub fn switch_off_check(&self) -> SwitchOffCheck {
        self.config.policy.switch_off_check
    }
}

/// Synthetic traces for `horizon` steps: identical solar harvest at every
/// vSC, per-vSC demand with optional seeded jitter.
pub fn generate_traces(c: &ScenarioConfig, solar: &SolarParams, traffic: &TrafficParams) -> TraceSet {
    let energy = synth_solar(solar, c.delta_t_hours, c.horizon, c.start_hour);
    let start = WeekTime {
        day: c.start_day,
        hour: c.start_hour,
    };
    let base = synth_traffic(traffic, c.delta_t_hours, c.horizon, start);
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let demand = (0..c.n_vsc)
        .map(|_| {
            base.iter()
                .map(|&d| {
                    if c.traffic.jitter > 0.0 {
                        d * (1.0 + rng.gen_range(-c.traffic.jitter..=c.traffic.jitter))
                    } else {
                        d
                    }
                })
                .collect()
        })
        .collect();
    TraceSet {
        energy: vec![energy; c.n_vsc],
        demand,
        mbs_background_demand: vec![traffic.mbs_background * c.capacity.mbs_mbps; c.horizon],
    }
}

/// Reads and validates a TOML scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let config = ScenarioConfig::from_toml(&text)?;
    Scenario::from_config(config, path.parent())
}
