//! Harvested-energy and traffic-demand series, either generated from a
//! clear-sky solar model and weekly activity profiles or read from CSV.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Clear-sky panel model with a truncated-cosine irradiance day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolarParams {
    /// m².
    pub panel_area: f64,
    pub efficiency: f64,
    /// W/m² at solar noon.
    pub peak_irradiance: f64,
    pub daylight_hours: f64,
    /// Hour of day of the irradiance peak.
    pub solar_noon: f64,
}

impl SolarParams {
    /// Winter preset: short, weak days.
    pub fn january() -> Self {
        SolarParams {
            panel_area: 4.48,
            efficiency: 0.2,
            peak_irradiance: 450.0,
            daylight_hours: 10.0,
            solar_noon: 12.0,
        }
    }

    /// Summer preset: long, strong days.
    pub fn july() -> Self {
        SolarParams {
            panel_area: 4.48,
            efficiency: 0.2,
            peak_irradiance: 800.0,
            daylight_hours: 14.0,
            solar_noon: 12.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.panel_area > 0.0 && self.panel_area.is_finite()) {
            return Err(Error::config("solar.panel_area", "must be > 0"));
        }
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(Error::config("solar.efficiency", "must lie in (0, 1]"));
        }
        if !(self.peak_irradiance >= 0.0 && self.peak_irradiance.is_finite()) {
            return Err(Error::config("solar.peak_irradiance", "must be >= 0"));
        }
        if !(self.daylight_hours > 0.0 && self.daylight_hours <= 24.0) {
            return Err(Error::config("solar.daylight_hours", "must lie in (0, 24]"));
        }
        if !(0.0..24.0).contains(&self.solar_noon) {
            return Err(Error::config("solar.solar_noon", "must lie in [0, 24)"));
        }
        Ok(())
    }

    /// Irradiance in W/m² at hour-of-day `hour`.
    pub fn irradiance(&self, hour: f64) -> f64 {
        // Wrap the offset into (-12, 12] so windows around midnight work too.
        let mut offset = (hour - self.solar_noon).rem_euclid(24.0);
        if offset > 12.0 {
            offset -= 24.0;
        }
        let phase = PI * offset / self.daylight_hours;
        if phase.abs() >= PI / 2.0 {
            return 0.0;
        }
        self.peak_irradiance * phase.cos().max(0.0)
    }
}

/// Harvested energy (kWh) per step; step `t` starts at `start_hour + t·Δ`.
pub fn synth_solar(p: &SolarParams, timestep_hours: f64, n_steps: usize, start_hour: f64) -> Vec<f64> {
    (0..n_steps)
        .map(|t| {
            let hour = (start_hour + t as f64 * timestep_hours).rem_euclid(24.0);
            p.panel_area * p.efficiency * p.irradiance(hour) * timestep_hours / 1000.0
        })
        .collect()
}

/// Seven days (Monday first) by 24 hourly activity values in [0, 1].
pub type WeeklyProfile = [[f64; 24]; 7];

const RESIDENTIAL_WEEKDAY: [f64; 24] = [
    0.10, 0.07, 0.04, 0.02, 0.02, 0.02, 0.02, 0.04, 0.07, 0.09, 0.10, 0.11, //
    0.12, 0.12, 0.11, 0.11, 0.12, 0.14, 0.16, 0.19, 0.24, 0.24, 0.23, 0.17,
];
const RESIDENTIAL_WEEKEND: [f64; 24] = [
    0.12, 0.09, 0.05, 0.03, 0.02, 0.02, 0.02, 0.03, 0.05, 0.08, 0.11, 0.13, //
    0.14, 0.15, 0.15, 0.14, 0.14, 0.15, 0.17, 0.20, 0.24, 0.24, 0.23, 0.18,
];
const OFFICE_WEEKDAY: [f64; 24] = [
    0.02, 0.02, 0.02, 0.02, 0.02, 0.02, 0.03, 0.06, 0.12, 0.18, 0.22, 0.23, //
    0.20, 0.21, 0.23, 0.22, 0.18, 0.12, 0.07, 0.05, 0.04, 0.03, 0.03, 0.02,
];
const OFFICE_WEEKEND: [f64; 24] = [0.03; 24];

/// Evening-peaked residential week.
pub fn residential_profile() -> WeeklyProfile {
    let mut p = [RESIDENTIAL_WEEKDAY; 7];
    p[5] = RESIDENTIAL_WEEKEND;
    p[6] = RESIDENTIAL_WEEKEND;
    p
}

/// Midday-peaked working days, flat weekends.
pub fn office_profile() -> WeeklyProfile {
    let mut p = [OFFICE_WEEKDAY; 7];
    p[5] = OFFICE_WEEKEND;
    p[6] = OFFICE_WEEKEND;
    p
}

/// Per-vSC user population and activity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficParams {
    pub users_per_vsc: f64,
    pub heavy_ratio: f64,
    /// MB per hour of an active heavy user.
    pub heavy_rate: f64,
    /// MB per hour of an active ordinary user.
    pub ordinary_rate: f64,
    pub profile: WeeklyProfile,
    /// Background macro-cell demand as a fraction of its capacity.
    pub mbs_background: f64,
}

impl TrafficParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.users_per_vsc >= 0.0 && self.users_per_vsc.is_finite()) {
            return Err(Error::config("traffic.users_per_vsc", "must be >= 0"));
        }
        if !(0.0..=1.0).contains(&self.heavy_ratio) {
            return Err(Error::config("traffic.heavy_ratio", "must lie in [0, 1]"));
        }
        if !(self.heavy_rate >= 0.0 && self.heavy_rate.is_finite()) {
            return Err(Error::config("traffic.heavy_rate", "must be >= 0"));
        }
        if !(self.ordinary_rate >= 0.0 && self.ordinary_rate.is_finite()) {
            return Err(Error::config("traffic.ordinary_rate", "must be >= 0"));
        }
        for (d, day) in self.profile.iter().enumerate() {
            for (h, v) in day.iter().enumerate() {
                if !(0.0..=1.0).contains(v) {
                    return Err(Error::config(
                        format!("traffic.profile[{d}][{h}]"),
                        format!("{v} outside [0, 1]"),
                    ));
                }
            }
        }
        if !(0.0..=1.0).contains(&self.mbs_background) {
            return Err(Error::config("traffic.mbs_background", "must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Offered load in Mbps when the profile value is 1.
    pub fn peak_mbps(&self) -> f64 {
        let mb_per_hour =
            self.users_per_vsc * (self.heavy_ratio * self.heavy_rate + (1.0 - self.heavy_ratio) * self.ordinary_rate);
        mb_per_hour * 8.0 / 3600.0
    }
}

/// Day of week (0 = Monday) and hour of day.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WeekTime {
    pub day: usize,
    pub hour: f64,
}

/// Offered demand (Mbps) per step of one vSC.
pub fn synth_traffic(p: &TrafficParams, timestep_hours: f64, n_steps: usize, start: WeekTime) -> Vec<f64> {
    let peak = p.peak_mbps();
    let week_start = start.day as f64 * 24.0 + start.hour;
    (0..n_steps)
        .map(|t| {
            let abs = (week_start + t as f64 * timestep_hours).rem_euclid(168.0);
            let day = (abs / 24.0).floor() as usize % 7;
            let hour = (abs - day as f64 * 24.0).floor() as usize % 24;
            peak * p.profile[day][hour]
        })
        .collect()
}

/// Per-step harvested energy and offered traffic of a cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceSet {
    /// kWh, indexed `[vsc][t]`.
    pub energy: Vec<Vec<f64>>,
    /// Mbps, indexed `[vsc][t]`.
    pub demand: Vec<Vec<f64>>,
    /// Mbps, indexed `[t]`.
    pub mbs_background_demand: Vec<f64>,
}

impl TraceSet {
    pub fn n_vsc(&self) -> usize {
        self.energy.len()
    }

    pub fn len(&self) -> usize {
        self.mbs_background_demand.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Shape, length and sign checks.
    pub fn validate(&self, n_vsc: usize, horizon: usize) -> Result<()> {
        if self.energy.len() != n_vsc || self.demand.len() != n_vsc {
            return Err(Error::config(
                "traces",
                format!(
                    "expected {n_vsc} vSC series, found {} energy and {} demand",
                    self.energy.len(),
                    self.demand.len()
                ),
            ));
        }
        let len = self.len();
        if self.energy.iter().chain(&self.demand).any(|s| s.len() != len) {
            return Err(Error::config("traces", "series lengths differ"));
        }
        if len < horizon {
            return Err(Error::TraceLength {
                found: len,
                needed: horizon,
            });
        }
        for (name, i, series) in self.columns() {
            for (t, &v) in series.iter().enumerate() {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(Error::TraceNegative {
                        row: t + 1,
                        column: column_name(name, i),
                        value: v,
                    });
                }
            }
        }
        Ok(())
    }

    fn columns(&self) -> impl Iterator<Item = (&'static str, usize, &Vec<f64>)> {
        let e = self.energy.iter().enumerate().map(|(i, s)| ("e", i + 1, s));
        let d = self.demand.iter().enumerate().map(|(i, s)| ("d", i + 1, s));
        e.chain(d)
            .chain(std::iter::once(("d_mbs", 0, &self.mbs_background_demand)))
    }

    /// Writes the CSV trace format. Values use the shortest representation
    /// that parses back to the same `f64`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        let io = |e: csv::Error| Error::io("traces", e.into());
        w.write_record(header(self.n_vsc())).map_err(io)?;
        for t in 0..self.len() {
            let mut row = vec![t.to_string()];
            row.extend(self.energy.iter().map(|s| s[t].to_string()));
            row.extend(self.demand.iter().map(|s| s[t].to_string()));
            row.push(self.mbs_background_demand[t].to_string());
            w.write_record(&row).map_err(io)?;
        }
        w.flush().map_err(|e| Error::io("traces", e))?;
        Ok(())
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

fn column_name(prefix: &str, i: usize) -> String {
    if i == 0 {
        prefix.to_string()
    } else {
        format!("{prefix}_{i}")
    }
}

fn header(n_vsc: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    h.extend((1..=n_vsc).map(|i| format!("e_{i}")));
    h.extend((1..=n_vsc).map(|i| format!("d_{i}")));
    h.push("d_mbs".to_string());
    h
}

/// Parses a trace CSV for `n_vsc` cells and checks it covers `horizon` steps.
pub fn read_traces<R: Read>(input: R, n_vsc: usize, horizon: usize) -> Result<TraceSet> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let expected = header(n_vsc);
    let found = rdr.headers().map_err(|e| parse_error(&e, 1))?.clone();
    if found.iter().ne(expected.iter().map(String::as_str)) {
        return Err(Error::TraceParse {
            line: 1,
            message: format!("header must be `{}`", expected.join(",")),
        });
    }
    let mut set = TraceSet {
        energy: vec![Vec::new(); n_vsc],
        demand: vec![Vec::new(); n_vsc],
        mbs_background_demand: Vec::new(),
    };
    for (row_idx, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| parse_error(&e, row_idx as u64 + 2))?;
        let line = record.position().map_or(row_idx as u64 + 2, |p| p.line());
        if record.len() != expected.len() {
            return Err(Error::TraceParse {
                line,
                message: format!("expected {} fields, found {}", expected.len(), record.len()),
            });
        }
        let t: usize = record[0].parse().map_err(|_| Error::TraceParse {
            line,
            message: format!("bad timestep `{}`", &record[0]),
        })?;
        if t != row_idx {
            return Err(Error::TraceParse {
                line,
                message: format!("timestep {t} out of sequence, expected {row_idx}"),
            });
        }
        let mut values = Vec::with_capacity(expected.len() - 1);
        for (col, field) in expected.iter().zip(record.iter()).skip(1) {
            let v: f64 = field.parse().map_err(|_| Error::TraceParse {
                line,
                message: format!("column `{col}`: cannot parse `{field}` as a number"),
            })?;
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::TraceNegative {
                    row: row_idx + 1,
                    column: col.clone(),
                    value: v,
                });
            }
            values.push(v);
        }
        for i in 0..n_vsc {
            set.energy[i].push(values[i]);
            set.demand[i].push(values[n_vsc + i]);
        }
        set.mbs_background_demand.push(values[2 * n_vsc]);
    }
    set.validate(n_vsc, horizon)?;
    Ok(set)
}

fn parse_error(e: &csv::Error, fallback_line: u64) -> Error {
    let line = e.position().map_or(fallback_line, |p| p.line());
    Error::TraceParse {
        line,
        message: e.to_string(),
    }
}

pub fn read_traces_file(path: &Path, n_vsc: usize, horizon: usize) -> Result<TraceSet> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_traces(std::io::BufReader::new(file), n_vsc, horizon)
}
