//! CSV reports and the run manifest.
//!
//! Numbers are written with six decimals and a `.` separator, rows end with
//! LF, so identical inputs give byte-identical files on every platform.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::optimizer::{SearchResult, SearchStats};
use crate::policies::PolicyRun;
use crate::scenario::hex;

/// Fixed six-decimal formatting. Negative zero prints as zero.
pub fn fmt6(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

/// `t,vsc,mode,mode_name,battery_kwh,load`: one row per step and vSC, both
/// 1-based. `mode` is the numeric mode code.
pub fn schedule_csv(result: &SearchResult) -> String {
    let mut out = String::from("t,vsc,mode,mode_name,battery_kwh,load\n");
    for (t, modes) in result.modes_per_step.iter().enumerate() {
        for (i, m) in modes.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                t + 1,
                i + 1,
                m.code(),
                m.name(),
                fmt6(result.batteries_per_step[t][i]),
                fmt6(result.loads_per_step[t][i])
            );
        }
    }
    out
}

/// `t,grid_watts,drop_rate,cost`.
pub fn steps_csv(result: &SearchResult) -> String {
    let mut out = String::from("t,grid_watts,drop_rate,cost\n");
    for (t, o) in result.per_step.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            t + 1,
            fmt6(o.grid_watts),
            fmt6(o.drop_rate),
            fmt6(o.cost)
        );
    }
    out
}

/// One row per policy with totals and the share of (vSC, step) slots spent
/// in each mode.
pub fn summary_csv(runs: &[PolicyRun]) -> String {
    let mut out =
        String::from("policy,total_cost,grid_energy_kwh,avg_drop_pct,off_pct,cran_pct,upper_lower_pct,mac_phy_pct\n");
    for r in runs {
        let _ = write!(
            out,
            "{},{},{},{}",
            r.name,
            fmt6(r.result.total_cost),
            fmt6(r.grid_energy_kwh),
            fmt6(r.avg_drop_pct)
        );
        for p in r.selection_pct {
            let _ = write!(out, ",{}", fmt6(p));
        }
        out.push('\n');
    }
    out
}

/// Mode shares per policy and vSC.
pub fn selection_csv(runs: &[PolicyRun]) -> String {
    let mut out = String::from("policy,vsc,off_pct,cran_pct,upper_lower_pct,mac_phy_pct\n");
    for r in runs {
        for (i, row) in r.selection_pct_per_vsc.iter().enumerate() {
            let _ = write!(out, "{},{}", r.name, i + 1);
            for p in row {
                let _ = write!(out, ",{}", fmt6(*p));
            }
            out.push('\n');
        }
    }
    out
}

/// Plain-text table for the terminal.
pub fn summary_table(runs: &[PolicyRun]) -> String {
    let mut out = format!(
        "{:<11} {:>10} {:>10} {:>8} {:>7} {:>7} {:>7} {:>7}\n",
        "policy", "cost", "grid kWh", "drop %", "Off %", "CRAN %", "UL %", "MP %"
    );
    for r in runs {
        let s = r.selection_pct;
        let _ = writeln!(
            out,
            "{:<11} {:>10.4} {:>10.3} {:>8.3} {:>7.1} {:>7.1} {:>7.1} {:>7.1}",
            r.name, r.result.total_cost, r.grid_energy_kwh, r.avg_drop_pct, s[0], s[1], s[2], s[3]
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
}

/// Provenance of one run directory.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub scenario_digest: String,
    /// Seconds since the Unix epoch.
    pub started_unix: u64,
    pub finished_unix: u64,
    pub outputs: Vec<OutputFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchStats>,
}

impl RunManifest {
    pub fn new(subcommand: &str, scenario_digest: &str) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            scenario_digest: scenario_digest.to_string(),
            started_unix: unix_now(),
            finished_unix: 0,
            outputs: Vec::new(),
            search: None,
        }
    }

    /// Writes `contents` to `dir/name` and records it.
    pub fn write_output(&mut self, dir: &Path, name: &str, contents: &[u8]) -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        self.record(name, contents);
        Ok(())
    }

    /// Records a file that was written elsewhere.
    pub fn record(&mut self, name: &str, contents: &[u8]) {
        self.outputs.push(OutputFile {
            path: name.to_string(),
            sha256: hex(&Sha256::digest(contents)),
        });
    }

    /// Stamps the finish time and writes `manifest.json` into `dir`.
    pub fn finish(&mut self, dir: &Path) -> Result<()> {
        self.finished_unix = unix_now();
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        let path = dir.join("manifest.json");
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }
}

fn unix_now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policies::compare;
    use crate::scenario::{Scenario, ScenarioConfig};
    use crate::StaticPolicy;

    #[test]
    fn six_decimals_without_negative_zero() {
        assert_eq!(fmt6(1.0), "1.000000");
        assert_eq!(fmt6(-1e-9), "0.000000");
        assert_eq!(fmt6(2.0 / 3.0), "0.666667");
        assert_eq!(fmt6(-0.5), "-0.500000");
    }

    #[test]
    fn csv_shapes() {
        let s = Scenario::from_config(ScenarioConfig::from_toml("n_vsc = 2\nhorizon = 3\n").unwrap(), None).unwrap();
        let report = compare(&s, &StaticPolicy::all()).unwrap();
        let opt = &report.optimal().result;

        let schedule = schedule_csv(opt);
        assert_eq!(schedule.lines().count(), 1 + 3 * 2);
        assert!(!schedule.contains('\r'));
        for line in schedule.lines().skip(1) {
            let mode: u8 = line.split(',').nth(2).unwrap().parse().unwrap();
            assert!(mode <= 3);
        }
        assert_eq!(steps_csv(opt).lines().count(), 4);

        let summary = summary_csv(&report.runs);
        let names: Vec<_> = summary.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
        assert_eq!(names, ["Optimal", "CRAN", "UpperLower", "MACPHY"]);
        for line in summary.lines().skip(1) {
            for field in line.split(',').skip(1) {
                assert_eq!(field.split('.').nth(1).unwrap().len(), 6, "{field}");
            }
        }
        assert_eq!(selection_csv(&report.runs).lines().count(), 1 + 4 * 2);
        assert_eq!(summary_table(&report.runs).lines().count(), 5);
    }

    #[test]
    fn manifest_hashes_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = RunManifest::new("solve", "abc");
        m.write_output(dir.path(), "a.csv", b"x\n").unwrap();
        m.finish(dir.path()).unwrap();
        assert_eq!(
            m.outputs[0].sha256,
            "73cb3858a687a8494ca3323053016282f3dad39d42cf62ca4e79dda2aac7d9ac"
        );
        let text = std::fs::read_to_string(dir.path().join("manifest.json")).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["scenario_digest"], "abc");
        assert_eq!(v["outputs"][0]["path"], "a.csv");
    }
}
