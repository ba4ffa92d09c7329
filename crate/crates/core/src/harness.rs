//! Run orchestration behind the `vsplit` binary: prepares a scenario,
//! executes one subcommand and writes its run directory.

use std::path::{Path, PathBuf};

use log::{debug, info};

use crate::error::{Error, Result};
use crate::mode::SplitMode;
use crate::optimizer::solve;
use crate::policies::{compare, run_policy, PolicyRun, StaticPolicy};
use crate::report::{schedule_csv, selection_csv, steps_csv, summary_csv, summary_table, RunManifest};
use crate::scenario::{Scenario, ScenarioConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Optimal schedule.
    Solve,
    /// One static policy.
    Policy(StaticPolicy),
    /// Optimal plus every static policy.
    Compare,
    /// Writes the scenario traces as CSV.
    GenTraces,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Policy(_) => "policy",
            Command::Compare => "compare",
            Command::GenTraces => "gen-traces",
        }
    }
}

/// Parses `CRAN`, `UpperLower` or `MACPHY`, ignoring case, `-` and `_`.
pub fn parse_policy(name: &str) -> Result<StaticPolicy> {
    let key: String = name
        .chars()
        .filter(|c| *c != '-' && *c != '_')
        .collect::<String>()
        .to_lowercase();
    let mode = match key.as_str() {
        "cran" => SplitMode::Cran,
        "upperlower" | "ul" => SplitMode::UpperLower,
        "macphy" | "mp" => SplitMode::MacPhy,
        _ => {
            return Err(Error::config(
                "policy",
                format!("unknown policy `{name}`, expected CRAN, UpperLower or MACPHY"),
            ))
        }
    };
    StaticPolicy::new(mode)
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub traces: Option<PathBuf>,
    pub seed: Option<u64>,
    pub fidelity_mode: bool,
}

impl Overrides {
    pub fn apply(&self, config: &mut ScenarioConfig) {
        if let Some(path) = &self.traces {
            config.traces_file = Some(path.clone());
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if self.fidelity_mode {
            config.solver.fidelity_mode = true;
        }
    }
}

/// Loads the config at `path` (relative trace paths resolve against its
/// directory) and applies `overrides`. A `--traces` path resolves against
/// the working directory.
pub fn prepare(path: &Path, overrides: &Overrides) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut config = ScenarioConfig::from_toml(&text)?;
    let base = path.parent();
    if let (Some(dir), Some(file)) = (base, config.traces_file.as_ref()) {
        if file.is_relative() {
            config.traces_file = Some(dir.join(file));
        }
    }
    overrides.apply(&mut config);
    Scenario::from_config(config, None)
}

/// Same as [`prepare`] for a bundled preset.
pub fn prepare_preset(name: &str, overrides: &Overrides) -> Result<Scenario> {
    let mut config = ScenarioConfig::preset(name)?;
    overrides.apply(&mut config);
    Scenario::from_config(config, None)
}

/// What a run leaves behind besides its files.
#[derive(Debug, Clone)]
pub struct RunOutput {
    /// Also written as `manifest.json`.
    pub manifest: RunManifest,
    /// Terminal summary of the policies run, empty for `gen-traces`.
    pub table: String,
}

/// Runs `command` and fills `out_dir` (created if missing).
pub fn run(command: Command, scenario: &Scenario, out_dir: &Path) -> Result<RunOutput> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut manifest = RunManifest::new(command.name(), &scenario.digest);
    info!(
        "{}: N={} K={} digest {}",
        command.name(),
        scenario.n_vsc,
        scenario.horizon,
        &scenario.digest[..12]
    );
    manifest.write_output(out_dir, "scenario.toml", scenario.config.to_toml().as_bytes())?;

    let runs = match command {
        Command::GenTraces => {
            let mut buf = Vec::new();
            scenario.traces.write_csv(&mut buf)?;
            manifest.write_output(out_dir, "traces.csv", &buf)?;
            Vec::new()
        }
        Command::Solve => {
            let result = solve(scenario)?;
            info!(
                "optimum {:.6} after {} expansions",
                result.total_cost, result.stats.nodes_expanded
            );
            manifest.search = Some(result.stats.clone());
            vec![PolicyRun::new("Optimal", result, scenario.delta_t)]
        }
        Command::Policy(p) => vec![PolicyRun::new(p.name(), run_policy(p, scenario)?, scenario.delta_t)],
        Command::Compare => {
            let report = compare(scenario, &StaticPolicy::all())?;
            manifest.search = Some(report.optimal().result.stats.clone());
            report.runs
        }
    };
    let table = if runs.is_empty() {
        String::new()
    } else {
        write_runs(&mut manifest, out_dir, &runs)?;
        summary_table(&runs)
    };
    manifest.finish(out_dir)?;
    debug!("wrote {} files to {}", manifest.outputs.len() + 1, out_dir.display());
    Ok(RunOutput { manifest, table })
}

/// The first run gets `schedule.csv` and `steps.csv`; later runs get the
/// same files suffixed with their policy name.
fn write_runs(manifest: &mut RunManifest, dir: &Path, runs: &[PolicyRun]) -> Result<()> {
    for (i, r) in runs.iter().enumerate() {
        let suffix = if i == 0 { String::new() } else { format!("_{}", r.name) };
        manifest.write_output(
            dir,
            &format!("schedule{suffix}.csv"),
            schedule_csv(&r.result).as_bytes(),
        )?;
        manifest.write_output(dir, &format!("steps{suffix}.csv"), steps_csv(&r.result).as_bytes())?;
    }
    manifest.write_output(dir, "summary.csv", summary_csv(runs).as_bytes())?;
    manifest.write_output(dir, "selection.csv", selection_csv(runs).as_bytes())?;
    Ok(())
}
