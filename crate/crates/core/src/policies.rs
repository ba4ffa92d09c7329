//! Static split baselines and the comparison against the optimum.
//!
//! A static policy keeps every vSC in one fixed split while its battery
//! allows it and switches it off otherwise. vSCs decide independently.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::mode::{ModeVector, SplitMode};
use crate::optimizer::{evaluate, solve_table, SearchResult, StageTable};
use crate::scenario::{Scenario, SwitchOffCheck};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StaticPolicy {
    fixed_mode: SplitMode,
}

impl StaticPolicy {
    pub fn new(fixed_mode: SplitMode) -> Result<Self> {
        if fixed_mode == SplitMode::Off {
            return Err(Error::config("policy", "a static policy cannot be fixed to Off"));
        }
        Ok(StaticPolicy { fixed_mode })
    }

    pub fn fixed_mode(self) -> SplitMode {
        self.fixed_mode
    }

    /// CRAN, UpperLower and MACPHY.
    pub fn all() -> Vec<StaticPolicy> {
        [SplitMode::Cran, SplitMode::UpperLower, SplitMode::MacPhy]
            .into_iter()
            .map(|m| StaticPolicy { fixed_mode: m })
            .collect()
    }

    pub fn name(self) -> &'static str {
        self.fixed_mode.name()
    }
}

/// A complete feasible sequence and its cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Incumbent {
    pub cost: f64,
    pub codes: Vec<ModeVector>,
}

/// Mode vectors chosen by `policy` at every step.
pub fn static_codes(table: &StageTable, policy: StaticPolicy, check: SwitchOffCheck) -> Vec<ModeVector> {
    let n = table.n_vsc;
    let fixed = policy.fixed_mode;
    let mut batteries = table.initial.clone();
    let mut codes = Vec::with_capacity(table.horizon);
    for step in 0..table.horizon {
        let modes: Vec<SplitMode> = (0..n)
            .map(|i| {
                let keep = match check {
                    SwitchOffCheck::Projected => table.is_feasible(table.next_battery(step, i, fixed, batteries[i])),
                    SwitchOffCheck::Current => table.is_feasible(batteries[i]),
                };
                if keep {
                    fixed
                } else {
                    SplitMode::Off
                }
            })
            .collect();
        for (i, b) in batteries.iter_mut().enumerate() {
            *b = table.next_battery(step, i, modes[i], *b);
        }
        codes.push(ModeVector::from_modes(&modes));
    }
    codes
}

pub fn run_policy_table(table: &StageTable, policy: StaticPolicy, check: SwitchOffCheck) -> SearchResult {
    evaluate(table, &static_codes(table, policy, check))
}

/// Runs `policy` over the scenario horizon.
pub fn run_policy(policy: StaticPolicy, scenario: &Scenario) -> Result<SearchResult> {
    let table = StageTable::build(scenario, Exec::Sequential)?;
    Ok(run_policy_table(&table, policy, scenario.switch_off_check()))
}

/// Cheapest static policy whose whole trajectory respects the threshold.
pub fn best_static_incumbent(table: &StageTable, check: SwitchOffCheck) -> Option<Incumbent> {
    StaticPolicy::all()
        .into_iter()
        .filter_map(|p| {
            let codes = static_codes(table, p, check);
            let r = evaluate(table, &codes);
            let feasible = r.batteries_per_step.iter().flatten().all(|&b| table.is_feasible(b));
            feasible.then_some(Incumbent {
                cost: r.total_cost,
                codes,
            })
        })
        .min_by(|a, b| a.cost.total_cmp(&b.cost).then_with(|| a.codes.cmp(&b.codes)))
}

/// One row of a comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyRun {
    pub name: String,
    pub result: SearchResult,
    pub grid_energy_kwh: f64,
    pub avg_drop_pct: f64,
    /// Percent of (vSC, step) slots per mode.
    pub selection_pct: [f64; 4],
    /// Percent of steps per mode, `[vsc][mode]`.
    pub selection_pct_per_vsc: Vec<[f64; 4]>,
}

impl PolicyRun {
    pub fn new(name: &str, result: SearchResult, delta_t: f64) -> Self {
        PolicyRun {
            name: name.to_string(),
            grid_energy_kwh: result.grid_energy_kwh(delta_t),
            avg_drop_pct: result.avg_drop_pct(),
            selection_pct: result.selection_pct(),
            selection_pct_per_vsc: result.selection_pct_per_vsc(),
            result,
        }
    }
}

/// The optimum followed by each requested static policy.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub runs: Vec<PolicyRun>,
    pub delta_t: f64,
}

impl ComparisonReport {
    pub fn optimal(&self) -> &PolicyRun {
        &self.runs[0]
    }

    pub fn get(&self, name: &str) -> Option<&PolicyRun> {
        self.runs.iter().find(|r| r.name == name)
    }
}

/// Solves the scenario and runs each policy on the same dynamics. The runs
/// are independent and execute on the rayon pool when available.
pub fn compare(scenario: &Scenario, policies: &[StaticPolicy]) -> Result<ComparisonReport> {
    compare_with(scenario, policies, Exec::Parallel)
}

pub fn compare_with(scenario: &Scenario, policies: &[StaticPolicy], exec: Exec) -> Result<ComparisonReport> {
    if policies.is_empty() {
        return Err(Error::config("policies", "at least one policy is required"));
    }
    let table = StageTable::build(scenario, exec)?;
    let check = scenario.switch_off_check();
    let cfg = scenario.solver();
    let jobs: Vec<Option<StaticPolicy>> = std::iter::once(None)
        .chain(policies.iter().copied().map(Some))
        .collect();
    let runs = exec.map(&jobs, |job| match job {
        None => {
            let warm = if cfg.warm_start && !cfg.fidelity_mode {
                best_static_incumbent(&table, check)
            } else {
                None
            };
            solve_table(&table, cfg, warm).map(|r| PolicyRun::new("Optimal", r, scenario.delta_t))
        }
        Some(p) => Ok(PolicyRun::new(
            p.name(),
            run_policy_table(&table, *p, check),
            scenario.delta_t,
        )),
    });
    Ok(ComparisonReport {
        runs: runs.into_iter().collect::<Result<_>>()?,
        delta_t: scenario.delta_t,
    })
}
