//! Minimum-cost mode sequence over the stage-structured decision graph.
//!
//! Stage `t` (1..=K) holds one node per cluster mode vector; an artificial
//! source at t = 0 and sink at t = K + 1 are joined by zero-cost arcs. The
//! arc into a stage-`t` node costs the weighted step cost of its mode vector
//! at `t`, and it is only usable if every battery stays strictly above the
//! threshold after the step.

mod brute;
mod literal;
mod search;
mod table;

use std::sync::Arc;

use serde::Serialize;

pub use brute::{brute_force, brute_force_table};
pub use search::{solve, solve_table};
pub use table::StageTable;

use crate::dynamics::StepOutcome;
use crate::mode::{ModeVector, SplitMode};

/// Bookkeeping of a search run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SearchStats {
    /// Labels taken from OPEN and expanded.
    pub nodes_expanded: u64,
    /// Labels accepted into the label store.
    pub labels_created: u64,
    /// Successive values of UPPER; the last one is the optimum.
    pub incumbents: Vec<f64>,
    /// Sequences covered by brute force (including pruned ones).
    pub sequences_scanned: u64,
}

/// A mode sequence together with its evaluated trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    /// `[t][vsc]` for t = 1..=K.
    pub modes_per_step: Vec<Vec<SplitMode>>,
    pub total_cost: f64,
    pub per_step: Vec<StepOutcome>,
    /// Battery after each step, `[t][vsc]`.
    pub batteries_per_step: Vec<Vec<f64>>,
    /// Carried load fraction of each vSC, `[t][vsc]`.
    pub loads_per_step: Vec<Vec<f64>>,
    pub stats: SearchStats,
}

impl SearchResult {
    /// Grid energy over the horizon in kWh.
    pub fn grid_energy_kwh(&self, delta_t: f64) -> f64 {
        self.per_step.iter().map(|o| o.grid_watts).sum::<f64>() * delta_t / 1000.0
    }

    /// Mean per-step drop rate in percent.
    pub fn avg_drop_pct(&self) -> f64 {
        if self.per_step.is_empty() {
            return 0.0;
        }
        100.0 * self.per_step.iter().map(|o| o.drop_rate).sum::<f64>() / self.per_step.len() as f64
    }

    /// Share of steps in each mode, percent, `[vsc][mode]`.
    pub fn selection_pct_per_vsc(&self) -> Vec<[f64; 4]> {
        let n = self.modes_per_step.first().map_or(0, Vec::len);
        let k = self.modes_per_step.len() as f64;
        let mut out = vec![[0.0; 4]; n];
        for row in &self.modes_per_step {
            for (i, &m) in row.iter().enumerate() {
                out[i][m as usize] += 100.0 / k;
            }
        }
        out
    }

    /// Share of (vSC, step) slots in each mode, percent.
    pub fn selection_pct(&self) -> [f64; 4] {
        let per = self.selection_pct_per_vsc();
        let mut out = [0.0; 4];
        for row in &per {
            for (o, v) in out.iter_mut().zip(row) {
                *o += v / per.len() as f64;
            }
        }
        out
    }

    pub fn codes(&self) -> Vec<ModeVector> {
        self.modes_per_step.iter().map(|m| ModeVector::from_modes(m)).collect()
    }
}

/// Replays `codes` from the initial batteries. Costs are accumulated in step
/// order, the same way the search accumulates labels.
pub fn evaluate(table: &StageTable, codes: &[ModeVector]) -> SearchResult {
    let n = table.n_vsc;
    let mut batteries = table.initial.clone();
    let mut total = 0.0;
    let mut result = SearchResult {
        modes_per_step: Vec::with_capacity(codes.len()),
        total_cost: 0.0,
        per_step: Vec::with_capacity(codes.len()),
        batteries_per_step: Vec::with_capacity(codes.len()),
        loads_per_step: Vec::with_capacity(codes.len()),
        stats: SearchStats::default(),
    };
    for (s, &code) in codes.iter().enumerate() {
        let modes = code.modes(n);
        for (i, b) in batteries.iter_mut().enumerate() {
            *b = table.next_battery(s, i, modes[i], *b);
        }
        let o = table.outcome(s, code);
        total += o.cost;
        result
            .loads_per_step
            .push((0..n).map(|i| table.vsc_load(s, i, modes[i])).collect());
        result.per_step.push(o);
        result.batteries_per_step.push(batteries.clone());
        result.modes_per_step.push(modes);
    }
    result.total_cost = total;
    result
}

/// A partial path through the decision graph.
#[derive(Debug, Clone, PartialEq)]
pub struct PathLabel {
    /// Stage of the label; 0 is the artificial source.
    pub t: usize,
    pub modes: Vec<SplitMode>,
    pub batteries: Vec<f64>,
    pub cost_so_far: f64,
    pub parent: Option<Arc<PathLabel>>,
}

impl PathLabel {
    /// The artificial source node.
    pub fn root(table: &StageTable) -> Arc<PathLabel> {
        Arc::new(PathLabel {
            t: 0,
            modes: Vec::new(),
            batteries: table.initial.clone(),
            cost_so_far: 0.0,
            parent: None,
        })
    }

    /// Mode vectors from t = 1 up to this label.
    pub fn sequence(&self) -> Vec<ModeVector> {
        let mut out = Vec::with_capacity(self.t);
        let mut cur = Some(self);
        while let Some(l) = cur {
            if l.t > 0 {
                out.push(ModeVector::from_modes(&l.modes));
            }
            cur = l.parent.as_deref();
        }
        out.reverse();
        out
    }
}

/// All battery-feasible children of `label` in ascending code order, each
/// carrying the arc cost of its mode vector at the next stage.
pub fn expand(label: &Arc<PathLabel>, table: &StageTable) -> Vec<PathLabel> {
    assert!(label.t < table.horizon, "cannot expand a stage-K label");
    let step = label.t;
    let moves = table.feasible_moves(step, &label.batteries);
    let mut children = Vec::new();
    let mut buf = Vec::new();
    table::for_each_child(&moves, &mut buf, |code, batteries| {
        children.push(PathLabel {
            t: step + 1,
            modes: code.modes(table.n_vsc),
            batteries: batteries.to_vec(),
            cost_so_far: label.cost_so_far + table.cost(step, code),
            parent: Some(Arc::clone(label)),
        });
    });
    children
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Exec;
    use crate::scenario::{Scenario, ScenarioConfig};
    use crate::traces::TraceSet;

    fn toy(initial: f64, demand: f64) -> Scenario {
        let config =
            ScenarioConfig::from_toml(&format!("n_vsc = 1\nhorizon = 2\n[battery]\ninitial_kwh = {initial}\n"))
                .unwrap();
        Scenario::from_config(config, None)
            .unwrap()
            .with_traces(TraceSet {
                energy: vec![vec![0.0, 0.0]],
                demand: vec![vec![demand, demand]],
                mbs_background_demand: vec![0.0, 0.0],
            })
            .unwrap()
    }

    #[test]
    fn ample_battery_gives_full_fan_out() {
        let s = toy(2.0, 10.0);
        let table = StageTable::build(&s, Exec::Sequential).unwrap();
        let kids = expand(&PathLabel::root(&table), &table);
        assert_eq!(kids.len(), 4);
        for (k, m) in kids.iter().zip(SplitMode::ALL) {
            assert_eq!(k.modes, vec![m]);
            assert_eq!(k.cost_so_far, table.cost(0, ModeVector(m as u32)));
        }
    }

    #[test]
    fn tight_battery_only_allows_off_and_cran() {
        // 0.4 kWh threshold; CRAN draws 0.074 kWh, UpperLower 0.129 kWh.
        let s = toy(0.5, 10.0);
        let table = StageTable::build(&s, Exec::Sequential).unwrap();
        let kids = expand(&PathLabel::root(&table), &table);
        let modes: Vec<_> = kids.iter().map(|k| k.modes[0]).collect();
        assert_eq!(modes, vec![SplitMode::Off, SplitMode::Cran]);
    }

    #[test]
    fn three_cells_at_most_64_children() {
        let s = Scenario::preset("residential_jul").unwrap();
        let table = StageTable::build(&s, Exec::Sequential).unwrap();
        let kids = expand(&PathLabel::root(&table), &table);
        assert!(kids.len() <= 64);
        let grand = expand(&Arc::new(kids[5].clone()), &table);
        assert_eq!(grand[0].sequence().len(), 2);
        assert_eq!(grand[0].sequence()[0], ModeVector::from_modes(&kids[5].modes));
    }
}
