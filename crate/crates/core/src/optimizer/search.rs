//! Depth-first label-correcting search.
//!
//! Battery levels are path dependent, so a single label per (t, mode
//! vector) node is not enough for optimality. Each node keeps a set of
//! mutually non-dominated labels: a label is dropped when another label at
//! the same node has no higher cost and no lower battery in any vSC. Equal
//! costs are broken toward the lexicographically smaller prefix, which makes
//! the returned optimum the lexicographically smallest one.
//!
//! Children are rejected when a battery ends at or below the threshold, or
//! when their cost plus a lower bound on the remaining steps exceeds UPPER.

use std::cmp::Ordering;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};

use super::literal;
use super::table::{for_each_child, StageTable};
use super::{evaluate, SearchResult, SearchStats};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::mode::ModeVector;
use crate::policies::{best_static_incumbent, Incumbent};
use crate::scenario::{Scenario, SolverConfig};

const NONE: u32 = u32::MAX;

/// Solves `scenario` with its configured solver switches.
pub fn solve(scenario: &Scenario) -> Result<SearchResult> {
    let table = StageTable::build(scenario, Exec::Parallel)?;
    let cfg = scenario.solver();
    let warm = if cfg.warm_start && !cfg.fidelity_mode {
        best_static_incumbent(&table, scenario.switch_off_check())
    } else {
        None
    };
    solve_table(&table, cfg, warm)
}

/// Solves a prebuilt table, optionally seeding UPPER with `warm`, which must
/// be a feasible sequence.
pub fn solve_table(table: &StageTable, cfg: &SolverConfig, warm: Option<Incumbent>) -> Result<SearchResult> {
    if cfg.fidelity_mode {
        return literal::solve(table);
    }
    let upper = SharedUpper::new(warm.as_ref().map_or(f64::INFINITY, |w| w.cost));
    let (best, stats, deepest) = if cfg.parallel && Exec::Parallel.is_parallel() {
        solve_parallel(table, cfg, warm, &upper)
    } else {
        let mut s = Search::new(table, cfg, warm, &upper);
        s.run(0);
        (s.best, s.stats, s.deepest)
    };
    match best {
        Some(b) => {
            let mut result = evaluate(table, &b.codes);
            debug_assert_eq!(result.total_cost, b.cost);
            result.stats = stats;
            Ok(result)
        }
        None => Err(Error::Infeasible { timestep: deepest + 1 }),
    }
}

fn solve_parallel(
    table: &StageTable,
    cfg: &SolverConfig,
    warm: Option<Incumbent>,
    upper: &SharedUpper,
) -> (Option<Incumbent>, SearchStats, usize) {
    // First-stage children are searched as independent subtrees that share
    // only UPPER.
    let moves = table.feasible_moves(0, &table.initial);
    let mut first = Vec::new();
    let mut buf = Vec::new();
    for_each_child(&moves, &mut buf, |code, b| first.push((code, b.to_vec())));
    if first.is_empty() {
        return (warm, SearchStats::default(), 0);
    }
    let runs = Exec::Parallel.map(&first, |(code, batteries)| {
        let mut s = Search::new(table, cfg, warm.clone(), upper);
        s.stats.nodes_expanded += 1;
        let a = table.cost(0, *code);
        if table.horizon == 1 {
            s.offer_terminal(0, *code, a);
        } else if !s.pruned_by_bound(a, 1, batteries) {
            let id = s.push_label(1, code.0, a, 0, batteries);
            s.run(id);
        }
        (s.best, s.stats, s.deepest.max(1))
    });
    let mut best: Option<Incumbent> = None;
    let mut stats = SearchStats::default();
    let mut deepest = 0;
    for (b, st, d) in runs {
        stats.nodes_expanded += st.nodes_expanded;
        stats.labels_created += st.labels_created;
        deepest = deepest.max(d);
        if let Some(b) = b {
            if best.as_ref().is_none_or(|cur| b.better_than(cur)) {
                best = Some(b);
            }
        }
    }
    stats.incumbents = best.iter().map(|b| b.cost).collect();
    (best, stats, deepest)
}

impl Incumbent {
    fn better_than(&self, other: &Incumbent) -> bool {
        match self.cost.total_cmp(&other.cost) {
            Ordering::Less => true,
            Ordering::Equal => self.codes < other.codes,
            Ordering::Greater => false,
        }
    }
}

/// UPPER shared between concurrent subtree searches. Costs are never
/// negative, so the bit patterns order like the values.
struct SharedUpper(AtomicU64);

impl SharedUpper {
    fn new(v: f64) -> Self {
        SharedUpper(AtomicU64::new(v.to_bits()))
    }

    fn get(&self) -> f64 {
        f64::from_bits(self.0.load(AtomicOrdering::Relaxed))
    }

    fn offer(&self, v: f64) {
        self.0.fetch_min(v.to_bits(), AtomicOrdering::Relaxed);
    }
}

struct Search<'a> {
    table: &'a StageTable,
    bound_pruning: bool,
    lower_bound: bool,
    upper: &'a SharedUpper,
    // Label arena; index 0 is the source.
    stage: Vec<u16>,
    code: Vec<u32>,
    cost: Vec<f64>,
    parent: Vec<u32>,
    alive: Vec<bool>,
    batteries: Vec<f64>,
    /// Live labels per `(stage - 1) * n_codes + code`, stages 1..K-1.
    store: Vec<Vec<u32>>,
    best: Option<Incumbent>,
    stats: SearchStats,
    deepest: usize,
}

impl<'a> Search<'a> {
    fn new(table: &'a StageTable, cfg: &SolverConfig, warm: Option<Incumbent>, upper: &'a SharedUpper) -> Self {
        let mut stats = SearchStats::default();
        if let Some(w) = &warm {
            stats.incumbents.push(w.cost);
        }
        Search {
            table,
            bound_pruning: cfg.bound_pruning,
            lower_bound: cfg.lower_bound,
            upper,
            stage: vec![0],
            code: vec![0],
            cost: vec![0.0],
            parent: vec![NONE],
            alive: vec![true],
            batteries: table.initial.clone(),
            store: vec![Vec::new(); table.horizon.saturating_sub(1) * table.n_codes],
            best: warm,
            stats,
            deepest: 0,
        }
    }

    fn upper(&self) -> f64 {
        let local = self.best.as_ref().map_or(f64::INFINITY, |b| b.cost);
        local.min(self.upper.get())
    }

    /// True when a label of cost `d` at `stage` cannot beat UPPER. Equal
    /// costs survive so ties can be settled lexicographically.
    fn pruned_by_bound(&self, d: f64, stage: usize, batteries: &[f64]) -> bool {
        if !self.bound_pruning {
            return false;
        }
        let u = self.upper();
        if u == f64::INFINITY {
            return false;
        }
        let lb = if self.lower_bound {
            self.table.battery_lower_bound(stage, batteries)
        } else {
            0.0
        };
        d + lb > u + 1e-12 * u.abs().max(1.0)
    }

    fn batt(&self, id: u32) -> &[f64] {
        let n = self.table.n_vsc;
        &self.batteries[id as usize * n..(id as usize + 1) * n]
    }

    fn push_label(&mut self, stage: usize, code: u32, cost: f64, parent: u32, batteries: &[f64]) -> u32 {
        let id = self.stage.len() as u32;
        self.stage.push(stage as u16);
        self.code.push(code);
        self.cost.push(cost);
        self.parent.push(parent);
        self.alive.push(true);
        self.batteries.extend_from_slice(batteries);
        self.stats.labels_created += 1;
        if stage < self.table.horizon {
            self.store[(stage - 1) * self.table.n_codes + code as usize].push(id);
        }
        id
    }

    /// Mode vectors from stage 1 up to label `id`.
    fn prefix(&self, mut id: u32) -> Vec<ModeVector> {
        let mut out = Vec::with_capacity(self.stage[id as usize] as usize + 1);
        while id != 0 && id != NONE {
            out.push(ModeVector(self.code[id as usize]));
            id = self.parent[id as usize];
        }
        out.reverse();
        out
    }

    fn offer_terminal(&mut self, parent: u32, code: ModeVector, d: f64) {
        let improves = match &self.best {
            None => true,
            Some(b) => match d.total_cmp(&b.cost) {
                Ordering::Less => true,
                Ordering::Greater => false,
                Ordering::Equal => {
                    let mut seq = self.prefix(parent);
                    seq.push(code);
                    seq < b.codes
                }
            },
        };
        if improves {
            let mut codes = self.prefix(parent);
            codes.push(code);
            self.best = Some(Incumbent { cost: d, codes });
            self.stats.incumbents.push(d);
            self.upper.offer(d);
        }
    }

    /// Checks the node's label set. Returns true if the candidate is
    /// dominated; otherwise retires the labels it dominates.
    fn dominated(&mut self, stage: usize, code: u32, d: f64, nb: &[f64], parent: u32) -> bool {
        let key = (stage - 1) * self.table.n_codes + code as usize;
        let n = self.table.n_vsc;
        let mut candidate_prefix: Option<Vec<ModeVector>> = None;
        let list = std::mem::take(&mut self.store[key]);
        for &e in &list {
            let ec = self.cost[e as usize];
            if ec > d {
                continue;
            }
            let eb = self.batt(e);
            if !eb.iter().zip(nb).all(|(a, b)| a >= b) {
                continue;
            }
            let wins = ec < d || {
                let cp = candidate_prefix.get_or_insert_with(|| self.prefix(parent));
                self.prefix(self.parent[e as usize]) <= *cp
            };
            if wins {
                self.store[key] = list;
                return true;
            }
        }
        let mut kept = Vec::with_capacity(list.len() + 1);
        for e in list {
            let ec = self.cost[e as usize];
            let eb = &self.batteries[e as usize * n..(e as usize + 1) * n];
            let dominated = d <= ec
                && nb.iter().zip(eb).all(|(a, b)| a >= b)
                && (d < ec || {
                    let cp = candidate_prefix.get_or_insert_with(|| self.prefix(parent));
                    *cp < self.prefix(self.parent[e as usize])
                });
            if dominated {
                self.alive[e as usize] = false;
            } else {
                kept.push(e);
            }
        }
        self.store[key] = kept;
        false
    }

    fn run(&mut self, start: u32) {
        let table = self.table;
        let k = table.horizon;
        let mut open = vec![start];
        let mut batteries = Vec::with_capacity(table.n_vsc);
        let mut buf = Vec::new();
        let mut fresh: Vec<(f64, u32, Vec<f64>)> = Vec::new();
        while let Some(id) = open.pop() {
            if !self.alive[id as usize] {
                continue;
            }
            let stage = self.stage[id as usize] as usize;
            let d = self.cost[id as usize];
            batteries.clear();
            batteries.extend_from_slice(self.batt(id));
            if self.pruned_by_bound(d, stage, &batteries) {
                continue;
            }
            self.stats.nodes_expanded += 1;
            let moves = table.feasible_moves(stage, &batteries);
            fresh.clear();
            let mut any = false;
            for_each_child(&moves, &mut buf, |code, nb| {
                any = true;
                fresh.push((table.cost(stage, code), code.0, nb.to_vec()));
            });
            if any {
                self.deepest = self.deepest.max(stage + 1);
            }
            // Cheapest arc first; equal arcs in code order.
            fresh.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
            let mut accepted = Vec::with_capacity(fresh.len());
            for (a, code, nb) in fresh.drain(..) {
                let dj = d + a;
                if self.pruned_by_bound(dj, stage + 1, &nb) {
                    continue;
                }
                if stage + 1 == k {
                    self.offer_terminal(id, ModeVector(code), dj);
                    continue;
                }
                if self.dominated(stage + 1, code, dj, &nb, id) {
                    continue;
                }
                accepted.push(self.push_label(stage + 1, code, dj, id, &nb));
            }
            open.extend(accepted.into_iter().rev());
        }
    }
}
