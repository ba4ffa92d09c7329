use super::table::StageTable;
use super::{evaluate, SearchResult};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::mode::{ModeVector, SplitMode};
use crate::policies::Incumbent;
use crate::scenario::Scenario;

/// Exhaustive enumeration of all `4^(N·K)` mode sequences.
///
/// Sequences are visited in lexicographic order and only a strictly cheaper
/// one replaces the incumbent, so ties resolve to the lexicographically
/// smallest sequence, as in the search.
pub fn brute_force(scenario: &Scenario) -> Result<SearchResult> {
    let table = StageTable::build(scenario, Exec::Parallel)?;
    brute_force_table(&table, scenario.solver().enumeration_cap, Exec::Parallel)
}

pub fn brute_force_table(table: &StageTable, cap: u64, exec: Exec) -> Result<SearchResult> {
    let exponent = table.n_vsc * table.horizon;
    let total = 4u64
        .checked_pow(exponent as u32)
        .filter(|&t| t <= cap)
        .ok_or(Error::EnumerationCap { exponent, cap })?;

    let per_first = exec.map_range(table.n_codes, |first| {
        let mut e = Enumerator {
            table,
            codes: Vec::with_capacity(table.horizon),
            best: None,
            deepest: 0,
        };
        e.step(0, &table.initial, 0.0, Some(first as u32));
        (e.best, e.deepest)
    });

    let mut best: Option<Incumbent> = None;
    let mut deepest = 0;
    for (b, d) in per_first {
        deepest = deepest.max(d);
        if let Some(b) = b {
            if best.as_ref().is_none_or(|cur| b.cost < cur.cost) {
                best = Some(b);
            }
        }
    }
    let best = best.ok_or(Error::Infeasible { timestep: deepest + 1 })?;
    let mut result = evaluate(table, &best.codes);
    result.stats.sequences_scanned = total;
    result.stats.incumbents = vec![best.cost];
    Ok(result)
}

struct Enumerator<'a> {
    table: &'a StageTable,
    codes: Vec<ModeVector>,
    best: Option<Incumbent>,
    deepest: usize,
}

impl Enumerator<'_> {
    fn step(&mut self, step: usize, batteries: &[f64], d: f64, only: Option<u32>) {
        let t = self.table;
        if step == t.horizon {
            if self.best.as_ref().is_none_or(|b| d < b.cost) {
                self.best = Some(Incumbent {
                    cost: d,
                    codes: self.codes.clone(),
                });
            }
            return;
        }
        let range = match only {
            Some(c) => c..c + 1,
            None => 0..t.n_codes as u32,
        };
        let mut next = vec![0.0; t.n_vsc];
        for code in range {
            let code = ModeVector(code);
            let feasible = (0..t.n_vsc).all(|i| {
                let m: SplitMode = code.mode(i, t.n_vsc);
                next[i] = t.next_battery(step, i, m, batteries[i]);
                t.is_feasible(next[i])
            });
            // Every extension of an infeasible prefix is infeasible too.
            if !feasible {
                continue;
            }
            self.deepest = self.deepest.max(step + 1);
            self.codes.push(code);
            self.step(step + 1, &next.clone(), d + t.cost(step, code), None);
            self.codes.pop();
        }
    }
}
