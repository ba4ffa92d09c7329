//! Per-node label correcting, one label `d_j` per (t, mode vector) node.
//!
//! A node remembers the battery vector and path of whichever path last
//! corrected its label, so the returned sequence is always feasible, but a
//! cheaper path through a node with less battery left can hide a feasible
//! continuation. Kept for comparison with the dominance search.

use super::table::{for_each_child, StageTable};
use super::{evaluate, SearchResult, SearchStats};
use crate::error::{Error, Result};
use crate::mode::ModeVector;

struct Node {
    d: f64,
    batteries: Vec<f64>,
    path: Vec<ModeVector>,
    in_open: bool,
}

pub(super) fn solve(table: &StageTable) -> Result<SearchResult> {
    let k = table.horizon;
    let nc = table.n_codes;
    // Stages 1..=K; the source lives outside the table.
    let mut nodes: Vec<Option<Node>> = (0..k * nc).map(|_| None).collect();
    let mut stats = SearchStats::default();
    let mut upper = f64::INFINITY;
    let mut best: Option<Vec<ModeVector>> = None;
    let mut deepest = 0;

    // OPEN holds `None` for the source or `Some(node index)`.
    let mut open: Vec<Option<usize>> = vec![None];
    let mut buf = Vec::new();
    while let Some(entry) = open.pop() {
        let (stage, d, batteries, path) = match entry {
            None => (0, 0.0, table.initial.clone(), Vec::new()),
            Some(idx) => {
                let node = nodes[idx].as_mut().expect("queued node has a label");
                node.in_open = false;
                (idx / nc + 1, node.d, node.batteries.clone(), node.path.clone())
            }
        };
        stats.nodes_expanded += 1;
        let moves = table.feasible_moves(stage, &batteries);
        let mut pushed = Vec::new();
        for_each_child(&moves, &mut buf, |code, nb| {
            deepest = deepest.max(stage + 1);
            let idx = stage * nc + code.0 as usize;
            let dj = d + table.cost(stage, code);
            let current = nodes[idx].as_ref().map_or(f64::INFINITY, |n| n.d);
            if dj < current.min(upper) {
                let mut child_path = path.clone();
                child_path.push(code);
                let was_open = nodes[idx].as_ref().is_some_and(|n| n.in_open);
                let terminal = stage + 1 == k;
                if terminal {
                    upper = dj;
                    best = Some(child_path.clone());
                    stats.incumbents.push(dj);
                } else if !was_open {
                    pushed.push(idx);
                }
                nodes[idx] = Some(Node {
                    d: dj,
                    batteries: nb.to_vec(),
                    path: child_path,
                    in_open: !terminal,
                });
                stats.labels_created += 1;
            }
        });
        // Lowest code is explored first.
        open.extend(pushed.into_iter().rev().map(Some));
    }

    match best {
        Some(codes) => {
            let mut result = evaluate(table, &codes);
            result.stats = stats;
            Ok(result)
        }
        None => Err(Error::Infeasible { timestep: deepest + 1 }),
    }
}
