//! Shared helpers for the integration tests, including an oracle written
//! directly from the model equations with the default power constants.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use vsplit_core::dynamics::Weights;
use vsplit_core::scenario::InitialBattery;
use vsplit_core::traces::TraceSet;
use vsplit_core::{Scenario, ScenarioConfig, SearchResult};

pub fn scenario_with(n: usize, k: usize, initial: Vec<f64>, w1: f64, traces: TraceSet) -> Scenario {
    let mut c = ScenarioConfig {
        n_vsc: n,
        horizon: k,
        weights: Weights { w1, w2: 1.0 - w1 },
        ..Default::default()
    };
    c.battery.initial_kwh = InitialBattery::PerVsc(initial);
    Scenario::from_config(c, None).unwrap().with_traces(traces).unwrap()
}

/// Small scenario with N in {1, 2} and K in {2, 3, 4}. Some draws use
/// identical cells or a drop-only cost to exercise tie-breaking.
pub fn random_scenario(rng: &mut ChaCha8Rng) -> Scenario {
    let n = rng.gen_range(1..=2);
    let k = rng.gen_range(2..=4);
    let tight = rng.gen_bool(0.5);
    let mut initial: Vec<f64> = (0..n)
        .map(|_| {
            if tight {
                rng.gen_range(0.41..0.75)
            } else {
                rng.gen_range(0.41..2.0)
            }
        })
        .collect();
    let mut energy: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..k)
                .map(|_| {
                    if rng.gen_bool(0.4) {
                        0.0
                    } else {
                        rng.gen_range(0.0..0.4)
                    }
                })
                .collect()
        })
        .collect();
    let mut demand: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..k)
                .map(|_| {
                    if rng.gen_bool(0.1) {
                        0.0
                    } else {
                        rng.gen_range(0.0..35.0)
                    }
                })
                .collect()
        })
        .collect();
    if n == 2 && rng.gen_bool(0.3) {
        initial[1] = initial[0];
        energy[1] = energy[0].clone();
        demand[1] = demand[0].clone();
    }
    let background = (0..k).map(|_| rng.gen_range(0.0..30.0)).collect();
    let w1 = match rng.gen_range(0..5) {
        0 => 0.0,
        1 => 1.0,
        2 => 0.5,
        _ => rng.gen_range(0.0..1.0),
    };
    scenario_with(
        n,
        k,
        initial,
        w1,
        TraceSet {
            energy,
            demand,
            mbs_background_demand: background,
        },
    )
}

const VSC_RADIO: f64 = 2.6 + 71.4;
const VSC_BB1: f64 = (200.0 + 160.0 + 80.0) / 8.0;
const MBS_STATIC: f64 = 630.0 / 8.0 + 9.18 + 1100.0;
const MBS_OVERHEAD: f64 = 1.1;

fn vsc_bb2(l: f64) -> f64 {
    (30.0 * l + 10.0 * l * l + 20.0 * l) / 8.0
}

fn mbs_bb2(l: f64) -> f64 {
    // 215 GOPS split 30:10:20 like the small cell.
    (215.0 * 30.0 / 60.0 * l + 215.0 * 10.0 / 60.0 * l * l + 215.0 * 20.0 / 60.0 * l) / 8.0
}

fn vsc_watts(mode: u8, l: f64) -> f64 {
    match mode {
        0 => 0.0,
        1 => VSC_RADIO,
        2 => VSC_RADIO + VSC_BB1,
        _ => VSC_RADIO + VSC_BB1 + vsc_bb2(l),
    }
}

pub fn p_max(n: usize) -> f64 {
    (MBS_STATIC + mbs_bb2(1.0) + n as f64 * (VSC_BB1 + vsc_bb2(1.0))) * MBS_OVERHEAD
}

/// `(grid watts, drop rate, per-vSC load)` of one step.
pub fn step(modes: &[u8], demand: &[f64], background: f64) -> (f64, f64, Vec<f64>) {
    let mut to_mbs = background;
    let mut loads = Vec::new();
    let mut pool = 0.0;
    for (&m, &d) in modes.iter().zip(demand) {
        if m == 0 {
            to_mbs += d;
            loads.push(0.0);
            continue;
        }
        let carried = d.min(25.0);
        to_mbs += d - carried;
        let l = carried / 25.0;
        loads.push(l);
        pool += match m {
            1 => VSC_BB1 + vsc_bb2(l),
            2 => vsc_bb2(l),
            _ => 0.0,
        };
    }
    let carried = to_mbs.min(35.0);
    let offered: f64 = demand.iter().sum::<f64>() + background;
    let drop = if offered > 0.0 {
        (to_mbs - carried) / offered
    } else {
        0.0
    };
    let grid = (MBS_STATIC + mbs_bb2(carried / 35.0) + pool) * MBS_OVERHEAD;
    (grid, drop, loads)
}

/// Oracle view of a scenario built by [`scenario_with`].
pub struct Oracle {
    n: usize,
    k: usize,
    w1: f64,
    p_max: f64,
    initial: Vec<f64>,
    energy: Vec<Vec<f64>>,
    demand: Vec<Vec<f64>>,
    background: Vec<f64>,
}

pub struct Evaluation {
    pub cost: f64,
    pub feasible: bool,
    pub batteries: Vec<Vec<f64>>,
    pub grid: Vec<f64>,
    pub drop: Vec<f64>,
}

impl Oracle {
    /// Takes the traces, battery start and weight from the scenario; every
    /// other parameter is assumed at its default.
    pub fn new(s: &Scenario) -> Self {
        Oracle {
            n: s.n_vsc,
            k: s.horizon,
            w1: s.config.weights.w1,
            p_max: p_max(s.n_vsc),
            initial: s.battery.initial.clone(),
            energy: s.traces.energy.clone(),
            demand: s.traces.demand.clone(),
            background: s.traces.mbs_background_demand.clone(),
        }
    }

    /// `seq[t][vsc]` holds mode codes.
    pub fn evaluate(&self, seq: &[Vec<u8>]) -> Evaluation {
        let mut b = self.initial.clone();
        let mut out = Evaluation {
            cost: 0.0,
            feasible: true,
            batteries: Vec::new(),
            grid: Vec::new(),
            drop: Vec::new(),
        };
        for (t, modes) in seq.iter().enumerate() {
            let demand: Vec<f64> = (0..self.n).map(|i| self.demand[i][t]).collect();
            let (grid, drop, loads) = step(modes, &demand, self.background[t]);
            for i in 0..self.n {
                b[i] = (b[i] + self.energy[i][t]).min(2.0) - vsc_watts(modes[i], loads[i]) / 1000.0;
                if b[i] <= 0.4 + 1e-12 {
                    out.feasible = false;
                }
            }
            out.cost += self.w1 * grid / self.p_max + (1.0 - self.w1) * drop;
            out.batteries.push(b.clone());
            out.grid.push(grid);
            out.drop.push(drop);
        }
        out
    }

    /// Cheapest feasible sequence by full enumeration.
    pub fn optimum(&self) -> Option<(f64, Vec<Vec<u8>>)> {
        let slots = self.n * self.k;
        let mut best: Option<(f64, Vec<Vec<u8>>)> = None;
        for idx in 0..4u64.pow(slots as u32) {
            let seq: Vec<Vec<u8>> = (0..self.k)
                .map(|t| {
                    (0..self.n)
                        .map(|i| {
                            let pos = slots - 1 - (t * self.n + i);
                            ((idx >> (2 * pos)) & 3) as u8
                        })
                        .collect()
                })
                .collect();
            let e = self.evaluate(&seq);
            if e.feasible && best.as_ref().is_none_or(|(c, _)| e.cost < *c) {
                best = Some((e.cost, seq));
            }
        }
        best
    }
}

pub fn mode_codes(r: &SearchResult) -> Vec<Vec<u8>> {
    r.modes_per_step
        .iter()
        .map(|row| row.iter().map(|m| m.code()).collect())
        .collect()
}

/// Largest gap between the stored batteries and a replay through the
/// library's own step function.
pub fn replay_gap(s: &Scenario, r: &SearchResult) -> f64 {
    let mut b = s.battery.initial.clone();
    let mut gap: f64 = 0.0;
    for (t, modes) in r.modes_per_step.iter().enumerate() {
        let demand: Vec<f64> = (0..s.n_vsc).map(|i| s.traces.demand[i][t]).collect();
        let (_, loads) = s.cost.step(modes, &demand, s.traces.mbs_background_demand[t]).unwrap();
        let harvest: Vec<f64> = (0..s.n_vsc).map(|i| s.traces.energy[i][t]).collect();
        b = vsplit_core::dynamics::battery_step(
            &b,
            &harvest,
            modes,
            &loads.vsc_loads,
            &s.cost.vsc,
            s.battery.capacity,
            s.delta_t,
        )
        .unwrap();
        for (x, y) in b.iter().zip(&r.batteries_per_step[t]) {
            gap = gap.max((x - y).abs());
        }
    }
    gap
}

/// Finds some sequence with zero drop at every step that keeps every
/// battery feasible, trying cheap-to-run mode vectors first.
pub fn zero_drop_witness(s: &Scenario, node_cap: usize) -> Option<Vec<Vec<u8>>> {
    let n = s.n_vsc;
    let k = s.horizon;
    let codes: Vec<Vec<u8>> = (0..4u32.pow(n as u32))
        .map(|c| (0..n).map(|i| ((c >> (2 * (n - 1 - i))) & 3) as u8).collect())
        .collect();
    let mut nodes = 0;
    fn dfs(
        s: &Scenario,
        codes: &[Vec<u8>],
        t: usize,
        b: &[f64],
        path: &mut Vec<Vec<u8>>,
        nodes: &mut usize,
        cap: usize,
    ) -> bool {
        if t == s.horizon {
            return true;
        }
        *nodes += 1;
        if *nodes > cap {
            return false;
        }
        let n = s.n_vsc;
        let demand: Vec<f64> = (0..n).map(|i| s.traces.demand[i][t]).collect();
        let mut options: Vec<(f64, &Vec<u8>, Vec<f64>)> = Vec::new();
        for modes in codes {
            let (_, drop, loads) = step(modes, &demand, s.traces.mbs_background_demand[t]);
            if drop > 0.0 {
                continue;
            }
            let next: Vec<f64> = (0..n)
                .map(|i| (b[i] + s.traces.energy[i][t]).min(2.0) - vsc_watts(modes[i], loads[i]) / 1000.0)
                .collect();
            if next.iter().all(|&x| x > 0.4 + 1e-12) {
                let draw: f64 = (0..n).map(|i| vsc_watts(modes[i], loads[i])).sum();
                options.push((draw, modes, next));
            }
        }
        options.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (_, modes, next) in options {
            path.push(modes.clone());
            if dfs(s, codes, t + 1, &next, path, nodes, cap) {
                return true;
            }
            path.pop();
        }
        false
    }
    let mut path = Vec::with_capacity(k);
    dfs(s, &codes, 0, &s.battery.initial, &mut path, &mut nodes, node_cap).then_some(path)
}
