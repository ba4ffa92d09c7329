use crate::dynamics::{charge, StepOutcome};
use crate::error::Result;
use crate::exec::Exec;
use crate::mode::{ModeVector, SplitMode};
use crate::power_model::vsc_power;
use crate::scenario::Scenario;

/// Everything the search needs per step, precomputed once.
///
/// The step cost only depends on the mode vector and the step, and the
/// battery draw of a vSC only on its own mode and demand, so both are
/// tabulated up front.
#[derive(Debug, Clone)]
pub struct StageTable {
    pub n_vsc: usize,
    pub horizon: usize,
    pub n_codes: usize,
    /// `[step * n_codes + code]`.
    outcomes: Vec<StepOutcome>,
    /// kWh drawn, `[step * n_vsc + vsc][mode]`.
    draw: Vec<[f64; 4]>,
    /// `[step * n_vsc + vsc]`.
    harvest: Vec<f64>,
    /// Load carried by an active vSC, `[step * n_vsc + vsc]`.
    active_load: Vec<f64>,
    /// Vector loads per code, only kept for reporting.
    mbs_load: Vec<f64>,
    /// `suffix_min[s]` = sum over steps `s..K` of the cheapest step cost.
    suffix_min: Vec<f64>,
    /// Per multiplier `λ`, see [`StageTable::battery_lower_bound`].
    lagrange: Vec<Multiplier>,
    pub capacity: f64,
    pub threshold: f64,
    pub initial: Vec<f64>,
}

impl StageTable {
    pub fn build(scenario: &Scenario, exec: Exec) -> Result<Self> {
        let n = scenario.n_vsc;
        let k = scenario.horizon;
        let n_codes = ModeVector::count(n) as usize;
        let tr = &scenario.traces;
        let caps = &scenario.cost.caps;

        let rows: Vec<Result<Vec<(StepOutcome, f64)>>> = exec.map_range(k, |s| {
            let demand: Vec<f64> = (0..n).map(|i| tr.demand[i][s]).collect();
            (0..n_codes)
                .map(|code| {
                    let modes = ModeVector(code as u32).modes(n);
                    let (o, l) = scenario.cost.step(&modes, &demand, tr.mbs_background_demand[s])?;
                    Ok((o, l.mbs_load))
                })
                .collect()
        });
        let mut outcomes = Vec::with_capacity(k * n_codes);
        let mut mbs_load = Vec::with_capacity(k * n_codes);
        for row in rows {
            for (o, l) in row? {
                outcomes.push(o);
                mbs_load.push(l);
            }
        }

        let mut draw = Vec::with_capacity(k * n);
        let mut harvest = Vec::with_capacity(k * n);
        let mut active_load = Vec::with_capacity(k * n);
        for s in 0..k {
            for i in 0..n {
                let load = tr.demand[i][s].min(caps.vsc_capacity) / caps.vsc_capacity;
                let mut d = [0.0; 4];
                for m in SplitMode::ALL {
                    let l = if m == SplitMode::Off { 0.0 } else { load };
                    d[m as usize] = vsc_power(&scenario.cost.vsc, m, l)? * scenario.delta_t / 1000.0;
                }
                draw.push(d);
                harvest.push(tr.energy[i][s]);
                active_load.push(load);
            }
        }

        let mut suffix_min = vec![0.0; k + 1];
        for s in (0..k).rev() {
            let row = &outcomes[s * n_codes..(s + 1) * n_codes];
            let best = row.iter().map(|o| o.cost).fold(f64::INFINITY, f64::min);
            suffix_min[s] = suffix_min[s + 1] + best;
        }

        let lagrange = multipliers(&outcomes, &draw, &harvest, &suffix_min, n, k, n_codes);

        Ok(StageTable {
            n_vsc: n,
            horizon: k,
            n_codes,
            outcomes,
            draw,
            harvest,
            active_load,
            mbs_load,
            suffix_min,
            lagrange,
            capacity: scenario.battery.capacity,
            threshold: scenario.battery.threshold,
            initial: scenario.battery.initial.clone(),
        })
    }

    /// Outcome of mode vector `code` at 0-based step `step`.
    pub fn outcome(&self, step: usize, code: ModeVector) -> StepOutcome {
        self.outcomes[step * self.n_codes + code.0 as usize]
    }

    pub fn cost(&self, step: usize, code: ModeVector) -> f64 {
        self.outcomes[step * self.n_codes + code.0 as usize].cost
    }

    pub fn mbs_load(&self, step: usize, code: ModeVector) -> f64 {
        self.mbs_load[step * self.n_codes + code.0 as usize]
    }

    /// Lower bound on the cost of steps `step..K`.
    pub fn remaining_lower_bound(&self, step: usize) -> f64 {
        self.suffix_min[step]
    }

    /// Lower bound on the cost of steps `step..K` from `batteries`.
    ///
    /// Whatever the path, the energy all vSCs draw over steps `step..=end`
    /// is less than their batteries plus the harvest of those steps minus
    /// the thresholds. Pricing that budget at `λ` and dropping the
    /// constraint gives a valid bound for every `λ >= 0` and every window
    /// end; the best over a fixed multiplier set and all window ends is
    /// returned.
    pub fn battery_lower_bound(&self, step: usize, batteries: &[f64]) -> f64 {
        let mut best = self.suffix_min[step];
        if step >= self.horizon {
            return best;
        }
        let stored: f64 = batteries.iter().map(|b| b - self.threshold).sum();
        for m in &self.lagrange {
            best = best.max(m.window[step] - m.prefix[step] + m.lambda * (m.harvest[step] - stored));
        }
        best
    }

    /// Battery of `vsc` after `step` in `mode`, starting from `level`.
    pub fn next_battery(&self, step: usize, vsc: usize, mode: SplitMode, level: f64) -> f64 {
        let idx = step * self.n_vsc + vsc;
        charge(level, self.harvest[idx], self.capacity) - self.draw[idx][mode as usize]
    }

    pub fn vsc_load(&self, step: usize, vsc: usize, mode: SplitMode) -> f64 {
        if mode == SplitMode::Off {
            0.0
        } else {
            self.active_load[step * self.n_vsc + vsc]
        }
    }

    pub fn is_feasible(&self, level: f64) -> bool {
        level > self.threshold + crate::dynamics::BATTERY_TOLERANCE
    }

    /// Feasible `(mode, next battery)` pairs of every vSC, modes ascending.
    pub(crate) fn feasible_moves(&self, step: usize, batteries: &[f64]) -> Vec<Vec<(SplitMode, f64)>> {
        batteries
            .iter()
            .enumerate()
            .map(|(i, &b)| {
                SplitMode::ALL
                    .iter()
                    .map(|&m| (m, self.next_battery(step, i, m, b)))
                    .filter(|&(_, nb)| self.is_feasible(nb))
                    .collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
struct Multiplier {
    lambda: f64,
    /// Sum over steps `0..s` of `min over codes (cost + λ · draw)`.
    prefix: Vec<f64>,
    /// Harvest of all vSCs over steps `0..s`.
    harvest: Vec<f64>,
    /// Max over `end > s` of `prefix[end] + suffix_min[end] - λ · harvest[end]`.
    window: Vec<f64>,
}

fn multipliers(
    outcomes: &[StepOutcome],
    draw: &[[f64; 4]],
    harvest: &[f64],
    suffix_min: &[f64],
    n: usize,
    k: usize,
    n_codes: usize,
) -> Vec<Multiplier> {
    let code_draw = |s: usize, code: usize| -> f64 {
        let mv = ModeVector(code as u32);
        (0..n).map(|i| draw[s * n + i][mv.mode(i, n) as usize]).sum()
    };
    // Scale the multipliers to the cost spread per kWh of draw.
    let mut spread: f64 = 0.0;
    let mut max_draw: f64 = 0.0;
    for s in 0..k {
        let row = &outcomes[s * n_codes..(s + 1) * n_codes];
        let lo = row.iter().map(|o| o.cost).fold(f64::INFINITY, f64::min);
        let hi = row.iter().map(|o| o.cost).fold(f64::NEG_INFINITY, f64::max);
        spread = spread.max(hi - lo);
        max_draw = max_draw.max(code_draw(s, n_codes - 1));
    }
    if !(spread > 0.0 && max_draw > 0.0) {
        return Vec::new();
    }
    let mut total_harvest = vec![0.0; k + 1];
    for s in 0..k {
        total_harvest[s + 1] = total_harvest[s] + harvest[s * n..(s + 1) * n].iter().sum::<f64>();
    }
    let scale = spread / max_draw;
    (-6..=6)
        .map(|j| {
            let lambda = scale * 2f64.powi(j);
            let mut prefix = vec![0.0; k + 1];
            for s in 0..k {
                let best = (0..n_codes)
                    .map(|c| outcomes[s * n_codes + c].cost + lambda * code_draw(s, c))
                    .fold(f64::INFINITY, f64::min);
                prefix[s + 1] = prefix[s] + best;
            }
            let mut window = vec![f64::NEG_INFINITY; k + 1];
            for s in (0..k).rev() {
                let end = s + 1;
                let here = prefix[end] + suffix_min[end] - lambda * total_harvest[end];
                window[s] = window[s + 1].max(here);
            }
            Multiplier {
                lambda,
                prefix,
                harvest: total_harvest.clone(),
                window,
            }
        })
        .collect()
}

/// Visits the cartesian product of per-vSC moves in ascending code order.
pub(crate) fn for_each_child<F>(moves: &[Vec<(SplitMode, f64)>], buf: &mut Vec<f64>, mut f: F)
where
    F: FnMut(ModeVector, &[f64]),
{
    let n = moves.len();
    if moves.iter().any(Vec::is_empty) {
        return;
    }
    let mut idx = vec![0usize; n];
    buf.clear();
    buf.resize(n, 0.0);
    loop {
        let mut code = 0u32;
        for i in 0..n {
            let (m, b) = moves[i][idx[i]];
            code = code * 4 + m as u32;
            buf[i] = b;
        }
        f(ModeVector(code), buf);
        // Odometer increment, last vSC fastest.
        let mut i = n;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < moves[i].len() {
                break;
            }
            idx[i] = 0;
        }
    }
}
