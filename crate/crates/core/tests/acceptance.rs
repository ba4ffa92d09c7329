//! Acceptance criteria, one verdict line each. Runs without the libtest
//! harness so the lines are printed even when everything passes.

mod common;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use vsplit_core::harness::{run, Command};
use vsplit_core::policies::ComparisonReport;
use vsplit_core::power_model::{bb1_watts, vsc_power, NodePowerParams};
use vsplit_core::{brute_force, compare, solve, Scenario, SearchResult, SplitMode, StaticPolicy};

const PRESETS: [&str; 4] = ["residential_jan", "residential_jul", "office_jan", "office_jul"];

struct Verdict {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn check_feasible(s: &Scenario, r: &SearchResult) -> Result<(), String> {
    if let Some(b) = r
        .batteries_per_step
        .iter()
        .flatten()
        .find(|&&b| b <= s.battery.threshold)
    {
        return Err(format!("battery {b} at or below threshold"));
    }
    let gap = replay_gap(s, r);
    if gap > 1e-9 {
        return Err(format!("replay differs by {gap:e} kWh"));
    }
    let e = Oracle::new(s).evaluate(&mode_codes(r));
    let oracle_gap = e
        .batteries
        .iter()
        .flatten()
        .zip(r.batteries_per_step.iter().flatten())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if !e.feasible || oracle_gap > 1e-9 {
        return Err(format!("independent replay differs by {oracle_gap:e} kWh"));
    }
    Ok(())
}

fn oracle_optimality(solved: &mut Vec<(Scenario, SearchResult)>) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let start = Instant::now();
    let mut failures = Vec::new();
    for i in 0..200 {
        let s = random_scenario(&mut rng);
        let r = solve(&s).unwrap();
        let b = brute_force(&s).unwrap();
        if r.total_cost != b.total_cost || r.modes_per_step != b.modes_per_step {
            failures.push(format!("#{i}: {} vs {}", r.total_cost, b.total_cost));
        }
        solved.push((s, r));
    }
    let elapsed = start.elapsed();
    Verdict {
        id: 1,
        name: "oracle optimality",
        pass: failures.is_empty() && elapsed < Duration::from_secs(60),
        detail: format!("200 scenarios, {} mismatches, {:.2?}", failures.len(), elapsed),
    }
}

fn feasibility(solved: &[(Scenario, SearchResult)]) -> Verdict {
    let errors: Vec<String> = solved
        .iter()
        .enumerate()
        .filter_map(|(i, (s, r))| check_feasible(s, r).err().map(|e| format!("#{i}: {e}")))
        .collect();
    Verdict {
        id: 2,
        name: "feasibility",
        pass: errors.is_empty(),
        detail: format!(
            "{} solved scenarios, {} violations {:?}",
            solved.len(),
            errors.len(),
            errors.first()
        ),
    }
}

fn dominance(reports: &[(Scenario, ComparisonReport)]) -> Verdict {
    let mut problems = Vec::new();
    let mut zero_drop = 0;
    for ((s, report), name) in reports.iter().zip(PRESETS) {
        let opt = report.optimal();
        for run in &report.runs[1..] {
            if opt.grid_energy_kwh > run.grid_energy_kwh {
                problems.push(format!("{name}: grid above {}", run.name));
            }
            if opt.avg_drop_pct > run.avg_drop_pct {
                problems.push(format!("{name}: drop above {}", run.name));
            }
        }
        if let Some(witness) = zero_drop_witness(s, 1_000_000) {
            let e = Oracle::new(s).evaluate(&witness);
            assert!(e.feasible && e.drop.iter().all(|&d| d == 0.0));
            zero_drop += 1;
            if opt.avg_drop_pct != 0.0 {
                problems.push(format!(
                    "{name}: zero drop possible, optimum drops {}%",
                    opt.avg_drop_pct
                ));
            }
        }
    }
    Verdict {
        id: 3,
        name: "dominance over static policies",
        pass: problems.is_empty(),
        detail: format!("4 presets, zero-drop sequence exists on {zero_drop}, issues {problems:?}"),
    }
}

fn seasonal(reports: &[(Scenario, ComparisonReport)]) -> Verdict {
    let jan = reports[0].1.optimal();
    let jul = reports[1].1.optimal();
    let mp = |r: &vsplit_core::policies::PolicyRun| r.selection_pct[SplitMode::MacPhy as usize];
    Verdict {
        id: 4,
        name: "seasonal ordering",
        pass: mp(jul) > mp(jan) && jul.grid_energy_kwh < jan.grid_energy_kwh,
        detail: format!(
            "MACPHY {:.1}% Jul vs {:.1}% Jan, grid {:.6} kWh Jul vs {:.6} kWh Jan",
            mp(jul),
            mp(jan),
            jul.grid_energy_kwh,
            jan.grid_energy_kwh
        ),
    }
}

fn power_points() -> Verdict {
    let vsc = NodePowerParams::vsc_default();
    let mbs = NodePowerParams::mbs_default();
    let cran: Vec<f64> = [0.0, 0.3, 1.0]
        .iter()
        .map(|&l| vsc_power(&vsc, SplitMode::Cran, l).unwrap())
        .collect();
    let mac_phy = vsc_power(&vsc, SplitMode::MacPhy, 1.0).unwrap();
    let bb1 = bb1_watts(&mbs);
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9;
    Verdict {
        id: 5,
        name: "power model point checks",
        pass: cran.iter().all(|&c| close(c, 74.0)) && close(mac_phy, 136.5) && close(bb1, 78.75),
        detail: format!("CRAN {cran:?} W, MACPHY(1) {mac_phy} W, MBS bb1 {bb1} W"),
    }
}

fn monotone_harvest() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut violations = 0;
    for _ in 0..50 {
        let s = random_scenario(&mut rng);
        let mut traces = s.traces.clone();
        for e in traces.energy.iter_mut().flatten() {
            *e += rng.gen_range(0.0..0.3);
        }
        let richer = s.clone().with_traces(traces).unwrap();
        if solve(&richer).unwrap().total_cost > solve(&s).unwrap().total_cost {
            violations += 1;
        }
    }
    Verdict {
        id: 6,
        name: "monotone harvest",
        pass: violations == 0,
        detail: format!("50 cases, {violations} violations"),
    }
}

fn determinism() -> Verdict {
    let s = Scenario::preset("office_jul").unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let dirs = [tmp.path().join("a"), tmp.path().join("b")];
    let manifests: Vec<_> = dirs
        .iter()
        .map(|d| run(Command::Compare, &s, d).unwrap().manifest)
        .collect();
    let mut differing = Vec::new();
    let mut csvs = 0;
    for out in &manifests[0].outputs {
        if !out.path.ends_with(".csv") {
            continue;
        }
        csvs += 1;
        let a = std::fs::read(dirs[0].join(&out.path)).unwrap();
        let b = std::fs::read(dirs[1].join(&out.path)).unwrap();
        if a != b {
            differing.push(out.path.clone());
        }
    }
    Verdict {
        id: 7,
        name: "determinism",
        pass: csvs > 0 && differing.is_empty(),
        detail: format!("office_jul compare twice, {csvs} CSVs, differing {differing:?}"),
    }
}

fn scale(timings: &[(String, Duration)]) -> Verdict {
    let worst = timings.iter().max_by_key(|t| t.1).unwrap();
    Verdict {
        id: 8,
        name: "scale N=3 K=21",
        pass: worst.1 < Duration::from_secs(600),
        detail: format!("{timings:.2?}, slowest {} in {:.2?}", worst.0, worst.1),
    }
}

fn main() {
    let mut verdicts = Vec::new();
    let mut solved = Vec::new();
    verdicts.push(oracle_optimality(&mut solved));

    let mut reports = Vec::new();
    let mut timings = Vec::new();
    for name in PRESETS {
        let s = Scenario::preset(name).unwrap();
        assert_eq!((s.n_vsc, s.horizon), (3, 21));
        // The comparison includes the full optimal solve.
        let start = Instant::now();
        let report = compare(&s, &StaticPolicy::all()).unwrap();
        timings.push((name.to_string(), start.elapsed()));
        solved.push((s.clone(), report.optimal().result.clone()));
        reports.push((s, report));
    }

    verdicts.push(feasibility(&solved));
    verdicts.push(dominance(&reports));
    verdicts.push(seasonal(&reports));
    verdicts.push(power_points());
    verdicts.push(monotone_harvest());
    verdicts.push(determinism());
    verdicts.push(scale(&timings));
    verdicts.sort_by_key(|v| v.id);

    let mut failed = 0;
    for v in &verdicts {
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {} [{tag}] {}: {}", v.id, v.name, v.detail);
        failed += usize::from(!v.pass);
    }
    println!("acceptance: {} passed, {failed} failed", verdicts.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
