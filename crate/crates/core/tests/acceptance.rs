//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use siolab::harness::scenarios::{separated, weak};
use siolab::harness::{run_scenario, run_scenario_with_threads, Config, Outcome, ScenarioConfig};
use siolab::kernel::{Kernel, KernelFunction};
use siolab::measure::DiscreteMeasure;
use siolab::operators::{maximal, truncated, DensityFunction};
use siolab::rng::SplitMix64;
use siolab::table::Table;

struct Line {
    passed: bool,
    detail: String,
}

fn line(passed: bool, detail: impl Into<String>) -> Line {
    Line {
        passed,
        detail: detail.into(),
    }
}

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn suite() -> Vec<PathBuf> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(configs_dir())
        .expect("configs directory")
        .map(|e| e.expect("dir entry").path())
        .filter(|p| p.extension().is_some_and(|e| e == "ini"))
        .collect();
    paths.sort();
    paths
}

fn load(name: &str) -> ScenarioConfig {
    let text = std::fs::read_to_string(configs_dir().join(name)).expect("config file");
    ScenarioConfig::from_config(&Config::parse(&text).expect("parse")).expect("valid config")
}

fn run_config(name: &str) -> (Outcome, Duration) {
    let cfg = load(name);
    let report = run_scenario(&cfg).expect("scenario runs");
    (report.outcome, report.runtime)
}

fn table<'a>(o: &'a Outcome, name: &str) -> &'a Table {
    o.table(name).unwrap_or_else(|| panic!("table {name}"))
}

fn strings(t: &Table, col: &str) -> Vec<String> {
    let c = t.column(col).unwrap_or_else(|| panic!("column {col}"));
    t.rows.iter().map(|r| r[c].to_string()).collect()
}

fn c1_c2() -> (Line, Line) {
    let start = Instant::now();
    let records = weak::cancellation_study(100, 10_000, 1).expect("study");
    let elapsed = start.elapsed();
    let max_atoms = records.iter().map(|r| r.atoms).max().unwrap_or(0);
    let bound_ok = records.iter().all(|r| r.atoms <= 10_000 && r.radii >= 8);
    let i1_bad = records.iter().filter(|r| !r.i1_ok()).count();
    let fub_bad = records.iter().filter(|r| !r.fubini_ok()).count();
    let worst_i1 = records
        .iter()
        .map(|r| r.max_i1 / r.i1_bound)
        .fold(0.0f64, f64::max);
    let worst_fub = records
        .iter()
        .map(|r| r.fubini_residual / r.fubini_bound)
        .fold(0.0f64, f64::max);
    (
        line(
            records.len() == 100 && bound_ok && i1_bad == 0 && elapsed < Duration::from_secs(60),
            format!(
                "{} configs, max N {max_atoms}, {i1_bad} over bound, worst |I1|/bound {worst_i1:.2e}, {:.1} s",
                records.len(),
                elapsed.as_secs_f64()
            ),
        ),
        line(
            records.len() == 100 && fub_bad == 0,
            format!("{fub_bad} over bound, worst residual/bound {worst_fub:.2e}"),
        ),
    )
}

/// `sup |T^eps|` by direct truncated sums over a log grid of radii plus every
/// atom distance and points just around it.
fn brute_force_sup(nu: &DiscreteMeasure, k: &Kernel, g: &DensityFunction, x: &[f64]) -> f64 {
    let mut d: Vec<f64> = nu
        .positions()
        .map(|y| y.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
        .filter(|&r| r > 0.0)
        .collect();
    d.sort_by(f64::total_cmp);
    let Some((&lo, &hi)) = d.first().zip(d.last()) else {
        return 0.0;
    };
    let mut radii: Vec<f64> = (0..1000)
        .map(|i| lo * 0.5 * (4.0 * hi / lo).powf(i as f64 / 999.0))
        .collect();
    for &r in &d {
        radii.extend([r, r * (1.0 - 1e-9), r * (1.0 + 1e-9)]);
    }
    radii
        .iter()
        .map(|&e| truncated(nu, k, g, x, e).expect("truncated").abs())
        .fold(0.0, f64::max)
}

fn random_breakpoint_case(rng: &mut SplitMix64) -> (DiscreteMeasure, Kernel, DensityFunction, Vec<f64>) {
    let dim = 2 + rng.index(2);
    let atoms = 1 + rng.index(200);
    // Lattice points produce ties in distance; continuous ones do not.
    let lattice = rng.index(3) == 0;
    let mut coords = Vec::with_capacity(atoms * dim);
    for _ in 0..atoms * dim {
        coords.push(if lattice {
            rng.index(9) as f64 / 4.0 - 1.0
        } else {
            rng.uniform_in(-1.0, 1.0)
        });
    }
    let weights: Vec<f64> = (0..atoms).map(|_| rng.log_uniform(1e-3, 1.0)).collect();
    let nu = DiscreteMeasure::new(dim, coords, weights, 1e-3).expect("measure");
    let k = if rng.index(2) == 0 {
        Kernel::riesz(dim, rng.index(dim)).expect("riesz")
    } else {
        let mut e = vec![0u32; dim];
        e[rng.index(dim)] = 1;
        e[rng.index(dim)] += 2;
        Kernel::odd_homogeneous(dim, e).expect("odd kernel")
    };
    let g = match rng.index(3) {
        0 => DensityFunction::One,
        _ => DensityFunction::Table((0..atoms).map(|_| rng.uniform_in(-1.0, 1.0)).collect()),
    };
    let x: Vec<f64> = if rng.index(4) == 0 {
        nu.position(rng.index(atoms)).to_vec()
    } else if lattice {
        (0..dim).map(|_| rng.index(9) as f64 / 4.0 - 1.0).collect()
    } else {
        (0..dim).map(|_| rng.uniform_in(-1.2, 1.2)).collect()
    };
    (nu, k, g, x)
}

fn c3() -> Line {
    let start = Instant::now();
    let mut rng = SplitMix64::new(3);
    let mut worst = 0.0f64;
    let mut bad = 0;
    for _ in 0..1000 {
        let (nu, k, g, x) = random_breakpoint_case(&mut rng);
        let fast = maximal(&nu, &k, &g, &x).expect("maximal");
        let slow = brute_force_sup(&nu, &k, &g, &x);
        let scale = fast.abs().max(slow.abs());
        let rel = if scale == 0.0 { 0.0 } else { (fast - slow).abs() / scale };
        worst = worst.max(rel);
        if rel > 1e-12 {
            bad += 1;
        }
    }
    let elapsed = start.elapsed();
    line(
        bad == 0 && elapsed < Duration::from_secs(60),
        format!("1000 configs, {bad} mismatches, worst relative {worst:.2e}, {:.1} s", elapsed.as_secs_f64()),
    )
}

fn c4() -> Line {
    let (o, _) = run_config("cone_separation.ini");
    let t = table(&o, "cone_separation");
    let samples = t.floats("samples");
    let violations = t.floats("violations");
    let min_slack = t.floats("min_slack").into_iter().fold(f64::INFINITY, f64::min);
    let profiles: std::collections::BTreeSet<String> = strings(t, "profile").into_iter().collect();
    line(
        profiles.len() == 5 && samples.iter().all(|&s| s >= 1e5) && violations.iter().all(|&v| v == 0.0) && min_slack >= -1e-12,
        format!(
            "{} graphs x dims, {} violations, min relative slack {min_slack:.3}",
            t.rows.len(),
            violations.iter().sum::<f64>()
        ),
    )
}

fn c5() -> Line {
    let (o, elapsed) = run_config("lemma_l2.ini");
    let t = table(&o, "lemma_l2");
    let tuples = t.floats("tuples");
    let viol: f64 = ["violations_lt", "violations_ge", "nt_violations"]
        .iter()
        .map(|c| t.floats(c).iter().sum::<f64>())
        .sum();
    let dims: std::collections::BTreeSet<String> = strings(t, "dim").into_iter().collect();
    let profiles: std::collections::BTreeSet<String> = strings(t, "profile").into_iter().collect();
    let min_slack = ["min_slack_lt", "min_slack_ge"]
        .iter()
        .flat_map(|c| t.floats(c))
        .fold(f64::INFINITY, f64::min);
    line(
        viol == 0.0
            && tuples.iter().all(|&n| n >= 1e4)
            && dims.len() == 2
            && profiles.len() == 3
            && elapsed < Duration::from_secs(300),
        format!(
            "{} (profile, dim, axis) rows, {viol} violations, min slack {min_slack:.3}, {:.1} s",
            t.rows.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn c6() -> Line {
    let (o, _) = run_config("kernel_validation.ini");
    let t = table(&o, "kernel_validation");
    let checks = strings(t, "check");
    let value = |name: &str| {
        let i = checks.iter().position(|c| c == name).unwrap_or_else(|| panic!("check {name}"));
        t.floats("value")[i]
    };
    let k = Kernel::riesz(2, 0).expect("riesz");
    let anti = value("antisymmetry_max_residual");
    let size = value("size_sup");
    let grad = value("gradient_sup");
    let profile = value("gradient_profile_rel_error");
    line(
        k.c0() == 1.0 && k.c1() == 1.0 && anti == 0.0 && size <= 1.0 && (grad - 1.0).abs() <= 1e-5 && profile <= 1e-5,
        format!("antisymmetry {anti:e}, size sup {size:.12}, gradient sup {grad:.10}, profile error {profile:.2e}"),
    )
}

fn c7() -> Line {
    let (o, elapsed) = run_config("separated_boundedness.ini");
    let t = table(&o, "separated");
    let ps = t.floats("p");
    let cells = t.floats("cells");
    let ratio = t.floats("max_ratio");
    let mut worst = 0.0f64;
    let mut ok = true;
    for i in 1..t.rows.len() {
        if ps[i] == ps[i - 1] {
            ok &= cells[i] == 2.0 * cells[i - 1];
            let g = ratio[i] / ratio[i - 1];
            worst = worst.max(g);
            ok &= g <= 1.5;
        }
    }
    let mut exps = ps.clone();
    exps.dedup();
    ok &= exps == [1.5, 2.0, 3.0];
    ok &= cells.iter().cloned().fold(0.0, f64::max) >= 2048.0;
    line(
        ok && elapsed < Duration::from_secs(600),
        format!("worst growth ratio {worst:.4}, {:.1} s", elapsed.as_secs_f64()),
    )
}

fn c8() -> Line {
    let (o, _) = run_config("pv_convergence.ini");
    let t = table(&o, "pv_summary");
    let labels: Vec<String> = strings(t, "profile")
        .into_iter()
        .zip(strings(t, "axis"))
        .map(|(p, a)| format!("{p}/{a}"))
        .collect();
    let cells = t.floats("cells");
    let tail = t.floats("tail");
    let scale = t.floats("scale");
    let mut ok = labels.iter().any(|l| l.starts_with("flat")) && labels.iter().any(|l| l.starts_with("bump"));
    let mut worst_rel: f64 = 0.0;
    let mut i = 0;
    while i < labels.len() {
        let j = (i..labels.len()).find(|&j| labels[j] != labels[i]).unwrap_or(labels.len());
        ok &= cells[i..j] == [256.0, 1024.0, 4096.0];
        let last = j - 1;
        let rel = tail[last] / scale[last].max(f64::MIN_POSITIVE);
        worst_rel = worst_rel.max(if tail[last] == 0.0 { 0.0 } else { rel });
        ok &= tail[last] <= 1e-2 * scale[last];
        for k in i + 1..j {
            ok &= tail[k] <= 1.1 * tail[k - 1] + 1e-12 * scale[k];
        }
        i = j;
    }
    line(ok, format!("{} series, worst final tail/scale {worst_rel:.2e}", labels.len() / 3))
}

fn c9() -> Line {
    let params = separated::Params::default();
    let rows = separated::cantor_control(&params, 1).expect("cantor control");
    let gens: Vec<usize> = rows.iter().map(|r| r.0).collect();
    let ratios: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let increasing = ratios.windows(2).all(|w| w[1] > w[0]);
    line(
        gens == [3, 4, 5, 6] && increasing,
        format!("L2 ratios {}", ratios.iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>().join(" < ")),
    )
}

fn suite_csv(threads: usize) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for path in suite() {
        let text = std::fs::read_to_string(&path).expect("config");
        let cfg = ScenarioConfig::from_config(&Config::parse(&text).expect("parse")).expect("valid");
        let report = run_scenario_with_threads(&cfg, threads).expect("run");
        for t in &report.outcome.tables {
            out.push((format!("{}/{}", report.name, t.name), t.to_csv_string().expect("csv")));
        }
    }
    out
}

fn c10() -> Line {
    let start = Instant::now();
    let runs: Vec<Vec<(String, String)>> = [1, 1, 8, 8].iter().map(|&t| suite_csv(t)).collect();
    let bytes: usize = runs[0].iter().map(|(_, c)| c.len()).sum();
    let same = runs.iter().all(|r| r == &runs[0]);
    line(
        same && !runs[0].is_empty(),
        format!(
            "{} CSV tables, {bytes} bytes, 2 runs x (1, 8) workers identical: {same}, {:.1} s",
            runs[0].len(),
            start.elapsed().as_secs_f64()
        ),
    )
}

fn main() {
    let mut results: Vec<(u32, Line)> = Vec::new();
    let mut report = |n: u32, l: Line| {
        println!("criterion {n:>2}: {} {}", if l.passed { "PASS" } else { "FAIL" }, l.detail);
        results.push((n, l));
    };
    let (a, b) = c1_c2();
    report(1, a);
    report(2, b);
    report(3, c3());
    report(4, c4());
    report(5, c5());
    report(6, c6());
    report(7, c7());
    report(8, c8());
    report(9, c9());
    report(10, c10());
    let failed: Vec<u32> = results.iter().filter(|(_, l)| !l.passed).map(|(n, _)| *n).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria PASS", results.len());
    } else {
        println!("acceptance: FAIL {failed:?}");
        std::process::exit(1);
    }
}
