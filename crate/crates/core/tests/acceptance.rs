//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any criterion fails or overruns its time budget.

mod common;

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::{paper_example, property_variant, r, scenario, v1_example};
use qpm_core::cli::{execute, Command, ExitStatus};
use qpm_core::config::parse_config;
use qpm_core::gauge::{derived_psi, estimate_limsup_ratio, Gauge, GaugePair, Grid, LimsupSchedule, Range};
use qpm_core::hausdorff::{f_end, f_start, hausdorff_h, PointSet};
use qpm_core::oracle::{
    brute_force_points, random_space, side_condition_t_max, successor_hypothesis_check, HypothesisOptions,
    RandomSpaceParams,
};
use qpm_core::solver::{
    check_side_conditions, decay_diagnostics, solve, step_checks, DecayOptions, Mode, Outcome, SideOptions,
    SolveOptions, VariantId,
};
use qpm_core::space::{metric_closure, verify_axioms, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c1_example_values() -> Result<String, String> {
    let (s, t) = paper_example();
    for k in 0..=10 {
        let x = k as f64;
        let f = f_start(&s, &t, &r(x)).map_err(|e| e.to_string())?;
        let want = if k == 6 { 2.0 } else { x / 2.0 };
        ensure((f - want).abs() <= 1e-12, || format!("f({x}) = {f}, expected {want}"))?;
    }
    Ok("f(6) = 2, f(x) = x/2 on the other integers".into())
}

fn c2_rejection() -> Result<String, String> {
    let cfg =
        parse_config(r#"{"scenario":"paper-example","variant":"GABA_PHI","phi":0.5}"#).map_err(|e| e.to_string())?;
    let run = execute(Command::CheckHypotheses, &cfg, None).map_err(|e| e.to_string())?;
    ensure(run.status == ExitStatus::Violation, || "check-hypotheses did not report a violation".into())?;
    let w = &run.report["reports"][0]["witnesses"];
    ensure(w.as_array().is_some_and(|a| a.len() == 1), || format!("expected one witness, got {w}"))?;
    ensure(w[0]["x"] == 6.0, || format!("witness at {}", w[0]["x"]))?;
    let cands = &w[0]["candidates"];
    let row = |i: usize| {
        let c = &cands[i];
        (c["y"].as_f64(), c["inequalities"][0]["lhs"].as_f64(), c["inequalities"][0]["rhs"].as_f64())
    };
    ensure(row(0) == (Some(4.0), Some(2.0), Some(1.0)), || format!("y=4 row {:?}", row(0)))?;
    ensure(row(1) == (Some(5.0), Some(2.5), Some(0.5)), || format!("y=5 row {:?}", row(1)))?;
    Ok("x=6: y=4 gives 2 > 1, y=5 gives 5/2 > 1/2".into())
}

fn c3_example_solve() -> Result<String, String> {
    let (s, t) = paper_example();
    let v = v1_example();
    let trace = solve(&s, &t, &v, &r(10.0), &SolveOptions::default()).map_err(|e| e.to_string())?;
    let Outcome::Converged { x, f } = trace.outcome else { return Err(format!("outcome {}", trace.outcome.kind())) };
    ensure(f <= 1e-8, || format!("f(x*) = {f}"))?;
    ensure(trace.iterations() <= 60, || format!("{} iterations", trace.iterations()))?;
    let rep = decay_diagnostics(&s, &v, &trace, &DecayOptions::default()).map_err(|e| e.to_string())?;
    let q = rep.rate.ok_or("no decay rate")?;
    ensure((q - 0.5).abs() <= 1e-9, || format!("rate {q}"))?;
    ensure(x.as_f64().abs() <= 1e-6, || format!("x* = {x}"))?;
    Ok(format!("{} iterations, x* = {x}, f(x*) = {f:e}, rate = {q}", trace.iterations()))
}

fn c4_documented_deviation() -> Result<String, String> {
    let (s, t) = paper_example();
    let trace = solve(&s, &t, &v1_example(), &r(6.0), &SolveOptions::default()).map_err(|e| e.to_string())?;
    let Outcome::HypothesisViolation { x, candidates } = &trace.outcome else {
        return Err(format!("outcome {}", trace.outcome.kind()));
    };
    ensure(*x == r(6.0), || format!("violation at {x}"))?;
    let rows: Vec<_> = candidates.iter().map(|c| (c.y, c.value, c.inequalities[0].rhs)).collect();
    ensure(rows == vec![(r(4.0), 2.0, 1.0), (r(5.0), 2.5, 0.5)], || format!("rows {rows:?}"))?;
    Ok("V1 (1/2, 2/3) from 6: no feasible successor, same witness table".into())
}

fn c5_axioms() -> Result<String, String> {
    let p = RandomSpaceParams::default();
    for seed in 0..1000u64 {
        let n = 1 + (seed % 12) as usize;
        let s = random_space(n, seed, &p).map_err(|e| e.to_string())?;
        let rep = verify_axioms(&s, true, None).map_err(|e| e.to_string())?;
        ensure(rep.passes(), || format!("seed {seed}: {rep:?}"))?;
        let rows = s.as_matrix().ok_or("not a matrix")?.rows();
        let again = metric_closure(&rows).map_err(|e| e.to_string())?;
        ensure(again == s, || format!("seed {seed}: closure is not idempotent"))?;
    }
    Ok("1000 spaces, n in 1..=12".into())
}

fn random_subset(rng: &mut ChaCha8Rng, n: usize) -> PointSet {
    let k = rng.gen_range(1..=n);
    let idx = rand::seq::index::sample(rng, n, k);
    PointSet::new(idx.into_iter().map(Point::Index).collect()).unwrap()
}

fn c6_hausdorff() -> Result<String, String> {
    let p = RandomSpaceParams::default();
    let mut triples = 0;
    for seed in 0..500u64 {
        let n = 1 + (seed % 8) as usize;
        let s = random_space(n, 10_000 + seed, &p).map_err(|e| e.to_string())?;
        let h = |a: &PointSet, b: &PointSet| hausdorff_h(&s, a, b).unwrap();
        for x in 0..n {
            for y in 0..n {
                let (px, py) = (Point::Index(x), Point::Index(y));
                let hv = h(&PointSet::singleton(px), &PointSet::singleton(py));
                ensure(hv == s.distance(&px, &py).unwrap(), || format!("seed {seed}: H({{{x}}},{{{y}}}) = {hv}"))?;
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let (a, b, c) = (random_subset(&mut rng, n), random_subset(&mut rng, n), random_subset(&mut rng, n));
            ensure(h(&a, &a) == 0.0, || format!("seed {seed}: H(A,A) != 0"))?;
            let (ac, ab, bc) = (h(&a, &c), h(&a, &b), h(&b, &c));
            ensure(ac <= ab + bc + 1e-9, || format!("seed {seed}: {ac} > {ab} + {bc}"))?;
            triples += 1;
        }
    }
    Ok(format!("500 spaces, {triples} set triples"))
}

fn c7_duality() -> Result<String, String> {
    let mut traces = 0;
    for seed in 0..200u64 {
        let (s, t) = scenario(20_000 + seed);
        let conj = s.conjugate();
        for x in s.enumerate(None).unwrap() {
            let (a, b) = (f_end(&s, &t, &x).unwrap(), f_start(&conj, &t, &x).unwrap());
            ensure(a == b, || format!("seed {seed}, x = {x}: {a} vs {b}"))?;
        }
        for id in VariantId::ALL {
            let end = property_variant(id, Mode::End);
            let start = property_variant(id, Mode::Start);
            for x0 in s.enumerate(None).unwrap() {
                let te = solve(&s, &t, &end, &x0, &SolveOptions::default()).unwrap();
                let ts = solve(&conj, &t, &start, &x0, &SolveOptions::default()).unwrap();
                ensure(te.steps == ts.steps && te.outcome == ts.outcome, || {
                    format!("seed {seed}, {id} from {x0}: traces differ")
                })?;
                traces += 1;
            }
        }
    }
    Ok(format!("200 pairs, {traces} trace pairs"))
}

const CRITERION8_TARGET: usize = 500;
const CRITERION8_SEED_CAP: u64 = 400_000;

fn c8_theorem_conclusions() -> Result<String, String> {
    let ids = [
        VariantId::V1,
        VariantId::V2,
        VariantId::V3,
        VariantId::V4,
        VariantId::V5,
        VariantId::V6,
        VariantId::V7,
        VariantId::V8,
        VariantId::GabaC,
        VariantId::GabaPhi,
    ];
    let side = SideOptions::default();
    let opts = HypothesisOptions::default();
    let mut summary = Vec::new();
    for id in ids {
        let v = property_variant(id, Mode::Start);
        let mut cache = HashMap::new();
        let (mut passing, mut seed, mut moving) = (0, 0u64, 0usize);
        while passing < CRITERION8_TARGET && seed < CRITERION8_SEED_CAP {
            let (s, t) = scenario(seed);
            seed += 1;
            let t_max = side_condition_t_max(&s);
            let conds = cache
                .entry(t_max.to_bits())
                .or_insert_with(|| check_side_conditions(&v, t_max, &side).unwrap())
                .clone();
            let rep = successor_hypothesis_check(&s, &t, &v, &opts, conds).unwrap();
            if !rep.passed() {
                ensure(rep.conditions.iter().all(|c| c.pass), || format!("{id}: side conditions fail {rep:?}"))?;
                continue;
            }
            passing += 1;
            let targets = brute_force_points(&s, &t, Mode::Start, 2e-8, None).unwrap();
            for x0 in s.enumerate(None).unwrap() {
                let trace = solve(&s, &t, &v, &x0, &SolveOptions::default()).unwrap();
                let Outcome::Converged { x, .. } = trace.outcome else {
                    return Err(format!("{id}, seed {}: from {x0} outcome {}", seed - 1, trace.outcome.kind()));
                };
                ensure(targets.contains(&x), || format!("{id}, seed {}: limit {x} not a startpoint", seed - 1))?;
                let checks = step_checks(&trace);
                ensure(checks.double_bound, || format!("{id}, seed {}: d_n >= 2 D_n", seed - 1))?;
                ensure(checks.monotone_from == 0, || format!("{id}, seed {}: f not monotone", seed - 1))?;
                moving += usize::from(trace.iterations() > 0);
            }
        }
        ensure(passing >= CRITERION8_TARGET, || format!("{id}: only {passing} passing scenarios in {seed} seeds"))?;
        ensure(moving > 0, || format!("{id}: every passing solve was already at a startpoint"))?;
        summary.push(format!("{id} {passing}/{seed} ({moving} solves moved)"));
    }
    Ok(format!("passing/scanned: {}", summary.join(", ")))
}

fn c9_gauges() -> Result<String, String> {
    let n = 10_000;
    for i in 0..n {
        let phi = i as f64 / n as f64;
        let psi = derived_psi(phi).map_err(|e| e.to_string())?;
        ensure(psi < 1.0, || format!("Psi({phi}) = {psi}"))?;
    }
    let ratio = GaugePair::new(Gauge::ratio(Range::Unit), Gauge::constant(1.0, Range::FloorClosed(0.5)));
    let ts: Vec<f64> = (0..n).map(|i| 10f64.powf(-6.0 + 12.0 * i as f64 / (n - 1) as f64)).collect();
    for &t in &ts {
        let psi = derived_psi(ratio.ratio(t).unwrap()).map_err(|e| e.to_string())?;
        ensure(psi < 1.0, || format!("Psi at t = {t} is {psi}"))?;
    }
    let pair = GaugePair::new(Gauge::constant(0.5, Range::Unit), Gauge::constant(2.0 / 3.0, Range::FloorOpen(0.5)));
    let grid = Grid::log_spaced(20.0, &[]).unwrap();
    let sched = LimsupSchedule::default();
    let probes: Vec<f64> = std::iter::once(0.0).chain(grid.points().iter().copied()).collect();
    for &t in &probes {
        let est = estimate_limsup_ratio(&pair, t, &sched).unwrap();
        ensure(est.estimate == 0.75, || format!("limsup at {t} = {}", est.estimate))?;
    }
    Ok(format!("Psi < 1 on 2 x {n} points; limsup = 0.75 at {} probes", probes.len()))
}

fn main() {
    let criteria: [(u32, &str, Check, Duration); 9] = [
        (1, "example functional values", c1_example_values, Duration::from_secs(1)),
        (2, "example rejection witness", c2_rejection, Duration::MAX),
        (3, "example V1 solve from 10", c3_example_solve, Duration::MAX),
        (4, "example V1 from 6 violates", c4_documented_deviation, Duration::MAX),
        (5, "random space axioms and closure", c5_axioms, Duration::from_secs(10)),
        (6, "Hausdorff functional properties", c6_hausdorff, Duration::MAX),
        (7, "endpoint/startpoint duality", c7_duality, Duration::MAX),
        (8, "theorem conclusions vs oracle", c8_theorem_conclusions, Duration::from_secs(120)),
        (9, "gauge Psi and limsup", c9_gauges, Duration::MAX),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (id, name, check, budget) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str()) || *f == id.to_string()) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or(p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        let elapsed = start.elapsed();
        let result = match result {
            Ok(d) if elapsed > budget => Err(format!("{d}; over budget {budget:?}")),
            other => other,
        };
        match result {
            Ok(detail) => println!("PASS criterion {id} ({name}) [{elapsed:.2?}]: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {id} ({name}) [{elapsed:.2?}]: {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
