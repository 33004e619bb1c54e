//! Acceptance suite: one line per criterion, non-zero exit if any fails.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use elemdyn_cli::config::parse_config;
use elemdyn_cli::fixtures;
use elemdyn_cli::runner::{config_hash, render, run_scenario, RunReport};
use elemdyn_core::criteria::{
    find_cosine_split, orthogonality_horizon, orthogonality_report, DecayRule, Schedule, Side,
    TailPolicy, Verdict,
};
use elemdyn_core::report::Format;
use elemdyn_core::structured::{build_aperiodic_shift, build_example_w, identity};
use elemdyn_core::witnesses::{cosine_witness, periodic_witness, transitive_witness};
use elemdyn_core::{Dyadic, ElementarySystem, FiniteRankOperator, Mode, SubspaceSpec};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use support::*;

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:?}, limit {limit:?}"))
}

fn proj(m: u64) -> FiniteRankOperator {
    FiniteRankOperator::projection(&SubspaceSpec::leading(m), Mode::Exact)
}

fn example_system() -> ElementarySystem {
    ElementarySystem::new(build_aperiodic_shift(), build_example_w()).unwrap()
}

fn example_grid() -> Result<String, String> {
    let start = Instant::now();
    let w = build_example_w();
    for k in 1..=3i64 {
        for m in 1..=10i64 {
            let fwd = w
                .norm_power_proj(2 * k - 1 + m, &SubspaceSpec::leading(2 * k as u64))
                .map_err(|e| e.to_string())?;
            ensure(fwd == Dyadic::pow2(-m), || format!("k={k} m={m}: forward {fwd}"))?;
            let bwd = w
                .norm_power_proj(-(2 * k + m), &SubspaceSpec::leading(2 * k as u64 + 1))
                .map_err(|e| e.to_string())?;
            ensure(bwd == Dyadic::pow2(-(m - 1)), || format!("k={k} m={m}: backward {bwd}"))?;
        }
    }
    within(Duration::from_secs(1), start)?;
    Ok(format!("60 exact values in {:?}", start.elapsed()))
}

fn adjoint_grid() -> Result<String, String> {
    let start = Instant::now();
    let wa = build_example_w().adjoint();
    for k in 1..=3i64 {
        for m in 1..=10i64 {
            let v = wa
                .proj_norm_power(&SubspaceSpec::leading(2 * k as u64), 2 * k - 1 + m)
                .map_err(|e| e.to_string())?;
            ensure(v == Dyadic::pow2(-m), || format!("k={k} m={m}: {v}"))?;
        }
    }
    within(Duration::from_secs(1), start)?;
    Ok(format!("30 exact values in {:?}", start.elapsed()))
}

fn example_moduli() -> Result<String, String> {
    let w = build_example_w();
    let e = |x: elemdyn_core::Error| x.to_string();
    let sup = w.sup_norm().map_err(e)?;
    let inf = w.min_modulus().map_err(e)?;
    let inv_inf = w.inverse().map_err(e)?.min_modulus().map_err(e)?;
    ensure(sup == Dyadic::from_int(2), || format!("||W|| = {sup}"))?;
    ensure(inf == Dyadic::pow2(-1), || format!("m(W) = {inf}"))?;
    let dual = inv_inf.inv2().map_err(e)?;
    ensure(dual == sup, || format!("m(W^-1)^-1 = {dual}"))?;
    Ok("||W|| = 2, m(W) = 1/2, m(W^-1)^-1 = 2".into())
}

const SUFFICIENCY: [&str; 7] = [
    "hypercyclicity",
    "zero-transitivity",
    "chaos-series",
    "cosine-series",
    "cosine-split",
    "adjoint-split",
    "adjoint-transitivity",
];

fn fixture_reports(name: &str) -> Vec<RunReport> {
    let text = fixtures::fixture(name).unwrap();
    let cfg = parse_config(text).unwrap();
    run_scenario(&cfg, &config_hash(text, None))
}

fn criterion_verdicts(reports: &[RunReport]) -> BTreeMap<String, Vec<String>> {
    let mut out: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for r in reports {
        if let elemdyn_cli::runner::RunResult::Criterion(c) = &r.result {
            out.entry(c.id.clone()).or_default().push(r.verdict.clone());
        }
    }
    out
}

fn necessary_consistency() -> Result<String, String> {
    let ex = criterion_verdicts(&fixture_reports("example34"));
    let any_pass = SUFFICIENCY
        .iter()
        .any(|id| ex.get(*id).is_some_and(|v| v.iter().any(|x| x == "pass")));
    ensure(any_pass, || "no sufficiency checker passed on the example".into())?;
    ensure(ex["necessary-m"] == ["pass"], || {
        format!("necessary-m on the example: {:?}", ex["necessary-m"])
    })?;
    let un = criterion_verdicts(&fixture_reports("unitary-counterexample"));
    for id in SUFFICIENCY {
        let v = un.get(id).ok_or_else(|| format!("{id} missing from the unitary fixture"))?;
        ensure(v.iter().all(|x| x == "fail"), || format!("{id} on the unitary fixture: {v:?}"))?;
    }
    ensure(un["necessary-m"] == ["fail"], || {
        format!("necessary-m on the unitary fixture: {:?}", un["necessary-m"])
    })?;
    Ok("example: sufficiency pass with m(W) < 1 < ||W||; unitary: all 7 fail, necessary fails".into())
}

fn dense_oracle() -> Result<String, String> {
    const N: usize = 64;
    let sys = example_system();
    let mut rng = StdRng::seed_from_u64(2024);
    let powers: Vec<(Dense, Dense)> = (-6..=6i64)
        .map(|n| (section_power(sys.w(), n, N), section_power(sys.u(), n, N)))
        .collect();
    let pow = |n: i64| &powers[(n + 6) as usize];
    let half = num_rational::BigRational::new(1.into(), 2.into());
    for case in 0..100 {
        let entries = rng.random_range(1..=12);
        let f = random_operator(&mut rng, 5, entries, Mode::Exact);
        let n: i64 = rng.random_range(-6..=6);
        let fd = dense_of(&f, N);
        let (wn, un) = pow(n);
        let t = dense_of(&sys.t_apply(n, &f).map_err(|e| e.to_string())?, N);
        ensure(t == matmul(&matmul(wn, &fd), un), || format!("t_apply case {case}, n={n}"))?;
        let a = dense_of(&sys.adjoint_t_apply(n, &f).map_err(|e| e.to_string())?, N);
        ensure(a == matmul(&matmul(un, &fd), wn), || format!("adjoint_t_apply case {case}, n={n}"))?;
        let k = n.abs();
        let c = dense_of(&sys.cosine_apply(k as u64, &f).map_err(|e| e.to_string())?, N);
        let (wk, uk) = pow(k);
        let (wmk, umk) = pow(-k);
        let x = matmul(&matmul(wk, &fd), uk);
        let y = matmul(&matmul(wmk, &fd), umk);
        let expected: Dense = x
            .iter()
            .zip(&y)
            .map(|(rx, ry)| rx.iter().zip(ry).map(|(p, q)| (p + q) * &half).collect())
            .collect();
        ensure(c == expected, || format!("cosine_apply case {case}, n={k}"))?;
    }
    Ok("100 random operators on L_5, |n| <= 6, exact agreement".into())
}

fn norm_oracle() -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(99);
    let mut worst: f64 = 0.0;
    for case in 0..1000 {
        let r = rng.random_range(1..=8);
        let c = rng.random_range(1..=8);
        let f = random_float_block(&mut rng, r, c, 64);
        let sv = oracle_singular_values(&f);
        let op = sv.first().copied().unwrap_or(0.0);
        let tr: f64 = sv.iter().sum();
        let d1 = (f.operator_norm().map_err(|e| e.to_string())? - op).abs();
        let d2 = (f.trace_norm().map_err(|e| e.to_string())? - tr).abs();
        worst = worst.max(d1).max(d2);
        ensure(d1 <= 1e-10 && d2 <= 1e-10, || format!("case {case}: errors {d1:e}, {d2:e}"))?;
    }
    Ok(format!("1000 operators, max deviation {worst:e}"))
}

fn transitive_decay() -> Result<String, String> {
    let start = Instant::now();
    let sys = example_system();
    let sched = Schedule::affine(3, 25).unwrap();
    let run = transitive_witness(&sys, &proj(2), &proj(2), 2, &sched, &DecayRule::default())
        .map_err(|e| e.to_string())?;
    ensure(run.all_within_bounds(), || format!("bound violated: {:?}", run.notes))?;
    let r1 = run.series("||Phi_k - F||");
    let r2 = run.series("||T^n Phi_k - G||");
    let first = r1
        .iter()
        .zip(&r2)
        .position(|(a, b)| *a < 1e-6 && *b < 1e-6)
        .ok_or("residuals never fell below 1e-6")?;
    let k = run.records[first].k;
    ensure(k <= 25, || format!("first k below 1e-6 is {k}"))?;
    within(Duration::from_secs(5), start)?;
    Ok(format!("both residuals < 1e-6 from k = {k}; every residual within its bound"))
}

fn periodic_exactness() -> Result<String, String> {
    let sys = example_system();
    let policy = TailPolicy::default();
    let mut checked = 0;
    for (m, n, tol) in [(2, 8, 2f64.powi(-40)), (2, 4, 1e-9), (3, 6, 1e-12), (4, 10, 2f64.powi(-60))] {
        let run = periodic_witness(&sys, &proj(m), m, n, tol, &policy).map_err(|e| e.to_string())?;
        ensure(run.verdict == Verdict::Pass, || format!("m={m} n={n}: {:?}", run.notes))?;
        let rec = &run.records[0];
        let period = rec.residual("||T^n G - G||").unwrap();
        let boundary = rec.residual("||boundary||").unwrap();
        let defect = rec.residual("||(T^n G - G) - boundary||").unwrap();
        ensure(period.exact.is_some() && period.exact == boundary.exact, || {
            format!("m={m} n={n}: period {:?} boundary {:?}", period.exact, boundary.exact)
        })?;
        ensure(defect.exact == Some(Dyadic::zero()), || format!("m={m} n={n}: operator identity fails"))?;
        let tail = run.tolerances["tail_forward"].max(run.tolerances["tail_backward"]);
        ensure(period.value < 2.0 * tail, || {
            format!("m={m} n={n}: residual {} vs 2*tail {}", period.value, 2.0 * tail)
        })?;
        checked += 1;
    }
    Ok(format!("{checked} truncations: residual equals the boundary dyadic and is below 2*tail"))
}

fn cosine_split() -> Result<String, String> {
    let sys = example_system();
    let rule = DecayRule::new(1e-4, 3).unwrap();
    let sched = Schedule::affine(3, 20).unwrap();
    let out = find_cosine_split(sys.w(), 4, &sched, &rule, Side::Right).map_err(|e| e.to_string())?;
    ensure(out.is_found(), || "no split found".into())?;
    let (odd, even) = SubspaceSpec::leading(4).split_by_parity();
    for e in &out.witness().entries {
        let v = Dyadic::pow2(-2 * e.n as i64);
        ensure(e.e == odd && e.r == even, || format!("k={}: split {} / {}", e.k, e.e, e.r))?;
        ensure(e.forward == v && e.backward == v, || format!("k={}: {} {}", e.k, e.forward, e.backward))?;
    }
    let run = cosine_witness(&sys, &proj(4), &proj(4), out.witness(), &rule).map_err(|e| e.to_string())?;
    let r1 = run.series("||V_k - F||");
    let r2 = run.series("||C^n V_k - G||");
    let first = r1
        .iter()
        .zip(&r2)
        .position(|(a, b)| *a < 1e-4 && *b < 1e-4)
        .ok_or("cosine residuals never fell below 1e-4")?;
    let k = run.records[first].k;
    ensure(k <= 20, || format!("first k below 1e-4 is {k}"))?;
    Ok(format!("parity split with 2^-2n exactly; residuals < 1e-4 from k = {k}"))
}

/// `α^n(j)` through the integers: `φ(φ^{-1}(j) + n)`.
fn zigzag_power(n: i64, j: u64) -> u64 {
    let z = if j % 2 == 0 { (j / 2) as i64 } else { -(((j - 1) / 2) as i64) } + n;
    if z > 0 {
        2 * z as u64
    } else {
        (1 - 2 * z) as u64
    }
}

fn orthogonality() -> Result<String, String> {
    let u = build_aperiodic_shift();
    let mut horizons = Vec::new();
    for k in 1..=16u64 {
        let got = orthogonality_horizon(&u, k, 64).map_err(|e| e.to_string())?;
        let last = (1..=64i64)
            .filter(|&n| (1..=k).any(|j| zigzag_power(n, j) <= k))
            .max()
            .unwrap_or(0) as u64;
        let expected = (last < 64).then_some(last + 1);
        ensure(got.is_some() && got == expected, || format!("k={k}: {got:?} vs sweep {expected:?}"))?;
        horizons.push(got.unwrap());
    }
    let id = identity();
    ensure(orthogonality_horizon(&id, 3, 64).map_err(|e| e.to_string())?.is_none(), || {
        "identity produced a horizon".into()
    })?;
    let rep = orthogonality_report(&id, 3, 64).map_err(|e| e.to_string())?;
    ensure(rep.verdict == Verdict::Inconclusive, || format!("identity verdict {}", rep.verdict))?;
    Ok(format!("N_k for k = 1..16: {horizons:?}; identity inconclusive"))
}

fn determinism() -> Result<String, String> {
    let render_all = || -> Result<Vec<String>, String> {
        fixture_reports("example34")
            .iter()
            .map(|r| render(r, Format::Json).map_err(|e| e.to_string()))
            .collect()
    };
    let a = render_all()?;
    let b = render_all()?;
    ensure(a == b, || "in-process JSON differs between runs".into())?;
    let mut dirs = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let code = elemdyn_cli::run_cli(
            ["elemdyn", "run", "example34", "--out", dir.path().to_str().unwrap(), "--format", "json"],
            &mut Vec::new(),
            &mut Vec::new(),
        );
        ensure(code == 0, || format!("exit status {code}"))?;
        dirs.push(dir);
    }
    let read = |d: &tempfile::TempDir| -> BTreeMap<String, Vec<u8>> {
        std::fs::read_dir(d.path().join("example34"))
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
            })
            .collect()
    };
    let (x, y) = (read(&dirs[0]), read(&dirs[1]));
    ensure(!x.is_empty() && x == y, || "report files differ".into())?;
    Ok(format!("{} JSON reports byte-identical across runs", x.len()))
}

fn main() {
    let checks: [(&str, Check); 11] = [
        ("example exact grid", example_grid),
        ("adjoint grid", adjoint_grid),
        ("norm, modulus and duality of W", example_moduli),
        ("necessary-condition consistency", necessary_consistency),
        ("dense oracle equivalence", dense_oracle),
        ("SVD norm oracle", norm_oracle),
        ("transitive witness decay", transitive_decay),
        ("periodic witness exactness", periodic_exactness),
        ("cosine split", cosine_split),
        ("orthogonality horizon", orthogonality),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|p| {
                let msg = p
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panic".into());
                Err(format!("panicked: {msg}"))
            });
        let ms = start.elapsed().as_millis();
        match outcome {
            Ok(detail) => println!("acceptance {:>2} {name:<34} PASS  {detail} [{ms} ms]", i + 1),
            Err(why) => {
                failed += 1;
                println!("acceptance {:>2} {name:<34} FAIL  {why} [{ms} ms]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
