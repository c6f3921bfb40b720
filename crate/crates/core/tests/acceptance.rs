//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::cmp::Ordering;
use std::time::Instant;

use rayon::prelude::*;

use lexmerge_core::export::{bounds_csv, TraceFile};
use lexmerge_core::lexmerge::{run, to_strategy};
use lexmerge_core::optimizer::{conjecture_report, optimize, OptimizeOptions};
use lexmerge_core::scalar::Exponent;
use lexmerge_core::strategies::{
    bounds_table, dbe_points, lb, strategy_from_points, ub_dbe, ub_lexmerge, BoundsOptions,
};
use lexmerge_core::verify::{
    check_conservation, check_disc_theorem, check_lex_length, check_merge_rule, check_monotonicity,
    check_p1, check_p2, check_p3, check_ratio_lemma, check_wrapped_structure, fixtures, verify_all,
    Check, Status,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn exact_main_theorem() -> Outcome {
    let failures: Vec<u32> = (1..=200u32)
        .into_par_iter()
        .filter(|&n| run(n).map_or(true, |t| t.disc_vs_target() != Ordering::Equal))
        .collect();
    ensure(failures.is_empty(), || format!("disc differs from 2^(1-1/m) at n = {failures:?}"))?;
    Ok("disc(LM_n) = 2^(1-1/ceil(n/2)) exactly for n = 1..200".into())
}

fn golden_trace() -> Outcome {
    let expected = [
        "{[0],[0],[1],[1],[2],[2],[3]}",
        "{[1],[1],[2],[2],[3],[0,0]}",
        "{[2],[2],[3],[0,0],[1,1]}",
        "{[3],[0,0],[1,1],[2,2]}",
        "{[1,1],[2,2],[0,0,3]}",
        "{[0,0,3],[1,1,2,2]}",
        "{[0,0,1,1,2,2,3]}",
    ];
    let trace = run(7).map_err(|e| e.to_string())?;
    let got: Vec<String> = trace.collections.iter().map(|c| c.to_string()).collect();
    ensure(got == expected, || format!("got {got:?}"))?;
    Ok("run(7) reproduces the seven LM_7 collections verbatim".into())
}

fn lemma_suite() -> Outcome {
    let failures: Vec<String> = (1..=200u32)
        .into_par_iter()
        .flat_map_iter(verify_all)
        .filter(|r| r.status == Status::Fail)
        .map(|r| r.to_string())
        .collect();
    ensure(failures.is_empty(), || format!("{} failing reports, first: {}", failures.len(), failures[0]))?;
    let negatives = [
        ("p1", check_p1(&fixtures::p1_gap())),
        ("p2", check_p2(&fixtures::p2_unwrapped_exception())),
        ("p3", check_p3(&fixtures::p3_hole())),
        ("wrapped_structure", check_wrapped_structure(&fixtures::wrapped_wrong_members())),
        ("lex_length", check_lex_length(&fixtures::lex_length_inversion())),
        ("conservation", check_conservation(&fixtures::conservation_missing())),
        ("monotonicity", check_monotonicity(&fixtures::monotonicity_rise())),
        ("merge_rule", check_merge_rule(&fixtures::merge_rule_wrong_pair())),
        ("disc_theorem", check_disc_theorem(&fixtures::disc_theorem_too_large())),
        ("ratio_lemma", check_ratio_lemma(&fixtures::ratio_violation(), Exponent::new(1, 3))),
    ];
    for (name, report) in &negatives {
        ensure(report.status == Status::Fail, || format!("fixture for {name} not flagged: {report}"))?;
    }
    Ok(format!(
        "{} checks pass at every stage for n = 1..200; all {} negative fixtures flagged",
        Check::ALL.len(),
        negatives.len()
    ))
}

fn optimum_is_sqrt2(n: u32) -> Outcome {
    let opts = OptimizeOptions { tol: 1e-7, ..OptimizeOptions::default() };
    let r = optimize(n, &opts).map_err(|e| e.to_string())?;
    let err = (r.disc - 2f64.sqrt()).abs();
    ensure(err < 1e-6, || format!("optimize({n}) = {} differs from sqrt 2 by {err:e}", r.disc))?;
    Ok(format!("optimize({n}) = {:.9} (|err| = {err:.1e})", r.disc))
}

fn conjecture_sandwich() -> Outcome {
    let tol = 1e-6;
    let opts = OptimizeOptions { tol, ..OptimizeOptions::default() };
    let mut parts = Vec::new();
    for n in 5..=7 {
        let rep = conjecture_report(n, &opts).map_err(|e| e.to_string())?;
        let (lo, hi) = (lb::<f64>(n) - tol, ub_lexmerge::<f64>(n) + tol);
        ensure(lo <= rep.value && rep.value <= hi, || {
            format!("n={n}: {} outside [{lo}, {hi}]", rep.value)
        })?;
        ensure(!rep.verdict.is_bug(), || format!("n={n}: verdict {:?}", rep.verdict))?;
        parts.push(format!(
            "n={n}: {:.7} ({:?}, matches conjecture: {})",
            rep.value, rep.verdict, rep.matches_conjecture
        ));
    }
    Ok(parts.join("; "))
}

fn asymptotics() -> Outcome {
    let n = 100_000u32;
    let nf = f64::from(n);
    let ln2 = std::f64::consts::LN_2;
    let cases = [
        ("ub_lexmerge", nf * (2.0 - ub_lexmerge::<f64>(n)), 4.0 * ln2),
        ("ub_dbe", nf * (2.0 - ub_dbe::<f64>(n)), 1.5),
        ("lb", nf * (2.0 - lb::<f64>(n)), 6.0 * ln2),
    ];
    let mut parts = Vec::new();
    for (name, got, want) in cases {
        let rel = (got / want - 1.0).abs();
        ensure(rel < 0.01, || format!("{name}: n(2 - f(n)) = {got}, expected {want} within 1%"))?;
        parts.push(format!("{name} {got:.6} vs {want:.6}"));
    }
    Ok(parts.join(", "))
}

fn dbe_sanity() -> Outcome {
    let n_max = 10_000u32;
    let full = strategy_from_points(&dbe_points::<f64>(n_max)).map_err(|e| format!("n={n_max}: {e}"))?;
    let prefixes = full.prefix_discs();
    let sample: Vec<u32> = (1..=200).chain((250..=n_max).step_by(250)).collect();
    sample.par_iter().try_for_each(|&n| {
        let s = strategy_from_points(&dbe_points::<f64>(n)).map_err(|e| format!("n={n}: {e}"))?;
        let (own, prefix) = (s.disc_of(), prefixes[n as usize - 1]);
        ensure(own == prefix, || format!("n={n}: disc_of {own} differs from prefix value {prefix}"))
    })?;
    let rows: Vec<(u32, f64, f64)> =
        (1..=n_max).map(|n| (n, prefixes[n as usize - 1], ub_dbe::<f64>(n))).collect();
    if let Some((n, d, _)) = rows.iter().find(|(_, d, _)| *d >= 2.0) {
        return Err(format!("disc_of(dBE_{n}) = {d} is not below 2"));
    }
    if let Some((n, d, b)) = rows.iter().find(|(_, d, b)| *d > b + 1e-9) {
        return Err(format!("disc_of(dBE_{n}) = {d} exceeds ub_dbe = {b} by more than 1e-9"));
    }
    let (_, d, b) = rows[rows.len() - 1];
    Ok(format!("valid with disc < 2 and disc <= ub_dbe + 1e-9 for n <= 10^4; n=10^4 disc {d:.12} vs ub_dbe {b:.12}"))
}

fn ratio_lemma() -> Outcome {
    let failures: Vec<String> = (1..=100u32)
        .into_par_iter()
        .filter_map(|n| {
            let trace = run(n).ok()?;
            let s = to_strategy(&trace).ok()?;
            let r = check_ratio_lemma(&s, Exponent::new(1, u64::from(n.div_ceil(2))));
            (r.status == Status::Fail).then(|| r.to_string())
        })
        .collect();
    ensure(failures.is_empty(), || failures.join("; "))?;
    Ok("check_ratio_lemma passes on to_strategy(run(n)) with eps = 1/ceil(n/2) for n <= 100".into())
}

fn determinism_and_persistence() -> Outcome {
    for n in [1, 2, 7, 40, 101] {
        let trace = run(n).map_err(|e| e.to_string())?;
        let file = TraceFile::from_trace(&trace).map_err(|e| e.to_string())?;
        let back = TraceFile::from_json(&file.to_json()).map_err(|e| e.to_string())?;
        ensure(back == file, || format!("n={n}: JSON round trip changed the trace"))?;
        let audited = back.audit(&Check::ALL).map_err(|e| e.to_string())?;
        let mut direct = verify_all(n);
        let mut from_file: Vec<_> = audited.iter().filter(|r| r.check != Check::RecordedData).cloned().collect();
        direct.sort_by_key(|r| r.check);
        from_file.sort_by_key(|r| r.check);
        ensure(direct == from_file, || format!("n={n}: audit of the reloaded trace differs"))?;
        ensure(audited.iter().all(|r| r.status != Status::Fail), || format!("n={n}: reloaded trace fails"))?;
    }
    let run_with = |jobs| {
        let opts = OptimizeOptions { jobs: Some(jobs), tol: 1e-6, ..OptimizeOptions::default() };
        optimize(6, &opts).map(|r| serde_json::to_string(&r).expect("serializes"))
    };
    let one = run_with(1).map_err(|e| e.to_string())?;
    let four = run_with(4).map_err(|e| e.to_string())?;
    ensure(one == four, || "optimize(6) differs between 1 and 4 workers".into())?;
    let opts = BoundsOptions::default();
    let csv = || bounds_table(1, 300, &opts).map(|rows| bounds_csv(&rows, false));
    let (a, b) = (csv().map_err(|e| e.to_string())?, csv().map_err(|e| e.to_string())?);
    ensure(a == b, || "bounds CSV differs between runs".into())?;
    ensure(a.lines().nth(4) == Some("4,1.41421356237,1.41421356237,1.67109431669"), || {
        format!("unexpected row for n=4: {:?}", a.lines().nth(4))
    })?;
    Ok("JSON round trip preserves every check; optimizer identical for 1 and 4 workers; CSV byte-stable".into())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("exact main theorem", exact_main_theorem),
        ("golden LM_7 trace", golden_trace),
        ("lemma suite", lemma_suite),
        ("disc(3) = sqrt 2", || optimum_is_sqrt2(3)),
        ("disc(4) = sqrt 2", || optimum_is_sqrt2(4)),
        ("conjecture sandwich", conjecture_sandwich),
        ("asymptotic coefficients", asymptotics),
        ("dBE strategy sanity", dbe_sanity),
        ("ratio lemma", ratio_lemma),
        ("determinism and persistence", determinism_and_persistence),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2} {name} [{secs:.2}s]: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {:>2} {name} [{secs:.2}s]: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
