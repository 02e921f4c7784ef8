//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits nonzero if any fails.

use std::time::{Duration, Instant};

use wallach_core::calabi::{
    bergman_diastasis_series, calabi_verdict, extract_immersion, graded_blocks, lambda_grid, normalization_check,
    psd_verdict, reconstruction_residual, scan, scan_verdicts, Tolerances,
};
use wallach_core::gram::{search_violation, SearchOptions};
use wallach_core::hartogs::{
    ch_block_assembly, ch_cross_path, ch_direct_series, ch_projectively_induced, einstein_residual, mu_einstein,
    CHDomain, FdSteps,
};
use wallach_core::DomainModel;

/// Exact minimum eigenvalue of the type I(2,2) degree-2 block at λ = 1/2.
const GAP_ORACLE: f64 = -0.25;
/// Radius cap for Einstein probe points.
const EINSTEIN_CAP: f64 = 0.5;

type Criterion = (&'static str, u64, fn() -> Outcome);

struct Outcome {
    ok: bool,
    detail: String,
}

fn dom(s: &str) -> DomainModel {
    s.parse().expect("valid domain spec")
}

fn wallach_gap() -> Outcome {
    let d = dom("I:2,2");
    let lambdas = lambda_grid(0.1, 3.0, 0.1);
    let rows = scan(&d, &lambdas, 4, Tolerances::default()).expect("scan");
    let verdicts = scan_verdicts(&rows);
    let wrong: Vec<f64> = verdicts.iter().filter(|(l, psd)| *psd != (*l > 0.95)).map(|(l, _)| *l).collect();
    let b2 = rows.iter().find(|r| r.lambda == 0.5 && r.degree == 2).expect("degree-2 row at 0.5");
    let rel = ((b2.min_eig - GAP_ORACLE) / GAP_ORACLE).abs();
    Outcome {
        ok: wrong.is_empty() && verdicts.len() == 30 && b2.min_eig < 0.0 && rel <= 1e-9,
        detail: format!(
            "{} grid points, misclassified {:?}, degree-2 min eig at 0.5 = {:.17e} (rel err {:.1e})",
            verdicts.len(),
            wrong,
            b2.min_eig,
            rel
        ),
    }
}

fn rank_one_continuum() -> Outcome {
    let lambdas = lambda_grid(0.1, 3.0, 0.1);
    let mut non_psd = Vec::new();
    let mut worst = 0.0f64;
    for spec in ["CH:1", "CH:2"] {
        let d = dom(spec);
        for &lambda in &lambdas {
            let (_, v) = calabi_verdict(&d, lambda, 6, Tolerances::default()).expect("verdict");
            if !v.psd {
                non_psd.push((spec, lambda));
            }
            // diagonal of (1 − |z|²)^{−λ}: (λ)_{|m|} / m!
            let s = bergman_diastasis_series(&d, lambda, 6).expect("series");
            for j in 1..s.len() {
                let m = s.multi_index(j);
                let poch: f64 = (0..m.degree()).map(|i| lambda + f64::from(i)).product();
                let expect = poch / m.factorial();
                worst = worst.max((s.coeff(j, j) - expect).abs() / expect.max(1.0));
            }
        }
    }
    Outcome {
        ok: non_psd.is_empty() && worst <= 1e-12,
        detail: format!("non-PSD {non_psd:?}, max diagonal deviation {worst:.1e}"),
    }
}

fn gram_agreement() -> Outcome {
    let d = dom("I:2,2");
    let opts = SearchOptions::default();
    let mut notes = Vec::new();
    let mut ok = true;
    for seed in 1..=5u64 {
        let out = search_violation(&d, 0.5, 6, 2000, seed, &opts).expect("search");
        match &out.witness {
            Some(w) if w.min_eig < -1e-6 => notes.push(format!("0.5/s{seed}: witness r{}", out.restart.unwrap_or(0))),
            _ => {
                ok = false;
                notes.push(format!("0.5/s{seed}: NO witness"));
            }
        }
    }
    for lambda in [1.0, 1.5] {
        for seed in 1..=5u64 {
            let out = search_violation(&d, lambda, 6, 2000, seed, &opts).expect("search");
            if out.witness.is_some() {
                ok = false;
                notes.push(format!("{lambda}/s{seed}: spurious witness"));
            } else {
                notes.push(format!("{lambda}/s{seed}: none (best {:.1e})", out.best_min_eig));
            }
        }
    }
    Outcome { ok, detail: notes.join(", ") }
}

fn hartogs_cross_path() -> Outcome {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for base in ["CH:1", "I:2,2"] {
        let b = dom(base);
        for mu in [mu_einstein(&b), 1.0] {
            let ch = CHDomain::new(b.clone(), mu).expect("mu > 0");
            for c in [0.5, 1.0, 1.25, 2.0] {
                let x = ch_cross_path(&ch, c, 3).expect("cross path");
                worst = worst.max(x.discrepancy);
                cases += 1;
            }
        }
    }
    Outcome { ok: worst <= 1e-10, detail: format!("{cases} cases, max relative discrepancy {worst:.1e}") }
}

fn hartogs_threshold() -> Outcome {
    let ch = CHDomain::einstein(dom("I:2,2"));
    let mut ok = (ch.mu - 0.8).abs() < 1e-15;
    let mut notes = Vec::new();
    for (c, expect) in [(1.25, true), (1.0, false), (1.1, false), (1.2, false)] {
        let closed = ch_projectively_induced(&ch, c);
        let m = ch_block_assembly(&ch, c, 4).expect("assembly");
        let v = psd_verdict(&m, Tolerances::default()).expect("verdict");
        let negative: Vec<(u32, u32)> = v.negative_blocks().map(|b| (b.degree, b.w_degree.unwrap_or(0))).collect();
        let case_ok = closed == expect && v.psd == closed && (closed || !negative.is_empty());
        ok &= case_ok;
        notes.push(format!("c={c}: closed={closed} blocks_psd={} negative={negative:?}", v.psd));
    }
    Outcome { ok, detail: notes.join("; ") }
}

fn einstein_probe() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    // on CH² the potential −log(1 − |ζ|²) has Ric = −3g exactly; the other constant is only estimated
    let cases = [("CHD(CH:1;mu=1)", 5u64, 1e-5, 1e-4, Some(-3.0)), ("CHD(I:2,2;mu=einstein)", 3, 1e-4, 1e-3, None)];
    for (spec, n, res_tol, k_tol, exact) in cases {
        let ch: CHDomain = spec.parse().expect("chspec");
        let mut ks = Vec::new();
        let mut res = 0.0f64;
        for seed in 1..=n {
            let p = ch.sample(seed, EINSTEIN_CAP).expect("sample");
            let e = einstein_residual(&ch, &p, FdSteps::default()).expect("probe");
            ks.push(e.k_estimate);
            res = res.max(e.residual);
        }
        let mean = ks.iter().sum::<f64>() / ks.len() as f64;
        let spread = ks.iter().map(|k| ((k - mean) / mean).abs()).fold(0.0, f64::max);
        let exact_ok = exact.is_none_or(|k: f64| ((mean - k) / k).abs() <= k_tol);
        ok &= res <= res_tol && spread <= k_tol && exact_ok;
        notes.push(format!("{spec}: k={mean:.8} spread {spread:.1e}, max residual {res:.1e}"));
    }
    Outcome { ok, detail: notes.join("; ") }
}

fn structural_invariants() -> Outcome {
    let tol = Tolerances::default();
    let mut off_grade = 0.0f64;
    let mut w_off = 0.0f64;
    let mut normalization_failures = Vec::new();
    let mut worst_residual = 0.0f64;
    let mut immersions = 0;
    for (spec, cutoff) in
        [("CH:1", 6), ("CH:2", 5), ("I:2,2", 4), ("I:2,3", 3), ("III:2", 4), ("III:3", 3), ("IV:3", 4), ("IV:5", 3)]
    {
        let d = dom(spec);
        for lambda in d.validation_grid() {
            let s = bergman_diastasis_series(&d, lambda, cutoff).expect("series");
            if !normalization_check(&s) {
                normalization_failures.push((spec, lambda));
                continue;
            }
            let m = graded_blocks(&s).expect("graded");
            off_grade = off_grade.max(m.off_grade_max);
            let v = psd_verdict(&m, tol).expect("verdict");
            if v.psd {
                let imm = extract_immersion(&m, tol).expect("immersion");
                worst_residual = worst_residual.max(reconstruction_residual(&imm, &s).expect("residual"));
                immersions += 1;
            }
        }
    }
    for base in ["CH:1", "CH:2", "I:2,2"] {
        let b = dom(base);
        for mu in [mu_einstein(&b), 1.0] {
            let ch = CHDomain::new(b.clone(), mu).expect("mu > 0");
            for c in [0.5, 1.0, 1.25, 2.0] {
                let s = ch_direct_series(&ch, c, 3).expect("direct");
                if !normalization_check(&s) {
                    normalization_failures.push((base, c));
                    continue;
                }
                let m = graded_blocks(&s).expect("graded");
                off_grade = off_grade.max(m.off_grade_max);
                w_off = w_off.max(m.refine_by_last_variable().1);
            }
        }
    }
    Outcome {
        ok: off_grade <= 1e-13 && w_off <= 1e-13 && normalization_failures.is_empty() && worst_residual <= 1e-10,
        detail: format!(
            "off-grade max {off_grade:.1e}, w-degree max {w_off:.1e}, normalization failures {normalization_failures:?}, \
             {immersions} immersions with max residual {worst_residual:.1e}"
        ),
    }
}

fn main() {
    // `cargo test -- <filter>` passes arguments; honour --list so tooling works
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let criteria: [Criterion; 7] = [
        ("Wallach gap reconstruction, I:2,2 cutoff 4", 60, wallach_gap),
        ("rank-one continuum, CH:1 and CH:2 cutoff 6", 10, rank_one_continuum),
        ("Gram search agrees with series, I:2,2", 120, gram_agreement),
        ("Cartan-Hartogs cross-path equality", 120, hartogs_cross_path),
        ("Cartan-Hartogs threshold at mu_0", 60, hartogs_threshold),
        ("Einstein residual probe", 300, einstein_probe),
        ("structural zeros, normalization, immersion residual", 300, structural_invariants),
    ];
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = f();
        let took = start.elapsed();
        let in_time = took <= Duration::from_secs(*limit);
        let ok = out.ok && in_time;
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {} [{}]: {} ({:.2} s of {} s) {}",
            i + 1,
            name,
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            limit,
            out.detail
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
