use std::fmt::Write as _;

use anyhow::{Context, Result};
use serde_json::json;
use wallach_core::calabi::{
    self, calabi_verdict, extract_immersion, lambda_grid, psd_verdict, reconstruction_residual, scan, scan_verdicts,
    BlockVerdict, Tolerances,
};
use wallach_core::gram::{replay, search_violation, SearchOptions, Witness};
use wallach_core::hartogs::{
    ch_block_assembly, ch_projectively_induced, ch_reduction, einstein_residual, mu_einstein, thm1_threshold, CHDomain,
    FdSteps,
};
use wallach_core::DomainModel;

use crate::report::RunReport;
use crate::{Command, Output};

/// Radius cap for Einstein probe points; keeps the nested stencils well inside.
const EINSTEIN_CAP: f64 = 0.5;
/// Replayed and archived witness eigenvalues must agree to this.
const REPLAY_TOL: f64 = 1e-12;

pub(crate) fn dispatch(cmd: Command, argv: &[String]) -> Result<Output> {
    match cmd {
        Command::Info { domain } => info(argv, &domain),
        Command::Calabi { domain, lambda, cutoff, tol_abs, tol_rel } => {
            calabi_cmd(argv, &domain, lambda, cutoff, Tolerances { abs: tol_abs, rel: tol_rel })
        }
        Command::Wallach { domain, lambda } => wallach(argv, &domain, lambda),
        Command::Gram { domain, lambda, points, budget, seed, witness } => {
            gram(argv, &domain, lambda, points, budget, seed, witness.as_deref())
        }
        Command::ChCheck { chspec, c, cutoff } => ch_check(argv, &chspec, c, cutoff),
        Command::Einstein { chspec, points, step, seed } => einstein(argv, &chspec, points, step, seed),
        Command::Scan { domain, lambda_from, lambda_to, step, cutoff } => {
            scan_cmd(argv, &domain, lambda_from, lambda_to, step, cutoff)
        }
        Command::Immersion { domain, lambda, cutoff } => immersion(argv, &domain, lambda, cutoff),
        Command::Replay { witness } => replay_cmd(argv, &witness),
    }
}

fn domain(spec: &str) -> Result<DomainModel> {
    Ok(spec.parse::<DomainModel>()?)
}

fn chdomain(spec: &str) -> Result<CHDomain> {
    Ok(spec.parse::<CHDomain>()?)
}

fn text_only(report: RunReport, text: String) -> Output {
    Output { report, text, csv: None }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

fn block_label(b: &BlockVerdict) -> String {
    match b.w_degree {
        Some(w) => format!("({}, w^{})", b.degree, w),
        None => format!("{}", b.degree),
    }
}

fn block_table(blocks: &[BlockVerdict]) -> String {
    let mut s = String::from("  block      dim  rank  min_eig                  psd\n");
    for b in blocks {
        let _ = writeln!(
            s,
            "  {:<10} {:>3}  {:>4}  {:>23.16e}  {}",
            block_label(b),
            b.dim,
            b.rank,
            b.min_eigenvalue,
            yes_no(b.is_psd())
        );
    }
    s
}

fn info(argv: &[String], spec: &str) -> Result<Output> {
    let dom = domain(spec)?;
    let w = dom.wallach_set();
    let mut r = RunReport::new(argv, "info", dom.spec());
    r.details = json!({
        "dim": dom.dim(),
        "rank": dom.rank(),
        "a": dom.a(),
        "genus": dom.genus(),
        "wallach_set": w,
        "mu_einstein": mu_einstein(&dom),
        "threshold": thm1_threshold(&dom),
    });
    let text = format!(
        "{}: d={}, r={}, a={}, γ={}, W = {}\nmu_einstein = {}, Cartan–Hartogs threshold = {}\n",
        dom.spec(),
        dom.dim(),
        dom.rank(),
        dom.a(),
        dom.genus(),
        w,
        mu_einstein(&dom),
        thm1_threshold(&dom)
    );
    Ok(text_only(r, text))
}

fn wallach(argv: &[String], spec: &str, lambda: f64) -> Result<Output> {
    let dom = domain(spec)?;
    let member = dom.wallach_contains(lambda);
    let mut r = RunReport::new(argv, "wallach", dom.spec());
    r.params.lambda = Some(lambda);
    r.verdicts.wallach = Some(member);
    r.details = json!({ "wallach_set": dom.wallach_set() });
    let text = format!("{} lambda={}: member={} (W = {})\n", dom.spec(), lambda, yes_no(member), dom.wallach_set());
    Ok(text_only(r, text))
}

fn calabi_cmd(argv: &[String], spec: &str, lambda: f64, cutoff: u32, tol: Tolerances) -> Result<Output> {
    let dom = domain(spec)?;
    let (_, v) = calabi_verdict(&dom, lambda, cutoff, tol)?;
    let member = dom.wallach_contains(lambda);
    let mut r = RunReport::new(argv, "calabi", dom.spec());
    r.params.lambda = Some(lambda);
    r.params.cutoff = Some(cutoff);
    r.params.tol_abs = Some(tol.abs);
    r.params.tol_rel = Some(tol.rel);
    r.verdicts.wallach = Some(member);
    r.verdicts.calabi_psd = Some(v.psd);
    r.verdicts.certainty = Some(v.certainty);
    // below the rank, a gap value may first fail beyond the cutoff
    let comparable = cutoff as usize >= dom.rank();
    r.agreement = comparable.then_some(member == v.psd);
    let negative: Vec<u32> = v.negative_blocks().map(|b| b.degree).collect();
    r.details = json!({
        "min_eigenvalue": v.min_eigenvalue(),
        "negative_blocks": negative,
        "comparable": comparable,
    });
    r.blocks = v.per_block.clone();

    let mut text = format!(
        "{} lambda={} cutoff={}: psd={} ({:?}), wallach member={}\n",
        dom.spec(),
        lambda,
        cutoff,
        yes_no(v.psd),
        v.certainty,
        yes_no(member)
    );
    text += &block_table(&v.per_block);
    match r.agreement {
        Some(true) => text += "closed form and truncated verdict agree\n",
        Some(false) => text += "INCONSISTENT: closed form and truncated verdict disagree\n",
        None => text += "cutoff below the rank: no comparison with the closed form\n",
    }
    Ok(text_only(r, text))
}

fn gram(
    argv: &[String],
    spec: &str,
    lambda: f64,
    points: usize,
    budget: usize,
    seed: u64,
    witness_path: Option<&std::path::Path>,
) -> Result<Output> {
    let dom = domain(spec)?;
    let opts = SearchOptions::default();
    let outcome = search_violation(&dom, lambda, points, budget, seed, &opts)?;
    let member = dom.wallach_contains(lambda);
    let found = outcome.witness.is_some();
    if let (Some(path), Some(w)) = (witness_path, &outcome.witness) {
        std::fs::write(path, serde_json::to_string_pretty(w)? + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let mut r = RunReport::new(argv, "gram", dom.spec());
    r.params.lambda = Some(lambda);
    r.params.n_points = Some(points);
    r.params.budget = Some(budget);
    r.params.seed = Some(seed);
    r.verdicts.wallach = Some(member);
    r.verdicts.gram_witness = Some(found);
    r.agreement = Some(found != member);
    r.details = json!({ "search": outcome, "options": opts });

    let mut text = format!("{} lambda={} points={} budget={} seed={}\n", dom.spec(), lambda, points, budget, seed);
    match &outcome.witness {
        Some(w) => {
            let _ = writeln!(
                text,
                "witness found at restart {}: {} points, min eigenvalue {:.16e}",
                outcome.restart.unwrap_or(0),
                w.points.len(),
                w.min_eig
            );
        }
        None => {
            let _ = writeln!(
                text,
                "no witness in {} restarts (best min eigenvalue {:.16e})",
                outcome.restarts_run, outcome.best_min_eig
            );
        }
    }
    let _ = writeln!(text, "wallach member={}", yes_no(member));
    if !r.agreement.unwrap_or(true) {
        text += "INCONSISTENT: Gram search and closed form disagree\n";
    }
    Ok(text_only(r, text))
}

fn ch_check(argv: &[String], spec: &str, c: f64, cutoff: Option<u32>) -> Result<Output> {
    let ch = chdomain(spec)?;
    let induced = ch_projectively_induced(&ch, c);
    let threshold = thm1_threshold(&ch.base);
    let reduction = ch_reduction(&ch, c);
    let mut r = RunReport::new(argv, "ch-check", ch.to_string());
    r.params.c = Some(c);
    r.params.mu = Some(ch.mu);
    r.params.cutoff = cutoff;
    r.verdicts.ch_induced = Some(induced);

    let mut text = format!("{} c={}: induced={}, threshold={}\n", ch, c, yes_no(induced), threshold);
    for (m, lambda, member) in &reduction {
        let _ = writeln!(text, "  m={m}: (c+m)mu = {lambda} in W\\{{0}}: {}", yes_no(*member));
    }
    let mut details = json!({
        "mu_einstein": mu_einstein(&ch.base),
        "is_einstein": ch.is_einstein(),
        "threshold": threshold,
        "reduction": reduction.iter().map(|(m, l, b)| json!({"m": m, "lambda": l, "member": b})).collect::<Vec<_>>(),
    });
    if let Some(cutoff) = cutoff {
        let tol = Tolerances::default();
        let m = ch_block_assembly(&ch, c, cutoff)?;
        let v = psd_verdict(&m, tol)?;
        r.params.tol_abs = Some(tol.abs);
        r.params.tol_rel = Some(tol.rel);
        r.verdicts.calabi_psd = Some(v.psd);
        r.verdicts.certainty = Some(v.certainty);
        r.agreement = Some(v.psd == induced);
        details["negative_blocks"] =
            json!(v.negative_blocks().map(|b| [b.degree, b.w_degree.unwrap_or(0)]).collect::<Vec<_>>());
        r.blocks = v.per_block.clone();
        let _ = writeln!(text, "block verdict at cutoff {}: psd={} ({:?})", cutoff, yes_no(v.psd), v.certainty);
        text += &block_table(&v.per_block);
        if v.psd != induced {
            text += "INCONSISTENT: closed form and block verdict disagree\n";
        }
    }
    r.details = details;
    Ok(text_only(r, text))
}

fn einstein(argv: &[String], spec: &str, points: usize, step: f64, seed: u64) -> Result<Output> {
    let ch = chdomain(spec)?;
    let steps = FdSteps::from_step(step);
    let mut probes = Vec::with_capacity(points);
    for i in 0..points as u64 {
        let s = seed.wrapping_add(i);
        let p = ch.sample(s, EINSTEIN_CAP)?;
        let e = einstein_residual(&ch, &p, steps)?;
        probes.push((s, p, e));
    }
    let ks: Vec<f64> = probes.iter().map(|(_, _, e)| e.k_estimate).collect();
    let k_mean = ks.iter().sum::<f64>() / ks.len().max(1) as f64;
    let k_spread = ks.iter().map(|k| ((k - k_mean) / k_mean).abs()).fold(0.0, f64::max);
    let residual_max = probes.iter().map(|(_, _, e)| e.residual).fold(0.0, f64::max);

    let mut r = RunReport::new(argv, "einstein", ch.to_string());
    r.params.mu = Some(ch.mu);
    r.params.n_points = Some(points);
    r.params.step = Some(step);
    r.params.seed = Some(seed);
    r.details = json!({
        "is_einstein": ch.is_einstein(),
        "steps": steps,
        "k_mean": k_mean,
        "k_relative_spread": k_spread,
        "residual_max": residual_max,
        "points": probes.iter().map(|(s, p, e)| json!({
            "seed": s,
            "point": wallach_core::gram::encode_point(p),
            "k_estimate": e.k_estimate,
            "residual": e.residual,
            "condition": e.condition,
        })).collect::<Vec<_>>(),
    });
    let mut text = format!("{} steps inner={} outer={}\n", ch, steps.inner, steps.outer);
    for (s, _, e) in &probes {
        let _ = writeln!(text, "  seed {s}: k={:.10} residual={:.3e} cond={:.3e}", e.k_estimate, e.residual, e.condition);
    }
    let _ = writeln!(text, "k mean {k_mean:.10}, relative spread {k_spread:.3e}, max residual {residual_max:.3e}");
    if !ch.is_einstein() {
        text += "note: mu differs from mu_einstein; no Einstein property is expected\n";
    }
    Ok(text_only(r, text))
}

fn scan_cmd(argv: &[String], spec: &str, from: f64, to: f64, step: f64, cutoff: u32) -> Result<Output> {
    let dom = domain(spec)?;
    anyhow::ensure!(step > 0.0 && from <= to, "need step > 0 and lambda-from <= lambda-to");
    let tol = Tolerances::default();
    let lambdas = lambda_grid(from, to, step);
    let rows = scan(&dom, &lambdas, cutoff, tol)?;
    let comparable = cutoff as usize >= dom.rank();
    let per_lambda: Vec<_> = scan_verdicts(&rows)
        .into_iter()
        .map(|(l, psd)| (l, psd, dom.wallach_contains(l)))
        .collect();
    let disagreements: Vec<f64> = per_lambda.iter().filter(|(_, p, w)| p != w).map(|(l, _, _)| *l).collect();

    let mut r = RunReport::new(argv, "scan", dom.spec());
    r.params.lambda_from = Some(from);
    r.params.lambda_to = Some(to);
    r.params.step = Some(step);
    r.params.cutoff = Some(cutoff);
    r.params.tol_abs = Some(tol.abs);
    r.params.tol_rel = Some(tol.rel);
    r.agreement = comparable.then_some(disagreements.is_empty());
    r.details = json!({
        "rows": rows,
        "verdicts": per_lambda.iter().map(|(l, p, w)| json!({"lambda": l, "psd": p, "wallach": w})).collect::<Vec<_>>(),
        "disagreements": disagreements,
        "comparable": comparable,
    });

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["lambda", "degree", "block_dim", "min_eig", "psd"])?;
    for row in &rows {
        w.write_record([
            format!("{:.16e}", row.lambda),
            row.degree.to_string(),
            row.block_dim.to_string(),
            format!("{:.16e}", row.min_eig),
            row.psd.to_string(),
        ])?;
    }
    let csv = String::from_utf8(w.into_inner()?)?;

    let mut text = format!("{} cutoff={}\n  lambda  psd    wallach  min_eig\n", dom.spec(), cutoff);
    for (l, psd, member) in &per_lambda {
        let min = rows.iter().filter(|x| x.lambda == *l).map(|x| x.min_eig).fold(f64::INFINITY, f64::min);
        let _ = writeln!(text, "  {:<6}  {:<5}  {:<7}  {:.6e}", l, yes_no(*psd), yes_no(*member), min);
    }
    if comparable && !disagreements.is_empty() {
        let _ = writeln!(text, "INCONSISTENT at lambda {disagreements:?}");
    }
    Ok(Output { report: r, text, csv: Some(csv) })
}

fn monomial(exps: &[u32]) -> String {
    let parts: Vec<String> = exps
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(i, &e)| if e == 1 { format!("z{}", i + 1) } else { format!("z{}^{}", i + 1, e) })
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join(" ")
    }
}

fn immersion(argv: &[String], spec: &str, lambda: f64, cutoff: u32) -> Result<Output> {
    let dom = domain(spec)?;
    let tol = Tolerances::default();
    let (m, v) = calabi_verdict(&dom, lambda, cutoff, tol)?;
    let imm = extract_immersion(&m, tol)?;
    let series = calabi::bergman_diastasis_series(&dom, lambda, cutoff)?;
    let residual = reconstruction_residual(&imm, &series)?;

    let mut r = RunReport::new(argv, "immersion", dom.spec());
    r.params.lambda = Some(lambda);
    r.params.cutoff = Some(cutoff);
    r.verdicts.calabi_psd = Some(v.psd);
    r.verdicts.certainty = Some(v.certainty);
    r.blocks = v.per_block.clone();
    r.details = json!({ "immersion": imm, "reconstruction_residual": residual });

    let mut text = format!("{} lambda={} cutoff={}: {} components\n", dom.spec(), lambda, cutoff, imm.components.len());
    for (i, c) in imm.components.iter().enumerate() {
        let terms: Vec<String> = c
            .terms
            .iter()
            .filter(|(_, v)| v.abs() > 1e-14)
            .map(|(e, v)| format!("{v:+.12} {}", monomial(e)))
            .collect();
        let _ = writeln!(text, "  f{} (degree {}): {}", i + 1, c.degree, terms.join(" "));
    }
    let _ = writeln!(text, "reconstruction residual {residual:.3e}");
    Ok(text_only(r, text))
}

fn replay_cmd(argv: &[String], path: &std::path::Path) -> Result<Output> {
    let raw = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let w: Witness = serde_json::from_str(&raw).with_context(|| format!("parsing {}", path.display()))?;
    let replayed = replay(&w)?;
    let diff = (replayed - w.min_eig).abs();
    let mut r = RunReport::new(argv, "replay", w.domain.clone());
    r.params.lambda = Some(w.lambda);
    r.params.seed = Some(w.seed);
    r.params.n_points = Some(w.points.len());
    r.verdicts.gram_witness = Some(replayed < 0.0);
    r.agreement = Some(diff <= REPLAY_TOL);
    r.details = json!({ "stored_min_eig": w.min_eig, "replayed_min_eig": replayed, "difference": diff });
    let text = format!(
        "{} lambda={} ({} points, seed {}): stored {:.16e}, replayed {:.16e}, |diff| {:.3e}\n",
        w.domain,
        w.lambda,
        w.points.len(),
        w.seed,
        w.min_eig,
        replayed,
        diff
    );
    Ok(text_only(r, text))
}
