//! Gram matrices of the kernel `N(x, ȳ)^{−λ}` at finite point sets.
//!
//! `N^{−λ}` is a positive definite kernel iff `λ` lies in the Wallach set,
//! so outside it some finite configuration has an indefinite Gram matrix.
//! [`search_violation`] looks for one by random restarts followed by a
//! greedy perturbation descent on the minimum eigenvalue.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::domain::{DomainModel, C64};
use crate::error::{Error, Result};
use crate::par;

pub const DEFAULT_RADIUS_CAP: f64 = 0.7;
pub const DEFAULT_WITNESS_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct GramMatrix {
    pub matrix: DMatrix<C64>,
    /// `Re N > 0` held at every pair, so the principal power is the
    /// continuous branch through `N(0,0) = 1`.
    pub branch_ok: bool,
    /// First pair that failed the branch check, with its `Re N`.
    pub bad_pair: Option<(usize, usize, f64)>,
}

impl GramMatrix {
    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.matrix)
    }
}

fn min_eigenvalue(m: &DMatrix<C64>) -> f64 {
    m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

// exp(−λ Log N(x, ȳ)); None when Re N <= 0.
fn kernel_entry(dom: &DomainModel, lambda: f64, x: &[C64], y: &[C64]) -> (C64, f64) {
    let n = dom.generic_norm_eval(x, y);
    ((n.ln() * -lambda).exp(), n.re)
}

/// Entry `(α, β)` is `N(x_α, x̄_β)^{−λ}` on the principal branch. Only the
/// upper triangle is evaluated; the lower one is its conjugate.
pub fn gram_matrix(dom: &DomainModel, lambda: f64, points: &[Vec<C64>]) -> Result<GramMatrix> {
    for (i, p) in points.iter().enumerate() {
        if !dom.contains(p) {
            return Err(Error::OutsideDomain(format!("point {i} is not in {}", dom.spec())));
        }
    }
    let n = points.len();
    let mut matrix = DMatrix::zeros(n, n);
    let mut bad_pair = None;
    for a in 0..n {
        for b in a..n {
            let (v, re) = kernel_entry(dom, lambda, &points[a], &points[b]);
            if re <= 0.0 && bad_pair.is_none() {
                bad_pair = Some((a, b, re));
            }
            if a == b {
                matrix[(a, a)] = C64::new(v.re, 0.0);
            } else {
                matrix[(a, b)] = v;
                matrix[(b, a)] = v.conj();
            }
        }
    }
    Ok(GramMatrix { matrix, branch_ok: bad_pair.is_none(), bad_pair })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GramReport {
    pub points: Vec<Vec<[f64; 2]>>,
    pub lambda: f64,
    pub min_eigenvalue: f64,
    pub psd: bool,
    pub branch_ok: bool,
}

pub fn gram_report(dom: &DomainModel, lambda: f64, points: &[Vec<C64>], tol: f64) -> Result<GramReport> {
    let g = gram_matrix(dom, lambda, points)?;
    if let Some((alpha, beta, re)) = g.bad_pair {
        return Err(Error::Branch { alpha, beta, re });
    }
    let min = g.min_eigenvalue();
    Ok(GramReport {
        points: points.iter().map(|p| encode_point(p)).collect(),
        lambda,
        min_eigenvalue: min,
        psd: min >= -tol,
        branch_ok: true,
    })
}

pub fn encode_point(p: &[C64]) -> Vec<[f64; 2]> {
    p.iter().map(|z| [z.re, z.im]).collect()
}

pub fn decode_point(p: &[[f64; 2]]) -> Vec<C64> {
    p.iter().map(|&[re, im]| C64::new(re, im)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub radius_cap: f64,
    pub steps_per_restart: usize,
    /// Initial perturbation size, relative to `radius_cap`.
    pub step_size: f64,
    pub decay: f64,
    /// Consecutive rejected moves before the step size decays.
    pub stall_limit: usize,
    /// A restart ends once the step size falls below this.
    pub min_step: f64,
    /// A configuration is a witness when its minimum eigenvalue is below `-tol`.
    pub tol: f64,
    /// Greedily drop points from a witness while it stays negative.
    pub minimize_witness: bool,
    /// Restarts evaluated together before checking for a witness.
    pub batch: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            radius_cap: DEFAULT_RADIUS_CAP,
            steps_per_restart: 400,
            step_size: 0.1,
            decay: 0.5,
            stall_limit: 10,
            min_step: 1e-3,
            tol: DEFAULT_WITNESS_TOL,
            minimize_witness: true,
            batch: 32,
        }
    }
}

/// A point configuration with an indefinite Gram matrix. Serialized as the
/// replayable witness file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub domain: String,
    pub lambda: f64,
    pub points: Vec<Vec<[f64; 2]>>,
    pub min_eig: f64,
    pub seed: u64,
}

impl Witness {
    pub fn decoded_points(&self) -> Vec<Vec<C64>> {
        self.points.iter().map(|p| decode_point(p)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub witness: Option<Witness>,
    /// Index of the restart that produced the witness.
    pub restart: Option<usize>,
    pub restarts_run: usize,
    pub evaluations: usize,
    pub best_min_eig: f64,
}

struct RestartResult {
    points: Vec<Vec<C64>>,
    min_eig: f64,
    evaluations: usize,
}

fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

fn run_restart(dom: &DomainModel, lambda: f64, n_points: usize, seed: u64, restart: usize, opts: &SearchOptions) -> Result<RestartResult> {
    let mut rng = restart_rng(seed, restart);
    let cap = opts.radius_cap;
    let mut evaluations = 0;

    // initial configuration; resample if the branch check fails
    let (mut points, mut gram) = loop {
        let pts = (0..n_points).map(|_| dom.sample_with(&mut rng, cap)).collect::<Result<Vec<_>>>()?;
        let g = gram_matrix(dom, lambda, &pts)?;
        evaluations += 1;
        if g.branch_ok {
            break (pts, g.matrix);
        }
        if evaluations > 100 {
            let (alpha, beta, re) = g.bad_pair.expect("branch failure has a pair");
            return Err(Error::Branch { alpha, beta, re });
        }
    };
    let mut f = min_eigenvalue(&gram);
    let mut step = opts.step_size;
    let mut stall = 0;

    for _ in 0..opts.steps_per_restart {
        if f < -opts.tol || step < opts.min_step {
            break;
        }
        let a = rng.random_range(0..n_points);
        let candidate: Vec<C64> = points[a]
            .iter()
            .map(|z| {
                let xi = C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
                z + xi * (step * cap)
            })
            .collect();

        let mut improved = false;
        if dom.spectral_norm(&candidate) < cap {
            let mut trial = gram.clone();
            let mut branch_ok = true;
            for b in 0..n_points {
                let other = if b == a { &candidate } else { &points[b] };
                let (v, re) = kernel_entry(dom, lambda, &candidate, other);
                branch_ok &= re > 0.0;
                if b == a {
                    trial[(a, a)] = C64::new(v.re, 0.0);
                } else {
                    trial[(a, b)] = v;
                    trial[(b, a)] = v.conj();
                }
            }
            evaluations += 1;
            if branch_ok {
                let ft = min_eigenvalue(&trial);
                if ft < f {
                    f = ft;
                    gram = trial;
                    points[a] = candidate;
                    improved = true;
                }
            }
        }
        if improved {
            stall = 0;
        } else {
            stall += 1;
            if stall >= opts.stall_limit {
                step *= opts.decay;
                stall = 0;
            }
        }
    }
    Ok(RestartResult { points, min_eig: f, evaluations })
}

// Drops points one at a time (last first) while the Gram matrix stays negative.
fn shrink_witness(dom: &DomainModel, lambda: f64, mut points: Vec<Vec<C64>>, tol: f64) -> Result<(Vec<Vec<C64>>, f64)> {
    let mut min = gram_matrix(dom, lambda, &points)?.min_eigenvalue();
    loop {
        let mut removed = false;
        for i in (0..points.len()).rev() {
            if points.len() <= 2 {
                break;
            }
            let mut fewer = points.clone();
            fewer.remove(i);
            let g = gram_matrix(dom, lambda, &fewer)?;
            let m = g.min_eigenvalue();
            if g.branch_ok && m < -tol {
                points = fewer;
                min = m;
                removed = true;
                break;
            }
        }
        if !removed {
            return Ok((points, min));
        }
    }
}

/// Searches up to `budget` random restarts for a configuration of
/// `n_points` points whose Gram matrix has minimum eigenvalue below
/// `-opts.tol`. Restart `i` draws from its own ChaCha stream of `seed`, and
/// the witness reported is the one with the lowest restart index, so the
/// outcome does not depend on the thread count.
pub fn search_violation(
    dom: &DomainModel,
    lambda: f64,
    n_points: usize,
    budget: usize,
    seed: u64,
    opts: &SearchOptions,
) -> Result<SearchOutcome> {
    if n_points < 2 {
        return Err(Error::Precondition(format!("need at least 2 points, got {n_points}")));
    }
    if budget == 0 {
        return Err(Error::Precondition("budget must be at least 1".into()));
    }
    let batch = opts.batch.max(1);
    let mut evaluations = 0;
    let mut best = f64::INFINITY;
    let mut start = 0;
    while start < budget {
        let end = (start + batch).min(budget);
        let results = par::map_range(start..end, |r| run_restart(dom, lambda, n_points, seed, r, opts));
        for (offset, res) in results.into_iter().enumerate() {
            let res = res?;
            evaluations += res.evaluations;
            best = best.min(res.min_eig);
            if res.min_eig < -opts.tol {
                let (points, min_eig) = if opts.minimize_witness {
                    shrink_witness(dom, lambda, res.points, opts.tol)?
                } else {
                    (res.points, res.min_eig)
                };
                let witness = Witness {
                    domain: dom.spec(),
                    lambda,
                    points: points.iter().map(|p| encode_point(p)).collect(),
                    min_eig,
                    seed,
                };
                return Ok(SearchOutcome {
                    witness: Some(witness),
                    restart: Some(start + offset),
                    restarts_run: start + offset + 1,
                    evaluations,
                    best_min_eig: best,
                });
            }
        }
        start = end;
    }
    Ok(SearchOutcome { witness: None, restart: None, restarts_run: budget, evaluations, best_min_eig: best })
}

/// Recomputes the minimum Gram eigenvalue of an archived witness.
pub fn replay(witness: &Witness) -> Result<f64> {
    let dom: DomainModel = witness.domain.parse()?;
    let g = gram_matrix(&dom, witness.lambda, &witness.decoded_points())?;
    if let Some((alpha, beta, re)) = g.bad_pair {
        return Err(Error::Branch { alpha, beta, re });
    }
    Ok(g.min_eigenvalue())
}
