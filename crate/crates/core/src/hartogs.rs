//! Cartan–Hartogs domains `M_Ω(μ) = {(z, w) ∈ Ω × C : |w|² < N(z, z̄)^μ}`
//! with Kähler potential `D = −log(N^μ − |w|²)`.
//!
//! Expanding in `w`,
//!
//! ```text
//! (N^μ − |w|²)^{−c} = Σ_m C(c+m−1, m) |w|^{2m} N^{−μ(c+m)},
//! ```
//!
//! so the Calabi matrix of `c·g(μ)` splits by the degree of `w` into scaled
//! copies of base-domain matrices. [`ch_block_assembly`] builds it that way,
//! [`ch_direct_series`] expands in all `d + 1` variables at once.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::calabi::{bergman_diastasis_series, graded_blocks, Block, CalabiMatrix};
use crate::domain::{DomainModel, WALLACH_SNAP, C64};
use crate::error::{Error, Result};
use crate::linalg::hermitian_eigen;
use crate::multiindex::MultiIndex;
use crate::par;
use crate::series::{rising_binomial, shared_basis, HermitianSeries};

#[derive(Clone, Debug)]
pub struct CHDomain {
    pub base: DomainModel,
    pub mu: f64,
}

/// `μ₀ = γ/(d+1)`, the exponent for which `g(μ)` is Kähler–Einstein.
pub fn mu_einstein(base: &DomainModel) -> f64 {
    base.genus() / (base.dim() as f64 + 1.0)
}

/// `(r−1)(d+1)a/(2γ)`: `c·g(μ₀)` is projectively induced for every `c` at or
/// above this value.
pub fn thm1_threshold(base: &DomainModel) -> f64 {
    (base.rank() as f64 - 1.0) * (base.dim() as f64 + 1.0) * base.a() / (2.0 * base.genus())
}

impl CHDomain {
    pub fn new(base: DomainModel, mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidDomain(format!("mu must be positive, got {mu}")));
        }
        Ok(Self { base, mu })
    }

    pub fn einstein(base: DomainModel) -> Self {
        let mu = mu_einstein(&base);
        Self { base, mu }
    }

    /// Complex dimension `d + 1`.
    pub fn dim(&self) -> usize {
        self.base.dim() + 1
    }

    pub fn is_einstein(&self) -> bool {
        (self.mu - mu_einstein(&self.base)).abs() <= WALLACH_SNAP
    }

    /// `N(z, z̄)^μ − |w|²` when `(z, w)` lies in the domain.
    fn defect(&self, z: &[C64], w: C64) -> Option<f64> {
        if !self.base.contains(z) {
            return None;
        }
        let n = self.base.generic_norm_eval(z, z).re;
        let v = n.powf(self.mu) - w.norm_sqr();
        (v > 0.0).then_some(v)
    }

    pub fn contains(&self, z: &[C64], w: C64) -> bool {
        self.defect(z, w).is_some()
    }

    /// Splits a point of `C^{d+1}` as `(z, w)`.
    pub fn contains_point(&self, p: &[C64]) -> bool {
        p.len() == self.dim() && self.contains(&p[..p.len() - 1], p[p.len() - 1])
    }

    /// `z` from the base sampler with spectral radius below `cap`, then `w`
    /// uniform in angle with `|w| < cap · N(z,z̄)^{μ/2}`.
    pub fn sample(&self, seed: u64, cap: f64) -> Result<Vec<C64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut z = self.base.sample_with(&mut rng, cap)?;
        let n = self.base.generic_norm_eval(&z, &z).re;
        let r = cap * rng.random::<f64>() * n.powf(self.mu / 2.0);
        let theta = std::f64::consts::TAU * rng.random::<f64>();
        z.push(C64::from_polar(r, theta));
        Ok(z)
    }
}

impl fmt::Display for CHDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CHD({};mu={})", self.base.spec(), self.mu)
    }
}

impl FromStr for CHDomain {
    type Err = Error;

    /// `CHD(<base>;mu=<real|einstein>)`.
    fn from_str(s: &str) -> Result<Self> {
        let err = |reason: &str| Error::Parse { spec: s.to_string(), reason: reason.to_string() };
        let inner = s
            .trim()
            .strip_prefix("CHD(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| err("expected CHD(<base>;mu=<value>)"))?;
        let (base, mu) = inner.split_once(';').ok_or_else(|| err("missing ';mu='"))?;
        let base: DomainModel = base.trim().parse()?;
        let mu = mu.trim().strip_prefix("mu=").ok_or_else(|| err("missing mu="))?.trim();
        if mu == "einstein" {
            return Ok(Self::einstein(base));
        }
        let mu: f64 = mu.parse().map_err(|_| err("mu is not a number"))?;
        Self::new(base, mu)
    }
}

/// `D(z, w) = −log(N(z, z̄)^μ − |w|²)`.
pub fn ch_potential_eval(ch: &CHDomain, z: &[C64], w: C64) -> Result<f64> {
    ch.defect(z, w)
        .map(|v| -v.ln())
        .ok_or_else(|| Error::OutsideDomain(format!("({z:?}, {w}) is not in {ch}")))
}

fn check_c(c: f64, cutoff: u32) -> Result<()> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Precondition(format!("c must be positive, got {c}")));
    }
    if cutoff < 1 {
        return Err(Error::Precondition("cutoff must be at least 1".into()));
    }
    Ok(())
}

/// Expansion of `(N^μ − |w|²)^{−c} − 1` in the variables `(z_1, …, z_d, w)`.
pub fn ch_direct_series(ch: &CHDomain, c: f64, cutoff: u32) -> Result<HermitianSeries> {
    check_c(c, cutoff)?;
    let n = ch.dim();
    let basis = shared_basis(n, cutoff);
    // N^μ − 1 = (1 − Q)^{μ} − 1
    let n_mu_minus_one = ch.base.norm_defect(cutoff).inverse_power(-ch.mu)?.reindex(basis.clone())?;
    // N^μ − |w|² = 1 − Q'
    let mut q = n_mu_minus_one.scaled(-1.0);
    let w = basis.index_of(MultiIndex::unit(n, n - 1).exponents()).expect("degree one index");
    q.add_hermitian_term(w, w, 1.0);
    q.inverse_power(c)
}

/// Calabi matrix of `c·g(μ)` assembled from base-domain expansions, one
/// block per (total degree, `w`-degree).
pub fn ch_block_assembly(ch: &CHDomain, c: f64, cutoff: u32) -> Result<CalabiMatrix> {
    check_c(c, cutoff)?;
    let n = ch.dim();
    let extend = |m: &MultiIndex, wd: u32| {
        let mut e = m.exponents().to_vec();
        e.push(wd);
        MultiIndex::new(e)
    };

    let parts = par::map_range(0..cutoff as usize + 1, |m| -> Result<(Vec<Block>, f64)> {
        let m = m as u32;
        let prefactor = rising_binomial(c, m);
        let lambda = ch.mu * (c + f64::from(m));
        let base_cutoff = cutoff - m;
        let mut blocks = Vec::new();
        if m > 0 {
            // the constant of N^{−μ(c+m)} = 1 + (N^{−μ(c+m)} − 1)
            blocks.push(Block {
                degree: m,
                w_degree: Some(m),
                indices: vec![extend(&MultiIndex::zero(n - 1), m)],
                matrix: DMatrix::from_element(1, 1, prefactor),
            });
        }
        if base_cutoff == 0 {
            return Ok((blocks, 0.0));
        }
        let base = graded_blocks(&bergman_diastasis_series(&ch.base, lambda, base_cutoff)?)?;
        for b in base.blocks {
            blocks.push(Block {
                degree: b.degree + m,
                w_degree: Some(m),
                indices: b.indices.iter().map(|i| extend(i, m)).collect(),
                matrix: b.matrix * prefactor,
            });
        }
        Ok((blocks, base.off_grade_max * prefactor))
    });

    let mut blocks = Vec::new();
    let mut off_grade_max = 0.0f64;
    for part in parts {
        let (b, off) = part?;
        blocks.extend(b);
        off_grade_max = off_grade_max.max(off);
    }
    blocks.sort_by_key(|b| (b.degree, b.w_degree));
    let max_coeff = blocks.iter().flat_map(|b| b.matrix.iter()).fold(0.0f64, |a, v| a.max(v.abs()));
    Ok(CalabiMatrix {
        label: format!("{ch} c={c}"),
        lambda: None,
        n_vars: n,
        cutoff,
        blocks,
        off_grade_max,
        max_coeff,
    })
}

/// Both constructions side by side.
#[derive(Clone, Debug)]
pub struct CrossPath {
    pub direct: CalabiMatrix,
    pub assembled: CalabiMatrix,
    /// Largest entry of the direct series coupling different `w`-degrees.
    pub w_off_max: f64,
    /// Largest `|a − b| / max(|a|, |b|, 1)` over all block entries.
    pub discrepancy: f64,
}

pub fn ch_cross_path(ch: &CHDomain, c: f64, cutoff: u32) -> Result<CrossPath> {
    let direct = graded_blocks(&ch_direct_series(ch, c, cutoff)?)?;
    let (direct, w_off_max) = direct.refine_by_last_variable();
    let assembled = ch_block_assembly(ch, c, cutoff)?;
    // blocks from the direct path may be missing where the assembly has none
    let mut discrepancy = 0.0f64;
    let mut seen = 0;
    for a in &assembled.blocks {
        let Some(d) = direct.blocks.iter().find(|d| d.degree == a.degree && d.w_degree == a.w_degree) else {
            return Err(Error::ShapeMismatch(format!("direct path has no block ({}, {:?})", a.degree, a.w_degree)));
        };
        if d.indices != a.indices {
            return Err(Error::ShapeMismatch(format!("index sets differ in block ({}, {:?})", a.degree, a.w_degree)));
        }
        for (x, y) in d.matrix.iter().zip(a.matrix.iter()) {
            discrepancy = discrepancy.max((x - y).abs() / x.abs().max(y.abs()).max(1.0));
        }
        seen += 1;
    }
    if seen != direct.blocks.len() {
        return Err(Error::ShapeMismatch("direct path has blocks the assembly lacks".into()));
    }
    Ok(CrossPath { direct, assembled: assembled.with_label(format!("{ch} c={c}"), None), w_off_max, discrepancy })
}

/// The Wallach parameters `(c+m)μ` the closed form inspects, with their
/// membership in `W ∖ {0}`. Stops at the first `m` past the discrete part.
pub fn ch_reduction(ch: &CHDomain, c: f64) -> Vec<(u32, f64, bool)> {
    let w = ch.base.wallach_set();
    let mut out = Vec::new();
    for m in 0u32.. {
        let lambda = (c + f64::from(m)) * ch.mu;
        let member = lambda > WALLACH_SNAP && w.contains(lambda);
        out.push((m, lambda, member));
        if lambda > w.continuous_from + WALLACH_SNAP {
            break;
        }
    }
    out
}

/// `c·g(μ)` is projectively induced iff `(c+m)μ ∈ W ∖ {0}` for all `m ≥ 0`.
pub fn ch_projectively_induced(ch: &CHDomain, c: f64) -> bool {
    c > 0.0 && ch_reduction(ch, c).iter().all(|&(_, _, member)| member)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EinsteinProbe {
    pub k_estimate: f64,
    pub residual: f64,
    /// Condition number of the metric at the probe point.
    pub condition: f64,
}

/// Steps of the nested finite differences. Both levels use fourth-order
/// central stencils.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FdSteps {
    /// Step for the metric `∂∂̄D`.
    pub inner: f64,
    /// Step for `∂∂̄ log det g`.
    pub outer: f64,
}

impl FdSteps {
    pub fn from_step(step: f64) -> Self {
        Self { inner: step, outer: 7.0 * step }
    }
}

impl Default for FdSteps {
    fn default() -> Self {
        Self::from_step(1e-3)
    }
}

const MAX_CONDITION: f64 = 1e8;

fn to_complex(x: &[f64]) -> Vec<C64> {
    x.chunks(2).map(|p| C64::new(p[0], p[1])).collect()
}

// Real Hessian of f at x by fourth-order central differences.
fn real_hessian<F>(f: &F, x: &[f64], h: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let n = x.len();
    let at = |shifts: &[(usize, f64)]| {
        let mut y = x.to_vec();
        for &(i, s) in shifts {
            y[i] += s;
        }
        f(&y)
    };
    let f0 = f(x)?;
    let mut hess = DMatrix::zeros(n, n);
    for i in 0..n {
        let v = -at(&[(i, 2.0 * h)])? + 16.0 * at(&[(i, h)])? - 30.0 * f0 + 16.0 * at(&[(i, -h)])?
            - at(&[(i, -2.0 * h)])?;
        hess[(i, i)] = v / (12.0 * h * h);
        for j in 0..i {
            let cross = |s: f64| -> Result<f64> {
                Ok(at(&[(i, s), (j, s)])? + at(&[(i, -s), (j, -s)])? - at(&[(i, s), (j, -s)])? - at(&[(i, -s), (j, s)])?)
            };
            let v = (16.0 * cross(h)? - cross(2.0 * h)?) / (48.0 * h * h);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    Ok(hess)
}

// ∂²/∂ζ_α∂ζ̄_β from the real Hessian in coordinates (x_1, y_1, x_2, y_2, …).
fn complex_hessian(h: &DMatrix<f64>) -> DMatrix<C64> {
    let n = h.nrows() / 2;
    DMatrix::from_fn(n, n, |a, b| {
        let (xa, ya, xb, yb) = (2 * a, 2 * a + 1, 2 * b, 2 * b + 1);
        C64::new(h[(xa, xb)] + h[(ya, yb)], h[(xa, yb)] - h[(ya, xb)]) * 0.25
    })
}

/// Metric `g_{αβ̄} = ∂²D/∂ζ_α∂ζ̄_β` at a point of `C^{d+1}`.
pub fn ch_metric(ch: &CHDomain, point: &[C64], step: f64) -> Result<DMatrix<C64>> {
    let x: Vec<f64> = point.iter().flat_map(|z| [z.re, z.im]).collect();
    let d = ch.dim() - 1;
    let potential = |y: &[f64]| {
        let p = to_complex(y);
        ch_potential_eval(ch, &p[..d], p[d])
    };
    Ok(complex_hessian(&real_hessian(&potential, &x, step)?))
}

/// Estimates the Einstein constant `k` in `Ric = k·g` with
/// `Ric = −∂∂̄ log det g`, and the entrywise residual `max |Ric − k g|`.
pub fn einstein_residual(ch: &CHDomain, point: &[C64], steps: FdSteps) -> Result<EinsteinProbe> {
    if !(steps.inner > 0.0 && steps.outer > 0.0) {
        return Err(Error::Precondition("finite-difference steps must be positive".into()));
    }
    if !ch.contains_point(point) {
        return Err(Error::OutsideDomain(format!("{point:?} is not in {ch}")));
    }
    let g = ch_metric(ch, point, steps.inner)?;
    let eig = hermitian_eigen(&g)?;
    let (lo, hi) = (eig.values[0], eig.values[eig.values.len() - 1]);
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if condition > MAX_CONDITION {
        return Err(Error::IllConditioned(condition));
    }

    let x: Vec<f64> = point.iter().flat_map(|z| [z.re, z.im]).collect();
    let log_det = |y: &[f64]| -> Result<f64> {
        let gy = ch_metric(ch, &to_complex(y), steps.inner)?;
        let det = gy.determinant().re;
        if det > 0.0 {
            Ok(det.ln())
        } else {
            Err(Error::IllConditioned(f64::INFINITY))
        }
    };
    let ric = -complex_hessian(&real_hessian(&log_det, &x, steps.outer)?);

    let g_inv = g.clone().try_inverse().ok_or(Error::IllConditioned(f64::INFINITY))?;
    let k = (&ric * g_inv).trace().re / ch.dim() as f64;
    let residual = (&ric - &g * C64::new(k, 0.0)).iter().fold(0.0f64, |a, v| a.max(v.norm()));
    Ok(EinsteinProbe { k_estimate: k, residual, condition })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ch(s: &str) -> CHDomain {
        s.parse().unwrap()
    }

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn einstein_exponents() {
        assert_eq!(ch("CHD(CH:3;mu=einstein)").mu, 1.0);
        assert!((ch("CHD(I:2,2;mu=einstein)").mu - 0.8).abs() < 1e-15);
        assert!((ch("CHD(IV:5;mu=einstein)").mu - 5.0 / 6.0).abs() < 1e-15);
        assert_eq!(ch("CHD(I:2,3;mu=0.5)").mu, 0.5);
    }

    #[test]
    fn parse_errors() {
        for bad in ["CHD(I:2,2)", "CH(I:2,2;mu=1)", "CHD(I:2,2;mu=-1)", "CHD(I:2,2;mu=x)", "CHD(X:2;mu=1)"] {
            assert!(bad.parse::<CHDomain>().is_err(), "{bad}");
        }
    }

    #[test]
    fn display_round_trip() {
        let d = ch("CHD(IV:5;mu=0.75)");
        let e: CHDomain = d.to_string().parse().unwrap();
        assert_eq!(e.base.spec(), "IV:5");
        assert_eq!(e.mu, 0.75);
    }

    #[test]
    fn thresholds() {
        assert!((thm1_threshold(&"I:2,2".parse().unwrap()) - 1.25).abs() < 1e-15);
        assert!((thm1_threshold(&"IV:5".parse().unwrap()) - 1.8).abs() < 1e-15);
        assert_eq!(thm1_threshold(&"CH:4".parse().unwrap()), 0.0);
        assert_eq!(thm1_threshold(&"I:1,3".parse().unwrap()), 0.0);
    }

    #[test]
    fn potential_values() {
        let d = ch("CHD(CH:1;mu=1)");
        assert_eq!(ch_potential_eval(&d, &[r(0.0)], r(0.0)).unwrap(), 0.0);
        let v = ch_potential_eval(&d, &[r(0.5)], r(0.5)).unwrap();
        assert!((v - 2f64.ln()).abs() < 1e-15);
        assert!(ch_potential_eval(&d, &[r(0.5)], r(0.9)).is_err());
        assert!(ch_potential_eval(&d, &[r(1.1)], r(0.0)).is_err());
    }

    #[test]
    fn potential_radial_in_w() {
        let d = ch("CHD(I:2,2;mu=einstein)");
        let z = d.base.sample(2, 0.6).unwrap();
        let w = C64::new(0.2, 0.1);
        let a = ch_potential_eval(&d, &z, w).unwrap();
        for t in [0.3, 1.7, 4.0] {
            let b = ch_potential_eval(&d, &z, w * C64::from_polar(1.0, t)).unwrap();
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn samples_are_inside() {
        let d = ch("CHD(I:2,2;mu=einstein)");
        for s in 0..50 {
            assert!(d.contains_point(&d.sample(s, 0.7).unwrap()));
        }
    }

    #[test]
    fn direct_series_coefficients() {
        let d = ch("CHD(I:2,2;mu=0.8)");
        let c = 1.7;
        let s = ch_direct_series(&d, c, 4).unwrap();
        for k in 1..=4u32 {
            let e = [0, 0, 0, 0, k];
            assert!((s.coeff_of(&e, &e) - rising_binomial(c, k)).abs() < 1e-12);
        }
        assert!((s.coeff_of(&[0, 0, 0, 0, 1], &[0, 0, 0, 0, 1]) - c).abs() < 1e-15);
    }

    #[test]
    fn ball_over_disk_is_ball() {
        // base CH(1), μ = 1 gives the ball in C²: (1 − |z|² − |w|²)^{−1}
        let d = ch("CHD(CH:1;mu=1)");
        let s = ch_direct_series(&d, 1.0, 4).unwrap();
        let b = crate::calabi::bergman_diastasis_series(&"CH:2".parse().unwrap(), 1.0, 4).unwrap();
        assert!(s.sub(&b).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn prefactor() {
        assert!((rising_binomial(3.0, 2) - 6.0).abs() < 1e-15);
    }

    #[test]
    fn paths_agree_on_disk_base() {
        let x = ch_cross_path(&ch("CHD(CH:1;mu=1)"), 1.5, 3).unwrap();
        assert!(x.discrepancy < 1e-10, "{}", x.discrepancy);
        assert!(x.w_off_max < 1e-13);
    }

    #[test]
    fn closed_form_examples() {
        let d = ch("CHD(I:2,2;mu=einstein)");
        assert!(ch_projectively_induced(&d, 1.25));
        assert!(!ch_projectively_induced(&d, 1.0));
        for k in 1..=5 {
            assert!(!ch_projectively_induced(&d, 1.25 - 0.05 * f64::from(k)));
        }
        assert!(ch_projectively_induced(&d, 2.0));
        let ball = ch("CHD(CH:2;mu=1)");
        for c in [0.01, 0.5, 3.3] {
            assert!(ch_projectively_induced(&ball, c));
        }
        assert!(!ch_projectively_induced(&ball, 0.0));
    }

    #[test]
    fn metric_at_origin() {
        // at the origin of CH² the potential −log(1 − |ζ|²) has g = I
        let d = ch("CHD(CH:1;mu=1)");
        let g = ch_metric(&d, &[r(0.0), r(0.0)], 1e-3).unwrap();
        assert!((g - DMatrix::identity(2, 2)).iter().all(|v| v.norm() < 1e-8));
    }

    #[test]
    fn einstein_on_complex_ball() {
        let d = ch("CHD(CH:1;mu=1)");
        let p = vec![C64::new(0.2, -0.1), C64::new(0.05, 0.3)];
        let e = einstein_residual(&d, &p, FdSteps::default()).unwrap();
        assert!((e.k_estimate + 3.0).abs() < 1e-5, "{e:?}");
        assert!(e.residual < 1e-5, "{e:?}");
    }

    #[test]
    fn einstein_rejects_outside() {
        let d = ch("CHD(CH:1;mu=1)");
        assert!(einstein_residual(&d, &[r(0.9), r(0.5)], FdSteps::default()).is_err());
        // stencil leaves the domain
        assert!(einstein_residual(&d, &[r(0.999), r(0.0)], FdSteps::default()).is_err());
    }
}
