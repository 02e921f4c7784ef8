//! Truncated Calabi matrices of `e^{cD} − 1 = N^{−λ} − 1` and their
//! positive semidefiniteness verdicts.
//!
//! The coefficient matrix of a circular kernel only couples monomials of
//! equal degree, so it splits into graded blocks `E_1, E_2, …`. A kernel
//! is projectively induced iff every block is PSD (of infinite total rank).
//! A negative eigenvalue in any finite block is a genuine refutation; a
//! PSD verdict at a finite cutoff is only consistency up to that cutoff.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::domain::DomainModel;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, inf_norm};
use crate::multiindex::MultiIndex;
use crate::par;
use crate::series::{shared_basis, HermitianSeries};

pub const DEFAULT_TOL_ABS: f64 = 1e-10;
pub const DEFAULT_TOL_REL: f64 = 1e-9;
/// Threshold for coefficients that must vanish structurally.
pub const STRUCTURAL_ZERO: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { abs: DEFAULT_TOL_ABS, rel: DEFAULT_TOL_REL }
    }
}

impl Tolerances {
    pub fn for_block(&self, m: &DMatrix<f64>) -> f64 {
        self.abs.max(self.rel * inf_norm(m))
    }
}

/// Expansion of `N(z, z̄)^{−λ} − 1`, which is `e^{cD} − 1` for the metric
/// `c·g_B` with `λ = cγ`.
pub fn bergman_diastasis_series(dom: &DomainModel, lambda: f64, cutoff: u32) -> Result<HermitianSeries> {
    dom.norm_defect(cutoff).inverse_power(lambda)
}

/// The diastasis normalization: no pure holomorphic or antiholomorphic
/// terms beyond the constant.
pub fn normalization_check(s: &HermitianSeries) -> bool {
    (1..s.len()).all(|j| s.coeff(j, 0).abs() <= STRUCTURAL_ZERO && s.coeff(0, j).abs() <= STRUCTURAL_ZERO)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    /// Common total degree `|m_j| = |m_k|` of the block's indices.
    pub degree: u32,
    /// Common degree in the last variable, for blocks refined by it.
    pub w_degree: Option<u32>,
    pub indices: Vec<MultiIndex>,
    pub matrix: DMatrix<f64>,
}

impl Block {
    pub fn dim(&self) -> usize {
        self.indices.len()
    }
}

#[derive(Clone, Debug)]
pub struct CalabiMatrix {
    pub label: String,
    pub lambda: Option<f64>,
    pub n_vars: usize,
    pub cutoff: u32,
    pub blocks: Vec<Block>,
    /// Largest `|b_jk|` with `|m_j| ≠ |m_k|`, before those entries were dropped.
    pub off_grade_max: f64,
    pub max_coeff: f64,
}

/// Splits a normalized series into graded blocks of degrees `1..=cutoff`.
pub fn graded_blocks(s: &HermitianSeries) -> Result<CalabiMatrix> {
    if !normalization_check(s) {
        return Err(Error::Precondition("series has pure (anti)holomorphic terms".into()));
    }
    let basis = s.basis();
    let mut off_grade_max = 0.0f64;
    for (j, k, v) in s.nonzeros() {
        if basis.get(j).degree() != basis.get(k).degree() {
            off_grade_max = off_grade_max.max(v.abs());
        }
    }
    let max_coeff = s.max_abs();
    if off_grade_max > STRUCTURAL_ZERO * max_coeff {
        return Err(Error::Structure { off_grade: off_grade_max, max_coeff });
    }
    let blocks = (1..=s.cutoff())
        .map(|degree| {
            let range = basis.degree_range(degree);
            let start = range.start;
            let dim = range.len();
            Block {
                degree,
                w_degree: None,
                indices: basis.indices()[range].to_vec(),
                matrix: DMatrix::from_fn(dim, dim, |r, c| s.coeff(start + r, start + c)),
            }
        })
        .collect();
    Ok(CalabiMatrix {
        label: String::new(),
        lambda: None,
        n_vars: s.n_vars(),
        cutoff: s.cutoff(),
        blocks,
        off_grade_max,
        max_coeff,
    })
}

impl CalabiMatrix {
    pub fn with_label(mut self, label: impl Into<String>, lambda: Option<f64>) -> Self {
        self.label = label.into();
        self.lambda = lambda;
        self
    }

    /// Splits every block further by the degree of the last variable and
    /// returns the largest entry coupling different last-variable degrees.
    pub fn refine_by_last_variable(&self) -> (CalabiMatrix, f64) {
        let mut off = 0.0f64;
        let mut blocks = Vec::new();
        for b in &self.blocks {
            let last = |m: &MultiIndex| *m.exponents().last().expect("nonempty");
            for r in 0..b.dim() {
                for c in 0..b.dim() {
                    if last(&b.indices[r]) != last(&b.indices[c]) {
                        off = off.max(b.matrix[(r, c)].abs());
                    }
                }
            }
            for wd in 0..=b.degree {
                let sel: Vec<usize> = (0..b.dim()).filter(|&i| last(&b.indices[i]) == wd).collect();
                if sel.is_empty() {
                    continue;
                }
                blocks.push(Block {
                    degree: b.degree,
                    w_degree: Some(wd),
                    indices: sel.iter().map(|&i| b.indices[i].clone()).collect(),
                    matrix: DMatrix::from_fn(sel.len(), sel.len(), |r, c| b.matrix[(sel[r], sel[c])]),
                });
            }
        }
        blocks.sort_by_key(|b| (b.degree, b.w_degree));
        let refined = CalabiMatrix { blocks, ..self.clone() };
        (refined, off)
    }

    /// Scatters the blocks back into a series (off-grade entries are zero).
    pub fn to_series(&self) -> HermitianSeries {
        let basis = shared_basis(self.n_vars, self.cutoff);
        let mut s = HermitianSeries::zero_on(basis.clone());
        for b in &self.blocks {
            let pos: Vec<usize> =
                b.indices.iter().map(|m| basis.index_of(m.exponents()).expect("index within cutoff")).collect();
            for r in 0..b.dim() {
                for c in r..b.dim() {
                    s.add_hermitian_term(pos[r], pos[c], b.matrix[(r, c)]);
                }
            }
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Certainty {
    /// Some block has a negative eigenvalue beyond tolerance.
    Refuted,
    /// Every block up to the cutoff is PSD; higher blocks are unchecked.
    ConsistentToCutoff,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockVerdict {
    pub degree: u32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub w_degree: Option<u32>,
    pub dim: usize,
    pub min_eigenvalue: f64,
    pub rank: usize,
    pub tol: f64,
    /// Unit eigenvector of the minimum eigenvalue, when it is negative.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<Vec<f64>>,
}

impl BlockVerdict {
    pub fn is_psd(&self) -> bool {
        self.min_eigenvalue >= -self.tol
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub psd: bool,
    pub certainty: Certainty,
    pub per_block: Vec<BlockVerdict>,
    pub tol_abs: f64,
    pub tol_rel: f64,
    pub cutoff: u32,
}

impl Verdict {
    /// Blocks that carry a negative eigenvalue beyond tolerance.
    pub fn negative_blocks(&self) -> impl Iterator<Item = &BlockVerdict> {
        self.per_block.iter().filter(|b| !b.is_psd())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.per_block.iter().map(|b| b.min_eigenvalue).fold(f64::INFINITY, f64::min)
    }
}

pub fn psd_verdict(m: &CalabiMatrix, tol: Tolerances) -> Result<Verdict> {
    let per_block = par::map(&m.blocks, |b| block_verdict(b, tol)).into_iter().collect::<Result<Vec<_>>>()?;
    let psd = per_block.iter().all(BlockVerdict::is_psd);
    Ok(Verdict {
        psd,
        certainty: if psd { Certainty::ConsistentToCutoff } else { Certainty::Refuted },
        per_block,
        tol_abs: tol.abs,
        tol_rel: tol.rel,
        cutoff: m.cutoff,
    })
}

fn block_verdict(b: &Block, tol: Tolerances) -> Result<BlockVerdict> {
    let eig = hermitian_eigen(&b.matrix)
        .map_err(|e| Error::Eigen(format!("degree {} block ({:?}): {e}", b.degree, b.w_degree)))?;
    let t = tol.for_block(&b.matrix);
    let min = eig.min();
    let witness = (min < -t).then(|| eig.vector(0).iter().copied().collect());
    Ok(BlockVerdict {
        degree: b.degree,
        w_degree: b.w_degree,
        dim: b.dim(),
        min_eigenvalue: min,
        rank: eig.values.iter().filter(|&&v| v > t).count(),
        tol: t,
        witness,
    })
}

/// Builds the graded Calabi matrix of `c·g_B` (`λ = cγ`) and its verdict.
pub fn calabi_verdict(dom: &DomainModel, lambda: f64, cutoff: u32, tol: Tolerances) -> Result<(CalabiMatrix, Verdict)> {
    let s = bergman_diastasis_series(dom, lambda, cutoff)?;
    let m = graded_blocks(&s)?.with_label(dom.spec(), Some(lambda));
    let v = psd_verdict(&m, tol)?;
    Ok((m, v))
}

/// One polynomial component `f(z) = Σ coeff · z^m` of a truncated immersion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub degree: u32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub w_degree: Option<u32>,
    pub terms: Vec<(Vec<u32>, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Immersion {
    pub n_vars: usize,
    pub cutoff: u32,
    /// Components `f_1, f_2, …`; the constant component `f_0 = 1` is implicit.
    pub components: Vec<Component>,
}

impl Immersion {
    /// Number of components of the given degree.
    pub fn count_at(&self, degree: u32) -> usize {
        self.components.iter().filter(|c| c.degree == degree).count()
    }

    /// Coefficients of `Σ_j f_j(z) conj(f_j(w))`, including `f_0 = 1`.
    pub fn reconstruct(&self) -> HermitianSeries {
        let basis = shared_basis(self.n_vars, self.cutoff);
        let mut s = HermitianSeries::constant(self.n_vars, self.cutoff, 1.0);
        for comp in &self.components {
            let pos: Vec<(usize, f64)> =
                comp.terms.iter().map(|(e, c)| (basis.index_of(e).expect("index within cutoff"), *c)).collect();
            for (a, &(j, cj)) in pos.iter().enumerate() {
                for &(k, ck) in &pos[a..] {
                    s.add_hermitian_term(j, k, cj * ck);
                }
            }
        }
        s
    }
}

/// Factors each block as `B = L Lᵀ` through its eigen-decomposition and
/// returns the columns of `L` as polynomials. Eigenvalues at or below the
/// block tolerance are dropped, so the component count per degree is the
/// block rank.
pub fn extract_immersion(m: &CalabiMatrix, tol: Tolerances) -> Result<Immersion> {
    let per_block = par::map(&m.blocks, |b| -> Result<Vec<Component>> {
        let eig = hermitian_eigen(&b.matrix)?;
        let t = tol.for_block(&b.matrix);
        if eig.min() < -t {
            return Err(Error::NotPsd(format!(
                "degree {} block has eigenvalue {:e} below -{t:e}",
                b.degree,
                eig.min()
            )));
        }
        Ok(eig
            .values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > t)
            .map(|(i, &v)| {
                let scale = v.sqrt();
                let terms = b
                    .indices
                    .iter()
                    .zip(eig.vectors.column(i).iter())
                    .filter(|(_, &u)| u != 0.0)
                    .map(|(idx, &u)| (idx.exponents().to_vec(), scale * u))
                    .collect();
                Component { degree: b.degree, w_degree: b.w_degree, terms }
            })
            .collect())
    });
    let mut components = Vec::new();
    for r in per_block {
        components.extend(r?);
    }
    Ok(Immersion { n_vars: m.n_vars, cutoff: m.cutoff, components })
}

/// Largest coefficient error of the reconstructed kernel against `1 + series`.
pub fn reconstruction_residual(imm: &Immersion, series: &HermitianSeries) -> Result<f64> {
    let diff = imm.reconstruct().sub(&series.plus_constant(1.0))?;
    Ok(diff.max_abs())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub lambda: f64,
    pub degree: u32,
    pub block_dim: usize,
    pub min_eig: f64,
    pub psd: bool,
}

/// Grid `from, from+step, …, ≤ to`, each value rounded to 12 decimals so
/// that e.g. `1.0` is hit exactly.
pub fn lambda_grid(from: f64, to: f64, step: f64) -> Vec<f64> {
    assert!(step > 0.0, "step must be positive");
    let n = ((to - from) / step + 1e-9).floor() as i64;
    (0..=n.max(-1))
        .map(|i| ((from + i as f64 * step) * 1e12).round() / 1e12)
        .collect()
}

/// Per-block minimum eigenvalue at every grid value, one row per `(λ, degree)`.
pub fn scan(dom: &DomainModel, lambdas: &[f64], cutoff: u32, tol: Tolerances) -> Result<Vec<ScanRow>> {
    let per_lambda = par::map(lambdas, |&lambda| -> Result<Vec<ScanRow>> {
        let (_, v) = calabi_verdict(dom, lambda, cutoff, tol)?;
        Ok(v.per_block
            .iter()
            .map(|b| ScanRow {
                lambda,
                degree: b.degree,
                block_dim: b.dim,
                min_eig: b.min_eigenvalue,
                psd: b.is_psd(),
            })
            .collect())
    });
    let mut rows = Vec::new();
    for r in per_lambda {
        rows.extend(r?);
    }
    Ok(rows)
}

/// Whether all blocks at a given λ are PSD, from scan rows.
pub fn scan_verdicts(rows: &[ScanRow]) -> Vec<(f64, bool)> {
    let mut out: Vec<(f64, bool)> = Vec::new();
    for r in rows {
        match out.last_mut() {
            Some((l, ok)) if *l == r.lambda => *ok &= r.psd,
            _ => out.push((r.lambda, r.psd)),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dom(s: &str) -> DomainModel {
        s.parse().unwrap()
    }

    #[test]
    fn disk_geometric_series() {
        let s = bergman_diastasis_series(&dom("CH:1"), 1.0, 5).unwrap();
        for k in 1..=5 {
            assert!((s.coeff(k, k) - 1.0).abs() < 1e-14);
        }
        assert!(normalization_check(&s));
        let m = graded_blocks(&s).unwrap();
        assert_eq!(m.blocks.len(), 5);
        for b in &m.blocks {
            assert_eq!(b.matrix.shape(), (1, 1));
            assert!((b.matrix[(0, 0)] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_lambda_is_zero_series() {
        let s = bergman_diastasis_series(&dom("I:2,2"), 0.0, 3).unwrap();
        assert_eq!(s.max_abs(), 0.0);
    }

    #[test]
    fn normalization_counterexample() {
        // z + z̄ + z z̄
        let s = HermitianSeries::from_terms(1, 2, [
            (&[1u32][..], &[0u32][..], 1.0),
            (&[0][..], &[1][..], 1.0),
            (&[1][..], &[1][..], 1.0),
        ])
        .unwrap();
        assert!(!normalization_check(&s));
        assert!(graded_blocks(&s).is_err());
    }

    #[test]
    fn off_grade_input_is_structural_error() {
        // z² z̄ + z z̄²: circularly non-invariant
        let s = HermitianSeries::from_terms(1, 2, [
            (&[2u32][..], &[1u32][..], 1.0),
            (&[1][..], &[2][..], 1.0),
            (&[1][..], &[1][..], 1.0),
        ])
        .unwrap();
        assert!(matches!(graded_blocks(&s), Err(Error::Structure { .. })));
    }

    #[test]
    fn type_i_first_block_is_lambda_identity() {
        let lambda = 0.7;
        let (m, _) = calabi_verdict(&dom("I:2,2"), lambda, 2, Tolerances::default()).unwrap();
        let b1 = &m.blocks[0].matrix;
        assert!((b1 - DMatrix::<f64>::identity(4, 4) * lambda).abs().max() < 1e-15);
        assert_eq!(m.blocks[1].dim(), 10);
    }

    #[test]
    fn type_i_half_is_refuted_in_degree_two() {
        let (_, v) = calabi_verdict(&dom("I:2,2"), 0.5, 2, Tolerances::default()).unwrap();
        assert!(!v.psd);
        assert_eq!(v.certainty, Certainty::Refuted);
        let neg: Vec<_> = v.negative_blocks().collect();
        assert_eq!(neg.len(), 1);
        assert_eq!(neg[0].degree, 2);
        assert!(neg[0].witness.is_some());
    }

    #[test]
    fn type_i_one_is_rank_deficient() {
        let (_, v) = calabi_verdict(&dom("I:2,2"), 1.0, 3, Tolerances::default()).unwrap();
        assert!(v.psd);
        assert_eq!(v.certainty, Certainty::ConsistentToCutoff);
        assert_eq!(v.per_block[1].dim, 10);
        assert_eq!(v.per_block[1].rank, 9);
    }

    #[test]
    fn twice_genus_is_psd_everywhere() {
        for s in ["CH:1", "CH:3", "I:2,2", "I:2,3", "III:2", "IV:3", "IV:5"] {
            let d = dom(s);
            let (_, v) = calabi_verdict(&d, 2.0 * d.genus(), 3, Tolerances::default()).unwrap();
            assert!(v.psd, "{s}");
        }
    }

    #[test]
    fn negative_lambda_fails_in_degree_one() {
        let (_, v) = calabi_verdict(&dom("CH:2"), -0.3, 2, Tolerances::default()).unwrap();
        assert!(!v.psd);
        assert_eq!(v.negative_blocks().next().unwrap().degree, 1);
    }

    #[test]
    fn disk_immersion_components_are_monomials() {
        let s = bergman_diastasis_series(&dom("CH:1"), 1.0, 4).unwrap();
        let m = graded_blocks(&s).unwrap();
        let imm = extract_immersion(&m, Tolerances::default()).unwrap();
        assert_eq!(imm.components.len(), 4);
        for (k, c) in imm.components.iter().enumerate() {
            assert_eq!(c.terms.len(), 1);
            assert_eq!(c.terms[0].0, vec![k as u32 + 1]);
            assert!((c.terms[0].1.abs() - 1.0).abs() < 1e-14);
        }
        assert!(reconstruction_residual(&imm, &s).unwrap() < 1e-14);
    }

    #[test]
    fn immersion_rejects_non_psd() {
        let (m, _) = calabi_verdict(&dom("I:2,2"), 0.5, 2, Tolerances::default()).unwrap();
        assert!(matches!(extract_immersion(&m, Tolerances::default()), Err(Error::NotPsd(_))));
    }

    #[test]
    fn grid_hits_round_values() {
        let g = lambda_grid(0.1, 3.0, 0.1);
        assert_eq!(g.len(), 30);
        assert_eq!(g[9], 1.0);
        assert_eq!(g[29], 3.0);
        assert_eq!(lambda_grid(1.0, 1.0, 0.5), vec![1.0]);
    }

    #[test]
    fn refine_splits_by_last_variable() {
        let s = bergman_diastasis_series(&dom("CH:2"), 1.0, 2).unwrap();
        let (m, off) = graded_blocks(&s).unwrap().refine_by_last_variable();
        // the ball kernel is radial in z2, so nothing couples different z2-degrees
        assert_eq!(off, 0.0);
        let dims: Vec<_> = m.blocks.iter().map(|b| (b.degree, b.w_degree, b.dim())).collect();
        assert_eq!(dims, vec![(1, Some(0), 1), (1, Some(1), 1), (2, Some(0), 1), (2, Some(1), 1), (2, Some(2), 1)]);
        let back = m.to_series();
        assert!(back.sub(&s).unwrap().max_abs() < 1e-15);
    }
}
