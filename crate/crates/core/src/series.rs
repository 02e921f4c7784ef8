//! Truncated expansions `Σ b_jk z^{m_j} z̄^{m_k}` of real-analytic kernels
//! around the origin.
//!
//! Coefficients live in a dense `len × len` matrix over a shared [`Basis`];
//! row `j` is the holomorphic index and column `k` the antiholomorphic one.
//! A term is retained iff both of its degrees are at most the cutoff.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::multiindex::{Basis, MultiIndex};

/// Shared basis for `(n_vars, cutoff)`; bases are built once per process.
pub fn shared_basis(n_vars: usize, cutoff: u32) -> Arc<Basis> {
    type Cache = Mutex<HashMap<(usize, u32), Arc<Basis>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("basis cache poisoned");
    guard.entry((n_vars, cutoff)).or_insert_with(|| Arc::new(Basis::new(n_vars, cutoff))).clone()
}

/// Generalized binomial `C(λ+k−1, k) = Π_{i=1..k} (λ+i−1)/i`, the k-th
/// coefficient of `(1−x)^{−λ}`.
pub fn rising_binomial(lambda: f64, k: u32) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * (lambda + f64::from(i) - 1.0) / f64::from(i))
}

#[derive(Clone, Debug)]
pub struct HermitianSeries {
    basis: Arc<Basis>,
    coeffs: Vec<f64>,
}

impl PartialEq for HermitianSeries {
    fn eq(&self, other: &Self) -> bool {
        self.same_shape(other) && self.coeffs == other.coeffs
    }
}

impl HermitianSeries {
    pub fn zero(n_vars: usize, cutoff: u32) -> Self {
        Self::zero_on(shared_basis(n_vars, cutoff))
    }

    pub fn zero_on(basis: Arc<Basis>) -> Self {
        let len = basis.len();
        Self { basis, coeffs: vec![0.0; len * len] }
    }

    pub fn constant(n_vars: usize, cutoff: u32, value: f64) -> Self {
        let mut s = Self::zero(n_vars, cutoff);
        s.coeffs[0] = value;
        s
    }

    /// Builds a series from `(holomorphic exponents, antiholomorphic exponents, value)`
    /// terms. Repeated terms accumulate; terms beyond the cutoff are dropped.
    /// The result must be symmetric.
    pub fn from_terms<'a, I>(n_vars: usize, cutoff: u32, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a [u32], &'a [u32], f64)>,
    {
        let mut s = Self::zero(n_vars, cutoff);
        for (hol, anti, v) in terms {
            if hol.len() != n_vars || anti.len() != n_vars {
                return Err(Error::ShapeMismatch(format!(
                    "term with {} / {} exponents in a {n_vars}-variable series",
                    hol.len(),
                    anti.len()
                )));
            }
            if let (Some(j), Some(k)) = (s.basis.index_of(hol), s.basis.index_of(anti)) {
                s.add_at(j, k, v);
            }
        }
        let asym = s.max_asymmetry();
        if asym > 0.0 {
            return Err(Error::Precondition(format!("terms are not Hermitian-symmetric (defect {asym:e})")));
        }
        Ok(s)
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn n_vars(&self) -> usize {
        self.basis.n_vars()
    }

    pub fn cutoff(&self) -> u32 {
        self.basis.max_degree()
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    #[inline]
    pub fn coeff(&self, j: usize, k: usize) -> f64 {
        self.coeffs[j * self.len() + k]
    }

    /// Coefficient of `z^hol z̄^anti`; zero when either index is out of range.
    pub fn coeff_of(&self, hol: &[u32], anti: &[u32]) -> f64 {
        match (self.basis.index_of(hol), self.basis.index_of(anti)) {
            (Some(j), Some(k)) => self.coeff(j, k),
            _ => 0.0,
        }
    }

    #[inline]
    fn add_at(&mut self, j: usize, k: usize, v: f64) {
        let len = self.len();
        self.coeffs[j * len + k] += v;
    }

    /// Adds `v · (z^{m_j} z̄^{m_k} + z^{m_k} z̄^{m_j})`, or `v · |z^{m_j}|²` when `j == k`.
    pub fn add_hermitian_term(&mut self, j: usize, k: usize, v: f64) {
        self.add_at(j, k, v);
        if j != k {
            self.add_at(k, j, v);
        }
    }

    pub fn constant_term(&self) -> f64 {
        self.coeffs[0]
    }

    /// Nonzero coefficients as `(j, k, value)`.
    pub fn nonzeros(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let len = self.len();
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(move |(i, v)| (i / len, i % len, *v))
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest `|b_jk − b_kj|`.
    pub fn max_asymmetry(&self) -> f64 {
        let len = self.len();
        let mut worst = 0.0f64;
        for j in 0..len {
            for k in j + 1..len {
                worst = worst.max((self.coeff(j, k) - self.coeff(k, j)).abs());
            }
        }
        worst
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.n_vars() == other.n_vars() && self.cutoff() == other.cutoff()
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(format!(
                "series ({} vars, cutoff {}) vs ({} vars, cutoff {})",
                self.n_vars(),
                self.cutoff(),
                other.n_vars(),
                other.cutoff()
            )))
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { basis: self.basis.clone(), coeffs: self.coeffs.iter().map(|v| v * factor).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(Self { basis: self.basis.clone(), coeffs })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scaled(-1.0))
    }

    pub fn plus_constant(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.coeffs[0] += c;
        out
    }

    /// Truncated product.
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let b: Vec<_> = other.nonzeros().collect();
        let mut out = Self::zero_on(self.basis.clone());
        let basis = &self.basis;
        for (ja, ka, va) in self.nonzeros() {
            for &(jb, kb, vb) in &b {
                if let (Some(j), Some(k)) = (basis.product_position(ja, jb), basis.product_position(ka, kb)) {
                    out.add_at(j, k, va * vb);
                }
            }
        }
        Ok(out)
    }

    fn require_zero_constant(&self, op: &str) -> Result<()> {
        if self.constant_term() != 0.0 {
            return Err(Error::Precondition(format!(
                "{op} needs Q(0) = 0, got constant term {}",
                self.constant_term()
            )));
        }
        Ok(())
    }

    // Σ_{k≥1} weight(k) Q^k, stopping once the powers vanish under truncation.
    fn power_sum(&self, weight: impl Fn(u32) -> f64) -> Result<Self> {
        let mut acc = Self::zero_on(self.basis.clone());
        let mut power = self.clone();
        // each factor raises hol + antihol degree by at least one
        let max_k = 2 * self.cutoff();
        for k in 1..=max_k.max(1) {
            if power.max_abs() == 0.0 {
                break;
            }
            let w = weight(k);
            if w != 0.0 {
                for (c, p) in acc.coeffs.iter_mut().zip(&power.coeffs) {
                    *c += w * p;
                }
            }
            if k < max_k {
                power = power.product(self)?;
            }
        }
        Ok(acc)
    }

    /// `(1 − Q)^{−λ} − 1 = Σ_{k≥1} C(λ+k−1, k) Q^k` to the retained order.
    pub fn inverse_power(&self, lambda: f64) -> Result<Self> {
        self.require_zero_constant("inverse_power")?;
        // weights C(λ+k−1,k) by the running product, k increasing
        let weights: Vec<f64> =
            (0..=2 * self.cutoff().max(1)).scan(1.0, |c, k| {
                if k > 0 {
                    *c *= (lambda + f64::from(k) - 1.0) / f64::from(k);
                }
                Some(*c)
            }).collect();
        self.power_sum(|k| weights[k as usize])
    }

    /// `−log(1 − Q) = Σ_{k≥1} Q^k / k`.
    pub fn log_one_minus(&self) -> Result<Self> {
        self.require_zero_constant("log_one_minus")?;
        self.power_sum(|k| 1.0 / f64::from(k))
    }

    /// Re-expresses the series over another basis with at least as many
    /// variables; new variables get exponent zero and terms beyond the
    /// target cutoff are dropped.
    pub fn reindex(&self, target: Arc<Basis>) -> Result<Self> {
        if target.n_vars() < self.n_vars() {
            return Err(Error::ShapeMismatch(format!(
                "cannot reindex {} variables into {}",
                self.n_vars(),
                target.n_vars()
            )));
        }
        let pad = target.n_vars() - self.n_vars();
        let map: Vec<Option<usize>> = self
            .basis
            .indices()
            .iter()
            .map(|m| {
                let mut e = m.exponents().to_vec();
                e.extend(std::iter::repeat_n(0, pad));
                target.index_of(&e)
            })
            .collect();
        let mut out = Self::zero_on(target);
        for (j, k, v) in self.nonzeros() {
            if let (Some(tj), Some(tk)) = (map[j], map[k]) {
                out.add_at(tj, tk, v);
            }
        }
        Ok(out)
    }

    pub fn with_cutoff(&self, cutoff: u32) -> Self {
        self.reindex(shared_basis(self.n_vars(), cutoff)).expect("same variable count")
    }

    /// Evaluates `Σ b_jk z^{m_j} conj(w)^{m_k}`.
    pub fn eval(&self, z: &[Complex<f64>], w: &[Complex<f64>]) -> Complex<f64> {
        let zs: Vec<_> = self.basis.indices().iter().map(|m| m.eval(z)).collect();
        let ws: Vec<_> = self.basis.indices().iter().map(|m| m.eval(w).conj()).collect();
        self.nonzeros().map(|(j, k, v)| zs[j] * ws[k] * v).sum()
    }

    /// Indices of the underlying basis, for callers that need exponents.
    pub fn multi_index(&self, pos: usize) -> &MultiIndex {
        self.basis.get(pos)
    }
}
