//! Exponent tuples for monomials in `n` complex variables, enumerated in
//! graded order.
//!
//! Within one total degree the order is lexicographic with the first
//! variable most significant and larger exponents first, so for two
//! variables the degree-one indices come out as `(1,0), (0,1)`.

use std::collections::HashMap;
use std::fmt;
use std::ops::Range;

use crate::error::{Error, Result};

/// Exponents of a monomial `z_1^{e_1} ... z_n^{e_n}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    exponents: Vec<u32>,
    degree: u32,
}

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        let degree = exponents.iter().sum();
        Self { exponents, degree }
    }

    pub fn zero(n_vars: usize) -> Self {
        Self { exponents: vec![0; n_vars], degree: 0 }
    }

    /// The index of the single variable `z_var`.
    pub fn unit(n_vars: usize, var: usize) -> Self {
        let mut exponents = vec![0; n_vars];
        exponents[var] = 1;
        Self { exponents, degree: 1 }
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn n_vars(&self) -> usize {
        self.exponents.len()
    }

    /// Exponent arithmetic of a monomial product.
    pub fn checked_sum(&self, other: &MultiIndex) -> Result<MultiIndex> {
        if self.n_vars() != other.n_vars() {
            return Err(Error::ShapeMismatch(format!(
                "multi-index variable counts {} and {}",
                self.n_vars(),
                other.n_vars()
            )));
        }
        Ok(self.sum_unchecked(other))
    }

    fn sum_unchecked(&self, other: &MultiIndex) -> MultiIndex {
        let exponents = self.exponents.iter().zip(&other.exponents).map(|(a, b)| a + b).collect();
        MultiIndex { exponents, degree: self.degree + other.degree }
    }

    /// Multi-index factorial `e_1! ... e_n!`.
    pub fn factorial(&self) -> f64 {
        self.exponents
            .iter()
            .map(|&e| (1..=e).map(f64::from).product::<f64>())
            .product()
    }

    /// Evaluates the monomial at a complex point.
    pub fn eval(&self, point: &[nalgebra::Complex<f64>]) -> nalgebra::Complex<f64> {
        let mut acc = nalgebra::Complex::new(1.0, 0.0);
        for (&e, &z) in self.exponents.iter().zip(point) {
            for _ in 0..e {
                acc *= z;
            }
        }
        acc
    }
}

impl std::ops::Add for &MultiIndex {
    type Output = MultiIndex;

    /// Panics on mismatched variable counts; use [`MultiIndex::checked_sum`]
    /// for a fallible version.
    fn add(self, rhs: &MultiIndex) -> MultiIndex {
        assert_eq!(self.n_vars(), rhs.n_vars(), "multi-index variable counts differ");
        self.sum_unchecked(rhs)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.exponents.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// All multi-indices in `n_vars` variables with degree at most `max_degree`,
/// in graded order.
pub fn enumerate(n_vars: usize, max_degree: u32) -> Vec<MultiIndex> {
    assert!(n_vars >= 1, "need at least one variable");
    let mut out = Vec::new();
    let mut buf = vec![0u32; n_vars];
    for degree in 0..=max_degree {
        fill_degree(&mut buf, 0, degree, &mut out);
    }
    out
}

// Writes every composition of `remaining` into buf[pos..], first slot largest first.
fn fill_degree(buf: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    if pos + 1 == buf.len() {
        buf[pos] = remaining;
        out.push(MultiIndex::new(buf.to_vec()));
        return;
    }
    for e in (0..=remaining).rev() {
        buf[pos] = e;
        fill_degree(buf, pos + 1, remaining - e, out);
    }
}

/// A frozen enumeration with position lookup, per-degree ranges, and a
/// product table used by series multiplication.
#[derive(Debug)]
pub struct Basis {
    n_vars: usize,
    max_degree: u32,
    indices: Vec<MultiIndex>,
    positions: HashMap<Vec<u32>, usize>,
    degree_starts: Vec<usize>,
    // product[i * len + j] = position of indices[i] + indices[j], if retained
    product: Vec<Option<u32>>,
}

impl Basis {
    pub fn new(n_vars: usize, max_degree: u32) -> Self {
        let indices = enumerate(n_vars, max_degree);
        let positions: HashMap<Vec<u32>, usize> =
            indices.iter().enumerate().map(|(i, m)| (m.exponents.clone(), i)).collect();

        let mut degree_starts = Vec::with_capacity(max_degree as usize + 2);
        for (i, m) in indices.iter().enumerate() {
            while degree_starts.len() <= m.degree as usize {
                degree_starts.push(i);
            }
        }
        degree_starts.push(indices.len());

        let len = indices.len();
        let mut product = vec![None; len * len];
        for i in 0..len {
            for j in 0..len {
                if indices[i].degree + indices[j].degree <= max_degree {
                    let s = indices[i].sum_unchecked(&indices[j]);
                    product[i * len + j] = Some(positions[&s.exponents] as u32);
                }
            }
        }

        Self { n_vars, max_degree, indices, positions, degree_starts, product }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn get(&self, pos: usize) -> &MultiIndex {
        &self.indices[pos]
    }

    /// Position of an exponent tuple, if it is within the enumeration.
    pub fn index_of(&self, exponents: &[u32]) -> Option<usize> {
        self.positions.get(exponents).copied()
    }

    /// Positions of all indices of exactly `degree`.
    pub fn degree_range(&self, degree: u32) -> Range<usize> {
        if degree > self.max_degree {
            return self.len()..self.len();
        }
        self.degree_starts[degree as usize]..self.degree_starts[degree as usize + 1]
    }

    /// Position of `indices[i] + indices[j]`, or `None` when the sum exceeds
    /// the maximum degree.
    #[inline]
    pub fn product_position(&self, i: usize, j: usize) -> Option<usize> {
        self.product[i * self.len() + j].map(|p| p as usize)
    }
}
