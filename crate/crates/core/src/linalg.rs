//! Dense Hermitian eigen-decompositions for Calabi blocks and Gram matrices.

use nalgebra::{ComplexField, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Eigenpairs sorted by ascending eigenvalue.
pub struct Eigen<T: ComplexField> {
    pub values: Vec<f64>,
    pub vectors: DMatrix<T>,
}

impl<T: ComplexField<RealField = f64>> Eigen<T> {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn vector(&self, i: usize) -> DVector<T> {
        self.vectors.column(i).into_owned()
    }
}

pub fn hermitian_eigen<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> Result<Eigen<T>> {
    let n = m.nrows();
    if n == 0 {
        return Ok(Eigen { values: Vec::new(), vectors: DMatrix::zeros(0, 0) });
    }
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Eigen(format!("no convergence on a {n}x{n} matrix")))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])].clone());
    Ok(Eigen { values, vectors })
}

/// Max absolute row sum.
pub fn inf_norm<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> f64 {
    m.row_iter().map(|r| r.iter().map(|v| v.clone().modulus()).sum::<f64>()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Complex;

    #[test]
    fn sorted_real_eigenpairs() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let e = hermitian_eigen(&m).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] - 3.0).abs() < 1e-14);
        let v = e.vector(0);
        assert!((&m * &v - &v * e.values[0]).norm() < 1e-14);
        assert_eq!(inf_norm(&m), 3.0);
    }

    #[test]
    fn complex_hermitian() {
        let i = Complex::new(0.0, 1.0);
        let one = Complex::new(1.0, 0.0);
        // [[1, i], [-i, 1]] has eigenvalues 0 and 2
        let m = DMatrix::from_row_slice(2, 2, &[one, i, -i, one]);
        let e = hermitian_eigen(&m).unwrap();
        assert!(e.values[0].abs() < 1e-14);
        assert!((e.values[1] - 2.0).abs() < 1e-14);
    }
}
