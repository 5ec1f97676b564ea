//! Symmetric eigendecomposition with deterministic ordering and signs.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub const ORTHONORMALITY_TOL: f64 = 1e-8;

/// Square matrix with orthonormal columns; column `q` is candidate
/// eigenvector `q`. Constructed through [`Eigenbasis::new`], which enforces
/// `max|VᵀV - I| <= 1e-8`.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenbasis(DMatrix<f64>);

impl Eigenbasis {
    pub fn new(columns: DMatrix<f64>) -> Result<Self> {
        if columns.nrows() != columns.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "eigenbasis must be square, got {}x{}",
                columns.nrows(),
                columns.ncols()
            )));
        }
        let dev = orthonormality_deviation(&columns);
        if dev > ORTHONORMALITY_TOL {
            return Err(Error::InvalidInput(format!(
                "columns are not orthonormal (max|VᵀV - I| = {dev:.3e})"
            )));
        }
        Ok(Eigenbasis(columns))
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }
}

/// Largest absolute entry of `VᵀV - I`.
pub fn orthonormality_deviation(v: &DMatrix<f64>) -> f64 {
    let mut gram = v.transpose() * v;
    for i in 0..gram.nrows() {
        gram[(i, i)] -= 1.0;
    }
    gram.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

/// Eigendecomposition of a symmetric matrix: `m V = V diag(Λ)`.
///
/// Eigenvalues come back sorted ascending; each eigenvector is sign-fixed so
/// its largest-magnitude entry (lowest index on ties) is positive.
pub fn eig_sym(m: &DMatrix<f64>) -> Result<(Eigenbasis, DVector<f64>)> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "expected square matrix, got {}x{}",
            n,
            m.ncols()
        )));
    }
    let asym = (m - m.transpose()).iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if asym > 1e-10 {
        return Err(Error::InvalidInput(format!(
            "matrix is not symmetric (max|m - mᵀ| = {asym:.3e})"
        )));
    }
    let sym = nalgebra::SymmetricEigen::try_new(m.clone(), f64::EPSILON, 10_000)
        .ok_or(Error::FailedConvergence)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        sym.eigenvalues[a]
            .partial_cmp(&sym.eigenvalues[b])
            .expect("eigenvalues are finite")
            .then(a.cmp(&b))
    });

    let mut values = DVector::zeros(n);
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        values[dst] = sym.eigenvalues[src];
        let col = sym.eigenvectors.column(src);
        let mut best = 0;
        for r in 1..n {
            if col[r].abs() > col[best].abs() {
                best = r;
            }
        }
        let sign = if col[best] < 0.0 { -1.0 } else { 1.0 };
        vectors.column_mut(dst).copy_from(&(col * sign));
    }
    Ok((Eigenbasis::new(vectors)?, values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn residual(m: &DMatrix<f64>, v: &Eigenbasis, vals: &DVector<f64>) -> f64 {
        let rec = m * v.matrix() - v.matrix() * DMatrix::from_diagonal(vals);
        rec.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
    }

    #[test]
    fn identity_matrix() {
        let m = DMatrix::identity(3, 3);
        let (v, vals) = eig_sym(&m).unwrap();
        for i in 0..3 {
            assert_relative_eq!(vals[i], 1.0, max_relative = 1e-12);
        }
        assert!(residual(&m, &v, &vals) <= 1e-8);
    }

    #[test]
    fn path3_adjacency_spectrum() {
        let m = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        let (v, vals) = eig_sym(&m).unwrap();
        let s = 2.0f64.sqrt();
        assert_relative_eq!(vals[0], -s, epsilon = 1e-10);
        assert_relative_eq!(vals[1], 0.0, epsilon = 1e-10);
        assert_relative_eq!(vals[2], s, epsilon = 1e-10);
        assert!(residual(&m, &v, &vals) <= 1e-8);
    }

    #[test]
    fn diagonal_matrix_sorted() {
        let m = DMatrix::from_row_slice(2, 2, &[5.0, 0.0, 0.0, -2.0]);
        let (v, vals) = eig_sym(&m).unwrap();
        assert_relative_eq!(vals[0], -2.0, epsilon = 1e-12);
        assert_relative_eq!(vals[1], 5.0, epsilon = 1e-12);
        // Signed permutation of I, sign-fixed to be positive.
        assert_relative_eq!(v.matrix()[(1, 0)], 1.0, epsilon = 1e-12);
        assert_relative_eq!(v.matrix()[(0, 1)], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn rejects_nonsymmetric() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.5, 0.0]);
        assert!(eig_sym(&m).is_err());
    }

    #[test]
    fn reconstructs_random_symmetric_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = rng.random_range(2..=15);
            let raw = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
            let m = (&raw + raw.transpose()) * 0.5;
            let (v, vals) = eig_sym(&m).unwrap();
            let rec = v.matrix() * DMatrix::from_diagonal(&vals) * v.matrix().transpose();
            let err = (&rec - &m).iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
            assert!(err <= 1e-8, "reconstruction error {err}");
            assert!(orthonormality_deviation(v.matrix()) <= 1e-8);
            for i in 1..n {
                assert!(vals[i] >= vals[i - 1]);
            }
        }
    }

    #[test]
    fn deterministic_output() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 0.2, 0.0, 0.2, -0.5, 0.3, 0.0, 0.3, 2.0]);
        let a = eig_sym(&m).unwrap();
        let b = eig_sym(&m).unwrap();
        assert_eq!(a.0.matrix(), b.0.matrix());
        assert_eq!(a.1, b.1);
    }
}
