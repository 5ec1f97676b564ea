//! Graph Fourier transform over an adjacency eigenbasis.

use nalgebra::{DMatrix, DVector};

use crate::eig::Eigenbasis;
use crate::error::{Error, Result};

/// Forward transform `y = Vᵀ x`.
pub fn gft(basis: &Eigenbasis, signal: &DVector<f64>) -> Result<DVector<f64>> {
    check_len(basis, signal)?;
    Ok(basis.matrix().transpose() * signal)
}

/// Inverse transform `x = V y`.
pub fn igft(basis: &Eigenbasis, spectrum: &DVector<f64>) -> Result<DVector<f64>> {
    check_len(basis, spectrum)?;
    Ok(basis.matrix() * spectrum)
}

/// Quadratic form `xᵀ L x` measuring signal variation across edges.
pub fn total_variation(laplacian: &DMatrix<f64>, signal: &DVector<f64>) -> Result<f64> {
    if laplacian.nrows() != signal.len() || laplacian.ncols() != signal.len() {
        return Err(Error::DimensionMismatch(format!(
            "laplacian is {}x{}, signal has length {}",
            laplacian.nrows(),
            laplacian.ncols(),
            signal.len()
        )));
    }
    Ok((signal.transpose() * laplacian * signal)[(0, 0)])
}

fn check_len(basis: &Eigenbasis, v: &DVector<f64>) -> Result<()> {
    if basis.n() != v.len() {
        return Err(Error::DimensionMismatch(format!(
            "basis is {0}x{0}, vector has length {1}",
            basis.n(),
            v.len()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{laplacian, Graph};
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn random_orthonormal(n: usize, seed: u64) -> Eigenbasis {
        crate::learn::random_orthogonal(n, seed)
    }

    #[test]
    fn identity_basis_is_identity_transform() {
        let v = Eigenbasis::new(DMatrix::identity(3, 3)).unwrap();
        let x = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        assert_eq!(gft(&v, &x).unwrap(), x);
        assert_eq!(igft(&v, &x).unwrap(), x);
    }

    #[test]
    fn basis_column_maps_to_unit_vector() {
        let v = random_orthonormal(5, 3);
        let x = DVector::from_column_slice(v.matrix().column(2).as_slice());
        let y = gft(&v, &x).unwrap();
        for i in 0..5 {
            let expect = if i == 2 { 1.0 } else { 0.0 };
            assert_relative_eq!(y[i], expect, epsilon = 1e-12);
        }
        let back = igft(&v, &y).unwrap();
        assert_relative_eq!((back - x).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let v = random_orthonormal(4, 0);
        let x = DVector::from_vec(vec![1.0; 5]);
        assert!(gft(&v, &x).is_err());
        assert!(igft(&v, &x).is_err());
    }

    #[test]
    fn constant_signal_has_zero_variation() {
        let g = Graph::new(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 3, 1.0)]).unwrap();
        let l = laplacian(&g.adjacency());
        let x = DVector::from_element(4, 2.5);
        assert_relative_eq!(total_variation(&l, &x).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn two_path_variation() {
        let g = Graph::new(2, [(0, 1, 1.0)]).unwrap();
        let l = laplacian(&g.adjacency());
        let x = DVector::from_vec(vec![1.0, -1.0]);
        assert_relative_eq!(total_variation(&l, &x).unwrap(), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn top_laplacian_eigenvector_attains_top_eigenvalue() {
        let g = Graph::new(5, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0), (0, 4, 1.0)])
            .unwrap();
        let l = laplacian(&g.adjacency());
        let (v, vals) = crate::eig::eig_sym(&l).unwrap();
        let top = DVector::from_column_slice(v.matrix().column(4).as_slice());
        assert_relative_eq!(total_variation(&l, &top).unwrap(), vals[4], epsilon = 1e-8);
    }

    proptest! {
        #[test]
        fn parseval_and_round_trip(seed in 0u64..64, vals in proptest::collection::vec(-10.0f64..10.0, 6)) {
            let v = random_orthonormal(6, seed);
            let x = DVector::from_vec(vals);
            let y = gft(&v, &x).unwrap();
            prop_assert!((y.norm() - x.norm()).abs() <= 1e-10 * x.norm().max(1.0));
            let back = igft(&v, &y).unwrap();
            prop_assert!((back - &x).norm() <= 1e-10 * x.norm().max(1.0));
        }
    }
}
