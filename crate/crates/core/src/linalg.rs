//! Small dense complex linear algebra helpers.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Largest singular value, from the top eigenvalue of A†A. Falls back to
/// power iteration if the eigen-solver does not converge.
pub fn largest_singular_value(a: &CMatrix) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 || a.iter().all(|z| z.norm_sqr() == 0.0) {
        return 0.0;
    }
    let gram = a.adjoint() * a;
    match SymmetricEigen::try_new(gram, 1e-15, 10_000) {
        Some(eig) => eig.eigenvalues.iter().copied().fold(0.0f64, f64::max).sqrt(),
        None => power_iteration_norm(a, 1e-12, 100_000),
    }
}

/// Power iteration on A†A; stops when successive estimates agree to `rel_tol`.
pub fn power_iteration_norm(a: &CMatrix, rel_tol: f64, max_iter: usize) -> f64 {
    let n = a.ncols();
    if n == 0 || a.nrows() == 0 {
        return 0.0;
    }
    // Deterministic start with no special alignment.
    let mut v = DVector::from_fn(n, |i, _| Complex64::new(1.0 + 0.37 * i as f64, 0.11 * (i % 7) as f64));
    let norm = v.norm();
    v /= Complex64::new(norm, 0.0);
    let mut estimate = 0.0;
    for _ in 0..max_iter {
        let w = a.adjoint() * (a * &v);
        let wn = w.norm();
        if wn == 0.0 {
            return 0.0;
        }
        v = w / Complex64::new(wn, 0.0);
        let next = wn.sqrt();
        if (next - estimate).abs() <= rel_tol * next {
            return next;
        }
        estimate = next;
    }
    estimate
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn hand_values() {
        let a = CMatrix::from_row_slice(2, 2, &[c(3.0), c(0.0), c(0.0), c(-5.0)]);
        assert!((largest_singular_value(&a) - 5.0).abs() < 1e-12);
        let row = CMatrix::from_row_slice(1, 2, &[c(1.0 / 2f64.sqrt()), c(0.5)]);
        assert!((largest_singular_value(&row) - 0.75f64.sqrt()).abs() < 1e-12);
        assert_eq!(largest_singular_value(&CMatrix::zeros(3, 3)), 0.0);
        assert_eq!(largest_singular_value(&CMatrix::zeros(0, 3)), 0.0);
    }

    proptest! {
        #[test]
        fn agrees_with_svd_and_power_iteration(entries in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 12)) {
            let a = CMatrix::from_iterator(3, 4, entries.iter().map(|&(r, i)| Complex64::new(r, i)));
            let svd = a.clone().singular_values().iter().copied().fold(0.0, f64::max);
            let ours = largest_singular_value(&a);
            prop_assert!((ours - svd).abs() < 1e-9);
            let power = power_iteration_norm(&a, 1e-14, 200_000);
            prop_assert!((power - svd).abs() < 1e-6);
        }
    }
}
