use serde::{Deserialize, Serialize};

use super::{principal_pow, ONE};
use crate::error::{Error, Result};
use crate::lpcore::{check_square, eigen_decomposition, identity, ComplexMatrix, C64};
use crate::ritt::UNIT_EIGENVALUE_TOL;

/// Largest eigenvector condition number accepted by the eigen route.
pub const EIG_CONDITION_CAP: f64 = 1e8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesResult {
    #[serde(with = "crate::lpcore::matrix_serde")]
    pub value: ComplexMatrix,
    /// Index of the last term added.
    pub terms: usize,
    /// Frobenius norm of the last term added.
    pub last_increment: f64,
    pub converged: bool,
}

/// Partial sums of `Σ_k binom(α, k) (−T)^k`, stopped once a term falls below `tol`.
///
/// Non-convergence within `k_max` terms is reported through `converged = false`
/// together with the partial sum.
pub fn frac_power_series(t: &ComplexMatrix, alpha: f64, tol: f64, k_max: usize) -> Result<SeriesResult> {
    check_square(t)?;
    if !alpha.is_finite() {
        return Err(Error::InvalidArgument("exponent must be finite".into()));
    }
    let n = t.nrows();
    let minus_t = -t;
    let mut term = identity(n);
    let mut sum = term.clone();
    let mut last = term.norm();
    for k in 1..=k_max {
        let factor = (alpha - k as f64 + 1.0) / k as f64;
        term = (&term * &minus_t) * C64::new(factor, 0.0);
        last = term.norm();
        sum += &term;
        if last < tol {
            return Ok(SeriesResult { value: sum, terms: k, last_increment: last, converged: true });
        }
    }
    Ok(SeriesResult { value: sum, terms: k_max, last_increment: last, converged: last < tol })
}

/// `V diag((1 − c_k)^α) V^{−1}` with the principal branch; refused when `κ(V)` exceeds the cap.
pub fn frac_power_eig(t: &ComplexMatrix, alpha: f64) -> Result<ComplexMatrix> {
    check_square(t)?;
    let e = eigen_decomposition(t)?;
    if e.condition > EIG_CONDITION_CAP {
        return Err(Error::IllConditioned(e.condition));
    }
    Ok(e.apply(|c| {
        let w = ONE - c;
        if w.norm() < UNIT_EIGENVALUE_TOL {
            C64::new(0.0, 0.0)
        } else {
            principal_pow(w, alpha)
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lpcore::{complex_gaussian_matrix, real_diagonal, seeded_rng, spectral_norm};

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn series_examples() {
        let z = frac_power_series(&ComplexMatrix::zeros(2, 2), 0.5, 1e-14, 10).unwrap();
        assert_eq!(z.value, identity(2));
        assert_eq!(z.terms, 1);
        let t = ComplexMatrix::from_fn(3, 3, |i, j| c(0.1 * (i as f64 - j as f64) + 0.05));
        let r = frac_power_series(&t, 1.0, 1e-14, 10).unwrap();
        assert_eq!(r.terms, 2);
        assert!((r.value - (identity(3) - &t)).norm() < 1e-15);
        let r = frac_power_series(&real_diagonal(&[0.9]), 0.5, 1e-15, 10_000).unwrap();
        assert!(r.converged);
        assert!((r.value[(0, 0)] - 0.1f64.sqrt()).norm() < 1e-13);
    }

    #[test]
    fn series_flags_slow_convergence() {
        let r = frac_power_series(&identity(2), 0.5, 1e-12, 100).unwrap();
        assert!(!r.converged);
        assert_eq!(r.terms, 100);
        assert!(r.value[(0, 0)].re < 0.1);
    }

    #[test]
    fn eig_examples() {
        let d = real_diagonal(&[0.3, -0.2]);
        let e = frac_power_eig(&d, 0.5).unwrap();
        assert!((e[(0, 0)] - 0.7f64.sqrt()).norm() < 1e-14);
        assert!((e[(1, 1)] - 1.2f64.sqrt()).norm() < 1e-14);
        let v = ComplexMatrix::from_row_slice(2, 2, &[c(2.0), c(1.0), c(1.0), c(1.0)]);
        let vinv = ComplexMatrix::from_row_slice(2, 2, &[c(1.0), c(-1.0), c(-1.0), c(2.0)]);
        let t = &v * real_diagonal(&[0.5, 0.25]) * &vinv;
        let expected = &v * real_diagonal(&[0.25, 0.5625]) * &vinv;
        assert!((frac_power_eig(&t, 2.0).unwrap() - expected).norm() < 1e-13);
        let jordan = ComplexMatrix::from_row_slice(2, 2, &[c(0.5), c(1.0), c(0.0), c(0.5)]);
        assert!(matches!(frac_power_eig(&jordan, 0.5), Err(Error::IllConditioned(_))));
    }

    #[test]
    fn semigroup_law() {
        let mut rng = seeded_rng(8, 0);
        let t = complex_gaussian_matrix(&mut rng, 5, 5) * c(0.15);
        let s = |a: f64| frac_power_series(&t, a, 1e-16, 2000).unwrap().value;
        for &(a, b) in &[(0.5, 0.5), (0.3, 1.2), (1.5, 0.25)] {
            let lhs = s(a) * s(b);
            assert!(spectral_norm(&(lhs - s(a + b))) < 1e-8);
        }
        let two = s(2.0);
        let exact = (identity(5) - &t) * (identity(5) - &t);
        assert!(spectral_norm(&(two - exact)) < 1e-10);
    }
}
