//! Fractional powers `(I − T)^α` by three independent routes, polynomial calculus,
//! and the bounded-family scan for `n^α Tⁿ⁻¹(I − T)^α`.

mod contour;
mod scan;
mod series;

pub use contour::{contour_phi_fracpow, ContourSpec};
pub use scan::{
    power_difference_scan, stolz_integral_bounds, PowerDifferenceScan, StolzIntegralRow, StolzIntegralTable,
};
pub use series::{frac_power_eig, frac_power_series, SeriesResult, EIG_CONDITION_CAP};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lpcore::{check_square, eigen_decomposition, identity, spectrum, ComplexMatrix, C64};
use crate::ritt::UNIT_EIGENVALUE_TOL;

const ONE: C64 = C64::new(1.0, 0.0);
const ZERO: C64 = C64::new(0.0, 0.0);

/// `φ(T)` by Horner's scheme; `coeffs[k]` multiplies `z^k`.
pub fn poly_apply(t: &ComplexMatrix, coeffs: &[C64]) -> ComplexMatrix {
    let n = t.nrows();
    let mut acc = ComplexMatrix::zeros(n, n);
    for &c in coeffs.iter().rev() {
        acc = &acc * t;
        for i in 0..n {
            acc[(i, i)] += c;
        }
    }
    acc
}

/// Scalar Horner evaluation.
pub fn poly_eval(coeffs: &[C64], z: C64) -> C64 {
    coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
}

/// Principal power `w^α`, with `0^α = 0` for `α > 0`.
pub fn principal_pow(w: C64, alpha: f64) -> C64 {
    if w == ZERO {
        ZERO
    } else if w.im == 0.0 && w.re > 0.0 {
        C64::new(w.re.powf(alpha), 0.0)
    } else {
        C64::from_polar(w.norm().powf(alpha), alpha * w.arg())
    }
}

/// `(I − T)^k` for a nonnegative integer `k`.
pub fn integer_power_of_difference(t: &ComplexMatrix, k: u32) -> ComplexMatrix {
    let n = t.nrows();
    let base = identity(n) - t;
    let mut out = identity(n);
    for _ in 0..k {
        out = &out * &base;
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProjectionMethod {
    /// No eigenvalue at 1.
    Trivial,
    Eigen,
    /// Dyadic Cesàro means `(1/m) Σ_{k<m} T^k`.
    Cesaro,
}

#[derive(Clone, Debug)]
pub struct UnitProjection {
    pub projection: ComplexMatrix,
    pub method: ProjectionMethod,
    /// Final change between successive Cesàro means; zero for the other methods.
    pub residual: f64,
    pub converged: bool,
}

/// Projection onto `Ker(I − T)` along the closure of `Ran(I − T)`.
pub fn unit_projection(t: &ComplexMatrix, tol: f64) -> Result<UnitProjection> {
    check_square(t)?;
    let n = t.nrows();
    let spec = spectrum(t)?;
    if !spec.iter().any(|c| (c - ONE).norm() < UNIT_EIGENVALUE_TOL) {
        return Ok(UnitProjection {
            projection: ComplexMatrix::zeros(n, n),
            method: ProjectionMethod::Trivial,
            residual: 0.0,
            converged: true,
        });
    }
    if let Ok(e) = eigen_decomposition(t) {
        if e.condition <= EIG_CONDITION_CAP {
            let p = e.apply(|c| if (c - ONE).norm() < UNIT_EIGENVALUE_TOL { ONE } else { ZERO });
            return Ok(UnitProjection {
                projection: p,
                method: ProjectionMethod::Eigen,
                residual: 0.0,
                converged: true,
            });
        }
    }
    // S_{2m} = S_m (I + T^m) / 2, and S_m − P = R(I − T^m)/m on the complement, so
    // 2S_{2m} − S_m removes the 1/m term once T^m is small there. Rounding makes the unit
    // eigenvalue 1 + δ and T^m amplifies δ by m, so the doubling stops once the
    // increments stop shrinking.
    let mut s = identity(n);
    let mut tm = t.clone();
    let mut best = s.clone();
    let mut residual = f64::INFINITY;
    let mut prev: Option<ComplexMatrix> = None;
    for _ in 0..60 {
        let next = &s * (identity(n) + &tm) * C64::new(0.5, 0.0);
        let extrapolated = &next * C64::new(2.0, 0.0) - &s;
        s = next;
        tm = &tm * &tm;
        if let Some(prev) = prev.as_ref() {
            let step = (&extrapolated - prev).norm();
            if step > residual && residual < 1e-6 {
                break;
            }
            if step <= residual {
                residual = step;
                best = extrapolated.clone();
            }
            if residual < tol {
                return Ok(UnitProjection {
                    projection: best,
                    method: ProjectionMethod::Cesaro,
                    residual,
                    converged: true,
                });
            }
        }
        prev = Some(extrapolated);
    }
    Ok(UnitProjection { projection: best, method: ProjectionMethod::Cesaro, residual, converged: false })
}

/// `(I − T)^α`: exact products for integer `α`, otherwise the eigen route when well
/// conditioned and the contour route after splitting off `Ker(I − T)`.
pub fn frac_power(t: &ComplexMatrix, alpha: f64) -> Result<ComplexMatrix> {
    check_square(t)?;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("exponent alpha = {alpha} must be positive")));
    }
    if alpha.fract() == 0.0 && alpha <= 64.0 {
        return Ok(integer_power_of_difference(t, alpha as u32));
    }
    match frac_power_eig(t, alpha) {
        Ok(m) => Ok(m),
        Err(Error::IllConditioned(_)) => {
            let spec = ContourSpec::for_operator(t, alpha)?;
            contour_phi_fracpow(t, &[ONE], alpha, &spec)
        }
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lpcore::{real_diagonal, seeded_rng};

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn poly_examples() {
        let t = ComplexMatrix::from_fn(3, 3, |i, j| c((i + 2 * j) as f64 * 0.1));
        assert_eq!(poly_apply(&t, &[ONE]), identity(3));
        assert_eq!(poly_apply(&t, &[ZERO, ONE]), t);
        let d = real_diagonal(&[0.5]);
        let sq = poly_apply(&d, &[c(1.0), c(-2.0), c(1.0)]);
        assert!((sq[(0, 0)] - 0.25).norm() < 1e-15);
        assert!((poly_eval(&[c(1.0), c(-2.0), c(1.0)], c(0.5)) - 0.25).norm() < 1e-15);
    }

    #[test]
    fn projection_examples() {
        let p = unit_projection(&identity(3), 1e-12).unwrap();
        assert!((p.projection - identity(3)).norm() < 1e-12);
        let p = unit_projection(&ComplexMatrix::zeros(3, 3), 1e-12).unwrap();
        assert_eq!(p.method, ProjectionMethod::Trivial);
        let p = unit_projection(&real_diagonal(&[1.0, 0.5]), 1e-12).unwrap();
        assert!((p.projection - real_diagonal(&[1.0, 0.0])).norm() < 1e-12);
    }

    #[test]
    fn cesaro_projection_handles_nondiagonalizable_complement() {
        // Jordan block at 0.5 next to the eigenvalue 1.
        let t = ComplexMatrix::from_row_slice(3, 3, &[c(1.0), ZERO, ZERO, ZERO, c(0.5), c(1.0), ZERO, ZERO, c(0.5)]);
        let mut rng = seeded_rng(2, 0);
        let v = crate::lpcore::complex_gaussian_matrix(&mut rng, 3, 3) + identity(3) * c(2.0);
        let vinv = v.clone().try_inverse().unwrap();
        let tt = &v * &t * &vinv;
        let p = unit_projection(&tt, 1e-11).unwrap();
        let expected = &v * real_diagonal(&[1.0, 0.0, 0.0]) * &vinv;
        assert!(
            (&p.projection - &expected).norm() < 1e-8,
            "{:?} {} {}",
            p.method,
            p.residual,
            (&p.projection - &expected).norm()
        );
    }

    #[test]
    fn frac_power_handles_unit_eigenvalue() {
        let t = real_diagonal(&[1.0, 0.75]);
        let f = frac_power(&t, 0.5).unwrap();
        assert!(f[(0, 0)].norm() < 1e-12);
        assert!((f[(1, 1)] - 0.5).norm() < 1e-12);
    }
}
