use nalgebra::linalg::Schur;

use super::{check_finite, check_square, identity, ComplexMatrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// Eigenvalues with multiplicity, from a complex Schur form.
pub fn spectrum(a: &ComplexMatrix) -> Result<Vec<C64>> {
    check_square(a)?;
    check_finite(a)?;
    if a.nrows() == 0 {
        return Ok(vec![]);
    }
    let (_, t) = Schur::new(a.clone()).unpack();
    Ok(t.diagonal().iter().copied().collect())
}

pub fn spectral_radius(a: &ComplexMatrix) -> Result<f64> {
    Ok(spectrum(a)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// The eigenvalue closest to `lambda`.
pub fn nearest_eigenvalue(a: &ComplexMatrix, lambda: C64) -> Result<C64> {
    let spec = spectrum(a)?;
    spec.into_iter()
        .min_by(|x, y| (x - lambda).norm().total_cmp(&(y - lambda).norm()))
        .ok_or_else(|| Error::Dimension("empty matrix has no spectrum".into()))
}

/// Largest accepted `‖λI − A‖_F ‖R(λ)‖_F` before `λ` is treated as a point of the spectrum.
const RESOLVENT_CONDITION_CAP: f64 = 1e12;

/// `(λI − A)^{-1}` with a residual check.
pub fn resolvent(a: &ComplexMatrix, lambda: C64) -> Result<ComplexMatrix> {
    check_square(a)?;
    check_finite(a)?;
    let n = a.nrows();
    let m = identity(n) * lambda - a;
    let singular = || -> Result<ComplexMatrix> {
        let eigenvalue = nearest_eigenvalue(a, lambda)?;
        Err(Error::Singular { lambda, eigenvalue })
    };
    let Some(x) = m.clone().lu().try_inverse() else {
        return singular();
    };
    let cond = m.norm() * x.norm();
    if !cond.is_finite() || cond > RESOLVENT_CONDITION_CAP {
        return singular();
    }
    let residual = (&m * &x - identity(n)).norm();
    if residual > 1e-10 * cond.max(1.0) {
        return singular();
    }
    Ok(x)
}

/// `A = V diag(values) V^{-1}`.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub values: Vec<C64>,
    pub vectors: ComplexMatrix,
    pub inverse: ComplexMatrix,
    /// Spectral condition number `κ(V)` with unit-norm columns.
    pub condition: f64,
}

impl EigenDecomposition {
    /// `V diag(f(λ_i)) V^{-1}`.
    pub fn apply<F: Fn(C64) -> C64>(&self, f: F) -> ComplexMatrix {
        let mut scaled = self.vectors.clone();
        for (j, &lambda) in self.values.iter().enumerate() {
            let fj = f(lambda);
            scaled.column_mut(j).iter_mut().for_each(|z| *z *= fj);
        }
        scaled * &self.inverse
    }
}

/// Eigen-decomposition through the Schur form and triangular back-substitution.
pub fn eigen_decomposition(a: &ComplexMatrix) -> Result<EigenDecomposition> {
    check_square(a)?;
    check_finite(a)?;
    let n = a.nrows();
    let (q, t) = Schur::new(a.clone()).unpack();
    let small = f64::EPSILON * t.norm().max(1e-100);
    let mut y = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        let tk = t[(k, k)];
        y[(k, k)] = ONE;
        for i in (0..k).rev() {
            let mut s = ZERO;
            for j in i + 1..=k {
                s += t[(i, j)] * y[(j, k)];
            }
            let mut d = t[(i, i)] - tk;
            if d.norm() < small {
                d = C64::new(small, 0.0);
            }
            y[(i, k)] = -s / d;
        }
    }
    let mut vectors = q * y;
    for mut col in vectors.column_iter_mut() {
        let nrm = col.norm();
        if nrm > 0.0 {
            col /= C64::new(nrm, 0.0);
        }
    }
    if vectors.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::IllConditioned(f64::INFINITY));
    }
    let sv = vectors.singular_values();
    let smin = sv.min();
    let condition = if smin > 0.0 { sv.max() / smin } else { f64::INFINITY };
    let inverse = vectors.clone().try_inverse().ok_or(Error::IllConditioned(condition))?;
    Ok(EigenDecomposition { values: t.diagonal().iter().copied().collect(), vectors, inverse, condition })
}
