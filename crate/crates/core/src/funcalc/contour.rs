use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{poly_eval, principal_pow, unit_projection, ONE};
use crate::error::{Error, Result};
use crate::lpcore::{check_square, identity, pairwise_sum, spectrum, ComplexMatrix, C64};
use crate::quad::{graded_nodes, uniform_nodes, GaussLegendre};
use crate::ritt::{optimal_gamma, StolzDomain, UNIT_EIGENVALUE_TOL};

/// Nodes per Gauss–Legendre panel.
const PANEL_NODES: usize = 20;

/// Quadrature layout on `∂B_γ`.
///
/// Each segment `Γ±` carries `n_seg` nodes on panels graded geometrically toward
/// `λ = 1` by `grading`; the arc `Γ₀` carries `n_arc` nodes on equal panels.
/// Node counts are rounded up to whole 20-point panels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    pub gamma: f64,
    pub n_seg: usize,
    pub n_arc: usize,
    pub grading: f64,
}

impl ContourSpec {
    pub fn new(gamma: f64) -> Self {
        ContourSpec { gamma, n_seg: 200, n_arc: 400, grading: 0.15 }
    }

    /// Picks `γ` and the panel counts for the spectrum of `t`.
    ///
    /// `γ` maximizes the smallest relative clearance `dist(c, ∂B_γ) / |1 − c|` over the
    /// eigenvalues `c ≠ 1`, searched on `[γ_opt + π/36, π/2 − π/36]`. Segment panels
    /// reach below the scale of the eigenvalue closest to 1 and the scale where
    /// `t^α` falls under `1e−15`.
    pub fn for_operator(t: &ComplexMatrix, alpha: f64) -> Result<Self> {
        let spec = spectrum(t)?;
        let interior: Vec<C64> = spec.into_iter().filter(|c| (c - ONE).norm() >= UNIT_EIGENVALUE_TOL).collect();
        let g0 = optimal_gamma(t, 1e-10)?;
        let margin = PI / 36.0;
        let lo = (g0 + margin).min(PI / 2.0 - margin);
        let hi = PI / 2.0 - margin;
        let steps = 64;
        let mut best = (f64::NEG_INFINITY, lo);
        for k in 0..=steps {
            let g = lo + (hi - lo) * k as f64 / steps as f64;
            let d = StolzDomain::new(g)?;
            if !interior.iter().all(|&c| d.contains(c)) {
                continue;
            }
            let clearance =
                interior.iter().map(|&c| d.boundary_distance(c) / (ONE - c).norm()).fold(f64::INFINITY, f64::min);
            if clearance > best.0 {
                best = (clearance, g);
            }
        }
        let gamma = best.1;
        let grading = 0.15f64;
        let closest = interior.iter().map(|c| (ONE - c).norm()).fold(1.0, f64::min);
        let scale_panels = ((closest.ln() - 3.0) / grading.ln()).ceil().max(0.0) as usize;
        let power_panels = ((-15.0 * 10f64.ln()) / ((alpha + 1.0).min(4.0) * grading.ln())).ceil() as usize;
        let panels = scale_panels.max(power_panels).max(10) + 2;
        Ok(ContourSpec { gamma, n_seg: panels * PANEL_NODES, n_arc: 400, grading })
    }

    fn panels(nodes: usize) -> usize {
        nodes.div_ceil(PANEL_NODES).max(1)
    }
}

/// `(λ, w)` pairs with `Σ w f(λ) ≈ (1/2πi) ∮ f(λ) (1−λ)^α dλ` over `∂B_γ`, counterclockwise.
fn contour_nodes(spec: &ContourSpec, alpha: f64) -> Result<Vec<(C64, C64)>> {
    let domain = StolzDomain::new(spec.gamma)?;
    let rule = GaussLegendre::new(PANEL_NODES);
    let g = spec.gamma;
    let two_pi_i = C64::new(0.0, 2.0 * PI);
    let seg = graded_nodes(domain.segment_length(), spec.grading, ContourSpec::panels(spec.n_seg), &rule);
    let mut out = Vec::with_capacity(2 * seg.len() + spec.n_arc);
    // Γ₊: λ = 1 − t e^{−iγ}, dλ = −e^{−iγ} dt, (1−λ)^α = t^α e^{−iαγ}.
    let dir_plus = C64::from_polar(1.0, -g);
    let pow_plus = C64::from_polar(1.0, -alpha * g);
    for &(t, w) in &seg {
        let lambda = ONE - dir_plus * t;
        out.push((lambda, -dir_plus * pow_plus * (t.powf(alpha) * w) / two_pi_i));
    }
    // Γ₀: λ = sin γ e^{iφ}, dλ = iλ dφ.
    let (lo, hi) = domain.arc_range();
    for (phi, w) in uniform_nodes(lo, hi, ContourSpec::panels(spec.n_arc), &rule) {
        let lambda = domain.arc(phi);
        let d = C64::new(0.0, 1.0) * lambda * w;
        out.push((lambda, principal_pow(ONE - lambda, alpha) * d / two_pi_i));
    }
    // Γ₋: λ = 1 − t e^{iγ} with t running from cos γ down to 0.
    let dir_minus = C64::from_polar(1.0, g);
    let pow_minus = C64::from_polar(1.0, alpha * g);
    for &(t, w) in seg.iter().rev() {
        let lambda = ONE - dir_minus * t;
        out.push((lambda, dir_minus * pow_minus * (t.powf(alpha) * w) / two_pi_i));
    }
    Ok(out)
}

fn contour_integral(t: &ComplexMatrix, coeffs: &[C64], alpha: f64, spec: &ContourSpec) -> Result<ComplexMatrix> {
    let n = t.nrows();
    let nodes = contour_nodes(spec, alpha)?;
    let terms: Vec<ComplexMatrix> = nodes
        .par_iter()
        .map(|&(lambda, w)| {
            let m = identity(n) * lambda - t;
            let r = m.lu().try_inverse().ok_or_else(|| Error::Singular { lambda, eigenvalue: lambda })?;
            Ok(r * (w * poly_eval(coeffs, lambda)))
        })
        .collect::<Result<_>>()?;
    Ok(pairwise_sum(terms).unwrap_or_else(|| ComplexMatrix::zeros(n, n)))
}

/// `φ(T)(I − T)^α` from the Cauchy integral over `∂B_γ` with the principal branch.
///
/// When 1 is an eigenvalue the integral is taken for `T(I − P)`, `P` the projection onto
/// `Ker(I − T)`, and `φ(0)P` is subtracted.
pub fn contour_phi_fracpow(t: &ComplexMatrix, coeffs: &[C64], alpha: f64, spec: &ContourSpec) -> Result<ComplexMatrix> {
    check_square(t)?;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("exponent alpha = {alpha} must be positive")));
    }
    let domain = StolzDomain::new(spec.gamma)?;
    let proj = unit_projection(t, 1e-12)?;
    let n = t.nrows();
    let (tc, p) = if proj.projection.iter().all(|z| *z == C64::new(0.0, 0.0)) {
        (t.clone(), None)
    } else {
        (t * (identity(n) - &proj.projection), Some(proj.projection))
    };
    for c in spectrum(&tc)? {
        if !domain.contains(c) {
            return Err(Error::Spectrum(format!(
                "eigenvalue {c} is not enclosed by the contour with gamma = {:.6}",
                spec.gamma
            )));
        }
    }
    let mut out = contour_integral(&tc, coeffs, alpha, spec)?;
    if let Some(p) = p {
        out -= p * poly_eval(coeffs, C64::new(0.0, 0.0));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::{frac_power_eig, frac_power_series, poly_apply};
    use super::*;
    use crate::lpcore::{complex_diagonal, real_diagonal, seeded_rng, spectral_norm};
    use rand::Rng;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn contour_examples() {
        let spec = ContourSpec::new(PI / 4.0);
        let z = contour_phi_fracpow(&ComplexMatrix::zeros(2, 2), &[ONE], 1.0, &spec).unwrap();
        assert!((z - identity(2)).norm() < 1e-12);
        let cs = [0.1, 0.5, 0.8];
        let spec = ContourSpec::for_operator(&real_diagonal(&cs), 0.5).unwrap();
        let r = contour_phi_fracpow(&real_diagonal(&cs), &[ONE], 0.5, &spec).unwrap();
        for (i, &ci) in cs.iter().enumerate() {
            assert!((r[(i, i)] - (1.0 - ci).sqrt()).norm() < 1e-12, "{}", r[(i, i)]);
        }
        let half = real_diagonal(&[0.5]);
        let r = contour_phi_fracpow(&half, &[ZERO_C, ZERO_C, ONE], 2.0, &ContourSpec::new(PI / 4.0)).unwrap();
        assert!((r[(0, 0)] - 0.0625).norm() < 1e-12);
    }

    const ZERO_C: C64 = C64::new(0.0, 0.0);

    #[test]
    fn contour_rejects_uncovered_spectrum() {
        let t = complex_diagonal(&[C64::new(0.0, 0.9)]);
        assert!(matches!(contour_phi_fracpow(&t, &[ONE], 0.5, &ContourSpec::new(0.3)), Err(Error::Spectrum(_))));
    }

    #[test]
    fn contour_with_unit_eigenvalue() {
        let t = real_diagonal(&[1.0, 0.6, 0.2]);
        let spec = ContourSpec::for_operator(&t, 0.5).unwrap();
        let r = contour_phi_fracpow(&t, &[ONE, c(2.0)], 0.5, &spec).unwrap();
        assert!(r[(0, 0)].norm() < 1e-12);
        assert!((r[(1, 1)] - 2.2 * 0.4f64.sqrt()).norm() < 1e-12);
        assert!((r[(2, 2)] - 1.4 * 0.8f64.sqrt()).norm() < 1e-12);
    }

    #[test]
    fn three_routes_agree_on_random_operator() {
        let mut rng = seeded_rng(17, 0);
        let eig: Vec<f64> = (0..6).map(|_| rng.random_range(0.0..0.9)).collect();
        let v = crate::lpcore::complex_gaussian_matrix(&mut rng, 6, 6) + identity(6) * c(1.5);
        let t = &v * real_diagonal(&eig) * v.clone().try_inverse().unwrap();
        for &alpha in &[0.5, 1.5] {
            let spec = ContourSpec::for_operator(&t, alpha).unwrap();
            let a = contour_phi_fracpow(&t, &[ONE], alpha, &spec).unwrap();
            let b = frac_power_series(&t, alpha, 1e-15, 5000).unwrap().value;
            let e = frac_power_eig(&t, alpha).unwrap();
            assert!(spectral_norm(&(&a - &b)) < 1e-8);
            assert!(spectral_norm(&(&a - &e)) < 1e-8);
        }
    }

    #[test]
    fn contour_with_polynomial_factor_matches_product() {
        let mut rng = seeded_rng(4, 0);
        let eig: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..0.9)).collect();
        let v = crate::lpcore::complex_gaussian_matrix(&mut rng, 4, 4) + identity(4) * c(1.5);
        let t = &v * real_diagonal(&eig) * v.clone().try_inverse().unwrap();
        let phi = [c(0.3), C64::new(-1.0, 0.5), c(2.0)];
        let spec = ContourSpec::for_operator(&t, 0.5).unwrap();
        let lhs = contour_phi_fracpow(&t, &phi, 0.5, &spec).unwrap();
        let rhs = poly_apply(&t, &phi) * frac_power_eig(&t, 0.5).unwrap();
        assert!(spectral_norm(&(lhs - rhs)) < 1e-7);
    }
}
