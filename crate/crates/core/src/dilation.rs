//! Loose dilations `Tⁿ = QUⁿJ` of Ritt operators through `Z = X ⊕_p X(ℓ²)`, with the
//! bilateral shift modeled as a cyclic shift on a ring of `L` slots.
//!
//! A vector of `Z` is stored as the `n` coordinates of the first summand followed, for
//! each coordinate `i`, by its `L` ring slots: index `n + i·L + s` holds slot `s`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcalc::{frac_power, unit_projection};
use crate::lpcore::{
    identity, map_norm_lower, map_norm_upper, op_pnorm_upper, spectral_radius, spectrum, ComplexMatrix, FiberNorm,
    LinearMap, LpOperator, NormBudget, C64,
};
use crate::ritt::UNIT_EIGENVALUE_TOL;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DilationBundle {
    #[serde(with = "crate::lpcore::matrix_serde")]
    pub t: ComplexMatrix,
    pub p: f64,
    /// Number of sequence terms kept.
    pub k: usize,
    /// Ring length.
    pub l: usize,
    /// Largest verified power.
    pub m: usize,
    /// `J: X → Z`.
    #[serde(with = "crate::lpcore::matrix_serde")]
    pub j: ComplexMatrix,
    /// `Q = ΘJ₂*: Z → X`.
    #[serde(with = "crate::lpcore::matrix_serde")]
    pub q: ComplexMatrix,
    /// `J₂: X' → Z'`.
    #[serde(with = "crate::lpcore::matrix_serde")]
    pub j2: ComplexMatrix,
    /// `Θ = (I + T)` on the range part, identity on `Ker(I − T)`.
    #[serde(with = "crate::lpcore::matrix_serde")]
    pub theta: ComplexMatrix,
    /// Projection onto `Ker(I − T)`.
    #[serde(with = "crate::lpcore::matrix_serde")]
    pub projection: ComplexMatrix,
    /// Upper bounds for `‖T^m − QU^mJ‖_p`, `m = 0..=M`.
    pub residuals: Vec<f64>,
    pub warnings: Vec<String>,
}

impl DilationBundle {
    pub fn dim(&self) -> usize {
        self.t.nrows()
    }

    /// Dimension of `Z`.
    pub fn z_dim(&self) -> usize {
        self.dim() * (1 + self.l)
    }

    pub fn z_norm(&self) -> Result<FiberNorm> {
        z_norm(self.p, self.dim(), self.l)
    }

    /// The shift `U^m` for any integer `m`.
    pub fn shift(&self, m: i64) -> RingShift {
        RingShift { n: self.dim(), l: self.l, m }
    }
}

fn z_norm(p: f64, n: usize, l: usize) -> Result<FiberNorm> {
    let mut fibers = vec![1; n];
    fibers.extend(std::iter::repeat_n(l, n));
    FiberNorm::new(p, fibers)
}

/// `U^m` on `Z`: identity on the first summand, slot `s` reads slot `s + m mod L`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RingShift {
    pub n: usize,
    pub l: usize,
    pub m: i64,
}

impl RingShift {
    fn source(&self, s: usize, m: i64) -> usize {
        (s as i64 + m).rem_euclid(self.l as i64) as usize
    }

    fn permute(&self, z: &[C64], m: i64) -> Vec<C64> {
        let mut out = z.to_vec();
        for i in 0..self.n {
            let base = self.n + i * self.l;
            for s in 0..self.l {
                out[base + s] = z[base + self.source(s, m)];
            }
        }
        out
    }

    /// `U^m A` for a matrix `A` with rows indexed by `Z`.
    pub fn apply_rows(&self, a: &ComplexMatrix) -> ComplexMatrix {
        let mut out = a.clone();
        for i in 0..self.n {
            let base = self.n + i * self.l;
            for s in 0..self.l {
                out.set_row(base + s, &a.row(base + self.source(s, self.m)));
            }
        }
        out
    }
}

impl LinearMap for RingShift {
    fn nrows(&self) -> usize {
        self.n * (1 + self.l)
    }

    fn ncols(&self) -> usize {
        self.n * (1 + self.l)
    }

    fn apply(&self, x: &[C64]) -> Vec<C64> {
        self.permute(x, self.m)
    }

    fn apply_adjoint(&self, y: &[C64]) -> Vec<C64> {
        self.permute(y, -self.m)
    }
}

/// Stacks `P` over the slots `B_s = A^s F (I − P)`, `s < K`, into a map `X → Z`.
fn embedding(a: &ComplexMatrix, f: &ComplexMatrix, proj: &ComplexMatrix, k: usize, l: usize) -> ComplexMatrix {
    let n = a.nrows();
    let mut out = ComplexMatrix::zeros(n * (1 + l), n);
    out.view_mut((0, 0), (n, n)).copy_from(proj);
    let mut block = f * (identity(n) - proj);
    for s in 0..k {
        for i in 0..n {
            out.set_row(n + i * l + s, &block.row(i));
        }
        block = a * block;
    }
    out
}

/// Builds `J`, `Q` and the ring shift for `T` acting on ℓᵖ_n.
pub fn build_dilation(t: &LpOperator, k: usize, m: usize, l: usize) -> Result<DilationBundle> {
    if k == 0 {
        return Err(Error::InvalidArgument("at least one sequence term is required".into()));
    }
    if l < k + m + 1 {
        return Err(Error::InvalidArgument(format!("ring length {l} is below K + M + 1 = {}", k + m + 1)));
    }
    let a = t.matrix();
    let n = t.dim();
    for c in spectrum(a)? {
        if c.norm() >= 1.0 - 1e-12 && (c - C64::new(1.0, 0.0)).norm() >= UNIT_EIGENVALUE_TOL {
            return Err(Error::Spectrum(format!("eigenvalue {c} lies on or outside the unit circle")));
        }
    }
    let proj = unit_projection(a, 1e-12)?.projection;
    let f = frac_power(a, 0.5)?;
    let j = embedding(a, &f, &proj, k, l);
    let j2 = embedding(&a.adjoint(), &f.adjoint(), &proj.adjoint(), k, l);
    let comp = identity(n) - &proj;
    let theta = (identity(n) + a) * &comp + &proj;
    let q = &theta * j2.adjoint();
    let mut warnings = Vec::new();
    let rho = spectral_radius(&(a * &comp))?;
    if rho.powi(k as i32) > 1e-6 {
        warnings.push(format!(
            "spectral radius {rho:.6} off the kernel leaves a tail of {:.3e} at K = {k}",
            rho.powi(k as i32)
        ));
    }
    let mut bundle = DilationBundle {
        t: a.clone(),
        p: t.p(),
        k,
        l,
        m,
        j,
        q,
        j2,
        theta,
        projection: proj,
        residuals: Vec::new(),
        warnings,
    };
    bundle.residuals = (0..=m).into_par_iter().map(|mm| power_residual(&bundle, mm)).collect::<Result<_>>()?;
    Ok(bundle)
}

fn matrix_power(a: &ComplexMatrix, m: usize) -> ComplexMatrix {
    let mut out = identity(a.nrows());
    for _ in 0..m {
        out = &out * a;
    }
    out
}

/// Upper bound for `‖T^m − QU^mJ‖_p`.
pub fn power_residual(b: &DilationBundle, m: usize) -> Result<f64> {
    let shifted = b.shift(m as i64).apply_rows(&b.j);
    let diff = matrix_power(&b.t, m) - &b.q * shifted;
    op_pnorm_upper(&diff, b.p)
}

/// Upper bound for `‖ΘJ₂*J₁ − I‖_p`.
pub fn verify_duality_identity(b: &DilationBundle) -> Result<f64> {
    let diff = &b.theta * b.j2.adjoint() * &b.j - identity(b.dim());
    op_pnorm_upper(&diff, b.p)
}

/// Upper bound for `‖PU^nJ₁ − J₁Tⁿ‖` as maps `ℓᵖ_n → Z`, where `P` clears the last `M`
/// ring slots, which stand for the negative indices.
pub fn verify_intertwining(b: &DilationBundle, n_pow: usize) -> Result<f64> {
    if n_pow > b.m {
        return Err(Error::InvalidArgument(format!("power {n_pow} exceeds the verified range M = {}", b.m)));
    }
    let n = b.dim();
    let mut lhs = b.shift(n_pow as i64).apply_rows(&b.j);
    for i in 0..n {
        for s in b.l - b.m..b.l {
            lhs.row_mut(n + i * b.l + s).fill(C64::new(0.0, 0.0));
        }
    }
    let diff = lhs - &b.j * matrix_power(&b.t, n_pow);
    map_norm_upper(&diff, &FiberNorm::lp(b.p, n)?, &b.z_norm()?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DilationReport {
    pub p: f64,
    pub k: usize,
    pub m: usize,
    pub l: usize,
    /// Searched lower bound for `‖J‖`.
    pub j_norm: f64,
    /// Searched lower bound for `‖Q‖`.
    pub q_norm: f64,
    /// Largest searched `‖U^m‖` over `|m| ≤ 2M`.
    pub u_power_sup: f64,
    pub residuals: Vec<f64>,
    pub duality_residual: f64,
    pub max_residual: f64,
    pub tol: f64,
    pub verified: bool,
    pub warnings: Vec<String>,
}

pub fn dilation_report(b: &DilationBundle, tol: f64, budget: &NormBudget, seed: u64) -> Result<DilationReport> {
    let x_norm = FiberNorm::lp(b.p, b.dim())?;
    let zn = b.z_norm()?;
    let j_norm = map_norm_lower(&b.j, &x_norm, &zn, budget, seed, &[])?.value;
    let q_norm = map_norm_lower(&b.q, &zn, &x_norm, budget, seed, &[])?.value;
    let range = 2 * b.m as i64;
    let u_power_sup = (-range..=range)
        .into_par_iter()
        .map(|mm| map_norm_lower(&b.shift(mm), &zn, &zn, budget, seed, &[]).map(|e| e.value))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let duality_residual = verify_duality_identity(b)?;
    let max_residual = b.residuals.iter().copied().fold(0.0, f64::max);
    let verified = max_residual < tol && duality_residual < tol && u_power_sup <= 1.0 + 1e-12;
    Ok(DilationReport {
        p: b.p,
        k: b.k,
        m: b.m,
        l: b.l,
        j_norm,
        q_norm,
        u_power_sup,
        residuals: b.residuals.clone(),
        duality_residual,
        max_residual,
        tol,
        verified,
        warnings: b.warnings.clone(),
    })
}

/// Searched `‖J‖` as a function of the number of sequence terms.
pub fn j_norm_profile(t: &LpOperator, ks: &[usize], budget: &NormBudget, seed: u64) -> Result<Vec<(usize, f64)>> {
    ks.iter()
        .map(|&k| {
            let b = build_dilation(t, k, 0, k + 1)?;
            let v = map_norm_lower(&b.j, &FiberNorm::lp(b.p, b.dim())?, &b.z_norm()?, budget, seed, &[])?.value;
            Ok((k, v))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lpcore::{complex_gaussian_vec, real_diagonal, seeded_rng};
    use proptest::prelude::*;

    fn op(c: &[f64], p: f64) -> LpOperator {
        LpOperator::new(real_diagonal(c), p).unwrap()
    }

    #[test]
    fn zero_and_identity() {
        let b = build_dilation(&LpOperator::new(ComplexMatrix::zeros(2, 2), 4.0).unwrap(), 2, 3, 6).unwrap();
        assert!(b.residuals.iter().all(|&r| r < 1e-12));
        assert_eq!(verify_duality_identity(&b).unwrap(), 0.0);
        assert_eq!(verify_intertwining(&b, 0).unwrap(), 0.0);
        assert!(verify_intertwining(&b, 1).unwrap() < 1e-15);
        let b = build_dilation(&op(&[1.0, 1.0], 3.0), 2, 3, 6).unwrap();
        assert!(b.residuals.iter().all(|&r| r < 1e-12));
        assert!(verify_duality_identity(&b).unwrap() < 1e-12);
        let r = dilation_report(&b, 1e-10, &NormBudget::default(), 0).unwrap();
        assert!(r.verified);
    }

    #[test]
    fn diagonal_fixture_is_verified() {
        let b = build_dilation(&op(&[0.5, 0.9], 4.0), 256, 8, 272).unwrap();
        assert!(b.residuals.iter().all(|&r| r <= 1e-6));
        assert!(verify_duality_identity(&b).unwrap() <= 1e-6);
        assert!(verify_intertwining(&b, 4).unwrap() <= 1e-6);
        assert!(verify_intertwining(&b, 9).is_err());
        let r = dilation_report(&b, 1e-6, &NormBudget::default(), 1).unwrap();
        assert!(r.verified && (r.u_power_sup - 1.0).abs() <= 1e-12, "{r:?}");
        assert!(b.warnings.is_empty());
    }

    #[test]
    fn duality_residual_matches_geometric_tail() {
        let k = 20;
        let b = build_dilation(&op(&[0.5, 0.9], 2.0), k, 2, k + 3).unwrap();
        let oracle = 0.9f64.powi(2 * k as i32);
        let got = verify_duality_identity(&b).unwrap();
        assert!((got - oracle).abs() < 1e-12 * oracle.max(1e-300) + 1e-15, "{got} {oracle}");
    }

    #[test]
    fn residuals_decay_with_k() {
        let t = op(&[0.3, 0.8], 3.0);
        let a = build_dilation(&t, 16, 4, 21).unwrap();
        let b = build_dilation(&t, 32, 4, 37).unwrap();
        let ra = a.residuals.iter().copied().fold(0.0, f64::max);
        let rb = b.residuals.iter().copied().fold(0.0, f64::max);
        assert!(rb <= 10.0 * ra * 0.8f64.powi(32));
        assert!(build_dilation(&t, 16, 4, 10).is_err());
        assert!(!a.warnings.is_empty());
    }

    #[test]
    fn geometric_series_telescopes() {
        let mut rng = seeded_rng(5, 0);
        let g = crate::lpcore::complex_gaussian_matrix(&mut rng, 4, 4) * C64::new(0.2, 0.0);
        let sq = &g * &g;
        for n in [1usize, 7, 64] {
            let mut sum = ComplexMatrix::zeros(4, 4);
            let mut pw = identity(4);
            for _ in 0..n {
                sum += &pw * (identity(4) - &sq);
                pw = &pw * &sq;
            }
            assert!((sum - (identity(4) - pw)).norm() < 1e-10);
        }
    }

    #[test]
    fn adjoint_fractional_power_is_conjugate_transpose() {
        let mut rng = seeded_rng(6, 0);
        let v = crate::lpcore::complex_gaussian_matrix(&mut rng, 5, 5) + identity(5) * C64::new(2.0, 0.0);
        let t = &v * real_diagonal(&[0.1, 0.4, 0.6, 0.85, 1.0]) * v.clone().try_inverse().unwrap();
        let f = frac_power(&t, 0.5).unwrap();
        let fa = frac_power(&t.adjoint(), 0.5).unwrap();
        assert!((fa - f.adjoint()).norm() < 1e-9);
    }

    #[test]
    fn refuses_unit_circle_eigenvalues() {
        assert!(matches!(build_dilation(&op(&[-1.0, 0.5], 2.0), 4, 1, 6), Err(Error::Spectrum(_))));
    }

    #[test]
    fn j_norm_profile_is_monotone() {
        let prof = j_norm_profile(&op(&[0.2, 0.95], 3.0), &[4, 16, 64], &NormBudget::default(), 0).unwrap();
        assert!(prof.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-12));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn shift_is_isometric(seed in 0u64..1000, m in -16i64..=16) {
            let (n, l, p) = (3, 20, 3.5);
            let z = complex_gaussian_vec(&mut seeded_rng(seed, 0), n * (1 + l));
            let u = RingShift { n, l, m };
            let zn = z_norm(p, n, l).unwrap();
            let a = zn.norm(&u.apply(&z));
            let b = zn.norm(&z);
            prop_assert!((a - b).abs() <= 1e-12 * b);
        }
    }
}
