//! Convolution norms `‖φ‖_p` of polynomials on ℓᵖ(ℤ) through circulants, dyadic arcs and
//! the Marcinkiewicz functional, the lens domains `𝔻_θ`, and polynomial-boundedness ratios.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcalc::poly_apply;
use crate::lpcore::estimate::op_pnorm_warm;
use crate::lpcore::{conjugate_exponent, ComplexMatrix, FiberNorm, LinearMap, LpOperator, NormBudget, C64};
use crate::quad::{uniform_nodes, GaussLegendre};

/// `φ(z) = Σ_{k≥0} d_k z^k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaurentPolynomial {
    pub coeffs: Vec<C64>,
}

impl LaurentPolynomial {
    pub fn new(coeffs: Vec<C64>) -> Self {
        LaurentPolynomial { coeffs }
    }

    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![C64::new(0.0, 0.0); k + 1];
        coeffs[k] = C64::new(1.0, 0.0);
        LaurentPolynomial { coeffs }
    }

    /// Index of the last nonzero coefficient; 0 for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|c| *c != C64::new(0.0, 0.0)).unwrap_or(0)
    }

    pub fn eval(&self, z: C64) -> C64 {
        crate::funcalc::poly_eval(&self.coeffs, z)
    }

    pub fn derivative(&self, z: C64) -> C64 {
        self.coeffs.iter().enumerate().skip(1).rev().fold(C64::new(0.0, 0.0), |acc, (k, &c)| acc * z + c * k as f64)
    }

    /// `Σ|d_k|`, the ℓ¹ (and an upper bound for every ℓᵖ) convolution norm.
    pub fn l1_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    /// The `N × N` circulant `(φ(S)x)_i = Σ_k d_k x_{i−k mod N}`.
    pub fn circulant(&self, n: usize) -> Result<ComplexMatrix> {
        if n <= self.degree() {
            return Err(Error::InvalidArgument(format!("N = {n} must exceed the degree {}", self.degree())));
        }
        let mut m = ComplexMatrix::zeros(n, n);
        for (k, &d) in self.coeffs.iter().enumerate() {
            for j in 0..n {
                m[((j + k) % n, j)] += d;
            }
        }
        Ok(m)
    }

    /// `φ(T)`.
    pub fn apply(&self, t: &ComplexMatrix) -> ComplexMatrix {
        poly_apply(t, &self.coeffs)
    }
}

fn roots_of_unity_max(phi: &LaurentPolynomial, n: usize) -> f64 {
    (0..n).map(|j| phi.eval(C64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64)).norm()).fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftNorm {
    pub n: usize,
    pub value: f64,
    pub witness: Vec<C64>,
}

fn shift_pnorm_warm(
    phi: &LaurentPolynomial,
    p: f64,
    n: usize,
    budget: &NormBudget,
    seed: u64,
    warm: &[Vec<C64>],
) -> Result<ShiftNorm> {
    let c = phi.circulant(n)?;
    if !(p > 1.0 && p.is_finite()) {
        let value = if p == 2.0 { roots_of_unity_max(phi, n) } else { phi.l1_norm() };
        if p == 1.0 || p.is_infinite() {
            return Ok(ShiftNorm { n, value, witness: vec![] });
        }
        return Err(Error::InvalidExponent(p));
    }
    if p == 2.0 {
        return Ok(ShiftNorm { n, value: roots_of_unity_max(phi, n), witness: vec![] });
    }
    let q = conjugate_exponent(p);
    let primal = op_pnorm_warm(&c, p, budget, seed, warm)?;
    let ca = c.adjoint();
    let lift = |m: &ComplexMatrix, x: &[C64], r: f64| FiberNorm::lp(r, n).map(|f| f.dual_vector(&m.apply(x)));
    let dual_start = if primal.witness.is_empty() { vec![] } else { vec![lift(&c, &primal.witness, p)?] };
    let dual = op_pnorm_warm(&ca, q, budget, seed, &dual_start)?;
    let mut best = ShiftNorm { n, value: primal.value, witness: primal.witness.clone() };
    if dual.value > best.value && !dual.witness.is_empty() {
        let back = lift(&ca, &dual.witness, q)?;
        let again = op_pnorm_warm(&c, p, budget, seed, &[back])?;
        best = ShiftNorm { n, value: again.value.max(primal.value), witness: again.witness };
    }
    Ok(best)
}

/// ℓᵖ norm of the circulant convolution by `φ` on `ℤ_N`, a lower bound for `‖φ‖_p` on ℓᵖ(ℤ).
///
/// Exact for `p ∈ {1, 2, ∞}`; otherwise a searched lower bound, also run on the adjoint
/// at `p'` and carried back.
pub fn shift_pnorm(phi: &LaurentPolynomial, p: f64, n: usize, budget: &NormBudget, seed: u64) -> Result<f64> {
    Ok(shift_pnorm_warm(phi, p, n, budget, seed, &[])?.value)
}

/// `shift_pnorm` along `N = n0, 2n0, 4n0, ...`, each size warm-started from the periodic
/// extension of the previous witness, so the values are nondecreasing.
pub fn shift_pnorm_doublings(
    phi: &LaurentPolynomial,
    p: f64,
    n0: usize,
    doublings: usize,
    budget: &NormBudget,
    seed: u64,
) -> Result<Vec<ShiftNorm>> {
    let mut out: Vec<ShiftNorm> = Vec::with_capacity(doublings + 1);
    let mut n = n0;
    for _ in 0..=doublings {
        let warm: Vec<Vec<C64>> = match out.last() {
            Some(prev) if !prev.witness.is_empty() => vec![prev.witness.iter().chain(&prev.witness).copied().collect()],
            _ => vec![],
        };
        let mut cur = shift_pnorm_warm(phi, p, n, budget, seed, &warm)?;
        if let Some(prev) = out.last() {
            cur.value = cur.value.max(prev.value);
        }
        out.push(cur);
        n *= 2;
    }
    Ok(out)
}

pub fn shift_table_csv(rows: &[ShiftNorm]) -> String {
    let mut s = String::from("N,shift_pnorm\n");
    for r in rows {
        let _ = writeln!(s, "{},{:e}", r.n, r.value);
    }
    s
}

/// `Δ_j = {e^{it} : t ∈ −I_j ∪ I_j}`, with `I_j = [lo, hi)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadicArc {
    pub j: i32,
    pub lo: f64,
    pub hi: f64,
}

impl DyadicArc {
    pub fn new(j: i32) -> Self {
        if j >= 0 {
            DyadicArc { j, lo: PI - PI / 2f64.powi(j + 1), hi: PI - PI / 2f64.powi(j + 2) }
        } else {
            DyadicArc { j, lo: 2f64.powi(j - 1) * PI, hi: 2f64.powi(j) * PI }
        }
    }

    pub fn contains(&self, t: f64) -> bool {
        self.lo <= t && t < self.hi
    }

    /// Total length of `−I_j ∪ I_j`.
    pub fn length(&self) -> f64 {
        2.0 * (self.hi - self.lo)
    }
}

pub fn dyadic_arcs(j_min: i32, j_max: i32) -> Result<Vec<DyadicArc>> {
    if j_min > j_max {
        return Err(Error::InvalidArgument("j_min must not exceed j_max".into()));
    }
    Ok((j_min..=j_max).map(DyadicArc::new).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarcinkiewiczReport {
    /// Sampled `‖φ‖_{L^∞(𝕋)}`.
    pub sup_norm: f64,
    /// `(j, var(φ, Δ_j))`.
    pub variations: Vec<(i32, f64)>,
    /// `sup_norm + max_j var`.
    pub value: f64,
}

impl MarcinkiewiczReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("j,variation\n");
        for (j, v) in &self.variations {
            let _ = writeln!(s, "{j},{v:e}");
        }
        s
    }
}

fn finish_marcinkiewicz(sup_norm: f64, variations: Vec<(i32, f64)>) -> MarcinkiewiczReport {
    let vmax = variations.iter().map(|v| v.1).fold(0.0, f64::max);
    MarcinkiewiczReport { sup_norm, variations, value: sup_norm + vmax }
}

/// `‖φ‖_∞ + sup_j ∫_{−I_j ∪ I_j} |φ'(e^{it})| dt` with Gauss–Legendre panels per arc.
pub fn marcinkiewicz_functional(phi: &LaurentPolynomial, arcs: &[DyadicArc], panels: usize) -> MarcinkiewiczReport {
    let rule = GaussLegendre::new(16);
    let variations = arcs
        .iter()
        .map(|a| {
            let v: f64 = [1.0, -1.0]
                .iter()
                .map(|&sgn| {
                    uniform_nodes(a.lo, a.hi, panels.max(1), &rule)
                        .iter()
                        .map(|&(t, w)| w * phi.derivative(C64::from_polar(1.0, sgn * t)).norm())
                        .sum::<f64>()
                })
                .sum();
            (a.j, v)
        })
        .collect();
    let samples = 4096 * (phi.degree() + 1);
    let sup_norm = (0..samples)
        .map(|k| phi.eval(C64::from_polar(1.0, 2.0 * PI * k as f64 / samples as f64)).norm())
        .fold(0.0, f64::max);
    finish_marcinkiewicz(sup_norm, variations)
}

/// The functional for a symbol known only through samples, with the variation summed over
/// `density` points per half-arc.
pub fn marcinkiewicz_sampled<F: Fn(f64) -> C64 + Sync>(
    symbol: F,
    arcs: &[DyadicArc],
    density: usize,
) -> MarcinkiewiczReport {
    let density = density.max(2);
    let variations = arcs
        .par_iter()
        .map(|a| {
            let mut v = 0.0;
            for sgn in [1.0, -1.0] {
                let mut prev = symbol(sgn * a.lo);
                for k in 1..=density {
                    let t = a.lo + (a.hi - a.lo) * k as f64 / density as f64;
                    let cur = symbol(sgn * t);
                    v += (cur - prev).norm();
                    prev = cur;
                }
            }
            (a.j, v)
        })
        .collect();
    let samples = 4096 * 8;
    let sup_norm = (0..samples).map(|k| symbol(-PI + 2.0 * PI * k as f64 / samples as f64).norm()).fold(0.0, f64::max);
    finish_marcinkiewicz(sup_norm, variations)
}

/// `𝔻_θ = D(−i cot θ, 1/sin θ) ∪ D(i cot θ, 1/sin θ)` for `θ ∈ (π/2, π)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DTheta {
    pub theta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DThetaChecks {
    pub theta: f64,
    /// `r(t)/t` at `t = 1e−5`, to compare with `−cos θ`.
    pub slope_at_1e5: f64,
    /// Smallest `j₀ ≥ 1` with `r(t) > −cos(θ) t` on the grid `t ∈ [1e−6, π/2^{j₀}]`.
    pub j0: i32,
    pub slope_violations: usize,
    /// Samples `(t, boundary point)` for which `D(e^{it}, −cos θ · π/2^{|j|+1})` escapes `𝔻_θ`.
    pub disc_samples: usize,
    pub disc_violations: usize,
    /// Boundary samples of `𝔻_θ` whose image `1 − z` leaves the closed sector `Σ_θ`,
    /// and interior samples that leave the open sector.
    pub sector_samples: usize,
    pub sector_violations: usize,
}

impl DTheta {
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta > PI / 2.0 && theta < PI) {
            return Err(Error::InvalidArgument(format!("theta = {theta} must lie in (pi/2, pi)")));
        }
        Ok(DTheta { theta })
    }

    pub fn radius(&self) -> f64 {
        1.0 / self.theta.sin()
    }

    /// The two centers `∓i cot θ`; the first lies in the upper half-plane.
    pub fn centers(&self) -> [C64; 2] {
        let c = C64::new(0.0, -1.0 / self.theta.tan());
        [c, -c]
    }

    pub fn contains(&self, z: C64) -> bool {
        let r = self.radius();
        self.centers().iter().any(|c| (z - c).norm() < r)
    }

    /// Radius of the largest disc centered at `e^{it}` inside `D(−i cot θ, 1/sin θ)`.
    pub fn r(&self, t: f64) -> f64 {
        self.radius() - (C64::from_polar(1.0, t) - self.centers()[0]).norm()
    }

    pub fn checks(&self, samples: usize) -> DThetaChecks {
        let neg_cos = -self.theta.cos();
        let grid = |hi: f64| {
            let (a, b) = (1e-6f64.ln(), hi.ln());
            (0..samples).map(move |k| (a + (b - a) * k as f64 / (samples - 1) as f64).exp())
        };
        let mut j0 = 1;
        while j0 < 60 && grid(PI / 2f64.powi(j0)).any(|t| self.r(t) <= neg_cos * t) {
            j0 += 1;
        }
        let slope_violations = grid(PI / 2f64.powi(j0)).filter(|&t| self.r(t) <= neg_cos * t).count();
        let arcs: Vec<DyadicArc> = (-(j0 + 12)..=-j0).map(DyadicArc::new).collect();
        let per_arc = samples.div_ceil(arcs.len());
        let mut disc_samples = 0;
        let mut disc_violations = 0;
        for a in &arcs {
            let rad = neg_cos * PI / 2f64.powi(a.j.abs() + 1);
            for k in 0..per_arc {
                let t = a.lo + (a.hi - a.lo) * (k as f64 + 0.5) / per_arc as f64;
                let center = C64::from_polar(1.0, t);
                let phi = 2.0 * PI * k as f64 / per_arc as f64;
                let edge = center + C64::from_polar(rad * (1.0 - 1e-12), phi);
                disc_samples += 1;
                if !(self.r(t) > rad && self.contains(edge)) {
                    disc_violations += 1;
                }
            }
        }
        let mut sector_samples = 0;
        let mut sector_violations = 0;
        let half = samples / 2;
        for (ci, c) in self.centers().iter().enumerate() {
            for k in 0..half {
                let phi = 2.0 * PI * (k as f64 + 0.5 * ci as f64) / half as f64;
                let z = c + C64::from_polar(self.radius(), phi);
                let w = C64::new(1.0, 0.0) - z;
                sector_samples += 1;
                if w.norm() > 1e-12 && w.arg().abs() > self.theta + 1e-12 {
                    sector_violations += 1;
                }
                let inner = c + C64::from_polar(self.radius() * 0.999, phi);
                let wi = C64::new(1.0, 0.0) - inner;
                sector_samples += 1;
                if !(wi.arg().abs() < self.theta) {
                    sector_violations += 1;
                }
            }
        }
        DThetaChecks {
            theta: self.theta,
            slope_at_1e5: self.r(1e-5) / 1e-5,
            j0,
            slope_violations,
            disc_samples,
            disc_violations,
            sector_samples,
            sector_violations,
        }
    }
}

pub fn dtheta_geometry(theta: f64, samples: usize) -> Result<DThetaChecks> {
    Ok(DTheta::new(theta)?.checks(samples.max(16)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolyKind {
    RandomCoefficients,
    /// `z^n K_n(z)` with the Fejér kernel `K_n`.
    Fejer,
    Power,
}

/// Test polynomials: random Gaussian coefficients of degree `degree`, shifted Fejér kernels
/// of order `1..=count`, or powers `z^1..z^count`.
pub fn sample_polynomials(kind: PolyKind, count: usize, degree: usize, seed: u64) -> Vec<LaurentPolynomial> {
    match kind {
        PolyKind::RandomCoefficients => (0..count)
            .map(|s| {
                let mut rng = crate::lpcore::seeded_rng(seed, s as u64);
                LaurentPolynomial::new(crate::lpcore::complex_gaussian_vec(&mut rng, degree + 1))
            })
            .collect(),
        PolyKind::Fejer => (1..=count)
            .map(|n| {
                let coeffs = (0..=2 * n)
                    .map(|k| {
                        let d = (k as f64 - n as f64).abs();
                        C64::new(1.0 - d / (n as f64 + 1.0), 0.0)
                    })
                    .collect();
                LaurentPolynomial::new(coeffs)
            })
            .collect(),
        PolyKind::Power => (1..=count).map(LaurentPolynomial::monomial).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyboundRow {
    pub index: usize,
    pub degree: usize,
    pub op_norm: f64,
    pub shift_norm: f64,
    pub ratio: f64,
}

/// `max ‖φ(T)‖_p / shift_pnorm(φ, p, N)` over the samples.
///
/// Both sides are searched lower bounds, so the ratio indicates growth rather than
/// bounding the polynomial-boundedness constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyboundReport {
    pub p: f64,
    pub n: usize,
    pub rows: Vec<PolyboundRow>,
    pub max_ratio: f64,
    pub indicator_only: bool,
}

pub fn polybound_estimate(
    t: &LpOperator,
    phis: &[LaurentPolynomial],
    n: usize,
    budget: &NormBudget,
    seed: u64,
) -> Result<PolyboundReport> {
    let p = t.p();
    let rows: Vec<PolyboundRow> = phis
        .par_iter()
        .enumerate()
        .map(|(index, phi)| {
            let op_norm = crate::lpcore::op_pnorm(&phi.apply(t.matrix()), p, budget, seed)?.value;
            let shift_norm = shift_pnorm(phi, p, n, budget, seed)?;
            let ratio = if shift_norm > 0.0 { op_norm / shift_norm } else { 0.0 };
            Ok(PolyboundRow { index, degree: phi.degree(), op_norm, shift_norm, ratio })
        })
        .collect::<Result<_>>()?;
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(PolyboundReport { p, n, rows, max_ratio, indicator_only: true })
}

/// Random polynomials with Gaussian coefficients and random degree up to `max_degree`.
pub fn random_polynomial<R: Rng + ?Sized>(rng: &mut R, max_degree: usize) -> LaurentPolynomial {
    let d = rng.random_range(0..=max_degree);
    LaurentPolynomial::new(crate::lpcore::complex_gaussian_vec(rng, d + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lpcore::{real_diagonal, seeded_rng};
    use proptest::prelude::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn b() -> NormBudget {
        NormBudget::default()
    }

    #[test]
    fn shift_examples() {
        for &p in &[1.5, 2.0, 4.0] {
            for &n in &[8, 13] {
                let v = shift_pnorm(&LaurentPolynomial::monomial(3), p, n, &b(), 0).unwrap();
                assert!((v - 1.0).abs() < 1e-12);
            }
        }
        let one_plus_z = LaurentPolynomial::new(vec![c(1.0), c(1.0)]);
        assert!((shift_pnorm(&one_plus_z, 2.0, 4, &b(), 0).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(shift_pnorm(&one_plus_z, 1.0, 4, &b(), 0).unwrap(), 2.0);
        assert!(shift_pnorm(&one_plus_z, 3.0, 1, &b(), 0).is_err());
        let circ = one_plus_z.circulant(4).unwrap();
        assert_eq!(circ[(1, 0)], c(1.0));
        assert_eq!(circ[(0, 3)], c(1.0));
    }

    #[test]
    fn p2_is_the_sup_over_roots_of_unity() {
        let mut rng = seeded_rng(3, 0);
        for _ in 0..10 {
            let phi = random_polynomial(&mut rng, 6);
            let c = phi.circulant(16).unwrap();
            let exact = crate::lpcore::spectral_norm(&c);
            assert!((shift_pnorm(&phi, 2.0, 16, &b(), 0).unwrap() - exact).abs() < 1e-10);
        }
        let phi = LaurentPolynomial::new(vec![c(1.0), C64::new(0.0, 1.0), c(-0.5)]);
        let sup =
            (0..100_000).map(|k| phi.eval(C64::from_polar(1.0, 2.0 * PI * k as f64 / 1e5)).norm()).fold(0.0, f64::max);
        let a = shift_pnorm(&phi, 2.0, 64, &b(), 0).unwrap();
        let bb = shift_pnorm(&phi, 2.0, 1024, &b(), 0).unwrap();
        assert!(a <= bb + 1e-15 && (sup - bb).abs() < 1e-5);
    }

    #[test]
    fn riesz_thorin_and_duality_on_circulants() {
        let mut rng = seeded_rng(4, 0);
        for _ in 0..6 {
            let phi = random_polynomial(&mut rng, 5);
            let n = 16;
            let v1 = shift_pnorm(&phi, 1.0, n, &b(), 0).unwrap();
            let v2 = shift_pnorm(&phi, 2.0, n, &b(), 0).unwrap();
            let p = 1.5;
            let eta = 2.0 * (1.0 - 1.0 / p);
            let vp = shift_pnorm(&phi, p, n, &b(), 1).unwrap();
            assert!(vp <= v1.powf(1.0 - eta) * v2.powf(eta) + 1e-10);
            let vq = shift_pnorm(&phi, conjugate_exponent(p), n, &b(), 1).unwrap();
            assert!((vp - vq).abs() < 1e-8 * vp, "{vp} {vq}");
        }
    }

    #[test]
    fn arc_examples() {
        let a = DyadicArc::new(-1);
        assert_eq!((a.lo, a.hi), (PI / 4.0, PI / 2.0));
        let a = DyadicArc::new(0);
        assert_eq!((a.lo, a.hi), (PI / 2.0, 3.0 * PI / 4.0));
        let arcs = dyadic_arcs(-20, 20).unwrap();
        for w in arcs.windows(2) {
            assert!((w[0].hi - w[1].lo).abs() <= 1e-15);
        }
        assert!(arcs[0].lo < 1e-4 && arcs.last().unwrap().hi > PI - 1e-4);
        for k in 1..10_000 {
            let t = 1e-4 + (PI - 2e-4) * k as f64 / 10_000.0;
            assert_eq!(arcs.iter().filter(|a| a.contains(t)).count(), 1);
        }
    }

    #[test]
    fn marcinkiewicz_examples() {
        let arcs = dyadic_arcs(-12, 12).unwrap();
        let k = marcinkiewicz_functional(&LaurentPolynomial::new(vec![C64::new(0.3, -0.4)]), &arcs, 4);
        assert!((k.value - 0.5).abs() < 1e-15);
        let z = marcinkiewicz_functional(&LaurentPolynomial::monomial(1), &arcs, 4);
        assert!((z.value - (1.0 + PI / 2.0)).abs() < 1e-12);
        let s = marcinkiewicz_sampled(|t| C64::from_polar(1.0, t), &arcs, 4096);
        assert!((s.value - (1.0 + PI / 2.0)).abs() < 1e-6);
        let q = LaurentPolynomial::new(vec![c(1.0), c(1.0)]);
        let a = marcinkiewicz_functional(&q, &arcs, 8);
        let bb = marcinkiewicz_sampled(|t| q.eval(C64::from_polar(1.0, t)), &arcs, 4096);
        assert!((a.value - bb.value).abs() < 1e-6 && (a.sup_norm - 2.0).abs() < 1e-12);
        assert_eq!(a.to_csv().lines().count(), 26);
    }

    #[test]
    fn dtheta_examples() {
        for &th in &[2.0 * PI / 3.0, 3.0 * PI / 4.0, 5.0 * PI / 6.0] {
            let d = DTheta::new(th).unwrap();
            assert!(d.contains(C64::new(0.0, 0.0)));
            let ch = d.checks(10_000);
            assert!((ch.slope_at_1e5 + th.cos()).abs() < 1e-3);
            assert_eq!(ch.slope_violations, 0);
            assert_eq!(ch.disc_violations, 0);
            assert_eq!(ch.sector_violations, 0);
            assert!(ch.disc_samples >= 10_000 && ch.sector_samples >= 10_000);
        }
        assert!((-(3.0 * PI / 4.0).cos() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(DTheta::new(1.0).is_err());
    }

    #[test]
    fn polybound_examples() {
        let n = 8;
        let s = LaurentPolynomial::monomial(1).circulant(n).unwrap();
        let t = LpOperator::new(s, 4.0).unwrap();
        let mut phis = sample_polynomials(PolyKind::RandomCoefficients, 5, 4, 1);
        phis.extend(sample_polynomials(PolyKind::Fejer, 3, 0, 0));
        phis.extend(sample_polynomials(PolyKind::Power, 3, 0, 0));
        let r = polybound_estimate(&t, &phis, n, &b(), 2).unwrap();
        assert!(r.max_ratio <= 1.0 + 1e-9, "{}", r.max_ratio);
        let z = LpOperator::new(ComplexMatrix::zeros(3, 3), 3.0).unwrap();
        let r = polybound_estimate(&z, &phis, 16, &b(), 2).unwrap();
        assert!(r.max_ratio <= 1.0 + 1e-12);
        let d = LpOperator::new(real_diagonal(&[0.5, 0.9]), 4.0).unwrap();
        assert!(polybound_estimate(&d, &phis, 16, &b(), 2).unwrap().indicator_only);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn doublings_are_nondecreasing(seed in 0u64..1000, p in 1.2f64..5.0) {
            let mut rng = seeded_rng(seed, 0);
            let phi = random_polynomial(&mut rng, 8);
            let rows = shift_pnorm_doublings(&phi, p, 16, 3, &NormBudget::default().with_restarts(4), seed).unwrap();
            prop_assert!(rows.windows(2).all(|w| w[1].value >= w[0].value));
            prop_assert!(rows.iter().all(|r| r.value <= phi.l1_norm() * (1.0 + 1e-12)));
        }
    }
}
