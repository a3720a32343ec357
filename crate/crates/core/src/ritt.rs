//! Ritt diagnostics and the geometry of the Stolz domains `B_γ`.
//!
//! `B_γ` is the interior of the convex hull of the point 1 and the disc of radius
//! `sin γ` about the origin. Its boundary is traversed counterclockwise as
//! `Γ₊` (from 1 up to the upper tangency point), the arc `Γ₀`, then `Γ₋` back to 1.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lpcore::{identity, op_pnorm, resolvent, spectrum, ComplexMatrix, LpOperator, NormBudget, C64};
use crate::randseq::{r_bound_lower, RBoundEstimate};

const ONE: C64 = C64::new(1.0, 0.0);

/// Eigenvalues within this distance of 1 are treated as the eigenvalue 1.
pub const UNIT_EIGENVALUE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StolzDomain {
    gamma: f64,
}

impl StolzDomain {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < FRAC_PI_2) {
            return Err(Error::InvalidArgument(format!("Stolz angle {gamma} is outside (0, pi/2)")));
        }
        Ok(StolzDomain { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn radius(&self) -> f64 {
        self.gamma.sin()
    }

    /// Length of the segments `Γ±`.
    pub fn segment_length(&self) -> f64 {
        self.gamma.cos()
    }

    /// `1 − cos(γ) e^{−iγ}`, where `Γ₊` meets the arc.
    pub fn upper_tangency(&self) -> C64 {
        ONE - C64::from_polar(self.segment_length(), -self.gamma)
    }

    /// `1 − cos(γ) e^{iγ}`, where the arc meets `Γ₋`.
    pub fn lower_tangency(&self) -> C64 {
        ONE - C64::from_polar(self.segment_length(), self.gamma)
    }

    /// `Γ₊(t) = 1 − t e^{−iγ}` for `t ∈ [0, cos γ]`.
    pub fn gamma_plus(&self, t: f64) -> C64 {
        ONE - C64::from_polar(t, -self.gamma)
    }

    /// `Γ₋` reached at distance `t` from 1: `1 − t e^{iγ}`. The segment is traversed with `t` decreasing.
    pub fn gamma_minus(&self, t: f64) -> C64 {
        ONE - C64::from_polar(t, self.gamma)
    }

    /// Arc angles run over `[π/2 − γ, 3π/2 + γ]`.
    pub fn arc_range(&self) -> (f64, f64) {
        (FRAC_PI_2 - self.gamma, 3.0 * FRAC_PI_2 + self.gamma)
    }

    pub fn arc(&self, phi: f64) -> C64 {
        C64::from_polar(self.radius(), phi)
    }

    pub fn arc_length(&self) -> f64 {
        self.radius() * (PI + 2.0 * self.gamma)
    }

    pub fn contains(&self, z: C64) -> bool {
        if z.norm() < self.radius() {
            return true;
        }
        let w = ONE - z;
        w != C64::new(0.0, 0.0) && w.arg().abs() < self.gamma && w.norm() <= self.segment_length()
    }

    /// Euclidean distance from `z` to `∂B_γ`.
    pub fn boundary_distance(&self, z: C64) -> f64 {
        let seg = |end: C64| {
            let d = end - ONE;
            let t = (((z - ONE) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0);
            (z - (ONE + d * t)).norm()
        };
        let (lo, hi) = self.arc_range();
        let mut phi = z.arg();
        if phi < lo {
            phi += 2.0 * PI;
        }
        let arc = if z.norm() > 0.0 && phi >= lo && phi <= hi {
            (z.norm() - self.radius()).abs()
        } else if z.norm() == 0.0 {
            self.radius()
        } else {
            (z - self.upper_tangency()).norm().min((z - self.lower_tangency()).norm())
        };
        arc.min(seg(self.upper_tangency())).min(seg(self.lower_tangency()))
    }
}

/// Membership in the open Stolz domain.
pub fn stolz_contains(gamma: f64, z: C64) -> Result<bool> {
    Ok(StolzDomain::new(gamma)?.contains(z))
}

/// Finite scan ranges behind every reported supremum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolventGrid {
    /// Radii `1 + 2^{−j}` for `j = 0..=j_max`.
    pub j_max: u32,
    pub angles: usize,
}

impl Default for ResolventGrid {
    fn default() -> Self {
        ResolventGrid { j_max: 20, angles: 256 }
    }
}

impl ResolventGrid {
    pub fn points(&self) -> Vec<C64> {
        let mut pts = Vec::with_capacity((self.j_max as usize + 1) * self.angles);
        for j in 0..=self.j_max {
            let r = 1.0 + 0.5f64.powi(j as i32);
            for k in 0..self.angles {
                pts.push(C64::from_polar(r, 2.0 * PI * k as f64 / self.angles as f64));
            }
        }
        pts
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerConstants {
    /// `sup_{0≤n≤n_max} ‖Tⁿ‖`.
    pub m_power: f64,
    /// `sup_{1≤n≤n_max} n‖Tⁿ − Tⁿ⁻¹‖`.
    pub m_diff: f64,
    /// Neither sequence grew over the last quarter of the scan.
    pub stabilized: bool,
    pub n_max: usize,
}

fn quarter_stable(values: &[f64]) -> bool {
    let cut = values.len() - values.len() / 4;
    if cut == 0 || cut == values.len() {
        return true;
    }
    let head = values[..cut].iter().copied().fold(0.0, f64::max);
    let tail = values[cut..].iter().copied().fold(0.0, f64::max);
    tail <= head * (1.0 + 1e-9) + 1e-300
}

/// Power-boundedness constants over `0 ≤ n ≤ n_max`.
pub fn power_constants(t: &LpOperator, n_max: usize, budget: &NormBudget, seed: u64) -> Result<PowerConstants> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    let a = t.matrix();
    let mut powers = Vec::with_capacity(n_max + 1);
    powers.push(identity(a.nrows()));
    for n in 1..=n_max {
        let next = &powers[n - 1] * a;
        powers.push(next);
    }
    let p = t.p();
    let power_norms: Vec<f64> = powers
        .par_iter()
        .enumerate()
        .map(|(n, m)| op_pnorm(m, p, budget, seed.wrapping_add(n as u64)).map(|e| e.value))
        .collect::<Result<_>>()?;
    let diff_norms: Vec<f64> = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let d = &powers[n] - &powers[n - 1];
            op_pnorm(&d, p, budget, seed.wrapping_add((n_max + n) as u64)).map(|e| n as f64 * e.value)
        })
        .collect::<Result<_>>()?;
    Ok(PowerConstants {
        m_power: power_norms.iter().copied().fold(0.0, f64::max),
        m_diff: diff_norms.iter().copied().fold(0.0, f64::max),
        stabilized: quarter_stable(&power_norms) && quarter_stable(&diff_norms),
        n_max,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolventScan {
    /// `sup |λ − 1| ‖R(λ, T)‖` over the grid.
    pub value: f64,
    pub argmax: C64,
    pub grid: ResolventGrid,
}

fn check_unit_disc(a: &ComplexMatrix) -> Result<Vec<C64>> {
    let spec = spectrum(a)?;
    if let Some(c) = spec.iter().find(|c| c.norm() > 1.0 + UNIT_EIGENVALUE_TOL) {
        return Err(Error::Spectrum(format!("eigenvalue {c} lies outside the closed unit disc")));
    }
    Ok(spec)
}

/// Grid supremum of `|λ − 1| ‖R(λ, T)‖_p` over `|λ| = 1 + 2^{−j}`.
pub fn ritt_resolvent_constant(
    t: &LpOperator,
    grid: &ResolventGrid,
    budget: &NormBudget,
    seed: u64,
) -> Result<ResolventScan> {
    check_unit_disc(t.matrix())?;
    let pts = grid.points();
    let vals: Vec<f64> = pts
        .par_iter()
        .enumerate()
        .map(|(i, &lambda)| {
            let r = resolvent(t.matrix(), lambda)?;
            let e = op_pnorm(&r, t.p(), budget, seed.wrapping_add(i as u64))?;
            Ok((lambda - ONE).norm() * e.value)
        })
        .collect::<Result<_>>()?;
    let (i, value) = vals.iter().copied().enumerate().fold((0, 0.0), |b, c| if c.1 > b.1 { c } else { b });
    Ok(ResolventScan { value, argmax: pts[i], grid: *grid })
}

/// Smallest `γ` (within `tol`) with every eigenvalue other than 1 inside `B_γ`.
pub fn optimal_gamma(t: &ComplexMatrix, tol: f64) -> Result<f64> {
    let spec = check_unit_disc(t)?;
    let interior: Vec<C64> = spec.into_iter().filter(|c| (c - ONE).norm() > UNIT_EIGENVALUE_TOL).collect();
    if let Some(c) = interior.iter().find(|c| c.norm() >= 1.0 - 1e-12) {
        return Err(Error::Spectrum(format!(
            "eigenvalue {c} lies on the unit circle away from 1; no Stolz domain contains it"
        )));
    }
    let feasible = |g: f64| interior.iter().all(|&c| StolzDomain { gamma: g }.contains(c));
    let tol = tol.max(1e-15);
    let mut lo = tol;
    if feasible(lo) {
        return Ok(lo);
    }
    let mut hi = FRAC_PI_2 - 1e-15;
    if !feasible(hi) {
        return Err(Error::Spectrum("no Stolz angle below pi/2 contains the spectrum".into()));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Sample points for the family `{(λ−1)R(λ,T) : λ ∉ B_γ}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutsideSampling {
    /// Points on `(1 + inflation)·∂B_γ`.
    pub boundary_points: usize,
    pub inflation: f64,
    /// Rays `ρ e^{iφ}` with `ρ ∈ radii` and this many angles.
    pub ray_angles: usize,
}

impl Default for OutsideSampling {
    fn default() -> Self {
        OutsideSampling { boundary_points: 48, inflation: 0.02, ray_angles: 16 }
    }
}

const RAY_RADII: [f64; 4] = [1.05, 1.25, 2.0, 4.0];

impl OutsideSampling {
    pub fn points(&self, domain: &StolzDomain) -> Vec<C64> {
        let mut pts = Vec::new();
        let scale = 1.0 + self.inflation;
        let m = self.boundary_points.max(3);
        let (lo, hi) = domain.arc_range();
        let seg = domain.segment_length();
        let third = m / 3;
        for k in 1..=third {
            let t = seg * k as f64 / third as f64;
            pts.push(domain.gamma_plus(t) * scale);
            pts.push(domain.gamma_minus(t) * scale);
        }
        for k in 0..m - 2 * third {
            let phi = lo + (hi - lo) * (k as f64 + 0.5) / (m - 2 * third) as f64;
            pts.push(domain.arc(phi) * scale);
        }
        for &r in &RAY_RADII {
            for k in 0..self.ray_angles {
                pts.push(C64::from_polar(r, 2.0 * PI * (k as f64 + 0.5) / self.ray_angles as f64));
            }
        }
        pts
    }
}

/// Lower bound for the R-bound of `{(λ−1)R(λ,T)}` over sampled `λ` outside `B_γ`.
pub fn r_ritt_lower(
    t: &LpOperator,
    gamma: f64,
    sampling: &OutsideSampling,
    trials: usize,
    seed: u64,
) -> Result<RBoundEstimate> {
    let domain = StolzDomain::new(gamma)?;
    let g0 = optimal_gamma(t.matrix(), 1e-9)?;
    if g0 >= gamma {
        return Err(Error::Spectrum(format!("the spectrum needs gamma > {g0:.6}, got {gamma:.6}")));
    }
    let family: Vec<ComplexMatrix> = sampling
        .points(&domain)
        .into_iter()
        .map(|l| resolvent(t.matrix(), l).map(|r| r * (l - ONE)))
        .collect::<Result<_>>()?;
    r_bound_lower(&family, t.p(), trials, seed)
}

/// Parameters for a full diagnostic run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RittConfig {
    pub n_max: usize,
    pub grid: ResolventGrid,
    pub gamma_tol: f64,
    pub sampling: OutsideSampling,
    pub r_trials: usize,
    pub budget: NormBudget,
}

impl Default for RittConfig {
    fn default() -> Self {
        RittConfig {
            n_max: 256,
            grid: ResolventGrid::default(),
            gamma_tol: 1e-9,
            sampling: OutsideSampling::default(),
            r_trials: 8,
            budget: NormBudget::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RittReport {
    pub p: f64,
    pub dim: usize,
    pub spectrum: Vec<C64>,
    pub spectrum_ok: bool,
    pub m_power: f64,
    pub m_diff: f64,
    pub power_stabilized: bool,
    pub ritt_const: Option<f64>,
    pub gamma_opt: Option<f64>,
    /// Angle used for the sampled R-bound of `(λ−1)R(λ,T)`, midway between `gamma_opt` and `π/2`.
    pub gamma_sampled: Option<f64>,
    pub r_ritt_lower: Option<f64>,
    pub config: RittConfig,
    pub notes: Vec<String>,
}

/// Runs every diagnostic and records the scan parameters alongside the results.
pub fn analyze(t: &LpOperator, config: &RittConfig, seed: u64) -> Result<RittReport> {
    let spec = spectrum(t.matrix())?;
    let mut notes = Vec::new();
    let pc = power_constants(t, config.n_max, &config.budget, seed)?;
    let ritt_const = match ritt_resolvent_constant(t, &config.grid, &config.budget, seed) {
        Ok(s) => Some(s.value),
        Err(e) => {
            notes.push(e.to_string());
            None
        }
    };
    let gamma_opt = match optimal_gamma(t.matrix(), config.gamma_tol) {
        Ok(g) => Some(g),
        Err(e) => {
            notes.push(e.to_string());
            None
        }
    };
    let spectrum_ok = gamma_opt.is_some();
    let gamma_sampled = gamma_opt.map(|g| 0.5 * (g + FRAC_PI_2));
    let r_ritt = match gamma_sampled {
        Some(g) => match r_ritt_lower(t, g, &config.sampling, config.r_trials, seed) {
            Ok(r) => Some(r.lower_bound),
            Err(e) => {
                notes.push(e.to_string());
                None
            }
        },
        None => None,
    };
    if !pc.stabilized {
        notes.push(format!("power sequences still growing in the last quarter of n <= {}", config.n_max));
    }
    Ok(RittReport {
        p: t.p(),
        dim: t.dim(),
        spectrum: spec,
        spectrum_ok,
        m_power: pc.m_power,
        m_diff: pc.m_diff,
        power_stabilized: pc.stabilized,
        ritt_const,
        gamma_opt,
        gamma_sampled,
        r_ritt_lower: r_ritt,
        config: *config,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lpcore::{real_diagonal, seeded_rng};
    use proptest::prelude::*;
    use rand::Rng;

    fn op(m: ComplexMatrix, p: f64) -> LpOperator {
        LpOperator::new(m, p).unwrap()
    }

    /// Convex-combination oracle: `z = t + (1−t)w` with `|w| < sin γ` for some `t ∈ [0, 1)`.
    /// `g(t) = |z − t| − sin γ (1 − t)` is convex, so a ternary search finds its minimum.
    fn hull_margin(gamma: f64, z: C64) -> f64 {
        let s = gamma.sin();
        let g = |t: f64| (z - t).norm() - s * (1.0 - t);
        let (mut a, mut b) = (0.0, 1.0);
        for _ in 0..200 {
            let m1 = a + (b - a) / 3.0;
            let m2 = b - (b - a) / 3.0;
            if g(m1) < g(m2) {
                b = m2;
            } else {
                a = m1;
            }
        }
        g(0.5 * (a + b))
    }

    #[test]
    fn membership_examples() {
        for &g in &[0.1, 0.7, 1.4] {
            assert!(stolz_contains(g, C64::new(0.0, 0.0)).unwrap());
            assert!(!stolz_contains(g, ONE).unwrap());
            let z = ONE - C64::from_polar(g.cos() / 2.0, -g / 2.0);
            assert!(stolz_contains(g, z).unwrap());
            assert!(hull_margin(g, z) < 0.0);
        }
    }

    #[test]
    fn membership_agrees_with_hull_oracle() {
        for &g in &[PI / 12.0, PI / 6.0, PI / 4.0, PI / 3.0] {
            let d = StolzDomain::new(g).unwrap();
            let mut rng = seeded_rng(99, (g * 1000.0) as u64);
            let mut disagreements = 0;
            for _ in 0..10_000 {
                let z = C64::new(rng.random_range(-1.2..1.2), rng.random_range(-1.2..1.2));
                if d.boundary_distance(z) < 1e-9 {
                    continue;
                }
                if d.contains(z) != (hull_margin(g, z) < 0.0) {
                    disagreements += 1;
                }
            }
            assert_eq!(disagreements, 0, "gamma = {g}");
        }
    }

    #[test]
    fn tangency_identity() {
        for &g in &[0.05, PI / 6.0, 1.0, 1.5] {
            let d = StolzDomain::new(g).unwrap();
            assert!((d.upper_tangency().norm() - g.sin()).abs() < 1e-12);
            assert!((d.lower_tangency().norm() - g.sin()).abs() < 1e-12);
            let (lo, hi) = d.arc_range();
            assert!((d.arc(lo) - d.upper_tangency()).norm() < 1e-12);
            assert!((d.arc(hi) - d.lower_tangency()).norm() < 1e-12);
            assert!((d.gamma_plus(d.segment_length()) - d.upper_tangency()).norm() < 1e-15);
        }
    }

    #[test]
    fn power_constant_examples() {
        let b = NormBudget::default();
        let z = power_constants(&op(ComplexMatrix::zeros(3, 3), 3.0), 10, &b, 0).unwrap();
        assert_eq!((z.m_power, z.m_diff), (1.0, 1.0));
        let i = power_constants(&op(identity(3), 3.0), 10, &b, 0).unwrap();
        assert_eq!((i.m_power, i.m_diff), (1.0, 0.0));
        let c: Vec<f64> = (1..=8).map(|k| 1.0 - 0.5f64.powi(k)).collect();
        for &p in &[2.0, 3.0] {
            let n_max = 200;
            let d = power_constants(&op(real_diagonal(&c), p), n_max, &b, 0).unwrap();
            assert_eq!(d.m_power, 1.0);
            let mut oracle = 0.0f64;
            for &ck in &c {
                for n in 1..=n_max {
                    oracle = oracle.max(n as f64 * (1.0 - ck) * ck.powi(n as i32 - 1));
                }
            }
            assert!((d.m_diff - oracle).abs() < 1e-10, "p={p}: {} vs {oracle}", d.m_diff);
        }
    }

    #[test]
    fn resolvent_constant_examples() {
        let b = NormBudget::default();
        let grid = ResolventGrid { j_max: 20, angles: 64 };
        let zero = ritt_resolvent_constant(&op(ComplexMatrix::zeros(2, 2), 3.0), &grid, &b, 0).unwrap();
        assert!(zero.value >= 1.0 && zero.value <= 2.0 + 1e-12);
        let one = ritt_resolvent_constant(&op(identity(2), 3.0), &grid, &b, 0).unwrap();
        assert!((one.value - 1.0).abs() < 1e-9);
        let c = [0.9, 0.5];
        for &p in &[2.0, 4.0] {
            let s = ritt_resolvent_constant(&op(real_diagonal(&c), p), &grid, &b, 0).unwrap();
            let oracle = grid
                .points()
                .iter()
                .map(|&l| c.iter().map(|&ck| (l - ONE).norm() / (l - ck).norm()).fold(0.0, f64::max))
                .fold(0.0, f64::max);
            assert!((s.value - oracle).abs() < 1e-10, "p={p}");
        }
        let outside = ritt_resolvent_constant(&op(real_diagonal(&[1.5]), 2.0), &grid, &b, 0);
        assert!(matches!(outside, Err(Error::Spectrum(_))));
    }

    #[test]
    fn optimal_gamma_examples() {
        let tol = 1e-10;
        assert!(optimal_gamma(&ComplexMatrix::zeros(2, 2), tol).unwrap() <= 2.0 * tol);
        // 0.5 lies on the cone axis, inside every B_γ.
        let g = optimal_gamma(&real_diagonal(&[0.5]), tol).unwrap();
        assert!(g <= 2.0 * tol && stolz_contains(g, C64::new(0.5, 0.0)).unwrap());
        // 0.5i needs the disc: sin γ > 1/2.
        let z = C64::new(0.0, 0.5);
        let g = optimal_gamma(&crate::lpcore::complex_diagonal(&[z]), tol).unwrap();
        assert!(stolz_contains(g, z).unwrap());
        assert!(!stolz_contains(g - 2.0 * tol, z).unwrap());
        assert!((g - PI / 6.0).abs() < 2.0 * tol);
        assert!(matches!(optimal_gamma(&real_diagonal(&[-1.0, 0.2]), tol), Err(Error::Spectrum(_))));
        let with_one = optimal_gamma(&real_diagonal(&[1.0, 0.3]), tol).unwrap();
        assert!(stolz_contains(with_one, C64::new(0.3, 0.0)).unwrap());
    }

    #[test]
    fn r_ritt_examples() {
        let s = OutsideSampling::default();
        let zero = op(ComplexMatrix::zeros(2, 2), 3.0);
        let gamma = PI / 4.0;
        let r = r_ritt_lower(&zero, gamma, &s, 2, 0).unwrap();
        // Scalar family (λ−1)/λ · I: the bound is the largest sampled |λ−1|/|λ|.
        let oracle =
            s.points(&StolzDomain::new(gamma).unwrap()).iter().map(|l| (l - ONE).norm() / l.norm()).fold(0.0, f64::max);
        // Complex scalars may exceed max|c| by at most the contraction factor π/2.
        assert!(r.lower_bound >= oracle * (1.0 - 1e-12), "{} vs {oracle}", r.lower_bound);
        assert!(r.lower_bound <= oracle * FRAC_PI_2 + 1e-9);
        let one = op(identity(1), 3.0);
        let r = r_ritt_lower(&one, 0.5, &s, 2, 0).unwrap();
        assert!((r.lower_bound - 1.0).abs() < 1e-12);
        let d = op(real_diagonal(&[0.5, 0.9]), 2.0);
        let g = 0.5 * (optimal_gamma(d.matrix(), 1e-9).unwrap() + FRAC_PI_2);
        let r = r_ritt_lower(&d, g, &s, 4, 1).unwrap();
        let uniform = s
            .points(&StolzDomain::new(g).unwrap())
            .iter()
            .map(|&l| [0.5, 0.9].iter().map(|&c| (l - ONE).norm() / (l - c).norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        assert!(r.lower_bound >= uniform * (1.0 - 1e-9));
        assert!(r.lower_bound <= 2.0 * uniform);
    }

    proptest! {
        #[test]
        fn boundary_points_are_not_inside(g in 0.05f64..1.5, t in 0.0f64..1.0, phi in 0.0f64..1.0) {
            let d = StolzDomain::new(g).unwrap();
            let (lo, hi) = d.arc_range();
            prop_assert!(d.boundary_distance(d.gamma_plus(t * d.segment_length())) < 1e-12);
            prop_assert!(d.boundary_distance(d.arc(lo + phi * (hi - lo))) < 1e-12);
            let scaled = d.arc(lo + phi * (hi - lo)) * 1.001;
            prop_assert!(!d.contains(scaled));
        }
    }
}
