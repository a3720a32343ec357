//! Counterexample machinery: CAR matrices and the `w`-map pairing, the Foguel-type multiplier
//! `diag(1 − 2^{−k})` in a conditional basis, and the v₁ multiplier calculus.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lpcore::{
    complex_diagonal, complex_gaussian_matrix, complex_gaussian_vec, kron, map_norm_lower, op_pnorm, op_pnorm_upper,
    real_diagonal, seeded_rng, spectral_norm, ComplexMatrix, FiberNorm, LinearMap, LpOperator, NormBudget, C64,
};
use crate::multiplier::{polybound_estimate, sample_polynomials, PolyKind, PolyboundReport};
use crate::quad::adaptive;
use crate::ritt::{analyze, RittConfig, RittReport};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Square integer matrix, column-major.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntMatrix {
    pub n: usize,
    pub data: Vec<i64>,
}

impl IntMatrix {
    pub fn zeros(n: usize) -> Self {
        IntMatrix { n, data: vec![0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i + i * n] = 1;
        }
        m
    }

    pub fn from_rows(rows: &[&[i64]]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                m.data[i + j * n] = v;
            }
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i + j * self.n]
    }

    pub fn kron(&self, other: &IntMatrix) -> IntMatrix {
        let n = self.n * other.n;
        let mut m = Self::zeros(n);
        for j1 in 0..self.n {
            for i1 in 0..self.n {
                let a = self.get(i1, j1);
                if a == 0 {
                    continue;
                }
                for j2 in 0..other.n {
                    for i2 in 0..other.n {
                        m.data[(i1 * other.n + i2) + (j1 * other.n + j2) * n] = a * other.get(i2, j2);
                    }
                }
            }
        }
        m
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        let n = self.n;
        let mut m = Self::zeros(n);
        for j in 0..n {
            for k in 0..n {
                let b = other.get(k, j);
                if b == 0 {
                    continue;
                }
                for i in 0..n {
                    m.data[i + j * n] += self.get(i, k) * b;
                }
            }
        }
        m
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    /// Maximum absolute column sum, the ℓ¹ operator norm.
    pub fn l1_norm(&self) -> i64 {
        self.data.chunks(self.n).map(|c| c.iter().map(|v| v.abs()).sum()).max().unwrap_or(0)
    }

    pub fn to_complex(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.n, self.n, |i, j| C64::new(self.get(i, j) as f64, 0.0))
    }

    /// For a matrix with at most one nonzero entry per column: `(row, value)` per column.
    fn column_entries(&self) -> Vec<Option<(usize, i64)>> {
        (0..self.n)
            .map(|j| {
                let mut nz = (0..self.n).filter(|&i| self.get(i, j) != 0);
                let first = nz.next().map(|i| (i, self.get(i, j)));
                debug_assert!(nz.next().is_none());
                first
            })
            .collect()
    }
}

/// `C_k = E^{⊗(k−1)} ⊗ D`, padded by `I₂^{⊗(m−k)}`, for `k = 1..=m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CarSystem {
    pub m: usize,
    pub padded: Vec<IntMatrix>,
}

impl CarSystem {
    pub fn new(m: usize) -> Result<Self> {
        if !(1..=6).contains(&m) {
            return Err(Error::InvalidArgument(format!("m = {m} must lie in 1..=6")));
        }
        let d = IntMatrix::from_rows(&[&[0, 1], &[0, 0]]);
        let e = IntMatrix::from_rows(&[&[1, 0], &[0, -1]]);
        let i2 = IntMatrix::identity(2);
        let padded = (1..=m)
            .map(|k| {
                let mut c = IntMatrix::identity(1);
                for _ in 1..k {
                    c = c.kron(&e);
                }
                c = c.kron(&d);
                for _ in k..m {
                    c = c.kron(&i2);
                }
                c
            })
            .collect();
        Ok(CarSystem { m, padded })
    }

    pub fn dim(&self) -> usize {
        1 << self.m
    }

    /// `(C_k ⊗ I)² = 0` for every `k`, in integer arithmetic.
    pub fn nilpotent(&self) -> bool {
        self.padded.iter().all(|c| c.mul(c).is_zero())
    }

    /// `C_j C_k + C_k C_j = 0` for all `j, k`.
    pub fn anticommute(&self) -> bool {
        self.padded.iter().all(|a| {
            self.padded.iter().all(|b| {
                let (ab, ba) = (a.mul(b), b.mul(a));
                ab.data.iter().zip(&ba.data).all(|(x, y)| x + y == 0)
            })
        })
    }

    pub fn combination(&self, alpha: &[C64]) -> Result<ComplexMatrix> {
        if alpha.len() != self.m {
            return Err(Error::Dimension(format!("{} coefficients for m = {}", alpha.len(), self.m)));
        }
        let mut out = ComplexMatrix::zeros(self.dim(), self.dim());
        for (c, &a) in self.padded.iter().zip(alpha) {
            out += c.to_complex() * a;
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarIdentityReport {
    pub m: usize,
    pub norm: f64,
    pub l2_alpha: f64,
    pub error: f64,
    pub holds: bool,
}

/// `‖Σ α_k C_k ⊗ I‖_{ℓ²} = ‖α‖₂`.
pub fn car_identity(m: usize, alpha: &[C64]) -> Result<CarIdentityReport> {
    let car = CarSystem::new(m)?;
    let norm = spectral_norm(&car.combination(alpha)?);
    let l2_alpha = alpha.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let error = (norm - l2_alpha).abs();
    Ok(CarIdentityReport { m, norm, l2_alpha, error, holds: error <= 1e-10 })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarL1Report {
    pub m: usize,
    /// `‖C_k ⊗ I‖_{ℓ¹}` for `k = 1..=m`, as exact integers.
    pub padded_norms: Vec<i64>,
    /// `|‖A ⊗ T‖₁ − ‖A‖₁‖T‖₁|` over random pairs.
    pub tensor_errors: Vec<f64>,
    pub holds: bool,
}

pub fn car_l1_norms(m: usize, pairs: usize, seed: u64) -> Result<CarL1Report> {
    let car = CarSystem::new(m)?;
    let padded_norms: Vec<i64> = car.padded.iter().map(IntMatrix::l1_norm).collect();
    let budget = NormBudget::default();
    let tensor_errors = (0..pairs)
        .map(|s| {
            let mut rng = seeded_rng(seed, s as u64);
            let a = complex_gaussian_matrix(&mut rng, 3, 3);
            let t = complex_gaussian_matrix(&mut rng, 2, 2);
            let lhs = op_pnorm(&kron(&a, &t), 1.0, &budget, seed)?.value;
            let rhs = op_pnorm(&a, 1.0, &budget, seed)?.value * op_pnorm(&t, 1.0, &budget, seed)?.value;
            Ok((lhs - rhs).abs() / rhs.max(1.0))
        })
        .collect::<Result<Vec<f64>>>()?;
    let holds = padded_norms.iter().all(|&v| v == 1) && tensor_errors.iter().all(|&e| e <= 1e-10);
    Ok(CarL1Report { m, padded_norms, tensor_errors, holds })
}

/// `φ_m(z) = Σ_k C_k ⊗ I · z^{2^k}` as `(degree, coefficient)` pairs.
pub fn phi_m(m: usize) -> Result<Vec<(usize, ComplexMatrix)>> {
    let car = CarSystem::new(m)?;
    Ok(car.padded.iter().enumerate().map(|(k, c)| (1usize << (k + 1), c.to_complex())).collect())
}

/// Block circulant of a matrix-valued polynomial on `ℤ_N`, block `(i, j)` holding the
/// coefficient of degree `i − j mod N`.
pub fn block_circulant(terms: &[(usize, ComplexMatrix)], n: usize) -> Result<ComplexMatrix> {
    let b = terms.first().map(|t| t.1.nrows()).unwrap_or(1);
    if terms.iter().any(|t| t.0 >= n) {
        return Err(Error::InvalidArgument(format!("N = {n} must exceed the degree")));
    }
    let mut out = ComplexMatrix::zeros(n * b, n * b);
    for (deg, c) in terms {
        for j in 0..n {
            let i = (j + deg) % n;
            let mut view = out.view_mut((i * b, j * b), (b, b));
            view += c;
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiNorms {
    pub m: usize,
    pub p: f64,
    pub n: usize,
    /// `sup_{|z|=1} ‖φ_m(z)‖_{ℓ²}` on a grid.
    pub norm2: f64,
    /// `Σ_k ‖C_k ⊗ I‖_{ℓ¹}`.
    pub norm1_bound: f64,
    /// Lower bound for the block-circulant `ℓᵖ` norm.
    pub normp_estimate: f64,
    pub cap: f64,
    pub within_cap: bool,
}

pub fn phi_m_norms(m: usize, p: f64, n: usize, budget: &NormBudget, seed: u64) -> Result<PhiNorms> {
    if m > 4 {
        return Err(Error::InvalidArgument(format!("m = {m} must be at most 4")));
    }
    if n <= 1 << m {
        return Err(Error::InvalidArgument(format!("N = {n} must exceed 2^m")));
    }
    let terms = phi_m(m)?;
    let grid = 2048;
    let norm2 = (0..grid)
        .into_par_iter()
        .map(|s| {
            let z = C64::from_polar(1.0, 2.0 * PI * s as f64 / grid as f64);
            let mut acc = ComplexMatrix::zeros(1 << m, 1 << m);
            for (deg, c) in &terms {
                acc += c * z.powu(*deg as u32);
            }
            spectral_norm(&acc)
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .fold(0.0, f64::max);
    let norm1_bound = CarSystem::new(m)?.padded.iter().map(|c| c.l1_norm() as f64).sum();
    let circ = block_circulant(&terms, n)?;
    let primal = op_pnorm(&circ, p, budget, seed)?.value;
    let dual = op_pnorm(&circ.adjoint(), crate::lpcore::conjugate_exponent(p), budget, seed)?.value;
    let normp_estimate = primal.max(dual);
    let cap = (m as f64).powf(1.0 / p);
    Ok(PhiNorms { m, p, n, norm2, norm1_bound, normp_estimate, cap, within_cap: normp_estimate <= cap + 1e-6 })
}

pub fn phi_table_csv(rows: &[PhiNorms]) -> String {
    let mut s = String::from("m,p,N,norm2,normp_estimate,m_pow_1_over_p,m_over_2\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{:e},{:e},{:e},{:e}",
            r.m,
            r.p,
            r.n,
            r.norm2,
            r.normp_estimate,
            r.cap,
            r.m as f64 / 2.0
        );
    }
    s
}

/// `G = Σ_k (C_k ⊗ I) ⊗ (C_k ⊗ I)` acting on `ℓᵖ_{2^m}(ℓ²_{2^m})`, first factor outer.
#[derive(Clone, Debug)]
pub struct CarTensor {
    dim: usize,
    columns: Vec<Vec<Option<(usize, i64)>>>,
}

impl CarTensor {
    pub fn new(car: &CarSystem) -> Self {
        CarTensor { dim: car.dim(), columns: car.padded.iter().map(IntMatrix::column_entries).collect() }
    }

    /// `G e_{(j, j')}` as `(row, value)` pairs.
    fn image(&self, j: usize, jp: usize) -> impl Iterator<Item = (usize, i64)> + '_ {
        self.columns.iter().filter_map(move |col| match (col[j], col[jp]) {
            (Some((i, a)), Some((ip, b))) => Some((i * self.dim + ip, a * b)),
            _ => None,
        })
    }
}

impl LinearMap for CarTensor {
    fn nrows(&self) -> usize {
        self.dim * self.dim
    }

    fn ncols(&self) -> usize {
        self.dim * self.dim
    }

    fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; self.dim * self.dim];
        for j in 0..self.dim {
            for jp in 0..self.dim {
                let v = x[j * self.dim + jp];
                if v == ZERO {
                    continue;
                }
                for (r, a) in self.image(j, jp) {
                    out[r] += v * a as f64;
                }
            }
        }
        out
    }

    fn apply_adjoint(&self, y: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; self.dim * self.dim];
        for j in 0..self.dim {
            for jp in 0..self.dim {
                out[j * self.dim + jp] = self.image(j, jp).map(|(r, a)| y[r] * a as f64).sum();
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WLowerBound {
    pub m: usize,
    pub p: f64,
    /// `⟨G x, x⟩` for `x = Σ_i e_i ⊗ e_i`, in integer arithmetic.
    pub pairing: i64,
    pub expected_pairing: i64,
    /// `‖x‖` in `ℓᵖ(ℓ²)` and `ℓ^{p'}(ℓ²)`, computed.
    pub witness_norm: f64,
    pub witness_dual_norm: f64,
    /// `pairing / (witness_norm · witness_dual_norm)`.
    pub lower_bound: f64,
    /// Best ratio of a norm search started at the witness.
    pub search: Option<f64>,
}

pub fn w_lower_bound(m: usize, p: f64, search: Option<(&NormBudget, u64)>) -> Result<WLowerBound> {
    let car = CarSystem::new(m)?;
    let n = car.dim();
    let pairing: i64 = car.padded.iter().map(|c| c.data.iter().map(|v| v * v).sum::<i64>()).sum();
    let expected_pairing = m as i64 * (1i64 << (m - 1));
    let mut x = vec![ZERO; n * n];
    for i in 0..n {
        x[i * n + i] = C64::new(1.0, 0.0);
    }
    let domain = FiberNorm::uniform(p, n, n)?;
    let witness_norm = domain.norm(&x);
    let witness_dual_norm = domain.dual().norm(&x);
    let lower_bound = pairing as f64 / (witness_norm * witness_dual_norm);
    let search = match search {
        Some((budget, seed)) => {
            let g = CarTensor::new(&car);
            Some(map_norm_lower(&g, &domain, &domain, budget, seed, &[x])?.value)
        }
        None => None,
    };
    Ok(WLowerBound { m, p, pairing, expected_pairing, witness_norm, witness_dual_norm, lower_bound, search })
}

/// Unit upper-triangular `I + s Σ_{d=1}^{bands} S^d`; with `s > 1` the inverse grows like `s^n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionalBasis {
    pub strength: f64,
    pub bands: usize,
}

impl Default for ConditionalBasis {
    fn default() -> Self {
        ConditionalBasis { strength: 1.0, bands: 2 }
    }
}

impl ConditionalBasis {
    pub fn matrix(&self, n: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(1.0, 0.0)
            } else if j > i && j - i <= self.bands {
                C64::new(self.strength, 0.0)
            } else {
                ZERO
            }
        })
    }
}

fn condition_number(b: &ComplexMatrix) -> f64 {
    let s = b.singular_values();
    let (hi, lo) = s.iter().fold((0.0f64, f64::INFINITY), |(h, l), &v| (h.max(v), l.min(v)));
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}

fn invert(b: &ComplexMatrix) -> Result<ComplexMatrix> {
    b.clone().try_inverse().ok_or_else(|| Error::InvalidArgument("basis matrix is singular".into()))
}

/// `c_k = 1 − 2^{−k}`, `k = 0..n`.
pub fn foguel_sequence(n: usize) -> Vec<f64> {
    (0..n).map(|k| 1.0 - 0.5f64.powi(k as i32)).collect()
}

/// Basis condition numbers above this raise a warning.
pub const CONDITION_CAP: f64 = 1e10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FoguelOperator {
    #[serde(skip)]
    pub operator: LpOperator,
    pub basis_condition: f64,
    pub ritt: RittReport,
    pub warnings: Vec<String>,
}

/// `B diag(1 − 2^{−k}) B^{−1}` with its Ritt diagnostics.
pub fn foguel_operator(basis: &ComplexMatrix, p: f64, config: &RittConfig, seed: u64) -> Result<FoguelOperator> {
    let n = basis.nrows();
    let binv = invert(basis)?;
    let t = basis * real_diagonal(&foguel_sequence(n)) * binv;
    let operator = LpOperator::new(t, p)?;
    let basis_condition = condition_number(basis);
    let mut warnings = Vec::new();
    if basis_condition > CONDITION_CAP {
        warnings.push(format!("basis condition number {basis_condition:.3e} exceeds {CONDITION_CAP:e}"));
    }
    let ritt = analyze(&operator, config, seed)?;
    Ok(FoguelOperator { operator, basis_condition, ritt, warnings })
}

/// Polynomial-boundedness ratios of a Foguel operator over shifted Fejér kernels.
pub fn foguel_polybound(
    f: &FoguelOperator,
    fejer_orders: usize,
    n: usize,
    budget: &NormBudget,
    seed: u64,
) -> Result<PolyboundReport> {
    polybound_estimate(&f.operator, &sample_polynomials(PolyKind::Fejer, fejer_orders, 0, seed), n, budget, seed)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct V1Sequence {
    pub c: Vec<C64>,
}

impl V1Sequence {
    pub fn new(c: Vec<C64>) -> Self {
        V1Sequence { c }
    }

    pub fn real(c: &[f64]) -> Self {
        V1Sequence { c: c.iter().map(|&v| C64::new(v, 0.0)).collect() }
    }

    /// `|c₀| + Σ_{n≥1} |c_n − c_{n−1}|`.
    pub fn v1_norm(&self) -> f64 {
        self.c.first().map(|c| c.norm()).unwrap_or(0.0) + self.variation()
    }

    pub fn variation(&self) -> f64 {
        self.c.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }

    pub fn sup(&self) -> f64 {
        self.c.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolventBounds {
    pub theta: f64,
    /// `Σ_{n≥1} |c(θ)_n − c(θ)_{n−1}|` for `c(θ)_n = 1/(e^{iθ} − (1 − 2^{−n}))`.
    pub variation: f64,
    pub i_quadrature: f64,
    pub i_closed: f64,
    /// `|e^{iθ} − 1| · I(θ)`.
    pub scaled: f64,
    pub scaled_closed: f64,
    pub holds: bool,
}

/// `I(θ) = ∫₀¹ dt / |e^{iθ} − t|²` by adaptive quadrature.
pub fn i_theta_quadrature(theta: f64) -> f64 {
    let (c, s2) = (theta.cos(), theta.sin().powi(2));
    let f = |t: f64| 1.0 / ((t - c).powi(2) + s2);
    let tol = 1e-14 / theta.sin();
    if c > 0.0 && c < 1.0 {
        adaptive(f, 0.0, c, tol, 40).value + adaptive(f, c, 1.0, tol, 40).value
    } else {
        adaptive(f, 0.0, 1.0, tol, 40).value
    }
}

pub fn resolvent_multiplier_bounds(theta: f64) -> Result<ResolventBounds> {
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::InvalidArgument(format!("theta = {theta} must lie in (0, pi)")));
    }
    let e = C64::from_polar(1.0, theta);
    let c = |n: i32| 1.0 / (e - (1.0 - 0.5f64.powi(n)));
    let mut variation = 0.0;
    for n in 1..=200 {
        let step = (c(n) - c(n - 1)).norm();
        variation += step;
        if step < 1e-18 * variation {
            break;
        }
    }
    let i_quadrature = i_theta_quadrature(theta);
    let i_closed = (PI - theta) / (2.0 * theta.sin());
    let scaled = (e - 1.0).norm() * i_quadrature;
    let scaled_closed = (PI - theta) / (2.0 * (theta / 2.0).cos());
    let holds = variation <= i_quadrature + 1e-8
        && (i_quadrature - i_closed).abs() <= 1e-8
        && (scaled - scaled_closed).abs() <= 1e-8;
    Ok(ResolventBounds { theta, variation, i_quadrature, i_closed, scaled, scaled_closed, holds })
}

pub fn itheta_table_csv(rows: &[ResolventBounds]) -> String {
    let mut s = String::from("theta,variation,I_quad,I_closed\n");
    for r in rows {
        let _ = writeln!(s, "{:e},{:e},{:e},{:e}", r.theta, r.variation, r.i_quadrature, r.i_closed);
    }
    s
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchauderReport {
    pub p: f64,
    /// Searched `‖Q_n‖_p`, `n = 0..dim`.
    pub q_norms: Vec<f64>,
    pub q_sup: f64,
    pub q_sup_upper: f64,
    pub tc_norm: f64,
    pub v1_norm: f64,
    pub bound: f64,
    pub holds: bool,
}

/// `‖T_c‖ ≤ sup_n ‖Q_n‖ · ‖c‖_{v₁}` for `T_c = B diag(c) B^{−1}` and the tail projections
/// `Q_n = B diag(0, …, 0, 1, …, 1) B^{−1}` (ones from slot `n`).
pub fn schauder_multiplier_bound(
    basis: &ComplexMatrix,
    c: &V1Sequence,
    p: f64,
    budget: &NormBudget,
    seed: u64,
) -> Result<SchauderReport> {
    let n = basis.nrows();
    if c.c.len() != n {
        return Err(Error::Dimension(format!("sequence of length {} for dimension {n}", c.c.len())));
    }
    let binv = invert(basis)?;
    let qs: Vec<ComplexMatrix> = (0..n)
        .map(|s| basis * real_diagonal(&(0..n).map(|k| if k >= s { 1.0 } else { 0.0 }).collect::<Vec<_>>()) * &binv)
        .collect();
    let q_norms = qs.iter().map(|q| Ok(op_pnorm(q, p, budget, seed)?.value)).collect::<Result<Vec<f64>>>()?;
    let q_sup_upper =
        qs.iter().map(|q| op_pnorm_upper(q, p)).collect::<Result<Vec<f64>>>()?.into_iter().fold(0.0, f64::max);
    let q_sup = q_norms.iter().copied().fold(0.0, f64::max);
    let tc = basis * complex_diagonal(&c.c) * &binv;
    let tc_norm = op_pnorm(&tc, p, budget, seed)?.value;
    let v1_norm = c.v1_norm();
    let bound = q_sup * v1_norm;
    Ok(SchauderReport { p, q_norms, q_sup, q_sup_upper, tc_norm, v1_norm, bound, holds: tc_norm <= bound + 1e-6 })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaximumPrincipleReport {
    pub n: usize,
    pub circle_sup: f64,
    /// `(j, sup over |λ| = 1 + 2^{−j})`.
    pub rings: Vec<(i32, f64)>,
    pub worst_ratio: f64,
    pub holds: bool,
}

/// `|λ − 1| ‖R(λ, T)‖` for `T = diag(1 − 2^{−k})`, sampled on `|λ| = 1 + 2^{−j}`, `0 ≤ j ≤ j_max`,
/// against its supremum over the unit circle minus `{1}`.
pub fn maximum_principle_check(n: usize, j_max: i32, angles: usize) -> MaximumPrincipleReport {
    let c = foguel_sequence(n);
    let half = angles / 2;
    let mut thetas: Vec<f64> = (1..=half).map(|k| PI * k as f64 / half as f64).collect();
    thetas.extend((0..half).map(|k| PI * 10f64.powf(-8.0 * k as f64 / half as f64) / 2.0));
    let value = |lam: C64| c.iter().map(|&ck| (lam - 1.0).norm() / (lam - ck).norm()).fold(0.0, f64::max);
    let sup_over = |r: f64| {
        thetas
            .par_iter()
            .map(|&t| value(C64::from_polar(r, t)).max(value(C64::from_polar(r, -t))))
            .collect::<Vec<f64>>()
            .into_iter()
            .fold(0.0, f64::max)
    };
    let circle_sup = sup_over(1.0);
    let rings: Vec<(i32, f64)> = (0..=j_max).map(|j| (j, sup_over(1.0 + 0.5f64.powi(j)))).collect();
    let worst_ratio = rings.iter().map(|r| r.1 / circle_sup).fold(0.0, f64::max);
    MaximumPrincipleReport { n, circle_sup, rings, worst_ratio, holds: worst_ratio <= 1.05 }
}

/// Random `α` with Gaussian entries.
pub fn random_alpha(m: usize, seed: u64, stream: u64) -> Vec<C64> {
    complex_gaussian_vec(&mut seeded_rng(seed, stream), m)
}

/// `‖B‖‖B^{−1}‖` in ℓᵖ, upper estimate.
pub fn basis_constant_upper(basis: &ComplexMatrix, p: f64) -> Result<f64> {
    Ok(op_pnorm_upper(basis, p)? * op_pnorm_upper(&invert(basis)?, p)?)
}
