//! Square functions `‖x‖_{T,α}`, the mean ergodic splitting, and the experiments comparing
//! square functions of different orders.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcalc::{frac_power, unit_projection, ProjectionMethod};
use crate::lpcore::{check_square, complex_gaussian_vec, identity, seeded_rng, vec_p_norm, ComplexMatrix, C64};

/// Block length of the stopping rule.
pub const STOP_WINDOW: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SquareFnConfig {
    /// Relative size below which a block of terms ends the summation.
    pub tol: f64,
    pub k_max: usize,
    /// Values below this are treated as zero.
    pub floor: f64,
}

impl Default for SquareFnConfig {
    fn default() -> Self {
        SquareFnConfig { tol: 1e-13, k_max: 1 << 17, floor: 1e-300 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SquareFnReport {
    pub value: f64,
    /// Number of terms summed.
    pub k_used: usize,
    /// `ℓᵖ(ℓ²)` norm of the last block of terms.
    pub tail_estimate: f64,
    pub converged: bool,
    pub alpha: f64,
}

/// `‖x‖_{T,α} = ‖(Σ_k k^{2α−1} |T^{k−1}(I − T)^α x|²)^{1/2}‖_p`, truncated adaptively.
pub fn square_fn(t: &ComplexMatrix, x: &[C64], alpha: f64, p: f64, config: &SquareFnConfig) -> Result<SquareFnReport> {
    check_square(t)?;
    if x.len() != t.nrows() {
        return Err(Error::Dimension(format!("vector of length {} for a {}-dimensional operator", x.len(), t.nrows())));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidExponent(p));
    }
    let f = frac_power(t, alpha)?;
    let first = &f * nalgebra::DVector::from_column_slice(x);
    square_fn_from_orbit(t, first, alpha, p, config)
}

fn square_fn_from_orbit(
    t: &ComplexMatrix,
    mut y: nalgebra::DVector<C64>,
    alpha: f64,
    p: f64,
    config: &SquareFnConfig,
) -> Result<SquareFnReport> {
    let n = t.nrows();
    let mut acc = vec![0.0f64; n];
    let mut block = vec![0.0f64; n];
    let fold = |v: &[f64]| -> f64 { v.iter().map(|s| s.sqrt().powf(p)).sum::<f64>().powf(1.0 / p) };
    let mut k = 0usize;
    let mut tail = f64::INFINITY;
    while k < config.k_max {
        k += 1;
        let w = (k as f64).powf(2.0 * alpha - 1.0);
        for i in 0..n {
            let s = w * y[i].norm_sqr();
            acc[i] += s;
            block[i] += s;
        }
        if !acc.iter().all(|a| a.is_finite()) {
            return Err(Error::NoConvergence("square function terms overflowed".into()));
        }
        if k % STOP_WINDOW == 0 {
            tail = fold(&block);
            let value = fold(&acc);
            block.iter_mut().for_each(|b| *b = 0.0);
            if tail < config.tol * value || value < config.floor {
                return Ok(SquareFnReport { value, k_used: k, tail_estimate: tail, converged: true, alpha });
            }
        }
        y = t * y;
    }
    let value = fold(&acc);
    if k % STOP_WINDOW != 0 {
        tail = fold(&block);
    }
    Ok(SquareFnReport { value, k_used: k, tail_estimate: tail, converged: false, alpha })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErgodicSplit {
    /// Projection onto `Ker(I − T)` along the closure of `Ran(I − T)`.
    #[serde(with = "crate::lpcore::matrix_serde")]
    pub projection: ComplexMatrix,
    /// `I − P_T`.
    #[serde(with = "crate::lpcore::matrix_serde")]
    pub complement: ComplexMatrix,
    pub method: ProjectionMethod,
    pub converged: bool,
}

/// The mean ergodic splitting `X = Ker(I − T) ⊕ closure(Ran(I − T))`.
pub fn ergodic_projection(t: &ComplexMatrix) -> Result<ErgodicSplit> {
    let u = unit_projection(t, 1e-12)?;
    let complement = identity(t.nrows()) - &u.projection;
    Ok(ErgodicSplit { projection: u.projection, complement, method: u.method, converged: u.converged })
}

/// `Λ_m = (1/(m+1)) Σ_{k=0}^{m} (I − T^k)`.
pub fn cesaro_lambda(t: &ComplexMatrix, m: usize) -> Result<ComplexMatrix> {
    check_square(t)?;
    let n = t.nrows();
    let mut power = identity(n);
    let mut sum = ComplexMatrix::zeros(n, n);
    for _ in 0..=m {
        sum += identity(n) - &power;
        power = &power * t;
    }
    Ok(sum / C64::new((m + 1) as f64, 0.0))
}

/// Smallest integer `N > α`, so that `N = α + γ` with `γ > 0`.
pub fn default_coefficient_order(alpha: f64) -> usize {
    alpha.floor() as usize + 1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceCoefficients {
    pub alpha: f64,
    pub order: usize,
    /// `c_k = k(k+1)⋯(k+N−2) / k^{α−1/2}` for `k = 1..=k_max`.
    pub coefficients: Vec<f64>,
}

pub fn equivalence_coefficients(alpha: f64, order: usize, k_max: usize) -> Result<EquivalenceCoefficients> {
    if order == 0 {
        return Err(Error::InvalidArgument("the order N must be at least 1".into()));
    }
    let coefficients = (1..=k_max)
        .map(|k| {
            let kf = k as f64;
            let rising: f64 = (0..order - 1).map(|j| kf + j as f64).product();
            rising / kf.powf(alpha - 0.5)
        })
        .collect();
    Ok(EquivalenceCoefficients { alpha, order, coefficients })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratingCheck {
    pub partial_sum: f64,
    /// `(N−1)! / (1−z)^N`.
    pub closed_form: f64,
    pub terms: usize,
}

/// Partial sums of `Σ_k k(k+1)⋯(k+N−2) z^{k−1}` against `(N−1)!/(1−z)^N`, for real `|z| < 1`.
pub fn generating_identity_check(order: usize, z: f64, tol: f64) -> Result<GeneratingCheck> {
    if order == 0 || !(z.abs() < 1.0) {
        return Err(Error::InvalidArgument("need N >= 1 and |z| < 1".into()));
    }
    let factorial: f64 = (1..order).map(|j| j as f64).product();
    let closed_form = factorial / (1.0 - z).powi(order as i32);
    let mut sum = 0.0;
    let mut k = 0usize;
    loop {
        k += 1;
        let kf = k as f64;
        let rising: f64 = (0..order - 1).map(|j| kf + j as f64).product();
        let term = rising * z.powi(k as i32 - 1);
        sum += term;
        if (term.abs() < tol * sum.abs() && kf > order as f64) || k >= 1 << 20 {
            break;
        }
    }
    Ok(GeneratingCheck { partial_sum: sum, closed_form, terms: k })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceRow {
    pub trial: usize,
    pub value_alpha: f64,
    pub value_beta: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub alpha: f64,
    pub beta: f64,
    pub p: f64,
    pub rows: Vec<EquivalenceRow>,
    pub c_min: f64,
    pub c_max: f64,
    /// Trials dropped because a square function did not converge or vanished.
    pub excluded: Vec<usize>,
}

impl EquivalenceReport {
    pub fn spread(&self) -> f64 {
        self.c_max / self.c_min
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("trial,value_alpha,value_beta,ratio\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{:e},{:e},{:e}", r.trial, r.value_alpha, r.value_beta, r.ratio);
        }
        out
    }
}

fn complement_sample(split: &ErgodicSplit, seed: u64, trial: usize) -> Vec<C64> {
    let n = split.complement.nrows();
    let mut rng = seeded_rng(seed, trial as u64);
    let g = nalgebra::DVector::from_vec(complex_gaussian_vec(&mut rng, n));
    (&split.complement * g).iter().copied().collect()
}

/// Ratios `‖x‖_{T,α} / ‖x‖_{T,β}` for Gaussian `x` projected off `Ker(I − T)`.
pub fn equivalence_experiment(
    t: &ComplexMatrix,
    alpha: f64,
    beta: f64,
    p: f64,
    trials: usize,
    seed: u64,
    config: &SquareFnConfig,
) -> Result<EquivalenceReport> {
    let split = ergodic_projection(t)?;
    let fa = frac_power(t, alpha)?;
    let fb = if beta == alpha { fa.clone() } else { frac_power(t, beta)? };
    let outcomes: Vec<Option<EquivalenceRow>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let x = nalgebra::DVector::from_vec(complement_sample(&split, seed, trial));
            let a = square_fn_from_orbit(t, &fa * &x, alpha, p, config)?;
            let b = if beta == alpha { a } else { square_fn_from_orbit(t, &fb * &x, beta, p, config)? };
            if !(a.converged && b.converged) || b.value <= config.floor || a.value <= config.floor {
                return Ok(None);
            }
            Ok(Some(EquivalenceRow { trial, value_alpha: a.value, value_beta: b.value, ratio: a.value / b.value }))
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(trials);
    let mut excluded = Vec::new();
    for (trial, o) in outcomes.into_iter().enumerate() {
        match o {
            Some(r) => rows.push(r),
            None => excluded.push(trial),
        }
    }
    let c_min = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let c_max = rows.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
    Ok(EquivalenceReport { alpha, beta, p, rows, c_min, c_max, excluded })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErgodicNormReport {
    /// `‖x‖_p / (‖P_T x‖_p + ‖x‖_{T,1})` per trial.
    pub ratios: Vec<f64>,
    pub min: f64,
    pub max: f64,
    pub all_finite: bool,
}

/// Compares `‖x‖_p` with `‖P_T x‖_p + ‖x‖_{T,1}` on Gaussian samples.
pub fn ergodic_norm_check(
    t: &ComplexMatrix,
    p: f64,
    trials: usize,
    seed: u64,
    config: &SquareFnConfig,
) -> Result<ErgodicNormReport> {
    let split = ergodic_projection(t)?;
    let f = frac_power(t, 1.0)?;
    let n = t.nrows();
    let ratios: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = seeded_rng(seed, trial as u64);
            let x = nalgebra::DVector::from_vec(complex_gaussian_vec(&mut rng, n));
            let px: Vec<C64> = (&split.projection * &x).iter().copied().collect();
            let sq = square_fn_from_orbit(t, &f * &x, 1.0, p, config)?;
            let xs: Vec<C64> = x.iter().copied().collect();
            Ok(vec_p_norm(&xs, p)? / (vec_p_norm(&px, p)? + sq.value))
        })
        .collect::<Result<_>>()?;
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let all_finite = ratios.iter().all(|r| r.is_finite());
    Ok(ErgodicNormReport { ratios, min, max, all_finite })
}
