//! Rademacher and Gaussian averages in ℓᵖ_n, and lower bounds for R-bounds.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lpcore::{
    complex_gaussian, complex_gaussian_vec, op_pnorm, pairwise_sum_f64, seeded_rng, spectral_norm, vec_p_norm,
    ComplexMatrix, LinearMap, MixedElement, NormBudget, C64,
};

/// Largest family size averaged exactly over all sign patterns.
pub const ENUMERATION_CAP: usize = 20;

const BATCH: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadMethod {
    ExactEnumeration,
    MonteCarlo,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadEstimate {
    pub value: f64,
    pub method: RadMethod,
    pub samples: usize,
    pub stderr: f64,
}

/// How [`rad_norm`] evaluates the average.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RadMode {
    Exact,
    MonteCarlo {
        samples: usize,
        seed: u64,
    },
    /// Exact up to [`ENUMERATION_CAP`], Monte Carlo beyond.
    Auto {
        samples: usize,
        seed: u64,
    },
}

impl RadMode {
    pub fn auto(seed: u64) -> Self {
        RadMode::Auto { samples: 1 << 14, seed }
    }
}

fn check_family(xs: &[Vec<C64>]) -> Result<usize> {
    let n = xs.first().map(Vec::len).ok_or_else(|| Error::InvalidArgument("empty family".into()))?;
    if xs.iter().any(|x| x.len() != n) {
        return Err(Error::Dimension("family members have different lengths".into()));
    }
    for (k, x) in xs.iter().enumerate() {
        if let Some(i) = x.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { index: k * n + i });
        }
    }
    Ok(n)
}

fn p_norm_sq(v: &[C64], p: f64) -> f64 {
    let r = vec_p_norm(v, p).unwrap_or(f64::NAN);
    r * r
}

/// Sign-normalized, `-0.0`-free, bit-sorted copy of the family.
fn canonical_family(xs: &[Vec<C64>]) -> Vec<Vec<C64>> {
    let mut out: Vec<Vec<C64>> = xs
        .iter()
        .map(|x| {
            let lead = x.iter().find(|z| z.re != 0.0 || z.im != 0.0);
            let flip = matches!(lead, Some(z) if z.re < 0.0 || (z.re == 0.0 && z.im < 0.0));
            x.iter()
                .map(|&z| {
                    let w = if flip { -z } else { z };
                    C64::new(w.re + 0.0, w.im + 0.0)
                })
                .collect()
        })
        .collect();
    out.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(u, v)| u.re.total_cmp(&v.re).then(u.im.total_cmp(&v.im)))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    out
}

/// `2^{-K} Σ_ε ‖Σ ε_k x_k‖_p²` over all sign patterns, via Gray code on chunks.
fn exact_mean_square(xs: &[Vec<C64>], p: f64) -> f64 {
    let k = xs.len();
    let n = xs[0].len();
    if k == 1 {
        return p_norm_sq(&xs[0], p);
    }
    // ε and −ε give the same norm, so fix ε_0 = +1 and enumerate the other K−1 signs.
    let free = k - 1;
    let chunk_bits = free.min(10);
    let outer = free - chunk_bits;
    let sums: Vec<f64> = (0..1usize << outer)
        .into_par_iter()
        .map(|hi| {
            let sign = |idx: usize, pattern_lo: usize| -> f64 {
                // idx ≥ 1: bits 0..chunk_bits from the Gray code, the rest from `hi`.
                let b = idx - 1;
                let bit = if b < chunk_bits { (pattern_lo >> b) & 1 } else { (hi >> (b - chunk_bits)) & 1 };
                if bit == 1 {
                    -1.0
                } else {
                    1.0
                }
            };
            let fresh = |gray: usize| -> Vec<C64> {
                let mut s = xs[0].clone();
                for (idx, x) in xs.iter().enumerate().skip(1) {
                    let e = sign(idx, gray);
                    for (si, xi) in s.iter_mut().zip(x) {
                        *si += xi * e;
                    }
                }
                s
            };
            let mut s = fresh(0);
            let mut total = p_norm_sq(&s, p);
            let mut gray = 0usize;
            for step in 1usize..1 << chunk_bits {
                let flip = step.trailing_zeros() as usize;
                gray ^= 1 << flip;
                if step % 256 == 0 {
                    s = fresh(gray);
                } else {
                    let e = sign(flip + 1, gray);
                    let x = &xs[flip + 1];
                    for i in 0..n {
                        s[i] += x[i] * (2.0 * e);
                    }
                }
                total += p_norm_sq(&s, p);
            }
            total
        })
        .collect();
    pairwise_sum_f64(&sums) / (1u64 << free) as f64
}

fn monte_carlo<F>(samples: usize, seed: u64, draw: F) -> (f64, f64)
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> f64 + Sync,
{
    let batches = samples.div_ceil(BATCH).max(1);
    let stats: Vec<(f64, f64)> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = seeded_rng(seed, b as u64);
            let count = BATCH.min(samples - b * BATCH);
            let vals: Vec<f64> = (0..count).map(|_| draw(&mut rng)).collect();
            let sum = pairwise_sum_f64(&vals);
            let sq: Vec<f64> = vals.iter().map(|v| v * v).collect();
            (sum, pairwise_sum_f64(&sq))
        })
        .collect();
    let sums: Vec<f64> = stats.iter().map(|s| s.0).collect();
    let sqs: Vec<f64> = stats.iter().map(|s| s.1).collect();
    let m = samples as f64;
    let mean = pairwise_sum_f64(&sums) / m;
    let var = ((pairwise_sum_f64(&sqs) / m - mean * mean) * m / (m - 1.0).max(1.0)).max(0.0);
    (mean, (var / m).sqrt())
}

fn root_estimate(mean_sq: f64, se_sq: f64, method: RadMethod, samples: usize) -> RadEstimate {
    let value = mean_sq.max(0.0).sqrt();
    let stderr = if value > 0.0 { se_sq / (2.0 * value) } else { se_sq.sqrt() };
    RadEstimate { value, method, samples, stderr }
}

/// `(E‖Σ ε_k x_k‖_p²)^{1/2}` over independent Rademacher signs.
pub fn rad_norm(xs: &[Vec<C64>], p: f64, mode: RadMode) -> Result<RadEstimate> {
    check_family(xs)?;
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    let k = xs.len();
    let exact = match mode {
        RadMode::Exact if k > ENUMERATION_CAP => {
            return Err(Error::InvalidArgument(format!("exact enumeration needs K <= {ENUMERATION_CAP}, got {k}")))
        }
        RadMode::Exact => true,
        RadMode::MonteCarlo { .. } => false,
        RadMode::Auto { .. } => k <= ENUMERATION_CAP,
    };
    if exact {
        let fam = canonical_family(xs);
        let ms = exact_mean_square(&fam, p);
        return Ok(RadEstimate {
            value: ms.sqrt(),
            method: RadMethod::ExactEnumeration,
            samples: 1 << (k - 1),
            stderr: 0.0,
        });
    }
    let (samples, seed) = match mode {
        RadMode::MonteCarlo { samples, seed } | RadMode::Auto { samples, seed } => (samples.max(2), seed),
        RadMode::Exact => unreachable!(),
    };
    let n = xs[0].len();
    let (ms, se) = monte_carlo(samples, seed, |rng| {
        let mut s = vec![C64::new(0.0, 0.0); n];
        for x in xs {
            let e = if rng.random::<bool>() { 1.0 } else { -1.0 };
            for (si, xi) in s.iter_mut().zip(x) {
                *si += xi * e;
            }
        }
        p_norm_sq(&s, p)
    });
    Ok(root_estimate(ms, se, RadMethod::MonteCarlo, samples))
}

/// `(E‖Σ g_k x_k‖_p²)^{1/2}` with standard complex Gaussians, `E|g|² = 1`.
pub fn gauss_norm(xs: &[Vec<C64>], p: f64, samples: usize, seed: u64) -> Result<RadEstimate> {
    let n = check_family(xs)?;
    if samples == 0 {
        return Err(Error::InvalidArgument("at least one sample is required".into()));
    }
    let (ms, se) = monte_carlo(samples, seed, |rng| {
        let mut s = vec![C64::new(0.0, 0.0); n];
        for x in xs {
            let g = complex_gaussian(rng);
            for (si, xi) in s.iter_mut().zip(x) {
                *si += xi * g;
            }
        }
        p_norm_sq(&s, p)
    });
    Ok(root_estimate(ms, se, RadMethod::MonteCarlo, samples))
}

/// `rad_norm / mixed_norm` for the family, computed exactly.
pub fn khintchine_ratio(xs: &[Vec<C64>], p: f64) -> Result<f64> {
    let rad = rad_norm(xs, p, RadMode::Exact)?;
    let mixed = MixedElement::from_columns(xs)?.norm(p)?;
    if mixed == 0.0 {
        return Err(Error::InvalidArgument("the family vanishes".into()));
    }
    Ok(rad.value / mixed)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RWitness {
    pub operators: Vec<usize>,
    pub vectors: Vec<Vec<C64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RBoundEstimate {
    pub lower_bound: f64,
    pub witness: RWitness,
    pub trials: usize,
}

fn rad_ratio(family: &[ComplexMatrix], ops: &[usize], xs: &[Vec<C64>], p: f64) -> f64 {
    let images: Vec<Vec<C64>> = ops.iter().zip(xs).map(|(&i, x)| family[i].apply(x)).collect();
    let num = rad_norm(&images, p, RadMode::Exact).map(|r| r.value).unwrap_or(0.0);
    let den = rad_norm(xs, p, RadMode::Exact).map(|r| r.value).unwrap_or(0.0);
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

const MAX_TERMS: usize = 6;
const ASCENT_ROUNDS: usize = 4;

fn r_trial(family: &[ComplexMatrix], p: f64, seed: u64, trial: usize) -> (f64, RWitness) {
    let mut rng = seeded_rng(seed, 1 << 32 | trial as u64);
    let n = family[0].ncols();
    let k = rng.random_range(2..=MAX_TERMS);
    let mut ops: Vec<usize> = (0..k).map(|_| rng.random_range(0..family.len())).collect();
    let mut xs: Vec<Vec<C64>> = (0..k).map(|_| complex_gaussian_vec(&mut rng, n)).collect();
    let mut best = rad_ratio(family, &ops, &xs, p);
    for round in 0..ASCENT_ROUNDS {
        for slot in 0..k {
            let candidates: Vec<usize> = if family.len() <= 8 {
                (0..family.len()).collect()
            } else {
                (0..8).map(|_| rng.random_range(0..family.len())).collect()
            };
            for c in candidates {
                if c == ops[slot] {
                    continue;
                }
                let old = std::mem::replace(&mut ops[slot], c);
                let r = rad_ratio(family, &ops, &xs, p);
                if r > best {
                    best = r;
                } else {
                    ops[slot] = old;
                }
            }
            let step = 0.5 / (round + 1) as f64;
            for _ in 0..3 {
                let old = xs[slot].clone();
                let scale = vec_p_norm(&old, 2.0).unwrap_or(1.0).max(1e-300) / (n as f64).sqrt();
                for z in xs[slot].iter_mut() {
                    *z += complex_gaussian(&mut rng) * (step * scale);
                }
                let r = rad_ratio(family, &ops, &xs, p);
                if r > best {
                    best = r;
                } else {
                    xs[slot] = old;
                }
            }
        }
    }
    (best, RWitness { operators: ops, vectors: xs })
}

/// Lower bound for the R-bound of a finite family on ℓᵖ_n.
///
/// Single-operator norms are searched first (the `K = 1` case), then `trials`
/// seeded coordinate-ascent runs over assignments and vectors.
pub fn r_bound_lower(family: &[ComplexMatrix], p: f64, trials: usize, seed: u64) -> Result<RBoundEstimate> {
    let first = family.first().ok_or_else(|| Error::InvalidArgument("empty operator family".into()))?;
    let n = first.nrows();
    if family.iter().any(|t| t.nrows() != n || t.ncols() != n) {
        return Err(Error::Dimension("family members must share one square dimension".into()));
    }
    let budget = NormBudget::default();
    let singles: Vec<_> = family
        .par_iter()
        .enumerate()
        .map(|(i, t)| op_pnorm(t, p, &budget, seed.wrapping_add(i as u64)).map(|e| (i, e)))
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0.0;
    let mut witness = RWitness { operators: vec![0], vectors: vec![vec![C64::new(1.0, 0.0); n]] };
    for (i, e) in singles {
        if e.value > best {
            best = e.value;
            witness = RWitness { operators: vec![i], vectors: vec![e.witness] };
        }
    }
    let runs: Vec<(f64, RWitness)> = (0..trials).into_par_iter().map(|t| r_trial(family, p, seed, t)).collect();
    for (v, w) in runs {
        if v > best {
            best = v;
            witness = w;
        }
    }
    Ok(RBoundEstimate { lower_bound: best, witness, trials })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HullReport {
    /// Lower bound for the R-bound of the averaged operator alone.
    pub averaged_lower: f64,
    /// `Σ|a_i|`.
    pub weight_sum: f64,
    /// The caller's upper bound for the R-bound of the family.
    pub family_upper: f64,
    pub holds: bool,
}

/// Compares the R-bound of `Σ a_i V_i` against `Σ|a_i| · R(F)` for a caller-supplied bound `R(F)`.
pub fn convex_hull_rbound_check(
    family: &[ComplexMatrix],
    weights: &[C64],
    family_upper: f64,
    p: f64,
    trials: usize,
    seed: u64,
) -> Result<HullReport> {
    if weights.len() != family.len() || family.is_empty() {
        return Err(Error::Dimension("one weight per family member is required".into()));
    }
    let mut avg = ComplexMatrix::zeros(family[0].nrows(), family[0].ncols());
    for (v, &a) in family.iter().zip(weights) {
        avg += v * a;
    }
    let est = r_bound_lower(std::slice::from_ref(&avg), p, trials, seed)?;
    let weight_sum: f64 = weights.iter().map(|a| a.norm()).sum();
    let holds = est.lower_bound <= weight_sum * family_upper * (1.0 + 1e-9) + 1e-12;
    Ok(HullReport { averaged_lower: est.lower_bound, weight_sum, family_upper, holds })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairedGaussReport {
    /// `(E‖Σ_i g_i Σ_j b_ij x_j‖²)^{1/2}`.
    pub lhs: f64,
    /// `‖b‖_{ℓ²→ℓ²} (E‖Σ_j g_j x_j‖²)^{1/2}`.
    pub rhs: f64,
    /// Standard error of the paired difference of squares.
    pub stderr: f64,
    pub holds: bool,
}

/// The Gaussian matrix inequality `‖Σ_i g_i ⊗ Σ_j b_ij x_j‖ ≤ ‖b‖ ‖Σ_j g_j ⊗ x_j‖`, estimated
/// on shared draws and judged within three standard errors.
pub fn gaussian_matrix_inequality(
    b: &ComplexMatrix,
    xs: &[Vec<C64>],
    p: f64,
    samples: usize,
    seed: u64,
) -> Result<PairedGaussReport> {
    let dim = check_family(xs)?;
    let m = xs.len();
    if b.nrows() != m || b.ncols() != m {
        return Err(Error::Dimension("scalar matrix must be K x K for a family of K vectors".into()));
    }
    let ys: Vec<Vec<C64>> = (0..m)
        .map(|i| {
            let mut y = vec![C64::new(0.0, 0.0); dim];
            for (j, x) in xs.iter().enumerate() {
                for (yi, xi) in y.iter_mut().zip(x) {
                    *yi += b[(i, j)] * xi;
                }
            }
            y
        })
        .collect();
    let bnorm = spectral_norm(b);
    let samples = samples.max(2);
    let draws: Vec<(f64, f64)> = (0..samples.div_ceil(BATCH))
        .into_par_iter()
        .flat_map_iter(|batch| {
            let mut rng = seeded_rng(seed, batch as u64);
            let count = BATCH.min(samples - batch * BATCH);
            let xs = &xs;
            let ys = &ys;
            (0..count)
                .map(|_| {
                    let g: Vec<C64> = (0..m).map(|_| complex_gaussian(&mut rng)).collect();
                    let mut sx = vec![C64::new(0.0, 0.0); dim];
                    let mut sy = vec![C64::new(0.0, 0.0); dim];
                    for k in 0..m {
                        for i in 0..dim {
                            sx[i] += g[k] * xs[k][i];
                            sy[i] += g[k] * ys[k][i];
                        }
                    }
                    (p_norm_sq(&sy, p), p_norm_sq(&sx, p))
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let nf = samples as f64;
    let l: Vec<f64> = draws.iter().map(|d| d.0).collect();
    let r: Vec<f64> = draws.iter().map(|d| d.1).collect();
    let diff: Vec<f64> = draws.iter().map(|d| d.0 - bnorm * bnorm * d.1).collect();
    let mean_l = pairwise_sum_f64(&l) / nf;
    let mean_r = pairwise_sum_f64(&r) / nf;
    let mean_d = pairwise_sum_f64(&diff) / nf;
    let var_d: Vec<f64> = diff.iter().map(|d| (d - mean_d) * (d - mean_d)).collect();
    let stderr = (pairwise_sum_f64(&var_d) / (nf - 1.0) / nf).sqrt();
    Ok(PairedGaussReport {
        lhs: mean_l.sqrt(),
        rhs: bnorm * mean_r.sqrt(),
        stderr,
        holds: mean_d <= 3.0 * stderr + 1e-12 * (1.0 + mean_l),
    })
}
