use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::norms::{p_norm_of_moduli, FiberNorm};
use super::{complex_gaussian_vec, seeded_rng, ComplexMatrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// A linear map between coordinate spaces, given by its action and its adjoint action.
pub trait LinearMap: Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn apply(&self, x: &[C64]) -> Vec<C64>;
    fn apply_adjoint(&self, y: &[C64]) -> Vec<C64>;
}

impl LinearMap for ComplexMatrix {
    fn nrows(&self) -> usize {
        self.nrows()
    }

    fn ncols(&self) -> usize {
        self.ncols()
    }

    fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; self.nrows()];
        for (j, &xj) in x.iter().enumerate() {
            if xj == ZERO {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.column(j).iter()) {
                *o += a * xj;
            }
        }
        out
    }

    fn apply_adjoint(&self, y: &[C64]) -> Vec<C64> {
        (0..self.ncols()).map(|j| self.column(j).iter().zip(y).map(|(a, b)| a.conj() * b).sum()).collect()
    }
}

/// Search effort for the norm estimators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormBudget {
    /// Random complex Gaussian starting points.
    pub restarts: usize,
    /// Maximum fixed-point steps per start.
    pub iterations: usize,
    /// Relative stagnation threshold for stopping a start early.
    pub tol: f64,
    /// Number of coordinate vectors tried as deterministic starts, chosen by column size.
    pub basis_starts: usize,
}

impl Default for NormBudget {
    fn default() -> Self {
        NormBudget { restarts: 16, iterations: 100, tol: 1e-12, basis_starts: 4 }
    }
}

impl NormBudget {
    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_iterations(mut self, iterations: usize) -> Self {
        self.iterations = iterations;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormMethod {
    /// Closed form (singular values, or column/row sums at the endpoints).
    Exact,
    /// Best ratio found by the fixed-point search; a lower bound.
    Search,
    /// The map vanishes; the witness is the zero vector.
    ZeroMap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub witness: Vec<C64>,
    pub method: NormMethod,
}

impl NormEstimate {
    pub fn is_zero_map(&self) -> bool {
        self.method == NormMethod::ZeroMap
    }
}

struct Trial {
    value: f64,
    witness: Vec<C64>,
}

fn run_start<M: LinearMap + ?Sized>(
    map: &M,
    domain: &FiberNorm,
    codomain: &FiberNorm,
    start: &[C64],
    budget: &NormBudget,
) -> Trial {
    let dual_domain = domain.dual();
    let n0 = domain.norm(start);
    if n0 == 0.0 || !n0.is_finite() {
        return Trial { value: 0.0, witness: vec![ZERO; start.len()] };
    }
    let mut x: Vec<C64> = start.iter().map(|z| z / n0).collect();
    let mut best = Trial { value: 0.0, witness: x.clone() };
    let mut previous = f64::NEG_INFINITY;
    for _ in 0..budget.iterations.max(1) {
        let y = map.apply(&x);
        let value = codomain.norm(&y) / domain.norm(&x);
        if value > best.value {
            best = Trial { value, witness: x.clone() };
        }
        if value == 0.0 {
            break;
        }
        let z = map.apply_adjoint(&codomain.dual_vector(&y));
        let dual_size = dual_domain.norm(&z);
        let pairing: f64 = x.iter().zip(&z).map(|(a, b)| (a * b.conj()).re).sum();
        let stationary = dual_size <= pairing * (1.0 + budget.tol);
        let stagnant = (value - previous).abs() <= budget.tol * value;
        if stationary || stagnant {
            break;
        }
        previous = value;
        let next = dual_domain.dual_vector(&z);
        if domain.norm(&next) == 0.0 {
            break;
        }
        x = next;
    }
    best
}

/// Lower bound for the norm of `map` from the `domain` norm to the `codomain` norm.
///
/// Starts, in order: the supplied warm starts, the `budget.basis_starts` coordinate
/// vectors with the largest images, the all-ones vector, then `budget.restarts`
/// seeded random vectors. Each start runs the dual-gradient fixed-point iteration and
/// the best ratio seen at any iterate is kept, so the result is nondecreasing in the
/// budget for a fixed seed. Starts run in parallel and are reduced in start order.
pub fn map_norm_lower<M: LinearMap + ?Sized>(
    map: &M,
    domain: &FiberNorm,
    codomain: &FiberNorm,
    budget: &NormBudget,
    seed: u64,
    warm_starts: &[Vec<C64>],
) -> Result<NormEstimate> {
    let n = map.ncols();
    if domain.dim() != n || codomain.dim() != map.nrows() {
        return Err(Error::Dimension(format!(
            "map is {}x{} but norms have dimensions {} -> {}",
            map.nrows(),
            n,
            domain.dim(),
            codomain.dim()
        )));
    }
    if budget.iterations == 0 {
        return Err(Error::InvalidArgument("iteration budget must be positive".into()));
    }
    if n == 0 {
        return Ok(NormEstimate { value: 0.0, witness: vec![], method: NormMethod::ZeroMap });
    }

    let mut starts: Vec<Vec<C64>> = warm_starts.iter().filter(|w| w.len() == n).cloned().collect();
    if budget.basis_starts > 0 {
        let mut sizes: Vec<(usize, f64)> = (0..n)
            .map(|j| {
                let mut e = vec![ZERO; n];
                e[j] = ONE;
                (j, codomain.norm(&map.apply(&e)))
            })
            .collect();
        sizes.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        for &(j, _) in sizes.iter().take(budget.basis_starts) {
            let mut e = vec![ZERO; n];
            e[j] = ONE;
            starts.push(e);
        }
    }
    starts.push(vec![ONE; n]);
    for r in 0..budget.restarts {
        let mut rng = seeded_rng(seed, r as u64);
        starts.push(complex_gaussian_vec(&mut rng, n));
    }

    let trials: Vec<Trial> = starts.par_iter().map(|s| run_start(map, domain, codomain, s, budget)).collect();
    let mut best = Trial { value: 0.0, witness: vec![ZERO; n] };
    for t in trials {
        if t.value > best.value {
            best = t;
        }
    }
    if best.value == 0.0 {
        return Ok(NormEstimate { value: 0.0, witness: vec![ZERO; n], method: NormMethod::ZeroMap });
    }
    Ok(NormEstimate { value: best.value, witness: best.witness, method: NormMethod::Search })
}

/// Hölder upper bound `(Σ_f ‖A|_f‖^{q})^{1/q}` over domain fibers, with each fiber block
/// bounded through its columns by `(Σ_i ‖A e_i‖²)^{1/2}` and `q` the conjugate of the
/// domain exponent.
pub fn map_norm_upper<M: LinearMap + ?Sized>(map: &M, domain: &FiberNorm, codomain: &FiberNorm) -> Result<f64> {
    let n = map.ncols();
    if domain.dim() != n || codomain.dim() != map.nrows() {
        return Err(Error::Dimension("norm dimensions do not match the map".into()));
    }
    let column_norms: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut e = vec![ZERO; n];
            e[j] = ONE;
            codomain.norm(&map.apply(&e))
        })
        .collect();
    let mut fiber_bounds = Vec::with_capacity(domain.fibers().len());
    let mut start = 0;
    for &len in domain.fibers() {
        let cols = &column_norms[start..start + len];
        fiber_bounds.push(if len == 1 { cols[0] } else { p_norm_of_moduli(cols.iter().copied(), 2.0) });
        start += len;
    }
    Ok(p_norm_of_moduli(fiber_bounds.into_iter(), super::conjugate_exponent(domain.p())))
}

fn validate_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        Err(Error::InvalidExponent(p))
    } else {
        Ok(())
    }
}

fn max_abs_column_sum(a: &ComplexMatrix) -> f64 {
    (0..a.ncols()).map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

fn max_abs_row_sum(a: &ComplexMatrix) -> f64 {
    (0..a.nrows()).map(|i| a.row(i).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Largest singular value.
pub fn spectral_norm(a: &ComplexMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.singular_values().max()
}

/// `‖A‖_{p→p}`: exact at `p ∈ {1, 2, ∞}`, otherwise the lower bound of [`map_norm_lower`].
pub fn op_pnorm(a: &ComplexMatrix, p: f64, budget: &NormBudget, seed: u64) -> Result<NormEstimate> {
    op_pnorm_warm(a, p, budget, seed, &[])
}

pub(crate) fn op_pnorm_warm(
    a: &ComplexMatrix,
    p: f64,
    budget: &NormBudget,
    seed: u64,
    warm_starts: &[Vec<C64>],
) -> Result<NormEstimate> {
    validate_exponent(p)?;
    super::check_finite(a)?;
    if budget.iterations == 0 {
        return Err(Error::InvalidArgument("iteration budget must be positive".into()));
    }
    let n = a.ncols();
    if a.iter().all(|z| *z == ZERO) {
        return Ok(NormEstimate { value: 0.0, witness: vec![ZERO; n], method: NormMethod::ZeroMap });
    }
    if p == 2.0 {
        // Vectors from `svd(_, true)` are unreliable on rank-deficient input; take the
        // witness from the Hermitian eigenproblem of AᴴA instead.
        let value = spectral_norm(a);
        let gram = a.adjoint() * a;
        let eig = nalgebra::SymmetricEigen::new(gram);
        let k = eig.eigenvalues.imax();
        let witness = eig.eigenvectors.column(k).iter().copied().collect();
        return Ok(NormEstimate { value, witness, method: NormMethod::Exact });
    }
    if p == 1.0 {
        let (j, value) = (0..n)
            .map(|j| (j, a.column(j).iter().map(|z| z.norm()).sum::<f64>()))
            .fold((0, 0.0), |b, c| if c.1 > b.1 { c } else { b });
        let mut witness = vec![ZERO; n];
        witness[j] = ONE;
        return Ok(NormEstimate { value, witness, method: NormMethod::Exact });
    }
    if p.is_infinite() {
        let (i, value) = (0..a.nrows())
            .map(|i| (i, a.row(i).iter().map(|z| z.norm()).sum::<f64>()))
            .fold((0, 0.0), |b, c| if c.1 > b.1 { c } else { b });
        let witness = a.row(i).iter().map(|z| if z.norm() > 0.0 { z.conj() / z.norm() } else { ONE }).collect();
        return Ok(NormEstimate { value, witness, method: NormMethod::Exact });
    }
    let domain = FiberNorm::lp(p, n)?;
    let codomain = FiberNorm::lp(p, a.nrows())?;
    let mut est = map_norm_lower(a, &domain, &codomain, budget, seed, warm_starts)?;
    // Rounding can push the attained ratio an ulp past the interpolation bound.
    est.value = est.value.min(op_pnorm_upper(a, p)?);
    Ok(est)
}

/// Upper bound for `‖A‖_{p→p}`: the smaller of the Riesz–Thorin interpolation bound
/// `‖A‖₁^{1/p} ‖A‖_∞^{1−1/p}` and, at `p = 2`, the exact value.
pub fn op_pnorm_upper(a: &ComplexMatrix, p: f64) -> Result<f64> {
    validate_exponent(p)?;
    if p == 2.0 {
        return Ok(spectral_norm(a));
    }
    let c = max_abs_column_sum(a);
    let r = max_abs_row_sum(a);
    if p.is_infinite() {
        return Ok(r);
    }
    if c == 0.0 || r == 0.0 {
        return Ok(0.0);
    }
    Ok(c.powf(1.0 / p) * r.powf(1.0 - 1.0 / p))
}

/// Flattens an `n × n` array of `m × m` blocks into an `nm × nm` matrix, outer index slow.
pub fn flatten_blocks(blocks: &[Vec<ComplexMatrix>]) -> Result<ComplexMatrix> {
    let n = blocks.len();
    if n == 0 {
        return Ok(ComplexMatrix::zeros(0, 0));
    }
    let m = blocks[0].first().map_or(0, |b| b.nrows());
    for row in blocks {
        if row.len() != n {
            return Err(Error::Dimension("block array is not square".into()));
        }
        if row.iter().any(|b| b.nrows() != m || b.ncols() != m) {
            return Err(Error::Dimension("blocks have different sizes".into()));
        }
    }
    Ok(ComplexMatrix::from_fn(n * m, n * m, |r, c| blocks[r / m][c / m][(r % m, c % m)]))
}

/// `‖[T_{ij}]‖` on ℓᵖ_n(ℓᵖ_m).
pub fn block_pnorm(blocks: &[Vec<ComplexMatrix>], p: f64, budget: &NormBudget, seed: u64) -> Result<NormEstimate> {
    let flat = flatten_blocks(blocks)?;
    op_pnorm(&flat, p, budget, seed)
}

/// Best ratio `‖Ax‖_p / ‖x‖_p` over `samples` seeded random directions.
///
/// Used as an independent brute-force oracle for small dimensions.
pub fn sampled_pnorm_lower(a: &ComplexMatrix, p: f64, samples: usize, seed: u64) -> Result<f64> {
    validate_exponent(p)?;
    const CHUNK: usize = 4096;
    let chunks = samples.div_ceil(CHUNK);
    let best: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = seeded_rng(seed, c as u64);
            let mut best = 0.0_f64;
            for _ in 0..CHUNK.min(samples - c * CHUNK) {
                let x = complex_gaussian_vec(&mut rng, a.ncols());
                let nx = p_norm_of_moduli(x.iter().map(|z| z.norm()), p);
                let y = a.apply(&x);
                best = best.max(p_norm_of_moduli(y.iter().map(|z| z.norm()), p) / nx);
            }
            best
        })
        .collect();
    Ok(best.into_iter().fold(0.0, f64::max))
}
