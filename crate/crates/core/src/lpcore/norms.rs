use super::{check_finite, ComplexMatrix, C64, ZERO};
use crate::error::{Error, Result};

/// `(Σ|v_i|^p)^{1/p}`; `p = ∞` gives the max modulus.
pub fn vec_p_norm(v: &[C64], p: f64) -> Result<f64> {
    if let Some(index) = v.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    Ok(p_norm_of_moduli(v.iter().map(|z| z.norm()), p))
}

/// Scaled p-norm of nonnegative reals, robust against overflow and underflow.
pub(crate) fn p_norm_of_moduli<I: Iterator<Item = f64> + Clone>(moduli: I, p: f64) -> f64 {
    let scale = moduli.clone().fold(0.0_f64, f64::max);
    if scale == 0.0 || p.is_infinite() {
        return scale;
    }
    if p == 2.0 {
        return scale * moduli.map(|a| (a / scale) * (a / scale)).sum::<f64>().sqrt();
    }
    if p == 1.0 {
        return moduli.sum();
    }
    scale * moduli.map(|a| (a / scale).powf(p)).sum::<f64>().powf(1.0 / p)
}

/// An element of ℓᵖ_n(ℓ²_K), stored as an `n × K` array.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedElement {
    values: ComplexMatrix,
}

impl MixedElement {
    pub fn new(values: ComplexMatrix) -> Result<Self> {
        check_finite(&values)?;
        Ok(MixedElement { values })
    }

    /// Columns are the sequence terms `x_1, ..., x_K`.
    pub fn from_columns(columns: &[Vec<C64>]) -> Result<Self> {
        let k = columns.len();
        let n = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::Dimension("sequence terms have different lengths".into()));
        }
        Self::new(ComplexMatrix::from_fn(n, k, |i, j| columns[j][i]))
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn k(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &ComplexMatrix {
        &self.values
    }

    /// Pointwise square function `(Σ_k |x_k(i)|²)^{1/2}`.
    pub fn pointwise_l2(&self) -> Vec<f64> {
        (0..self.n()).map(|i| p_norm_of_moduli(self.values.row(i).iter().map(|z| z.norm()), 2.0)).collect()
    }

    pub fn norm(&self, p: f64) -> Result<f64> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidExponent(p));
        }
        Ok(p_norm_of_moduli(self.pointwise_l2().into_iter(), p))
    }
}

/// `‖(Σ_k |x_k|²)^{1/2}‖_p`.
pub fn mixed_norm(e: &MixedElement, p: f64) -> Result<f64> {
    e.norm(p)
}

/// The norm of ℓᵖ(ℓ²) over a partition of coordinates into contiguous fibers.
///
/// With all fibers of length 1 this is the plain ℓᵖ norm. `p` may be 1 or ∞ so that
/// dual norms are representable.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberNorm {
    p: f64,
    fibers: Vec<usize>,
}

impl FiberNorm {
    pub fn new(p: f64, fibers: Vec<usize>) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidExponent(p));
        }
        if fibers.iter().any(|&f| f == 0) {
            return Err(Error::InvalidArgument("fibers must be nonempty".into()));
        }
        Ok(FiberNorm { p, fibers })
    }

    pub fn lp(p: f64, n: usize) -> Result<Self> {
        Self::new(p, vec![1; n])
    }

    /// `n` fibers of length `k`, outer index slow.
    pub fn uniform(p: f64, n: usize, k: usize) -> Result<Self> {
        Self::new(p, vec![k; n])
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.fibers.iter().sum()
    }

    pub fn fibers(&self) -> &[usize] {
        &self.fibers
    }

    pub fn dual(&self) -> FiberNorm {
        FiberNorm { p: super::conjugate_exponent(self.p), fibers: self.fibers.clone() }
    }

    fn fiber_moduli(&self, x: &[C64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.fibers.len());
        let mut start = 0;
        for &len in &self.fibers {
            out.push(p_norm_of_moduli(x[start..start + len].iter().map(|z| z.norm()), 2.0));
            start += len;
        }
        out
    }

    pub fn norm(&self, x: &[C64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim());
        p_norm_of_moduli(self.fiber_moduli(x).into_iter(), self.p)
    }

    /// Norming functional of `x` in the dual norm: `‖w‖_* = 1` and `⟨x, w⟩ = ‖x‖`.
    pub fn dual_vector(&self, x: &[C64]) -> Vec<C64> {
        let g = self.fiber_moduli(x);
        let total = p_norm_of_moduli(g.iter().copied(), self.p);
        let mut w = vec![ZERO; x.len()];
        if total == 0.0 {
            return w;
        }
        let weights: Vec<f64> = if self.p.is_infinite() {
            let imax = g.iter().enumerate().fold(0, |b, (i, &v)| if v > g[b] { i } else { b });
            (0..g.len()).map(|i| if i == imax { 1.0 } else { 0.0 }).collect()
        } else if self.p == 1.0 {
            g.iter().map(|&v| if v > 0.0 { 1.0 } else { 0.0 }).collect()
        } else {
            g.iter().map(|&v| (v / total).powf(self.p - 1.0)).collect()
        };
        let mut start = 0;
        for (f, &len) in self.fibers.iter().enumerate() {
            if g[f] > 0.0 && weights[f] > 0.0 {
                let s = weights[f] / g[f];
                for i in start..start + len {
                    w[i] = x[i] * s;
                }
            }
            start += len;
        }
        w
    }
}
