//! Numeric kernel: dense complex matrices, ℓᵖ and mixed ℓᵖ(ℓ²) norms,
//! operator-norm estimation, spectra and resolvents.
//!
//! Every construction in this crate lives on ℓᵖ_n, the finite counting-measure
//! model of an Lᵖ space. Matrices act on column vectors and the sesquilinear
//! pairing is `⟨u, v⟩ = Σ u_i conj(v_i)`, so adjoints are conjugate transposes.

pub(crate) mod estimate;
mod norms;
mod spectral;

pub use estimate::{
    block_pnorm, flatten_blocks, map_norm_lower, map_norm_upper, op_pnorm, op_pnorm_upper, sampled_pnorm_lower,
    spectral_norm, LinearMap, NormBudget, NormEstimate, NormMethod,
};
pub use norms::{mixed_norm, vec_p_norm, FiberNorm, MixedElement};
pub use spectral::{eigen_decomposition, nearest_eigenvalue, resolvent, spectral_radius, spectrum, EigenDecomposition};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

/// Diagonal matrix with real entries.
pub fn real_diagonal(values: &[f64]) -> ComplexMatrix {
    let n = values.len();
    ComplexMatrix::from_fn(n, n, |i, j| if i == j { C64::new(values[i], 0.0) } else { ZERO })
}

pub fn complex_diagonal(values: &[C64]) -> ComplexMatrix {
    let n = values.len();
    ComplexMatrix::from_fn(n, n, |i, j| if i == j { values[i] } else { ZERO })
}

pub fn check_finite(m: &ComplexMatrix) -> Result<()> {
    match m.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

pub fn check_square(m: &ComplexMatrix) -> Result<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(Error::Dimension(format!("expected a square matrix, got {}x{}", m.nrows(), m.ncols())))
    }
}

/// Entrywise modulus.
pub fn abs_matrix(m: &ComplexMatrix) -> DMatrix<f64> {
    m.map(|z| z.norm())
}

pub fn to_complex(m: &DMatrix<f64>) -> ComplexMatrix {
    m.map(|x| C64::new(x, 0.0))
}

/// Frobenius distance, used for cheap convergence tests.
pub fn frobenius_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    (a - b).norm()
}

/// Kronecker product `a ⊗ b` with `a`'s index varying slowest.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// A square matrix paired with an exponent `1 < p < ∞`: an operator on ℓᵖ_n.
#[derive(Clone, Debug, PartialEq)]
pub struct LpOperator {
    matrix: ComplexMatrix,
    p: f64,
}

impl LpOperator {
    pub fn new(matrix: ComplexMatrix, p: f64) -> Result<Self> {
        check_square(&matrix)?;
        check_finite(&matrix)?;
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidExponent(p));
        }
        Ok(LpOperator { matrix, p })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// The conjugate exponent `p' = p / (p - 1)`.
    pub fn conjugate_exponent(&self) -> f64 {
        conjugate_exponent(self.p)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// The adjoint acting on ℓ^{p'}_n.
    pub fn adjoint(&self) -> LpOperator {
        LpOperator { matrix: self.matrix.adjoint(), p: self.conjugate_exponent() }
    }
}

pub fn conjugate_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// Interchange format `{"rows": n, "cols": m, "data": [[re, im], ...]}`, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        let mut data = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                data.push([z.re, z.im]);
            }
        }
        MatrixJson { rows: m.nrows(), cols: m.ncols(), data }
    }
}

impl TryFrom<MatrixJson> for ComplexMatrix {
    type Error = Error;

    fn try_from(json: MatrixJson) -> Result<Self> {
        if json.data.len() != json.rows * json.cols {
            return Err(Error::Input(format!(
                "matrix declares {}x{} but carries {} entries",
                json.rows,
                json.cols,
                json.data.len()
            )));
        }
        let m = ComplexMatrix::from_fn(json.rows, json.cols, |i, j| {
            let [re, im] = json.data[i * json.cols + j];
            C64::new(re, im)
        });
        check_finite(&m)?;
        Ok(m)
    }
}

pub fn matrix_from_json_str(s: &str) -> Result<ComplexMatrix> {
    let json: MatrixJson = serde_json::from_str(s)?;
    ComplexMatrix::try_from(json)
}

pub fn matrix_to_json_string(m: &ComplexMatrix) -> Result<String> {
    Ok(serde_json::to_string(&MatrixJson::from(m))?)
}

/// `#[serde(with = "matrix_serde")]` adapter for matrix-valued fields.
pub mod matrix_serde {
    use super::{ComplexMatrix, MatrixJson};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &ComplexMatrix, s: S) -> Result<S::Ok, S::Error> {
        MatrixJson::from(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ComplexMatrix, D::Error> {
        let json = MatrixJson::deserialize(d)?;
        ComplexMatrix::try_from(json).map_err(serde::de::Error::custom)
    }
}

/// Deterministic generator for stream `stream` of master seed `seed`.
///
/// Parallel loops derive one stream per task so results do not depend on scheduling.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Standard complex Gaussian, normalized so that `E|g|² = 1`.
pub fn complex_gaussian<R: rand::Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn complex_gaussian_vec<R: rand::Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<C64> {
    (0..n).map(|_| complex_gaussian(rng)).collect()
}

pub fn complex_gaussian_matrix<R: rand::Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Sum of matrices by a balanced pairwise tree over the input order.
///
/// The reduction shape depends only on the number of terms, so parallel
/// producers that collect in order give bit-identical sums.
pub fn pairwise_sum(mut terms: Vec<ComplexMatrix>) -> Option<ComplexMatrix> {
    if terms.is_empty() {
        return None;
    }
    while terms.len() > 1 {
        let mut next = Vec::with_capacity(terms.len().div_ceil(2));
        let mut it = terms.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(a + b),
                None => next.push(a),
            }
        }
        terms = next;
    }
    terms.pop()
}

/// Real counterpart of [`pairwise_sum`].
pub fn pairwise_sum_f64(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => {
            let (a, b) = values.split_at(n / 2);
            pairwise_sum_f64(a) + pairwise_sum_f64(b)
        }
    }
}
