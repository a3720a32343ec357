//! Regular norms, certified Schur-test factorizations, the Hilbert-type family
//! `i^{β−1/2} j^{γ−1/2} / (i+j)^{β+γ}`, and the Gaussian inequality for matrices of operators.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lpcore::{abs_matrix, complex_gaussian, pairwise_sum_f64, seeded_rng, vec_p_norm, ComplexMatrix, C64};
use crate::randseq::r_bound_lower;

/// Largest singular value of a real matrix.
pub fn real_spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

/// Spectral norm of `[|c_ij|]`.
pub fn regular_norm(c: &ComplexMatrix) -> f64 {
    real_spectral_norm(&abs_matrix(c))
}

/// A matrix `c = a ∘ b` (entrywise) with the Schur-test constants of the factors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactoredMatrix {
    #[serde(with = "crate::lpcore::matrix_serde")]
    pub c: ComplexMatrix,
    #[serde(with = "crate::lpcore::matrix_serde")]
    pub a: ComplexMatrix,
    #[serde(with = "crate::lpcore::matrix_serde")]
    pub b: ComplexMatrix,
    /// `sup_i Σ_j |a_ij|²`.
    pub row_sup: f64,
    /// `sup_j Σ_i |b_ij|²`.
    pub col_sup: f64,
}

impl FactoredMatrix {
    pub fn new(c: ComplexMatrix, a: ComplexMatrix, b: ComplexMatrix) -> Result<Self> {
        if a.shape() != c.shape() || b.shape() != c.shape() {
            return Err(Error::Dimension("factors must have the shape of the matrix".into()));
        }
        for ((cij, aij), bij) in c.iter().zip(a.iter()).zip(b.iter()) {
            if (cij - aij * bij).norm() > 1e-12 * (1.0 + cij.norm()) {
                return Err(Error::InvalidArgument(format!("entry {cij} differs from the product {}", aij * bij)));
            }
        }
        let row_sup = a.row_iter().map(|r| r.iter().map(|z| z.norm_sqr()).sum::<f64>()).fold(0.0, f64::max);
        let col_sup = b.column_iter().map(|r| r.iter().map(|z| z.norm_sqr()).sum::<f64>()).fold(0.0, f64::max);
        Ok(FactoredMatrix { c, a, b, row_sup, col_sup })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PellerCertificate {
    /// `(row_sup · col_sup)^{1/2}`.
    pub bound: f64,
    pub regular_norm: f64,
    pub holds: bool,
}

/// The Cauchy–Schwarz bound `‖|c|‖ ≤ (sup_i Σ_j |a_ij|² · sup_j Σ_i |b_ij|²)^{1/2}`.
pub fn peller_certify(f: &FactoredMatrix) -> PellerCertificate {
    let bound = (f.row_sup * f.col_sup).sqrt();
    let rn = regular_norm(&f.c);
    PellerCertificate { bound, regular_norm: rn, holds: rn <= bound + 1e-9 }
}

/// `∫₀^∞ t^{a−1} (1+t)^{−(a+b)} dt = B(a, b)` by the trapezoid rule in `s = ln t`.
pub fn beta_integral_quadrature(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::InvalidArgument("Beta parameters must be positive".into()));
    }
    // The integrand is e^{as} (1 + e^s)^{−(a+b)}: decays like e^{as} on the left, e^{−bs} on the right.
    let lo = -45.0 / a;
    let hi = 45.0 / b;
    let h = 0.05;
    let steps = ((hi - lo) / h).ceil() as usize;
    let h = (hi - lo) / steps as f64;
    let f = |s: f64| (a * s - (a + b) * s.exp().ln_1p()).exp();
    let vals: Vec<f64> = (0..=steps)
        .map(|k| {
            let w = if k == 0 || k == steps { 0.5 } else { 1.0 };
            w * f(lo + k as f64 * h)
        })
        .collect();
    Ok(h * pairwise_sum_f64(&vals))
}

pub fn beta_function(a: f64, b: f64) -> f64 {
    statrs::function::beta::beta(a, b)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HilbertTypeReport {
    pub beta: f64,
    pub gamma: f64,
    pub n: usize,
    pub factored: FactoredMatrix,
    /// `1 + 2B(γ, β)`.
    pub row_cap: f64,
    /// `1 + 2B(β, γ)`.
    pub col_cap: f64,
    /// The Beta value from its quadrature, for comparison with the Gamma-function identity.
    pub beta_quadrature: f64,
    pub caps_hold: bool,
}

/// `c_ij = i^{β−1/2} j^{γ−1/2} / (i+j)^{β+γ}` for `1 ≤ i, j ≤ n`, factored as
/// `a_ij = c_ij^{1/2} (i/j)^{1/4}`, `b_ij = c_ij^{1/2} (j/i)^{1/4}`.
pub fn hilbert_type(beta: f64, gamma: f64, n: usize) -> Result<HilbertTypeReport> {
    if !(beta > 0.0 && gamma > 0.0) || n == 0 {
        return Err(Error::InvalidArgument("need beta, gamma > 0 and n >= 1".into()));
    }
    let c = hilbert_type_matrix(beta, gamma, n);
    let a = DMatrix::from_fn(n, n, |i, j| c[(i, j)].sqrt() * ((i + 1) as f64 / (j + 1) as f64).powf(0.25));
    let b = DMatrix::from_fn(n, n, |i, j| c[(i, j)].sqrt() * ((j + 1) as f64 / (i + 1) as f64).powf(0.25));
    let cx = |m: &DMatrix<f64>| m.map(|v| C64::new(v, 0.0));
    let factored = FactoredMatrix::new(cx(&c), cx(&a), cx(&b))?;
    let row_cap = 1.0 + 2.0 * beta_function(gamma, beta);
    let col_cap = 1.0 + 2.0 * beta_function(beta, gamma);
    let beta_quadrature = beta_integral_quadrature(gamma, beta)?;
    let caps_hold = factored.row_sup <= row_cap + 1e-9 && factored.col_sup <= col_cap + 1e-9;
    Ok(HilbertTypeReport { beta, gamma, n, factored, row_cap, col_cap, beta_quadrature, caps_hold })
}

/// The real matrix `i^{β−1/2} j^{γ−1/2} / (i+j)^{β+γ}`.
pub fn hilbert_type_matrix(beta: f64, gamma: f64, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| {
        let (x, y) = ((i + 1) as f64, (j + 1) as f64);
        x.powf(beta - 0.5) * y.powf(gamma - 0.5) / (x + y).powf(beta + gamma)
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectionNorms {
    pub beta: f64,
    pub gamma: f64,
    /// `(n, ‖c^{(n)}‖)` pairs.
    pub norms: Vec<(usize, f64)>,
    /// `((1 + 2B(γ,β))(1 + 2B(β,γ)))^{1/2}`.
    pub cap: f64,
    pub nondecreasing: bool,
    pub below_cap: bool,
}

/// Spectral norms of the leading `n × n` sections of the Hilbert-type matrix.
pub fn hilbert_section_norms(beta: f64, gamma: f64, sizes: &[usize]) -> Result<SectionNorms> {
    if !(beta > 0.0 && gamma > 0.0) {
        return Err(Error::InvalidArgument("need beta, gamma > 0".into()));
    }
    let norms: Vec<(usize, f64)> =
        sizes.par_iter().map(|&n| (n, real_spectral_norm(&hilbert_type_matrix(beta, gamma, n)))).collect();
    let cap = ((1.0 + 2.0 * beta_function(gamma, beta)) * (1.0 + 2.0 * beta_function(beta, gamma))).sqrt();
    let mut sorted = norms.clone();
    sorted.sort_by_key(|e| e.0);
    let nondecreasing = sorted.windows(2).all(|w| w[1].1 >= w[0].1);
    let below_cap = norms.iter().all(|e| e.1 <= cap + 1e-9);
    Ok(SectionNorms { beta, gamma, norms, cap, nondecreasing, below_cap })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    pub norm_c: f64,
    pub norm_d: f64,
    pub holds: bool,
}

/// For `0 ≤ c ≤ d` entrywise, checks `‖c‖ ≤ ‖d‖`.
pub fn domination_check(c: &DMatrix<f64>, d: &DMatrix<f64>) -> Result<DominationReport> {
    if c.shape() != d.shape() {
        return Err(Error::Dimension("matrices must have equal shapes".into()));
    }
    if c.iter().zip(d.iter()).any(|(x, y)| !(*x >= 0.0 && x <= y)) {
        return Err(Error::InvalidArgument("need 0 <= c_ij <= d_ij entrywise".into()));
    }
    let norm_c = real_spectral_norm(c);
    let norm_d = real_spectral_norm(d);
    Ok(DominationReport { norm_c, norm_d, holds: norm_c <= norm_d + 1e-10 })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaSource {
    /// Supplied by the caller.
    Caller,
    /// `max |a_ij|` for a family of scalar multiples of the identity.
    ScalarFamily,
    /// A searched lower bound only, so the check is indicative.
    SearchLowerBound,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixRBoundReport {
    /// `(E‖Σ_i g_i Σ_j c_ij T_ij x_j‖²)^{1/2}`.
    pub lhs: f64,
    /// `γ · ‖|c|‖ · (E‖Σ_j g_j x_j‖²)^{1/2}`.
    pub rhs: f64,
    pub gamma_bound: f64,
    pub gamma_source: GammaSource,
    pub regular_norm: f64,
    /// Standard error of the paired difference of squares.
    pub stderr: f64,
    pub holds: bool,
}

fn scalar_identity_multiple(t: &ComplexMatrix) -> Option<C64> {
    let a = t[(0, 0)];
    let ok = t.iter().enumerate().all(|(k, &z)| {
        let (i, j) = (k % t.nrows(), k / t.nrows());
        if i == j {
            z == a
        } else {
            z == C64::new(0.0, 0.0)
        }
    });
    ok.then_some(a)
}

/// Monte Carlo check of `‖Σ_{i,j} g_i ⊗ c_ij T_ij x_j‖ ≤ γ(F) ‖|c|‖ ‖Σ_j g_j ⊗ x_j‖` on shared draws.
///
/// `family[i][j]` is `T_ij`. Without `gamma_upper` a family of scalar multiples of the
/// identity uses its exact bound and any other family falls back to a searched lower bound.
pub fn matrix_rbound_inequality(
    family: &[Vec<ComplexMatrix>],
    c: &ComplexMatrix,
    xs: &[Vec<C64>],
    p: f64,
    samples: usize,
    seed: u64,
    gamma_upper: Option<f64>,
) -> Result<MatrixRBoundReport> {
    let m = xs.len();
    if m == 0 || family.len() != m || family.iter().any(|r| r.len() != m) || c.shape() != (m, m) {
        return Err(Error::Dimension("need an m x m family, an m x m matrix and m vectors".into()));
    }
    let dim = xs[0].len();
    if xs.iter().any(|x| x.len() != dim) || family.iter().flatten().any(|t| t.shape() != (dim, dim)) {
        return Err(Error::Dimension("operators and vectors have inconsistent sizes".into()));
    }
    let (gamma_bound, gamma_source) = match gamma_upper {
        Some(g) => (g, GammaSource::Caller),
        None => {
            let scalars: Option<Vec<C64>> = family.iter().flatten().map(scalar_identity_multiple).collect();
            match scalars {
                Some(s) => (s.iter().map(|a| a.norm()).fold(0.0, f64::max), GammaSource::ScalarFamily),
                None => {
                    let flat: Vec<ComplexMatrix> = family.iter().flatten().cloned().collect();
                    (r_bound_lower(&flat, p, 8, seed)?.lower_bound, GammaSource::SearchLowerBound)
                }
            }
        }
    };
    let ys: Vec<nalgebra::DVector<C64>> = (0..m)
        .map(|i| {
            let mut y = nalgebra::DVector::zeros(dim);
            for (j, x) in xs.iter().enumerate() {
                y += &family[i][j] * nalgebra::DVector::from_column_slice(x) * c[(i, j)];
            }
            y
        })
        .collect();
    let rn = regular_norm(c);
    let scale = gamma_bound * rn;
    const BATCH: usize = 1024;
    let samples = samples.max(2);
    let draws: Vec<(f64, f64)> = (0..samples.div_ceil(BATCH))
        .into_par_iter()
        .flat_map_iter(|batch| {
            let mut rng = seeded_rng(seed, batch as u64);
            let count = BATCH.min(samples - batch * BATCH);
            let ys = &ys;
            (0..count)
                .map(move |_| {
                    let g: Vec<C64> = (0..m).map(|_| complex_gaussian(&mut rng)).collect();
                    let mut sx = vec![C64::new(0.0, 0.0); dim];
                    let mut sy = vec![C64::new(0.0, 0.0); dim];
                    for k in 0..m {
                        for i in 0..dim {
                            sx[i] += g[k] * xs[k][i];
                            sy[i] += g[k] * ys[k][i];
                        }
                    }
                    let a = vec_p_norm(&sy, p).unwrap_or(f64::NAN);
                    let b = vec_p_norm(&sx, p).unwrap_or(f64::NAN);
                    (a * a, b * b)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let nf = samples as f64;
    let l: Vec<f64> = draws.iter().map(|d| d.0).collect();
    let r: Vec<f64> = draws.iter().map(|d| d.1).collect();
    let diff: Vec<f64> = draws.iter().map(|d| d.0 - scale * scale * d.1).collect();
    let mean_l = pairwise_sum_f64(&l) / nf;
    let mean_r = pairwise_sum_f64(&r) / nf;
    let mean_d = pairwise_sum_f64(&diff) / nf;
    let var: Vec<f64> = diff.iter().map(|d| (d - mean_d) * (d - mean_d)).collect();
    let stderr = (pairwise_sum_f64(&var) / (nf - 1.0) / nf).sqrt();
    if !mean_l.is_finite() || !mean_r.is_finite() {
        return Err(Error::NoConvergence("non-finite Gaussian averages".into()));
    }
    Ok(MatrixRBoundReport {
        lhs: mean_l.sqrt(),
        rhs: scale * mean_r.sqrt(),
        gamma_bound,
        gamma_source,
        regular_norm: rn,
        stderr,
        holds: mean_d <= 3.0 * stderr + 1e-12 * (1.0 + mean_l),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lpcore::{complex_gaussian_matrix, complex_gaussian_vec, identity, spectral_norm};
    use proptest::prelude::*;
    use rand::Rng;
    use std::f64::consts::PI;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn regular_norm_examples() {
        assert!((regular_norm(&ComplexMatrix::from_element(2, 2, c(1.0))) - 2.0).abs() < 1e-14);
        let d = ComplexMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]);
        assert!((regular_norm(&d) - 1.0).abs() < 1e-14);
        let mut rng = seeded_rng(3, 0);
        let m = complex_gaussian_matrix(&mut rng, 4, 4);
        let a = m.map(|z| c(z.norm()));
        assert_eq!(regular_norm(&m), regular_norm(&a));
        assert!(regular_norm(&m) >= spectral_norm(&m) - 1e-12);
    }

    #[test]
    fn peller_examples() {
        let f = FactoredMatrix::new(identity(3), identity(3), identity(3)).unwrap();
        let cert = peller_certify(&f);
        assert!((cert.bound - 1.0).abs() < 1e-15 && (cert.regular_norm - 1.0).abs() < 1e-14);
        let u = [c(1.0), c(2.0), c(-0.5)];
        let v = [c(0.3), c(-1.0), c(4.0), c(2.0)];
        let cm = ComplexMatrix::from_fn(3, 4, |i, j| u[i] * v[j]);
        let un: f64 = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let vn: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let naive = FactoredMatrix::new(
            cm.clone(),
            ComplexMatrix::from_fn(3, 4, |i, _| u[i]),
            ComplexMatrix::from_fn(3, 4, |_, j| v[j]),
        )
        .unwrap();
        let cert = peller_certify(&naive);
        assert!(cert.holds && cert.bound > un * vn);
        let a = ComplexMatrix::from_fn(3, 4, |_, j| v[j] * (un / vn));
        let b = ComplexMatrix::from_fn(3, 4, |i, _| u[i] * (vn / un));
        let cert = peller_certify(&FactoredMatrix::new(cm, a, b).unwrap());
        assert!((cert.bound - un * vn).abs() < 1e-12);
        assert!((cert.regular_norm - un * vn).abs() < 1e-12);
        assert!(FactoredMatrix::new(identity(2), identity(2) * c(2.0), identity(2)).is_err());
    }

    #[test]
    fn beta_two_ways() {
        for &(a, b) in &[(0.5, 0.5), (1.0, 2.0), (2.0, 1.0), (0.3, 1.7), (3.0, 0.25)] {
            let q = beta_integral_quadrature(a, b).unwrap();
            assert!((q - beta_function(a, b)).abs() < 1e-8, "{a} {b} {q}");
        }
        assert!((beta_function(0.5, 0.5) - PI).abs() < 1e-12);
    }

    #[test]
    fn hilbert_examples() {
        let h = hilbert_type(0.5, 0.5, 1).unwrap();
        assert!((h.factored.c[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((regular_norm(&h.factored.c) - 0.5).abs() < 1e-15);
        let h = hilbert_type(0.5, 0.5, 40).unwrap();
        assert!((h.row_cap - (1.0 + 2.0 * PI)).abs() < 1e-12);
        assert!((h.factored.c[(2, 4)].re - 1.0 / 8.0).abs() < 1e-15);
        assert!(h.caps_hold);
        assert!(peller_certify(&h.factored).holds);
    }

    #[test]
    fn hilbert_row_sums_stay_under_cap() {
        for &(b, g) in &[(0.5, 0.5), (1.0, 2.0), (2.0, 0.5)] {
            for &n in &[1usize, 17, 256, 1024] {
                let h = hilbert_type(b, g, n).unwrap();
                assert!(h.caps_hold, "{b} {g} {n}");
                assert!(h.factored.row_sup < h.row_cap);
            }
        }
    }

    #[test]
    fn sections_nondecreasing_and_capped() {
        let s = hilbert_section_norms(1.0, 2.0, &[64, 128, 256]).unwrap();
        assert!(s.nondecreasing && s.below_cap);
        let s = hilbert_section_norms(0.5, 0.5, &[16, 32, 64]).unwrap();
        assert!(s.nondecreasing && s.norms.iter().all(|e| e.1 < PI));
    }

    #[test]
    fn hilbert_sections_converge_slowly() {
        let s = hilbert_section_norms(0.5, 0.5, &[128, 256, 512, 1024]).unwrap();
        assert!(s.nondecreasing);
        let steps: Vec<f64> = s.norms.windows(2).map(|w| w[1].1 - w[0].1).collect();
        assert!(steps.windows(2).all(|w| w[1] < w[0]), "{steps:?}");
        assert!(s.norms.iter().all(|e| e.1 < PI));
    }

    #[test]
    fn domination_examples() {
        let mut rng = seeded_rng(9, 0);
        let d = DMatrix::from_fn(5, 5, |_, _| rng.random_range(0.0..1.0));
        let r = domination_check(&d, &d).unwrap();
        assert_eq!(r.norm_c, r.norm_d);
        let r = domination_check(&DMatrix::zeros(5, 5), &d).unwrap();
        assert!(r.norm_c == 0.0 && r.holds);
        let r = domination_check(&(&d * 0.5), &d).unwrap();
        assert!((r.norm_c - 0.5 * r.norm_d).abs() < 1e-14);
        assert!(domination_check(&(&d * 2.0), &d).is_err());
    }

    #[test]
    fn domination_on_random_pairs() {
        let mut rng = seeded_rng(10, 0);
        for _ in 0..1000 {
            let n = rng.random_range(1..7);
            let d = DMatrix::from_fn(n, n, |_, _| rng.random_range(0.0..1.0));
            let c = d.map(|v| v * rng.random_range(0.0..1.0));
            assert!(domination_check(&c, &d).unwrap().holds);
        }
    }

    #[test]
    fn matrix_rbound_examples() {
        let mut rng = seeded_rng(12, 0);
        let xs: Vec<Vec<C64>> = (0..3).map(|_| complex_gaussian_vec(&mut rng, 4)).collect();
        let fam: Vec<Vec<ComplexMatrix>> = vec![vec![identity(4); 3]; 3];
        let r = matrix_rbound_inequality(&fam, &identity(3), &xs, 3.0, 4000, 1, None).unwrap();
        assert_eq!(r.gamma_source, GammaSource::ScalarFamily);
        assert!((r.lhs - r.rhs).abs() < 1e-12 * r.rhs && r.holds);
        let a = complex_gaussian_matrix(&mut rng, 3, 3);
        let amax = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let fam: Vec<Vec<ComplexMatrix>> =
            (0..3).map(|i| (0..3).map(|j| identity(4) * (a[(i, j)] / amax)).collect()).collect();
        let cm = complex_gaussian_matrix(&mut rng, 3, 3);
        let r = matrix_rbound_inequality(&fam, &cm, &xs, 4.0, 4000, 2, None).unwrap();
        assert!((r.gamma_bound - 1.0).abs() < 1e-15 && r.holds);
        let one = matrix_rbound_inequality(
            &[vec![identity(4) * c(0.5)]],
            &(identity(1) * c(3.0)),
            &xs[..1],
            2.0,
            100,
            3,
            None,
        )
        .unwrap();
        let xn = vec_p_norm(&xs[0], 2.0).unwrap();
        assert!(one.holds && (one.lhs - one.rhs).abs() < 1e-12 * one.rhs);
        assert!(one.lhs > 0.5 * 1.5 * xn);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn schur_test_is_sound(seed in 0u64..10_000, n in 1usize..7, k in 1usize..7) {
            let mut rng = seeded_rng(seed, 0);
            let a = complex_gaussian_matrix(&mut rng, n, k);
            let b = complex_gaussian_matrix(&mut rng, n, k);
            let cm = a.component_mul(&b);
            let f = FactoredMatrix::new(cm, a, b).unwrap();
            prop_assert!(peller_certify(&f).holds);
        }
    }
}
