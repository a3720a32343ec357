use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{frac_power, frac_power_series, ONE};
use crate::error::{Error, Result};
use crate::lpcore::{op_pnorm, ComplexMatrix, LpOperator, NormBudget, C64};
use crate::quad::{graded_nodes, uniform_nodes, GaussLegendre};
use crate::ritt::StolzDomain;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerDifferenceScan {
    /// `sup n^α ‖(rT)^{n−1}(I − rT)^α‖_p` over the scan.
    pub sup_value: f64,
    pub argmax_n: usize,
    pub argmax_r: f64,
    /// The supremum over the last quarter of `n` does not exceed the supremum before it.
    pub stabilized: bool,
    pub n_max: usize,
    pub r_grid: Vec<f64>,
    /// Supremum over `n` for each grid value of `r`.
    pub per_r: Vec<f64>,
}

/// Scans `n^α ‖(rT)^{n−1}(I − rT)^α‖_p` over `1 ≤ n ≤ n_max` and `r` in the grid.
pub fn power_difference_scan(
    t: &LpOperator,
    alpha: f64,
    n_max: usize,
    r_grid: &[f64],
    budget: &NormBudget,
    seed: u64,
) -> Result<PowerDifferenceScan> {
    if n_max == 0 || r_grid.is_empty() {
        return Err(Error::InvalidArgument("empty scan".into()));
    }
    if r_grid.iter().any(|&r| !(r > 0.0 && r <= 1.0)) {
        return Err(Error::InvalidArgument("grid values of r must lie in (0, 1]".into()));
    }
    let p = t.p();
    let cut = n_max - n_max / 4;
    let mut per_r = Vec::with_capacity(r_grid.len());
    let mut best = (f64::NEG_INFINITY, 1usize, r_grid[0]);
    let mut head_max = 0.0f64;
    let mut tail_max = 0.0f64;
    for (ri, &r) in r_grid.iter().enumerate() {
        let a = t.matrix() * C64::new(r, 0.0);
        let series = frac_power_series(&a, alpha, 1e-17, 100_000)?;
        let f = if series.converged { series.value } else { frac_power(&a, alpha)? };
        let mut mats: Vec<ComplexMatrix> = Vec::with_capacity(n_max);
        mats.push(f);
        for n in 1..n_max {
            let next = &a * &mats[n - 1];
            mats.push(next);
        }
        let vals: Vec<f64> = mats
            .par_iter()
            .enumerate()
            .map(|(i, m)| {
                let n = i + 1;
                let s = seed.wrapping_add((ri * n_max + i) as u64);
                op_pnorm(m, p, budget, s).map(|e| (n as f64).powf(alpha) * e.value)
            })
            .collect::<Result<_>>()?;
        let mut sup_r = f64::NEG_INFINITY;
        for (i, &v) in vals.iter().enumerate() {
            if v > sup_r {
                sup_r = v;
            }
            if v > best.0 {
                best = (v, i + 1, r);
            }
            if i + 1 > cut {
                tail_max = tail_max.max(v);
            } else {
                head_max = head_max.max(v);
            }
        }
        per_r.push(sup_r);
    }
    Ok(PowerDifferenceScan {
        sup_value: best.0,
        argmax_n: best.1,
        argmax_r: best.2,
        stabilized: cut == n_max || tail_max <= head_max * (1.0 + 1e-12),
        n_max,
        r_grid: r_grid.to_vec(),
        per_r,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StolzIntegralRow {
    pub n: usize,
    /// `I_n = I_{n,0} + 2 I_{n,+}`.
    pub i_n: f64,
    pub i_n0: f64,
    pub i_n_plus: f64,
    /// `n^α sinⁿγ · |Γ₀| · max(cos^{α−1}γ, 2^{α−1})`.
    pub cap0: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StolzIntegralTable {
    pub gamma: f64,
    pub alpha: f64,
    pub rows: Vec<StolzIntegralRow>,
    /// `2^α Γ(α) / cos^α γ`, uniform in `n`.
    pub cap_plus: f64,
    /// Every quadrature value stays within 1% of its cap.
    pub holds: bool,
}

/// The integrals `I_n = n^α ∮ |λ|ⁿ |1 − λ|^{α−1} |dλ|` over `∂B_γ`, split by boundary piece,
/// with the analytic caps for the arc and segment parts.
pub fn stolz_integral_bounds(gamma: f64, alpha: f64, n_max: usize) -> Result<StolzIntegralTable> {
    let domain = StolzDomain::new(gamma)?;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("exponent alpha = {alpha} must be positive")));
    }
    let rule = GaussLegendre::new(20);
    let (s, c) = (gamma.sin(), gamma.cos());
    let seg = graded_nodes(c, 0.15, 40, &rule);
    let (lo, hi) = domain.arc_range();
    let arc = uniform_nodes(lo, hi, 24, &rule);
    let arc_factor: f64 =
        arc.iter().map(|&(phi, w)| w * s * (ONE - C64::from_polar(s, phi)).norm().powf(alpha - 1.0)).sum();
    let cap_plus = 2f64.powf(alpha) / c.powf(alpha) * statrs::function::gamma::gamma(alpha);
    let arc_cap_factor = domain.arc_length() * c.powf(alpha - 1.0).max(2f64.powf(alpha - 1.0));
    let rows: Vec<StolzIntegralRow> = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let nf = n as f64;
            let na = nf.powf(alpha);
            let i_n0 = na * s.powi(n as i32) * arc_factor;
            // |1 − t e^{−iγ}|² = 1 + t² − 2t cos γ.
            let i_n_plus = na
                * seg
                    .iter()
                    .map(|&(t, w)| w * (0.5 * nf * (t * t - 2.0 * t * c).ln_1p()).exp() * t.powf(alpha - 1.0))
                    .sum::<f64>();
            StolzIntegralRow {
                n,
                i_n: i_n0 + 2.0 * i_n_plus,
                i_n0,
                i_n_plus,
                cap0: na * s.powi(n as i32) * arc_cap_factor,
            }
        })
        .collect();
    let holds = rows.iter().all(|r| r.i_n0 <= 1.01 * r.cap0 && r.i_n_plus <= 1.01 * cap_plus);
    Ok(StolzIntegralTable { gamma, alpha, rows, cap_plus, holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lpcore::real_diagonal;
    use crate::quad::adaptive;
    use std::f64::consts::PI;

    fn op(c: &[f64], p: f64) -> LpOperator {
        LpOperator::new(real_diagonal(c), p).unwrap()
    }

    #[test]
    fn power_difference_examples() {
        let b = NormBudget::default();
        let z =
            power_difference_scan(&LpOperator::new(ComplexMatrix::zeros(2, 2), 3.0).unwrap(), 0.5, 20, &[1.0], &b, 0)
                .unwrap();
        assert!((z.sup_value - 1.0).abs() < 1e-15);
        assert_eq!(z.argmax_n, 1);
        let s = power_difference_scan(&op(&[0.9], 2.0), 1.0, 100, &[1.0], &b, 0).unwrap();
        let oracle = (1..=100).map(|n| n as f64 * 0.9f64.powi(n - 1) * 0.1).fold(0.0, f64::max);
        assert!((s.sup_value - oracle).abs() < 1e-12);
        assert!((9..=10).contains(&s.argmax_n));
    }

    #[test]
    fn power_difference_matches_scalar_oracle() {
        let cs = [0.2, 0.6, 0.85];
        let b = NormBudget::default();
        let rs = [0.5, 0.9, 1.0];
        for &alpha in &[0.5, 2.0] {
            let s = power_difference_scan(&op(&cs, 4.0), alpha, 300, &rs, &b, 1).unwrap();
            let mut oracle = 0.0f64;
            for &r in &rs {
                for n in 1..=300 {
                    for &c in &cs {
                        let v = (n as f64).powf(alpha) * (r * c).powi(n - 1) * (1.0 - r * c).powf(alpha);
                        oracle = oracle.max(v);
                    }
                }
            }
            assert!((s.sup_value - oracle).abs() < 1e-9);
            assert!(s.stabilized);
        }
    }

    #[test]
    fn power_difference_suprema_stabilize() {
        let b = NormBudget::default();
        let t = op(&[0.3, 0.95], 3.0);
        let a = power_difference_scan(&t, 1.0, 100, &[1.0], &b, 0).unwrap();
        let c = power_difference_scan(&t, 1.0, 400, &[1.0], &b, 0).unwrap();
        assert!((a.sup_value - c.sup_value).abs() < 1e-6);
    }

    #[test]
    fn stolz_integral_caps() {
        let t = stolz_integral_bounds(PI / 4.0, 1.0, 1).unwrap();
        assert!((t.cap_plus - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!(t.holds);
        let t = stolz_integral_bounds(PI / 6.0, 2.0, 64).unwrap();
        assert!(t.holds);
        assert!(t.rows.iter().all(|r| r.i_n.is_finite()));
        let t = stolz_integral_bounds(PI / 3.0, 0.5, 200).unwrap();
        assert!(t.holds);
    }

    #[test]
    fn stolz_segment_integral_matches_adaptive_quadrature() {
        let (g, alpha, n) = (PI / 5.0, 1.5, 37usize);
        let table = stolz_integral_bounds(g, alpha, n).unwrap();
        let c = g.cos();
        let direct = adaptive(
            |t| (C64::new(1.0, 0.0) - C64::from_polar(t, -g)).norm().powi(n as i32) * t.powf(alpha - 1.0),
            0.0,
            c,
            1e-14,
            40,
        );
        let got = table.rows[n - 1].i_n_plus / (n as f64).powf(alpha);
        assert!((got - direct.value).abs() < 1e-10 * direct.value);
    }
}
