//! Figure sweeps and sample batches behind the CLI.
//!
//! Every stochastic routine draws instance `i` from `rng_for(seed, i)`, so
//! output is independent of thread count and row order follows the index.

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds;
use crate::error::{Error, Result};
use crate::multiobs::{self, HexagonVariant};
use crate::operators::Observable;
use crate::qubitgeo;
use crate::reverse;
use crate::states::{self, DensityMatrix, StateVector};
use crate::CVector;

pub const FIG3_DEFAULT_SAMPLES: usize = 60_000;
pub const TREND_BINS: usize = 5;
/// Allowed distance of a bin mean from the monotone fit, in standard errors.
pub const TREND_SIGMAS: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fig1Row {
    pub p: f64,
    pub sum_variances: f64,
    pub robertson: f64,
    pub theorem2_pb: f64,
    pub theorem4_reverse: f64,
}

/// `p |psi><psi| + (1 - p) I/3` with `psi = (1, 1, 1)/sqrt 3`.
pub fn fig1_state(p: f64) -> Result<DensityMatrix<f64>> {
    let psi = StateVector::normalize(CVector::from_element(3, crate::scalar::c(1.0, 0.0)))?;
    DensityMatrix::mix(p, &DensityMatrix::from_pure(&psi), &DensityMatrix::maximally_mixed(3))
}

pub fn fig1_row(p: f64) -> Result<Fig1Row> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Param(format!("mixing weight must lie in [0, 1], got {p}")));
    }
    let rho = fig1_state(p)?;
    let (a, b) = (Observable::spin1_x(), Observable::spin1_y());
    let robertson = bounds::robertson_sum_bound(&rho, &a, &b)?;
    Ok(Fig1Row {
        p,
        sum_variances: robertson.target,
        robertson: robertson.bound_value,
        theorem2_pb: bounds::theorem2_pb_bound(&rho, &a, &b)?.bound_value,
        theorem4_reverse: reverse::theorem4_fidelity_bound(&rho, &a, &b)?.bound_value,
    })
}

pub fn fig1_rows(grid: &[f64]) -> Result<Vec<Fig1Row>> {
    if grid.is_empty() {
        return Err(Error::Param("empty p grid".into()));
    }
    grid.iter().map(|&p| fig1_row(p)).collect()
}

/// `n + 1` evenly spaced points on `[0, 1]`.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    let n = n.max(1);
    (0..=n).map(|i| i as f64 / n as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fig3Row {
    pub angle: f64,
    #[serde(rename = "blochRadius")]
    pub bloch_radius: f64,
    pub purity_of_rho: f64,
}

/// Sample `i`: Hilbert–Schmidt random qubit, independent uniform `n1`, `n2`.
pub fn fig3_sample(seed: u64, index: u64) -> Result<(Fig3Row, qubitgeo::PurityRecord<f64>)> {
    let mut rng = states::rng_for(seed, index);
    let rho = states::random_mixed_with::<f64, _>(&mut rng, 2)?;
    let n1 = states::random_unit3::<f64, _>(&mut rng);
    let n2 = states::random_unit3::<f64, _>(&mut rng);
    let r = states::bloch_from_qubit(&rho)?;
    let rec = qubitgeo::normalized_k_bloch(r, n1, n2)?;
    let row = Fig3Row {
        angle: rec.angle,
        bloch_radius: rec.bloch_radius,
        purity_of_rho: states::purity(&rho),
    };
    Ok((row, rec))
}

pub fn fig3_rows(samples: usize, seed: u64) -> Result<Vec<Fig3Row>> {
    (0..samples as u64)
        .into_par_iter()
        .map(|i| fig3_sample(seed, i).map(|(row, _)| row))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub mean: f64,
    pub std_err: f64,
    pub fit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendReport {
    pub bins: Vec<TrendBin>,
    /// Largest `|mean - fit| / std_err`.
    pub worst_z: f64,
    pub passed: bool,
}

/// Weighted pool-adjacent-violators fit, non-decreasing.
pub fn isotonic_fit(values: &[f64], weights: &[f64]) -> Vec<f64> {
    // blocks of (mean, weight, length)
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(weights) {
        blocks.push((v, w, 1));
        while blocks.len() > 1 {
            let (m2, w2, n2) = blocks[blocks.len() - 1];
            let (m1, w1, n1) = blocks[blocks.len() - 2];
            if m1 <= m2 {
                break;
            }
            blocks.pop();
            let w = w1 + w2;
            *blocks.last_mut().unwrap() = ((m1 * w1 + m2 * w2) / w, w, n1 + n2);
        }
    }
    blocks.into_iter().flat_map(|(m, _, n)| std::iter::repeat_n(m, n)).collect()
}

/// Mean `|R|` in equal-width bins of `sin(angle)` tested against its
/// isotonic fit (weights `1/se^2`); each bin must lie within two standard errors.
pub fn fig3_trend(rows: &[Fig3Row]) -> TrendReport {
    let mut sums = [(0usize, 0.0f64, 0.0f64); TREND_BINS];
    for r in rows {
        let s = r.angle.sin().clamp(0.0, 1.0);
        let k = ((s * TREND_BINS as f64) as usize).min(TREND_BINS - 1);
        sums[k].0 += 1;
        sums[k].1 += r.bloch_radius;
        sums[k].2 += r.bloch_radius * r.bloch_radius;
    }
    let mut bins: Vec<TrendBin> = sums
        .iter()
        .enumerate()
        .map(|(k, &(n, s, s2))| {
            let mean = if n > 0 { s / n as f64 } else { f64::NAN };
            let var = if n > 1 { (s2 - n as f64 * mean * mean).max(0.0) / (n - 1) as f64 } else { f64::NAN };
            TrendBin {
                lo: k as f64 / TREND_BINS as f64,
                hi: (k + 1) as f64 / TREND_BINS as f64,
                count: n,
                mean,
                std_err: (var / n as f64).sqrt(),
                fit: f64::NAN,
            }
        })
        .collect();
    let usable = bins.iter().all(|b| b.count > 1 && b.std_err.is_finite());
    if !usable {
        return TrendReport {
            bins,
            worst_z: f64::INFINITY,
            passed: false,
        };
    }
    let means: Vec<f64> = bins.iter().map(|b| b.mean).collect();
    let weights: Vec<f64> = bins.iter().map(|b| 1.0 / b.std_err.max(1e-300).powi(2)).collect();
    let fit = isotonic_fit(&means, &weights);
    let mut worst_z = 0.0f64;
    for (b, f) in bins.iter_mut().zip(fit) {
        b.fit = f;
        let z = if b.std_err > 0.0 { (b.mean - f).abs() / b.std_err } else if b.mean == f { 0.0 } else { f64::INFINITY };
        worst_z = worst_z.max(z);
    }
    TrendReport {
        bins,
        worst_z,
        passed: worst_z <= TREND_SIGMAS,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HexagonRow {
    pub index: u64,
    pub sum_variances: f64,
    pub pairwise_bound: f64,
    pub residual_variant1: f64,
    pub residual_variant2: f64,
    pub sum_norms: f64,
    pub residual_direct: f64,
    pub residual_first_form: f64,
    pub residual_second_form: f64,
}

/// Random pure qutrit with three random Hermitian observables.
pub fn hexagon_instance(seed: u64, index: u64) -> Result<(StateVector<f64>, [Observable<f64>; 3])> {
    let mut rng = states::rng_for(seed, index);
    let psi = states::random_pure_with::<f64, _>(&mut rng, 3)?;
    let mut obs = || Observable::new(states::random_hermitian::<f64, _>(&mut rng, 3));
    Ok((psi, [obs()?, obs()?, obs()?]))
}

pub fn hexagon_row(seed: u64, index: u64) -> Result<HexagonRow> {
    let (psi, [a, b, c]) = hexagon_instance(seed, index)?;
    let pair = multiobs::pairwise_sum_bound(&psi, &a, &b, &c)?;
    let d = multiobs::lhs_decomposition_check(&psi, &a, &b, &c)?;
    Ok(HexagonRow {
        index,
        sum_variances: pair.target,
        pairwise_bound: pair.bound_value,
        residual_variant1: multiobs::hexagon_identity_check(&psi, &a, &b, &c, HexagonVariant::LongDiagonals)?,
        residual_variant2: multiobs::hexagon_identity_check(&psi, &a, &b, &c, HexagonVariant::ShortDiagonals)?,
        sum_norms: d.sum_norms,
        residual_direct: d.residual_direct,
        residual_first_form: d.residual_first,
        residual_second_form: d.residual_second,
    })
}

pub fn hexagon_rows(samples: usize, seed: u64) -> Result<Vec<HexagonRow>> {
    (0..samples as u64).into_par_iter().map(|i| hexagon_row(seed, i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig1_anchor_rows() {
        let r0 = fig1_row(0.0).unwrap();
        assert!((r0.sum_variances - 4.0 / 3.0).abs() < 1e-12);
        assert!((r0.theorem2_pb - (3f64.ln() - (1.0 + 2.0 * (-2f64).exp()).ln())).abs() < 1e-9);
        assert!((r0.theorem2_pb - 0.8590675224462249).abs() < 1e-9);
        assert!((r0.theorem4_reverse - 8.0 / 3.0).abs() < 1e-9);
        let r1 = fig1_row(1.0).unwrap();
        assert!((r1.sum_variances - 4.0 / 9.0).abs() < 1e-12);
        assert!(r1.robertson.abs() < 1e-12);
        assert!((r1.theorem2_pb + 0.0600092066970680).abs() < 1e-9);
        let half = fig1_row(0.5).unwrap();
        assert!((half.theorem2_pb - 0.65777644668286).abs() < 1e-9);
        assert!((half.theorem4_reverse - 2.29039156585386).abs() < 1e-9);
        assert!(fig1_row(1.5).is_err());
        assert!(fig1_rows(&[]).is_err());
    }

    #[test]
    fn pava_pools_violators() {
        assert_eq!(isotonic_fit(&[1.0, 3.0, 2.0, 4.0], &[1.0; 4]), vec![1.0, 2.5, 2.5, 4.0]);
        let f = isotonic_fit(&[3.0, 1.0], &[3.0, 1.0]);
        assert!((f[0] - 2.5).abs() < 1e-15 && (f[1] - 2.5).abs() < 1e-15);
    }

    #[test]
    fn fig3_deterministic_and_bounded() {
        let a = fig3_rows(200, 9).unwrap();
        let b = fig3_rows(200, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|r| (0.0..=1.0 + 1e-9).contains(&r.bloch_radius)));
        assert!(a.iter().all(|r| (0.5..=1.0 + 1e-12).contains(&r.purity_of_rho)));
    }

    #[test]
    fn hexagon_rows_are_stable() {
        let rows = hexagon_rows(20, 3).unwrap();
        assert_eq!(rows, hexagon_rows(20, 3).unwrap());
        for r in rows {
            assert!(r.pairwise_bound <= r.sum_variances + 1e-8);
            assert!(r.residual_direct < 1e-10);
        }
    }
}
