//! Effective viscous flux `p − (λ+2ν) div u` tested against `T_k(ρ)`, the Riesz
//! commutator integral, and the trend summaries used for refinement sweeps.

use serde::Serialize;

use crate::galerkin::{GalerkinModel, PathRecord};
use crate::renorm::tk;
use crate::spectral::{ops, ScalarField};
use crate::stats::Estimate;

/// `∫∫ (aρ^γ + δρ^β − (λ+2ν) div u) T_k(ρ)` along a path with stored states.
pub fn flux_integral(model: &GalerkinModel, rec: &PathRecord, k: f64) -> f64 {
    let cfg = model.config();
    let mut acc = 0.0;
    for (step, s) in rec.steps.iter().zip(&rec.states) {
        let divu = ops::div(&model.velocity(&s.u));
        let flux = model.pressure(&s.rho).sub(&divu.scaled(cfg.lambda + 2.0 * cfg.nu));
        acc += step.dt * flux.inner(&s.rho.map(|r| tk(r, k)));
    }
    acc
}

/// `∫ u^i (ρ R_ij[ρu^j] − ρu^j R_ij[ρ])` summed over `i, j` at one state.
pub fn riesz_commutator(rho: &ScalarField, u: &crate::spectral::VectorField) -> f64 {
    let d = rho.grid().dim();
    let mut out = 0.0;
    for i in 0..d {
        for j in 0..d {
            let rhou_j = rho.mul(u.component(j));
            let c = rho.mul(&ops::riesz(i, j, &rhou_j)).sub(&rhou_j.mul(&ops::riesz(i, j, rho)));
            out += u.component(i).inner(&c);
        }
    }
    out
}

/// Time integral of [`riesz_commutator`] along a path with stored states.
pub fn riesz_commutator_integral(model: &GalerkinModel, rec: &PathRecord) -> f64 {
    rec.steps.iter().zip(&rec.states).map(|(step, s)| step.dt * riesz_commutator(&s.rho, &model.velocity(&s.u))).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub value: f64,
    pub estimate: Estimate,
}

/// Estimates along a sweep and the behaviour of their successive differences.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrendReport {
    pub statistic: String,
    pub points: Vec<SweepPoint>,
    pub successive_differences: Vec<f64>,
    /// Largest successive difference among the last three sweep points.
    pub cauchy_tail: f64,
    pub decreasing: bool,
    /// Some difference exceeds twice its predecessor.
    pub growth_flag: bool,
}

impl TrendReport {
    pub fn new(statistic: &str, points: Vec<SweepPoint>) -> Self {
        let diffs: Vec<f64> = points.windows(2).map(|w| (w[1].estimate.mean - w[0].estimate.mean).abs()).collect();
        let tail = diffs.iter().rev().take(2).fold(0.0f64, |m, v| m.max(*v));
        Self {
            statistic: statistic.to_string(),
            decreasing: diffs.windows(2).all(|w| w[1] <= w[0]),
            growth_flag: diffs.windows(2).any(|w| w[1] > 2.0 * w[0]),
            cauchy_tail: tail,
            successive_differences: diffs,
            points,
        }
    }
}

pub type FluxReport = TrendReport;

/// Trend report for the effective flux over a sweep; `samples[i]` holds the
/// per-path integrals at `values[i]`, generated with common random numbers.
pub fn effective_flux_sweep(values: &[f64], samples: &[Vec<f64>]) -> FluxReport {
    let points = values
        .iter()
        .zip(samples)
        .map(|(&value, xs)| SweepPoint { value, estimate: Estimate::from_samples(xs) })
        .collect();
    TrendReport::new("effective_flux", points)
}
