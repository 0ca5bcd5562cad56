//! Initial data `(ρ₀, u₀)`.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::galerkin::GalerkinModel;
use crate::rng::keyed_rng;
use crate::spectral::{ops, ScalarField, VectorField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    /// `ρ = 1 + rho_amp·cos(2πx₀)`, `u = 0`.
    DeterministicSmooth,
    /// Random low-mode density rescaled into `[rho_lower, rho_upper]`, random low-mode velocity.
    RandomModeAmplitudes,
    /// Mollified random target clamped into `[δ, δ^{−1/(2β)}]`, momentum `q = h√ρ`.
    MollifiedTarget,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialSampler {
    pub kind: SamplerKind,
    pub rho_lower: f64,
    pub rho_upper: f64,
    pub rho_amp: f64,
    /// RMS size of the velocity coefficients.
    pub u_amp: f64,
}

impl Default for InitialSampler {
    fn default() -> Self {
        Self { kind: SamplerKind::RandomModeAmplitudes, rho_lower: 0.5, rho_upper: 1.5, rho_amp: 0.2, u_amp: 0.5 }
    }
}

const DOMAIN_INITIAL: u64 = 3;

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Random trig polynomial with `|k|_∞ ≤ 2`, amplitudes decaying like `1/(1+|k|²)`, zero mean.
fn random_low_mode(model: &GalerkinModel, rng: &mut ChaCha8Rng) -> ScalarField {
    let basis = model.basis();
    let coeffs: Vec<f64> = basis
        .scalar_modes()
        .iter()
        .map(|m| {
            let z = gaussian(rng);
            if m.k.is_mean() || m.k.sup_norm() > 2 {
                0.0
            } else {
                z / (1.0 + m.k.norm_sq() as f64)
            }
        })
        .collect();
    basis.synthesize_scalar(&coeffs)
}

fn random_velocity(model: &GalerkinModel, amp: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let basis = model.basis();
    let s = basis.scalar_len();
    let mut u: Vec<f64> = (0..basis.len())
        .map(|n| {
            let z = gaussian(rng);
            let mode = basis.scalar_modes()[n % s];
            if mode.k.is_mean() {
                0.0
            } else {
                z / (1.0 + mode.k.norm_sq() as f64)
            }
        })
        .collect();
    let rms = (u.iter().map(|c| c * c).sum::<f64>()).sqrt();
    if rms > 0.0 {
        u.iter_mut().for_each(|c| *c *= amp / rms);
    }
    u
}

impl InitialSampler {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho_lower > 0.0) || !(self.rho_upper >= self.rho_lower) {
            return Err(Error::Config(format!(
                "initial density bounds need 0 < rho_lower <= rho_upper, got [{}, {}]",
                self.rho_lower, self.rho_upper
            )));
        }
        if !(self.u_amp >= 0.0) || !(self.rho_amp.abs() < 1.0) {
            return Err(Error::Config("initial amplitudes need u_amp >= 0 and |rho_amp| < 1".into()));
        }
        Ok(())
    }

    /// Deterministic in `(seed, path)`.
    pub fn sample(&self, model: &GalerkinModel, seed: u64, path: u64) -> (ScalarField, Vec<f64>) {
        let mut rng = keyed_rng(&[DOMAIN_INITIAL, seed, path]);
        let g = model.grid();
        match self.kind {
            SamplerKind::DeterministicSmooth => {
                let amp = self.rho_amp;
                (ScalarField::from_fn(g, |x| 1.0 + amp * (2.0 * PI * x[0]).cos()), vec![0.0; model.dim()])
            }
            SamplerKind::RandomModeAmplitudes => {
                let shape = random_low_mode(model, &mut rng);
                let scale = shape.sup_norm().max(f64::MIN_POSITIVE);
                let mid = 0.5 * (self.rho_lower + self.rho_upper);
                let half = 0.5 * (self.rho_upper - self.rho_lower);
                let rho = shape.map(|v| (mid + half * v / scale).clamp(self.rho_lower, self.rho_upper));
                let u = random_velocity(model, self.u_amp, &mut rng);
                (rho, u)
            }
            SamplerKind::MollifiedTarget => {
                let cfg = model.config();
                let lo = cfg.delta.max(f64::MIN_POSITIVE);
                let hi = cfg.delta.powf(-1.0 / (2.0 * cfg.beta));
                // Rough target with a wide range, then mollify and clamp.
                let shape = random_low_mode(model, &mut rng);
                let scale = shape.sup_norm().max(f64::MIN_POSITIVE);
                let spike: f64 = rng.random_range(1.5..3.0);
                let target = shape.map(|v| 1.0 + spike * v / scale);
                let rho = ops::heat(&target, 1e-3).map(|v| v.clamp(lo, hi));
                let h = model.velocity(&random_velocity(model, self.u_amp, &mut rng));
                let q = h.scale_by(&rho.map(f64::sqrt));
                let u = VectorField::new(
                    q.components().iter().map(|c| c.zip_map(&rho, |a, r| a / r)).collect(),
                )
                .expect("components share the grid");
                (rho, model.basis().project_vector(&u))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galerkin::SimConfig;

    fn model() -> GalerkinModel {
        GalerkinModel::new(SimConfig::default()).unwrap()
    }

    #[test]
    fn deterministic_smooth_is_exact() {
        let m = model();
        let s = InitialSampler { kind: SamplerKind::DeterministicSmooth, ..Default::default() };
        let (rho, u) = s.sample(&m, 0, 0);
        let expect = ScalarField::from_fn(m.grid(), |x| 1.0 + 0.2 * (2.0 * PI * x[0]).cos());
        assert_eq!(rho, expect);
        assert!(u.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn random_modes_respect_bounds_and_repeat() {
        let m = model();
        let s = InitialSampler::default();
        let (rho, u) = s.sample(&m, 11, 4);
        assert!(rho.min() >= 0.5 && rho.max() <= 1.5);
        let (rho2, u2) = s.sample(&m, 11, 4);
        assert_eq!(rho, rho2);
        assert_eq!(u, u2);
        assert_ne!(s.sample(&m, 11, 5).1, u);
    }

    #[test]
    fn mollified_target_bounds() {
        let m = model();
        let s = InitialSampler { kind: SamplerKind::MollifiedTarget, ..Default::default() };
        for p in 0..10 {
            let (rho, u) = s.sample(&m, 3, p);
            assert!(rho.min() >= 0.01);
            assert!(rho.max() <= 0.01f64.powf(-0.1) + 1e-15);
            assert!(u.iter().all(|c| c.is_finite()));
        }
    }
}
