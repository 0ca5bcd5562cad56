use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::NoiseFamily;
use crate::transport::TransportScheme;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stepper {
    EulerMaruyama,
    FixedPoint,
}

/// Physical, discretization and noise parameters of one Galerkin simulation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dim: usize,
    pub m: usize,
    pub cutoff: usize,
    pub gamma: f64,
    pub beta: f64,
    pub a: f64,
    pub nu: f64,
    pub lambda: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub noise_family: NoiseFamily,
    pub noise_k: usize,
    pub noise_c0: f64,
    /// Truncation radius; `None` means no truncation.
    pub r: Option<f64>,
    pub dt: f64,
    pub t_end: f64,
    pub stepper: Stepper,
    pub transport: TransportScheme,
    pub fp_tol: f64,
    pub fp_maxiter: usize,
    pub dt_min: f64,
    pub rho_floor: f64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dim: 2,
            m: 16,
            cutoff: 2,
            gamma: 5.0 / 3.0,
            beta: 5.0,
            a: 1.0,
            nu: 1.0,
            lambda: 0.0,
            epsilon: 0.05,
            delta: 0.01,
            noise_family: NoiseFamily::Affine,
            noise_k: 8,
            noise_c0: 0.5,
            r: None,
            dt: 1e-3,
            t_end: 1.0,
            stepper: Stepper::EulerMaruyama,
            transport: TransportScheme::ExponentialDiffusion,
            fp_tol: 1e-10,
            fp_maxiter: 50,
            dt_min: 1e-7,
            rho_floor: 1e-10,
            seed: 0,
        }
    }
}

impl SimConfig {
    /// Grid, time-step and solver sanity checks.
    pub fn validate_numerics(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if !(1..=3).contains(&self.dim) {
            return fail(format!("dim must be 1, 2 or 3, got {}", self.dim));
        }
        if self.m < 4 || !self.m.is_power_of_two() {
            return fail(format!("m must be a power of two >= 4, got {}", self.m));
        }
        if self.cutoff == 0 || 4 * self.cutoff >= self.m {
            return fail(format!("cutoff must satisfy 1 <= cutoff and 4*cutoff < m, got cutoff={} m={}", self.cutoff, self.m));
        }
        if !(self.dt > 0.0) || !(self.t_end > 0.0) || self.dt > self.t_end {
            return fail(format!("need 0 < dt <= t_end, got dt={} t_end={}", self.dt, self.t_end));
        }
        if !(self.dt_min > 0.0) || self.dt_min > self.dt {
            return fail(format!("need 0 < dt_min <= dt, got {}", self.dt_min));
        }
        if !(self.nu > 0.0) {
            return fail(format!("nu must be positive, got {}", self.nu));
        }
        if let Some(r) = self.r {
            if !(r > 0.0) {
                return fail(format!("truncation radius must be positive, got {r}"));
            }
        }
        if !(self.fp_tol > 0.0) || self.fp_maxiter == 0 {
            return fail("fixed-point tolerance and iteration cap must be positive".into());
        }
        if !(self.noise_c0 >= 0.0) {
            return fail(format!("noise amplitude must be >= 0, got {}", self.noise_c0));
        }
        Ok(())
    }

    /// Numerics plus the standing parameter assumptions of the model.
    pub fn validate(&self) -> Result<()> {
        self.validate_numerics()?;
        let fail = |m: String| Err(Error::Config(m));
        if self.dim == 3 && !(self.gamma > 1.5) {
            return fail(format!("gamma must exceed 3/2 in d=3, got {}", self.gamma));
        }
        if !(self.gamma > 1.0) {
            return fail(format!("gamma must exceed 1, got {}", self.gamma));
        }
        if !(self.beta > 4.5_f64.max(self.gamma)) {
            return fail(format!("beta must exceed max(9/2, gamma), got {}", self.beta));
        }
        if !(self.a > 0.0) {
            return fail(format!("pressure constant a must be positive, got {}", self.a));
        }
        if !(self.lambda + 2.0 * self.nu / 3.0 >= 0.0) {
            return fail(format!("lambda + 2 nu / 3 must be >= 0, got lambda={} nu={}", self.lambda, self.nu));
        }
        if !(0.0..1.0).contains(&self.epsilon) {
            return fail(format!("epsilon must lie in [0, 1), got {}", self.epsilon));
        }
        if !(0.0..1.0).contains(&self.delta) {
            return fail(format!("delta must lie in [0, 1), got {}", self.delta));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round().max(1.0) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        SimConfig::default().validate().unwrap();
    }

    #[test]
    fn dimension_dependent_gamma() {
        let mut c = SimConfig { gamma: 1.2, ..SimConfig::default() };
        c.validate().unwrap();
        c.dim = 3;
        let e = c.validate().unwrap_err().to_string();
        assert!(e.contains("3/2"), "{e}");
    }

    #[test]
    fn beta_and_viscosity_checks() {
        assert!(SimConfig { beta: 4.0, ..SimConfig::default() }.validate().is_err());
        assert!(SimConfig { lambda: -1.0, ..SimConfig::default() }.validate().is_err());
        assert!(SimConfig { lambda: -0.5, ..SimConfig::default() }.validate().is_ok());
    }
}
