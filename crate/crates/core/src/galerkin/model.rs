use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::config::SimConfig;
use super::truncation::apply_truncation;
use crate::basis::GalerkinBasis;
use crate::error::{Error, Result};
use crate::mass::{assemble_m, MassMatrix};
use crate::noise::{assemble_phi_n, NoiseModel};
use crate::spectral::{ops, ScalarField, TorusGrid, VectorField};
use crate::transport::TransportConfig;

/// Counters for non-fatal events along a path.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct EventLog {
    pub step_rejections: u64,
    pub positivity_clips: u64,
    pub fixed_point_stalls: u64,
    pub cfl_overrides: u64,
    pub max_mass_clamp: f64,
}

/// Density on the grid, momentum-basis coefficients of `u`, and the accumulated
/// stochastic integral `Z = ∫Φ^N dW` in the same coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct GalerkinState {
    pub t: f64,
    pub rho: ScalarField,
    pub u: Vec<f64>,
    pub z: Vec<f64>,
    pub events: EventLog,
}

impl GalerkinState {
    pub fn new(rho: ScalarField, u: Vec<f64>) -> Self {
        let n = u.len();
        Self { t: 0.0, rho, u, z: vec![0.0; n], events: EventLog::default() }
    }

    pub fn u_l2(&self) -> f64 {
        self.u.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn z_l2(&self) -> f64 {
        self.z.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

/// Drift pairings with every basis field, split by origin.
#[derive(Clone, Debug, PartialEq)]
pub struct DriftParts {
    /// `⟨ρu⊗u, ∇ψ_n⟩`
    pub convection: Vec<f64>,
    /// `⟨aρ^γ + δρ^β, div ψ_n⟩`
    pub pressure: Vec<f64>,
    /// `−ε⟨∇u∇ρ, ψ_n⟩`
    pub artificial_viscosity: Vec<f64>,
    /// `−ν⟨∇u, ∇ψ_n⟩ − (λ+ν)⟨div u, div ψ_n⟩`
    pub viscous: Vec<f64>,
}

impl DriftParts {
    pub fn total(&self) -> Vec<f64> {
        (0..self.convection.len())
            .map(|i| self.convection[i] + self.pressure[i] + self.artificial_viscosity[i] + self.viscous[i])
            .collect()
    }
}

/// Immutable per-configuration data shared by all paths.
#[derive(Clone, Debug)]
pub struct GalerkinModel {
    cfg: SimConfig,
    grid: TorusGrid,
    basis: GalerkinBasis,
    noise: NoiseModel,
    viscous: DMatrix<f64>,
}

impl GalerkinModel {
    pub fn new(cfg: SimConfig) -> Result<Self> {
        cfg.validate()?;
        Self::new_relaxed(cfg)
    }

    /// Skips the physical parameter assumptions (for analytic fixtures such as `a = 0`).
    pub fn new_relaxed(cfg: SimConfig) -> Result<Self> {
        cfg.validate_numerics()?;
        let grid = TorusGrid::new(cfg.dim, cfg.m)?;
        let basis = GalerkinBasis::new(grid, cfg.cutoff)?;
        let noise = NoiseModel::new(cfg.noise_family, cfg.noise_k, cfg.noise_c0, cfg.gamma, cfg.dim)?;
        let viscous = viscous_matrix(&basis, cfg.nu, cfg.lambda);
        Ok(Self { cfg, grid, basis, noise, viscous })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn basis(&self) -> &GalerkinBasis {
        &self.basis
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn viscous_matrix(&self) -> &DMatrix<f64> {
        &self.viscous
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn transport_config(&self, dt: f64) -> TransportConfig {
        TransportConfig { epsilon: self.cfg.epsilon, dt, scheme: self.cfg.transport }
    }

    pub fn velocity(&self, u: &[f64]) -> VectorField {
        self.basis.synthesize_vector(u)
    }

    pub fn truncated(&self, v: &[f64]) -> Vec<f64> {
        apply_truncation(v, self.cfg.r)
    }

    pub fn pressure(&self, rho: &ScalarField) -> ScalarField {
        let c = &self.cfg;
        rho.map(|r| {
            let r = r.max(0.0);
            c.a * r.powf(c.gamma) + c.delta * r.powf(c.beta)
        })
    }

    pub fn mass(&self, rho: &ScalarField) -> Result<MassMatrix> {
        assemble_m(rho, &self.basis)
    }

    /// `ρu` as a grid field, with `u` given in coefficients.
    pub fn momentum_field(&self, rho: &ScalarField, u: &[f64]) -> VectorField {
        self.velocity(u).scale_by(rho)
    }

    /// Columns `g_k^N(ρ, ρu)`.
    pub fn phi_n(&self, rho: &ScalarField, u: &[f64], mass: &MassMatrix) -> Result<DMatrix<f64>> {
        let q = self.momentum_field(rho, u);
        assemble_phi_n(&self.noise, rho, &q, &self.basis, mass, self.cfg.rho_floor)
    }

    /// `⟨f, div ψ_n⟩`-type pairing: coefficients of `⟨f, ∂_axis φ_α⟩` for all α.
    fn pair_with_derivative(&self, f: &ScalarField, axis: usize) -> Vec<f64> {
        let c = self.basis.scalar_coeffs(f);
        self.basis.derivative_coeffs(&c, axis).into_iter().map(|v| -v).collect()
    }

    /// Drift pairings. Pressure uses `rho_p`; convection and the ε-term use `(rho, u)`.
    pub fn drift_parts(&self, rho_p: &ScalarField, rho: &ScalarField, u: &[f64]) -> DriftParts {
        let d = self.cfg.dim;
        let s = self.basis.scalar_len();
        let n = self.basis.len();
        let vel = self.velocity(u);
        let mut convection = vec![0.0; n];
        let mut pressure = vec![0.0; n];
        let mut artificial_viscosity = vec![0.0; n];

        let p = self.pressure(rho_p);
        for a in 0..d {
            pressure[a * s..(a + 1) * s].copy_from_slice(&self.pair_with_derivative(&p, a));
        }

        let rho_u: Vec<ScalarField> = (0..d).map(|j| rho.mul(vel.component(j))).collect();
        for a in 0..d {
            let out = &mut convection[a * s..(a + 1) * s];
            for (j, rj) in rho_u.iter().enumerate() {
                let f = rj.mul(vel.component(a));
                for (o, v) in out.iter_mut().zip(self.pair_with_derivative(&f, j)) {
                    *o += v;
                }
            }
        }

        if self.cfg.epsilon != 0.0 {
            let grad_rho = ops::grad(rho);
            for a in 0..d {
                let ua = &u[a * s..(a + 1) * s];
                let mut acc = ScalarField::zeros(self.grid);
                for j in 0..d {
                    let duaj = self.basis.synthesize_scalar(&self.basis.derivative_coeffs(ua, j));
                    acc = acc.add(&duaj.mul(grad_rho.component(j)));
                }
                let c = self.basis.scalar_coeffs(&acc);
                for (o, v) in artificial_viscosity[a * s..(a + 1) * s].iter_mut().zip(c) {
                    *o = -self.cfg.epsilon * v;
                }
            }
        }

        let viscous = (&self.viscous * DVector::from_column_slice(u)).iter().map(|v| -v).collect();
        DriftParts { convection, pressure, artificial_viscosity, viscous }
    }

    /// Coefficients of `𝒩[ρ, u]` paired with every basis field.
    pub fn momentum_rhs(&self, state: &GalerkinState) -> Result<Vec<f64>> {
        let out = self.drift_parts(&state.rho, &state.rho, &state.u).total();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalBlowup("momentum right-hand side is not finite".into()));
        }
        Ok(out)
    }
}

/// `A = ν(−Δ) + (λ+ν)(−∇div)` on the vector basis: per scalar mode with
/// wavevector `k`, the `d×d` block `4π²(ν|k|² I + (λ+ν) k kᵀ)`.
pub fn viscous_matrix(basis: &GalerkinBasis, nu: f64, lambda: f64) -> DMatrix<f64> {
    let s = basis.scalar_len();
    let d = basis.grid().dim();
    let n = basis.len();
    let mut a = DMatrix::zeros(n, n);
    for (alpha, mode) in basis.scalar_modes().iter().enumerate() {
        let k = mode.k.k;
        let k2 = mode.k.norm_sq() as f64;
        for i in 0..d {
            for j in 0..d {
                let mut v = (lambda + nu) * (k[i] * k[j]) as f64;
                if i == j {
                    v += nu * k2;
                }
                a[(i * s + alpha, j * s + alpha)] = 4.0 * PI * PI * v;
            }
        }
    }
    a
}
