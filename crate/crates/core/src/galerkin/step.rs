//! One time step of the coupled density / momentum system.
//!
//! Both steppers advance the density first, then solve
//! `(M[ρ⁺] + dt·A) u⁺ = M[ρ]u + dt·F + Θ_R(Z⁺) − Θ_R(Z)` with the viscous operator
//! `A` taken implicitly, pressure at `ρ⁺`, convection and the ε-term at the left
//! point, and the noise integrand `Φ^N(ρ, ρu)` at the left point.

use nalgebra::{DMatrix, DVector};

use super::model::{EventLog, GalerkinModel, GalerkinState};
use crate::error::{Error, Result};
use crate::spectral::ScalarField;
use crate::transport::{advance_density, advance_density_unchecked, cfl_limit};

#[derive(Clone, Debug)]
pub struct FixedPointOutcome {
    pub state: GalerkinState,
    pub iterations: usize,
    pub converged: bool,
}

/// Left-point quantities shared by both steppers.
struct Frozen {
    z_next: Vec<f64>,
    /// `M[ρ]u + Θ_R(Z⁺) − Θ_R(Z)`
    base: Vec<f64>,
    /// Convection plus ε-term at the left point.
    explicit: Vec<f64>,
}

impl GalerkinModel {
    fn transport(
        &self,
        rho: &ScalarField,
        u_coeffs: &[f64],
        dt: f64,
        allow_clip: bool,
        events: &mut EventLog,
    ) -> Result<ScalarField> {
        let vel = self.velocity(u_coeffs);
        if dt > cfl_limit(&vel) {
            if !allow_clip {
                return Err(Error::StepRejected(format!("dt = {dt:e} exceeds the advective limit")));
            }
            events.cfl_overrides += 1;
        }
        let cfg = self.transport_config(dt);
        match advance_density(rho, &vel, &cfg) {
            Err(Error::StepRejected(_)) if allow_clip => {
                let floor = self.config().rho_floor;
                let mut out = advance_density_unchecked(rho, &vel, &cfg)?;
                out.values_mut().iter_mut().for_each(|v| *v = v.max(floor));
                events.positivity_clips += 1;
                Ok(out)
            }
            other => other,
        }
    }

    fn frozen(&self, state: &GalerkinState, ut: &[f64], dw: &[f64], events: &mut EventLog) -> Result<Frozen> {
        let mass = self.mass(&state.rho)?;
        events.max_mass_clamp = events.max_mass_clamp.max(mass.clamp_magnitude());
        let mut z_next = state.z.clone();
        if !self.noise().is_zero() {
            let phi = self.phi_n(&state.rho, ut, &mass)?;
            let inc = phi * DVector::from_column_slice(dw);
            z_next.iter_mut().zip(inc.iter()).for_each(|(z, i)| *z += i);
        }
        let tz0 = self.truncated(&state.z);
        let tz1 = self.truncated(&z_next);
        let mut base = mass.apply(&state.u);
        for i in 0..base.len() {
            base[i] += tz1[i] - tz0[i];
        }
        let parts = self.drift_parts(&state.rho, &state.rho, ut);
        let explicit = parts.convection.iter().zip(&parts.artificial_viscosity).map(|(a, b)| a + b).collect();
        Ok(Frozen { z_next, base, explicit })
    }

    fn pressure_pairing(&self, rho: &ScalarField) -> Vec<f64> {
        let s = self.basis().scalar_len();
        let p = self.pressure(rho);
        let c = self.basis().scalar_coeffs(&p);
        let mut out = vec![0.0; self.dim()];
        for a in 0..self.config().dim {
            for (o, v) in out[a * s..(a + 1) * s].iter_mut().zip(self.basis().derivative_coeffs(&c, a)) {
                *o = -v;
            }
        }
        out
    }

    fn implicit_solve(&self, rho_next: &ScalarField, frozen: &Frozen, dt: f64, events: &mut EventLog) -> Result<Vec<f64>> {
        let mass_next = self.mass(rho_next)?;
        events.max_mass_clamp = events.max_mass_clamp.max(mass_next.clamp_magnitude());
        let press = self.pressure_pairing(rho_next);
        let rhs: Vec<f64> = (0..frozen.base.len())
            .map(|i| frozen.base[i] + dt * (frozen.explicit[i] + press[i]))
            .collect();
        let lhs: DMatrix<f64> = mass_next.to_dense() + self.viscous_matrix() * dt;
        let chol = lhs
            .cholesky()
            .ok_or(Error::SingularMass { rho_min: rho_next.min() })?;
        let u = chol.solve(&DVector::from_vec(rhs));
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalBlowup("momentum solve produced a non-finite value".into()));
        }
        Ok(u.iter().copied().collect())
    }

    /// Euler–Maruyama step with increment `dw` over `dt`.
    pub fn step_em(&self, state: &GalerkinState, dw: &[f64], dt: f64) -> Result<GalerkinState> {
        self.step_em_with(state, dw, dt, false)
    }

    /// `allow_clip` accepts CFL violations and clips undershoots at the floor
    /// (used once the step size reached `dt_min`); both are logged.
    pub fn step_em_with(&self, state: &GalerkinState, dw: &[f64], dt: f64, allow_clip: bool) -> Result<GalerkinState> {
        let mut events = state.events.clone();
        let ut = self.truncated(&state.u);
        let rho_next = self.transport(&state.rho, &ut, dt, allow_clip, &mut events)?;
        let frozen = self.frozen(state, &ut, dw, &mut events)?;
        let u = self.implicit_solve(&rho_next, &frozen, dt, &mut events)?;
        Ok(GalerkinState { t: state.t + dt, rho: rho_next, u, z: frozen.z_next, events })
    }

    /// Picard iteration on the end-of-step velocity that drives the density,
    /// with the Wiener increment and the left-point noise integrand frozen.
    /// The first iterate is the Euler–Maruyama step. Without convergence the
    /// Euler–Maruyama result is returned and a stall is logged.
    pub fn step_fixed_point(&self, state: &GalerkinState, dw: &[f64], dt: f64) -> Result<FixedPointOutcome> {
        self.step_fixed_point_with(state, dw, dt, false)
    }

    pub fn step_fixed_point_with(
        &self,
        state: &GalerkinState,
        dw: &[f64],
        dt: f64,
        allow_clip: bool,
    ) -> Result<FixedPointOutcome> {
        let mut events = state.events.clone();
        let ut = self.truncated(&state.u);
        let frozen = self.frozen(state, &ut, dw, &mut events)?;
        let mut guess = state.u.clone();
        let mut first: Option<(ScalarField, Vec<f64>)> = None;
        let cfg = self.config();
        for iter in 1..=cfg.fp_maxiter {
            let rho = self.transport(&state.rho, &self.truncated(&guess), dt, allow_clip, &mut events)?;
            let u = self.implicit_solve(&rho, &frozen, dt, &mut events)?;
            let diff = u.iter().zip(&guess).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            if first.is_none() {
                first = Some((rho.clone(), u.clone()));
            }
            if diff <= cfg.fp_tol {
                return Ok(FixedPointOutcome {
                    state: GalerkinState { t: state.t + dt, rho, u, z: frozen.z_next, events },
                    iterations: iter,
                    converged: true,
                });
            }
            guess = u;
        }
        events.fixed_point_stalls += 1;
        let (rho, u) = first.expect("at least one iteration ran");
        Ok(FixedPointOutcome {
            state: GalerkinState { t: state.t + dt, rho, u, z: frozen.z_next, events },
            iterations: cfg.fp_maxiter,
            converged: false,
        })
    }

    /// Step with the configured stepper.
    pub fn step(&self, state: &GalerkinState, dw: &[f64], dt: f64, allow_clip: bool) -> Result<GalerkinState> {
        match self.config().stepper {
            super::Stepper::EulerMaruyama => self.step_em_with(state, dw, dt, allow_clip),
            super::Stepper::FixedPoint => Ok(self.step_fixed_point_with(state, dw, dt, allow_clip)?.state),
        }
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::galerkin::SimConfig;

    fn stokes_model() -> GalerkinModel {
        let cfg = SimConfig { a: 0.0, delta: 0.0, epsilon: 0.0, noise_c0: 0.0, ..SimConfig::default() };
        GalerkinModel::new_relaxed(cfg).unwrap()
    }

    /// Shear mode `u = (√2 sin(2πx₁), 0)`, divergence free.
    fn shear(model: &GalerkinModel, amp: f64) -> Vec<f64> {
        let b = model.basis();
        let a = b
            .scalar_modes()
            .iter()
            .position(|m| m.k.k == [0, 1, 0] && m.kind == crate::basis::TrigKind::Sin)
            .unwrap();
        let mut u = vec![0.0; model.dim()];
        u[a] = amp;
        u
    }

    #[test]
    fn stokes_mode_decays_at_heat_rate() {
        let model = stokes_model();
        let g = model.grid();
        let state = GalerkinState::new(ScalarField::constant(g, 1.0), shear(&model, 0.3));
        let dt = 1e-3;
        let next = model.step_em(&state, &vec![0.0; 8], dt).unwrap();
        let rate = 4.0 * PI * PI * model.config().nu;
        let expect = 0.3 * (-rate * dt).exp();
        let got = next.u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((got - expect).abs() < 0.3 * rate * rate * dt * dt, "{got} vs {expect}");
        assert!(next.rho.sub(&state.rho).sup_norm() < 1e-14);
    }

    #[test]
    fn stokes_rhs_matches_eigenvalue() {
        let model = stokes_model();
        let g = model.grid();
        let u = shear(&model, 1e-6);
        let state = GalerkinState::new(ScalarField::constant(g, 1.0), u.clone());
        let rhs = model.momentum_rhs(&state).unwrap();
        let lam = 4.0 * PI * PI * model.config().nu;
        for (r, c) in rhs.iter().zip(&u) {
            assert!((r + lam * c).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_state_is_steady() {
        let cfg = SimConfig { noise_c0: 0.0, ..SimConfig::default() };
        let model = GalerkinModel::new(cfg).unwrap();
        let g = model.grid();
        let state = GalerkinState::new(ScalarField::constant(g, 1.0), vec![0.0; model.dim()]);
        let next = model.step_em(&state, &vec![0.0; 8], 1e-3).unwrap();
        assert!(next.u.iter().all(|v| v.abs() < 1e-14));
        let fp = model.step_fixed_point(&state, &vec![0.0; 8], 1e-3).unwrap();
        assert_eq!(fp.iterations, 1);
        assert!(fp.converged);
    }

    #[test]
    fn linear_fixed_point_converges_in_two() {
        let model = stokes_model();
        let g = model.grid();
        let state = GalerkinState::new(ScalarField::constant(g, 1.0), shear(&model, 0.3));
        let fp = model.step_fixed_point(&state, &vec![0.0; 8], 1e-3).unwrap();
        assert!(fp.converged && fp.iterations <= 2, "{}", fp.iterations);
        let em = model.step_em(&state, &vec![0.0; 8], 1e-3).unwrap();
        for (a, b) in fp.state.u.iter().zip(&em.u) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn undershoot_is_rejected_then_clipped() {
        let cfg = SimConfig { epsilon: 0.0, noise_c0: 0.0, ..SimConfig::default() };
        let model = GalerkinModel::new(cfg).unwrap();
        let g = model.grid();
        let rho = ScalarField::from_fn(g, |x| 1e-3 + (1.0 - (2.0 * PI * x[0]).cos()).powi(4));
        let mut u = vec![0.0; model.dim()];
        // Strong compression along x₀ drives the density negative.
        let a = model
            .basis()
            .scalar_modes()
            .iter()
            .position(|m| m.k.k == [1, 0, 0] && m.kind == crate::basis::TrigKind::Sin)
            .unwrap();
        u[a] = 3.0;
        let state = GalerkinState::new(rho, u);
        let r = model.step_em(&state, &vec![0.0; 8], 1e-2);
        assert!(matches!(r, Err(Error::StepRejected(_))), "{r:?}");
        let clipped = model.step_em_with(&state, &vec![0.0; 8], 1e-2, true).unwrap();
        assert!(clipped.events.positivity_clips + clipped.events.cfl_overrides > 0);
    }
}
