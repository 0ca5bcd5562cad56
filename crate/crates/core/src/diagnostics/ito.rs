//! Discrete Itô balance for the kinetic energy `f(ρ, q) = ½⟨q, M⁻¹[ρ] q⟩`.
//!
//! Per unit time, at the left point of each step:
//! `J2 = −ν‖∇u‖²`, `J3 = −(λ+ν)‖div u‖²`, `J4 = ⟨ρu⊗u, ∇u⟩`, `J5 = −ε⟨∇u∇ρ, u⟩`,
//! `J6 = ⟨aρ^γ, div u⟩`, `J7 = ⟨δρ^β, div u⟩`, `J9 = (ε/2)⟨∇|u|², ∇ρ⟩`,
//! `J10 = −½⟨∇|u|², ρu⟩`, `J11 = ½ Σ_k ⟨M⁻¹g_k^N, g_k^N⟩`, and per step
//! `J8 = Σ_k ⟨u, g_k^N⟩ ΔW_k`.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::Result;
use crate::galerkin::{GalerkinModel, PathRecord};
use crate::spectral::{ops, ScalarField};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ItoTerms {
    pub j2: f64,
    pub j3: f64,
    pub j4: f64,
    pub j5: f64,
    pub j6: f64,
    pub j7: f64,
    pub j8: f64,
    pub j9: f64,
    pub j10: f64,
    pub j11: f64,
    /// `½ (ΦΔW)ᵀ M⁻¹ (ΦΔW) / dt`: the quadratic-variation term with realized increments.
    pub j11_realized: f64,
}

impl ItoTerms {
    /// Predicted increment of `f` over a step, with the expected or the realized quadratic variation.
    pub fn increment(&self, dt: f64, realized: bool) -> f64 {
        let qv = if realized { self.j11_realized } else { self.j11 };
        dt * (self.j2 + self.j3 + self.j4 + self.j5 + self.j6 + self.j7 + self.j9 + self.j10 + qv) + self.j8
    }
}

pub fn kinetic(rho: &ScalarField, model: &GalerkinModel, u: &[f64]) -> f64 {
    0.5 * rho.inner(&model.velocity(u).norm_sq_field())
}

/// All J-terms at `(ρ, u)` for a step of length `dt` driven by `dw`.
pub fn ito_terms(model: &GalerkinModel, rho: &ScalarField, u: &[f64], dw: &[f64], dt: f64) -> Result<ItoTerms> {
    let cfg = model.config();
    let basis = model.basis();
    let d = cfg.dim;
    let s = basis.scalar_len();
    let vel = model.velocity(u);
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();

    // Exact derivatives of the velocity components.
    let du: Vec<Vec<ScalarField>> = (0..d)
        .map(|a| {
            let ua = &u[a * s..(a + 1) * s];
            (0..d).map(|j| basis.synthesize_scalar(&basis.derivative_coeffs(ua, j))).collect()
        })
        .collect();
    let mut grad_sq = 0.0;
    let mut divu = ScalarField::zeros(model.grid());
    for a in 0..d {
        for j in 0..d {
            grad_sq += du[a][j].inner(&du[a][j]);
        }
        divu = divu.add(&du[a][a]);
    }
    let mut t = ItoTerms { j2: -cfg.nu * grad_sq, j3: -(cfg.lambda + cfg.nu) * divu.inner(&divu), ..Default::default() };

    let parts = model.drift_parts(rho, rho, u);
    t.j4 = dot(&parts.convection, u);
    t.j5 = dot(&parts.artificial_viscosity, u);
    let rho_pos = rho.map(|r| r.max(0.0));
    t.j6 = cfg.a * rho_pos.map(|r| r.powf(cfg.gamma)).inner(&divu);
    t.j7 = cfg.delta * rho_pos.map(|r| r.powf(cfg.beta)).inner(&divu);

    let grad_u2 = ops::grad(&vel.norm_sq_field());
    let grad_rho = ops::grad(rho);
    t.j9 = 0.5 * cfg.epsilon * grad_u2.inner(&grad_rho);
    t.j10 = -0.5 * grad_u2.inner(&vel.scale_by(rho));

    if !model.noise().is_zero() {
        let mass = model.mass(rho)?;
        let phi = model.phi_n(rho, u, &mass)?;
        let mut qv = 0.0;
        for k in 0..phi.ncols() {
            let col: Vec<f64> = phi.column(k).iter().copied().collect();
            t.j8 += dot(&col, u) * dw[k];
            qv += mass.inv_inner(&col, &col)?;
        }
        t.j11 = 0.5 * qv;
        let inc: Vec<f64> = (phi * DVector::from_column_slice(dw)).iter().copied().collect();
        t.j11_realized = 0.5 * mass.inv_inner(&inc, &inc)? / dt;
    }
    Ok(t)
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ItoResidual {
    pub t: Vec<f64>,
    /// `f(t_n) − f(0) − Σ` predicted increments, realized quadratic variation.
    pub residual: Vec<f64>,
    /// Same with the expected quadratic variation `J11·dt`.
    pub residual_expected_qv: Vec<f64>,
    /// Largest `|J5 + J9| / max(|J5|, |J9|)` over steps.
    pub cancel_j5_j9: f64,
    /// Largest `|J4 + J10| / max(|J4|, |J10|)` over steps.
    pub cancel_j4_j10: f64,
}

impl ItoResidual {
    pub fn max_abs(&self) -> f64 {
        self.residual.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_expected_qv(&self) -> f64 {
        self.residual_expected_qv.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Relative cancellation `|a + b| / max(|a|, |b|)`; pairs below `floor` are
/// rounding noise and count as cancelled.
fn rel(a: f64, b: f64, floor: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale <= floor {
        0.0
    } else {
        (a + b).abs() / scale
    }
}

/// Residual series of the Itô energy balance along a path recorded with
/// `RecordOptions::full()`.
pub fn ito_energy_residual(model: &GalerkinModel, rec: &PathRecord) -> Result<ItoResidual> {
    let mut out = ItoResidual::default();
    let Some(first) = rec.states.first() else {
        return Ok(out);
    };
    let f0 = kinetic(&first.rho, model, &first.u);
    let (mut acc, mut acc_e) = (0.0, 0.0);
    out.t.push(first.t);
    out.residual.push(0.0);
    out.residual_expected_qv.push(0.0);
    for (i, step) in rec.steps.iter().enumerate() {
        let s0 = &rec.states[i];
        let s1 = &rec.states[i + 1];
        let terms = ito_terms(model, &s0.rho, &s0.u, &step.dw, step.dt)?;
        let floor = 1e-13 * kinetic(&s0.rho, model, &s0.u).max(1.0);
        out.cancel_j5_j9 = out.cancel_j5_j9.max(rel(terms.j5, terms.j9, floor));
        out.cancel_j4_j10 = out.cancel_j4_j10.max(rel(terms.j4, terms.j10, floor));
        acc += terms.increment(step.dt, true);
        acc_e += terms.increment(step.dt, false);
        let f = kinetic(&s1.rho, model, &s1.u) - f0;
        out.t.push(s1.t);
        out.residual.push(f - acc);
        out.residual_expected_qv.push(f - acc_e);
    }
    Ok(out)
}
