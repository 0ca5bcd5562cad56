//! Higher integrability of the pressure: test the momentum equation with
//! `P_N Δ⁻¹∇b(ρ)` and track both sides of the resulting discrete Itô identity.
//!
//! With `w = Δ⁻¹∇b(ρ)` and `f = ⟨q, P_N w⟩`,
//! `f(T) − f(0) = ∫ visc + ∫ pressure + ∫ mean + ∫ conv + ∫ eps + ∫ stretch + ∫ transport + Σ noise`
//! where `pressure = ⟨p, P_N b⟩`, `mean = −(b)∫p`, `stretch = ⟨q, P_N Δ⁻¹∇(εb′Δρ)⟩` and
//! `transport = −⟨q, P_N Δ⁻¹∇(b′ div(ρu))⟩`. Every integrand is taken at the left point.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::galerkin::{GalerkinModel, PathRecord};
use crate::renorm::{tk, tk_prime};
use crate::spectral::{ops, ScalarField, VectorField};
use crate::stats::{fit_order, Estimate};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum PressureMode {
    FullDensity,
    Tk(f64),
    Theta(f64),
}

impl PressureMode {
    /// Rejects `Θ` outside `(0, ⅔γ − 1]` and `k ≤ 0`.
    pub fn validate(&self, gamma: f64) -> Result<()> {
        match *self {
            PressureMode::FullDensity => Ok(()),
            PressureMode::Tk(k) if k > 0.0 => Ok(()),
            PressureMode::Tk(k) => Err(Error::Precondition(format!("cutoff level k = {k} must be positive"))),
            PressureMode::Theta(th) => {
                let max = 2.0 * gamma / 3.0 - 1.0;
                if th > 0.0 && th <= max + 1e-12 {
                    Ok(())
                } else {
                    Err(Error::Precondition(format!(
                        "theta = {th} must lie in (0, 2*gamma/3 - 1] = (0, {max:.6}] for gamma = {gamma}"
                    )))
                }
            }
        }
    }

    fn b(&self, r: f64, floor: f64) -> f64 {
        match *self {
            PressureMode::FullDensity => r,
            PressureMode::Tk(k) => tk(r, k),
            PressureMode::Theta(th) => r.max(floor).powf(th),
        }
    }

    fn b_prime(&self, r: f64, floor: f64) -> f64 {
        match *self {
            PressureMode::FullDensity => 1.0,
            PressureMode::Tk(k) => tk_prime(r, k),
            PressureMode::Theta(th) => th * r.max(floor).powf(th - 1.0),
        }
    }
}

/// Time integrals of the identity terms along one path.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct PressureTerms {
    pub viscous: f64,
    pub pressure: f64,
    pub mean_correction: f64,
    pub convection: f64,
    pub artificial_viscosity: f64,
    pub stretch: f64,
    pub transport: f64,
    pub noise: f64,
}

impl PressureTerms {
    pub fn total(&self) -> f64 {
        self.viscous
            + self.pressure
            + self.mean_correction
            + self.convection
            + self.artificial_viscosity
            + self.stretch
            + self.transport
            + self.noise
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct PathPressure {
    /// `∫∫ p·b(ρ)`; for `FullDensity` this is `∫∫(aρ^{γ+1} + δρ^{β+1})`.
    pub integral: f64,
    /// `f(T) − f(0)`.
    pub lhs: f64,
    pub terms: PressureTerms,
    pub defect: f64,
    /// For `FullDensity`: gap between the generic transport term and its Riesz form.
    pub riesz_gap: f64,
}

fn coeff_dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn test_coeffs(model: &GalerkinModel, rho: &ScalarField, mode: PressureMode) -> (ScalarField, Vec<f64>) {
    let floor = model.config().rho_floor;
    let b = rho.map(|r| mode.b(r, floor));
    let w = ops::inv_laplacian_grad(&b);
    (b, model.basis().project_vector(&w))
}

fn pairing(model: &GalerkinModel, rho: &ScalarField, u: &[f64], w: &[f64]) -> Result<f64> {
    Ok(coeff_dot(&model.mass(rho)?.apply(u), w))
}

/// Both sides of the identity along a path recorded with `RecordOptions::full()`.
pub fn pressure_path(model: &GalerkinModel, rec: &PathRecord, mode: PressureMode) -> Result<PathPressure> {
    let cfg = model.config();
    mode.validate(cfg.gamma)?;
    let basis = model.basis();
    let floor = cfg.rho_floor;
    let mut out = PathPressure::default();
    let (Some(first), Some(last)) = (rec.states.first(), rec.states.last()) else {
        return Ok(out);
    };
    let (_, w0) = test_coeffs(model, &first.rho, mode);
    let (_, w1) = test_coeffs(model, &last.rho, mode);
    out.lhs = pairing(model, &last.rho, &last.u, &w1)? - pairing(model, &first.rho, &first.u, &w0)?;

    let mut t = PressureTerms::default();
    for (i, step) in rec.steps.iter().enumerate() {
        let s = &rec.states[i];
        let dt = step.dt;
        let (b, w) = test_coeffs(model, &s.rho, mode);
        let parts = model.drift_parts(&s.rho, &s.rho, &s.u);
        let p = model.pressure(&s.rho);
        let pb = basis.synthesize_scalar(&basis.scalar_coeffs(&b));
        out.integral += dt * p.inner(&b);
        t.viscous += dt * coeff_dot(&parts.viscous, &w);
        t.pressure += dt * p.inner(&pb);
        t.mean_correction -= dt * b.mean() * p.integral();
        t.convection += dt * coeff_dot(&parts.convection, &w);
        t.artificial_viscosity += dt * coeff_dot(&parts.artificial_viscosity, &w);

        let bp = s.rho.map(|r| mode.b_prime(r, floor));
        let vel = model.velocity(&s.u);
        let flux = vel.scale_by(&s.rho);
        let divq = ops::div(&flux);
        let qc = basis.project_vector(&flux);
        if cfg.epsilon != 0.0 {
            let src = bp.mul(&ops::laplacian(&s.rho)).scaled(cfg.epsilon);
            t.stretch += dt * coeff_dot(&qc, &basis.project_vector(&ops::inv_laplacian_grad(&src)));
        }
        let transport = coeff_dot(&qc, &basis.project_vector(&ops::inv_laplacian_grad(&bp.mul(&divq))));
        t.transport -= dt * transport;
        if mode == PressureMode::FullDensity {
            let d = cfg.dim;
            let comps: Vec<ScalarField> = (0..d)
                .map(|i| {
                    (0..d).fold(ScalarField::zeros(model.grid()), |acc, j| acc.add(&ops::riesz(i, j, flux.component(j))))
                })
                .collect();
            let via_riesz = coeff_dot(&qc, &basis.project_vector(&VectorField::new(comps)?));
            out.riesz_gap = out.riesz_gap.max((via_riesz - transport).abs());
        }

        if !model.noise().is_zero() {
            let mass = model.mass(&s.rho)?;
            let phi = model.phi_n(&s.rho, &s.u, &mass)?;
            let inc = phi * DVector::from_column_slice(&step.dw);
            t.noise += coeff_dot(inc.as_slice(), &w);
        }
    }
    out.terms = t;
    out.defect = out.lhs - t.total();
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct PressureReport {
    pub mode: PressureMode,
    pub integral: Estimate,
    /// Mean absolute identity defect over paths.
    pub defect: Estimate,
    pub max_riesz_gap: f64,
    pub paths: Vec<PathPressure>,
}

impl PressureReport {
    pub fn from_paths(mode: PressureMode, paths: Vec<PathPressure>) -> Result<Self> {
        if paths.len() < 2 {
            return Err(Error::InsufficientSample { needed: 2, got: paths.len() });
        }
        let integral: Vec<f64> = paths.iter().map(|p| p.integral).collect();
        let defect: Vec<f64> = paths.iter().map(|p| p.defect.abs()).collect();
        Ok(Self {
            mode,
            integral: Estimate::from_samples(&integral),
            defect: Estimate::from_samples(&defect),
            max_riesz_gap: paths.iter().fold(0.0, |m, p| m.max(p.riesz_gap)),
            paths,
        })
    }
}

pub fn pressure_integrability(model: &GalerkinModel, ensemble: &[PathRecord], mode: PressureMode) -> Result<PressureReport> {
    mode.validate(model.config().gamma)?;
    let paths = ensemble.iter().map(|r| pressure_path(model, r, mode)).collect::<Result<Vec<_>>>()?;
    PressureReport::from_paths(mode, paths)
}

/// Observed order of the mean defect under refinement of `dt`.
pub fn defect_order(dts: &[f64], reports: &[PressureReport]) -> f64 {
    let err: Vec<f64> = reports.iter().map(|r| r.defect.mean).collect();
    fit_order(dts, &err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galerkin::{run_path, GalerkinState, RecordOptions, SimConfig};
    use crate::rng::CounterWiener;

    #[test]
    fn theta_range() {
        assert!(PressureMode::Theta(0.2).validate(1.6).is_err());
        assert!(PressureMode::Theta(0.11).validate(5.0 / 3.0).is_ok());
        assert!(PressureMode::Theta(0.0).validate(5.0 / 3.0).is_err());
        assert!(PressureMode::Tk(-1.0).validate(5.0 / 3.0).is_err());
    }

    #[test]
    fn constant_state_is_balanced() {
        let model = GalerkinModel::new(SimConfig { m: 8, cutoff: 1, noise_c0: 0.0, t_end: 0.02, dt: 5e-3, ..SimConfig::default() })
            .unwrap();
        let rho = ScalarField::constant(model.grid(), 1.0);
        let u = vec![0.0; model.basis().len()];
        let rec = run_path(&model, GalerkinState::new(rho, u), &CounterWiener { seed: 0, k: 8 }, 0, RecordOptions::full());
        for mode in [PressureMode::FullDensity, PressureMode::Tk(2.0), PressureMode::Theta(0.1)] {
            let p = pressure_path(&model, &rec, mode).unwrap();
            assert!(p.terms.total().abs() < 1e-14 && p.defect.abs() < 1e-14, "{mode:?} {p:?}");
            assert!((p.terms.pressure + p.terms.mean_correction).abs() < 1e-14);
        }
        let full = pressure_path(&model, &rec, PressureMode::FullDensity).unwrap();
        let expected = 0.02 * (model.config().a + model.config().delta);
        assert!((full.integral - expected).abs() < 1e-12);
    }

    #[test]
    fn report_needs_two_paths() {
        assert!(matches!(
            PressureReport::from_paths(PressureMode::FullDensity, vec![PathPressure::default()]),
            Err(Error::InsufficientSample { .. })
        ));
    }
}
