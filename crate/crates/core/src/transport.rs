//! Regularized continuity equation `∂_t ρ + div(ρu) = εΔρ`.
//!
//! One step is explicit advection followed by a diffusion solve:
//! `ρ* = ρ − dt·div(ρu)`, then `ρ⁺ = e^{εdtΔ}ρ*` or `(I − εdtΔ)⁻¹ρ*`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::renorm::RenormFunction;
use crate::spectral::{ops, ScalarField, VectorField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransportScheme {
    ImplicitDiffusionExplicitAdvection,
    ExponentialDiffusion,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransportConfig {
    pub epsilon: f64,
    pub dt: f64,
    pub scheme: TransportScheme,
}

impl TransportConfig {
    pub fn new(epsilon: f64, dt: f64, scheme: TransportScheme) -> Result<Self> {
        if !(epsilon >= 0.0) {
            return Err(Error::Config(format!("epsilon must be >= 0, got {epsilon}")));
        }
        if !(dt > 0.0) {
            return Err(Error::Config(format!("dt must be > 0, got {dt}")));
        }
        Ok(Self { epsilon, dt, scheme })
    }
}

/// Pointwise bounds from the maximum principle at one time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityBounds {
    pub lower: f64,
    pub upper: f64,
    pub divu_integral: f64,
}

impl DensityBounds {
    pub fn contains(&self, rho: &ScalarField, slack: f64) -> bool {
        rho.min() >= self.lower - slack && rho.max() <= self.upper + slack
    }
}

fn diffuse(f: &ScalarField, cfg: &TransportConfig) -> ScalarField {
    if cfg.epsilon == 0.0 {
        return f.clone();
    }
    let mut out = match cfg.scheme {
        TransportScheme::ExponentialDiffusion => ops::heat(f, cfg.epsilon * cfg.dt),
        TransportScheme::ImplicitDiffusionExplicitAdvection => ops::helmholtz_solve(f, cfg.epsilon * cfg.dt),
    };
    // The k = 0 multiplier is exactly one; remove transform round-off in the mean.
    let shift = f.mean() - out.mean();
    out.values_mut().iter_mut().for_each(|v| *v += shift);
    out
}

/// Advances the density by one step of length `cfg.dt` with velocity `u`.
///
/// Fails with `StepRejected` if the result undershoots `-1e-8·max ρ`.
pub fn advance_density(rho: &ScalarField, u: &VectorField, cfg: &TransportConfig) -> Result<ScalarField> {
    let out = advance_density_unchecked(rho, u, cfg)?;
    let floor = -1e-8 * rho.max().abs();
    let min = out.min();
    if min < floor {
        return Err(Error::StepRejected(format!("density undershoot {min:e} below {floor:e}")));
    }
    Ok(out)
}

/// As [`advance_density`] without the negativity check.
pub fn advance_density_unchecked(rho: &ScalarField, u: &VectorField, cfg: &TransportConfig) -> Result<ScalarField> {
    let flux = u.scale_by(rho);
    let mut star = rho.clone();
    star.axpy(-cfg.dt, &ops::div(&flux));
    let shift = rho.mean() - star.mean();
    star.values_mut().iter_mut().for_each(|v| *v += shift);
    let out = diffuse(&star, cfg);
    if !out.is_finite() {
        return Err(Error::NumericalBlowup("density update produced a non-finite value".into()));
    }
    Ok(out)
}

/// Largest stable advective step `0.4·Δx/‖u‖_∞`.
pub fn cfl_limit(u: &VectorField) -> f64 {
    let s = u.sup_norm();
    if s == 0.0 {
        f64::INFINITY
    } else {
        0.4 * u.grid().spacing() / s
    }
}

/// Bounds `ρ̲ e^{−∫‖div u‖_∞}` and `ρ̄ e^{∫‖div u‖_∞}` at every sample time.
///
/// `series` holds `(t_n, ‖div u(t_n)‖_∞)`; the integral is the left-point sum,
/// matching the explicit advection step.
pub fn maximum_principle_bounds(
    rho0_min: f64,
    rho0_max: f64,
    series: &[(f64, f64)],
) -> Result<Vec<DensityBounds>> {
    if !(rho0_min > 0.0) {
        return Err(Error::Precondition(format!("initial density minimum must be > 0, got {rho0_min}")));
    }
    let mut out = Vec::with_capacity(series.len());
    let mut integral = 0.0;
    for (n, &(_, _)) in series.iter().enumerate() {
        if n > 0 {
            let (t0, s0) = series[n - 1];
            integral += (series[n].0 - t0) * s0;
        }
        out.push(DensityBounds {
            lower: rho0_min * (-integral).exp(),
            upper: rho0_max * integral.exp(),
            divu_integral: integral,
        });
    }
    Ok(out)
}

/// Weak-form residual of the renormalized continuity equation along a path of
/// `(t, ρ, u)` samples, tested against `ψ`:
///
/// `⟨b(ρ_T) − b(ρ_0), ψ⟩ − ∫⟨b(ρ)u, ∇ψ⟩ + ∫⟨(b'(ρ)ρ − b(ρ)) div u, ψ⟩ − ε∫⟨b'(ρ)Δρ, ψ⟩`,
/// with left-point time quadrature.
pub fn renormalized_residual(
    path: &[(f64, ScalarField, VectorField)],
    b: &RenormFunction,
    psi: &ScalarField,
    epsilon: f64,
) -> f64 {
    let (Some(first), Some(last)) = (path.first(), path.last()) else {
        return 0.0;
    };
    let grad_psi = ops::grad(psi);
    let mut r = b.apply(&last.1).inner(psi) - b.apply(&first.1).inner(psi);
    for w in path.windows(2) {
        let (t0, rho, u) = &w[0];
        let dt = w[1].0 - t0;
        let brho = b.apply(rho);
        let bp = b.apply_derivative(rho);
        let divu = ops::div(u);
        let transport = u.scale_by(&brho).inner(&grad_psi);
        let compress = bp.mul(rho).sub(&brho).mul(&divu).inner(psi);
        let mut step = -transport + compress;
        if epsilon > 0.0 {
            step -= epsilon * bp.mul(&ops::laplacian(rho)).inner(psi);
        }
        r += dt * step;
    }
    r
}

/// One-step defect of `d/dt‖ρ‖² + 2ε‖∇ρ‖² + ∫ div u ρ² = 0` at the left point.
pub fn density_l2_defect(before: &ScalarField, after: &ScalarField, u: &VectorField, cfg: &TransportConfig) -> f64 {
    let rate = (after.inner(after) - before.inner(before)) / cfg.dt;
    let grad = ops::grad(before);
    rate + 2.0 * cfg.epsilon * grad.inner(&grad) + ops::div(u).inner(&before.mul(before))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::TorusGrid;
    use std::f64::consts::PI;

    fn grid() -> TorusGrid {
        TorusGrid::new(2, 16).unwrap()
    }

    #[test]
    fn exponential_scheme_is_heat_kernel() {
        let g = grid();
        let rho = ScalarField::from_fn(g, |x| 1.0 + (2.0 * PI * x[0]).cos());
        let cfg = TransportConfig::new(0.1, 0.01, TransportScheme::ExponentialDiffusion).unwrap();
        let out = advance_density(&rho, &VectorField::zeros(g), &cfg).unwrap();
        let decay = (-4.0 * PI * PI * 0.1 * 0.01f64).exp();
        let expect = ScalarField::from_fn(g, |x| 1.0 + decay * (2.0 * PI * x[0]).cos());
        assert!(out.sub(&expect).sup_norm() < 1e-12);
    }

    #[test]
    fn still_fluid_without_diffusion_is_unchanged() {
        let g = grid();
        let rho = ScalarField::from_fn(g, |x| 1.0 + 0.3 * (2.0 * PI * x[1]).sin());
        let cfg = TransportConfig::new(0.0, 0.01, TransportScheme::ImplicitDiffusionExplicitAdvection).unwrap();
        let out = advance_density(&rho, &VectorField::zeros(g), &cfg).unwrap();
        assert!(out.sub(&rho).sup_norm() < 1e-15);
    }

    #[test]
    fn bounds_examples() {
        assert!(maximum_principle_bounds(0.0, 1.0, &[(0.0, 0.0)]).is_err());
        let series: Vec<(f64, f64)> = (0..=10).map(|n| (n as f64 * 0.1, 0.0)).collect();
        let b = maximum_principle_bounds(0.5, 2.0, &series).unwrap();
        assert!(b.iter().all(|b| b.lower == 0.5 && b.upper == 2.0));
        let series: Vec<(f64, f64)> = (0..=10).map(|n| (n as f64 * 0.1, 3.0)).collect();
        let b = maximum_principle_bounds(0.5, 2.0, &series).unwrap();
        let last = b.last().unwrap();
        assert!((last.lower - 0.5 * (-3.0f64).exp()).abs() < 1e-12);
        assert!((last.upper - 2.0 * 3.0f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn identity_renormalization_is_mass_defect() {
        let g = grid();
        let rho = ScalarField::from_fn(g, |x| 1.0 + 0.3 * (2.0 * PI * x[0]).cos());
        let u = VectorField::from_fn(g, |a, x| 0.2 * (2.0 * PI * (x[0] + a as f64 * x[1])).sin());
        let cfg = TransportConfig::new(0.05, 1e-3, TransportScheme::ExponentialDiffusion).unwrap();
        let mut path = vec![(0.0, rho.clone(), u.clone())];
        let mut r = rho;
        for n in 1..=20 {
            r = advance_density(&r, &u, &cfg).unwrap();
            path.push((n as f64 * 1e-3, r.clone(), u.clone()));
        }
        let one = ScalarField::constant(g, 1.0);
        let res = renormalized_residual(&path, &RenormFunction::Identity, &one, 0.05);
        assert!(res.abs() < 1e-12, "{res}");
    }
}
