//! Energy `E = ∫ ½ρ|u|² + a/(γ−1) ρ^γ + δ/(β−1) ρ^β` and dissipation rate
//! `D = ∫ ν|∇u|² + (λ+ν)|div u|² + ε ∫ (aγρ^{γ−2} + δβρ^{β−2}) |∇ρ|²`.

use crate::error::{Error, Result};
use crate::galerkin::{GalerkinModel, GalerkinState, PathRecord, SimConfig};
use crate::stats::{mean, variance, Estimate};
use crate::spectral::{ops, ScalarField, VectorField};

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct EnergyParts {
    pub kinetic: f64,
    pub pressure: f64,
    pub artificial: f64,
}

impl EnergyParts {
    pub fn total(&self) -> f64 {
        self.kinetic + self.pressure + self.artificial
    }
}

pub fn energy_parts_fields(rho: &ScalarField, u: &VectorField, cfg: &SimConfig) -> EnergyParts {
    let kinetic = 0.5 * rho.inner(&u.norm_sq_field());
    let pressure = if cfg.a == 0.0 {
        0.0
    } else {
        cfg.a / (cfg.gamma - 1.0) * rho.map(|r| r.max(0.0).powf(cfg.gamma)).mean()
    };
    let artificial = if cfg.delta == 0.0 {
        0.0
    } else {
        cfg.delta / (cfg.beta - 1.0) * rho.map(|r| r.max(0.0).powf(cfg.beta)).mean()
    };
    EnergyParts { kinetic, pressure, artificial }
}

pub fn energy_parts(model: &GalerkinModel, state: &GalerkinState) -> EnergyParts {
    energy_parts_fields(&state.rho, &model.velocity(&state.u), model.config())
}

pub fn energy(model: &GalerkinModel, state: &GalerkinState) -> f64 {
    energy_parts(model, state).total()
}

/// Dissipation rate with `u` given as Galerkin coefficients.
pub fn dissipation(model: &GalerkinModel, state: &GalerkinState) -> f64 {
    let cfg = model.config();
    let basis = model.basis();
    let s = basis.scalar_len();
    let d = cfg.dim;
    let mut grad_sq = 0.0;
    let mut div_coeffs = vec![0.0; s];
    for a in 0..d {
        let ua = &state.u[a * s..(a + 1) * s];
        for j in 0..d {
            let dj = basis.derivative_coeffs(ua, j);
            grad_sq += dj.iter().map(|c| c * c).sum::<f64>();
            if j == a {
                div_coeffs.iter_mut().zip(&dj).for_each(|(x, y)| *x += y);
            }
        }
    }
    let div_sq: f64 = div_coeffs.iter().map(|c| c * c).sum();
    let mut out = cfg.nu * grad_sq + (cfg.lambda + cfg.nu) * div_sq;
    if cfg.epsilon > 0.0 {
        let g = ops::grad(&state.rho);
        let weight = state.rho.map(|r| {
            let r = r.max(0.0);
            cfg.a * cfg.gamma * r.powf(cfg.gamma - 2.0) + cfg.delta * cfg.beta * r.powf(cfg.beta - 2.0)
        });
        out += cfg.epsilon * weight.inner(&g.norm_sq_field());
    }
    out
}

/// Per-path energy summary taken from the recorded series.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct PathEnergy {
    pub initial: f64,
    pub sup: f64,
    pub dissipated: f64,
    /// Largest `(E(t_n) + ∫_0^{t_n} D) / E(0) − 1` along the path.
    pub worst_excess: f64,
}

pub fn path_energy(rec: &PathRecord) -> PathEnergy {
    let initial = rec.series.first().map_or(0.0, |r| r.energy);
    let mut out = PathEnergy { initial, sup: initial, dissipated: 0.0, worst_excess: f64::NEG_INFINITY };
    for w in rec.series.windows(2) {
        out.dissipated += (w[1].t - w[0].t) * w[1].dissipation;
        out.sup = out.sup.max(w[1].energy);
        out.worst_excess = out.worst_excess.max((w[1].energy + out.dissipated) / initial - 1.0);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct MomentReport {
    pub p: u32,
    /// `Ê[(sup_t E)^p]`.
    pub sup_energy: Estimate,
    /// `Ê[(∫D)^p]`.
    pub dissipation: Estimate,
    /// `Ê[(E(0) + 1)^p]`.
    pub initial: Estimate,
    /// `Ĉ = Ê[(sup E + ∫D)^p] / Ê[(E(0) + 1)^p]` with a ratio-estimator standard error.
    pub ratio: Estimate,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct EnergyReport {
    pub paths: Vec<PathEnergy>,
    pub moments: Vec<MomentReport>,
    /// Worst pathwise excess; with zero noise the inequality asks for `≤ 1e-6`.
    pub worst_excess: f64,
}

impl EnergyReport {
    pub fn deterministic_inequality_holds(&self, tol: f64) -> bool {
        self.worst_excess <= tol
    }
}

fn ratio_estimate(x: &[f64], y: &[f64]) -> Estimate {
    let n = x.len() as f64;
    let (mx, my) = (mean(x), mean(y));
    let r = mx / my;
    let resid: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - r * b).collect();
    let se = (variance(&resid) / n).sqrt() / my.abs();
    Estimate { mean: r, se, ci_low: r - 1.96 * se, ci_high: r + 1.96 * se, n: x.len() }
}

pub fn energy_mc_report(ensemble: &[PathRecord]) -> Result<EnergyReport> {
    let paths: Vec<PathEnergy> = ensemble.iter().map(path_energy).collect();
    energy_report_from_paths(paths)
}

pub fn energy_report_from_paths(paths: Vec<PathEnergy>) -> Result<EnergyReport> {
    if paths.len() < 2 {
        return Err(Error::InsufficientSample { needed: 2, got: paths.len() });
    }
    let moments = [1u32, 2]
        .into_iter()
        .map(|p| {
            let pw = |f: &dyn Fn(&PathEnergy) -> f64| paths.iter().map(|e| f(e).powi(p as i32)).collect::<Vec<f64>>();
            let top = pw(&|e| e.sup + e.dissipated);
            let bottom = pw(&|e| e.initial + 1.0);
            MomentReport {
                p,
                sup_energy: Estimate::from_samples(&pw(&|e| e.sup)),
                dissipation: Estimate::from_samples(&pw(&|e| e.dissipated)),
                initial: Estimate::from_samples(&bottom),
                ratio: ratio_estimate(&top, &bottom),
            }
        })
        .collect();
    let worst_excess = paths.iter().fold(f64::NEG_INFINITY, |m, e| m.max(e.worst_excess));
    Ok(EnergyReport { paths, moments, worst_excess })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galerkin::{run_path, RecordOptions};
    use crate::harness::InitialSampler;
    use crate::rng::CounterWiener;

    #[test]
    fn constant_state_energy() {
        let cfg = SimConfig { delta: 0.0, ..SimConfig::default() };
        let grid = crate::spectral::TorusGrid::new(2, 8).unwrap();
        let e = energy_parts_fields(&ScalarField::constant(grid, 1.0), &VectorField::zeros(grid), &cfg);
        assert!((e.total() - 1.5).abs() < 1e-14);
        let e = energy_parts_fields(&ScalarField::constant(grid, 1e-9), &VectorField::zeros(grid), &cfg);
        assert!(e.total() < 1e-13);
    }

    #[test]
    fn deterministic_report() {
        let cfg = SimConfig { m: 8, cutoff: 1, noise_c0: 0.0, t_end: 0.05, dt: 5e-3, ..SimConfig::default() };
        let model = GalerkinModel::new(cfg).unwrap();
        let w = CounterWiener { seed: 0, k: 8 };
        let recs: Vec<_> = (0..3)
            .map(|p| {
                let (rho, u) = InitialSampler::default().sample(&model, 5, p);
                run_path(&model, GalerkinState::new(rho, u), &w, p, RecordOptions::summary())
            })
            .collect();
        let r = energy_mc_report(&recs).unwrap();
        assert!(r.deterministic_inequality_holds(1e-6));
        assert!(r.paths.iter().all(|p| p.sup <= p.initial * (1.0 + 1e-6)));
        assert_eq!(r.moments.len(), 2);
        assert!(r.moments[0].ratio.mean.is_finite());
        assert!(matches!(energy_mc_report(&recs[..1]), Err(Error::InsufficientSample { .. })));
    }
}
