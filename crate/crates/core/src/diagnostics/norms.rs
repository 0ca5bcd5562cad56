//! Discrete Hölder quotients of the momentum and its decomposition into the
//! stochastic integral `Z` (carried in the state) and the remainder `Y`.

use serde::Serialize;

use crate::error::Result;
use crate::galerkin::{GalerkinModel, PathRecord};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PathNorms {
    pub theta: f64,
    pub order: f64,
    pub holder_momentum: f64,
    pub holder_y: f64,
    pub holder_z: f64,
    /// `sup_t ‖ρu‖_{L^{2γ/(γ+1)}}`.
    pub sup_momentum_lp: f64,
}

/// Quotients `sup_{s≠t} ‖X_t − X_s‖_{W^{−order,2}} / |t − s|^θ` over the stored samples.
pub fn path_space_norms(model: &GalerkinModel, rec: &PathRecord, theta: f64, order: f64) -> Result<PathNorms> {
    let basis = model.basis();
    let s_len = basis.scalar_len();
    let weights: Vec<f64> =
        (0..basis.len()).map(|n| (1.0 + basis.eigenvalue(n % s_len)).powf(-order)).collect();
    let gamma = model.config().gamma;
    let p = 2.0 * gamma / (gamma + 1.0);

    let mut full = Vec::with_capacity(rec.states.len());
    let mut sup_lp = 0.0f64;
    for s in &rec.states {
        full.push(model.mass(&s.rho)?.apply(&s.u));
        let q = model.momentum_field(&s.rho, &s.u);
        sup_lp = sup_lp.max(q.norm_sq_field().map(|v| v.sqrt()).lp_norm(p));
    }
    let zs: Vec<&[f64]> = rec.states.iter().map(|s| s.z.as_slice()).collect();
    let norm = |a: &[f64], b: &[f64]| a.iter().zip(b).zip(&weights).map(|((x, y), w)| w * (x - y) * (x - y)).sum::<f64>().sqrt();

    let (mut hq, mut hy, mut hz) = (0.0f64, 0.0f64, 0.0f64);
    let times: Vec<f64> = rec.states.iter().map(|s| s.t).collect();
    for i in 0..times.len() {
        for j in i + 1..times.len() {
            let gap = (times[j] - times[i]).powf(theta);
            if gap <= 0.0 {
                continue;
            }
            let dq = norm(&full[j], &full[i]);
            let dz = norm(zs[j], zs[i]);
            let dy: Vec<f64> = (0..weights.len()).map(|n| (full[j][n] - zs[j][n]) - (full[i][n] - zs[i][n])).collect();
            let zero = vec![0.0; weights.len()];
            hq = hq.max(dq / gap);
            hz = hz.max(dz / gap);
            hy = hy.max(norm(&dy, &zero) / gap);
        }
    }
    Ok(PathNorms { theta, order, holder_momentum: hq, holder_y: hy, holder_z: hz, sup_momentum_lp: sup_lp })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galerkin::{run_path, GalerkinState, RecordOptions, SimConfig};
    use crate::rng::CounterWiener;
    use crate::spectral::ScalarField;

    #[test]
    fn resting_path_has_zero_quotients() {
        let model = GalerkinModel::new(SimConfig { m: 8, cutoff: 1, noise_c0: 0.0, t_end: 0.02, dt: 5e-3, ..SimConfig::default() })
            .unwrap();
        let rho = ScalarField::constant(model.grid(), 1.0);
        let rec = run_path(&model, GalerkinState::new(rho, vec![0.0; model.basis().len()]), &CounterWiener { seed: 0, k: 8 }, 0, RecordOptions::full());
        let n = path_space_norms(&model, &rec, 0.5, 1.0).unwrap();
        assert_eq!((n.holder_momentum, n.holder_y, n.holder_z, n.sup_momentum_lp), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn noise_shows_up_in_z() {
        let model = GalerkinModel::new(SimConfig { m: 8, cutoff: 1, noise_c0: 0.5, t_end: 0.02, dt: 5e-3, ..SimConfig::default() })
            .unwrap();
        let rho = ScalarField::constant(model.grid(), 1.0);
        let rec = run_path(&model, GalerkinState::new(rho, vec![0.0; model.basis().len()]), &CounterWiener { seed: 4, k: 8 }, 0, RecordOptions::full());
        let n = path_space_norms(&model, &rec, 0.25, 1.0).unwrap();
        assert!(n.holder_z > 0.0 && n.holder_momentum > 0.0);
    }
}
