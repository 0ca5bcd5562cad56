//! Quick invariant suite behind `scns selftest`: a reduced version of the
//! acceptance checks that runs in a few seconds.

use serde::Serialize;

use crate::basis::GalerkinBasis;
use crate::diagnostics::energy::energy_mc_report;
use crate::diagnostics::ito::ito_energy_residual;
use crate::error::Result;
use crate::galerkin::{GalerkinModel, RecordOptions, SimConfig};
use crate::harness::ensemble::run_ensemble;
use crate::harness::oracle::{random_density, random_field, run_oracle};
use crate::harness::sampler::InitialSampler;
use crate::mass::assemble_m;
use crate::spectral::{ops, ScalarField, Spectrum, TorusGrid, VectorField};
use crate::transport::{advance_density, TransportConfig, TransportScheme};

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
}

fn check(name: &str, value: f64, tolerance: f64) -> Check {
    Check { name: name.into(), passed: value.is_finite() && value <= tolerance, value, tolerance }
}

fn operators() -> Result<Vec<Check>> {
    let (mut parseval, mut riesz, mut divgrad) = (0.0f64, 0.0f64, 0.0f64);
    for d in [1, 2] {
        let g = TorusGrid::new(d, 16)?;
        for seed in 0..10 {
            let f = random_field(g, seed);
            let s = Spectrum::from_field(&f);
            let energy: f64 = s.coeffs().iter().map(|c| c.norm_sqr()).sum();
            parseval = parseval.max((energy - f.inner(&f)).abs());
            let trace = (0..d).fold(ScalarField::zeros(g), |acc, i| acc.add(&ops::riesz(i, i, &f)));
            let centred = f.map(|v| v - f.mean());
            riesz = riesz.max(trace.sub(&centred).sup_norm());
            let back = ops::div(&ops::inv_laplacian_grad(&f));
            divgrad = divgrad.max(back.sub(&ops::strip_nyquist(&centred)).sup_norm());
        }
    }
    Ok(vec![
        check("parseval", parseval, 1e-10),
        check("riesz trace", riesz, 1e-10),
        check("div inv_laplacian grad", divgrad, 1e-10),
    ])
}

fn mass_operator() -> Result<Vec<Check>> {
    let basis = GalerkinBasis::new(TorusGrid::new(2, 16)?, 2)?;
    let g = basis.grid();
    let one = assemble_m(&ScalarField::constant(g, 1.0), &basis)?;
    let id = nalgebra::DMatrix::<f64>::identity(basis.len(), basis.len());
    let rho = random_density(g, 4, 0.5);
    let m = assemble_m(&rho, &basis)?;
    let s = m.sqrt();
    let eig = m.eigenvalues();
    let outside = eig.iter().map(|&l| (rho.min() - l).max(l - rho.max()).max(0.0)).fold(0.0, f64::max);
    Ok(vec![
        check("M[1] = I", (one.to_dense() - id).amax(), 1e-12),
        check("sqrt recomposition", (&s * &s - m.to_dense()).amax(), 1e-10),
        check("eigenvalues within density range", outside, 1e-10),
        check("sqrt derivative vs differences", run_oracle("mass-derivative")?[1].1, 1e-4),
    ])
}

fn transport() -> Result<Vec<Check>> {
    let g = TorusGrid::new(2, 16)?;
    let heat = run_oracle("heat")?[1].1;
    let mut rho = random_density(g, 5, 0.5);
    let u = VectorField::from_fn(g, |a, x| {
        let tau = 2.0 * std::f64::consts::PI;
        if a == 0 { (tau * x[1]).sin() } else { 0.5 * (tau * x[0]).cos() }
    });
    let cfg = TransportConfig::new(0.05, 1e-3, TransportScheme::ExponentialDiffusion)?;
    let mut drift = 0.0f64;
    for _ in 0..100 {
        let next = advance_density(&rho, &u, &cfg)?;
        drift = drift.max((next.mean() - rho.mean()).abs());
        rho = next;
    }
    Ok(vec![check("heat kernel exactness", heat, 1e-10), check("mass conservation per step", drift, 1e-12)])
}

fn integrator() -> Result<Vec<Check>> {
    let base = SimConfig { m: 8, cutoff: 1, t_end: 0.05, dt: 2e-3, ..SimConfig::default() };
    let quiet = GalerkinModel::new(SimConfig { noise_c0: 0.0, ..base.clone() })?;
    let recs = run_ensemble(&quiet, &InitialSampler::default(), 1, 4, 1, RecordOptions::summary(), |r| r)?;
    let excess = energy_mc_report(&recs)?.worst_excess;
    let noisy = GalerkinModel::new(base)?;
    let recs = run_ensemble(&noisy, &InitialSampler::default(), 1, 2, 1, RecordOptions::full(), |r| {
        ito_energy_residual(&noisy, &r).map(|x| x.cancel_j4_j10.max(x.cancel_j5_j9))
    })?;
    let cancel = recs.into_iter().collect::<Result<Vec<_>>>()?.into_iter().fold(0.0, f64::max);
    Ok(vec![
        check("deterministic energy inequality excess", excess, 1e-6),
        check("J4+J10, J5+J9 cancellation", cancel, 1e-9),
    ])
}

pub fn selftest() -> Result<Vec<Check>> {
    let mut out = operators()?;
    out.extend(mass_operator()?);
    out.extend(transport()?);
    out.extend(integrator()?);
    out.push(check("fft vs direct DFT", run_oracle("dft")?[2].1, 1e-12));
    Ok(out)
}

#[cfg(test)]
mod tests {
    #[test]
    fn selftest_passes() {
        let checks = super::selftest().unwrap();
        for c in &checks {
            assert!(c.passed, "{c:?}");
        }
    }
}
