//! Brute-force reference computations, independent of the fast paths they check.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use crate::basis::GalerkinBasis;
use crate::diagnostics::energy::energy_parts_fields;
use crate::error::{Error, Result};
use crate::galerkin::{theta, SimConfig};
use crate::mass::{assemble_m, sqrt_derivative};
use crate::rng::{keyed_rng, standard_normals};
use crate::spectral::{ops, ScalarField, Spectrum, TorusGrid, VectorField};

/// `f̂_k = m^{-d} Σ_x f(x) e^{−2πik·x}` by direct summation, in grid order.
pub fn direct_dft(f: &ScalarField) -> Vec<Complex64> {
    let g = f.grid();
    let n = g.len();
    let scale = 1.0 / n as f64;
    (0..n)
        .map(|kf| {
            let k = g.mode(kf).k;
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, &v) in f.values().iter().enumerate() {
                let x = g.coords(i);
                let phase = -2.0 * PI * (0..3).map(|a| k[a] as f64 * x[a]).sum::<f64>();
                acc += Complex64::from_polar(v, phase);
            }
            acc * scale
        })
        .collect()
}

/// Smooth random field: a few random low modes plus a constant.
pub fn random_field(grid: TorusGrid, seed: u64) -> ScalarField {
    let mut rng = keyed_rng(&[0x0ac1e, seed]);
    let z = standard_normals(&mut rng, 12);
    ScalarField::from_fn(grid, |x| {
        let mut v = z[0];
        for j in 0..3 {
            let arg = 2.0 * PI * ((j + 1) as f64 * x[0] + j as f64 * x[1] + x[2]);
            v += z[1 + 2 * j] * arg.cos() / (1 + j) as f64 + z[2 + 2 * j] * arg.sin() / (1 + j) as f64;
        }
        v + 0.1 * z[7] * (2.0 * PI * 3.0 * x[1]).cos()
    })
}

/// Positive field with values in roughly `[lo, lo + 1]`.
pub fn random_density(grid: TorusGrid, seed: u64, lo: f64) -> ScalarField {
    let f = random_field(grid, seed);
    let (a, b) = (f.min(), f.max());
    f.map(|v| lo + (v - a) / (b - a).max(1e-12))
}

pub const ORACLE_CASES: &[&str] =
    &["dft", "heat", "mass-derivative", "energy-quadrature", "mollified-bounds", "theta-bound", "truncation-lipschitz"];

/// Named reference values for one case.
pub fn run_oracle(case: &str) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    match case {
        "dft" => {
            let f = random_field(TorusGrid::new(2, 16)?, 1);
            let fast = Spectrum::from_field(&f);
            let slow = direct_dft(&f);
            let err = fast.coeffs().iter().zip(&slow).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            out.push(("coeff(1,0).re".into(), slow[f.grid().index_of([1, 0, 0])].re));
            out.push(("coeff(1,0).im".into(), slow[f.grid().index_of([1, 0, 0])].im));
            out.push(("max |fft - direct|".into(), err));
        }
        "heat" => {
            let g = TorusGrid::new(1, 32)?;
            let f = ScalarField::from_fn(g, |x| (2.0 * PI * x[0]).cos());
            let t = 0.01;
            let exact = (-4.0 * PI * PI * t).exp();
            let h = ops::heat(&f, t);
            out.push(("exp(-4 pi^2 t), t=0.01".into(), exact));
            out.push(("max |heat - exact|".into(), h.sub(&f.scaled(exact)).sup_norm()));
        }
        "mass-derivative" => {
            let basis = GalerkinBasis::new(TorusGrid::new(2, 16)?, 1)?;
            let g = basis.grid();
            let rho = random_density(g, 2, 0.5);
            let v = random_field(g, 3);
            let m = assemble_m(&rho, &basis)?;
            let exact = sqrt_derivative(&m, &v, &basis)?;
            let h = 1e-5;
            let plus = assemble_m(&rho.add(&v.scaled(h)), &basis)?.sqrt();
            let minus = assemble_m(&rho.add(&v.scaled(-h)), &basis)?.sqrt();
            let fd = (plus - minus) / (2.0 * h);
            out.push(("|D sqrt M| (Frobenius)".into(), exact.norm()));
            out.push(("relative gap to central differences".into(), (exact - &fd).norm() / fd.norm()));
        }
        "energy-quadrature" => {
            let cfg = SimConfig { delta: 0.01, ..SimConfig::default() };
            let e = |m: usize| -> Result<f64> {
                let g = TorusGrid::new(2, m)?;
                let rho = ScalarField::from_fn(g, |x| 1.0 + 0.3 * (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).cos());
                let u = VectorField::from_fn(g, |a, x| if a == 0 { (2.0 * PI * x[1]).sin() } else { 0.5 });
                Ok(energy_parts_fields(&rho, &u, &cfg).total())
            };
            let (coarse, fine) = (e(16)?, e(64)?);
            out.push(("energy at m=64".into(), fine));
            out.push(("relative gap m=16 vs m=64".into(), (coarse - fine).abs() / fine));
        }
        "mollified-bounds" => {
            let (delta, beta) = (0.01f64, 5.0f64);
            out.push(("lower = delta".into(), delta));
            out.push(("upper = delta^(-1/(2 beta))".into(), delta.powf(-1.0 / (2.0 * beta))));
        }
        "theta-bound" => {
            for gamma in [1.6, 5.0 / 3.0] {
                out.push((format!("2 gamma / 3 - 1 at gamma = {gamma:.6}"), 2.0 * gamma / 3.0 - 1.0));
            }
        }
        "truncation-lipschitz" => {
            let r = 1.0;
            let h = 1e-6;
            let lip = (0..=300_000)
                .map(|i| {
                    let z = 0.9 + 1.2 * i as f64 / 300_000.0;
                    ((theta(z + h, r) * (z + h) - theta(z - h, r) * (z - h)) / (2.0 * h)).abs()
                })
                .fold(0.0, f64::max);
            out.push(("sup |d/dz (theta_R(z) z)|".into(), lip));
        }
        other => {
            return Err(Error::Config(format!("unknown oracle case {other:?}; known: {}", ORACLE_CASES.join(", "))));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_case_runs() {
        for case in ORACLE_CASES {
            let v = run_oracle(case).unwrap();
            assert!(!v.is_empty() && v.iter().all(|(_, x)| x.is_finite()), "{case}");
        }
        assert!(run_oracle("nope").is_err());
    }

    #[test]
    fn fast_paths_agree_with_oracles() {
        assert!(run_oracle("dft").unwrap()[2].1 < 1e-12);
        assert!(run_oracle("heat").unwrap()[1].1 < 1e-12);
        assert!(run_oracle("mass-derivative").unwrap()[1].1 < 1e-4);
        assert!(run_oracle("energy-quadrature").unwrap()[1].1 < 1e-8);
        let lip = run_oracle("truncation-lipschitz").unwrap()[0].1;
        assert!(lip <= crate::galerkin::TRUNCATION_LIPSCHITZ && lip > 2.7, "{lip}");
        let up = run_oracle("mollified-bounds").unwrap()[1].1;
        assert!((up - 1.584_893).abs() < 1e-6);
    }
}
