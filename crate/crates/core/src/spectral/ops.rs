//! Fourier-multiplier operators on grid fields.
//!
//! Odd symbols (first derivatives, off-diagonal Riesz entries) are set to zero
//! at the Nyquist index of the affected axis, so real fields stay real.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use super::field::{ScalarField, Spectrum, VectorField};
use super::grid::TorusGrid;
use crate::error::{Error, Result};

const TWO_PI: f64 = 2.0 * PI;

/// Wavevector of a flat FFT index and per-axis Nyquist flags.
fn wave(grid: &TorusGrid, flat: usize) -> ([f64; 3], [bool; 3]) {
    let idx = grid.unravel(flat);
    let mut k = [0.0; 3];
    let mut nyq = [false; 3];
    for axis in 0..grid.dim() {
        k[axis] = grid.wavenumber(idx[axis]) as f64;
        nyq[axis] = grid.is_nyquist(idx[axis]);
    }
    (k, nyq)
}

fn norm_sq(k: &[f64; 3]) -> f64 {
    k[0] * k[0] + k[1] * k[1] + k[2] * k[2]
}

/// Multiplies every coefficient by `symbol(k, nyquist_flags)`.
pub fn apply_symbol(
    spec: &Spectrum,
    symbol: impl Fn([f64; 3], [bool; 3]) -> Complex64,
) -> Spectrum {
    let grid = spec.grid();
    let mut out = spec.clone();
    for (flat, c) in out.coeffs_mut().iter_mut().enumerate() {
        let (k, nyq) = wave(&grid, flat);
        *c *= symbol(k, nyq);
    }
    out
}

fn apply_real_symbol(f: &ScalarField, symbol: impl Fn([f64; 3], [bool; 3]) -> f64) -> ScalarField {
    apply_symbol(&f.to_spectral(), |k, n| Complex64::new(symbol(k, n), 0.0)).to_field()
}

pub fn to_spectral(f: &ScalarField) -> Spectrum {
    f.to_spectral()
}

pub fn from_spectral(s: &Spectrum) -> ScalarField {
    s.to_field()
}

/// Sharp truncation to `|k|_∞ ≤ cutoff`.
pub fn project_trig(f: &ScalarField, cutoff: usize) -> Result<ScalarField> {
    let m = f.grid().points_per_axis();
    if cutoff >= m / 2 {
        return Err(Error::Aliasing { cutoff, m });
    }
    let c = cutoff as f64;
    Ok(apply_real_symbol(f, |k, _| {
        if k.iter().all(|v| v.abs() <= c) {
            1.0
        } else {
            0.0
        }
    }))
}

/// Spectral derivative along `axis` of a precomputed spectrum.
pub fn derivative_spectrum(spec: &Spectrum, axis: usize) -> Spectrum {
    apply_symbol(spec, |k, nyq| {
        if nyq[axis] {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, TWO_PI * k[axis])
        }
    })
}

pub fn partial(f: &ScalarField, axis: usize) -> ScalarField {
    derivative_spectrum(&f.to_spectral(), axis).to_field()
}

pub fn grad(f: &ScalarField) -> VectorField {
    let spec = f.to_spectral();
    let comps = (0..f.grid().dim()).map(|a| derivative_spectrum(&spec, a).to_field()).collect();
    VectorField::new(comps).expect("gradient components share the grid")
}

pub fn div(v: &VectorField) -> ScalarField {
    let grid = v.grid();
    let mut acc = Spectrum::zeros(grid);
    for (axis, comp) in v.components().iter().enumerate() {
        let d = derivative_spectrum(&comp.to_spectral(), axis);
        for (a, b) in acc.coeffs_mut().iter_mut().zip(d.coeffs()) {
            *a += b;
        }
    }
    let mut out = acc.to_field();
    // Pin the mean exactly; the k = 0 symbol is zero.
    let mean = out.mean();
    out.values_mut().iter_mut().for_each(|x| *x -= mean);
    out
}

pub fn laplacian(f: &ScalarField) -> ScalarField {
    let mut out = apply_real_symbol(f, |k, _| -4.0 * PI * PI * norm_sq(&k));
    let mean = out.mean();
    out.values_mut().iter_mut().for_each(|x| *x -= mean);
    out
}

/// `Δ⁻¹∇(f − mean f)`; component `j` has symbol `2πi k_j / (−4π²|k|²)`.
pub fn inv_laplacian_grad(f: &ScalarField) -> VectorField {
    let spec = f.to_spectral();
    let comps = (0..f.grid().dim())
        .map(|j| {
            apply_symbol(&spec, |k, nyq| {
                let k2 = norm_sq(&k);
                if k2 == 0.0 || nyq[j] {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, -k[j] / (TWO_PI * k2))
                }
            })
            .to_field()
        })
        .collect();
    VectorField::new(comps).expect("components share the grid")
}

/// Riesz operator `R_ij = ∂_j Δ⁻¹ ∂_i`, symbol `k_i k_j / |k|²` on the mean-free part.
pub fn riesz(i: usize, j: usize, f: &ScalarField) -> ScalarField {
    apply_real_symbol(f, |k, nyq| {
        let k2 = norm_sq(&k);
        if k2 == 0.0 || (i != j && (nyq[i] || nyq[j])) {
            0.0
        } else {
            k[i] * k[j] / k2
        }
    })
}

/// `(Σ_k (1 + 4π²|k|²)^s |f̂_k|²)^{1/2}`.
pub fn sobolev_norm(f: &ScalarField, s: f64) -> f64 {
    sobolev_norm_spectrum(&f.to_spectral(), s)
}

pub fn sobolev_norm_spectrum(spec: &Spectrum, s: f64) -> f64 {
    let grid = spec.grid();
    spec.coeffs()
        .iter()
        .enumerate()
        .map(|(flat, c)| {
            let (k, _) = wave(&grid, flat);
            (1.0 + 4.0 * PI * PI * norm_sq(&k)).powf(s) * c.norm_sqr()
        })
        .sum::<f64>()
        .sqrt()
}

/// Heat semigroup `e^{tΔ}`.
pub fn heat(f: &ScalarField, t: f64) -> ScalarField {
    apply_real_symbol(f, |k, _| (-4.0 * PI * PI * norm_sq(&k) * t).exp())
}

/// `(I − cΔ)⁻¹`.
pub fn helmholtz_solve(f: &ScalarField, c: f64) -> ScalarField {
    apply_real_symbol(f, |k, _| 1.0 / (1.0 + c * 4.0 * PI * PI * norm_sq(&k)))
}

/// Removes every coefficient carrying a Nyquist index on some axis.
pub fn strip_nyquist(f: &ScalarField) -> ScalarField {
    apply_real_symbol(f, |_, nyq| if nyq.iter().any(|&b| b) { 0.0 } else { 1.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid2(m: usize) -> TorusGrid {
        TorusGrid::new(2, m).unwrap()
    }

    fn cos_x0(g: TorusGrid) -> ScalarField {
        ScalarField::from_fn(g, |x| (TWO_PI * x[0]).cos())
    }

    #[test]
    fn constant_and_cosine_coefficients() {
        let g = grid2(8);
        let s = ScalarField::constant(g, 3.0).to_spectral();
        assert!((s.coeff([0, 0, 0]).re - 3.0).abs() < 1e-14);
        let s = cos_x0(g).to_spectral();
        assert!((s.coeff([1, 0, 0]).re - 0.5).abs() < 1e-14);
        assert!((s.coeff([-1, 0, 0]).re - 0.5).abs() < 1e-14);
        let total: f64 = s.coeffs().iter().map(|c| c.norm()).sum();
        assert!((total - 1.0).abs() < 1e-13);
    }

    #[test]
    fn projection_examples() {
        let g = grid2(16);
        let f = ScalarField::from_fn(g, |x| (TWO_PI * 3.0 * x[0]).cos());
        assert!(project_trig(&f, 2).unwrap().sup_norm() < 1e-14);
        assert!(matches!(project_trig(&f, 8), Err(Error::Aliasing { .. })));
        let c = ScalarField::constant(g, 2.5);
        assert!(project_trig(&c, 1).unwrap().sub(&c).sup_norm() < 1e-14);
    }

    #[test]
    fn inverse_laplacian_gradient_of_cosine() {
        let g = grid2(16);
        let v = inv_laplacian_grad(&cos_x0(g));
        let expect = ScalarField::from_fn(g, |x| (TWO_PI * x[0]).sin() / TWO_PI);
        assert!(v.component(0).sub(&expect).sup_norm() < 1e-14);
        assert!(v.component(1).sup_norm() < 1e-14);
        let zero = inv_laplacian_grad(&ScalarField::constant(g, 4.0));
        assert!(zero.sup_norm() < 1e-14);
    }

    #[test]
    fn riesz_and_sobolev_examples() {
        let g = grid2(16);
        let f = cos_x0(g);
        assert!(riesz(0, 0, &f).sub(&f).sup_norm() < 1e-13);
        assert!(riesz(0, 1, &f).sup_norm() < 1e-14);
        let expect = ((1.0 + 4.0 * PI * PI) / 2.0).sqrt();
        assert!((sobolev_norm(&f, 1.0) - expect).abs() < 1e-12);
        assert!((sobolev_norm(&ScalarField::constant(g, -2.0), 3.0) - 2.0).abs() < 1e-13);
    }

    #[test]
    fn gradient_of_cosine() {
        let g = grid2(16);
        let v = grad(&cos_x0(g));
        let expect = ScalarField::from_fn(g, |x| -TWO_PI * (TWO_PI * x[0]).sin());
        assert!(v.component(0).sub(&expect).sup_norm() < 1e-12);
        assert!(v.component(1).sup_norm() < 1e-12);
        let c = VectorField::from_fn(g, |a, _| 1.0 + a as f64);
        assert!(div(&c).sup_norm() < 1e-14);
    }

    #[test]
    fn heat_decays_single_mode() {
        let g = grid2(16);
        let f = cos_x0(g);
        let t = 0.01;
        let expect = f.scaled((-4.0 * PI * PI * t).exp());
        assert!(heat(&f, t).sub(&expect).sup_norm() < 1e-14);
    }
}
