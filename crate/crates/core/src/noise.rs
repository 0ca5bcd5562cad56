//! Multiplicative noise coefficients `g_k(x, ρ, q)`, `k = 0..K`.
//!
//! Each direction pushes along axis `e_{k mod d}` with weight `c_k = c₀/(k+1)`.
//! Shape functions are single trig modes with unit sup norm.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::basis::GalerkinBasis;
use crate::error::{Error, Result};
use crate::mass::MassMatrix;
use crate::spectral::{ops, ScalarField, TorusGrid, VectorField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseFamily {
    /// `c_k (ρ f_k + q_a h_k) e_a`
    Affine,
    /// `c_k ρ^{(γ+1)/2} f_k e_a`
    Power,
    /// Even `k`: `c_k ρ f_k e_a`; odd `k`: `c_k q_a h_k e_a`.
    Split,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub family: NoiseFamily,
    pub k: usize,
    pub c0: f64,
    pub gamma: f64,
    pub dim: usize,
}

impl NoiseModel {
    pub fn new(family: NoiseFamily, k: usize, c0: f64, gamma: f64, dim: usize) -> Result<Self> {
        if !(c0 >= 0.0) || !c0.is_finite() {
            return Err(Error::Config(format!("noise amplitude c0 must be finite and >= 0, got {c0}")));
        }
        if !(1..=3).contains(&dim) {
            return Err(Error::Config(format!("noise dimension must be 1, 2 or 3, got {dim}")));
        }
        Ok(Self { family, k, c0, gamma, dim })
    }

    pub fn is_zero(&self) -> bool {
        self.k == 0 || self.c0 == 0.0
    }

    pub fn weight(&self, k: usize) -> f64 {
        self.c0 / (k + 1) as f64
    }

    pub fn weights_sq_sum(&self) -> f64 {
        (0..self.k).map(|k| self.weight(k).powi(2)).sum()
    }

    /// `Σ_{k>K} c_k²`, the contribution of the discarded directions.
    pub fn tail_bound(&self) -> f64 {
        let head: f64 = (1..=self.k).map(|j| 1.0 / (j * j) as f64).sum();
        self.c0 * self.c0 * (PI * PI / 6.0 - head).max(0.0)
    }

    pub fn direction(&self, k: usize) -> usize {
        k % self.dim
    }

    fn shape_params(&self, k: usize) -> (usize, f64, f64) {
        let axis = (k / self.dim + k) % self.dim;
        let freq = 1.0 + ((k / (self.dim * self.dim)) % 2) as f64;
        let phase = 0.3 * (k + 1) as f64;
        (axis, freq, phase)
    }

    pub fn shape_f(&self, k: usize, x: [f64; 3]) -> f64 {
        let (axis, freq, phase) = self.shape_params(k);
        (2.0 * PI * freq * x[axis] + phase).cos()
    }

    pub fn shape_h(&self, k: usize, x: [f64; 3]) -> f64 {
        let (axis, freq, phase) = self.shape_params(k);
        (2.0 * PI * freq * x[axis] + phase).sin()
    }

    /// Magnitude of `g_k` along its direction at one point.
    pub fn g_scalar(&self, k: usize, x: [f64; 3], rho: f64, q: [f64; 3]) -> f64 {
        let c = self.weight(k);
        let a = self.direction(k);
        match self.family {
            NoiseFamily::Affine => c * (rho * self.shape_f(k, x) + q[a] * self.shape_h(k, x)),
            NoiseFamily::Power => c * rho.max(0.0).powf(0.5 * (self.gamma + 1.0)) * self.shape_f(k, x),
            NoiseFamily::Split => {
                if k % 2 == 0 {
                    c * rho * self.shape_f(k, x)
                } else {
                    c * q[a] * self.shape_h(k, x)
                }
            }
        }
    }

    pub fn g_point(&self, k: usize, x: [f64; 3], rho: f64, q: [f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        out[self.direction(k)] = self.g_scalar(k, x, rho, q);
        out
    }

    /// `|∇_{(ρ,q)} g_k|²` at one point.
    pub fn grad_sq_point(&self, k: usize, x: [f64; 3], rho: f64) -> f64 {
        let c = self.weight(k);
        let f = self.shape_f(k, x);
        let h = self.shape_h(k, x);
        match self.family {
            NoiseFamily::Affine => c * c * (f * f + h * h),
            NoiseFamily::Power => {
                let e = 0.5 * (self.gamma + 1.0);
                let d = c * e * rho.max(0.0).powf(e - 1.0) * f;
                d * d
            }
            NoiseFamily::Split => {
                if k % 2 == 0 {
                    c * c * f * f
                } else {
                    c * c * h * h
                }
            }
        }
    }

    /// Constant in `Σ_k |g_k|² ≤ C₁ (ρ² + ρ^{γ+1} + |q|²)`.
    pub fn c1(&self) -> f64 {
        let s = self.weights_sq_sum();
        match self.family {
            NoiseFamily::Affine => 2.0 * s,
            NoiseFamily::Power | NoiseFamily::Split => s,
        }
    }

    /// Constant in `Σ_k |∇_{(ρ,q)} g_k|² ≤ C₂ (1 + ρ^{γ−1})`.
    pub fn c2(&self) -> f64 {
        let s = self.weights_sq_sum();
        match self.family {
            NoiseFamily::Affine => 2.0 * s,
            NoiseFamily::Power => (0.5 * (self.gamma + 1.0)).powi(2) * s,
            NoiseFamily::Split => s,
        }
    }

    /// `(Σ_k |g_k|², C₁(...), Σ_k |∇g_k|², C₂(...))` at one point.
    pub fn growth_audit(&self, x: [f64; 3], rho: f64, q: [f64; 3]) -> [f64; 4] {
        let g2: f64 = (0..self.k).map(|k| self.g_scalar(k, x, rho, q).powi(2)).sum();
        let d2: f64 = (0..self.k).map(|k| self.grad_sq_point(k, x, rho)).sum();
        let q2 = q.iter().map(|v| v * v).sum::<f64>();
        [
            g2,
            self.c1() * (rho * rho + rho.powf(self.gamma + 1.0) + q2),
            d2,
            self.c2() * (1.0 + rho.powf(self.gamma - 1.0)),
        ]
    }

    /// Scalar amplitude field of `g_k(ρ, q)` along `e_{direction(k)}`.
    pub fn eval_g_component(&self, k: usize, rho: &ScalarField, q: &VectorField) -> ScalarField {
        let grid = rho.grid();
        let a = self.direction(k);
        let qa = q.component(a).values();
        let vals = (0..grid.len())
            .map(|i| {
                let mut qp = [0.0; 3];
                qp[a] = qa[i];
                self.g_scalar(k, grid.coords(i), rho.values()[i], qp)
            })
            .collect();
        ScalarField::new(grid, vals).unwrap_or_else(|_| ScalarField::constant(grid, f64::NAN))
    }

    pub fn eval_g(&self, k: usize, rho: &ScalarField, q: &VectorField) -> VectorField {
        let grid = rho.grid();
        let mut v = VectorField::zeros(grid);
        v.components_mut()[self.direction(k)] = self.eval_g_component(k, rho, q);
        v
    }
}

/// Galerkin coefficients of `g_k^N = M^{1/2}[ρ] P_N(g_k/√ρ)`, one column per direction.
pub fn assemble_phi_n(
    model: &NoiseModel,
    rho: &ScalarField,
    q: &VectorField,
    basis: &GalerkinBasis,
    mass: &MassMatrix,
    floor: f64,
) -> Result<DMatrix<f64>> {
    let n = basis.len();
    let mut out = DMatrix::zeros(n, model.k);
    if model.is_zero() {
        return Ok(out);
    }
    let min = rho.min();
    if min < floor {
        return Err(Error::PositivityLost { min, floor });
    }
    let s = basis.scalar_len();
    let inv_sqrt_rho = rho.map(|r| 1.0 / r.sqrt());
    for k in 0..model.k {
        let a = model.direction(k);
        let weighted = model.eval_g_component(k, rho, q).mul(&inv_sqrt_rho);
        let mut coeffs = vec![0.0; n];
        coeffs[a * s..(a + 1) * s].copy_from_slice(&basis.scalar_coeffs(&weighted));
        let col = mass.apply_sqrt(&coeffs);
        out.column_mut(k).copy_from_slice(&col);
    }
    Ok(out)
}

/// `Σ_{grid k} (1 + 4π²|k|²)^{−b}`: bounds `‖f‖²_{W^{−b,2}} ≤ C ‖f‖²_{L¹}`.
pub fn embedding_constant(grid: TorusGrid, b: f64) -> f64 {
    (0..grid.len())
        .map(|flat| (1.0 + 4.0 * PI * PI * grid.mode(flat).norm_sq() as f64).powf(-b))
        .sum()
}

/// Both sides of `Σ_k ‖g_k(ρ, ρv)‖²_{W^{−b,2}} ≤ C (ρ)_𝕋 ∫(ρ + ρ^γ + ρ|v|²)` with
/// `C = embedding_constant(b)·C₁`.
pub fn hs_norm_check(model: &NoiseModel, rho: &ScalarField, v: &VectorField, b: f64) -> (f64, f64) {
    let q = v.scale_by(rho);
    let lhs: f64 = (0..model.k)
        .map(|k| ops::sobolev_norm(&model.eval_g_component(k, rho, &q), -b).powi(2))
        .sum();
    let gamma = model.gamma;
    let integrand = rho
        .zip_map(&v.norm_sq_field(), |r, v2| r + r.max(0.0).powf(gamma) + r * v2)
        .mean();
    let rhs = embedding_constant(rho.grid(), b) * model.c1() * rho.mean() * integrand;
    (lhs, rhs)
}
