//! Density-weighted Gram operator `M[ρ]` on the Galerkin space.
//!
//! Vector modes along different axes are orthogonal under any scalar weight, so
//! `M[ρ]` is block diagonal with `d` copies of the scalar Gram block. All
//! functions of `M` are computed from one symmetric eigendecomposition of that
//! block.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::basis::GalerkinBasis;
use crate::error::{Error, Result};
use crate::spectral::ScalarField;

#[derive(Clone, Debug)]
pub struct MassMatrix {
    blocks: usize,
    block: DMatrix<f64>,
    eigvals: DVector<f64>,
    eigvecs: DMatrix<f64>,
    rho_min: f64,
    rho_max: f64,
    clamped: f64,
    sqrt_block: OnceLock<DMatrix<f64>>,
    inv_block: OnceLock<DMatrix<f64>>,
}

/// Assembles `M[ρ]`. Densities below `-1e-10·max(1, max ρ)` are rejected.
pub fn assemble_m(rho: &ScalarField, basis: &GalerkinBasis) -> Result<MassMatrix> {
    let rho_min = rho.min();
    let rho_max = rho.max();
    if rho_min < -1e-10 * rho_max.max(1.0) {
        return Err(Error::Precondition(format!("mass operator needs rho >= 0, min is {rho_min:e}")));
    }
    let s = basis.scalar_len();
    let block = DMatrix::from_row_slice(s, s, &basis.weighted_gram(rho));
    Ok(MassMatrix::from_block(block, basis.grid().dim(), rho_min, rho_max))
}

impl MassMatrix {
    /// Wraps an arbitrary symmetric block, repeated `blocks` times on the diagonal.
    pub fn from_block(block: DMatrix<f64>, blocks: usize, rho_min: f64, rho_max: f64) -> Self {
        let sym = (&block + block.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym.clone());
        let most_negative = eig.eigenvalues.iter().fold(0.0f64, |m, &l| m.min(l));
        let eigvals = eig.eigenvalues.map(|l| l.max(0.0));
        Self {
            blocks,
            block: sym,
            eigvals,
            eigvecs: eig.eigenvectors,
            rho_min,
            rho_max,
            clamped: -most_negative,
            sqrt_block: OnceLock::new(),
            inv_block: OnceLock::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.blocks * self.block.nrows()
    }

    pub fn block(&self) -> &DMatrix<f64> {
        &self.block
    }

    pub fn rho_min(&self) -> f64 {
        self.rho_min
    }

    pub fn rho_max(&self) -> f64 {
        self.rho_max
    }

    /// Magnitude of the most negative eigenvalue that was clamped to zero.
    pub fn clamp_magnitude(&self) -> f64 {
        self.clamped
    }

    /// Eigenvalues of the full operator (each block eigenvalue repeated per axis).
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = (0..self.blocks).flat_map(|_| self.eigvals.iter().copied()).collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    fn check_invertible(&self) -> Result<()> {
        if self.rho_min <= 0.0 || self.eigvals.iter().any(|&l| l <= 0.0) {
            return Err(Error::SingularMass { rho_min: self.rho_min });
        }
        Ok(())
    }

    fn spectral_block(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let d = DMatrix::from_diagonal(&self.eigvals.map(f));
        &self.eigvecs * d * self.eigvecs.transpose()
    }

    fn expand(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        let s = b.nrows();
        let mut out = DMatrix::zeros(self.dim(), self.dim());
        for k in 0..self.blocks {
            out.view_mut((k * s, k * s), (s, s)).copy_from(b);
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        self.expand(&self.block)
    }

    pub fn sqrt(&self) -> DMatrix<f64> {
        self.expand(&self.spectral_block(f64::sqrt))
    }

    pub fn inv(&self) -> Result<DMatrix<f64>> {
        self.check_invertible()?;
        Ok(self.expand(&self.spectral_block(|l| 1.0 / l)))
    }

    pub fn inv_sqrt(&self) -> Result<DMatrix<f64>> {
        self.check_invertible()?;
        Ok(self.expand(&self.spectral_block(|l| 1.0 / l.sqrt())))
    }

    fn apply_block(&self, b: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
        let s = b.nrows();
        v.chunks_exact(s)
            .flat_map(|c| (b * DVector::from_column_slice(c)).iter().copied().collect::<Vec<_>>())
            .collect()
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.apply_block(&self.block, v)
    }

    pub fn apply_sqrt(&self, v: &[f64]) -> Vec<f64> {
        let b = self.sqrt_block.get_or_init(|| self.spectral_block(f64::sqrt));
        self.apply_block(b, v)
    }

    pub fn solve(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_invertible()?;
        let b = self.inv_block.get_or_init(|| self.spectral_block(|l| 1.0 / l));
        Ok(self.apply_block(b, v))
    }

    /// Quadratic form `⟨M⁻¹a, b⟩`.
    pub fn inv_inner(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        Ok(self.solve(a)?.iter().zip(b).map(|(x, y)| x * y).sum())
    }

    pub fn operator_norm(&self) -> f64 {
        self.eigvals.iter().fold(0.0f64, |m, &l| m.max(l))
    }
}

/// Directional derivative of `ρ ↦ M^{1/2}[ρ]` along `v`.
///
/// Solves the Sylvester equation `S X + X S = M[v]` with `S = M^{1/2}[ρ]`
/// in the eigenbasis of `M[ρ]`.
pub fn sqrt_derivative(m: &MassMatrix, v: &ScalarField, basis: &GalerkinBasis) -> Result<DMatrix<f64>> {
    m.check_invertible()?;
    let s = basis.scalar_len();
    let mv = DMatrix::from_row_slice(s, s, &basis.weighted_gram(v));
    let q = &m.eigvecs;
    let mut vt = q.transpose() * mv * q;
    let roots = m.eigvals.map(f64::sqrt);
    for i in 0..s {
        for j in 0..s {
            vt[(i, j)] /= roots[i] + roots[j];
        }
    }
    Ok(m.expand(&(q * vt * q.transpose())))
}

/// `½ M^{-1/2}[ρ] M[v]`, which agrees with [`sqrt_derivative`] when `M[ρ]`
/// and `M[v]` commute (for example when `ρ` is constant).
pub fn sqrt_derivative_commuting(m: &MassMatrix, v: &ScalarField, basis: &GalerkinBasis) -> Result<DMatrix<f64>> {
    let s = basis.scalar_len();
    let block = DMatrix::from_row_slice(s, s, &basis.weighted_gram(v));
    Ok(m.inv_sqrt()? * m.expand(&block) * 0.5)
}

/// Lipschitz constant of `ρ ↦ M^{1/2}[ρ]` (operator norm against `L²`) on
/// `{ρ ≥ κ}`: `½ κ^{-1/2} ĉ`, with `ĉ = √S` bounding `‖ρ ↦ M[ρ]‖`.
pub fn sqrt_lipschitz_constant(kappa: f64, basis: &GalerkinBasis) -> f64 {
    0.5 / kappa.sqrt() * basis.sup_l2_ratio()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::TorusGrid;
    use std::f64::consts::PI;

    fn basis() -> GalerkinBasis {
        GalerkinBasis::new(TorusGrid::new(2, 16).unwrap(), 1).unwrap()
    }

    fn max_abs(m: &DMatrix<f64>) -> f64 {
        m.iter().fold(0.0f64, |a, &b| a.max(b.abs()))
    }

    #[test]
    fn constant_density_is_scaled_identity() {
        let b = basis();
        let m = assemble_m(&ScalarField::constant(b.grid(), 4.0), &b).unwrap();
        let id = DMatrix::<f64>::identity(b.len(), b.len());
        assert!(max_abs(&(m.to_dense() - &id * 4.0)) < 1e-12);
        assert!(max_abs(&(m.sqrt() - &id * 2.0)) < 1e-12);
        assert!(max_abs(&(m.inv().unwrap() - &id * 0.25)) < 1e-12);
        let one = ScalarField::constant(b.grid(), 1.0);
        let d = sqrt_derivative(&m, &one, &b).unwrap();
        assert!(max_abs(&(d - &id * 0.25)) < 1e-12);
    }

    #[test]
    fn diagonal_synthetic_block() {
        let m = MassMatrix::from_block(DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 9.0])), 1, 4.0, 9.0);
        let sq = m.sqrt();
        assert!((sq[(0, 0)] - 2.0).abs() < 1e-14 && (sq[(1, 1)] - 3.0).abs() < 1e-14);
        let inv = m.inv().unwrap();
        assert!((inv[(0, 0)] - 0.25).abs() < 1e-14 && (inv[(1, 1)] - 1.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn singular_density_rejected() {
        let b = basis();
        let m = assemble_m(&ScalarField::zeros(b.grid()), &b).unwrap();
        assert!(matches!(m.inv(), Err(Error::SingularMass { .. })));
        let neg = ScalarField::constant(b.grid(), -1.0);
        assert!(matches!(assemble_m(&neg, &b), Err(Error::Precondition(_))));
    }

    #[test]
    fn recomposition_and_eigen_containment() {
        let b = basis();
        let rho = ScalarField::from_fn(b.grid(), |x| 1.0 + 0.5 * (2.0 * PI * x[0]).cos());
        let m = assemble_m(&rho, &b).unwrap();
        let sq = m.sqrt();
        assert!(max_abs(&(&sq * &sq - m.to_dense())) < 1e-12);
        for l in m.eigenvalues() {
            assert!(l >= rho.min() - 1e-12 && l <= rho.max() + 1e-12);
        }
    }
}
