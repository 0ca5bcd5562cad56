//! Real trigonometric Galerkin basis.
//!
//! Scalar modes are `1`, `√2 cos(2πk·x)` and `√2 sin(2πk·x)` for wavevectors in
//! the canonical half of `{|k|_∞ ≤ N}`. Vector modes are a scalar mode times a
//! unit axis vector, ordered axis-major: `n = axis * S + a`.

use std::f64::consts::{PI, SQRT_2};

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{ModeIndex, ScalarField, Spectrum, TorusGrid, VectorField};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrigKind {
    Const,
    Cos,
    Sin,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScalarMode {
    pub k: ModeIndex,
    pub kind: TrigKind,
}

#[derive(Clone, Debug)]
pub struct GalerkinBasis {
    grid: TorusGrid,
    cutoff: usize,
    modes: Vec<ScalarMode>,
    /// Index of the cos/sin partner sharing the wavevector (self for the constant).
    partner: Vec<usize>,
    /// Grid values of each scalar mode.
    values: Vec<Vec<f64>>,
}

fn canonical(k: [i64; 3]) -> bool {
    for c in k {
        if c != 0 {
            return c > 0;
        }
    }
    false
}

impl GalerkinBasis {
    /// Needs `m > 4·cutoff` so that products of two modes are resolved exactly.
    pub fn new(grid: TorusGrid, cutoff: usize) -> Result<Self> {
        if cutoff == 0 || 4 * cutoff >= grid.points_per_axis() {
            return Err(Error::Aliasing { cutoff, m: grid.points_per_axis() });
        }
        let d = grid.dim();
        let n = cutoff as i64;
        let mut modes = vec![ScalarMode { k: ModeIndex { k: [0; 3] }, kind: TrigKind::Const }];
        let mut partner = vec![0];
        let range = |axis: usize| if axis < d { -n..=n } else { 0..=0 };
        for k0 in range(0) {
            for k1 in range(1) {
                for k2 in range(2) {
                    let k = [k0, k1, k2];
                    if !canonical(k) {
                        continue;
                    }
                    let i = modes.len();
                    modes.push(ScalarMode { k: ModeIndex { k }, kind: TrigKind::Cos });
                    modes.push(ScalarMode { k: ModeIndex { k }, kind: TrigKind::Sin });
                    partner.push(i + 1);
                    partner.push(i);
                }
            }
        }
        let values = modes
            .iter()
            .map(|mode| {
                (0..grid.len())
                    .map(|flat| {
                        let x = grid.coords(flat);
                        let phase = 2.0 * PI * (0..3).map(|a| mode.k.k[a] as f64 * x[a]).sum::<f64>();
                        match mode.kind {
                            TrigKind::Const => 1.0,
                            TrigKind::Cos => SQRT_2 * phase.cos(),
                            TrigKind::Sin => SQRT_2 * phase.sin(),
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(Self { grid, cutoff, modes, partner, values })
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Number of scalar modes `S = (2N+1)^d`.
    pub fn scalar_len(&self) -> usize {
        self.modes.len()
    }

    /// Dimension of the vector space, `d·S`.
    pub fn len(&self) -> usize {
        self.grid.dim() * self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn scalar_modes(&self) -> &[ScalarMode] {
        &self.modes
    }

    pub fn scalar_values(&self, a: usize) -> &[f64] {
        &self.values[a]
    }

    /// `(wavevector, axis)` of vector mode `n`.
    pub fn entry(&self, n: usize) -> (ScalarMode, usize) {
        let s = self.scalar_len();
        (self.modes[n % s], n / s)
    }

    pub fn scalar_field(&self, a: usize) -> ScalarField {
        ScalarField::new(self.grid, self.values[a].clone()).expect("basis values are finite")
    }

    pub fn vector_mode(&self, n: usize) -> VectorField {
        let (_, axis) = self.entry(n);
        let a = n % self.scalar_len();
        let mut v = VectorField::zeros(self.grid);
        v.components_mut()[axis] = self.scalar_field(a);
        v
    }

    /// Coefficients `⟨f, φ_a⟩` of the scalar projection.
    pub fn scalar_coeffs(&self, f: &ScalarField) -> Vec<f64> {
        self.coeffs_from_spectrum(&f.to_spectral())
    }

    pub fn coeffs_from_spectrum(&self, spec: &Spectrum) -> Vec<f64> {
        self.modes
            .iter()
            .map(|mode| {
                let c = spec.coeff(mode.k.k);
                match mode.kind {
                    TrigKind::Const => c.re,
                    TrigKind::Cos => SQRT_2 * c.re,
                    TrigKind::Sin => -SQRT_2 * c.im,
                }
            })
            .collect()
    }

    /// `Σ_a c_a φ_a` as a grid field.
    pub fn synthesize_scalar(&self, coeffs: &[f64]) -> ScalarField {
        debug_assert_eq!(coeffs.len(), self.scalar_len());
        let mut spec = Spectrum::zeros(self.grid);
        let g = self.grid;
        for (mode, &c) in self.modes.iter().zip(coeffs) {
            let k = mode.k.k;
            let neg = [-k[0], -k[1], -k[2]];
            let h = c / SQRT_2;
            let (plus, minus) = match mode.kind {
                TrigKind::Const => {
                    spec.coeffs_mut()[g.index_of(k)] += Complex64::new(c, 0.0);
                    continue;
                }
                TrigKind::Cos => (Complex64::new(h, 0.0), Complex64::new(h, 0.0)),
                TrigKind::Sin => (Complex64::new(0.0, -h), Complex64::new(0.0, h)),
            };
            spec.coeffs_mut()[g.index_of(k)] += plus;
            spec.coeffs_mut()[g.index_of(neg)] += minus;
        }
        spec.to_field()
    }

    /// Coefficients of `P_N v` in the vector basis.
    pub fn project_vector(&self, v: &VectorField) -> Vec<f64> {
        v.components().iter().flat_map(|c| self.scalar_coeffs(c)).collect()
    }

    pub fn synthesize_vector(&self, coeffs: &[f64]) -> VectorField {
        let s = self.scalar_len();
        let comps = coeffs.chunks_exact(s).map(|c| self.synthesize_scalar(c)).collect();
        VectorField::new(comps).expect("one component per axis")
    }

    /// Coefficients of `∂_axis (Σ c_a φ_a)`; the map is skew-symmetric.
    pub fn derivative_coeffs(&self, coeffs: &[f64], axis: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.scalar_len()];
        for (a, mode) in self.modes.iter().enumerate() {
            let w = 2.0 * PI * mode.k.k[axis] as f64;
            match mode.kind {
                TrigKind::Const => {}
                // ∂ cos = -w sin, ∂ sin = w cos
                TrigKind::Cos => out[self.partner[a]] -= w * coeffs[a],
                TrigKind::Sin => out[self.partner[a]] += w * coeffs[a],
            }
        }
        out
    }

    /// `4π²|k|²` for scalar mode `a`.
    pub fn eigenvalue(&self, a: usize) -> f64 {
        4.0 * PI * PI * self.modes[a].k.norm_sq() as f64
    }

    /// Gram block `G_ab = ∫ ρ φ_a φ_b` (grid quadrature), row-major `S×S`.
    pub fn weighted_gram(&self, rho: &ScalarField) -> Vec<f64> {
        let s = self.scalar_len();
        let r = rho.values();
        let inv = 1.0 / r.len() as f64;
        let mut g = vec![0.0; s * s];
        let mut weighted = vec![0.0; r.len()];
        for a in 0..s {
            for (w, (x, y)) in weighted.iter_mut().zip(r.iter().zip(&self.values[a])) {
                *w = x * y;
            }
            for b in a..s {
                let v = weighted.iter().zip(&self.values[b]).map(|(x, y)| x * y).sum::<f64>() * inv;
                g[a * s + b] = v;
                g[b * s + a] = v;
            }
        }
        g
    }

    /// Bound on `‖φ‖_∞ / ‖φ‖_{L²}` over the scalar span: `√S`.
    pub fn sup_l2_ratio(&self) -> f64 {
        (self.scalar_len() as f64).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis() -> GalerkinBasis {
        GalerkinBasis::new(TorusGrid::new(2, 16).unwrap(), 2).unwrap()
    }

    #[test]
    fn counts_and_orthonormality() {
        let b = basis();
        assert_eq!(b.scalar_len(), 25);
        assert_eq!(b.len(), 50);
        let g = b.weighted_gram(&ScalarField::constant(b.grid(), 1.0));
        for i in 0..25 {
            for j in 0..25 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((g[i * 25 + j] - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_unresolved_cutoff() {
        let g = TorusGrid::new(2, 8).unwrap();
        assert!(GalerkinBasis::new(g, 2).is_err());
        assert!(GalerkinBasis::new(g, 1).is_ok());
    }

    #[test]
    fn synthesis_inverts_projection() {
        let b = basis();
        let c: Vec<f64> = (0..25).map(|i| ((i * 7 % 11) as f64 - 5.0) / 3.0).collect();
        let f = b.synthesize_scalar(&c);
        let back = b.scalar_coeffs(&f);
        for (x, y) in c.iter().zip(&back) {
            assert!((x - y).abs() < 1e-13);
        }
        let direct: Vec<f64> =
            (0..25).map(|a| f.inner(&b.scalar_field(a))).collect();
        for (x, y) in c.iter().zip(&direct) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn derivative_matches_spectral() {
        let b = basis();
        let c: Vec<f64> = (0..25).map(|i| (i as f64 * 0.37).sin()).collect();
        let f = b.synthesize_scalar(&c);
        for axis in 0..2 {
            let lhs = b.synthesize_scalar(&b.derivative_coeffs(&c, axis));
            let rhs = crate::spectral::ops::partial(&f, axis);
            assert!(lhs.sub(&rhs).sup_norm() < 1e-11);
        }
    }
}
