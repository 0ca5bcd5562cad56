/// Smooth even cut-off: `1` on `[-R, R]`, `0` outside `[-2R, 2R]`, `C^∞` in between.
pub fn theta(z: f64, r: f64) -> f64 {
    let s = ((z.abs() - r) / r).clamp(0.0, 1.0);
    let psi = |t: f64| if t > 0.0 { (-1.0 / t).exp() } else { 0.0 };
    let (a, b) = (psi(1.0 - s), psi(s));
    a / (a + b)
}

/// Lipschitz bound of `Θ_R` in the coefficient norm. The map acts coordinate-wise,
/// so the constant is `sup |d/dz (θ_R(z) z)|`, which does not depend on `R` or `N`.
pub const TRUNCATION_LIPSCHITZ: f64 = 2.75;

/// `v ↦ Σ θ_R(α_i) α_i ψ_i` on coefficient vectors; identity when `r` is `None`.
pub fn apply_truncation(v: &[f64], r: Option<f64>) -> Vec<f64> {
    match r {
        None => v.to_vec(),
        Some(r) => v.iter().map(|&a| theta(a, r) * a).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_inside_and_zero_outside() {
        let v = [0.5, -1.0, 0.99];
        assert_eq!(apply_truncation(&v, Some(1.0)), v.to_vec());
        assert_eq!(apply_truncation(&[3.0, 0.2], Some(1.0)), vec![0.0, 0.2]);
        assert!(theta(1.5, 1.0) > 0.0 && theta(1.5, 1.0) < 1.0);
    }

    #[test]
    fn lipschitz_bound_holds_on_fine_grid() {
        let r = 2.0;
        let f = |z: f64| theta(z, r) * z;
        let h = 1e-4;
        let mut worst: f64 = 0.0;
        let mut z = 0.0;
        while z < 5.0 * r {
            worst = worst.max(((f(z + h) - f(z)) / h).abs());
            z += h;
        }
        assert!(worst <= TRUNCATION_LIPSCHITZ, "{worst}");
        assert!(worst > 2.7);
    }
}
