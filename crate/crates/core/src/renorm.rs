//! Renormalizing nonlinearities `b(ρ)`: the cut-offs `T_k`, `L_k`, `z ln z`,
//! and compactly supported bumps.

use crate::error::{Error, Result};
use crate::spectral::ScalarField;

/// Concave template: `T(w) = w` for `w ≤ 1`, `w − (w−1)²/4` on `[1,3]`, `2` for `w ≥ 3`.
///
/// This is the cubic Hermite ramp fixed by `T(1)=1, T'(1)=1, T(3)=2, T'(3)=0`;
/// its cubic coefficient vanishes, leaving `T'' = −1/2` on `[1,3]`.
pub fn t_template(w: f64) -> f64 {
    if w <= 1.0 {
        w
    } else if w >= 3.0 {
        2.0
    } else {
        w - 0.25 * (w - 1.0) * (w - 1.0)
    }
}

pub fn t_template_prime(w: f64) -> f64 {
    if w <= 1.0 {
        1.0
    } else if w >= 3.0 {
        0.0
    } else {
        1.0 - 0.5 * (w - 1.0)
    }
}

/// `∫_1^y T(w)/w² dw` for `y ≥ 1`.
fn t_over_w2_integral(y: f64) -> f64 {
    let ramp = |y: f64| 1.5 * y.ln() - 0.25 * (y - 1.0) + 0.25 * (1.0 / y - 1.0);
    if y <= 3.0 {
        ramp(y)
    } else {
        ramp(3.0) + 2.0 * (1.0 / 3.0 - 1.0 / y)
    }
}

pub fn tk(z: f64, k: f64) -> f64 {
    k * t_template(z / k)
}

pub fn tk_prime(z: f64, k: f64) -> f64 {
    t_template_prime(z / k)
}

/// `L_k(z) = z ∫_1^z T_k(s)/s² ds`, equal to `z ln z` for `z < k`.
pub fn lk(z: f64, k: f64) -> f64 {
    if z <= 0.0 {
        0.0
    } else {
        z * lk_inner(z, k)
    }
}

fn lk_inner(z: f64, k: f64) -> f64 {
    if z < k {
        z.ln()
    } else {
        k.ln() + t_over_w2_integral(z / k)
    }
}

pub fn lk_prime(z: f64, k: f64) -> f64 {
    lk_inner(z, k) + tk(z, k) / z
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RenormFunction {
    Identity,
    Tk(f64),
    Lk(f64),
    ZLogZ,
    /// `exp(−1/(1−r²))` with `r = (z − center)/radius`, zero for `|r| ≥ 1`.
    Bump { center: f64, radius: f64 },
}

impl RenormFunction {
    pub fn value(&self, z: f64) -> f64 {
        match *self {
            Self::Identity => z,
            Self::Tk(k) => tk(z, k),
            Self::Lk(k) => lk(z, k),
            Self::ZLogZ => {
                if z <= 0.0 {
                    0.0
                } else {
                    z * z.ln()
                }
            }
            Self::Bump { center, radius } => {
                let r = (z - center) / radius;
                if r.abs() >= 1.0 {
                    0.0
                } else {
                    (-1.0 / (1.0 - r * r)).exp()
                }
            }
        }
    }

    pub fn derivative(&self, z: f64) -> f64 {
        match *self {
            Self::Identity => 1.0,
            Self::Tk(k) => tk_prime(z, k),
            Self::Lk(k) => lk_prime(z, k),
            Self::ZLogZ => z.ln() + 1.0,
            Self::Bump { center, radius } => {
                let r = (z - center) / radius;
                if r.abs() >= 1.0 {
                    0.0
                } else {
                    let q = 1.0 - r * r;
                    self.value(z) * (-2.0 * r / (q * q)) / radius
                }
            }
        }
    }

    pub fn apply(&self, rho: &ScalarField) -> ScalarField {
        rho.map(|z| self.value(z))
    }

    pub fn apply_derivative(&self, rho: &ScalarField) -> ScalarField {
        rho.map(|z| self.derivative(z))
    }
}

pub fn cutoff_tk(rho: &ScalarField, k: f64) -> Result<ScalarField> {
    if k < 1.0 {
        return Err(Error::Precondition(format!("cut-off level k must be >= 1, got {k}")));
    }
    Ok(rho.map(|z| tk(z, k)))
}

pub fn cutoff_lk(rho: &ScalarField, k: f64) -> Result<ScalarField> {
    if k < 1.0 {
        return Err(Error::Precondition(format!("cut-off level k must be >= 1, got {k}")));
    }
    Ok(rho.map(|z| lk(z, k)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn template_knots() {
        assert_eq!(t_template(0.5), 0.5);
        assert_eq!(t_template(10.0), 2.0);
        assert!((t_template(3.0) - 2.0).abs() < 1e-15);
        assert!((t_template_prime(3.0)).abs() < 1e-15);
        assert_eq!(tk(0.5, 1.0), 0.5);
        assert_eq!(tk(10.0, 1.0), 2.0);
    }

    #[test]
    fn tk_pointwise_properties() {
        for i in 0..=500 {
            let z = i as f64 * 0.02;
            for k in [1.0, 2.0, 3.5] {
                let t = tk(z, k);
                let tp = tk_prime(z, k);
                assert!(t <= z.min(2.0 * k) + 1e-15);
                assert!((0.0..=1.0).contains(&tp));
                assert!(tp * z <= t + 1e-12);
            }
        }
    }

    #[test]
    fn lk_matches_z_log_z_below_k_and_quadrature_above() {
        let k = 2.0;
        for z in [0.1, 0.7, 1.9] {
            assert!((lk(z, k) - z * z.ln()).abs() < 1e-14);
        }
        for z in [2.5, 5.0, 9.0] {
            // Midpoint rule for ∫_1^z T_k(s)/s² ds.
            let n = 200_000;
            let h = (z - 1.0) / n as f64;
            let integral: f64 = (0..n)
                .map(|i| {
                    let s = 1.0 + (i as f64 + 0.5) * h;
                    tk(s, k) / (s * s)
                })
                .sum::<f64>()
                * h;
            assert!((lk(z, k) - z * integral).abs() < 1e-8, "z = {z}");
        }
    }

    #[test]
    fn derivatives_match_differences() {
        let fns = [
            RenormFunction::Tk(1.5),
            RenormFunction::Lk(1.5),
            RenormFunction::ZLogZ,
            RenormFunction::Bump { center: 1.0, radius: 0.8 },
        ];
        for b in fns {
            for z in [0.4, 1.1, 1.7, 2.9, 4.0, 6.0] {
                let h = 1e-6;
                let fd = (b.value(z + h) - b.value(z - h)) / (2.0 * h);
                assert!((fd - b.derivative(z)).abs() < 1e-6, "{b:?} at {z}");
            }
        }
    }
}
