//! Counter-based Wiener increments.
//!
//! Every step draws from its own ChaCha8 stream keyed by `(seed, path, step)`,
//! so results do not depend on scheduling. Rejected steps are refined with a
//! Brownian bridge whose extra randomness is keyed by `(depth, position)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Independent stream for the given key tuple.
pub fn keyed_rng(keys: &[u64]) -> ChaCha8Rng {
    let mut h = 0x243F_6A88_85A3_08D3u64;
    for &k in keys {
        h = splitmix64(h ^ splitmix64(k));
    }
    ChaCha8Rng::seed_from_u64(h)
}

pub fn standard_normals(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

const DOMAIN_STEP: u64 = 1;
const DOMAIN_BRIDGE: u64 = 2;

/// `K` independent `N(0, dt)` draws.
#[derive(Clone, Debug, PartialEq)]
pub struct WienerIncrement {
    pub dw: Vec<f64>,
    pub dt: f64,
}

pub fn sample_increment(k: usize, dt: f64, rng: &mut ChaCha8Rng) -> WienerIncrement {
    let s = dt.sqrt();
    WienerIncrement { dw: standard_normals(rng, k).into_iter().map(|z| s * z).collect(), dt }
}

/// `‖α‖_{𝔘₀} = (Σ_k α_k²/k²)^{1/2}`, with `α` indexed from `k = 1`.
pub fn u0_norm(alpha: &[f64]) -> f64 {
    alpha.iter().enumerate().map(|(i, a)| a * a / ((i + 1) * (i + 1)) as f64).sum::<f64>().sqrt()
}

pub trait WienerSource: Sync {
    fn directions(&self) -> usize;
    fn seed(&self) -> u64;

    /// Increment over macro step `step` of a path.
    fn increment(&self, path: u64, step: u64, dt: f64) -> Vec<f64>;

    /// Splits `total` over `[t, t+dt]` into two half-step increments.
    fn bridge(&self, path: u64, step: u64, depth: u32, position: u64, total: &[f64], dt: f64) -> (Vec<f64>, Vec<f64>) {
        let mut rng = keyed_rng(&[DOMAIN_BRIDGE, self.seed(), path, step, depth as u64, position]);
        let z = standard_normals(&mut rng, total.len());
        let s = (dt / 4.0).sqrt();
        let first: Vec<f64> = total.iter().zip(&z).map(|(w, z)| 0.5 * w + s * z).collect();
        let second = total.iter().zip(&first).map(|(w, a)| w - a).collect();
        (first, second)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CounterWiener {
    pub seed: u64,
    pub k: usize,
}

impl WienerSource for CounterWiener {
    fn directions(&self) -> usize {
        self.k
    }

    fn seed(&self) -> u64 {
        self.seed
    }

    fn increment(&self, path: u64, step: u64, dt: f64) -> Vec<f64> {
        let mut rng = keyed_rng(&[DOMAIN_STEP, self.seed, path, step]);
        sample_increment(self.k, dt, &mut rng).dw
    }
}

/// Coarse increments formed by summing `factor` consecutive fine increments, so
/// a coarse and a fine run see the same Brownian path.
#[derive(Clone, Copy, Debug)]
pub struct AggregatedWiener {
    pub fine: CounterWiener,
    pub factor: usize,
}

impl WienerSource for AggregatedWiener {
    fn directions(&self) -> usize {
        self.fine.k
    }

    fn seed(&self) -> u64 {
        self.fine.seed
    }

    fn increment(&self, path: u64, step: u64, dt: f64) -> Vec<f64> {
        let fine_dt = dt / self.factor as f64;
        let mut acc = vec![0.0; self.fine.k];
        for j in 0..self.factor as u64 {
            let w = self.fine.increment(path, step * self.factor as u64 + j, fine_dt);
            acc.iter_mut().zip(&w).for_each(|(a, b)| *a += b);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn u0_norm_examples() {
        assert_eq!(u0_norm(&[1.0, 0.0, 0.0]), 1.0);
        assert!((u0_norm(&[0.0, 0.0, 1.0]) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn increments_are_keyed() {
        let w = CounterWiener { seed: 7, k: 4 };
        assert_eq!(w.increment(3, 10, 0.01), w.increment(3, 10, 0.01));
        assert_ne!(w.increment(3, 10, 0.01), w.increment(3, 11, 0.01));
        assert_ne!(w.increment(3, 10, 0.01), w.increment(4, 10, 0.01));
    }

    #[test]
    fn bridge_preserves_total() {
        let w = CounterWiener { seed: 1, k: 3 };
        let total = w.increment(0, 0, 0.1);
        let (a, b) = w.bridge(0, 0, 1, 0, &total, 0.1);
        for i in 0..3 {
            assert!((a[i] + b[i] - total[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn aggregation_sums_fine_steps() {
        let fine = CounterWiener { seed: 5, k: 2 };
        let agg = AggregatedWiener { fine, factor: 4 };
        let c = agg.increment(0, 1, 0.4);
        let mut s = [0.0; 2];
        for j in 4..8 {
            let w = fine.increment(0, j, 0.1);
            s[0] += w[0];
            s[1] += w[1];
        }
        assert!((c[0] - s[0]).abs() < 1e-15 && (c[1] - s[1]).abs() < 1e-15);
    }
}
