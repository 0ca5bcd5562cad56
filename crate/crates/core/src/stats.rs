//! Small Monte Carlo statistics helpers.

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn std_error(xs: &[f64]) -> f64 {
    (variance(xs) / xs.len() as f64).sqrt()
}

/// `mean / SE`, defined as zero when the standard error vanishes.
pub fn z_score(xs: &[f64]) -> f64 {
    let se = std_error(xs);
    if se == 0.0 || !se.is_finite() {
        0.0
    } else {
        mean(xs) / se
    }
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: usize,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let m = mean(xs);
        let se = std_error(xs);
        Self { mean: m, se, ci_low: m - 1.96 * se, ci_high: m + 1.96 * se, n: xs.len() }
    }
}

/// Least-squares slope of `ln err` against `ln h`.
pub fn fit_order(h: &[f64], err: &[f64]) -> f64 {
    let x: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = err.iter().map(|v| v.ln()).collect();
    let mx = mean(&x);
    let my = mean(&y);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

pub fn max_abs(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_of_power_law() {
        let h = [0.1, 0.05, 0.025];
        let e: Vec<f64> = h.iter().map(|v: &f64| 3.0 * v.powf(1.5)).collect();
        assert!((fit_order(&h, &e) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn zero_spread_gives_zero_z() {
        assert_eq!(z_score(&[2.0, 2.0, 2.0]), 0.0);
        assert!((z_score(&[1.0, 2.0, 3.0]) - 2.0 / (1.0 / 3f64.sqrt())).abs() < 1e-12);
    }
}
