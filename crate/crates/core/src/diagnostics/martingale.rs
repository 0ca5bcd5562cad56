//! Martingale identification: the functional `M` built from a path and a
//! resolved test field `φ`, its predicted quadratic variation `N` and cross
//! variations `N_k`, and z-tests of the three defining expectations.
//!
//! `M_t = ⟨q(t) − q(0), φ⟩ − ∫⟨drift, φ⟩`, where the drift pairing is
//! `⟨q⊗u, ∇φ⟩ − ν⟨∇u, ∇φ⟩ − (λ+ν)⟨div u, div φ⟩ + ⟨aρ^γ + δρ^β, div φ⟩ − ε⟨∇u∇ρ, φ⟩`,
//! integrated with the left-point rule.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::galerkin::{GalerkinModel, PathRecord};
use crate::spectral::VectorField;
use crate::stats::{mean, std_error, z_score};

/// Which noise family enters `N` and `N_k`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum QvFamily {
    /// `g_k^N`, the coefficients actually driving the Galerkin system.
    #[default]
    Galerkin,
    /// The untruncated `g_k(ρ, ρu)` paired on the grid.
    Untruncated,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MartingaleSeries {
    pub t: Vec<f64>,
    pub m: Vec<f64>,
    pub n: Vec<f64>,
    /// `nk[i][k]`: cross-variation prediction with `β_k` at `t[i]`.
    pub nk: Vec<Vec<f64>>,
    /// Accumulated Wiener path `β_k(t[i])`.
    pub beta: Vec<Vec<f64>>,
    /// `⟨ρ(t[i]), cos 2πx₁⟩`, kept for the conditioning library.
    pub density_moment: Vec<f64>,
    /// Velocity coefficients at `t[i]`.
    pub u: Vec<Vec<f64>>,
}

impl MartingaleSeries {
    /// Last sample index with time at most `t`.
    pub fn index_at(&self, t: f64) -> usize {
        self.t.partition_point(|&s| s <= t + 1e-12).saturating_sub(1)
    }
}

/// `M`, `N`, `N_k` along a path recorded with `RecordOptions::full()`.
pub fn martingale_functionals(
    model: &GalerkinModel,
    rec: &PathRecord,
    phi: &VectorField,
    family: QvFamily,
) -> Result<MartingaleSeries> {
    let mut v = martingale_functionals_multi(model, rec, std::slice::from_ref(phi), family)?;
    Ok(v.remove(0))
}

/// One series per test field, sharing the per-state work.
pub fn martingale_functionals_multi(
    model: &GalerkinModel,
    rec: &PathRecord,
    phis: &[VectorField],
    family: QvFamily,
) -> Result<Vec<MartingaleSeries>> {
    let basis = model.basis();
    let grid = model.grid();
    let phics: Vec<Vec<f64>> = phis.iter().map(|p| basis.project_vector(p)).collect();
    let k_dirs = model.noise().k;
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let cos1 = crate::spectral::ScalarField::from_fn(grid, |x| (2.0 * std::f64::consts::PI * x[0]).cos());
    let mut out = vec![MartingaleSeries::default(); phis.len()];
    let Some(first) = rec.states.first() else {
        return Ok(out);
    };
    let mq0 = model.mass(&first.rho)?.apply(&first.u);
    let q0: Vec<f64> = phics.iter().map(|c| dot(&mq0, c)).collect();
    let mut drift = vec![0.0; phis.len()];
    let mut n = vec![0.0; phis.len()];
    let mut nk = vec![vec![0.0; k_dirs]; phis.len()];
    let mut beta = vec![0.0; k_dirs];

    for (i, s) in rec.states.iter().enumerate() {
        let mass = model.mass(&s.rho)?;
        let mq = mass.apply(&s.u);
        let moment = s.rho.inner(&cos1);
        for (j, o) in out.iter_mut().enumerate() {
            o.t.push(s.t);
            o.m.push(dot(&mq, &phics[j]) - q0[j] - drift[j]);
            o.n.push(n[j]);
            o.nk.push(nk[j].clone());
            o.beta.push(beta.clone());
            o.density_moment.push(moment);
            o.u.push(s.u.clone());
        }

        let Some(step) = rec.steps.get(i) else { break };
        let dt = step.dt;
        let total = model.drift_parts(&s.rho, &s.rho, &s.u).total();
        for (j, c) in phics.iter().enumerate() {
            drift[j] += dt * dot(&total, c);
        }
        if !model.noise().is_zero() {
            let cols: Vec<Vec<f64>> = match family {
                QvFamily::Galerkin => {
                    let phin = model.phi_n(&s.rho, &s.u, &mass)?;
                    (0..k_dirs).map(|k| phin.column(k).iter().copied().collect()).collect()
                }
                QvFamily::Untruncated => Vec::new(),
            };
            let qf = model.momentum_field(&s.rho, &s.u);
            for k in 0..k_dirs {
                let g = (family == QvFamily::Untruncated).then(|| model.noise().eval_g(k, &s.rho, &qf));
                for j in 0..phis.len() {
                    let pair = match &g {
                        Some(g) => g.inner(&phis[j]),
                        None => dot(&cols[k], &phics[j]),
                    };
                    n[j] += dt * pair * pair;
                    nk[j][k] += dt * pair;
                }
            }
        }
        for (b, w) in beta.iter_mut().zip(&step.dw) {
            *b += w;
        }
    }
    Ok(out)
}

/// The same path run backwards in time, driven by the original increments.
/// Used as a negative control: it breaks adaptedness of `M` to `β`.
pub fn time_reversed(rec: &PathRecord) -> PathRecord {
    let mut out = rec.clone();
    let n = rec.states.len();
    for (i, s) in out.states.iter_mut().enumerate() {
        let src = &rec.states[n - 1 - i];
        s.rho = src.rho.clone();
        s.u = src.u.clone();
        s.z = src.z.clone();
    }
    out
}

/// Conditioning functional of the path on `[0, s]`, evaluated at `at·s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum HFunctional {
    Constant { value: f64 },
    /// Logistic sigmoid of `scale·⟨ρ, cos 2πx₁⟩`.
    DensitySigmoid { at: f64, scale: f64 },
    /// Logistic sigmoid of `scale·u_index`.
    VelocitySigmoid { at: f64, scale: f64, index: usize },
}

impl HFunctional {
    pub fn eval(&self, series: &MartingaleSeries, s: f64) -> f64 {
        let sig = |x: f64| 1.0 / (1.0 + (-x).exp());
        match *self {
            HFunctional::Constant { value } => value,
            HFunctional::DensitySigmoid { at, scale } => {
                sig(scale * series.density_moment[series.index_at(at.clamp(0.0, 1.0) * s)])
            }
            HFunctional::VelocitySigmoid { at, scale, index } => {
                let u = &series.u[series.index_at(at.clamp(0.0, 1.0) * s)];
                sig(scale * u.get(index).copied().unwrap_or(0.0))
            }
        }
    }

    pub fn label(&self) -> String {
        match *self {
            HFunctional::Constant { value } => format!("const({value})"),
            HFunctional::DensitySigmoid { at, scale } => format!("sigmoid_rho(at={at},scale={scale})"),
            HFunctional::VelocitySigmoid { at, scale, index } => format!("sigmoid_u{index}(at={at},scale={scale})"),
        }
    }
}

/// Constant, a density sigmoid at `s`, and a velocity sigmoid at `s/2`.
pub fn default_h_library() -> Vec<HFunctional> {
    vec![
        HFunctional::Constant { value: 1.0 },
        HFunctional::DensitySigmoid { at: 1.0, scale: 20.0 },
        HFunctional::VelocitySigmoid { at: 0.5, scale: 4.0, index: 1 },
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Statistic {
    Increment,
    QuadraticVariation,
    CrossVariation { k: usize },
}

#[derive(Clone, Debug, Serialize)]
pub struct ZEntry {
    pub h: String,
    pub statistic: Statistic,
    pub mean: f64,
    pub se: f64,
    pub z: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MartingaleReport {
    pub s: f64,
    pub t: f64,
    pub paths: usize,
    pub entries: Vec<ZEntry>,
}

impl MartingaleReport {
    pub fn max_abs_z(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, e| m.max(e.z.abs()))
    }

    pub fn max_abs_z_cross(&self) -> f64 {
        self.entries
            .iter()
            .filter(|e| matches!(e.statistic, Statistic::CrossVariation { .. }))
            .fold(0.0, |m, e| m.max(e.z.abs()))
    }

    pub fn passed(&self, threshold: f64) -> bool {
        self.entries.iter().all(|e| e.z.is_finite() && e.z.abs() <= threshold)
    }
}

pub const MIN_PATHS: usize = 100;

/// z-scores of `E[h·M_{s,t}]`, `E[h·((M²)_{s,t} − N_{s,t})]` and
/// `E[h·((Mβ_k)_{s,t} − (N_k)_{s,t})]` for every `h` in the library.
pub fn martingale_test(ensemble: &[MartingaleSeries], s: f64, t: f64, h_library: &[HFunctional]) -> Result<MartingaleReport> {
    if ensemble.len() < MIN_PATHS {
        return Err(Error::InsufficientSample { needed: MIN_PATHS, got: ensemble.len() });
    }
    if !(0.0..t).contains(&s) {
        return Err(Error::Precondition(format!("need 0 <= s < t, got s = {s}, t = {t}")));
    }
    let k_dirs = ensemble[0].beta.first().map_or(0, Vec::len);
    let mut stats: Vec<(Statistic, Box<dyn Fn(&MartingaleSeries, usize, usize) -> f64>)> = vec![
        (Statistic::Increment, Box::new(|p: &MartingaleSeries, i, j| p.m[j] - p.m[i])),
        (
            Statistic::QuadraticVariation,
            Box::new(|p: &MartingaleSeries, i, j| p.m[j] * p.m[j] - p.m[i] * p.m[i] - (p.n[j] - p.n[i])),
        ),
    ];
    for k in 0..k_dirs {
        stats.push((
            Statistic::CrossVariation { k },
            Box::new(move |p: &MartingaleSeries, i, j| {
                p.m[j] * p.beta[j][k] - p.m[i] * p.beta[i][k] - (p.nk[j][k] - p.nk[i][k])
            }),
        ));
    }

    let mut entries = Vec::new();
    for h in h_library {
        let hv: Vec<f64> = ensemble.iter().map(|p| h.eval(p, s)).collect();
        for (stat, f) in &stats {
            let xs: Vec<f64> = ensemble
                .iter()
                .zip(&hv)
                .map(|(p, hp)| hp * f(p, p.index_at(s), p.index_at(t)))
                .collect();
            entries.push(ZEntry { h: h.label(), statistic: *stat, mean: mean(&xs), se: std_error(&xs), z: z_score(&xs) });
        }
    }
    Ok(MartingaleReport { s, t, paths: ensemble.len(), entries })
}

/// `f_k e_{a(k)}`: the spatial shape of the `k`-th noise direction, a resolved field
/// whenever the cutoff is at least 2.
pub fn noise_test_field(model: &GalerkinModel, k: usize) -> VectorField {
    let noise = model.noise();
    let grid = model.grid();
    let mut v = VectorField::zeros(grid);
    v.components_mut()[noise.direction(k)] = crate::spectral::ScalarField::from_fn(grid, |x| noise.shape_f(k, x));
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galerkin::{run_path, GalerkinState, RecordOptions, SimConfig};
    use crate::rng::{keyed_rng, standard_normals, CounterWiener};
    use crate::spectral::ScalarField;

    fn model(c0: f64) -> GalerkinModel {
        GalerkinModel::new(SimConfig { m: 8, cutoff: 1, noise_k: 4, noise_c0: c0, t_end: 0.05, dt: 5e-3, ..SimConfig::default() })
            .unwrap()
    }

    fn path(model: &GalerkinModel, seed: u64) -> PathRecord {
        let rho = ScalarField::from_fn(model.grid(), |x| 1.0 + 0.1 * (2.0 * std::f64::consts::PI * x[1]).sin());
        let mut u = vec![0.0; model.basis().len()];
        u[2] = 0.2;
        run_path(model, GalerkinState::new(rho, u), &CounterWiener { seed, k: 4 }, 0, RecordOptions::full())
    }

    #[test]
    fn no_noise_has_no_variation() {
        let m = model(0.0);
        let rec = path(&m, 1);
        let s = martingale_functionals(&m, &rec, &noise_test_field(&m, 0), QvFamily::Galerkin).unwrap();
        assert!(s.n.iter().all(|&v| v == 0.0));
        assert!(s.m.iter().all(|v| v.abs() < 0.05));
    }

    #[test]
    fn constant_field_sees_only_the_epsilon_term() {
        let m = model(0.3);
        let rec = path(&m, 2);
        let mut phi = crate::spectral::VectorField::zeros(m.grid());
        phi.components_mut()[0] = ScalarField::constant(m.grid(), 1.0);
        let s = martingale_functionals(&m, &rec, &phi, QvFamily::Galerkin).unwrap();
        let phic = m.basis().project_vector(&phi);
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let q = |i: usize| dot(&m.mass(&rec.states[i].rho).unwrap().apply(&rec.states[i].u), &phic);
        let mut eps = 0.0;
        for (i, st) in rec.steps.iter().enumerate() {
            let parts = m.drift_parts(&rec.states[i].rho, &rec.states[i].rho, &rec.states[i].u);
            eps += st.dt * dot(&parts.artificial_viscosity, &phic);
            let rest = dot(&parts.convection, &phic) + dot(&parts.pressure, &phic) + dot(&parts.viscous, &phic);
            assert!(rest.abs() < 1e-12);
        }
        let last = rec.states.len() - 1;
        assert!((s.m[last] - (q(last) - q(0) - eps)).abs() < 1e-12);
    }

    #[test]
    fn untruncated_family_is_close_to_galerkin() {
        let m = model(0.3);
        let rec = path(&m, 3);
        let phi = noise_test_field(&m, 1);
        let a = martingale_functionals(&m, &rec, &phi, QvFamily::Galerkin).unwrap();
        let b = martingale_functionals(&m, &rec, &phi, QvFamily::Untruncated).unwrap();
        let last = a.n.len() - 1;
        assert!(a.n[last] > 0.0 && b.n[last] > 0.0);
        assert_eq!(a.m, b.m);
    }

    fn synthetic(seed: u64, n_paths: usize) -> Vec<MartingaleSeries> {
        let steps = 20;
        let dt = 1.0 / steps as f64;
        (0..n_paths)
            .map(|p| {
                let mut rng = keyed_rng(&[seed, p as u64]);
                let z = standard_normals(&mut rng, steps);
                let mut s = MartingaleSeries::default();
                let (mut m, mut b) = (0.0, 0.0);
                let sigma = 0.7;
                for i in 0..=steps {
                    s.t.push(i as f64 * dt);
                    s.m.push(m);
                    s.n.push(sigma * sigma * i as f64 * dt);
                    s.nk.push(vec![sigma * i as f64 * dt]);
                    s.beta.push(vec![b]);
                    s.density_moment.push(0.0);
                    s.u.push(vec![0.0, 0.0]);
                    if i < steps {
                        let dw = z[i] * dt.sqrt();
                        m += sigma * dw;
                        b += dw;
                    }
                }
                s
            })
            .collect()
    }

    #[test]
    fn calibration_false_alarm_rate() {
        let lib = [HFunctional::Constant { value: 1.0 }];
        let alarms = (0..100)
            .filter(|&rep| !martingale_test(&synthetic(rep, 200), 0.25, 1.0, &lib).unwrap().passed(4.0))
            .count();
        assert!(alarms <= 1, "{alarms} false alarms");
    }

    #[test]
    fn too_few_paths() {
        let lib = default_h_library();
        assert!(matches!(martingale_test(&synthetic(0, 10), 0.0, 1.0, &lib), Err(Error::InsufficientSample { .. })));
        assert!(martingale_test(&synthetic(0, 100), 0.5, 0.5, &lib).is_err());
    }

    #[test]
    fn index_lookup() {
        let s = MartingaleSeries { t: vec![0.0, 0.1, 0.2, 0.3], ..Default::default() };
        assert_eq!(s.index_at(0.0), 0);
        assert_eq!(s.index_at(0.2), 2);
        assert_eq!(s.index_at(0.25), 2);
        assert_eq!(s.index_at(5.0), 3);
    }
}
