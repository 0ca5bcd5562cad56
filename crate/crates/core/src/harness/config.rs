//! Experiment configuration: a TOML document with the sections
//! `[experiment]`, `[model]`, `[noise]`, `[numerics]`, `[initial]` and an
//! optional `[sweep]`. Every key is optional; unknown keys are errors.
//!
//! ```toml
//! [experiment]
//! name = "smoke"
//! paths = 4
//! seed = 1
//! diagnostics = ["energy", "ito"]
//!
//! [model]
//! dim = 1
//! m = 32
//!
//! [numerics]
//! dt = 0.001
//! t_end = 0.02
//!
//! [sweep]
//! axis = "delta"
//! values = [0.1, 0.05]
//! ```

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::diagnostics::PressureMode;
use crate::error::{Error, Result};
use crate::galerkin::{SimConfig, Stepper};
use crate::harness::sampler::{InitialSampler, SamplerKind};
use crate::noise::NoiseFamily;
use crate::transport::TransportScheme;

pub const OUTPUT_DIR_ENV: &str = "SCNS_OUTPUT_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Diagnostic {
    Energy,
    Ito,
    Pressure,
    Martingale,
    Flux,
    Riesz,
    Norms,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Cutoff,
    Epsilon,
    Delta,
    R,
    Dt,
    NoiseC0,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Cutoff => "cutoff",
            SweepAxis::Epsilon => "epsilon",
            SweepAxis::Delta => "delta",
            SweepAxis::R => "r",
            SweepAxis::Dt => "dt",
            SweepAxis::NoiseC0 => "noise_c0",
        }
    }

    pub fn apply(&self, base: &SimConfig, value: f64) -> SimConfig {
        let mut c = base.clone();
        match self {
            SweepAxis::Cutoff => c.cutoff = value.round() as usize,
            SweepAxis::Epsilon => c.epsilon = value,
            SweepAxis::Delta => c.delta = value,
            SweepAxis::R => c.r = Some(value),
            SweepAxis::Dt => c.dt = value,
            SweepAxis::NoiseC0 => c.noise_c0 = value,
        }
        c
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub sim: SimConfig,
    pub sampler: InitialSampler,
    pub paths: usize,
    pub seed: u64,
    /// Largest tolerated fraction of aborted paths per sweep point.
    pub failure_fraction: f64,
    pub report_times: Vec<f64>,
    pub snapshot_times: Vec<f64>,
    pub snapshot_paths: usize,
    pub diagnostics: Vec<Diagnostic>,
    pub pressure_mode: PressureMode,
    pub flux_k: f64,
    pub sweep: Option<Sweep>,
    /// Execution only: never part of the recorded configuration.
    #[serde(skip)]
    pub workers: usize,
    #[serde(skip)]
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "experiment".into(),
            sim: SimConfig::default(),
            sampler: InitialSampler::default(),
            paths: 16,
            seed: 0,
            failure_fraction: 0.1,
            report_times: Vec::new(),
            snapshot_times: Vec::new(),
            snapshot_paths: 1,
            diagnostics: vec![Diagnostic::Energy],
            pressure_mode: PressureMode::FullDensity,
            flux_k: 2.0,
            sweep: None,
            workers: 1,
            output_dir: PathBuf::from("scns-output"),
        }
    }
}

impl ExperimentConfig {
    /// `(sweep value, simulation config)` for every sweep point; a single
    /// point with value `NaN` when there is no sweep.
    pub fn points(&self) -> Vec<(Option<f64>, SimConfig)> {
        match &self.sweep {
            None => vec![(None, self.sim.clone())],
            Some(s) => s.values.iter().map(|&v| (Some(v), s.axis.apply(&self.sim, v))).collect(),
        }
    }

    pub fn needs_states(&self) -> bool {
        self.diagnostics.iter().any(|d| *d != Diagnostic::Energy)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        for (_, sim) in self.points() {
            sim.validate()?;
        }
        self.sampler.validate()?;
        if self.paths == 0 {
            return fail("paths must be at least 1".into());
        }
        if self.workers == 0 {
            return fail("workers must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.failure_fraction) {
            return fail(format!("failure_fraction must lie in [0, 1], got {}", self.failure_fraction));
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return fail("sweep values must be nonempty".into());
            }
        }
        for &t in self.report_times.iter().chain(&self.snapshot_times) {
            if !(0.0..=self.sim.t_end).contains(&t) {
                return fail(format!("report and snapshot times must lie in [0, t_end], got {t}"));
            }
        }
        if !(self.flux_k > 0.0) {
            return fail(format!("flux_k must be positive, got {}", self.flux_k));
        }
        self.pressure_mode.validate(self.sim.gamma)
    }
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    name: Option<String>,
    paths: Option<usize>,
    seed: Option<u64>,
    workers: Option<usize>,
    output_dir: Option<String>,
    failure_fraction: Option<f64>,
    report_times: Option<Vec<f64>>,
    snapshot_times: Option<Vec<f64>>,
    snapshot_paths: Option<usize>,
    diagnostics: Option<Vec<Diagnostic>>,
    pressure_mode: Option<String>,
    flux_k: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawModel {
    dim: Option<usize>,
    m: Option<usize>,
    cutoff: Option<usize>,
    gamma: Option<f64>,
    beta: Option<f64>,
    a: Option<f64>,
    nu: Option<f64>,
    lambda: Option<f64>,
    epsilon: Option<f64>,
    delta: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawNoise {
    family: Option<NoiseFamily>,
    k: Option<usize>,
    c0: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawNumerics {
    dt: Option<f64>,
    t_end: Option<f64>,
    stepper: Option<Stepper>,
    transport: Option<TransportScheme>,
    fp_tol: Option<f64>,
    fp_maxiter: Option<usize>,
    dt_min: Option<f64>,
    rho_floor: Option<f64>,
    r: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    kind: Option<SamplerKind>,
    rho_lower: Option<f64>,
    rho_upper: Option<f64>,
    rho_amp: Option<f64>,
    u_amp: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    axis: SweepAxis,
    values: Vec<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    experiment: RawExperiment,
    #[serde(default)]
    model: RawModel,
    #[serde(default)]
    noise: RawNoise,
    #[serde(default)]
    numerics: RawNumerics,
    #[serde(default)]
    initial: RawInitial,
    sweep: Option<RawSweep>,
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line where `key` is assigned, or 1 when the key is absent (a default failed).
fn key_line(text: &str, key: &str) -> usize {
    text.lines()
        .position(|l| {
            let l = l.trim_start();
            l.strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('='))
        })
        .map_or(1, |i| i + 1)
}

const KEYS: &[&str] = &[
    "dim", "m", "cutoff", "gamma", "beta", "a", "nu", "lambda", "epsilon", "delta", "c0", "dt_min", "dt", "t_end",
    "fp_tol", "r", "rho_lower", "rho_upper", "u_amp", "rho_amp", "paths", "workers", "failure_fraction", "values",
    "flux_k", "theta",
];

fn locate(text: &str, msg: &str) -> usize {
    let words: Vec<&str> = msg.split(|c: char| !(c.is_alphanumeric() || c == '_')).collect();
    words
        .iter()
        .find_map(|w| {
            KEYS.contains(w).then(|| if *w == "theta" { "pressure_mode" } else { w }).map(|k| key_line(text, k))
        })
        .unwrap_or(1)
}

pub fn parse_pressure_mode(s: &str) -> Result<PressureMode> {
    let bad = || Error::Config(format!("pressure_mode must be full_density, tk:<k> or theta:<value>, got {s:?}"));
    match s.split_once(':') {
        None if s == "full_density" => Ok(PressureMode::FullDensity),
        Some(("tk", v)) => v.trim().parse().map(PressureMode::Tk).map_err(|_| bad()),
        Some(("theta", v)) => v.trim().parse().map(PressureMode::Theta).map_err(|_| bad()),
        _ => Err(bad()),
    }
}

/// Parses and validates; the output directory may be overridden by
/// `SCNS_OUTPUT_DIR`.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    parse_config_with(text, std::env::var(OUTPUT_DIR_ENV).ok())
}

pub fn parse_config_with(text: &str, output_override: Option<String>) -> Result<ExperimentConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Parse {
        line: e.span().map_or(1, |s| line_of(text, s.start)),
        msg: e.message().trim().to_string(),
    })?;
    let located = |e: Error| match e {
        Error::Config(msg) | Error::Precondition(msg) => Error::Parse { line: locate(text, &msg), msg },
        other => other,
    };

    let mut cfg = ExperimentConfig::default();
    let x = raw.experiment;
    set(&mut cfg.name, x.name);
    set(&mut cfg.paths, x.paths);
    set(&mut cfg.seed, x.seed);
    set(&mut cfg.workers, x.workers);
    set(&mut cfg.failure_fraction, x.failure_fraction);
    set(&mut cfg.report_times, x.report_times);
    set(&mut cfg.snapshot_times, x.snapshot_times);
    set(&mut cfg.snapshot_paths, x.snapshot_paths);
    set(&mut cfg.flux_k, x.flux_k);
    if let Some(mut d) = x.diagnostics {
        d.sort();
        d.dedup();
        cfg.diagnostics = d;
    }
    if let Some(p) = x.pressure_mode {
        cfg.pressure_mode =
            parse_pressure_mode(&p).map_err(|e| Error::Parse { line: key_line(text, "pressure_mode"), msg: e.to_string() })?;
    }
    if let Some(dir) = output_override.or(x.output_dir) {
        cfg.output_dir = PathBuf::from(dir);
    }

    let s = &mut cfg.sim;
    let m = raw.model;
    set(&mut s.dim, m.dim);
    set(&mut s.m, m.m);
    set(&mut s.cutoff, m.cutoff);
    set(&mut s.gamma, m.gamma);
    set(&mut s.beta, m.beta);
    set(&mut s.a, m.a);
    set(&mut s.nu, m.nu);
    set(&mut s.lambda, m.lambda);
    set(&mut s.epsilon, m.epsilon);
    set(&mut s.delta, m.delta);
    set(&mut s.noise_family, raw.noise.family);
    set(&mut s.noise_k, raw.noise.k);
    set(&mut s.noise_c0, raw.noise.c0);
    let n = raw.numerics;
    set(&mut s.dt, n.dt);
    set(&mut s.t_end, n.t_end);
    set(&mut s.stepper, n.stepper);
    set(&mut s.transport, n.transport);
    set(&mut s.fp_tol, n.fp_tol);
    set(&mut s.fp_maxiter, n.fp_maxiter);
    set(&mut s.dt_min, n.dt_min);
    set(&mut s.rho_floor, n.rho_floor);
    if n.r.is_some() {
        s.r = n.r;
    }
    s.seed = cfg.seed;
    let i = raw.initial;
    set(&mut cfg.sampler.kind, i.kind);
    set(&mut cfg.sampler.rho_lower, i.rho_lower);
    set(&mut cfg.sampler.rho_upper, i.rho_upper);
    set(&mut cfg.sampler.rho_amp, i.rho_amp);
    set(&mut cfg.sampler.u_amp, i.u_amp);
    cfg.sweep = raw.sweep.map(|w| Sweep { axis: w.axis, values: w.values });

    cfg.validate().map_err(located)?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig> {
        parse_config_with(text, None)
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse("").unwrap();
        assert_eq!(c.sim.gamma, 5.0 / 3.0);
        assert_eq!((c.sim.beta, c.sim.nu, c.sim.lambda), (5.0, 1.0, 0.0));
        assert_eq!(c.points().len(), 1);
    }

    #[test]
    fn gamma_in_three_dimensions() {
        let text = "[model]\ndim = 3\nm = 16\ngamma = 1.2\n";
        match parse(text) {
            Err(Error::Parse { line, msg }) => {
                assert_eq!(line, 4);
                assert!(msg.contains("3/2"), "{msg}");
            }
            other => panic!("{other:?}"),
        }
        assert!(parse("[model]\ndim = 2\ngamma = 1.2\n").is_ok());
    }

    #[test]
    fn unknown_keys_are_rejected_with_line() {
        match parse("[experiment]\npaths = 2\n\n[model]\nviscosity = 3\n") {
            Err(Error::Parse { line, msg }) => {
                assert_eq!(line, 5);
                assert!(msg.contains("viscosity"), "{msg}");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("[extras]\nx = 1\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn syntax_errors_carry_lines() {
        match parse("[model]\nm = 16\ncutoff = = 2\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sweep_and_modes() {
        let c = parse(
            "[experiment]\npressure_mode = \"theta:0.1\"\ndiagnostics = [\"ito\", \"energy\", \"ito\"]\n\
             [sweep]\naxis = \"delta\"\nvalues = [0.1, 0.05]\n",
        )
        .unwrap();
        assert_eq!(c.pressure_mode, PressureMode::Theta(0.1));
        assert_eq!(c.diagnostics, vec![Diagnostic::Energy, Diagnostic::Ito]);
        let pts = c.points();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[1].1.delta, 0.05);
        assert!(parse("[sweep]\naxis = \"delta\"\nvalues = []\n").is_err());
        assert!(parse("[experiment]\npressure_mode = \"theta:0.5\"\n").is_err());
        assert!(parse("[experiment]\npressure_mode = \"bogus\"\n").is_err());
    }

    #[test]
    fn output_override() {
        let c = parse_config_with("[experiment]\noutput_dir = \"a\"\n", Some("b".into())).unwrap();
        assert_eq!(c.output_dir, PathBuf::from("b"));
    }

    #[test]
    fn workers_are_not_recorded() {
        let a = parse("[experiment]\nworkers = 1\n").unwrap();
        let b = parse("[experiment]\nworkers = 8\n").unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
