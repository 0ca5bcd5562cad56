use serde::Serialize;

use super::model::{EventLog, GalerkinModel, GalerkinState};
use crate::diagnostics::energy::{dissipation, energy};
use crate::error::{Error, Result};
use crate::rng::WienerSource;
use crate::spectral::ScalarField;

#[derive(Clone, Copy, Debug, Default)]
pub struct RecordOptions {
    /// Keep the state after every accepted step (needed by step-level diagnostics).
    pub keep_states: bool,
    /// Keep the state every this many macro steps when `keep_states` is off; 0 disables.
    pub sample_every: usize,
}

impl RecordOptions {
    pub fn full() -> Self {
        Self { keep_states: true, sample_every: 0 }
    }

    pub fn summary() -> Self {
        Self::default()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathSample {
    pub t: f64,
    pub rho: ScalarField,
    pub u: Vec<f64>,
    pub z: Vec<f64>,
}

impl PathSample {
    fn of(s: &GalerkinState) -> Self {
        Self { t: s.t, rho: s.rho.clone(), u: s.u.clone(), z: s.z.clone() }
    }

    pub fn to_state(&self) -> GalerkinState {
        GalerkinState { t: self.t, rho: self.rho.clone(), u: self.u.clone(), z: self.z.clone(), events: EventLog::default() }
    }
}

/// An accepted step: start time, length, and the Wiener increment used.
#[derive(Clone, Debug, PartialEq)]
pub struct StepInfo {
    pub t: f64,
    pub dt: f64,
    pub dw: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeriesRow {
    pub t: f64,
    pub energy: f64,
    /// Dissipation rate at this (post-step) state.
    pub dissipation: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub mass: f64,
    pub u_l2: f64,
    pub z_l2: f64,
    /// Sample lies after the stopping time.
    pub truncated: bool,
}

#[derive(Clone, Debug)]
pub struct PathRecord {
    pub path: u64,
    pub tau_r: f64,
    pub series: Vec<SeriesRow>,
    /// With `keep_states`, `states[i]` and `states[i+1]` bracket `steps[i]`.
    pub states: Vec<PathSample>,
    pub steps: Vec<StepInfo>,
    pub events: EventLog,
    pub abort: Option<String>,
    pub final_state: GalerkinState,
}

impl PathRecord {
    pub fn aborted(&self) -> bool {
        self.abort.is_some()
    }
}

struct Runner<'a> {
    model: &'a GalerkinModel,
    wiener: &'a dyn WienerSource,
    path: u64,
    opts: RecordOptions,
    state: GalerkinState,
    rec: PathRecord,
}

impl Runner<'_> {
    fn row(&self) -> SeriesRow {
        let s = &self.state;
        SeriesRow {
            t: s.t,
            energy: energy(self.model, s),
            dissipation: dissipation(self.model, s),
            rho_min: s.rho.min(),
            rho_max: s.rho.max(),
            mass: s.rho.mean(),
            u_l2: s.u_l2(),
            z_l2: s.z_l2(),
            truncated: s.t > self.rec.tau_r,
        }
    }

    fn accept(&mut self, next: GalerkinState, dw: &[f64], dt: f64) {
        let t0 = self.state.t;
        self.state = next;
        if let Some(r) = self.model.config().r {
            if self.rec.tau_r == f64::INFINITY && (self.state.u_l2() >= r || self.state.z_l2() >= r) {
                self.rec.tau_r = self.state.t;
            }
        }
        if self.opts.keep_states {
            self.rec.steps.push(StepInfo { t: t0, dt, dw: dw.to_vec() });
            self.rec.states.push(PathSample::of(&self.state));
        }
        let row = self.row();
        self.rec.series.push(row);
    }

    fn advance(&mut self, step: u64, depth: u32, position: u64, dw: Vec<f64>, dt: f64) -> Result<()> {
        let cfg = self.model.config();
        let at_floor = dt * 0.5 < cfg.dt_min;
        match self.model.step(&self.state, &dw, dt, at_floor) {
            Ok(next) => {
                self.accept(next, &dw, dt);
                Ok(())
            }
            Err(Error::StepRejected(_)) if !at_floor => {
                self.state.events.step_rejections += 1;
                let (a, b) = self.wiener.bridge(self.path, step, depth + 1, position, &dw, dt);
                self.advance(step, depth + 1, 2 * position, a, 0.5 * dt)?;
                self.advance(step, depth + 1, 2 * position + 1, b, 0.5 * dt)
            }
            Err(e) => Err(e),
        }
    }
}

/// Integrates one path from `initial` to `t_end`. Numerical failures end the
/// path early and are reported in `abort`, never as an error.
pub fn run_path(
    model: &GalerkinModel,
    initial: GalerkinState,
    wiener: &dyn WienerSource,
    path: u64,
    opts: RecordOptions,
) -> PathRecord {
    let cfg = model.config();
    let steps = cfg.steps();
    let dt = cfg.t_end / steps as f64;
    let mut runner = Runner {
        model,
        wiener,
        path,
        opts,
        state: initial.clone(),
        rec: PathRecord {
            path,
            tau_r: f64::INFINITY,
            series: Vec::with_capacity(steps + 1),
            states: Vec::new(),
            steps: Vec::new(),
            events: EventLog::default(),
            abort: None,
            final_state: initial,
        },
    };
    if opts.keep_states || opts.sample_every > 0 {
        runner.rec.states.push(PathSample::of(&runner.state));
    }
    let first = runner.row();
    runner.rec.series.push(first);
    for n in 0..steps as u64 {
        let dw = wiener.increment(path, n, dt);
        if let Err(e) = runner.advance(n, 0, 0, dw, dt) {
            runner.rec.abort = Some(format!("t = {:.6}: {e}", runner.state.t));
            break;
        }
        if !opts.keep_states && opts.sample_every > 0 && (n + 1) % opts.sample_every as u64 == 0 {
            runner.rec.states.push(PathSample::of(&runner.state));
        }
    }
    let mut rec = runner.rec;
    if !rec.tau_r.is_finite() {
        rec.tau_r = cfg.t_end;
    }
    rec.events = runner.state.events.clone();
    rec.final_state = runner.state;
    rec
}
