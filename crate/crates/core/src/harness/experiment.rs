//! Experiment execution and on-disk artifacts.
//!
//! Layout under `<output_dir>/<name>/`:
//! `manifest.json`, `plot_data.csv`, and one `point_NNN/` per sweep point with
//! `report.json`, `paths/path_NNNN.csv` and optional `snapshots/*.scns`.
//! Nothing written depends on the worker count or the wall clock.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::diagnostics::energy::{energy_report_from_paths, path_energy, EnergyReport, PathEnergy};
use crate::diagnostics::flux::{flux_integral, riesz_commutator_integral, SweepPoint, TrendReport};
use crate::diagnostics::ito::ito_energy_residual;
use crate::diagnostics::martingale::{
    default_h_library, martingale_functionals_multi, martingale_test, noise_test_field, MartingaleReport,
    MartingaleSeries, QvFamily, MIN_PATHS,
};
use crate::diagnostics::norms::{path_space_norms, PathNorms};
use crate::diagnostics::pressure::{pressure_path, PathPressure, PressureReport};
use crate::error::{Error, Result};
use crate::galerkin::{EventLog, GalerkinModel, PathRecord, RecordOptions, SeriesRow, SimConfig};
use crate::harness::config::{Diagnostic, ExperimentConfig};
use crate::harness::ensemble::run_ensemble;
use crate::harness::plot::{emit_plot_data, write_plot_data};
use crate::spectral::Snapshot;
use crate::stats::Estimate;

pub const SCHEMA_VERSION: u32 = 1;
pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");
/// Largest tolerated per-step change of total mass.
pub const MASS_TOLERANCE: f64 = 1e-12;
/// Largest tolerated relative `J4+J10` / `J5+J9` cancellation defect.
pub const CANCELLATION_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, Default)]
struct ItoPath {
    max_abs: f64,
    max_abs_expected_qv: f64,
    cancel_j5_j9: f64,
    cancel_j4_j10: f64,
}

/// Everything kept from one path once its states are dropped.
#[derive(Clone, Debug)]
struct PathOutput {
    path: u64,
    abort: Option<String>,
    events: EventLog,
    tau_r: f64,
    series: Vec<SeriesRow>,
    energy: PathEnergy,
    max_mass_step: f64,
    ito: Option<ItoPath>,
    pressure: Option<PathPressure>,
    martingale: Option<Vec<MartingaleSeries>>,
    flux: Option<f64>,
    riesz: Option<f64>,
    norms: Option<PathNorms>,
    snapshots: Vec<(String, Snapshot)>,
    error: Option<String>,
}

fn reduce_path(model: &GalerkinModel, cfg: &ExperimentConfig, rec: PathRecord) -> PathOutput {
    let max_mass_step = rec.series.windows(2).map(|w| (w[1].mass - w[0].mass).abs()).fold(0.0, f64::max);
    let mut out = PathOutput {
        path: rec.path,
        abort: rec.abort.clone(),
        events: rec.events.clone(),
        tau_r: rec.tau_r,
        series: rec.series.clone(),
        energy: path_energy(&rec),
        max_mass_step,
        ito: None,
        pressure: None,
        martingale: None,
        flux: None,
        riesz: None,
        norms: None,
        snapshots: Vec::new(),
        error: None,
    };
    if (rec.path as usize) < cfg.snapshot_paths {
        for &t in &cfg.snapshot_times {
            if let Some(s) = rec.states.iter().find(|s| s.t >= t - 1e-12) {
                let tag = format!("path_{:04}_t{:.6}", rec.path, s.t);
                out.snapshots.push((format!("{tag}_rho.scns"), Snapshot::from_scalar(&s.rho)));
                out.snapshots.push((format!("{tag}_u.scns"), Snapshot::from_vector(&model.velocity(&s.u))));
            }
        }
    }
    if rec.aborted() {
        return out;
    }
    if let Err(e) = reduce_diagnostics(model, cfg, &rec, &mut out) {
        out.error = Some(e.to_string());
    }
    out
}

fn reduce_diagnostics(model: &GalerkinModel, cfg: &ExperimentConfig, rec: &PathRecord, out: &mut PathOutput) -> Result<()> {
    for d in &cfg.diagnostics {
        match d {
            Diagnostic::Energy => {}
            Diagnostic::Ito => {
                let r = ito_energy_residual(model, rec)?;
                out.ito = Some(ItoPath {
                    max_abs: r.max_abs(),
                    max_abs_expected_qv: r.max_abs_expected_qv(),
                    cancel_j5_j9: r.cancel_j5_j9,
                    cancel_j4_j10: r.cancel_j4_j10,
                });
            }
            Diagnostic::Pressure => out.pressure = Some(pressure_path(model, rec, cfg.pressure_mode)?),
            Diagnostic::Martingale => {
                let phis: Vec<_> = (0..model.noise().k.min(3)).map(|k| noise_test_field(model, k)).collect();
                out.martingale = Some(martingale_functionals_multi(model, rec, &phis, QvFamily::Galerkin)?);
            }
            Diagnostic::Flux => out.flux = Some(flux_integral(model, rec, cfg.flux_k)),
            Diagnostic::Riesz => out.riesz = Some(riesz_commutator_integral(model, rec)),
            Diagnostic::Norms => out.norms = Some(path_space_norms(model, rec, 0.25, 1.0)?),
        }
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct TimedEstimate {
    pub t: f64,
    pub estimate: Estimate,
}

#[derive(Clone, Debug, Serialize)]
pub struct ItoSummary {
    pub max_abs_residual: Estimate,
    pub max_abs_residual_expected_qv: Estimate,
    pub max_cancel_j5_j9: f64,
    pub max_cancel_j4_j10: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct NormsSummary {
    pub holder_momentum: Estimate,
    pub holder_y: Estimate,
    pub holder_z: Estimate,
    pub sup_momentum_lp: Estimate,
}

#[derive(Clone, Debug, Serialize)]
pub struct MartingaleEntry {
    pub test_field: usize,
    pub report: MartingaleReport,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct EventTotals {
    pub step_rejections: u64,
    pub positivity_clips: u64,
    pub fixed_point_stalls: u64,
    pub cfl_overrides: u64,
    pub max_mass_clamp: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PointReport {
    pub schema_version: u32,
    pub sweep_axis: Option<String>,
    pub sweep_value: Option<f64>,
    pub config: SimConfig,
    pub seed: u64,
    pub paths: usize,
    pub aborted: usize,
    pub aborts: Vec<(u64, String)>,
    pub events: EventTotals,
    pub tau_r_fraction: f64,
    pub energy: Option<EnergyReport>,
    pub energy_at_report_times: Vec<TimedEstimate>,
    pub ito: Option<ItoSummary>,
    pub pressure: Option<PressureReport>,
    pub martingale: Vec<MartingaleEntry>,
    pub flux: Option<Estimate>,
    pub riesz_commutator: Option<Estimate>,
    pub norms: Option<NormsSummary>,
    pub hard_assertions: Vec<Assertion>,
    pub notes: Vec<String>,
}

impl PointReport {
    pub fn passed(&self) -> bool {
        self.hard_assertions.iter().all(|a| a.passed)
    }
}

fn estimate_of(xs: &[f64]) -> Option<Estimate> {
    (xs.len() >= 2).then(|| Estimate::from_samples(xs))
}

fn series_value_at(series: &[SeriesRow], t: f64) -> Option<f64> {
    series.iter().find(|r| r.t >= t - 1e-12).map(|r| r.energy)
}

fn aggregate(cfg: &ExperimentConfig, sim: &SimConfig, value: Option<f64>, outs: &[PathOutput]) -> PointReport {
    let ok: Vec<&PathOutput> = outs.iter().filter(|o| o.abort.is_none() && o.error.is_none()).collect();
    let mut notes = Vec::new();
    let mut events = EventTotals::default();
    for o in outs {
        events.step_rejections += o.events.step_rejections;
        events.positivity_clips += o.events.positivity_clips;
        events.fixed_point_stalls += o.events.fixed_point_stalls;
        events.cfl_overrides += o.events.cfl_overrides;
        events.max_mass_clamp = events.max_mass_clamp.max(o.events.max_mass_clamp);
    }
    for o in outs.iter().filter(|o| o.error.is_some()) {
        notes.push(format!("path {}: diagnostics failed: {}", o.path, o.error.as_deref().unwrap_or_default()));
    }
    let aborts: Vec<(u64, String)> =
        outs.iter().filter_map(|o| o.abort.as_ref().map(|a| (o.path, a.clone()))).collect();
    let tau_r_fraction = if ok.is_empty() {
        0.0
    } else {
        ok.iter().filter(|o| o.tau_r < sim.t_end - 1e-12).count() as f64 / ok.len() as f64
    };

    let energy = match energy_report_from_paths(ok.iter().map(|o| o.energy).collect()) {
        Ok(r) => Some(r),
        Err(e) => {
            notes.push(format!("energy report skipped: {e}"));
            None
        }
    };
    let energy_at_report_times = cfg
        .report_times
        .iter()
        .filter_map(|&t| {
            let xs: Vec<f64> = ok.iter().filter_map(|o| series_value_at(&o.series, t)).collect();
            estimate_of(&xs).map(|estimate| TimedEstimate { t, estimate })
        })
        .collect();

    let itos: Vec<&ItoPath> = ok.iter().filter_map(|o| o.ito.as_ref()).collect();
    let ito = (!itos.is_empty()).then(|| ItoSummary {
        max_abs_residual: Estimate::from_samples(&itos.iter().map(|i| i.max_abs).collect::<Vec<_>>()),
        max_abs_residual_expected_qv: Estimate::from_samples(
            &itos.iter().map(|i| i.max_abs_expected_qv).collect::<Vec<_>>(),
        ),
        max_cancel_j5_j9: itos.iter().fold(0.0, |m, i| m.max(i.cancel_j5_j9)),
        max_cancel_j4_j10: itos.iter().fold(0.0, |m, i| m.max(i.cancel_j4_j10)),
    });

    let pressure_paths: Vec<PathPressure> = ok.iter().filter_map(|o| o.pressure.clone()).collect();
    let pressure = if cfg.diagnostics.contains(&Diagnostic::Pressure) {
        match PressureReport::from_paths(cfg.pressure_mode, pressure_paths) {
            Ok(r) => Some(r),
            Err(e) => {
                notes.push(format!("pressure report skipped: {e}"));
                None
            }
        }
    } else {
        None
    };

    let mut martingale = Vec::new();
    if cfg.diagnostics.contains(&Diagnostic::Martingale) {
        let fields = ok.first().and_then(|o| o.martingale.as_ref()).map_or(0, Vec::len);
        let t = sim.t_end;
        let pairs = [(0.0, t), (0.0, 0.5 * t), (0.25 * t, 0.75 * t), (0.5 * t, t)];
        for j in 0..fields {
            let ens: Vec<MartingaleSeries> =
                ok.iter().filter_map(|o| o.martingale.as_ref().map(|m| m[j].clone())).collect();
            for &(s, t) in &pairs {
                match martingale_test(&ens, s, t, &default_h_library()) {
                    Ok(report) => martingale.push(MartingaleEntry { test_field: j, report }),
                    Err(e) => {
                        notes.push(format!("martingale test skipped (needs {MIN_PATHS} paths): {e}"));
                        break;
                    }
                }
            }
            if martingale.is_empty() {
                break;
            }
        }
    }

    let collect = |f: &dyn Fn(&PathOutput) -> Option<f64>| estimate_of(&ok.iter().filter_map(|o| f(o)).collect::<Vec<_>>());
    let flux = collect(&|o| o.flux);
    let riesz_commutator = collect(&|o| o.riesz);
    let norms: Vec<PathNorms> = ok.iter().filter_map(|o| o.norms).collect();
    let norms = (norms.len() >= 2).then(|| {
        let e = |f: &dyn Fn(&PathNorms) -> f64| Estimate::from_samples(&norms.iter().map(f).collect::<Vec<_>>());
        NormsSummary {
            holder_momentum: e(&|n| n.holder_momentum),
            holder_y: e(&|n| n.holder_y),
            holder_z: e(&|n| n.holder_z),
            sup_momentum_lp: e(&|n| n.sup_momentum_lp),
        }
    });

    let mut hard = Vec::new();
    let clean: Vec<&&PathOutput> = ok.iter().filter(|o| o.events.positivity_clips == 0).collect();
    let worst_mass = clean.iter().fold(0.0f64, |m, o| m.max(o.max_mass_step));
    hard.push(Assertion {
        name: "mass_conservation".into(),
        passed: worst_mass <= MASS_TOLERANCE,
        detail: format!("max per-step mass change {worst_mass:e} over {} unclipped paths", clean.len()),
    });
    if let Some(i) = &ito {
        let worst = i.max_cancel_j4_j10.max(i.max_cancel_j5_j9);
        hard.push(Assertion {
            name: "ito_cancellations".into(),
            passed: worst <= CANCELLATION_TOLERANCE,
            detail: format!("J5+J9 {:e}, J4+J10 {:e}", i.max_cancel_j5_j9, i.max_cancel_j4_j10),
        });
    }
    let abort_fraction = aborts.len() as f64 / outs.len().max(1) as f64;
    hard.push(Assertion {
        name: "failure_fraction".into(),
        passed: abort_fraction <= cfg.failure_fraction,
        detail: format!("{} of {} paths aborted", aborts.len(), outs.len()),
    });

    PointReport {
        schema_version: SCHEMA_VERSION,
        sweep_axis: cfg.sweep.as_ref().map(|s| s.axis.name().to_string()),
        sweep_value: value,
        config: sim.clone(),
        seed: cfg.seed,
        paths: outs.len(),
        aborted: aborts.len(),
        aborts,
        events,
        tau_r_fraction,
        energy,
        energy_at_report_times,
        ito,
        pressure,
        martingale,
        flux,
        riesz_commutator,
        norms,
        hard_assertions: hard,
        notes,
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_context(e, path))
}

fn io_context(e: std::io::Error, path: &Path) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

fn write_series(path: &Path, series: &[SeriesRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in series {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| io_context(e, path))
}

/// Hex SHA-256 of the recorded configuration.
pub fn config_hash(cfg: &ExperimentConfig) -> Result<String> {
    let bytes = serde_json::to_vec(cfg)?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct PointEntry {
    pub index: usize,
    pub dir: String,
    pub sweep_value: Option<f64>,
    pub aborted: usize,
    pub tau_r_fraction: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub code_version: String,
    pub name: String,
    pub config_sha256: String,
    pub config: ExperimentConfig,
    pub points: Vec<PointEntry>,
    pub trends: Vec<TrendReport>,
    pub passed: bool,
}

#[derive(Clone, Debug)]
pub struct ExperimentOutcome {
    pub dir: PathBuf,
    pub manifest: Manifest,
    pub reports: Vec<PointReport>,
}

impl ExperimentOutcome {
    pub fn passed(&self) -> bool {
        self.manifest.passed
    }
}

fn trends(reports: &[PointReport]) -> Vec<TrendReport> {
    if reports.len() < 2 || reports.iter().any(|r| r.sweep_value.is_none()) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut add = |name: &str, f: &dyn Fn(&PointReport) -> Option<Estimate>| {
        let pts: Option<Vec<SweepPoint>> = reports
            .iter()
            .map(|r| f(r).map(|estimate| SweepPoint { value: r.sweep_value.unwrap_or(f64::NAN), estimate }))
            .collect();
        if let Some(pts) = pts {
            out.push(TrendReport::new(name, pts));
        }
    };
    add("energy_ratio_p1", &|r| r.energy.as_ref().map(|e| e.moments[0].ratio));
    add("effective_flux", &|r| r.flux);
    add("riesz_commutator", &|r| r.riesz_commutator);
    add("pressure_integral", &|r| r.pressure.as_ref().map(|p| p.integral));
    out
}

/// Runs every sweep point, writes all artifacts, and reports whether every
/// hard assertion held.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let dir = cfg.output_dir.join(&cfg.name);
    fs::create_dir_all(&dir).map_err(|e| io_context(e, &dir))?;
    let opts = if cfg.needs_states() || !cfg.snapshot_times.is_empty() {
        RecordOptions::full()
    } else {
        RecordOptions::summary()
    };

    let mut reports = Vec::new();
    let mut entries = Vec::new();
    for (index, (value, sim)) in cfg.points().into_iter().enumerate() {
        let model = GalerkinModel::new(sim.clone())?;
        let outs = run_ensemble(&model, &cfg.sampler, cfg.seed, cfg.paths, cfg.workers, opts, |rec| {
            reduce_path(&model, cfg, rec)
        })?;

        let name = format!("point_{index:03}");
        let pdir = dir.join(&name);
        let paths_dir = pdir.join("paths");
        fs::create_dir_all(&paths_dir).map_err(|e| io_context(e, &paths_dir))?;
        for o in &outs {
            write_series(&paths_dir.join(format!("path_{:04}.csv", o.path)), &o.series)?;
            if !o.snapshots.is_empty() {
                let sdir = pdir.join("snapshots");
                fs::create_dir_all(&sdir).map_err(|e| io_context(e, &sdir))?;
                for (file, snap) in &o.snapshots {
                    snap.save(&sdir.join(file))?;
                }
            }
        }
        let report = aggregate(cfg, &sim, value, &outs);
        write_json(&pdir.join("report.json"), &report)?;
        entries.push(PointEntry {
            index,
            dir: name,
            sweep_value: value,
            aborted: report.aborted,
            tau_r_fraction: report.tau_r_fraction,
            passed: report.passed(),
        });
        reports.push(report);
    }

    write_plot_data(&dir.join("plot_data.csv"), &emit_plot_data(&reports))?;
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        code_version: CODE_VERSION.to_string(),
        name: cfg.name.clone(),
        config_sha256: config_hash(cfg)?,
        config: cfg.clone(),
        passed: entries.iter().all(|e| e.passed),
        points: entries,
        trends: trends(&reports),
    };
    write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(ExperimentOutcome { dir, manifest, reports })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::parse_config_with;

    const SMOKE: &str = "[experiment]\nname = \"smoke\"\npaths = 4\nseed = 1\n\
        diagnostics = [\"energy\", \"ito\", \"pressure\", \"flux\", \"riesz\", \"norms\"]\n\
        report_times = [0.01]\nsnapshot_times = [0.02]\n\
        [model]\ndim = 1\nm = 32\ncutoff = 4\n[numerics]\ndt = 0.001\nt_end = 0.02\n";

    #[test]
    fn smoke_experiment_layout() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = parse_config_with(SMOKE, Some(tmp.path().display().to_string())).unwrap();
        let out = run_experiment(&cfg).unwrap();
        assert!(out.passed(), "{:?}", out.reports[0].hard_assertions);
        let d = tmp.path().join("smoke");
        for f in ["manifest.json", "plot_data.csv", "point_000/report.json", "point_000/paths/path_0003.csv"] {
            assert!(d.join(f).is_file(), "{f}");
        }
        let snaps = fs::read_dir(d.join("point_000/snapshots")).unwrap().count();
        assert_eq!(snaps, 2);
        let r = &out.reports[0];
        assert!(r.ito.is_some() && r.pressure.is_some() && r.flux.is_some() && r.norms.is_some());
        assert_eq!(r.energy_at_report_times.len(), 1);
        assert_eq!(out.manifest.config_sha256.len(), 64);
    }

    #[test]
    fn sweep_creates_one_directory_per_point() {
        let tmp = tempfile::tempdir().unwrap();
        let text = "[experiment]\nname = \"sw\"\npaths = 2\n[model]\ndim = 1\nm = 16\ncutoff = 2\n\
                    [numerics]\ndt = 0.005\nt_end = 0.02\n[sweep]\naxis = \"r\"\nvalues = [2.0, 4.0, 8.0]\n";
        let cfg = parse_config_with(text, Some(tmp.path().display().to_string())).unwrap();
        let out = run_experiment(&cfg).unwrap();
        assert_eq!(out.manifest.points.len(), 3);
        for i in 0..3 {
            assert!(tmp.path().join(format!("sw/point_{i:03}/report.json")).is_file());
        }
        assert!(out.manifest.points.iter().all(|p| (0.0..=1.0).contains(&p.tau_r_fraction)));
    }
}
