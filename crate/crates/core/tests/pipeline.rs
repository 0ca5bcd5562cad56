use std::path::Path;

use scns_core::diagnostics::energy::energy_mc_report;
use scns_core::galerkin::{run_path, GalerkinModel, GalerkinState, RecordOptions, SimConfig, Stepper};
use scns_core::harness::{parse_config, run_ensemble, InitialSampler};
use scns_core::rng::CounterWiener;

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let cfg = parse_config(&std::fs::read_to_string(&path).unwrap()).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert!(!cfg.points().is_empty());
            seen += 1;
        }
    }
    assert!(seen >= 3);
}

#[test]
fn energy_ratio_is_stable_under_dt_halving() {
    let ratio = |dt: f64| {
        let model = GalerkinModel::new(SimConfig { m: 8, cutoff: 1, dt, t_end: 0.1, ..SimConfig::default() }).unwrap();
        let recs = run_ensemble(&model, &InitialSampler::default(), 3, 24, 1, RecordOptions::summary(), |r| r).unwrap();
        energy_mc_report(&recs).unwrap().moments[0].ratio
    };
    let (a, b) = (ratio(4e-3), ratio(2e-3));
    let width = (a.ci_high - a.ci_low).max(b.ci_high - b.ci_low);
    assert!((a.mean - b.mean).abs() <= 2.0 * width, "{a:?} vs {b:?}");
}

#[test]
fn steppers_agree_to_first_order() {
    let run = |stepper: Stepper, dt: f64| {
        let model = GalerkinModel::new(SimConfig { m: 8, cutoff: 1, stepper, dt, t_end: 0.05, ..SimConfig::default() }).unwrap();
        let (rho, u) = InitialSampler::default().sample(&model, 5, 0);
        let w = CounterWiener { seed: 5, k: model.noise().k };
        run_path(&model, GalerkinState::new(rho, u), &w, 0, RecordOptions::summary()).final_state
    };
    let gap = |dt: f64| {
        let (a, b) = (run(Stepper::EulerMaruyama, dt), run(Stepper::FixedPoint, dt));
        a.u.iter().zip(&b.u).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
    };
    // Same Brownian path only at equal dt, so compare the gap itself as dt shrinks.
    let (coarse, fine) = (gap(5e-3), gap(1.25e-3));
    assert!(fine < coarse, "{coarse:e} -> {fine:e}");
}

#[test]
fn mass_and_stochastic_integral_along_paths() {
    let model = GalerkinModel::new(SimConfig { m: 16, cutoff: 2, dt: 2e-3, t_end: 0.1, ..SimConfig::default() }).unwrap();
    let recs = run_ensemble(&model, &InitialSampler::default(), 9, 4, 1, RecordOptions::summary(), |r| r).unwrap();
    for rec in &recs {
        assert!(!rec.aborted());
        for w in rec.series.windows(2) {
            assert!((w[1].mass - w[0].mass).abs() <= 1e-12);
        }
        assert!(rec.final_state.z_l2() > 0.0);
    }

    let quiet = GalerkinModel::new(SimConfig { noise_c0: 0.0, ..model.config().clone() }).unwrap();
    let recs = run_ensemble(&quiet, &InitialSampler::default(), 9, 2, 1, RecordOptions::summary(), |r| r).unwrap();
    assert!(recs.iter().all(|r| r.final_state.z_l2() == 0.0));
}
