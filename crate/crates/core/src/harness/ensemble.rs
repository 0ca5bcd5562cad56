//! Seeded Monte Carlo over path indices. Every random number is keyed by
//! `(seed, path, ...)`, so results do not depend on how paths are scheduled.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::galerkin::{run_path, GalerkinModel, GalerkinState, PathRecord, RecordOptions};
use crate::harness::sampler::InitialSampler;
use crate::rng::{CounterWiener, WienerSource};

/// One path from the sampler and the counter-based Wiener source for `seed`.
pub fn simulate_path(
    model: &GalerkinModel,
    sampler: &InitialSampler,
    wiener: &dyn WienerSource,
    seed: u64,
    path: u64,
    opts: RecordOptions,
) -> PathRecord {
    let (rho, u) = sampler.sample(model, seed, path);
    run_path(model, GalerkinState::new(rho, u), wiener, path, opts)
}

/// Runs `paths` paths on `workers` threads and reduces each with `reduce`;
/// results come back in path order.
pub fn run_ensemble<T, F>(
    model: &GalerkinModel,
    sampler: &InitialSampler,
    seed: u64,
    paths: usize,
    workers: usize,
    opts: RecordOptions,
    reduce: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(PathRecord) -> T + Sync,
{
    let wiener = CounterWiener { seed, k: model.noise().k };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| {
        (0..paths as u64)
            .into_par_iter()
            .map(|p| reduce(simulate_path(model, sampler, &wiener, seed, p, opts)))
            .collect()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galerkin::SimConfig;

    #[test]
    fn worker_count_does_not_matter() {
        let model = GalerkinModel::new(SimConfig { m: 8, cutoff: 1, t_end: 0.02, dt: 5e-3, ..SimConfig::default() }).unwrap();
        let s = InitialSampler::default();
        let f = |r: PathRecord| (r.path, r.final_state.u.clone(), r.final_state.rho.values().to_vec());
        let a = run_ensemble(&model, &s, 3, 6, 1, RecordOptions::summary(), f).unwrap();
        let b = run_ensemble(&model, &s, 3, 6, 4, RecordOptions::summary(), f).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.iter().map(|x| x.0).collect::<Vec<_>>(), (0..6).collect::<Vec<_>>());
    }
}
