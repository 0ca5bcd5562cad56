use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use scns_bench::{model, state};
use scns_core::mass::assemble_m;
use scns_core::spectral::{ops, Spectrum};

fn spectral(c: &mut Criterion) {
    let m = model(32, 2);
    let rho = state(&m).rho;
    c.bench_function("fft 32x32 forward+inverse", |b| b.iter(|| Spectrum::from_field(black_box(&rho)).to_field()));
    c.bench_function("inv_laplacian_grad 32x32", |b| b.iter(|| ops::inv_laplacian_grad(black_box(&rho))));
}

fn mass(c: &mut Criterion) {
    for cutoff in [2, 3] {
        let m = model(16, cutoff);
        let s = state(&m);
        c.bench_function(&format!("assemble M + sqrt, cutoff {cutoff}"), |b| {
            b.iter(|| assemble_m(black_box(&s.rho), m.basis()).map(|mm| mm.sqrt()))
        });
    }
}

fn stepping(c: &mut Criterion) {
    let m = model(16, 2);
    let s = state(&m);
    let dw = vec![0.01; m.noise().k];
    c.bench_function("EM step d=2 m=16 cutoff 2", |b| b.iter(|| m.step_em(black_box(&s), &dw, 1e-3)));
    let mass = m.mass(&s.rho).unwrap();
    c.bench_function("noise coefficients", |b| b.iter(|| m.phi_n(black_box(&s.rho), &s.u, &mass)));
}

criterion_group!(benches, spectral, mass, stepping);
criterion_main!(benches);
