use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hmcsplit::{catalog, gaussian_chain, harmonic_update, hmc_run, rho_norm, HmcConfig, Integrator};

fn harmonic(c: &mut Criterion) {
    let s = catalog("MINRHO4").unwrap();
    c.bench_function("harmonic_update/MINRHO4", |b| {
        b.iter(|| harmonic_update(black_box(&s), black_box(3.1)))
    });
    let mut g = c.benchmark_group("rho_norm");
    for name in ["VV", "MINRHO2", "MINRHO4"] {
        let s = catalog(name).unwrap();
        let h_bar = s.stage_count() as f64;
        g.bench_with_input(BenchmarkId::from_parameter(name), &s, |b, s| {
            b.iter(|| rho_norm(black_box(s), h_bar))
        });
    }
    g.finish();
}

fn integrator(c: &mut Criterion) {
    let mut g = c.benchmark_group("integrator_step");
    for d in [16usize, 256] {
        let target = gaussian_chain(d);
        let s = catalog("MINRHO3").unwrap();
        g.bench_with_input(BenchmarkId::new("MINRHO3", d), &d, |b, &d| {
            let mut q = vec![0.01; d];
            let mut p = vec![0.02; d];
            let mut it = Integrator::new(&s, &target);
            it.prime(&q);
            b.iter(|| it.run(black_box(0.5 / d as f64), 1, &mut q, &mut p).unwrap())
        });
    }
    g.finish();
}

fn chain(c: &mut Criterion) {
    let target = gaussian_chain(64);
    let s = catalog("MINRHO2").unwrap();
    let config = HmcConfig::new(2.0 / 64.0, 64, 100);
    c.bench_function("hmc_chain/MINRHO2/chain64/N100", |b| {
        b.iter(|| hmc_run(black_box(&target), &s, &config).unwrap())
    });
}

criterion_group!(benches, harmonic, integrator, chain);
criterion_main!(benches);
