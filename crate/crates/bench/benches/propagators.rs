use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use twomode::dynamics::{interaction_hamiltonian, BlockExact, PairPropagator, SmscPropagator};
use twomode::{AtomicLabel, Backend, FieldSpec, ModelConfig, Scenario, Scheme};

fn closed_forms(c: &mut Criterion) {
    let mut group = c.benchmark_group("closed");
    for d in [12, 24] {
        group.bench_with_input(BenchmarkId::new("smsc", d), &d, |b, &d| {
            b.iter(|| SmscPropagator::new(black_box(3.7), d).to_dense())
        });
        group.bench_with_input(BenchmarkId::new("djc_pair", d), &d, |b, &d| {
            b.iter(|| PairPropagator::new(black_box(3.7), d).to_dense())
        });
    }
    group.finish();
}

fn block_exact(c: &mut Criterion) {
    let mut group = c.benchmark_group("block_exact");
    group.sample_size(10);
    for (scheme, d) in [(Scheme::Tmsc, 12), (Scheme::Tmac, 12)] {
        let cfg = ModelConfig::new(scheme).with_cutoff(d);
        let h = interaction_hamiltonian(&cfg, d).unwrap();
        group.bench_with_input(BenchmarkId::new("diagonalize", scheme.name()), &h, |b, h| {
            b.iter(|| BlockExact::new(h).unwrap())
        });
        let exact = BlockExact::new(&h).unwrap();
        group.bench_with_input(BenchmarkId::new("propagator", scheme.name()), &exact, |b, e| {
            b.iter(|| e.propagator(black_box(3.7)))
        });
    }
    group.finish();
}

fn classification(c: &mut Criterion) {
    let mut group = c.benchmark_group("classify");
    group.sample_size(10);
    let cases = [
        ("tmsc_phi_thermal", Scheme::Tmsc, AtomicLabel::Phi, FieldSpec::Thermal { nbar: 0.3 }),
        ("tmac_ee_fock", Scheme::Tmac, AtomicLabel::Ee, FieldSpec::FockPair { n: 1, m: 0 }),
    ];
    for (name, scheme, atoms, field) in cases {
        let scenario = Scenario::new(atoms, field, ModelConfig::new(scheme).with_backend(Backend::Auto));
        group.bench_function(name, |b| b.iter(|| scenario.classify().unwrap()));
    }
    group.finish();
}

criterion_group!(benches, closed_forms, block_exact, classification);
criterion_main!(benches);
