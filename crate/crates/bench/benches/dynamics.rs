use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use spinchain_core::*;

fn eigendecomposition(c: &mut Criterion) {
    let mut group = c.benchmark_group("eigendecompose");
    group.sample_size(10);
    for n in [8, 12, 15] {
        let basis = Arc::new(enumerate_basis(n, 2).unwrap());
        let h = build_base(basis, &pst_couplings(n, 1.0).unwrap()).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &h, |b, h| b.iter(|| eigendecompose(h).unwrap()));
    }
    group.finish();
}

fn probe_ensemble(c: &mut Criterion) {
    let mut group = c.benchmark_group("probe_ensemble");
    group.sample_size(10);
    for n in [10, 15] {
        let config = ExperimentConfig::new(n, InputKind::TypeI)
            .with_perturbation(PerturbationSpec { chi: 0.03, seed: 1, ..Default::default() })
            .with_realisations(20);
        let experiment = Experiment::new(config).unwrap();
        let probe = Probe::for_input(InputKind::TypeI, n, ProbeTime::FirstRevival);
        group.bench_function(BenchmarkId::from_parameter(n), |b| b.iter(|| experiment.probe_all(&probe).unwrap()));
    }
    group.finish();
}

fn partial_trace(c: &mut Criterion) {
    let n = 15;
    let basis = Arc::new(enumerate_basis(n, 2).unwrap());
    let profile = pst_couplings(n, 1.0).unwrap();
    let spectrum = eigendecompose(&build_base(basis.clone(), &profile).unwrap()).unwrap();
    let psi = spectrum.evolve(&make_input_state(basis, InputKind::TypeIII).unwrap(), 0.7).unwrap();
    c.bench_function("reduced_density_two_qubit/15", |b| {
        b.iter(|| eof(&reduced_density_two_qubit(&psi, 1, n).unwrap()))
    });
}

fn trajectory(c: &mut Criterion) {
    let config = ExperimentConfig::new(10, InputKind::TypeII)
        .with_perturbation(PerturbationSpec { chi: 0.03, seed: 1, ..Default::default() });
    let experiment = Experiment::new(config).unwrap();
    c.bench_function("run_realization/10x801", |b| b.iter(|| experiment.run_realization(0).unwrap()));
}

criterion_group!(benches, eigendecomposition, probe_ensemble, partial_trace, trajectory);
criterion_main!(benches);
