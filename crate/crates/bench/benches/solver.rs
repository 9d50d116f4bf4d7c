use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use duffing_core::pipeline::{solve_coupled, solve_detector, SolveOptions};
use duffing_core::spectra::{correlation_spectral_data, symmetrized_spectrum, Operator};
use duffing_core::{build_rwa_hamiltonian, parameter_set, quasienergy_spectrum, HilbertSpace};

fn detector_steady_state(c: &mut Criterion) {
    let p = parameter_set("fig1-detector-only").unwrap();
    let mut group = c.benchmark_group("detector_steady_state");
    for n_fock in [10, 20] {
        let opts = SolveOptions::with_n_fock(n_fock);
        group.bench_with_input(BenchmarkId::from_parameter(n_fock), &opts, |b, opts| {
            b.iter(|| solve_detector(&p, opts).unwrap())
        });
    }
    group.finish();
}

fn coupled_steady_state(c: &mut Criterion) {
    let p = parameter_set("fig2-coupled").unwrap();
    let mut group = c.benchmark_group("coupled_steady_state");
    group.sample_size(10);
    for n_fock in [10, 20] {
        let opts = SolveOptions::with_n_fock(n_fock);
        group.bench_with_input(BenchmarkId::from_parameter(n_fock), &opts, |b, opts| {
            b.iter(|| solve_coupled(&p, opts).unwrap())
        });
    }
    group.finish();
}

fn quasienergies(c: &mut Criterion) {
    let p = parameter_set("fig2-coupled").unwrap();
    let space = HilbertSpace::with_qubit(20).unwrap();
    let h = build_rwa_hamiltonian(&p, space);
    c.bench_function("quasienergy_spectrum/40", |b| b.iter(|| quasienergy_spectrum(&h).unwrap()));
}

fn spectrum(c: &mut Criterion) {
    let p = parameter_set("fig1-detector-only").unwrap();
    let sol = solve_detector(&p, &SolveOptions::with_n_fock(12)).unwrap();
    let mut group = c.benchmark_group("spectrum");
    group.sample_size(10);
    group.bench_function("eigendecompose/12", |b| b.iter(|| sol.liouvillian.eigendecompose().unwrap()));
    let eig = sol.liouvillian.eigendecompose().unwrap();
    let data = correlation_spectral_data(&eig, &sol.components, &sol.steady, Operator::Chi, Operator::Chi, p.omega_ex)
        .unwrap();
    group.bench_function("evaluate_201_points", |b| {
        b.iter(|| {
            (0..201)
                .map(|k| symmetrized_spectrum(&data, &data, -1.2 + 0.012 * k as f64).unwrap())
                .sum::<f64>()
        })
    });
    group.finish();
}

criterion_group!(benches, detector_steady_state, coupled_steady_state, quasienergies, spectrum);
criterion_main!(benches);
