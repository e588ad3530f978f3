use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use elicit_core::distributions::BeliefDistribution;
use elicit_core::elicitation::Scheme;
use elicit_core::hierarchical::{
    fit_mle, quantify_opposite_share, sample_population, HyperParams, ModeDataset,
};
use elicit_core::identification::{estimate, simulate_experiment, ExperimentConfig, Regressor};
use elicit_core::special::reg_inc_beta;
use elicit_core::stylized::{default_groups, default_signal, run_stylized};
use elicit_core::BinomialSignal;

fn special(c: &mut Criterion) {
    c.bench_function("reg_inc_beta small shapes", |b| {
        b.iter(|| reg_inc_beta(black_box(1.5), black_box(4.0), black_box(0.17)))
    });
    c.bench_function("reg_inc_beta large shapes", |b| {
        b.iter(|| reg_inc_beta(black_box(211.28), black_box(1028.22), black_box(0.17)))
    });
}

fn reports(c: &mut Criterion) {
    let beta = BeliefDistribution::beta(1.5, 4.0).unwrap();
    let discrete: BeliefDistribution = default_groups()[0].beliefs.clone().into();
    let window = Scheme::window(0.02, 1.0).unwrap();
    let quad = Scheme::quadratic(1.0, 2.0).unwrap();
    c.bench_function("window report, Beta(1.5, 4)", |b| {
        b.iter(|| window.optimal_report(black_box(&beta)))
    });
    c.bench_function("window report, discrete", |b| {
        b.iter(|| window.optimal_report(black_box(&discrete)))
    });
    c.bench_function("quadratic report, Beta(1.5, 4)", |b| {
        b.iter(|| quad.optimal_report(black_box(&beta)))
    });
    c.bench_function("stylized table", |b| {
        b.iter(|| run_stylized(&default_groups(), &default_signal()))
    });
}

fn population(c: &mut Criterion) {
    let mut g = c.benchmark_group("population");
    g.sample_size(10);
    let sig = BinomialSignal::new(0.17, 1234).unwrap();
    let h = HyperParams::treatment_rounded();
    g.bench_function("quantify R=100000", |b| {
        b.iter(|| quantify_opposite_share(h, &sig, 0.02, 100_000, 0))
    });
    let modes: Vec<f64> = sample_population(h, 100_000, 1)
        .unwrap()
        .iter()
        .map(|b| (b.alpha() - 1.0) / (b.alpha() + b.beta() - 2.0))
        .collect();
    let data = ModeDataset::new(modes).unwrap();
    g.bench_function("fit_mle n=100000", |b| b.iter(|| fit_mle(black_box(&data))));
    let cfg = ExperimentConfig::stylized(Scheme::window(0.02, 1.0).unwrap(), 3);
    g.bench_function("identify stylized 1000 agents", |b| {
        b.iter(|| estimate(&simulate_experiment(&cfg).unwrap(), Regressor::ReportChange))
    });
    g.finish();
}

criterion_group!(benches, special, reports, population);
criterion_main!(benches);
