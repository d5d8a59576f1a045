use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use maxspec::experiments::{run_coverage, CoverageSpec};
use maxspec::rng::stream_rng;
use maxspec::*;

const MODES: [Execution; 2] = [Execution::Parallel, Execution::Sequential];

fn montecarlo_interval(c: &mut Criterion) {
    let model = Model::MaxAr1Frechet {
        alpha: 1.5,
        phi: 0.5,
    };
    let series = model.generate(1 << 15, &mut stream_rng(1, 0)).unwrap();
    let spectrum = MaxSpectrum::from_series(&series).unwrap();
    let cov = CovarianceModel::default_for(15).unwrap();
    let est = estimate(
        &spectrum,
        ScaleRange::new(6, 15).unwrap(),
        Method::Gls,
        &cov,
    )
    .unwrap();

    let mut group = c.benchmark_group("montecarlo_ci");
    group.sample_size(10);
    for exec in MODES {
        let cfg = McCiConfig {
            exec,
            ..McCiConfig::new(0.95, 7)
        };
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("{exec:?}")),
            &cfg,
            |b, cfg| b.iter(|| montecarlo_ci(black_box(&est), cfg).unwrap()),
        );
    }
    group.finish();
}

fn coverage(c: &mut Criterion) {
    let mut group = c.benchmark_group("coverage");
    group.sample_size(10);
    for exec in MODES {
        let spec = CoverageSpec {
            model: Model::MaxAr1Frechet {
                alpha: 1.5,
                phi: 0.0,
            },
            n: 1 << 14,
            phis: vec![0.5],
            j1: vec![5, 8],
            j2: None,
            ci: CiKind::Asymptotic,
            levels: vec![0.95],
            method: Method::Gls,
            reps: 200,
            mc_reps: 1000,
            seed: 3,
            exec,
        };
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("{exec:?}")),
            &spec,
            |b, spec| b.iter(|| run_coverage(spec).unwrap()),
        );
    }
    group.finish();
}

fn spectrum(c: &mut Criterion) {
    let series = Model::IidPareto { alpha: 1.5 }
        .generate(1 << 20, &mut stream_rng(2, 0))
        .unwrap();
    let mut group = c.benchmark_group("spectrum");
    group.bench_function("batch", |b| {
        b.iter(|| MaxSpectrum::from_series(black_box(&series)).unwrap())
    });
    group.bench_function("streaming", |b| {
        b.iter(|| {
            let mut s = StreamState::new();
            s.extend(black_box(&series).iter().copied()).unwrap();
            s.finalize().unwrap()
        })
    });
    group.finish();
}

criterion_group!(benches, montecarlo_interval, coverage, spectrum);
criterion_main!(benches);
