//! Benchmarks for the kernels every experiment leans on: Floquet assembly
//! and diagonalization, split-step propagation, transfer-matrix assembly,
//! grid correlations, Weyl quantization and ensemble spectra.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use spectramix::eig::hermitian_eigensystem;
use spectramix::maps::{mixing_correlation, GridMask, MapSpec};
use spectramix::qkr::{build_floquet, floquet_eigensystem, momentum_eigenstate, propagate, QkrConfig};
use spectramix::rmt::{sample_ensemble, unfold_spectrum, EnsembleKind, UnfoldMethod};
use spectramix::ulam::ulam_transfer_matrix;
use spectramix::wigner::{moyal_defect, weyl_quantize, PhaseGrid};
use spectramix::{seeded_rng, C64};

fn floquet(c: &mut Criterion) {
    let mut group = c.benchmark_group("floquet");
    group.sample_size(10);
    for n in [128usize, 256] {
        let config = QkrConfig::new(n, 10.0, 1.0, 0.25).unwrap();
        group.bench_with_input(BenchmarkId::new("build", n), &config, |b, config| {
            b.iter(|| build_floquet(config).unwrap())
        });
        let f = build_floquet(&config).unwrap();
        group.bench_with_input(BenchmarkId::new("eigensystem", n), &f, |b, f| {
            b.iter(|| floquet_eigensystem(f).unwrap())
        });
    }
    group.finish();
}

fn split_step(c: &mut Criterion) {
    let config = QkrConfig::new(512, 10.0, 1.0, 0.25).unwrap();
    let psi = momentum_eigenstate(512, 0).unwrap();
    c.bench_function("propagate/512 sites x 100 kicks", |b| {
        b.iter(|| propagate(&config, &psi, 100).unwrap())
    });
}

fn transfer_matrix(c: &mut Criterion) {
    let mut group = c.benchmark_group("ulam");
    for cells in [32usize, 64] {
        group.bench_with_input(BenchmarkId::new("cat", cells), &cells, |b, &cells| {
            b.iter(|| ulam_transfer_matrix(&MapSpec::ArnoldCat, cells, 1).unwrap())
        });
    }
    group.finish();
}

fn grid_correlation(c: &mut Criterion) {
    let half = GridMask::from_rect(1024, 0.0, 0.5, 0.0, 1.0);
    c.bench_function("mixing/cat 1024 t=8", |b| {
        b.iter(|| mixing_correlation(&MapSpec::ArnoldCat, &half, &half, 8).unwrap())
    });
}

fn weyl(c: &mut Criterion) {
    let g = PhaseGrid::new(128, -8.0, 8.0, 0.25).unwrap();
    let gaussian = |q0: f64, p0: f64| {
        weyl_quantize(
            |q: f64, p: f64| C64::new((-(q - q0).powi(2) - (p - p0).powi(2)).exp(), 0.0),
            &g,
        )
        .unwrap()
    };
    c.bench_function("weyl/quantize 128", |b| b.iter(|| gaussian(0.5, 0.8)));
    let a = gaussian(0.5, 0.8);
    let bm = gaussian(-0.3, 0.2);
    let mut group = c.benchmark_group("weyl");
    group.sample_size(10);
    group.bench_function("moyal defect 128", |b| b.iter(|| moyal_defect(&a, &bm, &g).unwrap()));
    group.finish();
}

fn ensemble_spectrum(c: &mut Criterion) {
    let mut group = c.benchmark_group("rmt");
    group.sample_size(20);
    group.bench_function("goe spectrum 200", |b| {
        let mut rng = seeded_rng(1);
        b.iter(|| {
            let s = sample_ensemble(EnsembleKind::Goe, 200, &mut rng).unwrap();
            hermitian_eigensystem(&s.matrix).unwrap()
        })
    });
    let s = sample_ensemble(EnsembleKind::Goe, 200, &mut seeded_rng(2)).unwrap();
    let eig = hermitian_eigensystem(&s.matrix).unwrap();
    group.bench_function("unfold 200", |b| {
        b.iter(|| unfold_spectrum(&eig.values, UnfoldMethod::Semicircle).unwrap())
    });
    group.finish();
}

criterion_group!(
    kernels,
    floquet,
    split_step,
    transfer_matrix,
    grid_correlation,
    weyl,
    ensemble_spectrum
);
criterion_main!(kernels);
