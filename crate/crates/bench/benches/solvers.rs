use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use ptflat_core::lattice::{build_gain_loss_profile, build_unit_cell};
use ptflat_core::{
    band_structure, build_ribbon, eigenpairs, eigenvalues, propagate, scan_rho, Boundary, LatticeKind,
    ScanOptions, StateVector,
};

fn lieb_ribbon(rho: f64, cells: usize, boundary: Boundary) -> ptflat_core::RibbonHamiltonian {
    let kind = LatticeKind::Lieb;
    build_ribbon(&build_unit_cell(kind), &build_gain_loss_profile(kind), rho, cells, boundary).unwrap()
}

fn eigen(c: &mut Criterion) {
    let mut group = c.benchmark_group("eigenvalues");
    group.sample_size(10);
    // 40 and 100 cells give 200 and 500 sites.
    for cells in [40, 100] {
        let h = lieb_ribbon(1.0, cells, Boundary::Open);
        group.bench_with_input(BenchmarkId::from_parameter(h.dim()), &h, |b, h| {
            b.iter(|| eigenvalues(black_box(h.matrix())).unwrap())
        });
    }
    group.finish();

    let h = lieb_ribbon(1.0, 40, Boundary::Open);
    c.bench_function("eigenpairs/200", |b| b.iter(|| eigenpairs(black_box(h.matrix())).unwrap()));
}

fn bands(c: &mut Criterion) {
    for kind in LatticeKind::ALL {
        let cell = build_unit_cell(kind);
        let profile = ptflat_core::GainLossProfile::neutral();
        c.bench_function(&format!("band_structure/{kind}/256"), |b| {
            b.iter(|| band_structure(&cell, &profile, black_box(0.0), 256).unwrap())
        });
    }
}

fn scan(c: &mut Criterion) {
    let kind = LatticeKind::Lieb;
    let (cell, profile) = (build_unit_cell(kind), build_gain_loss_profile(kind));
    let grid: Vec<f64> = (0..=30).map(|i| 0.1 * i as f64).collect();
    let mut group = c.benchmark_group("scan_rho");
    group.sample_size(10);
    group.bench_function("lieb/40 cells/31 points", |b| {
        b.iter(|| scan_rho(&cell, &profile, 40, Boundary::Open, black_box(&grid), &ScanOptions::default()).unwrap())
    });
    group.finish();
}

fn dynamics(c: &mut Criterion) {
    let h = lieb_ribbon(0.5, 40, Boundary::Open);
    let c0 = StateVector::random(h.dim(), 1);
    let mut group = c.benchmark_group("propagate");
    group.sample_size(10);
    group.bench_function("lieb/200 sites/1000 steps", |b| {
        b.iter(|| propagate(&h, black_box(&c0), 1.0, 0.001).unwrap())
    });
    group.finish();
}

criterion_group!(benches, eigen, bands, scan, dynamics);
criterion_main!(benches);
