use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use effham_bench::{bump_field, six_channels, unit_shell};
use effham_core::focksim::{
    discrete_bare_mass, dressed_density, fiber_hamiltonian, truncated_ground_energy, FockBasis, MomentumWavefunction,
    OverlapKernel, PhaseSpaceGrid,
};
use effham_core::potentials::{gauss_kernel_convolve, ConvolutionMethod};
use effham_core::{
    build_hamiltonian, field_moment, low_spectrum, GridSpec, HamiltonianOptions, PhysicalParams, PotentialSpec,
};
use std::hint::black_box;

fn moments(c: &mut Criterion) {
    let field = unit_shell(3);
    c.bench_function("field_moment_i3", |b| {
        b.iter(|| field_moment(black_box(&field), 3).unwrap())
    });
}

fn smoothing(c: &mut Criterion) {
    let mut g = c.benchmark_group("heat_kernel_3d");
    for n in [32, 64] {
        let field = bump_field(n);
        let h = 8.0 / (n - 1) as f64;
        g.bench_with_input(BenchmarkId::new("fft", n), &field, |b, f| {
            b.iter(|| gauss_kernel_convolve(f, 0.05, h, ConvolutionMethod::Fft).unwrap())
        });
    }
    g.finish();
}

fn spectra(c: &mut Criterion) {
    let params = PhysicalParams::natural(3);
    let v = PotentialSpec::coulomb(1.0).unwrap().into();
    let grid = GridSpec::radial(40.0, 4001).unwrap();
    let h = build_hamiltonian(&v, &grid, 1.0, &params, HamiltonianOptions::default()).unwrap();
    c.bench_function("radial_coulomb_4_levels", |b| b.iter(|| low_spectrum(&h, 4).unwrap()));

    let params2 = PhysicalParams::natural(2);
    let v2 = PotentialSpec::harmonic(2, 1.0).unwrap().into();
    let box2 = GridSpec::box_grid(2, 6.0, 96).unwrap();
    let h2 = build_hamiltonian(&v2, &box2, 1.0, &params2, HamiltonianOptions::default()).unwrap();
    c.bench_function("box_2d_harmonic_3_levels", |b| b.iter(|| low_spectrum(&h2, 3).unwrap()));
}

fn fiber(c: &mut Criterion) {
    let (modes, params) = six_channels(1.2);
    let m0 = discrete_bare_mass(&modes, &params);
    let basis = FockBasis::new(modes.channel_count(), 8).unwrap();
    let p = [0.3, -0.4];
    c.bench_function("fiber_assemble_n8", |b| {
        b.iter(|| fiber_hamiltonian(&modes, &basis, black_box(&p), &params, m0).unwrap())
    });
    let h = fiber_hamiltonian(&modes, &basis, &p, &params, m0).unwrap();
    c.bench_function("fiber_ground_n8", |b| b.iter(|| truncated_ground_energy(&h).unwrap()));
}

fn dressed(c: &mut Criterion) {
    let grid = PhaseSpaceGrid::new(3, 32, 16.0, 1.0).unwrap();
    let psi = MomentumWavefunction::gaussian(grid, 1.0).unwrap();
    let kernel = OverlapKernel::Continuum { a: 0.01 };
    c.bench_function("dressed_density_32cubed", |b| b.iter(|| dressed_density(&psi, &kernel)));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = moments, smoothing, spectra, fiber, dressed
}
criterion_main!(benches);
