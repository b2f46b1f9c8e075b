use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use sserw::dynamics::{simulate, PreparedTilt, SimulationSpec, TiltMode, TiltParams};
use sserw::hydro::{solve_heat, solve_perturbed, SpaceTimeGrid};
use sserw::ldp::{i_ex, BasisSpec};
use sserw::model::{sample_product_profile, DensityProfile, Diffusion, InitialState, LocalRate, TorusLattice};
use sserw::rng::stream;
use sserw::testfn::{TestFunctionH, TimeFunction};

fn bench_simulate(c: &mut Criterion) {
    let rates = LocalRate::intro();
    let u0 = DensityProfile::cosine(0.5, 0.25, 1, 128).unwrap();
    let t_max = 0.1;
    let mut group = c.benchmark_group("simulate");
    group.sample_size(20);
    for n in [64usize, 256] {
        let lattice = TorusLattice::new(n).unwrap();
        let spec = SimulationSpec::new(lattice, &rates, t_max);
        group.bench_with_input(BenchmarkId::new("untilted", n), &n, |b, _| {
            let mut rng = stream(1, 0);
            b.iter(|| {
                let init = InitialState::untilted(sample_product_profile(&lattice, &u0, &mut rng));
                simulate(&spec, init, &mut rng).unwrap()
            })
        });
        let tilt = TiltParams::new(
            u0.clone(),
            TestFunctionH::cosine(1, 0.2, t_max),
            TimeFunction::constant(0.3),
        );
        let prep = PreparedTilt::new(&tilt, &lattice, t_max, 1e-10).unwrap();
        let driven = spec.clone().with_tilt(TiltMode::Drive(&prep));
        group.bench_with_input(BenchmarkId::new("driven", n), &n, |b, _| {
            let mut rng = stream(2, 0);
            b.iter(|| {
                let init = InitialState::untilted(sample_product_profile(&lattice, &u0, &mut rng));
                simulate(&driven, init, &mut rng).unwrap()
            })
        });
    }
    group.finish();
}

fn bench_hydro(c: &mut Criterion) {
    let rates = LocalRate::intro();
    let u0 = DensityProfile::cosine(0.5, 0.25, 1, 256).unwrap();
    let t_max = 0.2;
    let tilt = TiltParams::new(
        u0.clone(),
        TestFunctionH::cosine(1, 0.2, t_max),
        TimeFunction::constant(0.3),
    );
    let mut group = c.benchmark_group("hydro");
    group.sample_size(20);
    for m in [128usize, 256] {
        let grid = SpaceTimeGrid::new(m, t_max, 20).unwrap();
        group.bench_with_input(BenchmarkId::new("heat", m), &grid, |b, g| {
            b.iter(|| solve_heat(&u0, Diffusion::ONE, g).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("perturbed", m), &grid, |b, g| {
            b.iter(|| solve_perturbed(&tilt, &rates, Diffusion::ONE, g).unwrap())
        });
    }
    group.finish();
}

fn bench_i_ex(c: &mut Criterion) {
    let u0 = DensityProfile::cosine(0.5, 0.25, 1, 256).unwrap();
    let mut group = c.benchmark_group("i_ex");
    group.sample_size(10);
    for frames in [20usize, 200] {
        let grid = SpaceTimeGrid::new(256, 0.2, frames).unwrap();
        let path = solve_heat(&u0, Diffusion::ONE, &grid).unwrap();
        group.bench_with_input(BenchmarkId::new("heat_path", frames), &path, |b, p| {
            b.iter(|| i_ex(p, &u0, BasisSpec::default(), Diffusion::ONE).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_simulate, bench_hydro, bench_i_ex);
criterion_main!(benches);
