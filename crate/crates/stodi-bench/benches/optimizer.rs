//! Cost of the optimizer building blocks: forward kinematics over a
//! trajectory, noise batch generation, and one full STODI iteration.

use criterion::{criterion_group, criterion_main, Criterion};
use nalgebra::DMatrix;

use stodi_core::costs::{CostSpec, MetricKind};
use stodi_core::experiment::{clean_shape, DemoShape, DEFAULT_DEMO_CENTER};
use stodi_core::kinematics::{fk_path, KinematicChain};
use stodi_core::optimizer::{stodi_iteration, OptimizerState, StodiConfig};
use stodi_core::sampler::sample_noise;
use stodi_core::trajectory::{build_precision_matrix, JointTrajectory};

const N: usize = 32;
const DT: f64 = 0.1;

fn initial() -> JointTrajectory {
    let q0 = [0.2, -0.4, 0.1, -2.0, 0.0, 1.8, 0.4];
    let q1 = [0.5, -0.2, 0.3, -1.6, 0.2, 2.0, 0.6];
    let pts = DMatrix::from_fn(N, 7, |i, j| {
        let t = i as f64 / (N - 1) as f64;
        q0[j] + t * (q1[j] - q0[j])
    });
    JointTrajectory::new(pts, DT).unwrap()
}

fn bench_fk(c: &mut Criterion) {
    let chain = KinematicChain::panda();
    let traj = initial();
    c.bench_function("fk_path_32x7", |b| {
        b.iter(|| fk_path(&chain, &traj).unwrap())
    });
}

fn bench_sampling(c: &mut Criterion) {
    let r = build_precision_matrix(N, DT).unwrap();
    c.bench_function("sample_noise_k20", |b| {
        b.iter(|| sample_noise(&r, 20, 7, 1, 0.3).unwrap())
    });
}

fn bench_iteration(c: &mut Criterion) {
    let chain = KinematicChain::panda();
    let r = build_precision_matrix(N, DT).unwrap();
    let demo = clean_shape(DemoShape::Semicircle, N, 0.15, DEFAULT_DEMO_CENTER).unwrap();
    let spec = CostSpec::imitation_only(MetricKind::Dtw, demo, 0.001);
    let cfg = StodiConfig {
        rollouts: 20,
        reuse_size: 10,
        max_iters: 1,
        convergence: None,
        seed: 1,
        noise_scale: 0.3,
        ..StodiConfig::default()
    };
    c.bench_function("stodi_iteration_k20", |b| {
        b.iter_batched(
            || OptimizerState::new(initial(), &cfg, &spec, &r, &chain).unwrap(),
            |mut state| stodi_iteration(&mut state, &cfg, &spec, &r, &chain).unwrap(),
            criterion::BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, bench_fk, bench_sampling, bench_iteration);
criterion_main!(benches);
