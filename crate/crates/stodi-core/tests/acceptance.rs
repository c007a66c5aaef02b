//! Acceptance suite: one test per criterion, each printing a pass line
//! (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! The optimizer criteria are comparative (same seeds, same noise streams,
//! identical settings across the algorithms or metrics under comparison);
//! the numeric criteria pin absolute tolerances.

mod common;

use std::collections::HashMap;
use std::f64::consts::PI;

use common::{endpoint_matched_pair, random_path, rng};
use nalgebra::{DMatrix, DVector, Vector3};
use num_complex::Complex64;
use rand::prelude::*;

use stodi_core::costs::{CostSpec, MetricKind};
use stodi_core::denoise::{apply_filter, FilterKind, FilterSpec};
use stodi_core::experiment::{
    clean_shape, generate_demo, initial_trajectory, iterations_to_threshold, DemoShape,
    DEFAULT_DEMO_CENTER,
};
use stodi_core::kinematics::{fk_point, ik_point, KinematicChain, NUM_JOINTS};
use stodi_core::metrics::{dft2, dtw, mseps, mses, spectral_cross_term, zero_pad_pair, DtwConfig};
use stodi_core::optimizer::{run, stomp_step, AlgoKind, StodiConfig, Traces};
use stodi_core::sampler::{derive_seed, sample_noise};
use stodi_core::trajectory::{build_precision_matrix, CartesianPath, JointTrajectory};

/// Criterion 1: Parseval, cross-Parseval, and the two DTW upper bounds on
/// 100 random endpoint-matched pairs (lengths 8..=128) after zero-padding,
/// within 1e-9 absolute slack.
#[test]
fn criterion_1_lemma_suite() {
    let mut r = rng(101);
    let cfg = DtwConfig::default();
    for _ in 0..100 {
        let len_a = r.random_range(8..=128usize);
        let len_b = r.random_range(8..=128usize);
        let (a, b) = endpoint_matched_pair(&mut r, len_a, len_b);
        let (pa, pb) = zero_pad_pair(&a, &b);
        let fa = dft2(&pa);
        let fb = dft2(&pb);

        // (a) Parseval
        assert!((fa.total_energy() - pa.energy()).abs() < 1e-9);
        assert!((fb.total_energy() - pb.energy()).abs() < 1e-9);

        // (b) cross-Parseval: sum x*y == (1/3N) Re sum X conj(Y)
        let time_cross: f64 = pa
            .points()
            .iter()
            .zip(pb.points().iter())
            .map(|(x, y)| x * y)
            .sum();
        let freq_cross: Complex64 = fa
            .bins()
            .iter()
            .zip(fb.bins().iter())
            .map(|(x, y)| x * y.conj())
            .sum();
        let freq_cross = freq_cross / (3.0 * pa.len() as f64);
        assert!((time_cross - freq_cross.re).abs() < 1e-9);
        assert!(freq_cross.im.abs() < 1e-9);

        // (c) DTW <= MSES
        let d = dtw(&pa, &pb, &cfg).unwrap();
        let m = mses(&fa, &fb).unwrap();
        assert!(d <= m + 1e-9, "dtw {d} exceeds mses {m}");

        // (d) DTW <= MSEPS + cross term, cross term >= -1e-9
        let p = mseps(&fa, &fb).unwrap();
        let c = spectral_cross_term(&fa, &fb).unwrap();
        assert!(c >= -1e-9, "cross term {c} below zero");
        assert!(d <= p + c + 1e-9, "dtw {d} exceeds mseps {p} + cross {c}");
    }
    println!("criterion 1 (lemma suite): PASS");
}

/// Criterion 2: the fast 2-D transform matches the brute-force double sum
/// within 1e-9 on 20 random paths up to N = 64.
#[test]
fn criterion_2_dft_oracle() {
    fn dft2_brute(a: &CartesianPath) -> DMatrix<Complex64> {
        let n = a.len();
        let mut out = DMatrix::from_element(n, 3, Complex64::new(0.0, 0.0));
        for v in 0..n {
            for w in 0..3 {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    for axis in 0..3 {
                        let ang = -2.0 * PI * (v as f64) * (k as f64) / n as f64
                            - 2.0 * PI * (w as f64) * (axis as f64) / 3.0;
                        acc += a.points()[(k, axis)] * Complex64::new(ang.cos(), ang.sin());
                    }
                }
                out[(v, w)] = acc;
            }
        }
        out
    }

    let mut r = rng(202);
    for _ in 0..20 {
        let len = r.random_range(1..=64usize);
        let a = random_path(&mut r, len);
        let fast = dft2(&a);
        let brute = dft2_brute(&a);
        for v in 0..len {
            for w in 0..3 {
                let err = (fast.bins()[(v, w)] - brute[(v, w)]).norm();
                assert!(err < 1e-9, "bin ({v},{w}) off by {err} at N={len}");
            }
        }
    }
    println!("criterion 2 (dft brute-force oracle): PASS");
}

/// Criterion 3: the iterative DTW matches an independent recursive-memoized
/// implementation exactly on 50 random pairs with lengths <= 20.
#[test]
fn criterion_3_dtw_oracle() {
    fn dtw_recursive(a: &CartesianPath, b: &CartesianPath) -> f64 {
        fn solve(
            a: &CartesianPath,
            b: &CartesianPath,
            i: usize,
            j: usize,
            memo: &mut HashMap<(usize, usize), f64>,
        ) -> f64 {
            if i == 0 && j == 0 {
                return 0.0;
            }
            if i == 0 || j == 0 {
                return f64::INFINITY;
            }
            if let Some(&v) = memo.get(&(i, j)) {
                return v;
            }
            let cost = a.sq_dist(i - 1, b, j - 1);
            let up = solve(a, b, i - 1, j, memo);
            let left = solve(a, b, i, j - 1, memo);
            let diag = solve(a, b, i - 1, j - 1, memo);
            let v = cost + f64::min(f64::min(up, left), diag);
            memo.insert((i, j), v);
            v
        }
        let mut memo = HashMap::new();
        solve(a, b, a.len(), b.len(), &mut memo)
    }

    let mut r = rng(303);
    let cfg = DtwConfig::default();
    for _ in 0..50 {
        let len_a = r.random_range(1..=20usize);
        let len_b = r.random_range(1..=20usize);
        let a = random_path(&mut r, len_a);
        let b = random_path(&mut r, len_b);
        let fast = dtw(&a, &b, &cfg).unwrap();
        let slow = dtw_recursive(&a, &b);
        assert_eq!(
            fast.to_bits(),
            slow.to_bits(),
            "dtw {fast} != oracle {slow}"
        );
    }
    println!("criterion 3 (dtw recursive oracle): PASS");
}

/// Criterion 4: the empirical covariance of 20,000 interior-column samples
/// matches R^-1 within 5% relative error on its dominant entries.
#[test]
fn criterion_4_sampler_statistics() {
    let r = build_precision_matrix(8, 1.0).unwrap();
    let n_int = r.interior_len();
    let samples = 20_000;
    let batch = sample_noise(&r, samples, 1, 424_242, 1.0).unwrap();

    let mut cov = DMatrix::<f64>::zeros(n_int, n_int);
    for eps in batch.iter() {
        let col = DVector::from_fn(n_int, |i, _| eps[(i + 1, 0)]);
        cov += &col * col.transpose();
    }
    cov /= samples as f64;

    let rinv = r.r_inv();
    let max_abs = rinv.abs().max();
    let mut checked = 0;
    for i in 0..n_int {
        for j in 0..n_int {
            let expect = rinv[(i, j)];
            if expect.abs() > 0.01 * max_abs {
                checked += 1;
                let rel = (cov[(i, j)] - expect).abs() / expect.abs();
                assert!(
                    rel < 0.05,
                    "covariance ({i},{j}) rel error {rel:.4} (got {}, want {expect})",
                    cov[(i, j)]
                );
            }
        }
    }
    assert!(checked > 0);
    println!("criterion 4 (sampler covariance, {checked} entries): PASS");
}

const EXP_N: usize = 32;
const EXP_DT: f64 = 0.1;
const EXP_K: usize = 20;
const EXP_REUSE: usize = 10;
const EXP_NOISE: f64 = 0.3;

fn comparison_setup(
    shape: DemoShape,
    lambda: f64,
) -> (
    KinematicChain,
    stodi_core::trajectory::PrecisionMatrix,
    JointTrajectory,
    CostSpec,
) {
    let chain = KinematicChain::panda();
    let r = build_precision_matrix(EXP_N, EXP_DT).unwrap();
    let demo = clean_shape(shape, EXP_N, 0.15, DEFAULT_DEMO_CENTER).unwrap();
    let initial = initial_trajectory(&chain, &demo, EXP_N, EXP_DT).unwrap();
    let spec = CostSpec::imitation_only(MetricKind::Dtw, demo, lambda);
    (chain, r, initial, spec)
}

/// Criterion 5: over 10 seeds on an imitation-only DTW cost (N = 32,
/// K = 20, 300 iterations), the STODI best-cost trace is non-increasing for
/// every seed and STODI's final cost beats STOMP's best-so-far in at least
/// 8 of 10 seeds under identical settings and shared noise streams.
#[test]
fn criterion_5_stodi_monotonicity_and_stability() {
    let (chain, r, initial, spec) = comparison_setup(DemoShape::Semicircle, 0.001);
    let mut wins = 0;
    for seed in 1..=10u64 {
        let cfg = StodiConfig {
            rollouts: EXP_K,
            reuse_size: EXP_REUSE,
            max_iters: 300,
            convergence: None,
            p_refresh_period: 10,
            seed,
            noise_scale: EXP_NOISE,
            ..StodiConfig::default()
        };
        let stodi = run(&initial, &cfg, &spec, &r, &chain, AlgoKind::Stodi).unwrap();
        let stomp = run(&initial, &cfg, &spec, &r, &chain, AlgoKind::Stomp).unwrap();

        let trace = stodi.traces.tracked();
        assert_eq!(trace.len(), 300);
        for w in trace.windows(2) {
            assert!(
                w[1] <= w[0],
                "seed {seed}: q_b increased {} -> {}",
                w[0],
                w[1]
            );
        }
        if stodi.final_cost <= stomp.final_cost {
            wins += 1;
        }
    }
    assert!(wins >= 8, "stodi won only {wins}/10 seeds");
    println!("criterion 5 (stodi monotone, beats stomp {wins}/10): PASS");
}

/// Criterion 6: with the reuse set disabled (n = 0) and identical seeds, the
/// STODI inner update reproduces iterated stomp_step bit-for-bit over 50
/// iterations.
#[test]
fn criterion_6_reduction_equivalence() {
    let (chain, r, initial, spec) = comparison_setup(DemoShape::Semicircle, 0.001);
    let cfg = StodiConfig {
        rollouts: EXP_K,
        reuse_size: 0,
        max_iters: 50,
        convergence: None,
        p_refresh_period: 10,
        seed: 7,
        noise_scale: EXP_NOISE,
        ..StodiConfig::default()
    };
    let stodi = run(&initial, &cfg, &spec, &r, &chain, AlgoKind::Stodi).unwrap();

    let mut theta = initial.clone();
    let mut manual = Vec::new();
    for iter in 0..50u64 {
        let batch = sample_noise(
            &r,
            cfg.rollouts,
            NUM_JOINTS,
            derive_seed(cfg.seed, iter),
            cfg.noise_scale,
        )
        .unwrap();
        let (next, q) = stomp_step(&theta, &batch, &spec, &r, &chain).unwrap();
        theta = next;
        manual.push(q);
    }

    match &stodi.traces {
        Traces::Stodi { q_d, .. } => {
            for (i, (a, b)) in q_d.iter().zip(&manual).enumerate() {
                assert_eq!(a.to_bits(), b.to_bits(), "iterate {i}: {a} != {b}");
            }
        }
        _ => unreachable!(),
    }
    let a = stodi.last_iterate.points();
    let b = theta.points();
    for (x, y) in a.iter().zip(b.iter()) {
        assert_eq!(x.to_bits(), y.to_bits());
    }
    println!("criterion 6 (n=0 reduction bit-exact over 50 iterations): PASS");
}

/// Criterion 7: with identical settings over 10 seeds on a periodic demo,
/// the median iterations-to-110%-of-final for MSEPS is at most that of MSES
/// and of DTW.
#[test]
fn criterion_7_metric_convergence_ordering() {
    let chain = KinematicChain::panda();
    let r = build_precision_matrix(EXP_N, EXP_DT).unwrap();
    let demo = clean_shape(DemoShape::Circle, EXP_N, 0.15, DEFAULT_DEMO_CENTER).unwrap();
    let initial = initial_trajectory(&chain, &demo, EXP_N, EXP_DT).unwrap();

    let median_iters = |metric: MetricKind| -> usize {
        let spec = CostSpec::imitation_only(metric, demo.clone(), 0.01);
        let mut iters: Vec<usize> = (1..=10u64)
            .map(|seed| {
                let cfg = StodiConfig {
                    rollouts: EXP_K,
                    reuse_size: EXP_REUSE,
                    max_iters: 500,
                    convergence: None,
                    p_refresh_period: 10,
                    seed,
                    noise_scale: EXP_NOISE,
                    ..StodiConfig::default()
                };
                let res = run(&initial, &cfg, &spec, &r, &chain, AlgoKind::Stodi).unwrap();
                iterations_to_threshold(res.traces.tracked(), 1.1)
            })
            .collect();
        iters.sort_unstable();
        iters[5]
    };

    let dtw_med = median_iters(MetricKind::Dtw);
    let mses_med = median_iters(MetricKind::Mses);
    let mseps_med = median_iters(MetricKind::Mseps);
    println!(
        "criterion 7 medians (iterations to 110% of final): dtw {dtw_med}, mses {mses_med}, mseps {mseps_med}"
    );
    assert!(
        mseps_med <= mses_med,
        "mseps median {mseps_med} exceeds mses median {mses_med}"
    );
    assert!(
        mseps_med <= dtw_med,
        "mseps median {mseps_med} exceeds dtw median {dtw_med}"
    );
    println!("criterion 7 (mseps converges fastest): PASS");
}

/// Criterion 8: fixed-seed denoising improvements at gamma = 20 with
/// per-point noise of standard deviation 0.1: full-spectrum scaling improves
/// a noisy line, gain control improves a noisy circle, and back-stitched
/// gain control beats plain gain control on the open semicircle and M shapes.
#[test]
fn criterion_8_denoising_improvement() {
    let gamma = 20.0;
    let noise_std = 0.1;
    let seed = 42;

    let scale = FilterSpec {
        kind: FilterKind::Scale,
        gamma,
        anchor: true,
    };
    let gain = FilterSpec {
        kind: FilterKind::GainControl,
        gamma,
        anchor: true,
    };
    let stitch = FilterSpec {
        kind: FilterKind::BackstitchGainControl,
        gamma,
        anchor: true,
    };

    // scale on a noisy line
    let clean = clean_shape(DemoShape::Line, 128, 0.6, DEFAULT_DEMO_CENTER).unwrap();
    let noisy = generate_demo(
        DemoShape::Line,
        128,
        0.6,
        DEFAULT_DEMO_CENTER,
        noise_std,
        seed,
    )
    .unwrap();
    let noisy_rmse = noisy.rmse(&clean).unwrap();
    let scaled_rmse = apply_filter(&noisy, &scale).unwrap().rmse(&clean).unwrap();
    assert!(
        scaled_rmse < noisy_rmse,
        "scale on line: {scaled_rmse} !< {noisy_rmse}"
    );

    // gain on a noisy circle
    let clean = clean_shape(DemoShape::Circle, 128, 0.5, DEFAULT_DEMO_CENTER).unwrap();
    let noisy = generate_demo(
        DemoShape::Circle,
        128,
        0.5,
        DEFAULT_DEMO_CENTER,
        noise_std,
        seed,
    )
    .unwrap();
    let noisy_rmse = noisy.rmse(&clean).unwrap();
    let gained_rmse = apply_filter(&noisy, &gain).unwrap().rmse(&clean).unwrap();
    assert!(
        gained_rmse < noisy_rmse,
        "gain on circle: {gained_rmse} !< {noisy_rmse}"
    );

    // back-stitching beats plain gain on the open shapes
    for shape in [DemoShape::Semicircle, DemoShape::MShape] {
        let clean = clean_shape(shape, 256, 1.0, DEFAULT_DEMO_CENTER).unwrap();
        let noisy = generate_demo(shape, 256, 1.0, DEFAULT_DEMO_CENTER, noise_std, seed).unwrap();
        let plain_rmse = apply_filter(&noisy, &gain).unwrap().rmse(&clean).unwrap();
        let stitched_rmse = apply_filter(&noisy, &stitch).unwrap().rmse(&clean).unwrap();
        assert!(
            stitched_rmse < plain_rmse,
            "{shape:?}: backstitch {stitched_rmse} !< plain {plain_rmse}"
        );
    }
    println!("criterion 8 (denoising improvements): PASS");
}

/// Criterion 9: IK round trip within 1e-4 m on 100 random reachable targets,
/// and the FK regression anchors stable to 1e-12.
#[test]
fn criterion_9_kinematics() {
    let chain = KinematicChain::panda();

    // anchors: home pose derived by hand once, plus one frozen regression pose
    let home = fk_point(&chain, &[0.0; 7]);
    assert!((home.x - 0.088).abs() < 1e-12);
    assert!(home.y.abs() < 1e-12);
    assert!((home.z - 0.926).abs() < 1e-12);

    let q_anchor = [0.3, -0.7, 0.25, -1.9, 0.5, 1.6, -0.4];
    let p_anchor = fk_point(&chain, &q_anchor);
    assert!((p_anchor.x - 0.217_893_818_256_325_87).abs() < 1e-12);
    assert!((p_anchor.y - 0.255_187_617_224_499_95).abs() < 1e-12);
    assert!((p_anchor.z - 0.772_928_840_112_582_8).abs() < 1e-12);

    let mut r = rng(909);
    let seed_q = [0.0, -0.3, 0.0, -2.2, 0.0, 2.0, 0.8];
    let mut solved = 0;
    while solved < 100 {
        let mut q = [0.0; NUM_JOINTS];
        for (slot, (lo, hi)) in q.iter_mut().zip(chain.joint_limits()) {
            *slot = r.random_range(*lo..*hi);
        }
        let target = fk_point(&chain, &q);
        if target.z < 0.05 || target.norm() < 0.25 {
            continue;
        }
        let sol = ik_point(&chain, &target, &seed_q).unwrap();
        let residual = (fk_point(&chain, &sol) - Vector3::from(target)).norm();
        assert!(residual < 1e-4, "target {target:?}: residual {residual}");
        solved += 1;
    }
    println!("criterion 9 (ik round trip on {solved} targets, fk anchors): PASS");
}
