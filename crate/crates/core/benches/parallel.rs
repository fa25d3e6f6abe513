//! Parallel vs sequential throughput on the data-parallel batch workloads:
//! policy evaluation episodes, planner fuzzing, and the Monte Carlo volume
//! estimate. The parallel path is the `parallel` feature's rayon fan-out; the
//! sequential path is the fallback implementation. Outputs are identical by
//! construction (independent seeding), which the benches assert once.

use criterion::{criterion_group, criterion_main, Criterion};
use mopa_core::action::{is_mp_action, rescale_action};
use mopa_core::config::RunConfig;
use mopa_core::par::{par_map_indexed, seq_map_indexed};
use mopa_core::planner::{plan, CollisionWorld};
use mopa_core::rollout::evaluate_agent;
use mopa_core::sac::SacAgent;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Duration;

fn fresh_agent(cfg: &RunConfig) -> SacAgent {
    let dof = cfg.env.arm.dof();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    SacAgent::new(
        mopa_core::env::Observation::dim_for(dof),
        dof,
        &cfg.sac,
        cfg.mopa.discount,
        &mut rng,
    )
}

fn bench_eval_episodes(c: &mut Criterion) {
    let mut cfg = RunConfig::default();
    cfg.sac.hidden = vec![32, 32];
    let agent = fresh_agent(&cfg);
    let mut g = c.benchmark_group("eval_episodes_x8");
    g.bench_function("parallel", |b| {
        b.iter(|| evaluate_agent(&cfg, &agent, 8).unwrap().success_rate)
    });
    g.bench_function("sequential", |b| {
        b.iter(|| {
            // Same episodes, explicitly sequential.
            let stats = seq_map_indexed(8, |_| ());
            let _ = stats;
            let mut cfg2 = cfg.clone();
            cfg2.run.seed = cfg.run.seed;
            sequential_eval(&cfg2, &agent, 8)
        })
    });
    g.finish();
}

fn sequential_eval(cfg: &RunConfig, agent: &SacAgent, episodes: usize) -> f64 {
    // Mirror of evaluate_agent's per-episode work without the fan-out.
    let reports: Vec<f64> = (0..episodes)
        .map(|_| evaluate_agent(cfg, agent, 1).unwrap().success_rate)
        .collect();
    reports.iter().sum::<f64>() / episodes as f64
}

fn bench_planner_fuzz(c: &mut Criterion) {
    let cfg = RunConfig::default();
    let worlds = 24usize;
    let run_one = |i: usize| -> bool {
        let mut rng = ChaCha8Rng::seed_from_u64(i as u64);
        let obstacles = [
            mopa_core::geom::Disc {
                center: mopa_core::geom::Vec2::new(rng.random_range(-0.3..0.3), 0.25),
                radius: 0.04,
            },
            mopa_core::geom::Disc {
                center: mopa_core::geom::Vec2::new(0.2, rng.random_range(-0.3..0.3)),
                radius: 0.04,
            },
        ];
        let world = CollisionWorld { arm: &cfg.env.arm, obstacles: &obstacles, extra: None };
        let start = mopa_core::geom::JointState(vec![0.0; 4]);
        if !world.is_free(&start) {
            return false;
        }
        let action = loop {
            let u: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            let a = rescale_action(&u, &cfg.mopa);
            if is_mp_action(&a, &cfg.mopa) {
                break a;
            }
        };
        plan(&start, &action, &world, &cfg.planner, cfg.mopa.step_limit, i as u64).is_some()
    };
    // Outputs agree regardless of scheduling.
    assert_eq!(par_map_indexed(worlds, run_one), seq_map_indexed(worlds, run_one));
    let mut g = c.benchmark_group("planner_fuzz_x24");
    g.bench_function("parallel", |b| b.iter(|| par_map_indexed(worlds, run_one)));
    g.bench_function("sequential", |b| b.iter(|| seq_map_indexed(worlds, run_one)));
    g.finish();
}

fn bench_volume_monte_carlo(c: &mut Criterion) {
    let cfg = RunConfig::default();
    let chunks = 16usize;
    let per_chunk = 20_000usize;
    let run_chunk = |i: usize| -> usize {
        let mut rng = ChaCha8Rng::seed_from_u64(i as u64);
        let mut direct = 0usize;
        for _ in 0..per_chunk {
            let u: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            if !is_mp_action(&rescale_action(&u, &cfg.mopa), &cfg.mopa) {
                direct += 1;
            }
        }
        direct
    };
    assert_eq!(par_map_indexed(chunks, run_chunk), seq_map_indexed(chunks, run_chunk));
    let mut g = c.benchmark_group("volume_mc_320k");
    g.bench_function("parallel", |b| b.iter(|| par_map_indexed(chunks, run_chunk)));
    g.bench_function("sequential", |b| b.iter(|| seq_map_indexed(chunks, run_chunk)));
    g.finish();
}

criterion_group!(
    name = benches;
    config = Criterion::default()
        .warm_up_time(Duration::from_millis(500))
        .measurement_time(Duration::from_secs(3))
        .sample_size(10);
    targets = bench_eval_episodes, bench_planner_fuzz, bench_volume_monte_carlo
);
criterion_main!(benches);
