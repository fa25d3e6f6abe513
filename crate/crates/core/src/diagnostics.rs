//! Self-contained property suites: exact rescaling algebra, planner fuzzing,
//! option-reward bookkeeping against brute-force recomputation, gradient
//! checks against central finite differences, bandit convergence, replay
//! uniformity, and the reward formula against an independent evaluation.
//! Shared by the acceptance test suite and the `selftest` CLI command.

use crate::action::{
    direct_fraction_monte_carlo, execute, is_mp_action, rescale_action, rescale_component,
    subsample_reuse, ExecutionRecord,
};
use crate::config::{default_mopa, RunConfig};
use crate::env::{reset, step_primitive};
use crate::geom::{inf_norm, Disc, JointState, Vec2};
use crate::planner::{adjust_invalid_goal, plan, CollisionWorld};
use crate::sac::{
    alpha_loss_value, critic_grads, critic_loss_value, policy_grads, policy_loss_value,
    GaussianPolicy, Mlp, ReplayBuffer, Row, SacAgent, SacConfig,
};
use crate::{mix_seed, Result};
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckReport {
    fn new(name: &'static str, passed: bool, detail: String) -> CheckReport {
        CheckReport { name, passed, detail }
    }
}

impl std::fmt::Display for CheckReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] {} — {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail
        )
    }
}

/// Eq-boundary exactness and the algebraic properties of the piecewise
/// rescaling over random inputs.
pub fn rescale_exactness(samples: usize) -> CheckReport {
    let cfg = default_mopa();
    let mut failures = Vec::new();
    let exact = [
        (0.0, 0.0),
        (0.7, 0.1),
        (-0.7, -0.1),
        (1.0, 1.0),
        (-1.0, -1.0),
        (0.85, 0.55),
    ];
    for (u, want) in exact {
        let got = rescale_component(u, &cfg);
        if (got - want).abs() > 1e-12 {
            failures.push(format!("f({u}) = {got}, want {want}"));
        }
    }
    if rescale_component(cfg.rescale_threshold, &cfg) != cfg.step_limit
        || rescale_component(-cfg.rescale_threshold, &cfg) != -cfg.step_limit
        || rescale_component(1.0, &cfg) != cfg.mp_range
        || rescale_component(-1.0, &cfg) != -cfg.mp_range
    {
        failures.push("boundary values not exact".to_string());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0xA11CE);
    let mut us: Vec<f64> = (0..samples).map(|_| rng.random_range(-1.0..1.0)).collect();
    us.push(cfg.rescale_threshold);
    us.push(-cfg.rescale_threshold);
    us.sort_by(f64::total_cmp);
    let max_slope = (cfg.step_limit / cfg.rescale_threshold)
        .max((cfg.mp_range - cfg.step_limit) / (1.0 - cfg.rescale_threshold));
    let mut prev: Option<(f64, f64)> = None;
    for &u in &us {
        let a = rescale_component(u, &cfg);
        if rescale_component(-u, &cfg) != -a {
            failures.push(format!("not odd at {u}"));
            break;
        }
        if a.abs() > cfg.mp_range + 1e-12 {
            failures.push(format!("out of range at {u}"));
            break;
        }
        if let Some((pu, pa)) = prev {
            if a < pa - 1e-12 {
                failures.push(format!("not monotone between {pu} and {u}"));
                break;
            }
            if (a - pa).abs() > max_slope * (u - pu) + 1e-9 {
                failures.push(format!("discontinuity between {pu} and {u}"));
                break;
            }
        }
        prev = Some((u, a));
    }
    CheckReport::new(
        "rescaling exactness",
        failures.is_empty(),
        if failures.is_empty() {
            format!("{} boundary values exact, properties hold over {samples} samples", exact.len())
        } else {
            failures.join("; ")
        },
    )
}

/// Monte Carlo volume split of the rescaled action cube versus the analytic
/// threshold volume, and the naive linear map for contrast.
pub fn volume_ratio(samples: usize) -> CheckReport {
    let cfg = default_mopa();
    let d = 4;
    let mut rng = ChaCha8Rng::seed_from_u64(0xB0B);
    let frac = direct_fraction_monte_carlo(&cfg, samples, &mut rng);
    let want = cfg.rescale_threshold.powi(d as i32);
    let mut naive_direct = 0usize;
    for _ in 0..samples {
        let u: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let a: Vec<f64> = u.iter().map(|&x| x * cfg.mp_range).collect();
        if !is_mp_action(&a, &cfg) {
            naive_direct += 1;
        }
    }
    let naive = naive_direct as f64 / samples as f64;
    let naive_want = (cfg.step_limit / cfg.mp_range).powi(d as i32);
    let ok = (frac - want).abs() <= 0.01 && (naive - naive_want).abs() <= 0.01;
    CheckReport::new(
        "direct-action volume ratio",
        ok,
        format!(
            "rescaled {frac:.4} vs {want:.4}; naive {naive:.6} vs {naive_want:.6} ({samples} samples)"
        ),
    )
}

fn random_fuzz_world(rng: &mut ChaCha8Rng) -> (RunConfig, Vec<Disc>, JointState) {
    let cfg = RunConfig::default();
    loop {
        let n_obs = rng.random_range(0..=5usize);
        let obstacles: Vec<Disc> = (0..n_obs)
            .map(|_| {
                let r = rng.random_range(0.1..0.42);
                let th = rng.random_range(0.0..std::f64::consts::TAU);
                Disc {
                    center: Vec2::new(r * th.cos(), r * th.sin()),
                    radius: rng.random_range(0.02..0.06),
                }
            })
            .collect();
        for _ in 0..100 {
            let q = JointState(
                cfg.env
                    .arm
                    .joint_limits
                    .iter()
                    .map(|&(lo, hi)| rng.random_range(lo..hi))
                    .collect(),
            );
            if !crate::geom::config_in_collision(&cfg.env.arm, &q, &obstacles, None) {
                return (cfg, obstacles, q);
            }
        }
    }
}

/// Planner fuzz over random worlds plus the narrow-passage benchmark.
/// Every returned plan must start exactly at the start, end at the
/// (recomputed) adjusted goal, respect the per-step bound, and validate at
/// twice the planning resolution.
pub fn planner_soundness(worlds: usize, narrow_seeds: usize) -> CheckReport {
    let results = crate::par::par_map_indexed(worlds, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(0xF00D, 7, i as u64));
        let (cfg, obstacles, start) = random_fuzz_world(&mut rng);
        let world = CollisionWorld { arm: &cfg.env.arm, obstacles: &obstacles, extra: None };
        let mopa = cfg.mopa;
        let action: Vec<f64> = loop {
            let u: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            let a = rescale_action(&u, &mopa);
            if is_mp_action(&a, &mopa) {
                break a;
            }
        };
        let seed = mix_seed(0xF00D, 8, i as u64);
        let Some(p) = plan(&start, &action, &world, &cfg.planner, mopa.step_limit, seed) else {
            return Ok::<(bool, bool), String>((false, true));
        };
        // Start exact.
        if p.states[0] != start {
            return Err(format!("world {i}: start mismatch"));
        }
        // Endpoint equals the recomputed adjusted goal.
        let goal = adjust_invalid_goal(&start, &action, &world, &cfg.planner, mopa.step_limit)
            .ok_or_else(|| format!("world {i}: plan returned but goal adjustment fails"))?;
        for (a, b) in p.end().0.iter().zip(&goal.0) {
            if (a - b).abs() > 1e-9 {
                return Err(format!("world {i}: endpoint off the adjusted goal"));
            }
        }
        // Per-step bound and double-resolution collision recheck.
        let fine = cfg.planner.edge_resolution / 2.0;
        for w in p.states.windows(2) {
            if inf_norm(&w[1].delta_from(&w[0])) > mopa.step_limit + 1e-9 {
                return Err(format!("world {i}: step exceeds the displacement bound"));
            }
            if !world.edge_free(&w[0], &w[1], fine) {
                return Err(format!("world {i}: collision at double resolution"));
            }
        }
        Ok((true, false))
    });
    let mut planned = 0usize;
    let mut absent = 0usize;
    for r in &results {
        match r {
            Ok((p, a)) => {
                planned += *p as usize;
                absent += *a as usize;
            }
            Err(e) => {
                return CheckReport::new("planner soundness", false, e.clone());
            }
        }
    }

    // Narrow passage: two discs flank a gap of 3x the link radius; the arm
    // must fold under the wall and unfold through the gap.
    let narrow = narrow_passage_success(narrow_seeds);
    let ok = narrow >= 0.95;
    CheckReport::new(
        "planner soundness",
        ok,
        format!(
            "{worlds} fuzz worlds clean ({planned} planned, {absent} absent); narrow-passage success {:.0}%",
            narrow * 100.0
        ),
    )
}

/// Success rate of the full pipeline on the narrow-passage construction.
pub fn narrow_passage_success(seeds: usize) -> f64 {
    let cfg = RunConfig::default();
    let obstacles = [
        Disc { center: Vec2::new(-0.07, 0.25), radius: 0.04 },
        Disc { center: Vec2::new(0.07, 0.25), radius: 0.04 },
    ];
    let start = JointState(vec![0.0; 4]);
    let action = [std::f64::consts::FRAC_PI_2, 0.0, 0.0, 0.0];
    let world = CollisionWorld { arm: &cfg.env.arm, obstacles: &obstacles, extra: None };
    let results = crate::par::par_map_indexed(seeds, |s| {
        plan(&start, &action, &world, &cfg.planner, cfg.mopa.step_limit, s as u64).is_some()
    });
    results.iter().filter(|&&ok| ok).count() as f64 / seeds.max(1) as f64
}

fn collect_executions(count: usize) -> Vec<ExecutionRecord> {
    let cfg = RunConfig::default();
    let chunks = crate::par::par_map_indexed(count.div_ceil(50), |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(0xACC, 1, c as u64));
        let mut out = Vec::new();
        let mut episode = 0u64;
        while out.len() < 50 {
            let seed = mix_seed(0xACC, 2, (c as u64) << 32 | episode);
            episode += 1;
            let (mut state, _) = reset(&cfg.env, seed).unwrap();
            loop {
                let u: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
                let a = rescale_action(&u, &cfg.mopa);
                let rec = execute(
                    &state,
                    &a,
                    &cfg.env,
                    &cfg.mopa,
                    &cfg.planner,
                    mix_seed(0xACC, 3, out.len() as u64),
                );
                state = rec.s_end.clone();
                let done = rec.done;
                out.push(rec);
                if done || out.len() >= 50 {
                    break;
                }
            }
        }
        out
    });
    chunks.into_iter().flatten().take(count).collect()
}

/// Option-reward bookkeeping against brute force: discounted sums recomputed
/// by Horner's scheme, step counts against the simulator clock, discount
/// powers against an iterated product, and reuse slices replayed through the
/// simulator.
pub fn semi_mdp_accounting(executions: usize) -> CheckReport {
    let cfg = RunConfig::default();
    let records = collect_executions(executions);
    let mut reuse_checked = 0usize;
    let mut planned = 0usize;
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC0);
    for (i, rec) in records.iter().enumerate() {
        // Discounted reward via backward Horner evaluation.
        let mut horner = 0.0;
        for &r in rec.per_step_rewards.iter().rev() {
            horner = r + rec.discount * horner;
        }
        if (horner - rec.discounted_reward).abs() > 1e-9 {
            return CheckReport::new(
                "semi-MDP accounting",
                false,
                format!("record {i}: discounted reward {} vs brute force {horner}", rec.discounted_reward),
            );
        }
        // The option length matches the simulator clock.
        if rec.s_end.steps_elapsed - rec.s_start.steps_elapsed != rec.steps
            || rec.per_step_rewards.len() != rec.steps
        {
            return CheckReport::new(
                "semi-MDP accounting",
                false,
                format!("record {i}: step accounting mismatch"),
            );
        }
        // discount^H as used by the critic target vs an iterated product.
        let mut prod = 1.0;
        for _ in 0..rec.steps {
            prod *= rec.discount;
        }
        if (prod - rec.discount.powi(rec.steps as i32)).abs() > 1e-9 {
            return CheckReport::new(
                "semi-MDP accounting",
                false,
                format!("record {i}: discount power mismatch"),
            );
        }
        if !rec.used_planner {
            continue;
        }
        planned += 1;
        // Replay consistency of reuse slices: stepping the recorded start
        // state through the recorded displacements reproduces the end state.
        for t in subsample_reuse(rec, 8, &mut rng) {
            let mut s = t.s.clone();
            let offset = s.steps_elapsed - rec.s_start.steps_elapsed;
            for k in 0..t.steps {
                let idx = offset + k;
                let delta = rec.recorded[idx + 1].q.delta_from(&rec.recorded[idx].q);
                let (next, _) = step_primitive(&s, &delta, &cfg.env);
                s = next;
            }
            let q_err: f64 = s
                .q
                .0
                .iter()
                .zip(&t.s_next.q.0)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let obj_err = s.p_obj.dist(t.s_next.p_obj);
            if q_err > 1e-9 || obj_err > 1e-9 {
                return CheckReport::new(
                    "semi-MDP accounting",
                    false,
                    format!("record {i}: reuse replay diverged (q {q_err:.2e}, obj {obj_err:.2e})"),
                );
            }
            // Reuse reward also matches brute force.
            let mut want = 0.0;
            for k in (0..t.steps).rev() {
                want = rec.per_step_rewards[offset + k] + rec.discount * want;
            }
            if (want - t.reward).abs() > 1e-9 {
                return CheckReport::new(
                    "semi-MDP accounting",
                    false,
                    format!("record {i}: reuse reward {} vs brute force {want}", t.reward),
                );
            }
            reuse_checked += 1;
        }
    }
    CheckReport::new(
        "semi-MDP accounting",
        true,
        format!(
            "{} executions ({planned} planned) consistent; {reuse_checked} reuse slices replayed",
            records.len()
        ),
    )
}

fn finite_difference_grads(net: &Mlp, loss: &mut dyn FnMut(&Mlp) -> f64, h: f64) -> Vec<f64> {
    let base = net.clone();
    let count = base.param_count();
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let mut plus = base.clone();
        let mut idx = 0;
        plus.for_each_param_mut(|p| {
            if idx == k {
                *p += h;
            }
            idx += 1;
        });
        let mut minus = base.clone();
        idx = 0;
        minus.for_each_param_mut(|p| {
            if idx == k {
                *p -= h;
            }
            idx += 1;
        });
        out.push((loss(&plus) - loss(&minus)) / (2.0 * h));
    }
    out
}

fn max_rel_err(analytic: &[f64], fd: &[f64]) -> f64 {
    analytic
        .iter()
        .zip(fd)
        .map(|(a, f)| (a - f).abs() / (a.abs() + f.abs()).max(1e-6))
        .fold(0.0, f64::max)
}

/// Central-finite-difference check (step 1e-5) of every parameter gradient of
/// the critic, policy, and temperature losses on small randomized networks.
pub fn gradient_check() -> CheckReport {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9AD5);
    let (obs_dim, act_dim, batch) = (3usize, 2usize, 4usize);
    let policy = GaussianPolicy::new(obs_dim, &[8, 8], act_dim, &mut rng);
    let q1 = Mlp::new(&[obs_dim + act_dim, 8, 8, 1], &mut rng);
    let q2 = Mlp::new(&[obs_dim + act_dim, 8, 8, 1], &mut rng);
    let obs = Array2::from_shape_fn((batch, obs_dim), |_| rng.random_range(-1.0..1.0));
    let act = Array2::from_shape_fn((batch, act_dim), |_| rng.random_range(-0.9..0.9));
    let obs_act = ndarray::concatenate(ndarray::Axis(1), &[obs.view(), act.view()]).unwrap();
    let y = Array1::from_shape_fn(batch, |_| rng.random_range(-1.0..1.0));
    let z = Array2::from_shape_fn((batch, act_dim), |_| rng.random_range(-1.5..1.5));
    let alpha = 0.37;
    let h = 1e-5;

    let (g1, g2, _) = critic_grads(&q1, &q2, &obs_act, &y);
    let fd1 = finite_difference_grads(&q1, &mut |net| critic_loss_value(net, &q2, &obs_act, &y), h);
    let fd2 = finite_difference_grads(&q2, &mut |net| critic_loss_value(&q1, net, &obs_act, &y), h);
    let e1 = max_rel_err(&g1.flatten(), &fd1);
    let e2 = max_rel_err(&g2.flatten(), &fd2);

    let (pg, _, log_prob) = policy_grads(&policy, &q1, &q2, &obs, &z, alpha);
    let fd_p = finite_difference_grads(
        &policy.net,
        &mut |net| {
            let p = GaussianPolicy { net: net.clone(), action_dim: act_dim };
            policy_loss_value(&p, &q1, &q2, &obs, &z, alpha)
        },
        h,
    );
    let ep = max_rel_err(&pg.flatten(), &fd_p);

    let target_entropy = -(act_dim as f64);
    let analytic_alpha = -(log_prob.mapv(|lp| lp + target_entropy).mean().unwrap());
    let la = 0.21;
    let fd_alpha = (alpha_loss_value(la + h, &log_prob, target_entropy)
        - alpha_loss_value(la - h, &log_prob, target_entropy))
        / (2.0 * h);
    let ea = (analytic_alpha - fd_alpha).abs() / (analytic_alpha.abs() + fd_alpha.abs()).max(1e-6);

    let worst = e1.max(e2).max(ep).max(ea);
    CheckReport::new(
        "gradient check",
        worst < 1e-4,
        format!("max rel err: critic1 {e1:.2e}, critic2 {e2:.2e}, policy {ep:.2e}, alpha {ea:.2e}"),
    )
}

/// Fixed-reward bandit: with every transition terminal, the critics must
/// regress onto the reward itself.
pub fn bandit_convergence(updates: usize) -> CheckReport {
    let reward = 0.7;
    let mut rng = ChaCha8Rng::seed_from_u64(0xBA4D);
    let cfg = SacConfig {
        hidden: vec![32, 32],
        batch_size: 256,
        replay_capacity: 4096,
        ..SacConfig::default()
    };
    let mut agent = SacAgent::new(2, 1, &cfg, 0.99, &mut rng);
    let obs = vec![0.5, -0.5];
    let mut buf = ReplayBuffer::new(cfg.replay_capacity);
    for _ in 0..2048 {
        let a = rng.random_range(-0.999..0.999);
        buf.push(Row {
            obs: obs.clone(),
            action: vec![a],
            reward,
            next_obs: obs.clone(),
            steps: 1,
            done: true,
        });
    }
    let mut up_rng = ChaCha8Rng::seed_from_u64(0xBA4E);
    for _ in 0..updates {
        agent.update(&buf, &mut up_rng);
    }
    let mut worst = 0.0f64;
    for k in 0..16 {
        let a = -0.9 + 1.8 * k as f64 / 15.0;
        let input = Array2::from_shape_vec((1, 3), vec![obs[0], obs[1], a]).unwrap();
        let q1 = agent.q1.forward(&input)[[0, 0]];
        let q2 = agent.q2.forward(&input)[[0, 0]];
        worst = worst.max((q1 - reward).abs()).max((q2 - reward).abs());
    }
    CheckReport::new(
        "bandit convergence",
        worst < 1e-2,
        format!("max |Q - r| = {worst:.2e} after {updates} updates"),
    )
}

/// Chi-square uniformity of replay sampling over a 100-item buffer (p > 0.01).
pub fn replay_uniformity() -> CheckReport {
    let mut buf = ReplayBuffer::new(100);
    for k in 0..100 {
        buf.push(Row {
            obs: vec![k as f64],
            action: vec![0.0],
            reward: 0.0,
            next_obs: vec![0.0],
            steps: 1,
            done: false,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5A3);
    let draws = 100_000usize;
    let mut counts = vec![0usize; 100];
    for i in buf.sample_indices(&mut rng, draws) {
        counts[i] += 1;
    }
    let expected = draws as f64 / 100.0;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    // 99 degrees of freedom; critical value at p = 0.01.
    CheckReport::new("replay uniformity", chi2 < 134.64, format!("chi-square {chi2:.1} (df 99)"))
}

fn independent_tanh(x: f64) -> f64 {
    let mag = x.abs();
    let e = (2.0 * mag).exp();
    let t = (e - 1.0) / (e + 1.0);
    if x < 0.0 {
        -t
    } else {
        t
    }
}

/// Reward formula against an independently coded evaluation on random states.
pub fn reward_formula(states: usize) -> CheckReport {
    let cfg = RunConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x4E4A);
    let mut worst = 0.0f64;
    for _ in 0..states {
        let q = JointState(
            cfg.env
                .arm
                .joint_limits
                .iter()
                .map(|&(lo, hi)| rng.random_range(lo..hi))
                .collect(),
        );
        let state = crate::env::EnvState {
            q_prev: q.clone(),
            q,
            p_obj: Vec2::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)),
            p_obj_prev: Vec2::ZERO,
            p_goal: Vec2::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)),
            steps_elapsed: 0,
            collision_count: 0,
        };
        let got = crate::env::reward_push(&state, &cfg.env);
        let eef = crate::geom::end_effector(&cfg.env.arm, &state.q);
        let d_eo = ((eef.x - state.p_obj.x).powi(2) + (eef.y - state.p_obj.y).powi(2)).sqrt();
        let d_og = ((state.p_obj.x - state.p_goal.x).powi(2)
            + (state.p_obj.y - state.p_goal.y).powi(2))
        .sqrt();
        let mut want = 0.0;
        if d_eo <= 0.1 {
            want += 0.1 * (1.0 - independent_tanh(5.0 * d_eo));
        }
        if d_og <= 0.1 {
            want += 0.3 * (1.0 - independent_tanh(5.0 * d_og));
        }
        if d_og <= cfg.env.success_dist {
            want += 150.0;
        }
        worst = worst.max((got - want).abs());
    }
    CheckReport::new(
        "reward formula",
        worst < 1e-12,
        format!("max |difference| = {worst:.2e} over {states} states"),
    )
}

/// Scripted-controller success rate (environment solvability witness).
pub fn oracle_solvability(episodes: usize) -> Result<CheckReport> {
    let cfg = RunConfig::default();
    let rate = crate::oracle::oracle_success_rate(&cfg, episodes)?;
    Ok(CheckReport::new(
        "scripted-controller solvability",
        rate >= 0.9,
        format!("success rate {rate:.2} over {episodes} episodes"),
    ))
}

/// Runs every property suite. `quick` shrinks the sampling sizes for an
/// interactive smoke pass; the full sizes match the acceptance suite.
pub fn run_all(quick: bool) -> Result<Vec<CheckReport>> {
    let (resc, vol, worlds, narrow, execs, bandit, rew, orc) = if quick {
        (10_000, 100_000, 100, 20, 100, 1200, 200, 10)
    } else {
        (100_000, 1_000_000, 1000, 100, 1000, 5000, 1000, 50)
    };
    Ok(vec![
        rescale_exactness(resc),
        volume_ratio(vol),
        planner_soundness(worlds, narrow),
        semi_mdp_accounting(execs),
        gradient_check(),
        bandit_convergence(bandit),
        replay_uniformity(),
        reward_formula(rew),
        oracle_solvability(orc)?,
    ])
}
