//! The augmented action space: piecewise-linear rescaling of policy outputs,
//! magnitude-based dispatch between direct execution and motion planning,
//! semi-MDP option execution with discounted reward accumulation, and
//! sub-sampling of executed plan trajectories for replay reuse.

use crate::env::{is_done, step_primitive, EnvState, WorldConfig};
use crate::geom::inf_norm;
use crate::planner::{plan, CollisionWorld, MotionPlan, PlannerConfig};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Augmented action space with planner dispatch.
    Mopa,
    /// Plain SAC in the small direct-action space.
    SacBaseline,
    /// SAC in the enlarged space; large actions split into blind sub-steps.
    SacLarge,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mode::Mopa => write!(f, "mopa"),
            Mode::SacBaseline => write!(f, "sac_baseline"),
            Mode::SacLarge => write!(f, "sac_large"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MopaConfig {
    pub mode: Mode,
    /// Per-joint displacement cap for one primitive step.
    pub step_limit: f64,
    /// Per-joint displacement cap for the augmented action space.
    pub mp_range: f64,
    /// Fraction of the normalized policy range mapped to direct execution.
    /// 0 disables direct execution, 1 collapses to the plain SAC range.
    pub rescale_threshold: f64,
    pub discount: f64,
    /// Reused sub-sampled transitions stored per planner execution.
    pub reuse_count: usize,
    /// Multiplies discounted option rewards before storage/training.
    pub reward_scale: f64,
}

impl MopaConfig {
    pub fn validate(&self) -> Result<(), String> {
        // Equality is the degenerate no-planner configuration used by the
        // action-range ablation; anything below the step limit is an error.
        if !(self.step_limit > 0.0 && self.step_limit <= self.mp_range) {
            return Err("require 0 < step_limit <= mp_range".into());
        }
        if !(0.0..=1.0).contains(&self.rescale_threshold) {
            return Err("rescale_threshold must be in [0,1]".into());
        }
        if !(0.0..=1.0).contains(&self.discount) {
            return Err("discount must be in [0,1]".into());
        }
        if !(self.reward_scale > 0.0) {
            return Err("reward_scale must be positive".into());
        }
        Ok(())
    }
}

/// Piecewise-linear map from a normalized policy output in [-1,1] to a joint
/// displacement in [-mp_range, mp_range]. Inputs inside the threshold map onto
/// the direct-action range, the rest stretches linearly to the full range.
/// Odd, continuous, monotone; boundary inputs hit the range endpoints exactly.
pub fn rescale_component(u: f64, cfg: &MopaConfig) -> f64 {
    debug_assert!(u.abs() <= 1.0 + 1e-12, "policy output out of range: {u}");
    let w = cfg.rescale_threshold;
    let mag = u.abs();
    let sign = if u < 0.0 { -1.0 } else { 1.0 };
    if mag == 0.0 {
        return 0.0;
    }
    if mag == w {
        return sign * cfg.step_limit;
    }
    if mag == 1.0 {
        return if w == 1.0 { sign * cfg.step_limit } else { sign * cfg.mp_range };
    }
    if mag <= w {
        sign * (cfg.step_limit / w) * mag
    } else {
        sign * (cfg.step_limit + (cfg.mp_range - cfg.step_limit) * (mag - w) / (1.0 - w))
    }
}

/// Componentwise rescaling of a whole policy output vector.
pub fn rescale_action(u: &[f64], cfg: &MopaConfig) -> Vec<f64> {
    u.iter().map(|&ui| rescale_component(ui, cfg)).collect()
}

/// Inverse of `rescale_component`, clamping displacements beyond the
/// augmented range first. Used to express reused plan segments in the
/// learner's normalized action space.
pub fn inverse_rescale_component(a: f64, cfg: &MopaConfig) -> f64 {
    let w = cfg.rescale_threshold;
    let mag = a.abs().min(cfg.mp_range);
    let sign = if a < 0.0 { -1.0 } else { 1.0 };
    if w >= 1.0 {
        return sign * (mag / cfg.step_limit).min(1.0);
    }
    if w <= 0.0 {
        let over = ((mag - cfg.step_limit) / (cfg.mp_range - cfg.step_limit)).clamp(0.0, 1.0);
        return sign * over;
    }
    if mag <= cfg.step_limit {
        sign * mag * w / cfg.step_limit
    } else {
        sign * (w + (mag - cfg.step_limit) * (1.0 - w) / (cfg.mp_range - cfg.step_limit))
    }
}

pub fn inverse_rescale(a: &[f64], cfg: &MopaConfig) -> Vec<f64> {
    a.iter().map(|&ai| inverse_rescale_component(ai, cfg)).collect()
}

/// Maps a normalized policy output to the environment displacement for the
/// configured mode. Baselines use plain linear scaling of their range.
pub fn policy_to_env_action(u: &[f64], cfg: &MopaConfig) -> Vec<f64> {
    match cfg.mode {
        Mode::Mopa => rescale_action(u, cfg),
        Mode::SacBaseline => u.iter().map(|&x| x * cfg.step_limit).collect(),
        Mode::SacLarge => u.iter().map(|&x| x * cfg.mp_range).collect(),
    }
}

/// Dispatch rule: an action is realized through the motion planner iff some
/// joint displacement strictly exceeds the direct-step limit. Ties go to
/// direct execution.
pub fn is_mp_action(action: &[f64], cfg: &MopaConfig) -> bool {
    inf_norm(action) > cfg.step_limit
}

/// Everything recorded while realizing one augmented action.
#[derive(Debug, Clone)]
pub struct ExecutionRecord {
    pub s_start: EnvState,
    /// The displacement the policy requested (post-rescaling).
    pub action: Vec<f64>,
    /// Discounted sum of the per-step rewards (unscaled).
    pub discounted_reward: f64,
    pub s_end: EnvState,
    /// Primitive steps actually executed (>= 1).
    pub steps: usize,
    pub path: Option<MotionPlan>,
    pub per_step_rewards: Vec<f64>,
    pub used_planner: bool,
    /// Environment state after each executed step, `s_start` first
    /// (length `steps + 1`). Lets reuse transitions carry true object state.
    pub recorded: Vec<EnvState>,
    pub done: bool,
    /// True when the planner was required but failed and a no-op was emitted.
    pub planner_failed: bool,
    pub blocked_steps: usize,
    /// Discount the rewards were accumulated under; reuse slices re-use it.
    pub discount: f64,
}

/// Replay record of one augmented transition: start state, displacement,
/// discounted reward over `steps` primitive steps, end state.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub s: EnvState,
    pub action: Vec<f64>,
    pub reward: f64,
    pub s_next: EnvState,
    pub steps: usize,
    pub done: bool,
}

fn discounted_sum(rewards: &[f64], discount: f64) -> f64 {
    let mut acc = 0.0;
    let mut weight = 1.0;
    for &r in rewards {
        acc += weight * r;
        weight *= discount;
    }
    acc
}

/// Runs a sequence of primitive displacements, accumulating discounted reward
/// and recording intermediate states. Truncates when the episode ends or, for
/// checked execution, when a step is blocked (plans are collision-free, so a
/// block there means the object jammed and the remaining waypoints are stale).
fn run_steps(
    start: &EnvState,
    deltas: impl Iterator<Item = Vec<f64>>,
    env: &WorldConfig,
    stop_on_block: bool,
) -> (Vec<EnvState>, Vec<f64>, usize, bool, usize) {
    let mut recorded = vec![start.clone()];
    let mut rewards = Vec::new();
    let mut state = start.clone();
    let mut blocked_steps = 0;
    let mut done = false;
    for delta in deltas {
        let (next, res) = step_primitive(&state, &delta, env);
        state = next;
        recorded.push(state.clone());
        rewards.push(res.reward);
        if res.info.blocked {
            blocked_steps += 1;
        }
        if res.done {
            done = true;
            break;
        }
        if res.info.blocked && stop_on_block {
            break;
        }
    }
    let steps = rewards.len();
    (recorded, rewards, steps, done, blocked_steps)
}

/// Realizes one augmented action according to the configured mode:
/// direct single step, planner-backed option, or blind equal sub-steps.
/// Planner failure produces a self-transition no-op carrying the reward of
/// staying put, after which the episode clock still advances by one step.
pub fn execute(
    state: &EnvState,
    action: &[f64],
    env: &WorldConfig,
    mopa: &MopaConfig,
    planner_cfg: &PlannerConfig,
    seed: u64,
) -> ExecutionRecord {
    assert!(!is_done(state, env), "execute called on a finished episode");
    assert_eq!(action.len(), state.q.dof());
    let limit = match mopa.mode {
        Mode::SacBaseline => mopa.step_limit,
        _ => mopa.mp_range,
    };
    assert!(
        inf_norm(action) <= limit + 1e-9,
        "action exceeds the configured range"
    );

    let finish = |recorded: Vec<EnvState>,
                  rewards: Vec<f64>,
                  steps: usize,
                  done: bool,
                  blocked: usize,
                  path: Option<MotionPlan>,
                  used_planner: bool,
                  planner_failed: bool| {
        ExecutionRecord {
            s_start: state.clone(),
            action: action.to_vec(),
            discounted_reward: discounted_sum(&rewards, mopa.discount),
            s_end: recorded.last().unwrap().clone(),
            steps,
            path,
            per_step_rewards: rewards,
            used_planner,
            recorded,
            done,
            planner_failed,
            blocked_steps: blocked,
            discount: mopa.discount,
        }
    };

    match mopa.mode {
        Mode::SacBaseline => {
            let (recorded, rewards, steps, done, blocked) =
                run_steps(state, std::iter::once(action.to_vec()), env, false);
            finish(recorded, rewards, steps, done, blocked, None, false, false)
        }
        Mode::SacLarge => {
            let m = ((inf_norm(action) / mopa.step_limit).ceil() as usize).max(1);
            let sub: Vec<f64> = action.iter().map(|a| a / m as f64).collect();
            let (recorded, rewards, steps, done, blocked) =
                run_steps(state, std::iter::repeat_n(sub, m), env, false);
            finish(recorded, rewards, steps, done, blocked, None, false, false)
        }
        Mode::Mopa => {
            if !is_mp_action(action, mopa) {
                let (recorded, rewards, steps, done, blocked) =
                    run_steps(state, std::iter::once(action.to_vec()), env, false);
                return finish(recorded, rewards, steps, done, blocked, None, false, false);
            }
            let object = env.object_disc(state.p_obj);
            let world =
                CollisionWorld { arm: &env.arm, obstacles: &env.obstacles, extra: Some(object) };
            match plan(&state.q, action, &world, planner_cfg, mopa.step_limit, seed) {
                Some(motion_plan) => {
                    let deltas: Vec<Vec<f64>> = motion_plan
                        .states
                        .windows(2)
                        .map(|w| w[1].delta_from(&w[0]))
                        .collect();
                    let (recorded, rewards, steps, done, blocked) =
                        run_steps(state, deltas.into_iter(), env, true);
                    finish(recorded, rewards, steps, done, blocked, Some(motion_plan), true, false)
                }
                None => {
                    // No-op self-transition: the clock advances, nothing moves.
                    let zero = vec![0.0; action.len()];
                    let (recorded, rewards, steps, done, blocked) =
                        run_steps(state, std::iter::once(zero), env, false);
                    finish(recorded, rewards, steps, done, blocked, None, false, true)
                }
            }
        }
    }
}

/// Draws `count` sub-segments of an executed plan as extra replay transitions.
/// Indices n ~ U{0, H-1}, m ~ U{n+1, H}; the stored displacement is the joint
/// difference between the recorded states, the reward is the re-discounted
/// slice of the recorded per-step rewards. Duplicates are kept.
pub fn subsample_reuse(
    record: &ExecutionRecord,
    count: usize,
    rng: &mut impl Rng,
) -> Vec<Transition> {
    assert!(record.used_planner, "reuse requires a planner execution");
    let h = record.steps;
    debug_assert_eq!(record.recorded.len(), h + 1);
    let mut out = Vec::with_capacity(count);
    if h == 0 {
        return out;
    }
    for _ in 0..count {
        let n = rng.random_range(0..h);
        let m = rng.random_range(n + 1..=h);
        let s = record.recorded[n].clone();
        let s_next = record.recorded[m].clone();
        let action = s_next.q.delta_from(&s.q);
        let reward = discounted_sum(&record.per_step_rewards[n..m], record.discount);
        out.push(Transition {
            s,
            action,
            reward,
            s_next,
            steps: m - n,
            done: m == h && record.done,
        });
    }
    out
}

/// Converts an execution record into its main replay transition.
pub fn main_transition(record: &ExecutionRecord) -> Transition {
    Transition {
        s: record.s_start.clone(),
        action: record.action.clone(),
        reward: record.discounted_reward,
        s_next: record.s_end.clone(),
        steps: record.steps,
        done: record.done,
    }
}

/// Fraction of the normalized action cube mapping to direct execution,
/// estimated by Monte Carlo. Used by the diagnostics suite.
pub fn direct_fraction_monte_carlo(cfg: &MopaConfig, samples: usize, rng: &mut impl Rng) -> f64 {
    let d = 4;
    let mut direct = 0usize;
    for _ in 0..samples {
        let u: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let a = rescale_action(&u, cfg);
        if !is_mp_action(&a, cfg) {
            direct += 1;
        }
    }
    direct as f64 / samples as f64
}
