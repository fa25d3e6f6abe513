//! Scripted reference controller: plan to a pre-contact pose behind the
//! object, then advance the end effector through the contact sphere in small
//! direct steps aimed along the object-to-goal line. Certifies that the
//! environment is solvable and that the reward wiring pays out; not a
//! learning component.

use crate::action::{execute, Mode};
use crate::config::RunConfig;
use crate::env::{reset, success, EnvState};
use crate::geom::{config_in_collision, end_effector, inf_norm, JointState, Vec2};
use crate::{mix_seed, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TAG_ORACLE: u64 = 20;

#[derive(Debug, Clone, Copy)]
pub struct OracleOutcome {
    pub success: bool,
    pub env_steps: usize,
    pub collisions: usize,
    pub episode_return: f64,
}

/// Planar position Jacobian column for joint j: the perpendicular of the
/// vector from joint j's origin to the end effector.
fn eef_jacobian(cfg: &RunConfig, q: &JointState) -> Vec<Vec2> {
    let arm = &cfg.env.arm;
    let mut joints = Vec::with_capacity(arm.dof() + 1);
    let mut p = arm.base;
    let mut angle = 0.0;
    joints.push(p);
    for (qi, len) in q.0.iter().zip(&arm.link_lengths) {
        angle += qi;
        p = p + Vec2::new(angle.cos(), angle.sin()).scaled(*len);
        joints.push(p);
    }
    let eef = joints[arm.dof()];
    (0..arm.dof()).map(|j| (eef - joints[j]).perp()).collect()
}

/// Damped-least-squares joint step realizing a small end-effector
/// displacement `dp`.
fn steer_joints(cfg: &RunConfig, q: &JointState, dp: Vec2, max_step: f64) -> Vec<f64> {
    let cols = eef_jacobian(cfg, q);
    // J J^T (2x2) + lambda I, inverted in closed form.
    let lambda = 1e-3;
    let (mut a, mut b, mut d) = (lambda, 0.0, lambda);
    for c in &cols {
        a += c.x * c.x;
        b += c.x * c.y;
        d += c.y * c.y;
    }
    let det = a * d - b * b;
    let (ix, iy) = ((d * dp.x - b * dp.y) / det, (a * dp.y - b * dp.x) / det);
    let mut dq: Vec<f64> = cols.iter().map(|c| c.x * ix + c.y * iy).collect();
    let m = inf_norm(&dq);
    if m > max_step {
        let s = max_step / m;
        for v in &mut dq {
            *v *= s;
        }
    }
    dq
}

/// Samples and refines a collision-free configuration whose end effector is
/// close to `target`, treating the object as an obstacle. Returns the best
/// candidate and its end-effector error.
fn pose_search(
    cfg: &RunConfig,
    state: &EnvState,
    target: Vec2,
    rng: &mut ChaCha8Rng,
) -> Option<(JointState, f64)> {
    let arm = &cfg.env.arm;
    let object = cfg.env.object_disc(state.p_obj);
    let free = |q: &JointState| !config_in_collision(arm, q, &cfg.env.obstacles, Some(&object));
    let mut best: Option<(JointState, f64)> = None;
    for _ in 0..400 {
        let q = JointState(
            arm.joint_limits.iter().map(|&(lo, hi)| rng.random_range(lo..hi)).collect(),
        );
        if !free(&q) {
            continue;
        }
        let err = end_effector(arm, &q).dist(target);
        if best.as_ref().is_none_or(|(_, e)| err < *e) {
            best = Some((q, err));
        }
    }
    let (mut q, mut err) = best?;
    // Jacobian descent with collision backoff.
    for _ in 0..60 {
        if err < 0.004 {
            break;
        }
        let eef = end_effector(arm, &q);
        let dp = (target - eef).scaled(0.5);
        let dq = steer_joints(cfg, &q, dp, 0.15);
        let cand = arm.clamp_to_limits(&JointState(
            q.0.iter().zip(&dq).map(|(a, d)| a + d).collect(),
        ));
        if !free(&cand) {
            break;
        }
        let cand_err = end_effector(arm, &cand).dist(target);
        if cand_err >= err {
            break;
        }
        q = cand;
        err = cand_err;
    }
    Some((q, err))
}

/// Contact standoff: center distance at which the arm tip just touches the
/// object surface, plus clearance.
fn standoff(cfg: &RunConfig) -> f64 {
    cfg.env.arm.link_radius + cfg.env.object_radius
}

/// Runs one scripted episode. The controller alternates between planner-backed
/// repositioning toward a pre-contact pose and direct pushing steps that drive
/// the tip through the contact sphere along the object-to-goal direction.
pub fn run_oracle_episode(cfg: &RunConfig, seed_index: u64) -> Result<OracleOutcome> {
    let mut mopa = cfg.mopa;
    mopa.mode = Mode::Mopa;
    let seed = cfg.run.seed;
    let (mut state, _) = reset(&cfg.env, mix_seed(seed, TAG_ORACLE, seed_index))?;
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, TAG_ORACLE, 1_000_000 + seed_index));
    let mut ep_return = 0.0;
    let mut plan_counter = seed_index << 24;
    let arm = &cfg.env.arm;
    let reach = arm.reach();

    for _aug in 0..300 {
        let eef = end_effector(arm, &state.q);
        let dir = match (state.p_goal - state.p_obj).normalized(1e-9) {
            Some(d) => d,
            None => break,
        };
        // Candidate contact approach angles around the push line; the straight
        // approach is preferred, the others keep the contact point reachable
        // when the object sits near the workspace rim.
        let mut pre_contact = None;
        for angle in [0.0f64, 0.35, -0.35, 0.7, -0.7, 1.05, -1.05] {
            let (s, c) = angle.sin_cos();
            let rot = Vec2::new(c * dir.x - s * dir.y, s * dir.x + c * dir.y);
            let p = state.p_obj - rot.scaled(standoff(cfg) + 0.012);
            if p.dist(arm.base) <= reach - 0.005 {
                pre_contact = Some((p, rot));
                break;
            }
        }
        let Some((contact_pt, push_dir)) = pre_contact else { break };

        if eef.dist(contact_pt) > 0.045 {
            // Reposition: search a pose, then realize it with planned hops.
            let mut moved = false;
            for attempt in 0..3 {
                let Some((q_target, err)) = pose_search(cfg, &state, contact_pt, &mut rng) else {
                    continue;
                };
                if err > 0.06 && attempt < 2 {
                    continue;
                }
                let delta = q_target.delta_from(&state.q);
                let action: Vec<f64> =
                    delta.iter().map(|d| d.clamp(-mopa.mp_range, mopa.mp_range)).collect();
                if inf_norm(&action) < 1e-9 {
                    break;
                }
                let rec = execute(
                    &state,
                    &action,
                    &cfg.env,
                    &mopa,
                    &cfg.planner,
                    mix_seed(seed, TAG_ORACLE, 2_000_000 + plan_counter),
                );
                plan_counter += 1;
                ep_return += rec.per_step_rewards.iter().sum::<f64>();
                let advanced = rec.s_end.q != state.q;
                state = rec.s_end;
                if rec.done {
                    return Ok(OracleOutcome {
                        success: success(&state, &cfg.env),
                        env_steps: state.steps_elapsed,
                        collisions: state.collision_count,
                        episode_return: ep_return,
                    });
                }
                if advanced {
                    moved = true;
                    break;
                }
            }
            if !moved {
                // Planner stuck: wiggle with a random direct action.
                let action: Vec<f64> = (0..arm.dof())
                    .map(|_| rng.random_range(-mopa.step_limit..mopa.step_limit))
                    .collect();
                let rec = execute(
                    &state,
                    &action,
                    &cfg.env,
                    &mopa,
                    &cfg.planner,
                    mix_seed(seed, TAG_ORACLE, 2_000_000 + plan_counter),
                );
                plan_counter += 1;
                ep_return += rec.per_step_rewards.iter().sum::<f64>();
                state = rec.s_end;
                if rec.done {
                    break;
                }
            }
        } else {
            // Push: aim the tip slightly past the contact surface so the
            // separation solver carries the object along the push line.
            let target_eef = state.p_obj - push_dir.scaled(standoff(cfg) - 0.012);
            let dp = target_eef - eef;
            let dp = if dp.norm() > 0.025 { dp.scaled(0.025 / dp.norm()) } else { dp };
            let dq = steer_joints(cfg, &state.q, dp, mopa.step_limit * 0.99);
            let rec = execute(
                &state,
                &dq,
                &cfg.env,
                &mopa,
                &cfg.planner,
                mix_seed(seed, TAG_ORACLE, 2_000_000 + plan_counter),
            );
            plan_counter += 1;
            ep_return += rec.per_step_rewards.iter().sum::<f64>();
            state = rec.s_end;
            if rec.done {
                break;
            }
        }
    }

    Ok(OracleOutcome {
        success: success(&state, &cfg.env),
        env_steps: state.steps_elapsed,
        collisions: state.collision_count,
        episode_return: ep_return,
    })
}

/// Success rate of the scripted controller over independently seeded episodes.
pub fn oracle_success_rate(cfg: &RunConfig, episodes: usize) -> Result<f64> {
    let outcomes =
        crate::par::par_map_indexed(episodes, |i| run_oracle_episode(cfg, i as u64));
    let mut ok = 0usize;
    for o in outcomes {
        if o?.success {
            ok += 1;
        }
    }
    Ok(ok as f64 / episodes.max(1) as f64)
}
