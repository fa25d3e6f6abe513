//! Collision-free path generation in joint space. A cheap straight-line
//! interpolation check runs first; only when it fails does RRT-Connect search,
//! followed by shortcut smoothing. Invalid goals are pulled back toward the
//! start until a valid motion-plan-scale target is found. Everything is a pure
//! function of its inputs plus an explicit seed.

use crate::geom::{edge_collision_free, inf_norm, ArmModel, Disc, JointState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerConfig {
    /// Tree extension step, radians (joint-space Euclidean).
    pub rrt_step: f64,
    /// Extension-attempt budget before the search gives up.
    pub rrt_node_budget: usize,
    pub shortcut_iters: usize,
    /// Multiplier applied per goal-reduction attempt, in (0, 1).
    pub goal_reduction_factor: f64,
    pub goal_reduction_max_tries: usize,
    /// Per-joint spacing of edge validation checks, radians.
    pub edge_resolution: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            rrt_step: 0.2,
            rrt_node_budget: 20_000,
            shortcut_iters: 100,
            goal_reduction_factor: 0.8,
            goal_reduction_max_tries: 10,
            edge_resolution: 0.02,
        }
    }
}

impl PlannerConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.rrt_step > 0.0) {
            return Err("rrt_step must be positive".into());
        }
        if self.rrt_node_budget == 0 || self.goal_reduction_max_tries == 0 {
            return Err("budgets must be positive".into());
        }
        if !(self.goal_reduction_factor > 0.0 && self.goal_reduction_factor < 1.0) {
            return Err("goal_reduction_factor must be in (0,1)".into());
        }
        if !(self.edge_resolution > 0.0) {
            return Err("edge_resolution must be positive".into());
        }
        Ok(())
    }
}

/// Collision context the planner operates in: the arm, static obstacles, and
/// optionally the pushable object frozen at its current position.
#[derive(Debug, Clone, Copy)]
pub struct CollisionWorld<'a> {
    pub arm: &'a ArmModel,
    pub obstacles: &'a [Disc],
    pub extra: Option<Disc>,
}

impl<'a> CollisionWorld<'a> {
    pub fn is_free(&self, q: &JointState) -> bool {
        !crate::geom::config_in_collision(self.arm, q, self.obstacles, self.extra.as_ref())
    }

    pub fn edge_free(&self, a: &JointState, b: &JointState, resolution: f64) -> bool {
        edge_collision_free(self.arm, a, b, self.obstacles, self.extra.as_ref(), resolution)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PlannerUsed {
    Interpolation,
    RrtConnect,
}

/// A discretized joint-space path: `states[0]` is the start, consecutive
/// states differ by at most the step limit per joint, and every state is
/// collision-free in the world it was planned in.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionPlan {
    pub states: Vec<JointState>,
    pub planner_used: PlannerUsed,
    pub goal_adjusted: bool,
}

impl MotionPlan {
    /// Number of steps H (states.len() - 1, at least 1).
    pub fn horizon(&self) -> usize {
        self.states.len() - 1
    }

    pub fn end(&self) -> &JointState {
        self.states.last().unwrap()
    }
}

fn lerp(a: &JointState, b: &JointState, t: f64) -> JointState {
    JointState(a.0.iter().zip(&b.0).map(|(x, y)| x + (y - x) * t).collect())
}

/// Splits each segment of `waypoints` into steps of per-joint magnitude at
/// most `step_limit`; endpoints of every segment are kept exactly.
fn discretize(waypoints: &[JointState], step_limit: f64) -> Vec<JointState> {
    let mut out = Vec::with_capacity(waypoints.len());
    out.push(waypoints[0].clone());
    for w in waypoints.windows(2) {
        let delta = w[1].delta_from(&w[0]);
        let steps = ((inf_norm(&delta) / step_limit).ceil() as usize).max(1);
        for k in 1..steps {
            out.push(lerp(&w[0], &w[1], k as f64 / steps as f64));
        }
        out.push(w[1].clone());
    }
    out
}

/// Straight joint-space plan from `start` to `goal` if the whole segment
/// validates; `None` otherwise. A zero-length request yields one no-op step.
pub fn interpolate_plan(
    start: &JointState,
    goal: &JointState,
    world: &CollisionWorld,
    cfg: &PlannerConfig,
    step_limit: f64,
) -> Option<MotionPlan> {
    if !world.edge_free(start, goal, cfg.edge_resolution) {
        return None;
    }
    Some(MotionPlan {
        states: discretize(&[start.clone(), goal.clone()], step_limit),
        planner_used: PlannerUsed::Interpolation,
        goal_adjusted: false,
    })
}

struct Tree {
    nodes: Vec<JointState>,
    parents: Vec<usize>,
}

impl Tree {
    fn new(root: JointState) -> Self {
        Tree { nodes: vec![root], parents: vec![usize::MAX] }
    }

    fn nearest(&self, q: &JointState) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, n) in self.nodes.iter().enumerate() {
            let d: f64 = n.0.iter().zip(&q.0).map(|(a, b)| (a - b) * (a - b)).sum();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    fn path_to_root(&self, mut i: usize) -> Vec<JointState> {
        let mut out = Vec::new();
        loop {
            out.push(self.nodes[i].clone());
            if self.parents[i] == usize::MAX {
                break;
            }
            i = self.parents[i];
        }
        out
    }
}

enum Extend {
    Reached(usize),
    Advanced(usize),
    Trapped,
}

fn extend(tree: &mut Tree, target: &JointState, world: &CollisionWorld, cfg: &PlannerConfig) -> Extend {
    let near_idx = tree.nearest(target);
    let near = tree.nodes[near_idx].clone();
    let delta = target.delta_from(&near);
    let dist: f64 = delta.iter().map(|d| d * d).sum::<f64>().sqrt();
    let (q_new, reached) = if dist <= cfg.rrt_step {
        (target.clone(), true)
    } else {
        let t = cfg.rrt_step / dist;
        (lerp(&near, target, t), false)
    };
    if !world.edge_free(&near, &q_new, cfg.edge_resolution) {
        return Extend::Trapped;
    }
    tree.nodes.push(q_new);
    tree.parents.push(near_idx);
    let idx = tree.nodes.len() - 1;
    if reached {
        Extend::Reached(idx)
    } else {
        Extend::Advanced(idx)
    }
}

/// Bidirectional RRT-Connect with uniform sampling inside the joint limits.
/// Every tree edge is validated at the configured edge resolution, so any
/// returned path is collision-free along its whole length, not just at nodes.
/// Returns the raw waypoint sequence from `start` to `goal`.
pub fn rrt_connect(
    start: &JointState,
    goal: &JointState,
    world: &CollisionWorld,
    cfg: &PlannerConfig,
    seed: u64,
) -> Option<Vec<JointState>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let limits = &world.arm.joint_limits;
    let mut tree_a = Tree::new(start.clone());
    let mut tree_b = Tree::new(goal.clone());
    // true while tree_a is rooted at the start
    let mut a_is_start = true;
    let mut budget = cfg.rrt_node_budget;

    while budget > 0 {
        budget -= 1;
        let sample = JointState(
            limits.iter().map(|&(lo, hi)| rng.random_range(lo..hi)).collect(),
        );
        match extend(&mut tree_a, &sample, world, cfg) {
            Extend::Trapped => {}
            Extend::Reached(new_idx) | Extend::Advanced(new_idx) => {
                let bridge = tree_a.nodes[new_idx].clone();
                // Greedily connect the other tree toward the new node.
                loop {
                    if budget == 0 {
                        return None;
                    }
                    budget -= 1;
                    match extend(&mut tree_b, &bridge, world, cfg) {
                        Extend::Trapped => break,
                        Extend::Advanced(_) => {}
                        Extend::Reached(meet_idx) => {
                            let mut a_path = tree_a.path_to_root(new_idx);
                            a_path.reverse();
                            let mut b_path = tree_b.path_to_root(meet_idx);
                            // b_path runs bridge -> root of tree_b; drop the
                            // duplicated bridge node.
                            b_path.remove(0);
                            let mut full = a_path;
                            full.append(&mut b_path);
                            if !a_is_start {
                                full.reverse();
                            }
                            return Some(full);
                        }
                    }
                }
            }
        }
        std::mem::swap(&mut tree_a, &mut tree_b);
        a_is_start = !a_is_start;
    }
    None
}

/// Joint-space Euclidean length of a waypoint polyline.
pub fn path_length(states: &[JointState]) -> f64 {
    states
        .windows(2)
        .map(|w| w[1].delta_from(&w[0]).iter().map(|d| d * d).sum::<f64>().sqrt())
        .sum()
}

/// Random-pair shortcutting: repeatedly tries to replace a sub-path with its
/// straight segment when that segment validates. Endpoints never move and the
/// path length never increases. Output is re-discretized by the caller.
pub fn shortcut(
    mut states: Vec<JointState>,
    world: &CollisionWorld,
    cfg: &PlannerConfig,
    seed: u64,
) -> Vec<JointState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..cfg.shortcut_iters {
        if states.len() < 3 {
            break;
        }
        let i = rng.random_range(0..states.len() - 2);
        let j = rng.random_range(i + 2..states.len());
        if world.edge_free(&states[i], &states[j], cfg.edge_resolution) {
            states.drain(i + 1..j);
        }
    }
    states
}

/// Finds a valid motion-plan goal for the displacement `action` from `q`.
/// The unmodified goal is preferred; otherwise the displacement is scaled
/// down geometrically until a collision-free, in-limits candidate appears.
/// Candidates whose residual displacement no longer exceeds `step_limit` in
/// any joint are not motion-plan targets, so the search stops there.
pub fn adjust_invalid_goal(
    q: &JointState,
    action: &[f64],
    world: &CollisionWorld,
    cfg: &PlannerConfig,
    step_limit: f64,
) -> Option<JointState> {
    let candidate = |scale: f64| {
        JointState(q.0.iter().zip(action).map(|(qi, a)| qi + a * scale).collect())
    };
    let full = candidate(1.0);
    if world.is_free(&full) {
        return Some(full);
    }
    let mut scale = 1.0;
    for _ in 0..cfg.goal_reduction_max_tries {
        scale *= cfg.goal_reduction_factor;
        let scaled: Vec<f64> = action.iter().map(|a| a * scale).collect();
        if inf_norm(&scaled) <= step_limit {
            return None;
        }
        let cand = candidate(scale);
        if world.is_free(&cand) {
            return Some(cand);
        }
    }
    None
}

/// Full planning pipeline for a motion-plan action: goal adjustment, straight
/// interpolation, RRT-Connect fallback, shortcut smoothing, re-discretization,
/// and a final validation sweep at half the edge resolution. `None` means the
/// caller should fall back to a no-op transition.
pub fn plan(
    q: &JointState,
    action: &[f64],
    world: &CollisionWorld,
    cfg: &PlannerConfig,
    step_limit: f64,
    seed: u64,
) -> Option<MotionPlan> {
    assert!(
        inf_norm(action) > step_limit,
        "plan() requires a motion-plan-scale displacement"
    );
    let goal = adjust_invalid_goal(q, action, world, cfg, step_limit)?;
    let unadjusted = JointState(q.0.iter().zip(action).map(|(qi, a)| qi + a).collect());
    let goal_adjusted = goal != unadjusted;

    let mut plan = match interpolate_plan(q, &goal, world, cfg, step_limit) {
        Some(mut p) => {
            p.goal_adjusted = goal_adjusted;
            p
        }
        None => {
            let raw = rrt_connect(q, &goal, world, cfg, seed)?;
            let smoothed = shortcut(raw, world, cfg, crate::mix_seed(seed, 0x5c, 0));
            MotionPlan {
                states: discretize(&smoothed, step_limit),
                planner_used: PlannerUsed::RrtConnect,
                goal_adjusted,
            }
        }
    };

    // Guard against near-tangent states introduced by re-discretization:
    // verify the final path at twice the planning resolution.
    let fine = cfg.edge_resolution / 2.0;
    let sound = plan
        .states
        .windows(2)
        .all(|w| world.edge_free(&w[0], &w[1], fine));
    if !sound {
        return None;
    }
    if plan.states.len() == 1 {
        // Zero-displacement goal: represent as one explicit no-op step.
        plan.states.push(plan.states[0].clone());
    }
    Some(plan)
}
