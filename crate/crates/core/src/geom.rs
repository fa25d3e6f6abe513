//! Planar geometry for an articulated chain: forward kinematics and exact
//! capsule/disc collision predicates shared by the environment and the planner.

use serde::{Deserialize, Serialize};

/// 2D point / vector in world units (meters).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn dist(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    pub fn scaled(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }

    /// Unit vector, or `None` when shorter than `eps`.
    pub fn normalized(self, eps: f64) -> Option<Vec2> {
        let n = self.norm();
        (n > eps).then(|| self.scaled(1.0 / n))
    }

    /// Counterclockwise perpendicular.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

/// Thick segment: all points within `radius` of segment `a`-`b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Capsule {
    pub a: Vec2,
    pub b: Vec2,
    pub radius: f64,
}

/// Circle obstacle / object body.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disc {
    pub center: Vec2,
    pub radius: f64,
}

/// Kinematic description of the planar chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmModel {
    pub base: Vec2,
    pub link_lengths: Vec<f64>,
    pub link_radius: f64,
    /// Per-joint `[lo, hi]` in radians.
    pub joint_limits: Vec<(f64, f64)>,
}

impl ArmModel {
    pub fn dof(&self) -> usize {
        self.link_lengths.len()
    }

    /// Maximum end-effector distance from the base.
    pub fn reach(&self) -> f64 {
        self.link_lengths.iter().sum()
    }

    pub fn within_limits(&self, q: &JointState) -> bool {
        q.0.iter()
            .zip(&self.joint_limits)
            .all(|(&qi, &(lo, hi))| qi >= lo && qi <= hi)
    }

    pub fn clamp_to_limits(&self, q: &JointState) -> JointState {
        JointState(
            q.0.iter()
                .zip(&self.joint_limits)
                .map(|(&qi, &(lo, hi))| qi.clamp(lo, hi))
                .collect(),
        )
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.link_lengths.is_empty() {
            return Err("arm needs at least one link".into());
        }
        if self.link_lengths.iter().any(|&l| !(l > 0.0)) {
            return Err("link lengths must be positive".into());
        }
        if !(self.link_radius > 0.0) {
            return Err("link radius must be positive".into());
        }
        if self.joint_limits.len() != self.link_lengths.len() {
            return Err("one joint limit pair per link required".into());
        }
        if self.joint_limits.iter().any(|&(lo, hi)| !(lo < hi)) {
            return Err("joint limits must satisfy lo < hi".into());
        }
        Ok(())
    }
}

/// Joint-space configuration, radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointState(pub Vec<f64>);

impl JointState {
    pub fn dof(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Per-joint displacement `self - from`.
    pub fn delta_from(&self, from: &JointState) -> Vec<f64> {
        self.0.iter().zip(&from.0).map(|(a, b)| a - b).collect()
    }
}

/// Largest per-joint magnitude of a displacement.
pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
}

/// Joint positions of the chain: `d + 1` points, base first, end-effector last.
fn joint_points(arm: &ArmModel, q: &JointState) -> Vec<Vec2> {
    assert_eq!(
        q.dof(),
        arm.dof(),
        "joint state dimension {} does not match arm dof {}",
        q.dof(),
        arm.dof()
    );
    let mut pts = Vec::with_capacity(arm.dof() + 1);
    let mut p = arm.base;
    let mut angle = 0.0f64;
    pts.push(p);
    for (qi, len) in q.0.iter().zip(&arm.link_lengths) {
        angle += qi;
        p = p + Vec2::new(angle.cos(), angle.sin()).scaled(*len);
        pts.push(p);
    }
    pts
}

/// Link capsules under cumulative joint rotation, plus the end-effector point.
pub fn forward_kinematics(arm: &ArmModel, q: &JointState) -> (Vec<Capsule>, Vec2) {
    let pts = joint_points(arm, q);
    let caps = pts
        .windows(2)
        .map(|w| Capsule { a: w[0], b: w[1], radius: arm.link_radius })
        .collect();
    (caps, pts[arm.dof()])
}

/// End-effector position only (skips building the capsule list).
pub fn end_effector(arm: &ArmModel, q: &JointState) -> Vec2 {
    *joint_points(arm, q).last().unwrap()
}

/// Closest point on segment `a`-`b` to `p`.
pub fn closest_point_on_segment(a: Vec2, b: Vec2, p: Vec2) -> Vec2 {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    if len_sq <= 0.0 {
        return a;
    }
    let t = ((p - a).dot(ab) / len_sq).clamp(0.0, 1.0);
    a + ab.scaled(t)
}

fn segment_segment_distance(a1: Vec2, b1: Vec2, a2: Vec2, b2: Vec2) -> f64 {
    let d1 = b1 - a1;
    let d2 = b2 - a2;
    let r = a1 - a2;
    let a = d1.norm_sq();
    let e = d2.norm_sq();
    let f = d2.dot(r);
    let (s, t);
    if a <= 1e-18 && e <= 1e-18 {
        return r.norm();
    }
    if a <= 1e-18 {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(r);
        if e <= 1e-18 {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(d2);
            let denom = a * e - b * b;
            let mut s_ = if denom > 1e-18 { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
            let mut t_ = (b * s_ + f) / e;
            if t_ < 0.0 {
                t_ = 0.0;
                s_ = (-c / a).clamp(0.0, 1.0);
            } else if t_ > 1.0 {
                t_ = 1.0;
                s_ = ((b - c) / a).clamp(0.0, 1.0);
            }
            s = s_;
            t = t_;
        }
    }
    ((a1 + d1.scaled(s)) - (a2 + d2.scaled(t))).norm()
}

/// Result of a capsule/disc proximity query.
#[derive(Debug, Clone, Copy)]
pub struct Overlap {
    pub overlapping: bool,
    /// Penetration depth; zero when separated.
    pub depth: f64,
    /// Minimal translation moving the disc out of contact; zero when separated.
    pub mtv: Vec2,
}

impl Overlap {
    const NONE: Overlap = Overlap { overlapping: false, depth: 0.0, mtv: Vec2::ZERO };
}

/// Overlap test: the shapes intersect iff the segment-to-center distance is
/// strictly below the radius sum. The MTV pushes the disc out along the
/// shortest escape direction; a disc centered exactly on the segment escapes
/// along the segment's perpendicular (or +y for a degenerate capsule).
pub fn capsule_disc_overlap(c: &Capsule, o: &Disc) -> Overlap {
    let closest = closest_point_on_segment(c.a, c.b, o.center);
    let to_center = o.center - closest;
    let dist = to_center.norm();
    let sum = c.radius + o.radius;
    if dist >= sum {
        return Overlap::NONE;
    }
    let depth = sum - dist;
    let dir = to_center.normalized(1e-12).unwrap_or_else(|| {
        (c.b - c.a).perp().normalized(1e-12).unwrap_or(Vec2::new(0.0, 1.0))
    });
    Overlap { overlapping: true, depth, mtv: dir.scaled(depth) }
}

/// Disc/disc variant used for object-vs-obstacle separation.
pub fn disc_disc_overlap(a: &Disc, b: &Disc) -> Overlap {
    let to_center = b.center - a.center;
    let dist = to_center.norm();
    let sum = a.radius + b.radius;
    if dist >= sum {
        return Overlap::NONE;
    }
    let depth = sum - dist;
    let dir = to_center.normalized(1e-12).unwrap_or(Vec2::new(0.0, 1.0));
    Overlap { overlapping: true, depth, mtv: dir.scaled(depth) }
}

/// True when the configuration is invalid: joint limits violated, a link hits
/// an obstacle or the optional extra body, or two links with index gap >= 2
/// intersect (adjacent links share a joint and are excluded).
pub fn config_in_collision(
    arm: &ArmModel,
    q: &JointState,
    obstacles: &[Disc],
    extra: Option<&Disc>,
) -> bool {
    if !arm.within_limits(q) {
        return true;
    }
    let (caps, _) = forward_kinematics(arm, q);
    for cap in &caps {
        for obs in obstacles {
            if capsule_disc_overlap(cap, obs).overlapping {
                return true;
            }
        }
        if let Some(body) = extra {
            if capsule_disc_overlap(cap, body).overlapping {
                return true;
            }
        }
    }
    let two_r = 2.0 * arm.link_radius;
    for i in 0..caps.len() {
        for j in (i + 2)..caps.len() {
            if segment_segment_distance(caps[i].a, caps[i].b, caps[j].a, caps[j].b) < two_r {
                return true;
            }
        }
    }
    false
}

/// Validates the straight joint-space segment from `q_a` to `q_b` by checking
/// `ceil(max_i |dq_i| / resolution) + 1` evenly spaced configurations,
/// endpoints included. True iff every checked configuration is free.
pub fn edge_collision_free(
    arm: &ArmModel,
    q_a: &JointState,
    q_b: &JointState,
    obstacles: &[Disc],
    extra: Option<&Disc>,
    resolution: f64,
) -> bool {
    assert!(resolution > 0.0, "edge resolution must be positive");
    let delta = q_b.delta_from(q_a);
    let steps = (inf_norm(&delta) / resolution).ceil() as usize;
    for k in 0..=steps {
        let q = if k == steps {
            q_b.clone()
        } else {
            let t = k as f64 / steps.max(1) as f64;
            JointState(q_a.0.iter().zip(&delta).map(|(a, d)| a + d * t).collect())
        };
        if config_in_collision(arm, &q, obstacles, extra) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn two_link_arm() -> ArmModel {
        ArmModel {
            base: Vec2::ZERO,
            link_lengths: vec![1.0, 1.0],
            link_radius: 0.05,
            joint_limits: vec![(-PI, PI), (-PI, PI)],
        }
    }

    #[test]
    fn fk_straight_chain_along_x() {
        let (_, eef) = forward_kinematics(&two_link_arm(), &JointState(vec![0.0, 0.0]));
        assert!(eef.dist(Vec2::new(2.0, 0.0)) < 1e-12);
    }

    #[test]
    fn fk_quarter_turn() {
        let (_, eef) = forward_kinematics(&two_link_arm(), &JointState(vec![FRAC_PI_2, 0.0]));
        assert!(eef.dist(Vec2::new(0.0, 2.0)) < 1e-12);
    }

    #[test]
    fn fk_opposed_rotations() {
        // Cumulative angles pi/2 then 0: elbow at (0,1), tip one unit along +x.
        let (caps, eef) =
            forward_kinematics(&two_link_arm(), &JointState(vec![FRAC_PI_2, -FRAC_PI_2]));
        assert!(eef.dist(Vec2::new(1.0, 1.0)) < 1e-12);
        assert!(caps[0].b.dist(Vec2::new(0.0, 1.0)) < 1e-12);
    }

    #[test]
    #[should_panic(expected = "does not match arm dof")]
    fn fk_dimension_mismatch_panics() {
        forward_kinematics(&two_link_arm(), &JointState(vec![0.0]));
    }

    #[test]
    fn fk_preserves_link_lengths() {
        let arm = ArmModel {
            base: Vec2::new(0.3, -0.2),
            link_lengths: vec![0.11, 0.07, 0.23, 0.05],
            link_radius: 0.02,
            joint_limits: vec![(-PI, PI); 4],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let q = JointState((0..4).map(|_| rng.random_range(-PI..PI)).collect());
            let (caps, _) = forward_kinematics(&arm, &q);
            for (cap, len) in caps.iter().zip(&arm.link_lengths) {
                assert!((cap.a.dist(cap.b) - len).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn overlap_examples() {
        let cap = Capsule { a: Vec2::ZERO, b: Vec2::new(1.0, 0.0), radius: 0.1 };

        let far = capsule_disc_overlap(&cap, &Disc { center: Vec2::new(0.5, 0.5), radius: 0.1 });
        assert!(!far.overlapping);
        assert_eq!(far.depth, 0.0);
        assert_eq!(far.mtv, Vec2::ZERO);

        let near = capsule_disc_overlap(&cap, &Disc { center: Vec2::new(0.5, 0.15), radius: 0.1 });
        assert!(near.overlapping);
        assert!((near.depth - 0.05).abs() < 1e-12);
        assert!(near.mtv.dist(Vec2::new(0.0, 0.05)) < 1e-12);

        let centered = capsule_disc_overlap(&cap, &Disc { center: Vec2::new(0.4, 0.0), radius: 0.1 });
        assert!(centered.overlapping);
        assert!((centered.depth - 0.2).abs() < 1e-12);
        // Escape direction for an on-axis disc is the segment perpendicular.
        assert!((centered.mtv.norm() - 0.2).abs() < 1e-12);
        assert!(centered.mtv.dot(Vec2::new(1.0, 0.0)).abs() < 1e-12);
    }

    #[test]
    fn exact_touch_is_not_overlap() {
        let cap = Capsule { a: Vec2::ZERO, b: Vec2::new(1.0, 0.0), radius: 0.1 };
        let r = capsule_disc_overlap(&cap, &Disc { center: Vec2::new(0.5, 0.2), radius: 0.1 });
        assert!(!r.overlapping);
    }

    #[test]
    fn collision_empty_world_is_free() {
        let arm = two_link_arm();
        assert!(!config_in_collision(&arm, &JointState(vec![0.3, -0.2]), &[], None));
    }

    #[test]
    fn collision_obstacle_at_base() {
        let arm = two_link_arm();
        let obs = [Disc { center: Vec2::ZERO, radius: 0.2 }];
        assert!(config_in_collision(&arm, &JointState(vec![0.3, -0.2]), &obs, None));
    }

    #[test]
    fn collision_out_of_limits() {
        let mut arm = two_link_arm();
        arm.joint_limits = vec![(-1.0, 1.0), (-1.0, 1.0)];
        assert!(config_in_collision(&arm, &JointState(vec![1.5, 0.0]), &[], None));
    }

    #[test]
    fn self_collision_on_folded_chain() {
        let arm = ArmModel {
            base: Vec2::ZERO,
            link_lengths: vec![0.11; 4],
            link_radius: 0.02,
            joint_limits: vec![(-PI, PI), (-FRAC_PI_2, FRAC_PI_2), (-FRAC_PI_2, FRAC_PI_2), (-FRAC_PI_2, FRAC_PI_2)],
        };
        // Fully folded square: link 4 lands back on the base joint.
        let q = JointState(vec![0.0, FRAC_PI_2, FRAC_PI_2, FRAC_PI_2]);
        assert!(config_in_collision(&arm, &q, &[], None));
        // Gentle arc stays clear of itself.
        let q = JointState(vec![0.0, 0.3, 0.3, 0.3]);
        assert!(!config_in_collision(&arm, &q, &[], None));
    }

    /// Dense-sampling oracle: a capsule intersects a disc iff some boundary
    /// point of the capsule lies strictly inside the disc, or the disc center
    /// lies inside the capsule. 1000 boundary samples per capsule.
    fn oracle_capsule_disc(c: &Capsule, o: &Disc) -> bool {
        let axis = c.b - c.a;
        let dir = axis.normalized(1e-15).unwrap_or(Vec2::new(1.0, 0.0));
        let n = dir.perp();
        let seg_len = axis.norm();
        let perimeter = 2.0 * seg_len + 2.0 * std::f64::consts::PI * c.radius;
        let total = 1000usize;
        let side_pts = ((seg_len / perimeter) * total as f64).round() as usize;
        let cap_pts = (total - 2 * side_pts) / 2;
        let mut boundary = Vec::with_capacity(total + 4);
        for k in 0..=side_pts {
            let t = k as f64 / side_pts.max(1) as f64;
            let p = c.a + axis.scaled(t);
            boundary.push(p + n.scaled(c.radius));
            boundary.push(p + n.scaled(-c.radius));
        }
        for k in 0..=cap_pts {
            let th = std::f64::consts::PI * (k as f64 / cap_pts.max(1) as f64 - 0.5);
            let (s, co) = th.sin_cos();
            boundary.push(c.b + dir.scaled(co * c.radius) + n.scaled(s * c.radius));
            boundary.push(c.a + dir.scaled(-co * c.radius) + n.scaled(s * c.radius));
        }
        if boundary.iter().any(|p| p.dist(o.center) < o.radius) {
            return true;
        }
        // Disc fully inside the capsule.
        closest_point_on_segment(c.a, c.b, o.center).dist(o.center) < c.radius
    }

    /// Dense-sampling self-collision oracle: 1000 points along capsule i's
    /// axis, each tested against capsule j's segment at the summed radius.
    fn oracle_capsule_capsule(a: &Capsule, b: &Capsule) -> bool {
        let n = 1000usize;
        (0..=n).any(|k| {
            let t = k as f64 / n as f64;
            let p = a.a + (a.b - a.a).scaled(t);
            closest_point_on_segment(b.a, b.b, p).dist(p) < a.radius + b.radius
        })
    }

    #[test]
    fn collision_matches_dense_sampling_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let arm = ArmModel {
            base: Vec2::ZERO,
            link_lengths: vec![0.11; 4],
            link_radius: 0.02,
            joint_limits: vec![(-PI, PI); 4],
        };
        let mut kept = 0;
        while kept < 1000 {
            let q = JointState((0..4).map(|_| rng.random_range(-PI..PI)).collect());
            let obstacles: Vec<Disc> = (0..rng.random_range(1..4usize))
                .map(|_| Disc {
                    center: Vec2::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)),
                    radius: rng.random_range(0.02..0.08),
                })
                .collect();
            let (caps, _) = forward_kinematics(&arm, &q);
            // Skip near-tangent instances the finite sampling cannot decide.
            let near_obstacle_boundary = caps.iter().any(|c| {
                obstacles.iter().any(|o| {
                    let d = closest_point_on_segment(c.a, c.b, o.center).dist(o.center);
                    (d - (c.radius + o.radius)).abs() < 1e-4
                })
            });
            let near_self_boundary = (0..caps.len()).any(|i| {
                ((i + 2)..caps.len()).any(|j| {
                    let d = segment_segment_distance(caps[i].a, caps[i].b, caps[j].a, caps[j].b);
                    (d - 2.0 * arm.link_radius).abs() < 1e-4
                })
            });
            if near_obstacle_boundary || near_self_boundary {
                continue;
            }
            let hits_obstacle =
                caps.iter().any(|c| obstacles.iter().any(|o| oracle_capsule_disc(c, o)));
            let hits_self = (0..caps.len())
                .any(|i| ((i + 2)..caps.len()).any(|j| oracle_capsule_capsule(&caps[i], &caps[j])));
            let expected = hits_obstacle || hits_self;
            let got = config_in_collision(&arm, &q, &obstacles, None);
            assert_eq!(got, expected, "q={:?} obstacles={:?}", q, obstacles);
            kept += 1;
        }
    }

    #[test]
    fn edge_check_at_zero_length_matches_point_check() {
        let arm = two_link_arm();
        let obs = [Disc { center: Vec2::new(1.0, 0.0), radius: 0.2 }];
        let q_hit = JointState(vec![0.0, 0.0]);
        let q_free = JointState(vec![FRAC_PI_2, 0.0]);
        assert!(!edge_collision_free(&arm, &q_hit, &q_hit, &obs, None, 0.02));
        assert!(edge_collision_free(&arm, &q_free, &q_free, &obs, None, 0.02));
    }

    #[test]
    fn edge_check_catches_midpoint_collision() {
        let arm = two_link_arm();
        // Sweep from pointing +x to pointing +y; obstacle sits on the diagonal.
        let q_a = JointState(vec![0.0, 0.0]);
        let q_b = JointState(vec![FRAC_PI_2, 0.0]);
        let blocker = [Disc { center: Vec2::new(1.2, 1.2), radius: 0.2 }];
        assert!(!config_in_collision(&arm, &q_a, &blocker, None));
        assert!(!config_in_collision(&arm, &q_b, &blocker, None));
        assert!(!edge_collision_free(&arm, &q_a, &q_b, &blocker, None, 0.02));
        assert!(edge_collision_free(&arm, &q_a, &q_b, &[], None, 0.02));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn rotate(p: Vec2, about: Vec2, th: f64) -> Vec2 {
            let (s, c) = th.sin_cos();
            let d = p - about;
            about + Vec2::new(c * d.x - s * d.y, s * d.x + c * d.y)
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(256))]

            #[test]
            fn overlap_invariant_under_rigid_motion(
                ax in -1.0f64..1.0, ay in -1.0f64..1.0,
                bx in -1.0f64..1.0, by in -1.0f64..1.0,
                cx in -1.0f64..1.0, cy in -1.0f64..1.0,
                rc in 0.01f64..0.3, rd in 0.01f64..0.3,
                tx in -5.0f64..5.0, ty in -5.0f64..5.0,
                th in -3.0f64..3.0,
            ) {
                let cap = Capsule { a: Vec2::new(ax, ay), b: Vec2::new(bx, by), radius: rc };
                let disc = Disc { center: Vec2::new(cx, cy), radius: rd };
                let base = capsule_disc_overlap(&cap, &disc);

                let t = Vec2::new(tx, ty);
                let shifted = capsule_disc_overlap(
                    &Capsule { a: cap.a + t, b: cap.b + t, radius: rc },
                    &Disc { center: disc.center + t, radius: rd },
                );
                prop_assert!((base.depth - shifted.depth).abs() < 1e-9);

                let pivot = Vec2::new(0.3, -0.7);
                let rotated = capsule_disc_overlap(
                    &Capsule { a: rotate(cap.a, pivot, th), b: rotate(cap.b, pivot, th), radius: rc },
                    &Disc { center: rotate(disc.center, pivot, th), radius: rd },
                );
                prop_assert!((base.depth - rotated.depth).abs() < 1e-9);
                // Booleans agree away from the knife edge.
                let closest = closest_point_on_segment(cap.a, cap.b, disc.center);
                if (closest.dist(disc.center) - (rc + rd)).abs() > 1e-7 {
                    prop_assert_eq!(base.overlapping, shifted.overlapping);
                    prop_assert_eq!(base.overlapping, rotated.overlapping);
                }
            }
        }
    }
}
