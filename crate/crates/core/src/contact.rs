//! Contact model: particle-rigid adhesion and Coulomb friction, scaled
//! particle-particle interactions with self-separation, penetration
//! resolution, and the force-based virtual grippers that grasp through
//! contact alone (no attachment constraints).

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::pbd::{ParticleCloth, SimParams};
use crate::scene::{Primitive, Scene, SurfaceHit};
use crate::{Iso3, Vec3};

/// Which collider a contact refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ColliderId {
    /// Index into `Scene::bodies`.
    Body(usize),
    /// Finger proxy sphere `proxy` of `Scene::grippers[gripper]`.
    GripperProxy { gripper: usize, proxy: usize },
}

/// One particle-collider proximity record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Contact {
    pub particle_index: usize,
    pub collider: ColliderId,
    pub surface_point: Vec3,
    /// Outward unit normal at the surface point.
    pub normal: Vec3,
    /// Signed distance of the particle center to the surface; negative means
    /// penetrating.
    pub gap: f64,
    /// Velocity of the collider surface at the contact point.
    pub body_velocity: Vec3,
    /// Particle velocity minus body velocity at detection time.
    pub relative_velocity: Vec3,
}

impl Contact {
    /// Stable textual collider id for reports.
    pub fn body_id(&self, scene: &Scene) -> String {
        match self.collider {
            ColliderId::Body(b) => scene.bodies[b].body_id.clone(),
            ColliderId::GripperProxy { gripper, proxy } => {
                let side = &scene.grippers[gripper].side;
                format!("gripper_{side}_{proxy}")
            }
        }
    }
}

/// Per-step contact summary; serializable to JSON lines for debugging.
#[derive(Debug, Clone, Default)]
pub struct ContactReport {
    pub contacts: Vec<Contact>,
    pub skipped_distance: usize,
    pub skipped_bending: usize,
    pub self_pair_count: usize,
}

impl ContactReport {
    pub fn to_json_lines(&self, scene: &Scene) -> String {
        let mut out = String::new();
        for c in &self.contacts {
            let line = serde_json::json!({
                "particle": c.particle_index,
                "body_id": c.body_id(scene),
                "gap": c.gap,
                "normal": [c.normal.x, c.normal.y, c.normal.z],
                "surface_point": [c.surface_point.x, c.surface_point.y, c.surface_point.z],
            });
            out.push_str(&line.to_string());
            out.push('\n');
        }
        out
    }
}

/// Which hand of the pinch pair a gripper plays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GripperSide {
    Left,
    Right,
}

impl std::fmt::Display for GripperSide {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GripperSide::Left => write!(f, "left"),
            GripperSide::Right => write!(f, "right"),
        }
    }
}

/// One finger-pad sphere of a gripper, in the gripper's local frame at full
/// aperture.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FingerProxy {
    pub local_offset: Vec3,
    pub radius: f64,
}

/// Free-floating 6-DOF pinch end-effector. Finger proxy offsets scale with
/// aperture between `closed_offset_scale` (aperture 0) and 1 (aperture 1);
/// grasping force comes entirely from adhesion, friction, and penetration
/// response at the proxy surfaces.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VirtualGripper {
    pub pose: Iso3,
    /// 1 = open, 0 = closed.
    pub aperture: f64,
    pub finger_proxies: Vec<FingerProxy>,
    /// Linear speed cap, m/s.
    pub max_speed: f64,
    /// Angular rate cap, rad/s.
    pub max_angular_speed: f64,
    /// Aperture rate cap, 1/s.
    pub aperture_rate: f64,
    pub closed_offset_scale: f64,
    pub side: GripperSide,
    /// World-space velocity of each proxy center, from the last advance.
    pub proxy_velocities: Vec<Vec3>,
}

impl VirtualGripper {
    /// Standard two-pad pinch gripper: two spheres per jaw.
    pub fn pinch(side: GripperSide) -> VirtualGripper {
        let proxies = vec![
            FingerProxy {
                local_offset: Vec3::new(-0.035, 0.0, 0.0),
                radius: 0.012,
            },
            FingerProxy {
                local_offset: Vec3::new(0.035, 0.0, 0.0),
                radius: 0.012,
            },
            FingerProxy {
                local_offset: Vec3::new(-0.035, 0.0, -0.025),
                radius: 0.012,
            },
            FingerProxy {
                local_offset: Vec3::new(0.035, 0.0, -0.025),
                radius: 0.012,
            },
        ];
        let n = proxies.len();
        VirtualGripper {
            pose: Iso3::identity(),
            aperture: 1.0,
            finger_proxies: proxies,
            max_speed: 1.2,
            max_angular_speed: std::f64::consts::PI,
            aperture_rate: 2.0,
            closed_offset_scale: 0.2,
            side,
            proxy_velocities: vec![Vec3::zeros(); n],
        }
    }

    fn offset_scale(&self) -> f64 {
        self.closed_offset_scale + (1.0 - self.closed_offset_scale) * self.aperture
    }

    /// World centers of the finger proxies at the current pose and aperture.
    pub fn proxy_world_centers(&self) -> Vec<Vec3> {
        let s = self.offset_scale();
        self.finger_proxies
            .iter()
            .map(|p| {
                let world = self.pose.transform_point(&(p.local_offset * s).into());
                Vec3::new(world.x, world.y, world.z)
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.finger_proxies.len() < 2 {
            return Err(CoreError::InvalidArgument(
                "gripper needs at least 2 finger proxies".into(),
            ));
        }
        if self.finger_proxies.iter().any(|p| p.radius <= 0.0) {
            return Err(CoreError::InvalidArgument("proxy radius must be > 0".into()));
        }
        if !(0.0..=1.0).contains(&self.aperture) {
            return Err(CoreError::InvalidArgument("aperture must be in [0,1]".into()));
        }
        Ok(())
    }
}

/// Move a gripper toward a target pose and aperture with capped linear,
/// angular, and aperture rates; proxy world velocities are updated by finite
/// difference and later fed into friction as the rigid-side velocity.
pub fn advance_gripper(
    gripper: &mut VirtualGripper,
    target_pose: &Iso3,
    target_aperture: f64,
    dt: f64,
) -> Result<()> {
    if !(dt > 0.0) {
        return Err(CoreError::InvalidArgument("dt must be > 0".into()));
    }
    let t = target_pose.translation.vector;
    if !(t.iter().all(|c| c.is_finite()) && target_aperture.is_finite()) {
        return Err(CoreError::InvalidArgument("non-finite gripper target".into()));
    }
    let before = gripper.proxy_world_centers();

    let current = gripper.pose.translation.vector;
    let delta = t - current;
    let dist = delta.norm();
    let max_move = gripper.max_speed * dt;
    let new_pos = if dist <= max_move || dist < 1e-12 {
        t
    } else {
        current + delta * (max_move / dist)
    };

    let target_rot = target_pose.rotation;
    let angle = gripper.pose.rotation.angle_to(&target_rot);
    let max_turn = gripper.max_angular_speed * dt;
    let new_rot = if angle <= max_turn || angle < 1e-12 {
        target_rot
    } else {
        gripper.pose.rotation.slerp(&target_rot, max_turn / angle)
    };

    let target_aperture = target_aperture.clamp(0.0, 1.0);
    let max_ap = gripper.aperture_rate * dt;
    let ap_delta = (target_aperture - gripper.aperture).clamp(-max_ap, max_ap);

    gripper.pose = Iso3::from_parts(new_pos.into(), new_rot);
    gripper.aperture += ap_delta;

    let after = gripper.proxy_world_centers();
    gripper.proxy_velocities = before
        .iter()
        .zip(&after)
        .map(|(b, a)| (a - b) / dt)
        .collect();
    Ok(())
}

/// Adhesion attraction toward a surface proxy point:
/// `-k_adh * (xi - xj)` when `|xi - xj| < r_adh`, else zero.
pub fn adhesion_force(xi: Vec3, xj: Vec3, k_adh: f64, r_adh: f64) -> Vec3 {
    let delta = xi - xj;
    if delta.norm() < r_adh {
        -k_adh * delta
    } else {
        Vec3::zeros()
    }
}

/// Stability clamp on attraction forces applied in the predictor: the
/// velocity impulse `w * dt * f` may displace the particle by at most
/// `budget` meters in one substep. Light particles would otherwise be
/// slingshotted through their own contact neighborhood by a stiff
/// attraction spring.
pub fn clamp_attraction_force(f: Vec3, budget: f64, w: f64, dt: f64) -> Vec3 {
    let mag = f.norm();
    if mag < 1e-12 || w <= 0.0 {
        return f;
    }
    if budget <= 0.0 {
        return Vec3::zeros();
    }
    let max_mag = budget / (w * dt * dt);
    if mag > max_mag {
        f * (max_mag / mag)
    } else {
        f
    }
}

/// Per-substep displacement budget for adhesion toward a collider. Gripper
/// pads get a larger budget (they must carry hanging cloth weight through
/// contact force alone); large static bodies stay a gentle stick so resting
/// stacks are not sucked through each other. Either way the effective
/// holding force per particle stays bounded, so overloaded contacts break.
pub fn adhesion_budget(collider: ColliderId, gap: f64, particle_radius: f64) -> f64 {
    let class_budget = match collider {
        ColliderId::Body(_) => particle_radius,
        ColliderId::GripperProxy { .. } => 4.0 * particle_radius,
    };
    gap.max(0.0).min(class_budget)
}

/// Coulomb friction velocity correction: `dv = wi * dt * (-mu * |fn| * vt_hat)`,
/// clamped so friction may stop sliding but never reverse it.
pub fn friction_impulse(fn_vec: Vec3, vt: Vec3, mu: f64, dt: f64, wi: f64) -> Vec3 {
    let vt_norm = vt.norm();
    if vt_norm < 1e-12 || mu <= 0.0 || wi <= 0.0 {
        return Vec3::zeros();
    }
    let mag = wi * dt * mu * fn_vec.norm();
    if mag >= vt_norm {
        -vt
    } else {
        -vt * (mag / vt_norm)
    }
}

/// Return every (particle, collider) pair with signed distance below
/// `max(r_adh, margin)`; complete and duplicate-free, in deterministic
/// (particle, body, proxy) order.
pub fn detect_contacts(
    cloth: &ParticleCloth,
    scene: &Scene,
    r_adh: f64,
    margin: f64,
) -> Vec<Contact> {
    let threshold = r_adh.max(margin);
    let mut contacts = Vec::new();
    for (pi, &x) in cloth.positions.iter().enumerate() {
        let v = cloth.velocities[pi];
        for (bi, body) in scene.bodies.iter().enumerate() {
            let hit = body.surface_hit_world(x);
            if hit.distance < threshold {
                contacts.push(Contact {
                    particle_index: pi,
                    collider: ColliderId::Body(bi),
                    surface_point: hit.surface_point,
                    normal: hit.normal,
                    gap: hit.distance,
                    body_velocity: Vec3::zeros(),
                    relative_velocity: v,
                });
            }
        }
        for (gi, gripper) in scene.grippers.iter().enumerate() {
            let centers = gripper.proxy_world_centers();
            for (si, center) in centers.iter().enumerate() {
                let sphere = Primitive::Sphere {
                    center: *center,
                    radius: gripper.finger_proxies[si].radius,
                };
                let hit: SurfaceHit = sphere.surface_hit(x);
                if hit.distance < threshold {
                    let body_v = gripper
                        .proxy_velocities
                        .get(si)
                        .copied()
                        .unwrap_or_else(Vec3::zeros);
                    contacts.push(Contact {
                        particle_index: pi,
                        collider: ColliderId::GripperProxy {
                            gripper: gi,
                            proxy: si,
                        },
                        surface_point: hit.surface_point,
                        normal: hit.normal,
                        gap: hit.distance,
                        body_velocity: body_v,
                        relative_velocity: v - body_v,
                    });
                }
            }
        }
    }
    contacts
}

/// Project penetrating particles (gap < 0) to the surface along the contact
/// normal. Pinned particles are untouched. The hit is re-evaluated at the
/// particle's current corrected position so sequential projection against
/// several bodies converges; a bounded fixed-point loop handles particles
/// caught inside multiple bodies.
pub fn resolve_penetration(
    cloth: &ParticleCloth,
    scene: &Scene,
    contacts: &[Contact],
    positions: &mut [Vec3],
) {
    resolve_penetration_accumulate(cloth, scene, contacts, positions, None);
}

/// Like `resolve_penetration`, but optionally accumulates the correction
/// magnitude per contact (used to estimate normal force for friction).
pub fn resolve_penetration_accumulate(
    cloth: &ParticleCloth,
    scene: &Scene,
    contacts: &[Contact],
    positions: &mut [Vec3],
    mut accum: Option<&mut Vec<f64>>,
) {
    const MAX_PASSES: usize = 8;
    for _ in 0..MAX_PASSES {
        let mut any = false;
        for (ci, c) in contacts.iter().enumerate() {
            if cloth.inverse_masses[c.particle_index] == 0.0 {
                continue;
            }
            let x = positions[c.particle_index];
            let hit = match c.collider {
                ColliderId::Body(b) => scene.bodies[b].surface_hit_world(x),
                ColliderId::GripperProxy { gripper, proxy } => {
                    let g = &scene.grippers[gripper];
                    let center = g.proxy_world_centers()[proxy];
                    Primitive::Sphere {
                        center,
                        radius: g.finger_proxies[proxy].radius,
                    }
                    .surface_hit(x)
                }
            };
            if hit.distance < 0.0 {
                let push = -hit.distance;
                positions[c.particle_index] = hit.surface_point;
                if let Some(acc) = accum.as_deref_mut() {
                    acc[ci] += push;
                }
                any = true;
            }
        }
        if !any {
            break;
        }
    }
}

/// Deterministic uniform spatial hash over particle positions.
pub struct SpatialHash {
    cell: f64,
    map: HashMap<(i64, i64, i64), Vec<u32>>,
}

impl SpatialHash {
    pub fn build(positions: &[Vec3], cell: f64) -> SpatialHash {
        let mut map: HashMap<(i64, i64, i64), Vec<u32>> = HashMap::new();
        for (i, p) in positions.iter().enumerate() {
            map.entry(Self::key(p, cell)).or_default().push(i as u32);
        }
        SpatialHash { cell, map }
    }

    fn key(p: &Vec3, cell: f64) -> (i64, i64, i64) {
        (
            (p.x / cell).floor() as i64,
            (p.y / cell).floor() as i64,
            (p.z / cell).floor() as i64,
        )
    }

    /// All pairs (i < j) within `radius`, ordered by (i, j). Iterating
    /// particles in index order and neighbor cells in a fixed order keeps the
    /// output independent of hash-map internals.
    pub fn pairs_within(&self, positions: &[Vec3], radius: f64) -> Vec<(u32, u32)> {
        let r2 = radius * radius;
        let mut pairs = Vec::new();
        for (i, p) in positions.iter().enumerate() {
            let (cx, cy, cz) = Self::key(p, self.cell);
            let mut candidates: Vec<u32> = Vec::new();
            for dx in -1..=1 {
                for dy in -1..=1 {
                    for dz in -1..=1 {
                        if let Some(v) = self.map.get(&(cx + dx, cy + dy, cz + dz)) {
                            candidates.extend(v.iter().copied().filter(|&j| j as usize > i));
                        }
                    }
                }
            }
            candidates.sort_unstable();
            candidates.dedup();
            for j in candidates {
                if (positions[j as usize] - p).norm_squared() < r2 {
                    pairs.push((i as u32, j));
                }
            }
        }
        pairs
    }
}

/// Output of the particle-particle pass.
#[derive(Debug, Clone)]
pub struct SelfInteraction {
    /// Per-particle adhesion force accumulators (Newton's-third-law
    /// symmetric), already scaled by `particle_adhesion_scale`.
    pub forces: Vec<Vec3>,
    /// Per-particle tangential damping velocity corrections scaled by
    /// `particle_friction_scale`, computed from current velocities.
    pub velocity_corrections: Vec<Vec3>,
    /// Interacting non-neighbor pairs within the interaction radius.
    pub pairs: Vec<(u32, u32)>,
}

/// Fraction of relative tangential velocity removed per substep per pair at
/// particle_friction_scale = 1.
const SELF_FRICTION_GAIN: f64 = 0.5;

/// Scaled particle-particle interactions between non-constraint-connected
/// pairs: adhesion attraction inside `r_adh` scaled by
/// `particle_adhesion_scale`, tangential velocity damping scaled by
/// `particle_friction_scale`, and (applied separately during projection) a
/// minimum-separation constraint of two particle radii.
pub fn self_interaction_pass(cloth: &ParticleCloth, params: &SimParams) -> SelfInteraction {
    let n = cloth.particle_count();
    let cell = params.r_adh.max(4.0 * params.particle_radius);
    let hash = SpatialHash::build(&cloth.positions, cell);
    let radius = params.r_adh.max(2.0 * params.particle_radius);
    let mut pairs = hash.pairs_within(&cloth.positions, radius);
    pairs.retain(|&(i, j)| !cloth.constraint_connected(i as usize, j as usize));

    let mut forces = vec![Vec3::zeros(); n];
    let mut velocity_corrections = vec![Vec3::zeros(); n];
    let dt = params.dt;
    for &(i, j) in &pairs {
        let (i, j) = (i as usize, j as usize);
        let (wi, wj) = (cloth.inverse_masses[i], cloth.inverse_masses[j]);
        let delta = cloth.positions[i] - cloth.positions[j];
        let dist = delta.norm();
        if dist < 1e-12 {
            continue;
        }
        if params.particle_adhesion_scale > 0.0 && dist < params.r_adh {
            let f = params.particle_adhesion_scale
                * adhesion_force(cloth.positions[i], cloth.positions[j], params.k_adh, params.r_adh);
            // Pair-level overshoot clamp: the pair may close at most down to
            // the contact shell (two radii) in one substep, which keeps the
            // mutual spring from fighting the separation projection.
            // Symmetric, so internal momentum is conserved.
            let w_sum = wi + wj;
            let budget = (dist - 2.0 * params.particle_radius).max(0.0);
            let f = if w_sum > 0.0 {
                clamp_attraction_force(f, budget, w_sum, dt)
            } else {
                f
            };
            forces[i] += f;
            forces[j] -= f;
        }
        if params.particle_friction_scale > 0.0 && dist < params.r_adh {
            let w_sum = wi + wj;
            if w_sum > 0.0 {
                let normal = delta / dist;
                let v_rel = cloth.velocities[i] - cloth.velocities[j];
                let v_t = v_rel - v_rel.dot(&normal) * normal;
                let gain = (SELF_FRICTION_GAIN * params.particle_friction_scale).min(1.0);
                let dv = -gain * v_t;
                velocity_corrections[i] += dv * (wi / w_sum);
                velocity_corrections[j] -= dv * (wj / w_sum);
            }
        }
    }
    SelfInteraction {
        forces,
        velocity_corrections,
        pairs,
    }
}

/// Enforce a minimum separation of two particle radii between interacting
/// pairs, mass-weighted; part of the projection loop.
pub fn project_self_separation(
    cloth: &ParticleCloth,
    pairs: &[(u32, u32)],
    positions: &mut [Vec3],
    params: &SimParams,
) {
    let min_dist = 2.0 * params.particle_radius;
    for &(i, j) in pairs {
        let (i, j) = (i as usize, j as usize);
        let (wi, wj) = (cloth.inverse_masses[i], cloth.inverse_masses[j]);
        let w_sum = wi + wj;
        if w_sum <= 0.0 {
            continue;
        }
        let delta = positions[i] - positions[j];
        let dist = delta.norm();
        if dist < 1e-12 || dist >= min_dist {
            continue;
        }
        let n = delta / dist;
        let push = (min_dist - dist) * n;
        positions[i] += push * (wi / w_sum);
        positions[j] -= push * (wj / w_sum);
    }
}

/// Apply internal friction between interacting pairs using the cloth's
/// current (post-solve) velocities: tangential damping inside the
/// interaction radius, plus normal-velocity damping for pairs inside the
/// contact shell (collision-resolution damping, which kills resting-contact
/// jitter between stacked layers). Sequential symmetric application
/// conserves momentum exactly and never reverses relative motion.
pub fn apply_self_friction(cloth: &mut ParticleCloth, pairs: &[(u32, u32)], params: &SimParams) {
    if params.particle_friction_scale <= 0.0 {
        return;
    }
    let gain = (SELF_FRICTION_GAIN * params.particle_friction_scale).min(1.0);
    let shell = 2.0 * params.particle_radius * 1.2;
    for &(i, j) in pairs {
        let (i, j) = (i as usize, j as usize);
        let (wi, wj) = (cloth.inverse_masses[i], cloth.inverse_masses[j]);
        let w_sum = wi + wj;
        if w_sum <= 0.0 {
            continue;
        }
        let delta = cloth.positions[i] - cloth.positions[j];
        let dist = delta.norm();
        if dist < 1e-12 || dist >= params.r_adh {
            continue;
        }
        let normal = delta / dist;
        let v_rel = cloth.velocities[i] - cloth.velocities[j];
        let v_n = v_rel.dot(&normal) * normal;
        let v_t = v_rel - v_n;
        let mut dv = -gain * v_t;
        if dist < shell {
            dv -= gain * v_n;
        }
        cloth.velocities[i] += dv * (wi / w_sum);
        cloth.velocities[j] -= dv * (wj / w_sum);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pbd::grid_cloth;
    use crate::scene::BodyKind;
    use approx::assert_relative_eq;

    #[test]
    fn adhesion_eq1_direct_substitution() {
        let f = adhesion_force(Vec3::new(0.005, 0.0, 0.0), Vec3::zeros(), 10.0, 0.015);
        assert_relative_eq!(f.x, -0.05, epsilon = 1e-12);
        assert_eq!(f.y, 0.0);
    }

    #[test]
    fn adhesion_zero_at_cutoff_boundary() {
        // Strict inequality at |xi - xj| == r_adh.
        let f = adhesion_force(Vec3::new(0.015, 0.0, 0.0), Vec3::zeros(), 10.0, 0.015);
        assert_eq!(f, Vec3::zeros());
    }

    #[test]
    fn adhesion_zero_coefficient() {
        let f = adhesion_force(Vec3::new(0.001, 0.002, 0.0), Vec3::zeros(), 0.0, 0.015);
        assert_eq!(f, Vec3::zeros());
    }

    #[test]
    fn adhesion_odd_under_swap() {
        let a = Vec3::new(0.004, -0.002, 0.001);
        let b = Vec3::new(0.001, 0.003, 0.0);
        let f_ab = adhesion_force(a, b, 25.0, 0.015);
        let f_ba = adhesion_force(b, a, 25.0, 0.015);
        assert!((f_ab + f_ba).norm() < 1e-15);
    }

    #[test]
    fn adhesion_magnitude_bounded() {
        // |f| <= k * r for any separation.
        for i in 0..200 {
            let d = 0.0301 * (i as f64) / 200.0;
            let f = adhesion_force(Vec3::new(d, 0.0, 0.0), Vec3::zeros(), 50.0, 0.015);
            assert!(f.norm() <= 50.0 * 0.015 + 1e-12);
        }
    }

    #[test]
    fn friction_direct_substitution() {
        let dv = friction_impulse(
            Vec3::new(0.0, 0.0, 2.0),
            Vec3::new(0.1, 0.0, 0.0),
            0.5,
            0.01,
            1.0,
        );
        assert_relative_eq!(dv.x, -0.01, epsilon = 1e-12);
    }

    #[test]
    fn friction_sticks_at_clamp() {
        let vt = Vec3::new(0.001, 0.0, 0.0);
        let dv = friction_impulse(Vec3::new(0.0, 0.0, 100.0), vt, 1.0, 0.01, 10.0);
        assert_eq!(dv, -vt);
    }

    #[test]
    fn friction_zero_mu() {
        let dv = friction_impulse(
            Vec3::new(0.0, 0.0, 2.0),
            Vec3::new(0.1, 0.0, 0.0),
            0.0,
            0.01,
            1.0,
        );
        assert_eq!(dv, Vec3::zeros());
    }

    #[test]
    fn friction_never_adds_energy() {
        // ||vt + dv|| <= ||vt|| over random inputs.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let vt = Vec3::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, 0.0);
            let fn_vec = Vec3::new(0.0, 0.0, rng.gen::<f64>() * 10.0);
            let mu = rng.gen::<f64>() * 2.0;
            let wi = rng.gen::<f64>() * 10.0;
            let dv = friction_impulse(fn_vec, vt, mu, 0.01, wi);
            assert!((vt + dv).norm() <= vt.norm() + 1e-12);
        }
    }

    #[test]
    fn detect_particle_above_ground() {
        let mut cloth = grid_cloth(2, 2, 0.02, 0.0, 0.1);
        cloth.positions[0] = Vec3::new(0.0, 0.0, 0.004);
        for i in 1..4 {
            cloth.positions[i] = Vec3::new(1.0 + i as f64, 0.0, 1.0);
        }
        let scene = Scene::with_ground();
        let contacts = detect_contacts(&cloth, &scene, 0.015, 0.005);
        assert_eq!(contacts.len(), 1);
        assert_eq!(contacts[0].particle_index, 0);
        assert_eq!(contacts[0].normal, Vec3::z());
        assert_relative_eq!(contacts[0].gap, 0.004, epsilon = 1e-12);
    }

    #[test]
    fn detect_far_particle_no_contacts() {
        let mut cloth = grid_cloth(2, 2, 0.02, 0.0, 0.1);
        for p in &mut cloth.positions {
            p.z = 1.0;
        }
        let scene = Scene::with_ground();
        let contacts = detect_contacts(&cloth, &scene, 0.015, 0.005);
        assert!(contacts.is_empty());
    }

    #[test]
    fn detect_inside_sphere_negative_gap() {
        let mut cloth = grid_cloth(2, 2, 0.02, 0.0, 0.1);
        cloth.positions[0] = Vec3::new(0.2, 0.0, 5.0);
        for i in 1..4 {
            cloth.positions[i] = Vec3::new(10.0 + i as f64, 0.0, 10.0);
        }
        let mut scene = Scene::default();
        scene.bodies.push(crate::scene::SceneBody {
            body_id: "ball".into(),
            kind: BodyKind::Platform,
            shape: vec![Primitive::Sphere {
                center: Vec3::new(0.0, 0.0, 5.0),
                radius: 0.5,
            }],
            pose: Iso3::identity(),
            named_points: Default::default(),
        });
        let contacts = detect_contacts(&cloth, &scene, 0.015, 0.005);
        assert_eq!(contacts.len(), 1);
        assert_relative_eq!(contacts[0].gap, 0.2 - 0.5, epsilon = 1e-12);
    }

    #[test]
    fn penetration_projection_to_surface() {
        let mut cloth = grid_cloth(2, 2, 0.02, 0.0, 0.1);
        cloth.positions[0] = Vec3::new(0.0, 0.0, -0.01);
        cloth.positions[1] = Vec3::new(0.1, 0.0, 0.002);
        for i in 2..4 {
            cloth.positions[i] = Vec3::new(5.0 + i as f64, 0.0, 1.0);
        }
        let scene = Scene::with_ground();
        let contacts = detect_contacts(&cloth, &scene, 0.015, 0.005);
        let mut positions = cloth.positions.clone();
        resolve_penetration(&cloth, &scene, &contacts, &mut positions);
        assert_relative_eq!(positions[0].z, 0.0, epsilon = 1e-12);
        // Positive gap untouched.
        assert_relative_eq!(positions[1].z, 0.002, epsilon = 1e-12);
    }

    #[test]
    fn penetration_two_boxes_randomized() {
        // Oracle: after the pass, the SDF of every contacted particle wrt
        // both boxes must be >= -1e-6, over randomized overlapping scenes.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for _ in 0..50 {
            let c1 = Vec3::new(rng.gen::<f64>() * 0.1, rng.gen::<f64>() * 0.1, 0.5);
            let c2 = c1
                + Vec3::new(
                    (rng.gen::<f64>() - 0.5) * 0.15,
                    (rng.gen::<f64>() - 0.5) * 0.15,
                    (rng.gen::<f64>() - 0.5) * 0.15,
                );
            let he = Vec3::new(0.1, 0.12, 0.09);
            let mk = |id: &str, c: Vec3| crate::scene::SceneBody {
                body_id: id.into(),
                kind: BodyKind::Platform,
                shape: vec![Primitive::Box {
                    center: c,
                    half_extents: he,
                }],
                pose: Iso3::identity(),
                named_points: Default::default(),
            };
            let mut scene = Scene::default();
            scene.bodies.push(mk("box1", c1));
            scene.bodies.push(mk("box2", c2));

            let mut cloth = grid_cloth(2, 2, 0.02, 0.0, 0.1);
            // Drop a particle somewhere inside the union.
            cloth.positions[0] = c1
                + Vec3::new(
                    (rng.gen::<f64>() - 0.5) * 0.15,
                    (rng.gen::<f64>() - 0.5) * 0.2,
                    (rng.gen::<f64>() - 0.5) * 0.15,
                );
            for i in 1..4 {
                cloth.positions[i] = Vec3::new(50.0 + i as f64, 0.0, 50.0);
            }
            let contacts = detect_contacts(&cloth, &scene, 0.015, 0.005);
            let mut positions = cloth.positions.clone();
            resolve_penetration(&cloth, &scene, &contacts, &mut positions);
            for body in &scene.bodies {
                let hit = body.surface_hit_world(positions[0]);
                assert!(
                    hit.distance >= -1e-6,
                    "particle left inside {} by {}",
                    body.body_id,
                    hit.distance
                );
            }
        }
    }

    #[test]
    fn gripper_advance_no_motion() {
        let mut g = VirtualGripper::pinch(GripperSide::Left);
        let target = g.pose;
        let aperture = g.aperture;
        advance_gripper(&mut g, &target, aperture, 0.1).unwrap();
        assert!(g.proxy_velocities.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn gripper_speed_cap() {
        let mut g = VirtualGripper::pinch(GripperSide::Left);
        g.max_speed = 0.5;
        let target = Iso3::translation(1.0, 0.0, 0.0);
        advance_gripper(&mut g, &target, 1.0, 0.1).unwrap();
        assert_relative_eq!(g.pose.translation.x, 0.05, epsilon = 1e-12);
    }

    #[test]
    fn gripper_aperture_rate_cap() {
        let mut g = VirtualGripper::pinch(GripperSide::Left);
        g.aperture_rate = 2.0;
        let target = g.pose;
        advance_gripper(&mut g, &target, 0.0, 0.1).unwrap();
        assert_relative_eq!(g.aperture, 0.8, epsilon = 1e-12);
    }

    #[test]
    fn gripper_rejects_non_finite_target() {
        let mut g = VirtualGripper::pinch(GripperSide::Left);
        let target = Iso3::translation(f64::NAN, 0.0, 0.0);
        assert!(advance_gripper(&mut g, &target, 1.0, 0.1).is_err());
    }

    #[test]
    fn self_pass_far_layer_no_forces() {
        // Flat single layer at rest spacing > r_adh: nothing to do.
        let cloth = grid_cloth(5, 5, 0.02, 0.0, 0.1);
        let mut params = SimParams::default();
        params.r_adh = 0.015;
        let pass = self_interaction_pass(&cloth, &params);
        assert!(pass.forces.iter().all(|f| f.norm() == 0.0));
    }

    #[test]
    fn self_pass_scale_zero_disables_attraction() {
        let mut cloth = two_free_particles(0.008);
        cloth.velocities[0] = Vec3::new(0.0, 1.0, 0.0);
        let mut params = SimParams::default();
        params.particle_adhesion_scale = 0.0;
        let pass = self_interaction_pass(&cloth, &params);
        assert!(pass.forces.iter().all(|f| f.norm() == 0.0));
        assert_eq!(pass.pairs.len(), 1);
    }

    fn two_free_particles(separation: f64) -> ParticleCloth {
        // Unconstrained 4-particle cloud; only 0 and 1 are near each other.
        let mut cloth = grid_cloth(2, 2, 1.0, 0.0, 0.4);
        cloth.positions = vec![
            Vec3::zeros(),
            Vec3::new(separation, 0.0, 0.0),
            Vec3::new(100.0, 0.0, 0.0),
            Vec3::new(200.0, 0.0, 0.0),
        ];
        cloth.velocities = vec![Vec3::zeros(); 4];
        cloth.inverse_masses = vec![1.0; 4];
        cloth.distance_constraints.clear();
        cloth.bending_constraints.clear();
        cloth.rebuild_constraint_pairs();
        cloth
    }

    #[test]
    fn self_pass_equal_opposite_forces() {
        // Two free particles at 0.008 m, scale 0.5, k = 10:
        // equal-and-opposite forces of magnitude 0.04 N. Particle radius
        // small enough that the contact-shell clamp stays disengaged.
        let cloth = two_free_particles(0.008);
        let mut params = SimParams::default();
        params.k_adh = 10.0;
        params.particle_adhesion_scale = 0.5;
        params.particle_radius = 0.003;
        let pass = self_interaction_pass(&cloth, &params);
        assert_relative_eq!(pass.forces[0].norm(), 0.04, epsilon = 1e-12);
        assert!((pass.forces[0] + pass.forces[1]).norm() < 1e-15);
        // Attraction: force on particle 0 points toward particle 1 (+x).
        assert!(pass.forces[0].x > 0.0);
    }

    #[test]
    fn self_separation_enforced() {
        let cloth = two_free_particles(0.008);
        let params = SimParams::default(); // particle_radius 0.005 -> min 0.01
        let pass = self_interaction_pass(&cloth, &params);
        let mut positions = cloth.positions.clone();
        project_self_separation(&cloth, &pass.pairs, &mut positions, &params);
        let d = (positions[0] - positions[1]).norm();
        assert_relative_eq!(d, 0.01, epsilon = 1e-12);
    }

    #[test]
    fn self_pass_conserves_momentum() {
        // Stacked 2-layer lattice with velocities: total momentum change from
        // forces and velocity corrections is ~0.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut cloth = grid_cloth(6, 6, 0.02, 0.0, 0.15);
        let n0 = cloth.particle_count();
        // Shift half the particles into a second layer 8 mm above.
        for i in 0..n0 {
            if i % 2 == 0 {
                cloth.positions[i].z += 0.008;
            }
            cloth.velocities[i] = Vec3::new(
                rng.gen::<f64>() - 0.5,
                rng.gen::<f64>() - 0.5,
                rng.gen::<f64>() - 0.5,
            ) * 0.2;
        }
        let params = SimParams::default();
        let pass = self_interaction_pass(&cloth, &params);
        let force_sum: Vec3 = pass.forces.iter().sum();
        assert!(force_sum.norm() < 1e-9, "net force {force_sum:?}");
        let momentum: Vec3 = pass
            .velocity_corrections
            .iter()
            .zip(&cloth.inverse_masses)
            .map(|(dv, w)| dv / *w)
            .sum();
        assert!(momentum.norm() < 1e-9, "net momentum change {momentum:?}");
    }

    #[test]
    fn spatial_hash_pairs_match_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let positions: Vec<Vec3> = (0..300)
            .map(|_| Vec3::new(rng.gen(), rng.gen(), rng.gen()) * 0.2)
            .collect();
        let radius = 0.03;
        let hash = SpatialHash::build(&positions, radius);
        let fast = hash.pairs_within(&positions, radius);
        let mut brute = Vec::new();
        for i in 0..positions.len() {
            for j in i + 1..positions.len() {
                if (positions[i] - positions[j]).norm() < radius {
                    brute.push((i as u32, j as u32));
                }
            }
        }
        assert_eq!(fast, brute);
    }
}
