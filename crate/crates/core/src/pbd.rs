//! Position-based-dynamics solver for garment particle systems: semi-implicit
//! prediction, iterative constraint projection, velocity update, then the
//! contact module's friction pass.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::contact::{self, ContactReport};
use crate::error::{CoreError, Result};
use crate::mesh::{GarmentCategory, GarmentPart, TriangleMesh};
use crate::scene::Scene;
use crate::Vec3;

/// Distance constraint between particles `i` and `j`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DistanceConstraint {
    pub i: usize,
    pub j: usize,
    pub rest_length: f64,
}

/// Dihedral bending constraint over the triangle pair (i,j,k) / (i,j,l)
/// sharing edge (i,j). A flat pair has rest dihedral pi.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BendingConstraint {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub l: usize,
    pub rest_dihedral: f64,
}

/// Particle state plus constraint topology for one garment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParticleCloth {
    pub positions: Vec<Vec3>,
    pub velocities: Vec<Vec3>,
    /// 1/kg; 0 means pinned.
    pub inverse_masses: Vec<f64>,
    pub distance_constraints: Vec<DistanceConstraint>,
    pub bending_constraints: Vec<BendingConstraint>,
    pub triangles: Vec<[usize; 3]>,
    /// Intrinsic coordinates in [0,1]^2, fixed for the life of the cloth.
    pub rest_uv: Vec<[f64; 2]>,
    pub parts: Vec<GarmentPart>,
    pub landmark_ids: BTreeMap<String, usize>,
    pub garment_id: String,
    pub category: Option<GarmentCategory>,
    /// Steps taken so far; reported in divergence errors.
    pub steps_taken: u64,
    /// Sorted particle pairs within two hops in the constraint graph; these
    /// are excluded from self-contact (a sharp crease legitimately brings
    /// the local neighborhood inside the contact shell).
    constraint_pairs: Vec<(u32, u32)>,
}

impl ParticleCloth {
    pub fn particle_count(&self) -> usize {
        self.positions.len()
    }

    pub fn total_mass(&self) -> f64 {
        self.inverse_masses
            .iter()
            .filter(|w| **w > 0.0)
            .map(|w| 1.0 / w)
            .sum()
    }

    pub fn kinetic_energy(&self) -> f64 {
        self.velocities
            .iter()
            .zip(&self.inverse_masses)
            .filter(|(_, w)| **w > 0.0)
            .map(|(v, w)| 0.5 * v.norm_squared() / w)
            .sum()
    }

    pub fn max_speed(&self) -> f64 {
        self.velocities.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn centroid(&self) -> Vec3 {
        let n = self.positions.len().max(1) as f64;
        self.positions.iter().sum::<Vec3>() / n
    }

    pub fn pin(&mut self, index: usize) {
        self.inverse_masses[index] = 0.0;
        self.velocities[index] = Vec3::zeros();
    }

    pub fn translate(&mut self, offset: Vec3) {
        for p in &mut self.positions {
            *p += offset;
        }
    }

    /// Rigidly transform about the cloth centroid.
    pub fn transform_about_centroid(&mut self, rotation: &crate::Quat, translation: Vec3) {
        let c = self.centroid();
        for p in &mut self.positions {
            *p = c + rotation * (*p - c) + translation;
        }
    }

    pub fn landmark_position(&self, name: &str) -> Result<Vec3> {
        let idx = *self
            .landmark_ids
            .get(name)
            .ok_or_else(|| CoreError::MissingLandmark(name.to_string()))?;
        Ok(self.positions[idx])
    }

    /// Recompute the self-contact exclusion cache (the constraint graph's
    /// 1-ring and 2-ring); call after editing constraints.
    pub fn rebuild_constraint_pairs(&mut self) {
        let n = self.positions.len();
        let mut adjacency: Vec<Vec<u32>> = vec![Vec::new(); n];
        for c in &self.distance_constraints {
            adjacency[c.i].push(c.j as u32);
            adjacency[c.j].push(c.i as u32);
        }
        let mut pairs: Vec<(u32, u32)> = Vec::new();
        let mut push = |a: u32, b: u32| {
            if a < b {
                pairs.push((a, b));
            } else if b < a {
                pairs.push((b, a));
            }
        };
        for (i, ring1) in adjacency.iter().enumerate() {
            for &j in ring1 {
                push(i as u32, j);
                for &k in &adjacency[j as usize] {
                    push(i as u32, k);
                }
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        self.constraint_pairs = pairs;
    }

    /// True when particles `i` and `j` share a distance constraint.
    pub fn constraint_connected(&self, i: usize, j: usize) -> bool {
        let key = if i < j {
            (i as u32, j as u32)
        } else {
            (j as u32, i as u32)
        };
        self.constraint_pairs.binary_search(&key).is_ok()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.positions.len();
        if self.velocities.len() != n || self.inverse_masses.len() != n || self.rest_uv.len() != n
        {
            return Err(CoreError::Mesh("cloth array lengths disagree".into()));
        }
        if n == 0 {
            return Err(CoreError::Mesh("cloth has no particles".into()));
        }
        for c in &self.distance_constraints {
            if c.i >= n || c.j >= n {
                return Err(CoreError::Mesh(format!(
                    "distance constraint ({}, {}) out of range",
                    c.i, c.j
                )));
            }
            if !(c.rest_length > 0.0) {
                return Err(CoreError::Mesh(format!(
                    "non-positive rest length {} on ({}, {})",
                    c.rest_length, c.i, c.j
                )));
            }
        }
        for c in &self.bending_constraints {
            if c.i >= n || c.j >= n || c.k >= n || c.l >= n {
                return Err(CoreError::Mesh("bending constraint out of range".into()));
            }
        }
        if self.inverse_masses.iter().any(|w| *w < 0.0) {
            return Err(CoreError::Mesh("negative inverse mass".into()));
        }
        Ok(())
    }

    /// Maximum relative violation across distance constraints,
    /// |len - rest| / rest.
    pub fn max_stretch_violation(&self) -> f64 {
        self.distance_constraints
            .iter()
            .map(|c| {
                let len = (self.positions[c.i] - self.positions[c.j]).norm();
                (len - c.rest_length).abs() / c.rest_length
            })
            .fold(0.0, f64::max)
    }
}

/// Solver and contact parameters. Contact coefficients follow the
/// adhesion/friction model: attraction `-k_adh * (x_i - x_j)` inside radius
/// `r_adh`, Coulomb friction with coefficient `mu`, and the particle-scale
/// multipliers that govern garment self-interaction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    /// Full step duration in seconds; each step runs `substeps` substeps.
    pub dt: f64,
    pub substeps: u32,
    pub solver_iterations: u32,
    pub gravity: Vec3,
    /// Per-iteration projection stiffness in [0,1].
    pub stretch_stiffness: f64,
    pub bend_stiffness: f64,
    /// Velocity damping in [0,1] applied in the predictor.
    pub damping: f64,
    /// Adhesion coefficient, N/m.
    pub k_adh: f64,
    /// Adhesion cutoff radius, m.
    pub r_adh: f64,
    /// Coulomb friction coefficient.
    pub mu: f64,
    /// Multiplier on particle-particle adhesion.
    pub particle_adhesion_scale: f64,
    /// Multiplier on particle-particle tangential damping.
    pub particle_friction_scale: f64,
    pub particle_radius: f64,
    /// Contact detection margin, m.
    pub collision_margin: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            dt: 1.0 / 60.0,
            substeps: 3,
            solver_iterations: 25,
            gravity: Vec3::new(0.0, 0.0, -9.8),
            stretch_stiffness: 1.0,
            bend_stiffness: 0.1,
            damping: 0.01,
            k_adh: 50.0,
            r_adh: 0.015,
            mu: 0.6,
            particle_adhesion_scale: 0.5,
            particle_friction_scale: 1.0,
            particle_radius: 0.005,
            collision_margin: 0.005,
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(CoreError::InvalidArgument(msg.to_string()))
            }
        };
        check(self.dt > 0.0 && self.dt.is_finite(), "dt must be > 0")?;
        check(self.substeps >= 1, "substeps must be >= 1")?;
        check(self.solver_iterations >= 1, "solver_iterations must be >= 1")?;
        check(
            (0.0..=1.0).contains(&self.stretch_stiffness),
            "stretch_stiffness must be in [0,1]",
        )?;
        check(
            (0.0..=1.0).contains(&self.bend_stiffness),
            "bend_stiffness must be in [0,1]",
        )?;
        check((0.0..=1.0).contains(&self.damping), "damping must be in [0,1]")?;
        check(self.k_adh >= 0.0 && self.k_adh.is_finite(), "k_adh must be >= 0")?;
        check(self.mu >= 0.0 && self.mu.is_finite(), "mu must be >= 0")?;
        check(
            self.r_adh > self.particle_radius,
            "r_adh must exceed particle_radius",
        )?;
        check(
            self.particle_adhesion_scale >= 0.0 && self.particle_adhesion_scale.is_finite(),
            "particle_adhesion_scale must be finite and >= 0",
        )?;
        check(
            self.particle_friction_scale >= 0.0 && self.particle_friction_scale.is_finite(),
            "particle_friction_scale must be finite and >= 0",
        )?;
        check(self.particle_radius > 0.0, "particle_radius must be > 0")?;
        check(self.collision_margin >= 0.0, "collision_margin must be >= 0")?;
        Ok(())
    }

    /// Duration of one substep.
    pub fn substep_dt(&self) -> f64 {
        self.dt / self.substeps as f64
    }
}

/// Discretize a triangle mesh into a particle cloth: one particle per vertex,
/// one distance constraint per unique edge, one bending constraint per
/// interior edge, lumped vertex masses from incident triangle areas.
pub fn build_cloth_from_mesh(
    mesh: &TriangleMesh,
    spacing: f64,
    area_density: f64,
) -> Result<ParticleCloth> {
    if !(spacing > 0.0) {
        return Err(CoreError::InvalidArgument("spacing must be > 0".into()));
    }
    if !(area_density > 0.0) {
        return Err(CoreError::InvalidArgument("area_density must be > 0".into()));
    }
    mesh.validate()?;

    let n = mesh.vertex_count();
    let mut masses = vec![0.0f64; n];
    for tri in &mesh.triangles {
        let share = area_density * mesh.triangle_area(*tri) / 3.0;
        for &v in tri {
            masses[v] += share;
        }
    }
    let inverse_masses: Vec<f64> = masses
        .iter()
        .map(|m| if *m > 0.0 { 1.0 / m } else { 0.0 })
        .collect();

    let edges = mesh.edge_map();
    let mut distance_constraints = Vec::with_capacity(edges.len());
    let mut bending_constraints = Vec::new();
    for (&(a, b), tris) in edges.iter() {
        let rest = (mesh.positions[a] - mesh.positions[b]).norm();
        distance_constraints.push(DistanceConstraint {
            i: a,
            j: b,
            rest_length: rest,
        });
        if tris.len() == 2 {
            let opposite = |t: usize| {
                mesh.triangles[t]
                    .iter()
                    .copied()
                    .find(|&v| v != a && v != b)
                    .expect("triangle must have a vertex off the shared edge")
            };
            let k = opposite(tris[0]);
            let l = opposite(tris[1]);
            let rest_dihedral = dihedral_angle(
                mesh.positions[a],
                mesh.positions[b],
                mesh.positions[k],
                mesh.positions[l],
            )
            .unwrap_or(std::f64::consts::PI);
            bending_constraints.push(BendingConstraint {
                i: a,
                j: b,
                k,
                l,
                rest_dihedral,
            });
        }
    }

    let parts = if mesh.parts.is_empty() {
        vec![GarmentPart::Other; n]
    } else {
        mesh.parts.clone()
    };

    let mut cloth = ParticleCloth {
        positions: mesh.positions.clone(),
        velocities: vec![Vec3::zeros(); n],
        inverse_masses,
        distance_constraints,
        bending_constraints,
        triangles: mesh.triangles.clone(),
        rest_uv: mesh.uv.clone(),
        parts,
        landmark_ids: mesh.landmarks.clone(),
        garment_id: String::new(),
        category: mesh.category,
        steps_taken: 0,
        constraint_pairs: Vec::new(),
    };
    cloth.rebuild_constraint_pairs();
    cloth.validate()?;
    Ok(cloth)
}

/// Predicted positions and velocities for one (sub)step.
#[derive(Debug, Clone)]
pub struct Prediction {
    pub positions: Vec<Vec3>,
    pub velocities: Vec<Vec3>,
}

/// Semi-implicit Euler predictor:
/// `v <- (1 - damping) * (v + dt * (g + w * f_ext))`, `x_pred <- x + dt * v`.
/// Pinned particles keep their position and zero velocity.
pub fn predict_positions(
    cloth: &ParticleCloth,
    params: &SimParams,
    external_forces: &[Vec3],
) -> Result<Prediction> {
    if external_forces.len() != cloth.particle_count() {
        return Err(CoreError::InvalidArgument(format!(
            "force array length {} != particle count {}",
            external_forces.len(),
            cloth.particle_count()
        )));
    }
    let dt = params.dt;
    let mut positions = Vec::with_capacity(cloth.particle_count());
    let mut velocities = Vec::with_capacity(cloth.particle_count());
    for i in 0..cloth.particle_count() {
        let f = external_forces[i];
        if !f.iter().all(|c| c.is_finite()) {
            return Err(CoreError::InvalidArgument(format!(
                "non-finite external force on particle {i}"
            )));
        }
        let w = cloth.inverse_masses[i];
        if w == 0.0 {
            positions.push(cloth.positions[i]);
            velocities.push(Vec3::zeros());
            continue;
        }
        let v = (1.0 - params.damping) * (cloth.velocities[i] + dt * (params.gravity + w * f));
        velocities.push(v);
        positions.push(cloth.positions[i] + dt * v);
    }
    Ok(Prediction {
        positions,
        velocities,
    })
}

/// Project one distance constraint; returns the corrections for `i` and `j`,
/// or `None` for coincident particles (degenerate geometry, skipped).
pub fn project_distance_constraint(
    xi: Vec3,
    xj: Vec3,
    wi: f64,
    wj: f64,
    rest: f64,
    stiffness: f64,
) -> Option<(Vec3, Vec3)> {
    let w_sum = wi + wj;
    if w_sum <= 0.0 {
        return Some((Vec3::zeros(), Vec3::zeros()));
    }
    let delta = xi - xj;
    let len = delta.norm();
    if len < 1e-12 {
        return None;
    }
    let n = delta / len;
    let violation = len - rest;
    let di = -stiffness * (wi / w_sum) * violation * n;
    let dj = stiffness * (wj / w_sum) * violation * n;
    Some((di, dj))
}

/// Signed-free dihedral angle between triangles (a,b,k) and (a,b,l) sharing
/// edge (a,b): pi when flat, decreasing as the pair folds. `None` for
/// degenerate triangles.
pub fn dihedral_angle(a: Vec3, b: Vec3, k: Vec3, l: Vec3) -> Option<f64> {
    let e = b - a;
    let n1 = e.cross(&(k - a));
    let n2 = e.cross(&(l - a));
    let len1 = n1.norm();
    let len2 = n2.norm();
    if len1 < 1e-12 || len2 < 1e-12 {
        return None;
    }
    // k and l sit on opposite sides of the shared edge, so the two cross
    // products are antiparallel for a flat pair: acos(d) reads pi there.
    let d = (n1.dot(&n2) / (len1 * len2)).clamp(-1.0, 1.0);
    Some(d.acos())
}

/// Project one bending constraint toward its rest dihedral, mass-weighted.
/// The four corrections sum (mass-weighted) to zero linear momentum.
/// Returns `None` when a triangle is degenerate.
pub fn project_bending_constraint(
    x: [Vec3; 4],
    w: [f64; 4],
    rest_dihedral: f64,
    stiffness: f64,
) -> Option<[Vec3; 4]> {
    if stiffness == 0.0 {
        return Some([Vec3::zeros(); 4]);
    }
    // Gradients of the dihedral angle, relative to p1 (Mueller et al. form).
    let p2 = x[1] - x[0];
    let p3 = x[2] - x[0];
    let p4 = x[3] - x[0];
    let c23 = p2.cross(&p3);
    let c24 = p2.cross(&p4);
    let l23 = c23.norm();
    let l24 = c24.norm();
    if l23 < 1e-12 || l24 < 1e-12 {
        return None;
    }
    let n1 = c23 / l23;
    let n2 = c24 / l24;
    // Flat pair reads pi (antiparallel normals).
    let d = (n1.dot(&n2)).clamp(-1.0, 1.0);
    let angle = d.acos();
    let diff = angle - rest_dihedral;
    if diff.abs() < 1e-12 {
        return Some([Vec3::zeros(); 4]);
    }

    let q3 = (p2.cross(&n2) + n1.cross(&p2) * d) / l23;
    let q4 = (p2.cross(&n1) + n2.cross(&p2) * d) / l24;
    let q2 = -(p3.cross(&n2) + n1.cross(&p3) * d) / l23 - (p4.cross(&n1) + n2.cross(&p4) * d) / l24;
    let q1 = -q2 - q3 - q4;
    let q = [q1, q2, q3, q4];

    let denom: f64 = (0..4).map(|idx| w[idx] * q[idx].norm_squared()).sum();
    if denom < 1e-12 {
        return None;
    }
    let s = 1.0 - d * d;
    if s <= 0.0 {
        return Some([Vec3::zeros(); 4]);
    }
    let scale = -stiffness * s.sqrt() * diff / denom;
    let mut out = [Vec3::zeros(); 4];
    for idx in 0..4 {
        out[idx] = scale * w[idx] * q[idx];
    }
    Some(out)
}

/// Advance the cloth by one step of `params.dt` (running `params.substeps`
/// substeps) against the scene, returning the contact report of the last
/// substep. Deterministic for fixed inputs.
pub fn step(cloth: &mut ParticleCloth, scene: &Scene, params: &SimParams) -> Result<ContactReport> {
    params.validate()?;
    let mut sub_params = params.clone();
    sub_params.dt = params.substep_dt();
    sub_params.substeps = 1;

    let mut report = ContactReport::default();
    for _ in 0..params.substeps {
        report = substep(cloth, scene, &sub_params)?;
    }
    cloth.steps_taken += 1;
    Ok(report)
}

fn substep(cloth: &mut ParticleCloth, scene: &Scene, params: &SimParams) -> Result<ContactReport> {
    let n = cloth.particle_count();
    let dt = params.dt;

    // Contact forces on current positions.
    let contacts = contact::detect_contacts(cloth, scene, params.r_adh, params.collision_margin);
    let self_pass = contact::self_interaction_pass(cloth, params);

    let mut forces = self_pass.forces.clone();
    for c in &contacts {
        let w = cloth.inverse_masses[c.particle_index];
        if w == 0.0 {
            continue;
        }
        let xi = cloth.positions[c.particle_index];
        let f = contact::adhesion_force(xi, c.surface_point, params.k_adh, params.r_adh);
        let budget = contact::adhesion_budget(c.collider, c.gap, params.particle_radius);
        forces[c.particle_index] += contact::clamp_attraction_force(f, budget, w, dt);
    }

    let prediction = predict_positions(cloth, params, &forces)?;
    let x_old: Vec<Vec3> = cloth.positions.clone();
    let mut x = prediction.positions;
    cloth.velocities = prediction.velocities;

    // Fixed projection order: distance, bending, self-separation, rigid
    // penetration. Constraints run in construction order for determinism.
    // Bending converges in far fewer passes than stretch, so it only runs
    // in the first few iterations of each substep (same relative order:
    // distance, bending, self-separation, penetration).
    const BEND_SOLVE_ITERATIONS: u32 = 4;

    let mut skipped_distance = 0usize;
    let mut skipped_bending = 0usize;
    let mut penetration_accum = vec![0.0f64; contacts.len()];
    for iter in 0..params.solver_iterations {
        let stiffness = params.stretch_stiffness;
        for c in &cloth.distance_constraints {
            let wi = cloth.inverse_masses[c.i];
            let wj = cloth.inverse_masses[c.j];
            let w_sum = wi + wj;
            if w_sum <= 0.0 {
                continue;
            }
            let delta = x[c.i] - x[c.j];
            let len_sq = delta.norm_squared();
            if len_sq < 1e-24 {
                skipped_distance += 1;
                continue;
            }
            let len = len_sq.sqrt();
            let factor = stiffness * (len - c.rest_length) / (len * w_sum);
            x[c.i] -= (wi * factor) * delta;
            x[c.j] += (wj * factor) * delta;
        }
        if params.bend_stiffness > 0.0 && iter < BEND_SOLVE_ITERATIONS {
            for c in &cloth.bending_constraints {
                let ids = [c.i, c.j, c.k, c.l];
                let w = [
                    cloth.inverse_masses[c.i],
                    cloth.inverse_masses[c.j],
                    cloth.inverse_masses[c.k],
                    cloth.inverse_masses[c.l],
                ];
                if w.iter().sum::<f64>() <= 0.0 {
                    continue;
                }
                match project_bending_constraint(
                    [x[c.i], x[c.j], x[c.k], x[c.l]],
                    w,
                    c.rest_dihedral,
                    params.bend_stiffness,
                ) {
                    Some(corr) => {
                        for (idx, &pid) in ids.iter().enumerate() {
                            x[pid] += corr[idx];
                        }
                    }
                    None => skipped_bending += 1,
                }
            }
        }
        contact::project_self_separation(cloth, &self_pass.pairs, &mut x, params);
        contact::resolve_penetration_accumulate(
            cloth,
            scene,
            &contacts,
            &mut x,
            Some(&mut penetration_accum),
        );
    }

    // Velocity update from projected positions.
    for i in 0..n {
        if cloth.inverse_masses[i] == 0.0 {
            cloth.velocities[i] = Vec3::zeros();
        } else {
            cloth.velocities[i] = (x[i] - x_old[i]) / dt;
        }
    }
    cloth.positions = x;

    // Friction against rigid bodies, normal force estimated from the
    // accumulated penetration correction.
    for (c, pen) in contacts.iter().zip(&penetration_accum) {
        let w = cloth.inverse_masses[c.particle_index];
        if w == 0.0 || *pen == 0.0 {
            continue;
        }
        let mass = 1.0 / w;
        let fn_mag = mass * pen / (dt * dt);
        let fn_vec = fn_mag * c.normal;
        let v_rel = cloth.velocities[c.particle_index] - c.body_velocity;
        let v_t = v_rel - v_rel.dot(&c.normal) * c.normal;
        let dv = contact::friction_impulse(fn_vec, v_t, params.mu, dt, w);
        cloth.velocities[c.particle_index] += dv;
    }

    // Internal tangential damping between close particle pairs.
    contact::apply_self_friction(cloth, &self_pass.pairs, params);

    for (i, p) in cloth.positions.iter().enumerate() {
        if !p.iter().all(|c| c.is_finite()) {
            return Err(CoreError::Diverged {
                step: cloth.steps_taken,
                detail: format!("particle {i} has non-finite position"),
            });
        }
    }

    Ok(ContactReport {
        contacts,
        skipped_distance,
        skipped_bending,
        self_pair_count: self_pass.pairs.len(),
    })
}

/// Outcome of `settle`.
#[derive(Debug, Clone, Copy)]
pub struct SettleOutcome {
    pub steps_used: u32,
    pub kinetic_energy: f64,
    pub converged: bool,
}

/// Step until total kinetic energy drops below `kinetic_tol` (J) or
/// `max_steps` is reached.
pub fn settle(
    cloth: &mut ParticleCloth,
    scene: &Scene,
    params: &SimParams,
    max_steps: u32,
    kinetic_tol: f64,
) -> Result<SettleOutcome> {
    if max_steps < 1 {
        return Err(CoreError::InvalidArgument("max_steps must be >= 1".into()));
    }
    for used in 1..=max_steps {
        step(cloth, scene, params)?;
        let ke = cloth.kinetic_energy();
        if ke < kinetic_tol {
            return Ok(SettleOutcome {
                steps_used: used,
                kinetic_energy: ke,
                converged: true,
            });
        }
    }
    Ok(SettleOutcome {
        steps_used: max_steps,
        kinetic_energy: cloth.kinetic_energy(),
        converged: false,
    })
}

/// Build a flat rectangular test cloth in the xy-plane at height `z`.
/// Used by tests and the bench command; grids are (nx x ny) vertices.
pub fn grid_cloth(nx: usize, ny: usize, spacing: f64, z: f64, area_density: f64) -> ParticleCloth {
    let mesh = grid_mesh(nx, ny, spacing, z);
    build_cloth_from_mesh(&mesh, spacing, area_density).expect("grid mesh is valid")
}

/// Regular grid mesh used by tests and benches.
pub fn grid_mesh(nx: usize, ny: usize, spacing: f64, z: f64) -> TriangleMesh {
    assert!(nx >= 2 && ny >= 2);
    let mut positions = Vec::with_capacity(nx * ny);
    let mut uv = Vec::with_capacity(nx * ny);
    for yi in 0..ny {
        for xi in 0..nx {
            positions.push(Vec3::new(xi as f64 * spacing, yi as f64 * spacing, z));
            uv.push([xi as f64 / (nx - 1) as f64, yi as f64 / (ny - 1) as f64]);
        }
    }
    let mut triangles = Vec::new();
    for yi in 0..ny - 1 {
        for xi in 0..nx - 1 {
            let a = yi * nx + xi;
            let b = a + 1;
            let c = a + nx;
            let d = c + 1;
            triangles.push([a, b, d]);
            triangles.push([a, d, c]);
        }
    }
    TriangleMesh {
        positions,
        uv,
        triangles,
        landmarks: BTreeMap::new(),
        parts: vec![],
        category: None,
        uv_generated: false,
    }
}
