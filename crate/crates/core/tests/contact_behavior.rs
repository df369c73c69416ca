//! Grasping-by-contact behavior: adhesion plus friction must lift cloth
//! through a closed gripper, must stop lifting when both are disabled, and
//! must not let a single fingertip hoist a garment heavier than the
//! adhesion bound.

use dexsim_core::contact::{advance_gripper, GripperSide, VirtualGripper};
use dexsim_core::pbd::{grid_cloth, settle, step, ParticleCloth, SimParams};
use dexsim_core::scene::Scene;
use dexsim_core::{Iso3, Vec3};

/// Particles within the adhesion radius of any gripper proxy surface.
fn contacted_particles(cloth: &ParticleCloth, gripper: &VirtualGripper, r_adh: f64) -> Vec<usize> {
    let centers = gripper.proxy_world_centers();
    let mut out = Vec::new();
    for (i, p) in cloth.positions.iter().enumerate() {
        for (c, proxy) in centers.iter().zip(&gripper.finger_proxies) {
            if (p - c).norm() - proxy.radius < r_adh {
                out.push(i);
                break;
            }
        }
    }
    out
}

fn lift_scenario(params: &SimParams) -> (ParticleCloth, Scene, Vec<usize>) {
    // 0.3 x 0.3 m cloth settled on the ground.
    let mut cloth = grid_cloth(16, 16, 0.02, 0.01, 0.12);
    let mut scene = Scene::with_ground();
    settle(&mut cloth, &scene, params, 300, 1e-6).unwrap();

    // Closed gripper hovering so the lowest pads sit within adhesion range
    // of the cloth surface.
    let center = cloth.centroid();
    let mut gripper = VirtualGripper::pinch(GripperSide::Right);
    gripper.aperture = 0.0;
    gripper.pose = Iso3::translation(center.x, center.y, 0.020);
    let contacted = contacted_particles(&cloth, &gripper, params.r_adh);
    assert!(
        contacted.len() >= 4,
        "scenario needs several contacted particles, got {}",
        contacted.len()
    );
    scene.grippers.push(gripper);
    (cloth, scene, contacted)
}

fn run_lift(params: &SimParams) -> (ParticleCloth, Vec<usize>) {
    let (mut cloth, mut scene, contacted) = lift_scenario(params);
    let start = scene.grippers[0].pose.translation.vector;
    let target = Iso3::translation(start.x, start.y, start.z + 0.4);
    // Rise at 0.3 m/s, then hold.
    scene.grippers[0].max_speed = 0.3;
    for _ in 0..140 {
        let mut g = scene.grippers[0].clone();
        advance_gripper(&mut g, &target, 0.0, params.dt).unwrap();
        scene.grippers[0] = g;
        step(&mut cloth, &scene, params).unwrap();
    }
    (cloth, contacted)
}

#[test]
fn closed_gripper_lifts_contacted_particles() {
    let params = SimParams::default();
    let (cloth, contacted) = run_lift(&params);
    for &i in &contacted {
        assert!(
            cloth.positions[i].z >= 0.3,
            "contacted particle {i} only reached z = {}",
            cloth.positions[i].z
        );
    }
}

#[test]
fn lift_fails_without_adhesion_and_friction() {
    let mut params = SimParams::default();
    params.k_adh = 0.0;
    params.mu = 0.0;
    let (cloth, _) = run_lift(&params);
    let max_z = cloth.positions.iter().map(|p| p.z).fold(0.0, f64::max);
    assert!(
        max_z < 0.05,
        "cloth should stay down without adhesion/friction, max z = {max_z}"
    );
}

#[test]
fn single_finger_cannot_hoist_heavy_garment() {
    // A single fingertip column touching a 0.2 kg garment: the adhesion
    // bound k_adh * r_adh * contacted_count must be below the garment
    // weight, and the garment must stay down when the finger rises.
    let params = SimParams::default();

    // 20x20 at 4 cm spacing, area density chosen for 0.2 kg total.
    let area = (19.0f64 * 0.04) * (19.0 * 0.04);
    let density = 0.2 / area;
    let mut cloth = grid_cloth(20, 20, 0.04, 0.01, density);
    assert!((cloth.total_mass() - 0.2).abs() < 1e-9);
    let mut scene = Scene::with_ground();
    settle(&mut cloth, &scene, &params, 300, 1e-6).unwrap();

    let center = cloth.centroid();
    let mut gripper = VirtualGripper::pinch(GripperSide::Right);
    // One fingertip: a vertical column of two pads.
    gripper.finger_proxies = vec![
        dexsim_core::contact::FingerProxy {
            local_offset: Vec3::new(0.0, 0.0, 0.0),
            radius: 0.012,
        },
        dexsim_core::contact::FingerProxy {
            local_offset: Vec3::new(0.0, 0.0, 0.025),
            radius: 0.012,
        },
    ];
    gripper.proxy_velocities = vec![Vec3::zeros(); 2];
    gripper.aperture = 0.0;
    gripper.pose = Iso3::translation(center.x, center.y, 0.016);

    let contacted = contacted_particles(&cloth, &gripper, params.r_adh);
    assert!(!contacted.is_empty(), "finger must touch the garment");
    let weight = cloth.total_mass() * 9.8;
    let adhesion_bound = params.k_adh * params.r_adh * contacted.len() as f64;
    assert!(
        adhesion_bound < weight,
        "adhesion bound {adhesion_bound} N must be below garment weight {weight} N \
         (contacted {})",
        contacted.len()
    );

    scene.grippers.push(gripper);
    let target = Iso3::translation(center.x, center.y, 0.016 + 0.4);
    scene.grippers[0].max_speed = 0.3;
    for _ in 0..140 {
        let mut g = scene.grippers[0].clone();
        advance_gripper(&mut g, &target, 0.0, params.dt).unwrap();
        scene.grippers[0] = g;
        step(&mut cloth, &scene, &params).unwrap();
    }
    let max_z = cloth.positions.iter().map(|p| p.z).fold(0.0, f64::max);
    let min_z = cloth.positions.iter().map(|p| p.z).fold(f64::INFINITY, f64::min);
    assert!(
        max_z < 0.1,
        "single finger hoisted the garment to z = {max_z}"
    );
    assert!(min_z < 0.02, "garment should still rest on the ground");
}
