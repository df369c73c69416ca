use dexsim_core::contact::{advance_gripper, GripperSide, VirtualGripper};
use dexsim_core::pbd::{grid_cloth, settle, step, SimParams};
use dexsim_core::scene::Scene;
use dexsim_core::Iso3;

fn main() {
    let params = SimParams::default();
    let mut cloth = grid_cloth(16, 16, 0.02, 0.01, 0.12);
    let mut scene = Scene::with_ground();
    settle(&mut cloth, &scene, &params, 300, 1e-6).unwrap();
    let center = cloth.centroid();
    println!("cloth center {:?}, z range {:.4}..{:.4}", center,
        cloth.positions.iter().map(|p| p.z).fold(f64::INFINITY, f64::min),
        cloth.positions.iter().map(|p| p.z).fold(0.0, f64::max));

    let mut gripper = VirtualGripper::pinch(GripperSide::Right);
    gripper.aperture = 0.0;
    gripper.pose = Iso3::translation(center.x, center.y, 0.020);
    println!("proxy centers: {:?}", gripper.proxy_world_centers());
    scene.grippers.push(gripper);

    let start = scene.grippers[0].pose.translation.vector;
    let target = Iso3::translation(start.x, start.y, start.z + 0.4);
    scene.grippers[0].max_speed = 0.3;
    for s in 0..140 {
        let mut g = scene.grippers[0].clone();
        advance_gripper(&mut g, &target, 0.0, params.dt).unwrap();
        scene.grippers[0] = g;
        let report = step(&mut cloth, &scene, &params).unwrap();
        if s % 20 == 0 {
            let gripper_contacts = report
                .contacts
                .iter()
                .filter(|c| matches!(c.collider, dexsim_core::contact::ColliderId::GripperProxy { .. }))
                .count();
            println!(
                "step {s}: gripper z {:.3}, cloth max z {:.4}, gripper contacts {gripper_contacts}",
                scene.grippers[0].pose.translation.z,
                cloth.positions.iter().map(|p| p.z).fold(0.0, f64::max),
            );
        }
    }
}
