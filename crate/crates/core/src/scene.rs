//! Kinematic scene bodies: signed-distance primitives composed into the
//! interaction assets (ground, hanger, pothook, platform, mannequin) plus
//! the container holding bodies and virtual grippers.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::contact::VirtualGripper;
use crate::error::{CoreError, Result};
use crate::{Iso3, Vec3};

/// Convex collision primitive in the body's local frame.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Primitive {
    /// Half-space z <= 0 in local frame, outward normal +z.
    Plane,
    Sphere { center: Vec3, radius: f64 },
    Capsule { a: Vec3, b: Vec3, radius: f64 },
    /// Axis-aligned box in the local frame.
    Box { center: Vec3, half_extents: Vec3 },
}

/// Closest-surface query result.
#[derive(Debug, Clone, Copy)]
pub struct SurfaceHit {
    /// Signed distance, negative inside.
    pub distance: f64,
    pub surface_point: Vec3,
    /// Outward unit normal at the surface point.
    pub normal: Vec3,
}

impl Primitive {
    /// Signed distance, closest surface point, and outward normal for a
    /// query point in the local frame.
    pub fn surface_hit(&self, p: Vec3) -> SurfaceHit {
        match self {
            Primitive::Plane => SurfaceHit {
                distance: p.z,
                surface_point: Vec3::new(p.x, p.y, 0.0),
                normal: Vec3::z(),
            },
            Primitive::Sphere { center, radius } => {
                let delta = p - center;
                let dist = delta.norm();
                let normal = if dist > 1e-12 { delta / dist } else { Vec3::z() };
                SurfaceHit {
                    distance: dist - radius,
                    surface_point: center + normal * *radius,
                    normal,
                }
            }
            Primitive::Capsule { a, b, radius } => {
                let axis = b - a;
                let len_sq = axis.norm_squared();
                let t = if len_sq > 1e-12 {
                    ((p - a).dot(&axis) / len_sq).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                let on_axis = a + axis * t;
                let delta = p - on_axis;
                let dist = delta.norm();
                let normal = if dist > 1e-12 { delta / dist } else { Vec3::z() };
                SurfaceHit {
                    distance: dist - radius,
                    surface_point: on_axis + normal * *radius,
                    normal,
                }
            }
            Primitive::Box {
                center,
                half_extents,
            } => {
                let q = p - center;
                let outside = Vec3::new(
                    q.x.clamp(-half_extents.x, half_extents.x),
                    q.y.clamp(-half_extents.y, half_extents.y),
                    q.z.clamp(-half_extents.z, half_extents.z),
                );
                let delta = q - outside;
                let dist = delta.norm();
                if dist > 1e-12 {
                    SurfaceHit {
                        distance: dist,
                        surface_point: center + outside,
                        normal: delta / dist,
                    }
                } else {
                    // Inside: exit through the nearest face.
                    let gaps = [
                        (half_extents.x - q.x, Vec3::x()),
                        (half_extents.x + q.x, -Vec3::x()),
                        (half_extents.y - q.y, Vec3::y()),
                        (half_extents.y + q.y, -Vec3::y()),
                        (half_extents.z - q.z, Vec3::z()),
                        (half_extents.z + q.z, -Vec3::z()),
                    ];
                    let (gap, normal) = gaps
                        .iter()
                        .copied()
                        .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
                        .unwrap();
                    SurfaceHit {
                        distance: -gap,
                        surface_point: p + normal * gap,
                        normal,
                    }
                }
            }
        }
    }
}

/// Scene body kinds. Gripper proxies are not built through
/// `build_interaction_asset`; they belong to `VirtualGripper`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BodyKind {
    Ground,
    Hanger,
    Pothook,
    Platform,
    Mannequin,
    GripperProxy,
}

/// A kinematic rigid collider composed of primitives, with named reference
/// points in the local frame.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SceneBody {
    pub body_id: String,
    pub kind: BodyKind,
    pub shape: Vec<Primitive>,
    pub pose: Iso3,
    pub named_points: BTreeMap<String, Vec3>,
}

impl SceneBody {
    /// Closest surface over all primitives, in world coordinates.
    pub fn surface_hit_world(&self, p_world: Vec3) -> SurfaceHit {
        let p_local = self.pose.inverse_transform_point(&p_world.into());
        let p_local = Vec3::new(p_local.x, p_local.y, p_local.z);
        let mut best: Option<SurfaceHit> = None;
        for prim in &self.shape {
            let hit = prim.surface_hit(p_local);
            if best.map_or(true, |b| hit.distance < b.distance) {
                best = Some(hit);
            }
        }
        let hit = best.expect("scene body has at least one primitive");
        let sp = self.pose.transform_point(&hit.surface_point.into());
        SurfaceHit {
            distance: hit.distance,
            surface_point: Vec3::new(sp.x, sp.y, sp.z),
            normal: self.pose.rotation * hit.normal,
        }
    }

    pub fn world_named_point(&self, name: &str) -> Result<Vec3> {
        let local = self
            .named_points
            .get(name)
            .ok_or_else(|| CoreError::MissingLandmark(format!("{}:{name}", self.body_id)))?;
        let p = self.pose.transform_point(&(*local).into());
        Ok(Vec3::new(p.x, p.y, p.z))
    }

    /// Mannequin facing direction (local -y) in world coordinates.
    pub fn facing_axis(&self) -> Vec3 {
        self.pose.rotation * Vec3::new(0.0, -1.0, 0.0)
    }
}

/// Dimensions for `build_interaction_asset`, one variant per asset kind.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum AssetDims {
    Ground,
    Hanger {
        pole_height: f64,
        bar_length: f64,
        radius: f64,
    },
    Pothook {
        wall_size: Vec3,
        peg_length: f64,
        peg_radius: f64,
        peg_height: f64,
    },
    Platform {
        size: Vec3,
    },
    Mannequin {
        torso_height: f64,
        torso_radius: f64,
        neck_height: f64,
        neck_radius: f64,
        head_radius: f64,
    },
}

impl AssetDims {
    pub fn default_for(kind: BodyKind) -> Result<AssetDims> {
        match kind {
            BodyKind::Ground => Ok(AssetDims::Ground),
            BodyKind::Hanger => Ok(AssetDims::Hanger {
                pole_height: 1.0,
                bar_length: 0.4,
                radius: 0.012,
            }),
            BodyKind::Pothook => Ok(AssetDims::Pothook {
                wall_size: Vec3::new(0.6, 0.04, 1.2),
                peg_length: 0.12,
                peg_radius: 0.015,
                peg_height: 0.9,
            }),
            BodyKind::Platform => Ok(AssetDims::Platform {
                size: Vec3::new(0.4, 0.4, 0.3),
            }),
            BodyKind::Mannequin => Ok(AssetDims::Mannequin {
                torso_height: 0.5,
                torso_radius: 0.16,
                neck_height: 0.08,
                neck_radius: 0.05,
                head_radius: 0.10,
            }),
            BodyKind::GripperProxy => Err(CoreError::InvalidArgument(
                "gripper proxies are not interaction assets".into(),
            )),
        }
    }
}

/// Build one interaction asset from primitives.
///
/// Local frames: the ground plane is z=0; a hanger's pole rises from the
/// origin with the bar crossing at the top (hanger_center at the bar
/// midpoint); a pothook has its wall behind the protruding peg (hook_center
/// at the peg tip); a platform box sits on z=0 with platform_center on the
/// top face; a mannequin stacks torso, neck, and head with head_top at the
/// apex and faces local -y.
pub fn build_interaction_asset(kind: BodyKind, pose: Iso3, dims: &AssetDims) -> Result<SceneBody> {
    let mut named_points = BTreeMap::new();
    let positive = |v: f64, what: &str| {
        if v > 0.0 {
            Ok(())
        } else {
            Err(CoreError::InvalidArgument(format!("{what} must be > 0")))
        }
    };
    let shape = match (kind, dims) {
        (BodyKind::Ground, AssetDims::Ground) => vec![Primitive::Plane],
        (
            BodyKind::Hanger,
            AssetDims::Hanger {
                pole_height,
                bar_length,
                radius,
            },
        ) => {
            positive(*pole_height, "pole_height")?;
            positive(*bar_length, "bar_length")?;
            positive(*radius, "radius")?;
            let top = Vec3::new(0.0, 0.0, *pole_height);
            named_points.insert("hanger_center".into(), top);
            vec![
                Primitive::Capsule {
                    a: Vec3::zeros(),
                    b: top,
                    radius: *radius,
                },
                Primitive::Capsule {
                    a: top - Vec3::x() * (bar_length / 2.0),
                    b: top + Vec3::x() * (bar_length / 2.0),
                    radius: *radius,
                },
            ]
        }
        (
            BodyKind::Pothook,
            AssetDims::Pothook {
                wall_size,
                peg_length,
                peg_radius,
                peg_height,
            },
        ) => {
            positive(*peg_length, "peg_length")?;
            positive(*peg_radius, "peg_radius")?;
            positive(*peg_height, "peg_height")?;
            positive(wall_size.x.min(wall_size.y).min(wall_size.z), "wall_size")?;
            // Peg protrudes toward -y (toward the workspace).
            let base = Vec3::new(0.0, 0.0, *peg_height);
            let tip = base - Vec3::y() * *peg_length;
            named_points.insert("hook_center".into(), tip);
            vec![
                Primitive::Box {
                    center: Vec3::new(0.0, wall_size.y / 2.0, wall_size.z / 2.0),
                    half_extents: *wall_size / 2.0,
                },
                Primitive::Capsule {
                    a: base,
                    b: tip,
                    radius: *peg_radius,
                },
            ]
        }
        (BodyKind::Platform, AssetDims::Platform { size }) => {
            positive(size.x.min(size.y).min(size.z), "platform size")?;
            named_points.insert("platform_center".into(), Vec3::new(0.0, 0.0, size.z));
            vec![Primitive::Box {
                center: Vec3::new(0.0, 0.0, size.z / 2.0),
                half_extents: *size / 2.0,
            }]
        }
        (
            BodyKind::Mannequin,
            AssetDims::Mannequin {
                torso_height,
                torso_radius,
                neck_height,
                neck_radius,
                head_radius,
            },
        ) => {
            positive(*torso_height, "torso_height")?;
            positive(*torso_radius, "torso_radius")?;
            positive(*neck_height, "neck_height")?;
            positive(*neck_radius, "neck_radius")?;
            positive(*head_radius, "head_radius")?;
            let neck_base = Vec3::new(0.0, 0.0, *torso_height);
            let neck_top = neck_base + Vec3::z() * *neck_height;
            let head_center = neck_top + Vec3::z() * *head_radius;
            named_points.insert("neck_center".into(), neck_base + Vec3::z() * (neck_height / 2.0));
            named_points.insert("head_top".into(), head_center + Vec3::z() * *head_radius);
            vec![
                Primitive::Capsule {
                    a: Vec3::new(0.0, 0.0, *torso_radius),
                    b: neck_base,
                    radius: *torso_radius,
                },
                Primitive::Capsule {
                    a: neck_base,
                    b: neck_top,
                    radius: *neck_radius,
                },
                Primitive::Sphere {
                    center: head_center,
                    radius: *head_radius,
                },
            ]
        }
        (BodyKind::GripperProxy, _) => {
            return Err(CoreError::InvalidArgument(
                "gripper proxies are not interaction assets".into(),
            ))
        }
        (kind, dims) => {
            return Err(CoreError::InvalidArgument(format!(
                "dims {dims:?} do not match asset kind {kind:?}"
            )))
        }
    };
    Ok(SceneBody {
        body_id: format!("{kind:?}").to_lowercase(),
        kind,
        shape,
        pose,
        named_points,
    })
}

/// The bodies and grippers an episode simulates against.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Scene {
    pub bodies: Vec<SceneBody>,
    pub grippers: Vec<VirtualGripper>,
}

impl Scene {
    /// Empty scene with only the ground plane.
    pub fn with_ground() -> Scene {
        let ground = build_interaction_asset(BodyKind::Ground, Iso3::identity(), &AssetDims::Ground)
            .expect("ground is valid");
        Scene {
            bodies: vec![ground],
            grippers: Vec::new(),
        }
    }

    pub fn body(&self, id: &str) -> Option<&SceneBody> {
        self.bodies.iter().find(|b| b.body_id == id)
    }

    /// Audit view: kind, pose, and world-space named points per body, as JSON.
    pub fn description_json(&self) -> serde_json::Value {
        let bodies: Vec<serde_json::Value> = self
            .bodies
            .iter()
            .map(|b| {
                let world_points: BTreeMap<String, [f64; 3]> = b
                    .named_points
                    .keys()
                    .map(|name| {
                        let p = b.world_named_point(name).expect("known point");
                        (name.clone(), [p.x, p.y, p.z])
                    })
                    .collect();
                serde_json::json!({
                    "body_id": b.body_id,
                    "kind": format!("{:?}", b.kind).to_lowercase(),
                    "position": [b.pose.translation.x, b.pose.translation.y, b.pose.translation.z],
                    "named_points": world_points,
                })
            })
            .collect();
        serde_json::json!({ "bodies": bodies })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn plane_hit() {
        let hit = Primitive::Plane.surface_hit(Vec3::new(0.3, -0.2, 0.004));
        assert_relative_eq!(hit.distance, 0.004);
        assert_eq!(hit.normal, Vec3::z());
        assert_relative_eq!(hit.surface_point.z, 0.0);
    }

    #[test]
    fn sphere_hit_inside_is_negative() {
        let s = Primitive::Sphere {
            center: Vec3::zeros(),
            radius: 0.5,
        };
        let hit = s.surface_hit(Vec3::new(0.2, 0.0, 0.0));
        assert_relative_eq!(hit.distance, -0.3, epsilon = 1e-12);
        assert_relative_eq!(hit.surface_point.x, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn capsule_hit() {
        let c = Primitive::Capsule {
            a: Vec3::zeros(),
            b: Vec3::new(0.0, 0.0, 1.0),
            radius: 0.1,
        };
        let hit = c.surface_hit(Vec3::new(0.3, 0.0, 0.5));
        assert_relative_eq!(hit.distance, 0.2, epsilon = 1e-12);
        assert_relative_eq!(hit.normal.x, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn box_inside_exits_nearest_face() {
        let b = Primitive::Box {
            center: Vec3::zeros(),
            half_extents: Vec3::new(0.5, 0.5, 0.25),
        };
        let hit = b.surface_hit(Vec3::new(0.1, 0.0, 0.2));
        assert_relative_eq!(hit.distance, -0.05, epsilon = 1e-12);
        assert_eq!(hit.normal, Vec3::z());
        assert_relative_eq!(hit.surface_point.z, 0.25, epsilon = 1e-12);
    }

    #[test]
    fn platform_center_on_top_face() {
        let body = build_interaction_asset(
            BodyKind::Platform,
            Iso3::identity(),
            &AssetDims::Platform {
                size: Vec3::new(0.4, 0.4, 0.3),
            },
        )
        .unwrap();
        let p = body.world_named_point("platform_center").unwrap();
        assert_relative_eq!(p.z, 0.3, epsilon = 1e-12);
        assert_relative_eq!(p.x, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn mannequin_head_top_composition() {
        let pose = Iso3::translation(0.1, 0.9, 0.0);
        let dims = AssetDims::Mannequin {
            torso_height: 0.5,
            torso_radius: 0.16,
            neck_height: 0.08,
            neck_radius: 0.05,
            head_radius: 0.10,
        };
        let body = build_interaction_asset(BodyKind::Mannequin, pose, &dims).unwrap();
        let p = body.world_named_point("head_top").unwrap();
        assert_relative_eq!(p.z, 0.5 + 0.08 + 0.2, epsilon = 1e-12);
        assert_relative_eq!(p.x, 0.1, epsilon = 1e-12);
        assert_relative_eq!(p.y, 0.9, epsilon = 1e-12);
    }

    #[test]
    fn hanger_center_at_bar_midpoint() {
        let body = build_interaction_asset(
            BodyKind::Hanger,
            Iso3::identity(),
            &AssetDims::Hanger {
                pole_height: 1.0,
                bar_length: 0.4,
                radius: 0.012,
            },
        )
        .unwrap();
        let p = body.world_named_point("hanger_center").unwrap();
        assert_relative_eq!(p.z, 1.0, epsilon = 1e-12);
        assert_relative_eq!(p.x, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn invalid_dims_rejected() {
        let res = build_interaction_asset(
            BodyKind::Platform,
            Iso3::identity(),
            &AssetDims::Platform {
                size: Vec3::new(0.4, 0.0, 0.3),
            },
        );
        assert!(res.is_err());
    }
}
