//! Garment simulation core: a deterministic position-based-dynamics solver
//! with an adhesion/friction contact model, procedural garment templates and
//! scene assets, dense point correspondence for grasp-point transfer, and
//! per-task success metrics.
//!
//! Everything here is pure CPU code over `f64` state. A cloth plus scene is
//! owned by exactly one episode; there is no shared mutable state, so any
//! number of episodes can run concurrently.

pub mod config;
pub mod contact;
pub mod correspond;
pub mod error;
pub mod mesh;
pub mod metrics;
pub mod obj;
pub mod pbd;
pub mod pointcloud;
pub mod scene;
pub mod templates;

pub use error::CoreError;

/// 3-vector in meters (or m/s, N, ... depending on context).
pub type Vec3 = nalgebra::Vector3<f64>;
/// Rigid transform (rotation + translation).
pub type Iso3 = nalgebra::Isometry3<f64>;
/// Unit quaternion orientation.
pub type Quat = nalgebra::UnitQuaternion<f64>;
