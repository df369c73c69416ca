//! Triangle meshes with intrinsic (u,v) coordinates, the input to cloth
//! discretization and the output of the garment template generators.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::Vec3;

/// The eight garment categories templates can generate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GarmentCategory {
    TopsLongSleeve,
    TopsNoSleeve,
    TopsFrontOpen,
    Trousers,
    DressLongSleeve,
    Scarf,
    BaseballCap,
    BowlHat,
}

impl GarmentCategory {
    pub const ALL: [GarmentCategory; 8] = [
        GarmentCategory::TopsLongSleeve,
        GarmentCategory::TopsNoSleeve,
        GarmentCategory::TopsFrontOpen,
        GarmentCategory::Trousers,
        GarmentCategory::DressLongSleeve,
        GarmentCategory::Scarf,
        GarmentCategory::BaseballCap,
        GarmentCategory::BowlHat,
    ];

    /// Stable index used for one-hot feature encoding.
    pub fn index(self) -> usize {
        Self::ALL.iter().position(|c| *c == self).unwrap()
    }

    pub fn name(self) -> &'static str {
        match self {
            GarmentCategory::TopsLongSleeve => "tops_long_sleeve",
            GarmentCategory::TopsNoSleeve => "tops_no_sleeve",
            GarmentCategory::TopsFrontOpen => "tops_front_open",
            GarmentCategory::Trousers => "trousers",
            GarmentCategory::DressLongSleeve => "dress_long_sleeve",
            GarmentCategory::Scarf => "scarf",
            GarmentCategory::BaseballCap => "baseball_cap",
            GarmentCategory::BowlHat => "bowl_hat",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| CoreError::InvalidArgument(format!("unknown garment category '{s}'")))
    }
}

/// Semantic part of a garment a vertex belongs to; used for feature encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GarmentPart {
    Body,
    SleeveLeft,
    SleeveRight,
    LegLeft,
    LegRight,
    Other,
}

impl GarmentPart {
    pub const COUNT: usize = 6;

    pub fn index(self) -> usize {
        match self {
            GarmentPart::Body => 0,
            GarmentPart::SleeveLeft => 1,
            GarmentPart::SleeveRight => 2,
            GarmentPart::LegLeft => 3,
            GarmentPart::LegRight => 4,
            GarmentPart::Other => 5,
        }
    }
}

/// A triangle mesh with per-vertex (u,v) coordinates in [0,1]^2, named
/// landmark vertices, and per-vertex part labels.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TriangleMesh {
    pub positions: Vec<Vec3>,
    pub uv: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub landmarks: BTreeMap<String, usize>,
    pub parts: Vec<GarmentPart>,
    pub category: Option<GarmentCategory>,
    /// True when uv was synthesized (planar projection) rather than read
    /// from the source asset.
    pub uv_generated: bool,
}

impl TriangleMesh {
    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    pub fn triangle_area(&self, tri: [usize; 3]) -> f64 {
        let [a, b, c] = tri;
        let ab = self.positions[b] - self.positions[a];
        let ac = self.positions[c] - self.positions[a];
        0.5 * ab.cross(&ac).norm()
    }

    /// Map from undirected edge (i<j) to the triangles sharing it, in
    /// deterministic (sorted) order.
    pub fn edge_map(&self) -> BTreeMap<(usize, usize), Vec<usize>> {
        let mut edges: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for e in 0..3 {
                let a = tri[e];
                let b = tri[(e + 1) % 3];
                let key = if a < b { (a, b) } else { (b, a) };
                edges.entry(key).or_default().push(t);
            }
        }
        edges
    }

    /// Check index bounds, manifoldness (each edge shared by at most two
    /// triangles), non-degenerate triangles, and uv ranges.
    pub fn validate(&self) -> Result<()> {
        let n = self.positions.len();
        if self.uv.len() != n {
            return Err(CoreError::Mesh(format!(
                "uv count {} != vertex count {n}",
                self.uv.len()
            )));
        }
        if !self.parts.is_empty() && self.parts.len() != n {
            return Err(CoreError::Mesh(format!(
                "part label count {} != vertex count {n}",
                self.parts.len()
            )));
        }
        if self.triangles.is_empty() {
            return Err(CoreError::Mesh("mesh has no triangles".into()));
        }
        for (t, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                if v >= n {
                    return Err(CoreError::Mesh(format!(
                        "triangle {t} references vertex {v} >= {n}"
                    )));
                }
            }
            let area = self.triangle_area(*tri);
            if !(area > 1e-12) {
                return Err(CoreError::DegenerateTriangle { index: t, area });
            }
        }
        for (&(a, b), tris) in self.edge_map().iter() {
            if tris.len() > 2 {
                return Err(CoreError::NonManifold(a, b, tris.len()));
            }
        }
        for (i, uv) in self.uv.iter().enumerate() {
            for c in uv {
                if !(-1e-9..=1.0 + 1e-9).contains(c) {
                    return Err(CoreError::Mesh(format!(
                        "uv[{i}] = ({}, {}) outside [0,1]",
                        uv[0], uv[1]
                    )));
                }
            }
        }
        for (name, &idx) in &self.landmarks {
            if idx >= n {
                return Err(CoreError::Mesh(format!(
                    "landmark '{name}' index {idx} >= {n}"
                )));
            }
        }
        Ok(())
    }
}
