//! Procedural garment templates. Flat garments (tops, trousers, dresses,
//! scarves) are unions of labeled rectangles on a shared lattice; hats are
//! polar dome meshes. Every instance of a category uses the same semantic
//! (u,v) chart, so equal (u,v) means the same location on the garment
//! regardless of the instance's dimensions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::mesh::{GarmentCategory, GarmentPart, TriangleMesh};
use crate::Vec3;

/// Category-specific dimensions in meters, keyed by name.
pub type ShapeParams = BTreeMap<String, f64>;

/// A garment template: category, dimensions, and target particle spacing.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GarmentTemplate {
    pub category: GarmentCategory,
    pub shape_params: ShapeParams,
    pub resolution: f64,
}

impl GarmentTemplate {
    pub fn with_defaults(category: GarmentCategory) -> GarmentTemplate {
        GarmentTemplate {
            category,
            shape_params: default_shape_params(category),
            resolution: 0.02,
        }
    }

    pub fn generate(&self) -> Result<TriangleMesh> {
        generate_template(self.category, &self.shape_params, self.resolution)
    }

    fn dim(&self, key: &str) -> Result<f64> {
        dim(&self.shape_params, key)
    }

    /// Overall garment length along its long axis, used for adaptive lifts.
    pub fn garment_length(&self) -> Result<f64> {
        match self.category {
            GarmentCategory::TopsLongSleeve
            | GarmentCategory::TopsFrontOpen
            | GarmentCategory::TopsNoSleeve => self.dim("body_length"),
            GarmentCategory::DressLongSleeve => self.dim("body_length"),
            GarmentCategory::Trousers => {
                Ok(self.dim("leg_length")? + self.dim("waist_band_height")?)
            }
            GarmentCategory::Scarf => self.dim("length"),
            GarmentCategory::BaseballCap | GarmentCategory::BowlHat => {
                Ok(self.dim("radius")? * 2.0)
            }
        }
    }

    /// Sleeve length when the category has sleeves, else zero.
    pub fn sleeve_length(&self) -> f64 {
        self.shape_params.get("sleeve_length").copied().unwrap_or(0.0)
    }
}

/// Published default dimensions per category.
pub fn default_shape_params(category: GarmentCategory) -> ShapeParams {
    let mut p = ShapeParams::new();
    let mut set = |k: &str, v: f64| {
        p.insert(k.to_string(), v);
    };
    match category {
        GarmentCategory::TopsLongSleeve | GarmentCategory::TopsFrontOpen => {
            set("body_width", 0.5);
            set("body_length", 0.6);
            set("sleeve_length", 0.45);
            set("sleeve_width", 0.18);
        }
        GarmentCategory::TopsNoSleeve => {
            set("body_width", 0.5);
            set("body_length", 0.6);
        }
        GarmentCategory::DressLongSleeve => {
            set("body_width", 0.5);
            set("body_length", 0.9);
            set("sleeve_length", 0.4);
            set("sleeve_width", 0.16);
        }
        GarmentCategory::Trousers => {
            set("waist_width", 0.4);
            set("waist_band_height", 0.12);
            set("leg_length", 0.65);
            set("leg_width", 0.16);
        }
        GarmentCategory::Scarf => {
            set("length", 0.40);
            set("width", 0.15);
        }
        GarmentCategory::BaseballCap => {
            set("radius", 0.09);
            set("dome_height", 0.07);
            set("brim_length", 0.07);
        }
        GarmentCategory::BowlHat => {
            set("radius", 0.09);
            set("dome_height", 0.08);
            set("brim_length", 0.05);
        }
    }
    p
}

fn dim(params: &ShapeParams, key: &str) -> Result<f64> {
    let v = params
        .get(key)
        .copied()
        .ok_or_else(|| CoreError::InvalidArgument(format!("missing shape param '{key}'")))?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(CoreError::InvalidArgument(format!(
            "shape param '{key}' must be > 0, got {v}"
        )));
    }
    Ok(v)
}

/// Generate the mesh for a category. The mesh lies in the xy-plane (hats
/// rise in +z), centered on the origin, with named landmarks per category.
pub fn generate_template(
    category: GarmentCategory,
    shape_params: &ShapeParams,
    resolution: f64,
) -> Result<TriangleMesh> {
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(CoreError::InvalidArgument("resolution must be > 0".into()));
    }
    match category {
        GarmentCategory::TopsLongSleeve
        | GarmentCategory::TopsFrontOpen
        | GarmentCategory::DressLongSleeve => sleeved_top(category, shape_params, resolution),
        GarmentCategory::TopsNoSleeve => no_sleeve_top(shape_params, resolution),
        GarmentCategory::Trousers => trousers(shape_params, resolution),
        GarmentCategory::Scarf => scarf(shape_params, resolution),
        GarmentCategory::BaseballCap | GarmentCategory::BowlHat => {
            hat(category, shape_params, resolution)
        }
    }
}

/// One labeled rectangle of a flat garment, in pattern coordinates.
struct Panel {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    part: GarmentPart,
}

/// A landmark request: part, semantic uv, and name.
struct LandmarkSpec {
    name: &'static str,
    part: GarmentPart,
    uv: [f64; 2],
}

/// Assemble a flat garment from panels on a common lattice; `chart` maps
/// (part, x, y) to semantic uv.
fn build_flat(
    panels: &[Panel],
    resolution: f64,
    chart: impl Fn(GarmentPart, f64, f64) -> [f64; 2],
    landmark_specs: &[LandmarkSpec],
    category: GarmentCategory,
) -> Result<TriangleMesh> {
    let h = resolution;
    let min_feature = panels
        .iter()
        .map(|p| (p.x1 - p.x0).min(p.y1 - p.y0))
        .fold(f64::INFINITY, f64::min);
    if h > min_feature / 2.0 {
        return Err(CoreError::InvalidArgument(format!(
            "resolution {h} too coarse for smallest feature {min_feature}"
        )));
    }
    let ox = panels.iter().map(|p| p.x0).fold(f64::INFINITY, f64::min);
    let oy = panels.iter().map(|p| p.y0).fold(f64::INFINITY, f64::min);

    let snap = |v: f64, o: f64| -> i64 { ((v - o) / h).round() as i64 };
    // Cells claimed by each panel; first panel to claim wins the part label.
    let mut cells: BTreeMap<(i64, i64), GarmentPart> = BTreeMap::new();
    let mut vertex_part: BTreeMap<(i64, i64), GarmentPart> = BTreeMap::new();
    for p in panels {
        let (i0, i1) = (snap(p.x0, ox), snap(p.x1, ox));
        let (j0, j1) = (snap(p.y0, oy), snap(p.y1, oy));
        if i1 <= i0 || j1 <= j0 {
            return Err(CoreError::InvalidArgument(
                "panel collapses at this resolution".into(),
            ));
        }
        for i in i0..i1 {
            for j in j0..j1 {
                cells.entry((i, j)).or_insert(p.part);
            }
        }
        for i in i0..=i1 {
            for j in j0..=j1 {
                vertex_part.entry((i, j)).or_insert(p.part);
            }
        }
    }

    // Vertices are the corners of included cells, in lattice order.
    let mut vertex_ids: BTreeMap<(i64, i64), usize> = BTreeMap::new();
    for (&(i, j), _) in &cells {
        for corner in [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)] {
            let next = vertex_ids.len();
            vertex_ids.entry(corner).or_insert(next);
        }
    }

    let mut positions = vec![Vec3::zeros(); vertex_ids.len()];
    let mut uv = vec![[0.0, 0.0]; vertex_ids.len()];
    let mut parts = vec![GarmentPart::Other; vertex_ids.len()];
    for (&(i, j), &idx) in &vertex_ids {
        let x = ox + i as f64 * h;
        let y = oy + j as f64 * h;
        positions[idx] = Vec3::new(x, y, 0.0);
        let part = vertex_part.get(&(i, j)).copied().unwrap_or(GarmentPart::Other);
        parts[idx] = part;
        let c = chart(part, x, y);
        uv[idx] = [c[0].clamp(0.0, 1.0), c[1].clamp(0.0, 1.0)];
    }

    let mut triangles = Vec::with_capacity(cells.len() * 2);
    for &(i, j) in cells.keys() {
        let a = vertex_ids[&(i, j)];
        let b = vertex_ids[&(i + 1, j)];
        let c = vertex_ids[&(i, j + 1)];
        let d = vertex_ids[&(i + 1, j + 1)];
        triangles.push([a, b, d]);
        triangles.push([a, d, c]);
    }

    let mut landmarks = BTreeMap::new();
    for spec in landmark_specs {
        let idx = nearest_by_uv(&uv, &parts, spec.part, spec.uv).ok_or_else(|| {
            CoreError::Mesh(format!("no vertex for landmark '{}'", spec.name))
        })?;
        landmarks.insert(spec.name.to_string(), idx);
    }

    let mesh = TriangleMesh {
        positions,
        uv,
        triangles,
        landmarks,
        parts,
        category: Some(category),
        uv_generated: false,
    };
    mesh.validate()?;
    Ok(mesh)
}

fn nearest_by_uv(
    uv: &[[f64; 2]],
    parts: &[GarmentPart],
    part: GarmentPart,
    target: [f64; 2],
) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (idx, (c, p)) in uv.iter().zip(parts).enumerate() {
        if *p != part {
            continue;
        }
        let d = (c[0] - target[0]).powi(2) + (c[1] - target[1]).powi(2);
        if best.map_or(true, |(_, bd)| d < bd) {
            best = Some((idx, d));
        }
    }
    best.map(|(idx, _)| idx)
}

fn sleeved_top(
    category: GarmentCategory,
    params: &ShapeParams,
    resolution: f64,
) -> Result<TriangleMesh> {
    let bw = dim(params, "body_width")?;
    let bl = dim(params, "body_length")?;
    let sl = dim(params, "sleeve_length")?;
    let sw = dim(params, "sleeve_width")?;
    if sw > bl {
        return Err(CoreError::InvalidArgument(
            "sleeve_width cannot exceed body_length".into(),
        ));
    }
    // Collar toward +y; sleeves attach along the top of the body sides.
    let panels = [
        Panel {
            x0: -bw / 2.0,
            x1: bw / 2.0,
            y0: 0.0,
            y1: bl,
            part: GarmentPart::Body,
        },
        Panel {
            x0: -bw / 2.0 - sl,
            x1: -bw / 2.0,
            y0: bl - sw,
            y1: bl,
            part: GarmentPart::SleeveLeft,
        },
        Panel {
            x0: bw / 2.0,
            x1: bw / 2.0 + sl,
            y0: bl - sw,
            y1: bl,
            part: GarmentPart::SleeveRight,
        },
    ];
    let chart = move |part: GarmentPart, x: f64, y: f64| -> [f64; 2] {
        match part {
            GarmentPart::SleeveLeft => [
                0.3 * (x - (-bw / 2.0 - sl)) / sl,
                0.7 + 0.3 * (y - (bl - sw)) / sw,
            ],
            GarmentPart::SleeveRight => [
                0.7 + 0.3 * (x - bw / 2.0) / sl,
                0.7 + 0.3 * (y - (bl - sw)) / sw,
            ],
            _ => [0.3 + 0.4 * (x + bw / 2.0) / bw, y / bl],
        }
    };
    let mut specs = vec![
        LandmarkSpec {
            name: "left_sleeve_tip",
            part: GarmentPart::SleeveLeft,
            uv: [0.0, 0.85],
        },
        LandmarkSpec {
            name: "right_sleeve_tip",
            part: GarmentPart::SleeveRight,
            uv: [1.0, 0.85],
        },
        LandmarkSpec {
            name: "collar_center",
            part: GarmentPart::Body,
            uv: [0.5, 1.0],
        },
        LandmarkSpec {
            name: "bottom_center",
            part: GarmentPart::Body,
            uv: [0.5, 0.0],
        },
        LandmarkSpec {
            name: "left_shoulder",
            part: GarmentPart::Body,
            uv: [0.3, 1.0],
        },
        LandmarkSpec {
            name: "right_shoulder",
            part: GarmentPart::Body,
            uv: [0.7, 1.0],
        },
        LandmarkSpec {
            name: "left_bottom_corner",
            part: GarmentPart::Body,
            uv: [0.3, 0.0],
        },
        LandmarkSpec {
            name: "right_bottom_corner",
            part: GarmentPart::Body,
            uv: [0.7, 0.0],
        },
    ];
    if category == GarmentCategory::DressLongSleeve {
        specs.push(LandmarkSpec {
            name: "waist_left",
            part: GarmentPart::Body,
            uv: [0.3, 0.45],
        });
        specs.push(LandmarkSpec {
            name: "waist_right",
            part: GarmentPart::Body,
            uv: [0.7, 0.45],
        });
    }
    if category == GarmentCategory::TopsFrontOpen {
        specs.push(LandmarkSpec {
            name: "left_lapel",
            part: GarmentPart::Body,
            uv: [0.42, 1.0],
        });
        specs.push(LandmarkSpec {
            name: "right_lapel",
            part: GarmentPart::Body,
            uv: [0.58, 1.0],
        });
    }
    build_flat(&panels, resolution, chart, &specs, category)
}

fn no_sleeve_top(params: &ShapeParams, resolution: f64) -> Result<TriangleMesh> {
    let bw = dim(params, "body_width")?;
    let bl = dim(params, "body_length")?;
    let panels = [Panel {
        x0: -bw / 2.0,
        x1: bw / 2.0,
        y0: 0.0,
        y1: bl,
        part: GarmentPart::Body,
    }];
    let chart = move |_: GarmentPart, x: f64, y: f64| [(x + bw / 2.0) / bw, y / bl];
    let specs = [
        LandmarkSpec {
            name: "collar_center",
            part: GarmentPart::Body,
            uv: [0.5, 1.0],
        },
        LandmarkSpec {
            name: "bottom_center",
            part: GarmentPart::Body,
            uv: [0.5, 0.0],
        },
        LandmarkSpec {
            name: "left_shoulder",
            part: GarmentPart::Body,
            uv: [0.1, 1.0],
        },
        LandmarkSpec {
            name: "right_shoulder",
            part: GarmentPart::Body,
            uv: [0.9, 1.0],
        },
        LandmarkSpec {
            name: "left_bottom_corner",
            part: GarmentPart::Body,
            uv: [0.0, 0.0],
        },
        LandmarkSpec {
            name: "right_bottom_corner",
            part: GarmentPart::Body,
            uv: [1.0, 0.0],
        },
    ];
    build_flat(
        &panels,
        resolution,
        chart,
        &specs,
        GarmentCategory::TopsNoSleeve,
    )
}

fn trousers(params: &ShapeParams, resolution: f64) -> Result<TriangleMesh> {
    let ww = dim(params, "waist_width")?;
    let wh = dim(params, "waist_band_height")?;
    let ll = dim(params, "leg_length")?;
    let lw = dim(params, "leg_width")?;
    if 2.0 * lw >= ww {
        return Err(CoreError::InvalidArgument(
            "leg widths must leave a gap inside the waist width".into(),
        ));
    }
    let gap = ww - 2.0 * lw;
    // Waist band on top (y in [ll, ll+wh]); legs hang to y = 0.
    let panels = [
        Panel {
            x0: -ww / 2.0,
            x1: ww / 2.0,
            y0: ll,
            y1: ll + wh,
            part: GarmentPart::Body,
        },
        Panel {
            x0: -ww / 2.0,
            x1: -gap / 2.0,
            y0: 0.0,
            y1: ll,
            part: GarmentPart::LegLeft,
        },
        Panel {
            x0: gap / 2.0,
            x1: ww / 2.0,
            y0: 0.0,
            y1: ll,
            part: GarmentPart::LegRight,
        },
    ];
    let chart = move |part: GarmentPart, x: f64, y: f64| -> [f64; 2] {
        match part {
            GarmentPart::LegLeft => [0.45 * (x + ww / 2.0) / lw, 0.6 * y / ll],
            GarmentPart::LegRight => [0.55 + 0.45 * (x - gap / 2.0) / lw, 0.6 * y / ll],
            _ => [(x + ww / 2.0) / ww, 0.6 + 0.4 * (y - ll) / wh],
        }
    };
    let specs = [
        LandmarkSpec {
            name: "waist_left",
            part: GarmentPart::Body,
            uv: [0.0, 1.0],
        },
        LandmarkSpec {
            name: "waist_right",
            part: GarmentPart::Body,
            uv: [1.0, 1.0],
        },
        LandmarkSpec {
            name: "waist_center",
            part: GarmentPart::Body,
            uv: [0.5, 1.0],
        },
        LandmarkSpec {
            name: "left_leg_end",
            part: GarmentPart::LegLeft,
            uv: [0.225, 0.0],
        },
        LandmarkSpec {
            name: "right_leg_end",
            part: GarmentPart::LegRight,
            uv: [0.775, 0.0],
        },
    ];
    build_flat(&panels, resolution, chart, &specs, GarmentCategory::Trousers)
}

fn scarf(params: &ShapeParams, resolution: f64) -> Result<TriangleMesh> {
    let len = dim(params, "length")?;
    let width = dim(params, "width")?;
    let panels = [Panel {
        x0: -len / 2.0,
        x1: len / 2.0,
        y0: -width / 2.0,
        y1: width / 2.0,
        part: GarmentPart::Body,
    }];
    let chart =
        move |_: GarmentPart, x: f64, y: f64| [(x + len / 2.0) / len, (y + width / 2.0) / width];
    let specs = [
        LandmarkSpec {
            name: "left_end",
            part: GarmentPart::Body,
            uv: [0.0, 0.5],
        },
        LandmarkSpec {
            name: "right_end",
            part: GarmentPart::Body,
            uv: [1.0, 0.5],
        },
    ];
    build_flat(&panels, resolution, chart, &specs, GarmentCategory::Scarf)
}

/// Polar dome hat with a brim ring: full annulus for the bowl hat, a frontal
/// sector for the baseball cap. Front is the -y direction (u = 0.5).
fn hat(category: GarmentCategory, params: &ShapeParams, resolution: f64) -> Result<TriangleMesh> {
    let r = dim(params, "radius")?;
    let dome_h = dim(params, "dome_height")?;
    let brim = dim(params, "brim_length")?;
    if resolution > brim || resolution > r / 2.0 {
        return Err(CoreError::InvalidArgument(format!(
            "resolution {resolution} too coarse for hat features"
        )));
    }
    if dome_h > r {
        return Err(CoreError::InvalidArgument(
            "dome_height cannot exceed radius".into(),
        ));
    }
    let sectors = ((2.0 * std::f64::consts::PI * r / resolution).round() as usize).max(12);
    let sphere_r = (r * r + dome_h * dome_h) / (2.0 * dome_h);
    let theta_max = (r / sphere_r).asin();
    let dome_rings = ((sphere_r * theta_max / resolution).round() as usize).max(3);
    let brim_rings = ((brim / resolution).round() as usize).max(1);

    // Cap azimuthal window for the baseball brim: front 120 degrees.
    let in_brim_window = |s: usize| -> bool {
        match category {
            GarmentCategory::BowlHat => true,
            _ => {
                let u = (s as f64 + 0.5) / sectors as f64;
                (u - 0.5).abs() <= 1.0 / 6.0
            }
        }
    };

    let total_rings = dome_rings + brim_rings;
    let ring_pos = |t: usize, s: usize| -> Vec3 {
        let u = s as f64 / sectors as f64;
        let phi = 2.0 * std::f64::consts::PI * u + std::f64::consts::FRAC_PI_2;
        if t <= dome_rings {
            let theta = theta_max * t as f64 / dome_rings as f64;
            let radial = sphere_r * theta.sin();
            let z = (dome_h - sphere_r) + sphere_r * theta.cos();
            Vec3::new(radial * phi.cos(), radial * phi.sin(), z)
        } else {
            let radial = r + brim * (t - dome_rings) as f64 / brim_rings as f64;
            Vec3::new(radial * phi.cos(), radial * phi.sin(), 0.0)
        }
    };
    let ring_v = |t: usize| -> f64 {
        if t <= dome_rings {
            0.7 * t as f64 / dome_rings as f64
        } else {
            0.7 + 0.3 * (t - dome_rings) as f64 / brim_rings as f64
        }
    };

    let mut positions = vec![Vec3::new(0.0, 0.0, dome_h)];
    let mut uv = vec![[0.5, 0.0]];
    let mut ids: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut triangles = Vec::new();

    let vertex = |positions: &mut Vec<Vec3>,
                      uv: &mut Vec<[f64; 2]>,
                      ids: &mut BTreeMap<(usize, usize), usize>,
                      t: usize,
                      s: usize|
     -> usize {
        let s_mod = s % sectors;
        if let Some(&idx) = ids.get(&(t, s_mod)) {
            return idx;
        }
        let idx = positions.len();
        positions.push(ring_pos(t, s_mod));
        uv.push([s_mod as f64 / sectors as f64, ring_v(t)]);
        ids.insert((t, s_mod), idx);
        idx
    };

    for s in 0..sectors {
        // Pole fan.
        let a = vertex(&mut positions, &mut uv, &mut ids, 1, s);
        let b = vertex(&mut positions, &mut uv, &mut ids, 1, s + 1);
        triangles.push([0, a, b]);
    }
    for t in 1..total_rings {
        for s in 0..sectors {
            if t >= dome_rings && !in_brim_window(s) {
                continue;
            }
            let a = vertex(&mut positions, &mut uv, &mut ids, t, s);
            let b = vertex(&mut positions, &mut uv, &mut ids, t, s + 1);
            let c = vertex(&mut positions, &mut uv, &mut ids, t + 1, s);
            let d = vertex(&mut positions, &mut uv, &mut ids, t + 1, s + 1);
            triangles.push([a, b, d]);
            triangles.push([a, d, c]);
        }
    }

    let parts = vec![GarmentPart::Other; positions.len()];
    let mut landmarks = BTreeMap::new();
    landmarks.insert("crown".to_string(), 0usize);
    let nearest = |target: [f64; 2], uv: &[[f64; 2]]| -> usize {
        let mut best = (1usize, f64::INFINITY);
        for (idx, c) in uv.iter().enumerate().skip(1) {
            let d = (c[0] - target[0]).powi(2) + (c[1] - target[1]).powi(2);
            if d < best.1 {
                best = (idx, d);
            }
        }
        best.0
    };
    landmarks.insert("brim_front".to_string(), nearest([0.5, 1.0], &uv));
    if category == GarmentCategory::BowlHat {
        landmarks.insert("brim_left".to_string(), nearest([0.25, 1.0], &uv));
        landmarks.insert("brim_right".to_string(), nearest([0.75, 1.0], &uv));
    } else {
        landmarks.insert("side_left".to_string(), nearest([0.25, 0.7], &uv));
        landmarks.insert("side_right".to_string(), nearest([0.75, 0.7], &uv));
    }

    let mesh = TriangleMesh {
        positions,
        uv,
        triangles,
        landmarks,
        parts,
        category: Some(category),
        uv_generated: false,
    };
    mesh.validate()?;
    Ok(mesh)
}
