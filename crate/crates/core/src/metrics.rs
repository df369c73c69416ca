//! Per-task success evaluation: top-down orthographic coverage rasterization
//! plus the fold/fling/hang/store/wear rules with their published thresholds.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::mesh::GarmentCategory;
use crate::pbd::ParticleCloth;
use crate::scene::{BodyKind, SceneBody};
use crate::Vec3;

/// Occupancy grid from projecting the cloth onto the ground plane.
#[derive(Debug, Clone)]
pub struct CoverageGrid {
    /// World xy of the (0,0) cell corner, snapped to the cell lattice.
    pub origin: [f64; 2],
    pub cell_size: f64,
    pub width: usize,
    pub height: usize,
    pub occupancy: Vec<bool>,
}

impl CoverageGrid {
    pub fn occupied_cells(&self) -> usize {
        self.occupancy.iter().filter(|o| **o).count()
    }

    pub fn occupied_area(&self) -> f64 {
        self.occupied_cells() as f64 * self.cell_size * self.cell_size
    }

    pub fn is_occupied(&self, ix: usize, iy: usize) -> bool {
        self.occupancy[iy * self.width + ix]
    }

    /// World xy of a cell center.
    pub fn cell_center(&self, ix: usize, iy: usize) -> [f64; 2] {
        [
            self.origin[0] + (ix as f64 + 0.5) * self.cell_size,
            self.origin[1] + (iy as f64 + 0.5) * self.cell_size,
        ]
    }

    /// Occupied area restricted to an axis-aligned xy rectangle.
    pub fn occupied_area_in_rect(&self, min: [f64; 2], max: [f64; 2]) -> f64 {
        let mut count = 0usize;
        for iy in 0..self.height {
            for ix in 0..self.width {
                if !self.is_occupied(ix, iy) {
                    continue;
                }
                let c = self.cell_center(ix, iy);
                if c[0] >= min[0] && c[0] <= max[0] && c[1] >= min[1] && c[1] <= max[1] {
                    count += 1;
                }
            }
        }
        count as f64 * self.cell_size * self.cell_size
    }

    /// Dump as a PGM image for offline audit.
    pub fn to_pgm(&self) -> String {
        let mut s = format!("P2\n{} {}\n255\n", self.width, self.height);
        for iy in (0..self.height).rev() {
            let row: Vec<&str> = (0..self.width)
                .map(|ix| if self.is_occupied(ix, iy) { "0" } else { "255" })
                .collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }
}

/// Project every triangle to z = 0 and mark cells whose center lies inside
/// some projected triangle. The origin snaps to the cell lattice so the
/// occupied set is translation-equivariant for lattice shifts.
pub fn rasterize_topdown(cloth: &ParticleCloth, cell_size: f64) -> Result<CoverageGrid> {
    if !(cell_size > 0.0) {
        return Err(CoreError::InvalidArgument("cell_size must be > 0".into()));
    }
    let (mut min_x, mut min_y) = (f64::INFINITY, f64::INFINITY);
    let (mut max_x, mut max_y) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in &cloth.positions {
        min_x = min_x.min(p.x);
        min_y = min_y.min(p.y);
        max_x = max_x.max(p.x);
        max_y = max_y.max(p.y);
    }
    if !min_x.is_finite() {
        return Err(CoreError::InvalidArgument("cloth has no particles".into()));
    }
    let origin = [
        (min_x / cell_size).floor() * cell_size - cell_size,
        (min_y / cell_size).floor() * cell_size - cell_size,
    ];
    let width = (((max_x - origin[0]) / cell_size).ceil() as usize + 2).max(1);
    let height = (((max_y - origin[1]) / cell_size).ceil() as usize + 2).max(1);
    let mut occupancy = vec![false; width * height];

    for tri in &cloth.triangles {
        let a = cloth.positions[tri[0]];
        let b = cloth.positions[tri[1]];
        let c = cloth.positions[tri[2]];
        let (tmin_x, tmax_x) = (a.x.min(b.x).min(c.x), a.x.max(b.x).max(c.x));
        let (tmin_y, tmax_y) = (a.y.min(b.y).min(c.y), a.y.max(b.y).max(c.y));
        let ix0 = (((tmin_x - origin[0]) / cell_size).floor() as isize).max(0) as usize;
        let iy0 = (((tmin_y - origin[1]) / cell_size).floor() as isize).max(0) as usize;
        let ix1 = ((((tmax_x - origin[0]) / cell_size).ceil() as isize) as usize).min(width - 1);
        let iy1 = ((((tmax_y - origin[1]) / cell_size).ceil() as isize) as usize).min(height - 1);
        for iy in iy0..=iy1 {
            for ix in ix0..=ix1 {
                if occupancy[iy * width + ix] {
                    continue;
                }
                let cx = origin[0] + (ix as f64 + 0.5) * cell_size;
                let cy = origin[1] + (iy as f64 + 0.5) * cell_size;
                if point_in_triangle_xy(cx, cy, a, b, c) {
                    occupancy[iy * width + ix] = true;
                }
            }
        }
    }

    Ok(CoverageGrid {
        origin,
        cell_size,
        width,
        height,
        occupancy,
    })
}

/// Inclusive point-in-triangle test on the xy projection.
pub fn point_in_triangle_xy(px: f64, py: f64, a: Vec3, b: Vec3, c: Vec3) -> bool {
    let sign = |x1: f64, y1: f64, x2: f64, y2: f64| -> f64 {
        (px - x2) * (y1 - y2) - (x1 - x2) * (py - y2)
    };
    let d1 = sign(a.x, a.y, b.x, b.y);
    let d2 = sign(b.x, b.y, c.x, c.y);
    let d3 = sign(c.x, c.y, a.x, a.y);
    let has_neg = d1 < 0.0 || d2 < 0.0 || d3 < 0.0;
    let has_pos = d1 > 0.0 || d2 > 0.0 || d3 > 0.0;
    !(has_neg && has_pos)
}

/// Success report for one episode; thresholds are echoed so every report is
/// auditable on its own.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SuccessReport {
    pub task_id: String,
    pub success: bool,
    pub measured: BTreeMap<String, f64>,
    pub thresholds: BTreeMap<String, f64>,
}

impl SuccessReport {
    fn new(task_id: &str) -> SuccessReport {
        SuccessReport {
            task_id: task_id.to_string(),
            success: false,
            measured: BTreeMap::new(),
            thresholds: BTreeMap::new(),
        }
    }
}

/// Raster cell size used by the area metrics.
pub const METRIC_CELL_SIZE: f64 = 0.01;

/// Landmarks captured on the initial flat state, projected to xy, that the
/// fold rectangle is built from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FoldLandmarks {
    pub left_sleeve: Vec3,
    pub right_sleeve: Vec3,
    pub collar: Vec3,
    pub bottom: Vec3,
    /// Trousers variant: waist left/right plus one leg end.
    pub is_trousers: bool,
}

impl FoldLandmarks {
    /// Capture from a flat cloth's landmark table.
    pub fn capture(cloth: &ParticleCloth, category: GarmentCategory) -> Result<FoldLandmarks> {
        match category {
            GarmentCategory::Trousers => Ok(FoldLandmarks {
                left_sleeve: cloth.landmark_position("waist_left")?,
                right_sleeve: cloth.landmark_position("waist_right")?,
                collar: cloth.landmark_position("waist_center")?,
                bottom: cloth.landmark_position("left_leg_end")?,
                is_trousers: true,
            }),
            _ => Ok(FoldLandmarks {
                left_sleeve: cloth.landmark_position("left_shoulder")?,
                right_sleeve: cloth.landmark_position("right_shoulder")?,
                collar: cloth.landmark_position("collar_center")?,
                bottom: cloth.landmark_position("bottom_center")?,
                is_trousers: false,
            }),
        }
    }

    /// Axis-aligned target rectangle: side bounds from the left/right points,
    /// long-axis bounds from the collar (waist) and the garment center.
    pub fn rectangle(&self) -> ([f64; 2], [f64; 2]) {
        if self.is_trousers {
            // Trousers lie along an axis from waist to leg end; folded twice,
            // the bundle occupies the waist-side half of one leg side.
            let waist_mid = (self.left_sleeve + self.right_sleeve) / 2.0;
            let long = self.bottom - waist_mid;
            // Dominant axis of the legs.
            if long.x.abs() >= long.y.abs() {
                let x0 = waist_mid.x;
                let x1 = waist_mid.x + long.x / 2.0;
                let (ymin, ymax) = ordered(self.left_sleeve.y, self.right_sleeve.y);
                (
                    [x0.min(x1), ymin],
                    [x0.max(x1), ymax],
                )
            } else {
                let y0 = waist_mid.y;
                let y1 = waist_mid.y + long.y / 2.0;
                let (xmin, xmax) = ordered(self.left_sleeve.x, self.right_sleeve.x);
                (
                    [xmin, y0.min(y1)],
                    [xmax, y0.max(y1)],
                )
            }
        } else {
            let center_y = (self.collar.y + self.bottom.y) / 2.0;
            let (xmin, xmax) = ordered(self.left_sleeve.x, self.right_sleeve.x);
            let (ymin, ymax) = ordered(center_y, self.collar.y);
            ([xmin, ymin], [xmax, ymax])
        }
    }
}

fn ordered(a: f64, b: f64) -> (f64, f64) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Fold success: the fraction of occupied area inside the landmark rectangle
/// must exceed the per-category coverage threshold (0.85 tops/trousers,
/// 0.80 dress).
pub fn fold_success(
    cloth: &ParticleCloth,
    landmarks: &FoldLandmarks,
    category: GarmentCategory,
) -> Result<SuccessReport> {
    let threshold = match category {
        GarmentCategory::DressLongSleeve => 0.80,
        _ => 0.85,
    };
    let grid = rasterize_topdown(cloth, METRIC_CELL_SIZE)?;
    let total = grid.occupied_area();
    let (rmin, rmax) = landmarks.rectangle();
    let inside = grid.occupied_area_in_rect(rmin, rmax);
    let fraction = if total > 0.0 { inside / total } else { 0.0 };

    let mut report = SuccessReport::new(&format!("fold_{}", short_category(category)));
    report.measured.insert("coverage_fraction".into(), fraction);
    report.measured.insert("occupied_area".into(), total);
    report.measured.insert("area_in_rectangle".into(), inside);
    report.thresholds.insert("coverage".into(), threshold);
    report.success = fraction > threshold;
    Ok(report)
}

fn short_category(category: GarmentCategory) -> &'static str {
    match category {
        GarmentCategory::DressLongSleeve => "dress",
        GarmentCategory::Trousers => "trousers",
        _ => "tops",
    }
}

/// Reference quantities of the settled flat rest state used by the fling
/// metric: projected area and the bounding square side.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RestReference {
    pub area: f64,
    pub bbox_side: f64,
}

impl RestReference {
    pub fn capture(cloth: &ParticleCloth) -> Result<RestReference> {
        let grid = rasterize_topdown(cloth, METRIC_CELL_SIZE)?;
        Ok(RestReference {
            area: grid.occupied_area(),
            bbox_side: bbox_side(cloth),
        })
    }
}

fn bbox_side(cloth: &ParticleCloth) -> f64 {
    let (mut min_x, mut min_y) = (f64::INFINITY, f64::INFINITY);
    let (mut max_x, mut max_y) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in &cloth.positions {
        min_x = min_x.min(p.x);
        min_y = min_y.min(p.y);
        max_x = max_x.max(p.x);
        max_y = max_y.max(p.y);
    }
    (max_x - min_x).max(max_y - min_y)
}

/// Fling success: both the final and the rest-state projected areas are
/// normalized by a shared framing square (the larger bounding square of the
/// two states, padded 10%); success iff the proportions differ by < 0.2.
pub fn fling_success(cloth: &ParticleCloth, reference: &RestReference) -> Result<SuccessReport> {
    if !(reference.area > 0.0) {
        return Err(CoreError::InvalidArgument(
            "rest reference area must be > 0".into(),
        ));
    }
    let grid = rasterize_topdown(cloth, METRIC_CELL_SIZE)?;
    let final_area = grid.occupied_area();
    let frame_side = 1.1 * bbox_side(cloth).max(reference.bbox_side);
    let frame_area = frame_side * frame_side;
    let p_final = final_area / frame_area;
    let p_ref = reference.area / frame_area;
    let diff = (p_final - p_ref).abs();

    let mut report = SuccessReport::new("fling");
    report.measured.insert("final_area".into(), final_area);
    report.measured.insert("reference_area".into(), reference.area);
    report.measured.insert("final_proportion".into(), p_final);
    report.measured.insert("reference_proportion".into(), p_ref);
    report.measured.insert("proportion_difference".into(), diff);
    report.thresholds.insert("proportion_difference".into(), 0.2);
    report.success = diff < 0.2;
    Ok(report)
}

/// Which hang rule applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HangVariant {
    /// Coat on a pothook: garment centroid z in (0.5, 2.0).
    Coat,
    /// Garment on a hanger: all points above a minimum height and centroid
    /// near the hanger center.
    Generic,
}

/// Decided bounds for the generic hang rule (the published description
/// leaves the exact height unquantified).
pub const HANG_MIN_HEIGHT: f64 = 0.2;
pub const HANG_MAX_CENTER_DIST: f64 = 0.3;

pub fn hang_success(
    cloth: &ParticleCloth,
    asset: &SceneBody,
    variant: HangVariant,
) -> Result<SuccessReport> {
    let centroid = cloth.centroid();
    match variant {
        HangVariant::Coat => {
            if asset.kind != BodyKind::Pothook {
                return Err(CoreError::MetricAssetMismatch(format!(
                    "coat hang needs a pothook, got {:?}",
                    asset.kind
                )));
            }
            let mut report = SuccessReport::new("hang_coat");
            report.measured.insert("centroid_z".into(), centroid.z);
            report.thresholds.insert("z_min".into(), 0.5);
            report.thresholds.insert("z_max".into(), 2.0);
            report.success = centroid.z > 0.5 && centroid.z < 2.0;
            Ok(report)
        }
        HangVariant::Generic => {
            if asset.kind != BodyKind::Hanger {
                return Err(CoreError::MetricAssetMismatch(format!(
                    "generic hang needs a hanger, got {:?}",
                    asset.kind
                )));
            }
            let hanger_center = asset.world_named_point("hanger_center")?;
            let min_z = cloth
                .positions
                .iter()
                .map(|p| p.z)
                .fold(f64::INFINITY, f64::min);
            let xy_dist = ((centroid.x - hanger_center.x).powi(2)
                + (centroid.y - hanger_center.y).powi(2))
            .sqrt();
            let mut report = SuccessReport::new("hang");
            report.measured.insert("min_z".into(), min_z);
            report.measured.insert("center_distance_xy".into(), xy_dist);
            report.thresholds.insert("min_height".into(), HANG_MIN_HEIGHT);
            report
                .thresholds
                .insert("max_center_distance".into(), HANG_MAX_CENTER_DIST);
            report.success = min_z > HANG_MIN_HEIGHT && xy_dist < HANG_MAX_CENTER_DIST;
            Ok(report)
        }
    }
}

/// Store success: garment centroid within 0.1 m of the platform center.
pub fn store_success(cloth: &ParticleCloth, platform: &SceneBody) -> Result<SuccessReport> {
    let center = platform.world_named_point("platform_center")?;
    let dist = (cloth.centroid() - center).norm();
    let mut report = SuccessReport::new("store_tops");
    report.measured.insert("center_distance".into(), dist);
    report.thresholds.insert("max_center_distance".into(), 0.1);
    report.success = dist < 0.1;
    Ok(report)
}

/// Which wear rule applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WearVariant {
    Cap,
    BowlHat,
    Scarf,
}

/// Decided threshold for cap/hat placement distance to the head top.
pub const WEAR_CAP_MAX_DIST: f64 = 0.1;
/// Scarf drooping rule constants.
pub const SCARF_HEIGHT_THRESHOLD: f64 = 0.2;
pub const SCARF_COUNT_THRESHOLD: usize = 20;

pub fn wear_success(
    cloth: &ParticleCloth,
    mannequin: &SceneBody,
    variant: WearVariant,
) -> Result<SuccessReport> {
    if mannequin.kind != BodyKind::Mannequin {
        return Err(CoreError::MetricAssetMismatch(format!(
            "wear metrics need a mannequin, got {:?}",
            mannequin.kind
        )));
    }
    match variant {
        WearVariant::Cap | WearVariant::BowlHat => {
            let head_top = mannequin.world_named_point("head_top")?;
            let dist = (cloth.centroid() - head_top).norm();
            let mut report = SuccessReport::new(if variant == WearVariant::Cap {
                "wear_baseball_cap"
            } else {
                "wear_bowl_hat"
            });
            report.measured.insert("head_distance".into(), dist);
            report
                .thresholds
                .insert("max_head_distance".into(), WEAR_CAP_MAX_DIST);
            report.success = dist < WEAR_CAP_MAX_DIST;
            Ok(report)
        }
        WearVariant::Scarf => {
            // Partition scarf particles into front/rear half-spaces by the
            // mannequin's facing axis; drooping means both partitions have
            // more than 20 points below 0.2 m.
            let neck = mannequin.world_named_point("neck_center")?;
            let facing = mannequin.facing_axis();
            let mut front_low = 0usize;
            let mut rear_low = 0usize;
            for p in &cloth.positions {
                if p.z >= SCARF_HEIGHT_THRESHOLD {
                    continue;
                }
                let side = (p - neck).dot(&facing);
                if side >= 0.0 {
                    front_low += 1;
                } else {
                    rear_low += 1;
                }
            }
            let mut report = SuccessReport::new("wear_scarf");
            report.measured.insert("front_low_count".into(), front_low as f64);
            report.measured.insert("rear_low_count".into(), rear_low as f64);
            report
                .thresholds
                .insert("height".into(), SCARF_HEIGHT_THRESHOLD);
            report
                .thresholds
                .insert("count".into(), SCARF_COUNT_THRESHOLD as f64);
            let drooping =
                front_low > SCARF_COUNT_THRESHOLD && rear_low > SCARF_COUNT_THRESHOLD;
            report.success = !drooping;
            Ok(report)
        }
    }
}
