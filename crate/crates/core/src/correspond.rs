//! Dense point correspondence for grasp-point transfer: per-point feature
//! fields, maximum-dot-product matching from demo points to an operated
//! garment, affordance similarity maps, and point tracing through the
//! simulation's persistent particle identity.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::mesh::{GarmentCategory, GarmentPart};
use crate::pbd::ParticleCloth;
use crate::Vec3;

const FIELD_MAGIC: &[u8; 4] = b"DGFF";
const FIELD_VERSION: u32 = 1;

/// Where a feature field came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureProvider {
    /// Intrinsic uv/category/part features computed from the template chart.
    OracleUv,
    /// Loaded from a feature-field file produced by an external encoder.
    External,
}

/// N points with an L2-normalized D-dimensional descriptor per point.
#[derive(Debug, Clone)]
pub struct FeatureField {
    pub points: Vec<Vec3>,
    /// Row-major N x D, unit-norm rows.
    features: Vec<f64>,
    dim: usize,
    pub provider: FeatureProvider,
    pub garment_id: String,
}

impl FeatureField {
    pub fn new(
        points: Vec<Vec3>,
        features: Vec<f64>,
        dim: usize,
        provider: FeatureProvider,
        garment_id: String,
    ) -> Result<FeatureField> {
        if dim < 2 {
            return Err(CoreError::DimensionMismatch(format!(
                "feature dim must be >= 2, got {dim}"
            )));
        }
        if features.len() != points.len() * dim {
            return Err(CoreError::DimensionMismatch(format!(
                "feature matrix {} != {} points x {dim}",
                features.len(),
                points.len()
            )));
        }
        let mut field = FeatureField {
            points,
            features,
            dim,
            provider,
            garment_id,
        };
        field.normalize_rows()?;
        Ok(field)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn feature_row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    fn normalize_rows(&mut self) -> Result<()> {
        for i in 0..self.points.len() {
            let row = &mut self.features[i * self.dim..(i + 1) * self.dim];
            if row.iter().any(|v| !v.is_finite()) {
                return Err(CoreError::FieldFormat(format!(
                    "non-finite feature in row {i}"
                )));
            }
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < 1e-12 {
                return Err(CoreError::FieldFormat(format!("zero-norm feature row {i}")));
            }
            for v in row.iter_mut() {
                *v /= norm;
            }
        }
        Ok(())
    }
}

/// Matching result: per demo index, the argmax-similarity operated index.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrespondenceResult {
    pub demo_indices: Vec<usize>,
    pub matched_indices: Vec<usize>,
    pub similarity_scores: Vec<f64>,
}

/// Intrinsic feature of one particle: normalized
/// [u, v, category one-hot(8), part one-hot(6)], D = 16.
pub const ORACLE_FEATURE_DIM: usize = 2 + 8 + GarmentPart::COUNT;

fn oracle_feature(uv: [f64; 2], category: GarmentCategory, part: GarmentPart) -> [f64; ORACLE_FEATURE_DIM] {
    let mut f = [0.0; ORACLE_FEATURE_DIM];
    f[0] = uv[0];
    f[1] = uv[1];
    f[2 + category.index()] = 1.0;
    f[10 + part.index()] = 1.0;
    let norm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in &mut f {
        *v /= norm;
    }
    f
}

/// Build the oracle feature field for the given particle sample (normally a
/// 2048-point farthest-point sample). Features depend only on intrinsic
/// identity (uv, category, part), so they are invariant to any deformation
/// of the same garment.
pub fn oracle_feature_field(cloth: &ParticleCloth, sample: &[usize]) -> Result<FeatureField> {
    if cloth.rest_uv.is_empty() {
        return Err(CoreError::InvalidArgument(
            "cloth has no rest uv coordinates".into(),
        ));
    }
    let category = cloth.category.ok_or_else(|| {
        CoreError::InvalidArgument("cloth has no garment category".into())
    })?;
    let mut points = Vec::with_capacity(sample.len());
    let mut features = Vec::with_capacity(sample.len() * ORACLE_FEATURE_DIM);
    for &idx in sample {
        if idx >= cloth.particle_count() {
            return Err(CoreError::IndexOutOfRange {
                index: idx,
                len: cloth.particle_count(),
            });
        }
        points.push(cloth.positions[idx]);
        let f = oracle_feature(cloth.rest_uv[idx], category, cloth.parts[idx]);
        features.extend_from_slice(&f);
    }
    FeatureField::new(
        points,
        features,
        ORACLE_FEATURE_DIM,
        FeatureProvider::OracleUv,
        cloth.garment_id.clone(),
    )
}

/// Per-demo-point transfer: similarity = operated features . demo feature;
/// matched index = argmax (ties to the lowest index).
pub fn match_points(
    demo_field: &FeatureField,
    demo_indices: &[usize],
    operated_field: &FeatureField,
) -> Result<CorrespondenceResult> {
    if demo_field.dim() != operated_field.dim() {
        return Err(CoreError::DimensionMismatch(format!(
            "demo D={} vs operated D={}",
            demo_field.dim(),
            operated_field.dim()
        )));
    }
    let mut matched_indices = Vec::with_capacity(demo_indices.len());
    let mut similarity_scores = Vec::with_capacity(demo_indices.len());
    for &di in demo_indices {
        if di >= demo_field.len() {
            return Err(CoreError::IndexOutOfRange {
                index: di,
                len: demo_field.len(),
            });
        }
        let demo_feat = demo_field.feature_row(di);
        let mut best = 0usize;
        let mut best_score = f64::NEG_INFINITY;
        for oi in 0..operated_field.len() {
            let score = dot(operated_field.feature_row(oi), demo_feat);
            if score > best_score {
                best_score = score;
                best = oi;
            }
        }
        matched_indices.push(best);
        similarity_scores.push(best_score);
    }
    Ok(CorrespondenceResult {
        demo_indices: demo_indices.to_vec(),
        matched_indices,
        similarity_scores,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Affordance map against the left/right demo grasp features: cosine
/// similarities mapped to [0,1] by (x+1)/2, shape (N, 2).
pub fn affordance_similarity(
    operated_field: &FeatureField,
    demo_left_feature: &[f64],
    demo_right_feature: &[f64],
) -> Result<Vec<[f64; 2]>> {
    if demo_left_feature.len() != operated_field.dim()
        || demo_right_feature.len() != operated_field.dim()
    {
        return Err(CoreError::DimensionMismatch(
            "demo feature dim does not match field".into(),
        ));
    }
    Ok((0..operated_field.len())
        .map(|i| {
            let row = operated_field.feature_row(i);
            [
                (dot(row, demo_left_feature) + 1.0) / 2.0,
                (dot(row, demo_right_feature) + 1.0) / 2.0,
            ]
        })
        .collect())
}

/// Current world positions of the given particles; correspondence through
/// simulation is exact because particle identity is persistent.
pub fn trace_points(cloth: &ParticleCloth, particle_indices: &[usize]) -> Result<Vec<Vec3>> {
    particle_indices
        .iter()
        .map(|&idx| {
            if idx >= cloth.particle_count() {
                Err(CoreError::IndexOutOfRange {
                    index: idx,
                    len: cloth.particle_count(),
                })
            } else {
                Ok(cloth.positions[idx])
            }
        })
        .collect()
}

/// Write a feature field: magic "DGFF", version u32, N u32, D u32, then
/// N x 3 f32 points and N x D f32 features, all little-endian row-major.
pub fn save_feature_field(field: &FeatureField, path: &Path) -> Result<()> {
    let mut out: Vec<u8> = Vec::new();
    out.extend_from_slice(FIELD_MAGIC);
    out.extend_from_slice(&FIELD_VERSION.to_le_bytes());
    out.extend_from_slice(&(field.len() as u32).to_le_bytes());
    out.extend_from_slice(&(field.dim() as u32).to_le_bytes());
    for p in &field.points {
        for c in [p.x, p.y, p.z] {
            out.extend_from_slice(&(c as f32).to_le_bytes());
        }
    }
    for v in &field.features {
        out.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(&out)?;
    Ok(())
}

/// Load a feature field written by `save_feature_field` (or an external
/// encoder following the same layout); rows are re-normalized and NaN is
/// rejected.
pub fn load_feature_field(path: &Path) -> Result<FeatureField> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    let mut cursor = 0usize;
    let take = |cursor: &mut usize, n: usize| -> Result<&[u8]> {
        if *cursor + n > bytes.len() {
            return Err(CoreError::FieldFormat(format!(
                "truncated file: wanted {} bytes at offset {}, have {}",
                n,
                cursor,
                bytes.len()
            )));
        }
        let s = &bytes[*cursor..*cursor + n];
        *cursor += n;
        Ok(s)
    };
    let magic = take(&mut cursor, 4)?;
    if magic != FIELD_MAGIC {
        return Err(CoreError::FieldFormat(format!(
            "bad magic {:?}, expected {:?}",
            magic, FIELD_MAGIC
        )));
    }
    let read_u32 = |cursor: &mut usize| -> Result<u32> {
        let b = take(cursor, 4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    };
    let version = read_u32(&mut cursor)?;
    if version != FIELD_VERSION {
        return Err(CoreError::FieldFormat(format!(
            "unsupported version {version}"
        )));
    }
    let n = read_u32(&mut cursor)? as usize;
    let d = read_u32(&mut cursor)? as usize;
    let expected = 16 + n * 3 * 4 + n * d * 4;
    if bytes.len() != expected {
        return Err(CoreError::FieldFormat(format!(
            "size mismatch: file has {} bytes, N={n} D={d} needs {expected}",
            bytes.len()
        )));
    }
    let read_f32 = |cursor: &mut usize| -> f32 {
        let b = &bytes[*cursor..*cursor + 4];
        *cursor += 4;
        f32::from_le_bytes([b[0], b[1], b[2], b[3]])
    };
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let x = read_f32(&mut cursor) as f64;
        let y = read_f32(&mut cursor) as f64;
        let z = read_f32(&mut cursor) as f64;
        points.push(Vec3::new(x, y, z));
    }
    let mut features = Vec::with_capacity(n * d);
    for _ in 0..n * d {
        features.push(read_f32(&mut cursor) as f64);
    }
    FeatureField::new(points, features, d, FeatureProvider::External, String::new())
}
