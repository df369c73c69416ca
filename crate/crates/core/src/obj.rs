//! Wavefront OBJ ingestion for external garment meshes: `v`, `vt`, and `f`
//! records, fan triangulation of polygons, and planar-projection uv when the
//! file carries none.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{CoreError, Result};
use crate::mesh::{GarmentPart, TriangleMesh};
use crate::Vec3;

/// Parse an OBJ file into a triangle mesh. Quads and larger polygons are
/// fan-triangulated. When the file has no `vt` records, uv is generated by
/// normalized planar projection onto the dominant plane and the mesh is
/// flagged `uv_generated`.
pub fn load_obj_mesh(path: &Path) -> Result<TriangleMesh> {
    let text = std::fs::read_to_string(path)?;
    parse_obj(&text)
}

pub fn parse_obj(text: &str) -> Result<TriangleMesh> {
    let mut positions: Vec<Vec3> = Vec::new();
    let mut uv_records: Vec<[f64; 2]> = Vec::new();
    // (vertex index, optional uv index) per face corner.
    let mut faces: Vec<Vec<(usize, Option<usize>)>> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut fields = content.split_whitespace();
        let tag = fields.next().unwrap();
        match tag {
            "v" => {
                let coords: Vec<f64> = fields
                    .map(|t| {
                        t.parse::<f64>().map_err(|_| CoreError::ObjParse {
                            line,
                            message: format!("bad vertex coordinate '{t}'"),
                        })
                    })
                    .collect::<Result<_>>()?;
                if coords.len() < 3 {
                    return Err(CoreError::ObjParse {
                        line,
                        message: format!("vertex needs 3 coordinates, got {}", coords.len()),
                    });
                }
                positions.push(Vec3::new(coords[0], coords[1], coords[2]));
            }
            "vt" => {
                let coords: Vec<f64> = fields
                    .map(|t| {
                        t.parse::<f64>().map_err(|_| CoreError::ObjParse {
                            line,
                            message: format!("bad texture coordinate '{t}'"),
                        })
                    })
                    .collect::<Result<_>>()?;
                if coords.len() < 2 {
                    return Err(CoreError::ObjParse {
                        line,
                        message: "vt needs 2 coordinates".into(),
                    });
                }
                uv_records.push([coords[0], coords[1]]);
            }
            "f" => {
                let mut corners = Vec::new();
                for token in fields {
                    let mut parts = token.split('/');
                    let v = parts.next().unwrap_or("");
                    let vi = parse_index(v, positions.len(), line)?;
                    let ti = match parts.next() {
                        Some("") | None => None,
                        Some(t) => Some(parse_index(t, uv_records.len(), line)?),
                    };
                    corners.push((vi, ti));
                }
                if corners.len() < 3 {
                    return Err(CoreError::ObjParse {
                        line,
                        message: format!("face needs at least 3 vertices, got {}", corners.len()),
                    });
                }
                faces.push(corners);
            }
            // Normals, groups, materials, smoothing: ignored.
            _ => {}
        }
    }

    if faces.is_empty() {
        return Err(CoreError::ObjParse {
            line: 0,
            message: "no faces in file".into(),
        });
    }

    let mut triangles = Vec::new();
    let mut vertex_uv: Vec<Option<[f64; 2]>> = vec![None; positions.len()];
    let mut any_uv = false;
    for corners in &faces {
        for &(vi, ti) in corners {
            if let Some(t) = ti {
                vertex_uv[vi] = Some(uv_records[t]);
                any_uv = true;
            }
        }
        for k in 1..corners.len() - 1 {
            triangles.push([corners[0].0, corners[k].0, corners[k + 1].0]);
        }
    }

    let (uv, uv_generated) = if any_uv {
        let uv = vertex_uv
            .iter()
            .map(|u| u.unwrap_or([0.0, 0.0]))
            .map(|[u, v]| [u.clamp(0.0, 1.0), v.clamp(0.0, 1.0)])
            .collect();
        (uv, false)
    } else {
        (planar_uv(&positions), true)
    };

    let mesh = TriangleMesh {
        parts: vec![GarmentPart::Other; positions.len()],
        positions,
        uv,
        triangles,
        landmarks: BTreeMap::new(),
        category: None,
        uv_generated,
    };
    mesh.validate()?;
    Ok(mesh)
}

fn parse_index(token: &str, len: usize, line: usize) -> Result<usize> {
    let idx: i64 = token.parse().map_err(|_| CoreError::ObjParse {
        line,
        message: format!("bad index '{token}'"),
    })?;
    let resolved = if idx > 0 {
        (idx - 1) as usize
    } else if idx < 0 {
        let back = (-idx) as usize;
        if back > len {
            return Err(CoreError::ObjParse {
                line,
                message: format!("relative index {idx} out of range"),
            });
        }
        len - back
    } else {
        return Err(CoreError::ObjParse {
            line,
            message: "index 0 is invalid".into(),
        });
    };
    if resolved >= len {
        return Err(CoreError::ObjParse {
            line,
            message: format!("index {idx} out of range (have {len})"),
        });
    }
    Ok(resolved)
}

/// Normalized projection onto the two axes with the largest extent.
fn planar_uv(positions: &[Vec3]) -> Vec<[f64; 2]> {
    let min = positions.iter().fold(
        Vec3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY),
        |m, p| m.inf(p),
    );
    let max = positions.iter().fold(
        Vec3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
        |m, p| m.sup(p),
    );
    let extent = max - min;
    // Drop the axis with the smallest extent.
    let drop_axis = if extent.x <= extent.y && extent.x <= extent.z {
        0
    } else if extent.y <= extent.z {
        1
    } else {
        2
    };
    let axes: [usize; 2] = match drop_axis {
        0 => [1, 2],
        1 => [0, 2],
        _ => [0, 1],
    };
    positions
        .iter()
        .map(|p| {
            let mut out = [0.0; 2];
            for (k, &axis) in axes.iter().enumerate() {
                let span = extent[axis];
                out[k] = if span > 1e-12 {
                    (p[axis] - min[axis]) / span
                } else {
                    0.5
                };
            }
            out
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const CUBE_QUADS: &str = "\
v -1 -1 -1
v 1 -1 -1
v 1 1 -1
v -1 1 -1
v -1 -1 1
v 1 -1 1
v 1 1 1
v -1 1 1
f 1 2 3 4
f 5 8 7 6
f 1 5 6 2
f 2 6 7 3
f 3 7 8 4
f 5 1 4 8
";

    #[test]
    fn cube_quads_triangulate_to_twelve() {
        let mesh = parse_obj(CUBE_QUADS).unwrap();
        assert_eq!(mesh.triangles.len(), 12);
        assert_eq!(mesh.vertex_count(), 8);
        assert!(mesh.uv_generated);
    }

    #[test]
    fn vt_records_preserved() {
        let text = "\
v 0 0 0
v 1 0 0
v 0 1 0
vt 0.25 0.75
vt 1 0
vt 0 1
f 1/1 2/2 3/3
";
        let mesh = parse_obj(text).unwrap();
        assert!(!mesh.uv_generated);
        assert_eq!(mesh.uv[0], [0.25, 0.75]);
        assert_eq!(mesh.uv[1], [1.0, 0.0]);
    }

    #[test]
    fn truncated_face_reports_line() {
        let text = "v 0 0 0\nv 1 0 0\nf 1 2\n";
        match parse_obj(text) {
            Err(CoreError::ObjParse { line: 3, .. }) => {}
            other => panic!("expected parse error at line 3, got {other:?}"),
        }
    }

    #[test]
    fn zero_faces_rejected() {
        assert!(parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\n").is_err());
    }

    #[test]
    fn out_of_range_index_reports_line() {
        let text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n";
        match parse_obj(text) {
            Err(CoreError::ObjParse { line: 4, .. }) => {}
            other => panic!("expected parse error at line 4, got {other:?}"),
        }
    }
}
