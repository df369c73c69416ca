//! Point-cloud utilities: canonical-space normalization and farthest point
//! sampling down to fixed-size clouds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::Vec3;

/// Translation/scale normalizer: subtract the centroid, divide by the
/// bounding radius. Rotation is deliberately left in place; orientation is
/// treated as part of the deformation state.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CanonicalTransform {
    pub centroid: Vec3,
    /// Bounding radius of the original cloud; divide by this to normalize.
    pub scale: f64,
}

impl CanonicalTransform {
    pub fn apply(&self, p: Vec3) -> Vec3 {
        (p - self.centroid) / self.scale
    }

    pub fn invert(&self, p: Vec3) -> Vec3 {
        p * self.scale + self.centroid
    }
}

/// Normalize a cloud to centroid zero and unit bounding radius.
pub fn canonicalize(points: &[Vec3]) -> Result<(Vec<Vec3>, CanonicalTransform)> {
    if points.len() < 2 {
        return Err(CoreError::DegenerateCloud(format!(
            "need at least 2 points, got {}",
            points.len()
        )));
    }
    let centroid = points.iter().sum::<Vec3>() / points.len() as f64;
    let radius = points
        .iter()
        .map(|p| (p - centroid).norm())
        .fold(0.0, f64::max);
    if radius < 1e-12 {
        return Err(CoreError::DegenerateCloud(
            "all points are identical".into(),
        ));
    }
    let transform = CanonicalTransform {
        centroid,
        scale: radius,
    };
    let out = points.iter().map(|p| transform.apply(*p)).collect();
    Ok((out, transform))
}

/// Farthest point sampling: greedy max-min selection starting from a seeded
/// random index. When the cloud has fewer points than requested, every index
/// appears once and the selection order is cycled to pad the tail.
/// Deterministic for a fixed seed.
pub fn farthest_point_downsample(points: &[Vec3], n: usize, seed: u64) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(CoreError::InvalidArgument("sample count must be > 0".into()));
    }
    if points.is_empty() {
        return Err(CoreError::DegenerateCloud("empty point cloud".into()));
    }
    let count = points.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = rng.gen_range(0..count);

    let take = n.min(count);
    let mut selected = Vec::with_capacity(n);
    let mut min_dist = vec![f64::INFINITY; count];
    selected.push(first);
    for (i, d) in min_dist.iter_mut().enumerate() {
        *d = (points[i] - points[first]).norm_squared();
    }
    while selected.len() < take {
        // Argmax of distance-to-selected; ties break to the lowest index.
        let mut best = 0usize;
        let mut best_d = -1.0;
        for (i, &d) in min_dist.iter().enumerate() {
            if d > best_d {
                best_d = d;
                best = i;
            }
        }
        selected.push(best);
        for (i, d) in min_dist.iter_mut().enumerate() {
            let nd = (points[i] - points[best]).norm_squared();
            if nd < *d {
                *d = nd;
            }
        }
    }
    // Pad deterministically by cycling the selection order.
    let mut i = 0usize;
    while selected.len() < n {
        selected.push(selected[i % take]);
        i += 1;
    }
    Ok(selected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;

    #[test]
    fn two_point_normalization() {
        let pts = vec![Vec3::new(1.0, 1.0, 1.0), Vec3::new(3.0, 1.0, 1.0)];
        let (out, t) = canonicalize(&pts).unwrap();
        assert_relative_eq!(out[0].x, -1.0, epsilon = 1e-12);
        assert_relative_eq!(out[1].x, 1.0, epsilon = 1e-12);
        assert_relative_eq!(t.centroid.x, 2.0, epsilon = 1e-12);
        assert_relative_eq!(t.scale, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn already_canonical_is_identity() {
        let pts = vec![Vec3::new(-1.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0)];
        let (out, t) = canonicalize(&pts).unwrap();
        assert_relative_eq!(t.scale, 1.0, epsilon = 1e-12);
        assert!(t.centroid.norm() < 1e-12);
        assert!((out[0] - pts[0]).norm() < 1e-12);
    }

    #[test]
    fn degenerate_cloud_rejected() {
        assert!(canonicalize(&[Vec3::zeros()]).is_err());
        assert!(canonicalize(&[Vec3::new(1.0, 2.0, 3.0); 5]).is_err());
    }

    #[test]
    fn scale_translation_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let pts: Vec<Vec3> = (0..64)
                .map(|_| Vec3::new(rng.gen(), rng.gen(), rng.gen()))
                .collect();
            let s: f64 = rng.gen::<f64>() * 10.0 + 0.1;
            let t = Vec3::new(rng.gen(), rng.gen(), rng.gen()) * 4.0;
            let moved: Vec<Vec3> = pts.iter().map(|p| p * s + t).collect();
            let (a, _) = canonicalize(&pts).unwrap();
            let (b, _) = canonicalize(&moved).unwrap();
            for (pa, pb) in a.iter().zip(&b) {
                assert!((pa - pb).norm() < 1e-7);
            }
        }
    }

    #[test]
    fn canonicalize_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..1000 {
            let pts: Vec<Vec3> = (0..16)
                .map(|_| Vec3::new(rng.gen(), rng.gen(), rng.gen()) * 3.0)
                .collect();
            let (canon, t) = canonicalize(&pts).unwrap();
            for (orig, c) in pts.iter().zip(&canon) {
                assert!((t.invert(*c) - orig).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn fps_square_picks_diagonal() {
        let pts = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(1.0, 1.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
        ];
        for seed in 0..8 {
            let idx = farthest_point_downsample(&pts, 2, seed).unwrap();
            let d = (pts[idx[0]] - pts[idx[1]]).norm();
            assert_relative_eq!(d, 2.0f64.sqrt(), epsilon = 1e-12);
        }
    }

    #[test]
    fn fps_full_size_is_permutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pts: Vec<Vec3> = (0..2048)
            .map(|_| Vec3::new(rng.gen(), rng.gen(), rng.gen()))
            .collect();
        let idx = farthest_point_downsample(&pts, 2048, 77).unwrap();
        let mut sorted = idx.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 2048);
    }

    #[test]
    fn fps_pads_small_clouds() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<Vec3> = (0..1000)
            .map(|_| Vec3::new(rng.gen(), rng.gen(), rng.gen()))
            .collect();
        let idx = farthest_point_downsample(&pts, 2048, 4).unwrap();
        assert_eq!(idx.len(), 2048);
        let mut seen = vec![false; 1000];
        for &i in &idx {
            seen[i] = true;
        }
        assert!(seen.iter().all(|s| *s), "every original index present");
    }

    #[test]
    fn fps_zero_count_rejected() {
        let pts = vec![Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0)];
        assert!(farthest_point_downsample(&pts, 0, 0).is_err());
    }

    #[test]
    fn fps_deterministic_and_dominates_random_subsets() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let pts: Vec<Vec3> = (0..10_000)
            .map(|_| Vec3::new(rng.gen(), rng.gen(), rng.gen()))
            .collect();
        let a = farthest_point_downsample(&pts, 64, 21).unwrap();
        let b = farthest_point_downsample(&pts, 64, 21).unwrap();
        assert_eq!(a, b);

        let min_pairwise = |idx: &[usize]| -> f64 {
            let mut best = f64::INFINITY;
            for x in 0..idx.len() {
                for y in x + 1..idx.len() {
                    best = best.min((pts[idx[x]] - pts[idx[y]]).norm());
                }
            }
            best
        };
        let fps_min = min_pairwise(&a);
        for trial in 0..100 {
            let mut r = ChaCha8Rng::seed_from_u64(1000 + trial);
            let subset: Vec<usize> = (0..64).map(|_| r.gen_range(0..pts.len())).collect();
            assert!(fps_min >= min_pairwise(&subset));
        }
    }
}
