//! Point-set assembly, sub-volume extraction, sampling and grouping.

use crate::backproject::VertexFeatureStore;
use crate::error::{Error, Result};
use crate::geometry::Mesh;
use crate::math::{Mat3, Vec3};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// A set of points with per-point feature channels.
///
/// `features` is row-major m x dim. When `has_normal_channels` is set the
/// first three channels are a unit normal and rotate with the positions;
/// any remaining channels (back-projected image features) are
/// rotation-invariant payload.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    pub positions: Vec<Vec3>,
    pub features: Vec<f64>,
    pub feature_dim: usize,
    pub has_normal_channels: bool,
    pub labels: Option<Vec<u16>>,
    /// Original vertex ids in the source mesh.
    pub source_indices: Vec<u32>,
}

impl PointSet {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn feature_row(&self, i: usize) -> &[f64] {
        &self.features[i * self.feature_dim..(i + 1) * self.feature_dim]
    }

    /// Select a subset of points by index (with repetition allowed).
    pub fn gather(&self, indices: &[usize]) -> PointSet {
        let mut features = Vec::with_capacity(indices.len() * self.feature_dim);
        for &i in indices {
            features.extend_from_slice(self.feature_row(i));
        }
        PointSet {
            positions: indices.iter().map(|&i| self.positions[i]).collect(),
            features,
            feature_dim: self.feature_dim,
            has_normal_channels: self.has_normal_channels,
            labels: self
                .labels
                .as_ref()
                .map(|ls| indices.iter().map(|&i| ls[i]).collect()),
            source_indices: indices.iter().map(|&i| self.source_indices[i]).collect(),
        }
    }
}

/// Which per-point channels to assemble from a mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureSelection {
    pub normals: bool,
    pub image_features: bool,
}

impl FeatureSelection {
    pub const XYZ: FeatureSelection = FeatureSelection { normals: false, image_features: false };
    pub const XYZ_N: FeatureSelection = FeatureSelection { normals: true, image_features: false };
    pub const XYZ_N_D: FeatureSelection = FeatureSelection { normals: true, image_features: true };
}

/// Build the scene point set from mesh vertices: positions plus the chosen
/// feature channels (normals first, then back-projected image features).
pub fn assemble_points(
    mesh: &Mesh,
    store: Option<&VertexFeatureStore>,
    selection: FeatureSelection,
) -> Result<PointSet> {
    let n = mesh.vertex_count();
    if let Some(s) = store {
        if s.n != n {
            return Err(Error::ShapeMismatch(format!(
                "feature store rows {} != vertex count {n}",
                s.n
            )));
        }
    }
    let image_dim = if selection.image_features {
        store
            .ok_or_else(|| Error::ShapeMismatch("image features requested but no store".into()))?
            .dim
    } else {
        0
    };
    let normal_dim = if selection.normals { 3 } else { 0 };
    let dim = normal_dim + image_dim;
    let normals = selection.normals.then(|| mesh.normals_or_computed());

    let mut features = Vec::with_capacity(n * dim);
    for v in 0..n {
        if let Some(ns) = &normals {
            let nv = ns[v];
            features.extend_from_slice(&[nv.x, nv.y, nv.z]);
        }
        if selection.image_features {
            features.extend(store.unwrap().row(v).iter().map(|&x| x as f64));
        }
    }
    Ok(PointSet {
        positions: mesh.vertices.clone(),
        features,
        feature_dim: dim,
        has_normal_channels: selection.normals,
        labels: mesh.labels.clone(),
        source_indices: (0..n as u32).collect(),
    })
}

/// A vertical column of the scene: full height, bounded footprint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubVolumeSpec {
    pub center_x: f64,
    pub center_y: f64,
    pub width: f64,
    pub depth: f64,
}

impl SubVolumeSpec {
    pub fn new(center_x: f64, center_y: f64, width: f64, depth: f64) -> Self {
        SubVolumeSpec { center_x, center_y, width, depth }
    }

    #[inline]
    pub fn contains(&self, p: Vec3) -> bool {
        (p.x - self.center_x).abs() <= self.width * 0.5
            && (p.y - self.center_y).abs() <= self.depth * 0.5
    }
}

/// Indices of scene points inside the sub-volume footprint
/// (boundary-inclusive; z unbounded).
pub fn extract_subvolume(scene: &PointSet, spec: &SubVolumeSpec) -> Vec<usize> {
    scene
        .positions
        .iter()
        .enumerate()
        .filter(|(_, &p)| spec.contains(p))
        .map(|(i, _)| i)
        .collect()
}

/// Sample exactly `n` entries from `indices`. When enough are available
/// the result is a without-replacement sample; otherwise every index
/// appears once and the remainder is drawn with replacement.
pub fn sample_random(indices: &[usize], n: usize, seed: u64) -> Vec<usize> {
    assert!(!indices.is_empty(), "sample_random requires a nonempty index set");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if indices.len() >= n {
        let mut pool: Vec<usize> = indices.to_vec();
        let (picked, _) = pool.partial_shuffle(&mut rng, n);
        picked.to_vec()
    } else {
        let mut out: Vec<usize> = indices.to_vec();
        while out.len() < n {
            out.push(indices[rng.random_range(0..indices.len())]);
        }
        out
    }
}

/// Greedy farthest-point sampling: start at `start_index`, then repeatedly
/// take the point with the largest distance to the chosen set, breaking
/// ties toward the lowest index.
pub fn farthest_point_sample(positions: &[Vec3], k: usize, start_index: usize) -> Result<Vec<usize>> {
    let m = positions.len();
    if k > m {
        return Err(Error::ShapeMismatch(format!("cannot pick {k} of {m} points")));
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    let mut chosen = Vec::with_capacity(k);
    let mut taken = vec![false; m];
    let mut min_dist2 = vec![f64::INFINITY; m];
    let mut current = start_index;
    chosen.push(current);
    taken[current] = true;
    for _ in 1..k {
        let cp = positions[current];
        let mut best = usize::MAX;
        let mut best_d = f64::NEG_INFINITY;
        for i in 0..m {
            let d2 = (positions[i] - cp).norm_squared().min(min_dist2[i]);
            min_dist2[i] = d2;
            // Skipping taken indices keeps the result distinct even when
            // positions coincide (e.g. after with-replacement sampling).
            if !taken[i] && d2 > best_d {
                best_d = d2;
                best = i;
            }
        }
        current = best;
        chosen.push(current);
        taken[current] = true;
    }
    Ok(chosen)
}

/// Result of a ball query around one center.
#[derive(Debug, Clone, PartialEq)]
pub struct BallGroup {
    pub indices: Vec<usize>,
    /// Set when no point fell inside the radius and the nearest point was
    /// substituted instead.
    pub fallback: bool,
}

/// For each center, the indices (ascending) of up to `k` points within
/// `radius`. An empty ball falls back to the single nearest point so groups
/// are never empty. Centers are processed in parallel (outputs are
/// per-center and order-preserving).
pub fn ball_query(positions: &[Vec3], centers: &[Vec3], radius: f64, k: usize) -> Vec<BallGroup> {
    assert!(radius > 0.0 && k >= 1);
    let r2 = radius * radius;
    centers
        .par_iter()
        .map(|&c| {
            let mut indices = Vec::new();
            for (i, &p) in positions.iter().enumerate() {
                if (p - c).norm_squared() <= r2 {
                    indices.push(i);
                    if indices.len() == k {
                        break;
                    }
                }
            }
            if indices.is_empty() {
                let nearest = positions
                    .iter()
                    .enumerate()
                    .min_by(|(i, a), (j, b)| {
                        (a.distance(c), i).partial_cmp(&(b.distance(c), j)).unwrap()
                    })
                    .map(|(i, _)| i)
                    .expect("ball_query requires nonempty positions");
                BallGroup { indices: vec![nearest], fallback: true }
            } else {
                BallGroup { indices, fallback: false }
            }
        })
        .collect()
}

/// Inverse-distance weights over the three nearest support points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpWeights {
    pub indices: [usize; 3],
    pub weights: [f64; 3],
}

/// Per query point: 3 nearest supports (duplicated when fewer exist) and
/// weights proportional to 1/(distance + 1e-8), normalized to sum 1.
pub fn three_nn_weights(query_positions: &[Vec3], support_positions: &[Vec3]) -> Vec<InterpWeights> {
    assert!(!support_positions.is_empty(), "three_nn_weights requires support points");
    query_positions
        .iter()
        .map(|&q| {
            // Indices of the three smallest distances, ties toward lower index.
            let mut best: [(f64, usize); 3] =
                [(f64::INFINITY, usize::MAX), (f64::INFINITY, usize::MAX), (f64::INFINITY, usize::MAX)];
            for (i, &s) in support_positions.iter().enumerate() {
                let d = q.distance(s);
                let cand = (d, i);
                if cand < best[2] {
                    best[2] = cand;
                    if best[2] < best[1] {
                        best.swap(1, 2);
                    }
                    if best[1] < best[0] {
                        best.swap(0, 1);
                    }
                }
            }
            let count = support_positions.len().min(3);
            let mut indices = [0usize; 3];
            let mut raw = [0.0f64; 3];
            for slot in 0..3 {
                let (d, i) = best[slot.min(count - 1)];
                indices[slot] = i;
                raw[slot] = 1.0 / (d + 1e-8);
            }
            let total: f64 = raw.iter().sum();
            InterpWeights {
                indices,
                weights: [raw[0] / total, raw[1] / total, raw[2] / total],
            }
        })
        .collect()
}

/// Fraction of labels that are annotated (nonzero).
pub fn annotated_fraction(labels: &[u16]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    labels.iter().filter(|&&l| l != 0).count() as f64 / labels.len() as f64
}

/// Training keep/discard rule: keep iff at least 70% of the labels are
/// annotated (boundary inclusive). Empty sub-volumes are discarded.
pub fn training_filter(labels: &[u16]) -> bool {
    !labels.is_empty() && annotated_fraction(labels) >= 0.70
}

/// Rotate positions (and normal channels, when present) about the vertical
/// axis through `center`. Image-feature channels and labels are untouched.
pub fn rotate_scene_z(scene: &PointSet, angle: f64, center: Vec3) -> PointSet {
    let rot = Mat3::rotation_z(angle);
    let mut out = scene.clone();
    for p in &mut out.positions {
        let local = *p - center;
        *p = rot.mul_vec(Vec3::new(local.x, local.y, local.z)) + center;
    }
    if scene.has_normal_channels && scene.feature_dim >= 3 {
        for i in 0..out.len() {
            let row = &mut out.features[i * out.feature_dim..i * out.feature_dim + 3];
            let n = rot.mul_vec(Vec3::new(row[0], row[1], row[2]));
            row[0] = n.x;
            row[1] = n.y;
            row[2] = n.z;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point_set(points: &[(f64, f64, f64)]) -> PointSet {
        PointSet {
            positions: points.iter().map(|&(x, y, z)| Vec3::new(x, y, z)).collect(),
            features: Vec::new(),
            feature_dim: 0,
            has_normal_channels: false,
            labels: None,
            source_indices: (0..points.len() as u32).collect(),
        }
    }

    #[test]
    fn subvolume_boundary_inclusive() {
        let scene = point_set(&[(0.75, 0.75, 9.0), (0.76, 0.0, 0.0), (0.0, 0.0, -5.0)]);
        let spec = SubVolumeSpec::new(0.0, 0.0, 1.5, 1.5);
        let idx = extract_subvolume(&scene, &spec);
        // Exact corner included, z unbounded, x beyond half-width excluded.
        assert_eq!(idx, vec![0, 2]);
    }

    #[test]
    fn subvolume_outside_scene_is_empty() {
        let scene = point_set(&[(0.0, 0.0, 0.0)]);
        let spec = SubVolumeSpec::new(100.0, 100.0, 1.5, 1.5);
        assert!(extract_subvolume(&scene, &spec).is_empty());
    }

    #[test]
    fn subvolume_matches_brute_force_filter() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<(f64, f64, f64)> = (0..200)
            .map(|_| {
                (
                    rng.random_range(-3.0..3.0),
                    rng.random_range(-3.0..3.0),
                    rng.random_range(0.0..2.5),
                )
            })
            .collect();
        let scene = point_set(&pts);
        let spec = SubVolumeSpec::new(0.3, -0.2, 1.5, 1.5);
        let got = extract_subvolume(&scene, &spec);
        let brute: Vec<usize> = pts
            .iter()
            .enumerate()
            .filter(|(_, &(x, y, _))| {
                (x - 0.3).abs() <= 0.75 && (y + 0.2).abs() <= 0.75
            })
            .map(|(i, _)| i)
            .collect();
        assert_eq!(got, brute);
    }

    #[test]
    fn sample_exact_size_is_permutation() {
        let indices = vec![3, 1, 4, 1, 5];
        let mut sampled = sample_random(&indices, 5, 42);
        sampled.sort_unstable();
        let mut expected = indices.clone();
        expected.sort_unstable();
        assert_eq!(sampled, expected);
    }

    #[test]
    fn undersized_pool_repeats() {
        let sampled = sample_random(&[7], 4, 0);
        assert_eq!(sampled, vec![7, 7, 7, 7]);
        // Oversized request keeps every original index at least once.
        let sampled = sample_random(&[1, 2], 5, 9);
        assert!(sampled.contains(&1) && sampled.contains(&2));
        assert_eq!(sampled.len(), 5);
    }

    #[test]
    fn sampling_is_deterministic() {
        let indices: Vec<usize> = (0..100).collect();
        assert_eq!(sample_random(&indices, 10, 77), sample_random(&indices, 10, 77));
        assert_ne!(sample_random(&indices, 10, 77), sample_random(&indices, 10, 78));
    }

    #[test]
    fn fps_collinear_picks_extremes() {
        let positions: Vec<Vec3> = (0..4).map(|i| Vec3::new(i as f64, 0.0, 0.0)).collect();
        let picked = farthest_point_sample(&positions, 2, 0).unwrap();
        assert_eq!(picked, vec![0, 3]);
    }

    #[test]
    fn fps_entire_set_and_single() {
        let positions: Vec<Vec3> = (0..5).map(|i| Vec3::new(i as f64, 1.0, 0.0)).collect();
        let mut all = farthest_point_sample(&positions, 5, 2).unwrap();
        all.sort_unstable();
        assert_eq!(all, vec![0, 1, 2, 3, 4]);
        assert_eq!(farthest_point_sample(&positions, 1, 3).unwrap(), vec![3]);
        assert!(farthest_point_sample(&positions, 6, 0).is_err());
    }

    /// Brute-force FPS oracle: literal greedy with min-distance recomputed
    /// from scratch each step.
    fn fps_oracle(positions: &[Vec3], k: usize, start: usize) -> Vec<usize> {
        let mut chosen = vec![start];
        while chosen.len() < k {
            let mut best = usize::MAX;
            let mut best_d = f64::NEG_INFINITY;
            for i in 0..positions.len() {
                let d = chosen
                    .iter()
                    .map(|&c| positions[i].distance(positions[c]))
                    .fold(f64::INFINITY, f64::min);
                if d > best_d {
                    best_d = d;
                    best = i;
                }
            }
            chosen.push(best);
        }
        chosen
    }

    #[test]
    fn fps_matches_brute_force_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let m = rng.random_range(2..30);
            let positions: Vec<Vec3> = (0..m)
                .map(|_| {
                    Vec3::new(
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                    )
                })
                .collect();
            let k = rng.random_range(1..=m);
            assert_eq!(
                farthest_point_sample(&positions, k, 0).unwrap(),
                fps_oracle(&positions, k, 0)
            );
        }
    }

    /// FPS achieves at least half the optimal max-min dispersion (checked
    /// exhaustively over all subsets containing the start).
    #[test]
    fn fps_dispersion_within_half_of_optimum() {
        fn min_pairwise(positions: &[Vec3], subset: &[usize]) -> f64 {
            let mut m = f64::INFINITY;
            for i in 0..subset.len() {
                for j in i + 1..subset.len() {
                    m = m.min(positions[subset[i]].distance(positions[subset[j]]));
                }
            }
            m
        }
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..10 {
            let m = rng.random_range(4..=10usize);
            let positions: Vec<Vec3> = (0..m)
                .map(|_| {
                    Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), 0.0)
                })
                .collect();
            let k = rng.random_range(2..=m.min(5));
            let fps = farthest_point_sample(&positions, k, 0).unwrap();
            let fps_disp = min_pairwise(&positions, &fps);
            // Exhaustive optimum over all k-subsets via bitmasks (m <= 10).
            let mut best = 0.0f64;
            for mask in 0u32..(1 << m) {
                if mask.count_ones() as usize != k {
                    continue;
                }
                let subset: Vec<usize> = (0..m).filter(|&i| mask & (1 << i) != 0).collect();
                best = best.max(min_pairwise(&positions, &subset));
            }
            assert!(
                fps_disp >= best * 0.5 - 1e-12,
                "fps {fps_disp} < half of optimum {best}"
            );
        }
    }

    #[test]
    fn ball_query_center_on_point() {
        let positions = vec![Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0)];
        let groups = ball_query(&positions, &[Vec3::ZERO], 1e-6, 4);
        assert_eq!(groups[0].indices, vec![0]);
        assert!(!groups[0].fallback);
    }

    #[test]
    fn ball_query_fallback_to_nearest() {
        let positions = vec![Vec3::new(5.0, 0.0, 0.0), Vec3::new(2.0, 0.0, 0.0)];
        let groups = ball_query(&positions, &[Vec3::ZERO], 0.5, 4);
        assert_eq!(groups[0].indices, vec![1]);
        assert!(groups[0].fallback);
    }

    #[test]
    fn ball_query_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let positions: Vec<Vec3> = (0..120)
            .map(|_| {
                Vec3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                )
            })
            .collect();
        let centers: Vec<Vec3> = (0..10)
            .map(|_| {
                Vec3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                )
            })
            .collect();
        let radius = 0.5;
        let k = 8;
        for (center, group) in centers.iter().zip(ball_query(&positions, &centers, radius, k)) {
            let brute: Vec<usize> = positions
                .iter()
                .enumerate()
                .filter(|(_, p)| p.distance(*center) <= radius)
                .map(|(i, _)| i)
                .take(k)
                .collect();
            if brute.is_empty() {
                assert!(group.fallback);
            } else {
                assert_eq!(group.indices, brute);
                assert!(group
                    .indices
                    .iter()
                    .all(|&i| positions[i].distance(*center) <= radius));
            }
        }
    }

    #[test]
    fn three_nn_zero_distance_dominates() {
        let support = vec![Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)];
        let w = three_nn_weights(&[Vec3::ZERO], &support)[0];
        assert_eq!(w.indices[0], 0);
        assert!(w.weights[0] > 0.9999);
    }

    #[test]
    fn three_nn_equidistant_is_uniform() {
        let support = vec![
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(-0.5, 0.75_f64.sqrt(), 0.0),
            Vec3::new(-0.5, -(0.75_f64.sqrt()), 0.0),
        ];
        let w = three_nn_weights(&[Vec3::ZERO], &support)[0];
        for k in 0..3 {
            assert!((w.weights[k] - 1.0 / 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn three_nn_duplicates_when_support_small() {
        let w = three_nn_weights(&[Vec3::new(2.0, 0.0, 0.0)], &[Vec3::ZERO])[0];
        assert_eq!(w.indices, [0, 0, 0]);
        let total: f64 = w.weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn three_nn_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let support: Vec<Vec3> = (0..40)
            .map(|_| {
                Vec3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                )
            })
            .collect();
        let queries: Vec<Vec3> = (0..15)
            .map(|_| {
                Vec3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                )
            })
            .collect();
        for (q, w) in queries.iter().zip(three_nn_weights(&queries, &support)) {
            let mut order: Vec<usize> = (0..support.len()).collect();
            order.sort_by(|&a, &b| {
                (q.distance(support[a]), a)
                    .partial_cmp(&(q.distance(support[b]), b))
                    .unwrap()
            });
            assert_eq!(w.indices.to_vec(), order[..3].to_vec());
            let raw: Vec<f64> = order[..3]
                .iter()
                .map(|&i| 1.0 / (q.distance(support[i]) + 1e-8))
                .collect();
            let total: f64 = raw.iter().sum();
            for (wk, rk) in w.weights.iter().zip(&raw) {
                assert!((wk - rk / total).abs() < 1e-9);
            }
            assert!((w.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(w.weights.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn training_filter_thresholds() {
        let seven_of_ten: Vec<u16> = vec![1, 1, 1, 2, 2, 3, 3, 0, 0, 0];
        assert!(training_filter(&seven_of_ten)); // exactly 70% kept
        assert!(training_filter(&[1, 2, 3]));
        assert!(!training_filter(&[0, 0, 0]));
        assert!(!training_filter(&[]));
        assert!(!training_filter(&[1, 0, 0, 0])); // 25%
    }

    fn featured_set() -> PointSet {
        PointSet {
            positions: vec![Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 2.0, 1.0)],
            features: vec![
                1.0, 0.0, 0.0, 0.5, 0.25, // normal (1,0,0) + 2 image dims
                0.0, 1.0, 0.0, -0.5, 0.75,
            ],
            feature_dim: 5,
            has_normal_channels: true,
            labels: Some(vec![1, 2]),
            source_indices: vec![0, 1],
        }
    }

    #[test]
    fn rotate_zero_and_full_turn_are_identity() {
        let set = featured_set();
        let same = rotate_scene_z(&set, 0.0, Vec3::ZERO);
        assert_eq!(set, same);
        let full = rotate_scene_z(&set, std::f64::consts::TAU, Vec3::new(0.3, 0.4, 0.0));
        for (a, b) in set.positions.iter().zip(&full.positions) {
            assert!(a.distance(*b) < 1e-9);
        }
    }

    #[test]
    fn quarter_turn_moves_x_to_y() {
        let set = featured_set();
        let rotated = rotate_scene_z(&set, std::f64::consts::FRAC_PI_2, Vec3::ZERO);
        assert!(rotated.positions[0].distance(Vec3::new(0.0, 1.0, 0.0)) < 1e-12);
        // Normal channel rotated the same way; image channels untouched.
        let row = rotated.feature_row(0);
        assert!((row[0] - 0.0).abs() < 1e-12);
        assert!((row[1] - 1.0).abs() < 1e-12);
        assert_eq!(row[3], 0.5);
        assert_eq!(row[4], 0.25);
        assert_eq!(rotated.labels, set.labels);
    }

    #[test]
    fn rotation_preserves_pairwise_distances_and_labels() {
        let set = featured_set();
        let rotated = rotate_scene_z(&set, 1.234, Vec3::new(5.0, -2.0, 0.7));
        let before = set.positions[0].distance(set.positions[1]);
        let after = rotated.positions[0].distance(rotated.positions[1]);
        assert!((before - after).abs() < 1e-9);
        assert_eq!(rotated.labels, set.labels);
    }
}
