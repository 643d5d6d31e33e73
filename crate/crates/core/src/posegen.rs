//! Synthetic camera-pose grids and greedy max-coverage image selection.
//!
//! Cameras are placed on a regular grid of cell centers at several absolute
//! heights above the scene floor, each rendered at a small set of attitude
//! (pitch) and azimuth (yaw) angles. Views with too few hit pixels are
//! discarded, then a greedy pass selects the subset that covers the most
//! mesh vertices.

use crate::camera::CameraView;
use crate::error::{Error, Result};
use crate::geometry::Mesh;
use crate::math::{Aabb, Iso3, Mat3, Vec3};
use crate::raycast::{render_association, AssociationMap, Bvh};
use rayon::prelude::*;

/// Parameters of the synthetic pose grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseGridConfig {
    /// Camera heights above the scene floor, in meters.
    pub heights: Vec<f64>,
    /// Grid partitions along scene width (x).
    pub grid_w: usize,
    /// Grid partitions along scene depth (y).
    pub grid_d: usize,
    /// Pitch angles in degrees; negative looks downward.
    pub attitudes_deg: Vec<f64>,
    /// Yaw angles in degrees about the world z axis.
    pub azimuths_deg: Vec<f64>,
    /// Image resolution (height, width).
    pub resolution: (usize, usize),
    /// Minimum hit-pixel fraction for a view to be kept.
    pub context_threshold: f64,
    /// Maximum number of selected images.
    pub budget: usize,
}

impl Default for PoseGridConfig {
    fn default() -> Self {
        PoseGridConfig {
            heights: vec![1.5, 2.0, 2.5],
            grid_w: 10,
            grid_d: 10,
            attitudes_deg: vec![-30.0, 0.0, 30.0],
            azimuths_deg: vec![0.0, 120.0, 240.0],
            resolution: (480, 640),
            context_threshold: 0.25,
            budget: 64,
        }
    }
}

impl PoseGridConfig {
    pub fn pose_count(&self) -> usize {
        self.grid_w * self.grid_d * self.heights.len() * self.attitudes_deg.len() * self.azimuths_deg.len()
    }
}

/// Camera-to-world orientation looking along `azimuth` (yaw about world z)
/// with `attitude` pitch; negative attitude tilts the optical axis below
/// horizontal. Camera x maps to image-right, camera y to image-down.
pub fn orientation(attitude_deg: f64, azimuth_deg: f64) -> Mat3 {
    let att = attitude_deg.to_radians();
    let az = azimuth_deg.to_radians();
    let yaw = Mat3::rotation_z(az);
    let forward = yaw.mul_vec(Vec3::new(att.cos(), 0.0, att.sin()));
    // Image-right stays horizontal for any attitude.
    let right = yaw.mul_vec(Vec3::new(0.0, -1.0, 0.0));
    let down = forward.cross(right);
    Mat3::from_cols(right, down, forward)
}

/// Generate one camera per (cell center, height, attitude, azimuth).
/// Heights are measured from the bottom of `scene_bounds`; cameras above
/// the scene are still generated and left for the context filter.
pub fn generate_pose_grid(
    scene_bounds: &Aabb,
    config: &PoseGridConfig,
    intrinsics: &Mat3,
) -> Result<Vec<CameraView>> {
    let extent = scene_bounds.extent();
    if scene_bounds.is_empty() || extent.x <= 0.0 || extent.y <= 0.0 {
        return Err(Error::InvalidConfig("scene bounds need positive width and depth".into()));
    }
    if config.heights.is_empty() || config.grid_w < 1 || config.grid_d < 1 {
        return Err(Error::InvalidConfig("pose grid needs heights and at least 1x1 cells".into()));
    }
    let (height_px, width_px) = config.resolution;
    let cell_w = extent.x / config.grid_w as f64;
    let cell_d = extent.y / config.grid_d as f64;
    let mut out = Vec::with_capacity(config.pose_count());
    for &h in &config.heights {
        for iy in 0..config.grid_d {
            for ix in 0..config.grid_w {
                let center = Vec3::new(
                    scene_bounds.min.x + (ix as f64 + 0.5) * cell_w,
                    scene_bounds.min.y + (iy as f64 + 0.5) * cell_d,
                    scene_bounds.min.z + h,
                );
                for &att in &config.attitudes_deg {
                    for &az in &config.azimuths_deg {
                        let pose = Iso3::new(orientation(att, az), center);
                        out.push(CameraView::new(*intrinsics, pose, width_px, height_px)?);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Render every pose and keep those whose hit-pixel fraction reaches the
/// threshold. Returns (original pose index, camera, association map).
pub fn filter_low_context(
    poses: Vec<CameraView>,
    mesh: &Mesh,
    bvh: &Bvh,
    threshold: f64,
) -> Vec<(usize, CameraView, AssociationMap)> {
    let rendered: Vec<(usize, CameraView, AssociationMap)> = poses
        .into_par_iter()
        .enumerate()
        .map(|(i, cam)| {
            let map = render_association(mesh, bvh, &cam);
            (i, cam, map)
        })
        .collect();
    rendered
        .into_iter()
        .filter(|(_, _, map)| map.hit_fraction() >= threshold)
        .collect()
}

/// Hit fractions for all poses (used by manifests that also record the
/// discarded ones).
pub fn render_all(
    poses: &[CameraView],
    mesh: &Mesh,
    bvh: &Bvh,
) -> Vec<AssociationMap> {
    poses
        .par_iter()
        .map(|cam| render_association(mesh, bvh, cam))
        .collect()
}

/// Vertex-coverage bitset of one association map: a vertex counts as
/// covered when any hit pixel references a triangle containing it.
pub fn coverage_set(map: &AssociationMap, faces: &[[u32; 3]], n_vertices: usize) -> Vec<bool> {
    let mut covered = vec![false; n_vertices];
    for (_, _, hit) in map.hits() {
        for &v in &faces[hit.triangle as usize] {
            covered[v as usize] = true;
        }
    }
    covered
}

/// Greedy max-coverage selection. Each step picks the candidate adding the
/// most newly covered vertices (ties to the lower candidate index) and
/// stops at the budget or when no candidate adds anything. Returns selected
/// candidate indices in pick order.
pub fn greedy_select_coverage(
    candidate_coverage: &[Vec<bool>],
    n_vertices: usize,
    budget: usize,
) -> Vec<usize> {
    assert!(budget >= 1, "budget must be at least 1");
    let mut covered = vec![false; n_vertices];
    let mut selected = Vec::new();
    let mut remaining: Vec<usize> = (0..candidate_coverage.len()).collect();
    while selected.len() < budget && !remaining.is_empty() {
        let gains: Vec<(usize, usize)> = remaining
            .par_iter()
            .map(|&c| {
                let gain = candidate_coverage[c]
                    .iter()
                    .zip(&covered)
                    .filter(|(&cand, &already)| cand && !already)
                    .count();
                (c, gain)
            })
            .collect();
        // Max gain, ties to lower candidate index (remaining is ascending).
        let (best, best_gain) = gains
            .iter()
            .copied()
            .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
            .unwrap();
        if best_gain == 0 {
            break;
        }
        for (dst, &src) in covered.iter_mut().zip(&candidate_coverage[best]) {
            *dst = *dst || src;
        }
        selected.push(best);
        remaining.retain(|&c| c != best);
    }
    selected
}

/// Number of vertices covered by a union of candidate coverage sets.
pub fn union_coverage_count(candidate_coverage: &[Vec<bool>], selection: &[usize]) -> usize {
    if selection.is_empty() {
        return 0;
    }
    let n = candidate_coverage[selection[0]].len();
    (0..n)
        .filter(|&v| selection.iter().any(|&c| candidate_coverage[c][v]))
        .count()
}
