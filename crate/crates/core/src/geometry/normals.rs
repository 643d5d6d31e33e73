//! Area-weighted vertex normals.

use super::Mesh;
use crate::math::Vec3;

/// Per-vertex unit normals as the normalized sum of incident face normals
/// weighted by face area. Isolated vertices get the zero vector; degenerate
/// faces contribute nothing (their cross product already vanishes).
pub fn compute_vertex_normals(mesh: &Mesh) -> Vec<Vec3> {
    let mut accum = vec![Vec3::ZERO; mesh.vertices.len()];
    for face in &mesh.faces {
        let [a, b, c] = *face;
        let v0 = mesh.vertices[a as usize];
        let v1 = mesh.vertices[b as usize];
        let v2 = mesh.vertices[c as usize];
        // |cross| = 2 * area, so the unnormalized cross product is exactly
        // the area-weighted face normal (up to the constant factor 2).
        let weighted = (v1 - v0).cross(v2 - v0);
        accum[a as usize] += weighted;
        accum[b as usize] += weighted;
        accum[c as usize] += weighted;
    }
    for n in &mut accum {
        *n = n.normalize_or_zero();
    }
    accum
}
