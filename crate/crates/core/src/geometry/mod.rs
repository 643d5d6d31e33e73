//! Triangle-mesh data model and geometric primitives.

mod barycentric;
mod normals;
mod ply;

pub use barycentric::{barycentric_coordinates, BarycentricWeights, DEGENERATE_AREA_THRESHOLD};
pub use normals::compute_vertex_normals;
pub use ply::{parse_ply, write_ply};

use crate::error::{Error, Result};
use crate::math::{Aabb, Vec3};

/// Indexed triangle mesh with optional per-vertex attributes.
///
/// Label 0 means "unannotated" and is ignored by training filters and
/// evaluation.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Mesh {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[u32; 3]>,
    pub normals: Option<Vec<Vec3>>,
    pub colors: Option<Vec<[u8; 3]>>,
    pub labels: Option<Vec<u16>>,
}

impl Mesh {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    /// Positions of the three corners of face `f`.
    #[inline]
    pub fn triangle(&self, f: usize) -> [Vec3; 3] {
        let [a, b, c] = self.faces[f];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    pub fn bounds(&self) -> Aabb {
        Aabb::from_points(self.vertices.iter().copied())
    }

    /// Checks index ranges and attribute lengths.
    pub fn validate(&self) -> Result<()> {
        let n = self.vertices.len() as u32;
        for (i, face) in self.faces.iter().enumerate() {
            for &v in face {
                if v >= n {
                    return Err(Error::InvalidMesh(format!(
                        "face {i} references vertex {v} of {n}"
                    )));
                }
            }
        }
        let check_len = |len: usize, what: &str| {
            if len != self.vertices.len() {
                Err(Error::InvalidMesh(format!(
                    "{what} count {len} != vertex count {}",
                    self.vertices.len()
                )))
            } else {
                Ok(())
            }
        };
        if let Some(ns) = &self.normals {
            check_len(ns.len(), "normal")?;
        }
        if let Some(cs) = &self.colors {
            check_len(cs.len(), "color")?;
        }
        if let Some(ls) = &self.labels {
            check_len(ls.len(), "label")?;
        }
        Ok(())
    }

    /// Vertex normals: stored ones if present, otherwise freshly computed.
    pub fn normals_or_computed(&self) -> Vec<Vec3> {
        match &self.normals {
            Some(ns) => ns.clone(),
            None => compute_vertex_normals(self),
        }
    }
}
