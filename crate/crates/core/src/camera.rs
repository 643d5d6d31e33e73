//! Pinhole camera model: rays, projection, pose / intrinsics file formats.
//!
//! Conventions: right-handed, camera looks along +z in its own frame,
//! u (pixel column) increases rightward, v (pixel row) increases downward.
//! Extrinsics are stored camera-to-world. Rays are shot through pixel
//! centers at (u + 0.5, v + 0.5).

use crate::error::{Error, Result};
use crate::math::{Iso3, Mat3, Vec3};

/// A ray with unit direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    pub direction: Vec3,
}

/// Pinhole camera: intrinsic matrix, camera-to-world pose, resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraView {
    intrinsics: Mat3,
    inv_intrinsics: Mat3,
    cam_to_world: Iso3,
    world_to_cam: Iso3,
    width: usize,
    height: usize,
}

/// Result of projecting a world point into the image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Projection {
    /// Continuous pixel coordinates (pixel (u,v) has its center at
    /// (u + 0.5, v + 0.5)) and camera-frame depth in meters.
    InImagePlane { u: f64, v: f64, depth: f64 },
    BehindCamera,
}

impl CameraView {
    pub fn new(intrinsics: Mat3, cam_to_world: Iso3, width: usize, height: usize) -> Result<Self> {
        if width < 1 || height < 1 {
            return Err(Error::InvalidCamera("resolution must be at least 1x1".into()));
        }
        if intrinsics.m[0][0] <= 0.0 || intrinsics.m[1][1] <= 0.0 {
            return Err(Error::InvalidCamera("intrinsics need positive fx, fy".into()));
        }
        let err = cam_to_world.rotation.orthonormality_error();
        if err > 1e-6 {
            return Err(Error::InvalidCamera(format!(
                "extrinsic rotation is not orthonormal (error {err:.2e})"
            )));
        }
        let inv_intrinsics = intrinsics
            .inverse()
            .ok_or_else(|| Error::InvalidCamera("intrinsic matrix is singular".into()))?;
        Ok(CameraView {
            intrinsics,
            inv_intrinsics,
            world_to_cam: cam_to_world.inverse(),
            cam_to_world,
            width,
            height,
        })
    }

    /// Simple intrinsics with square pixels and the principal point at the
    /// image center.
    pub fn default_intrinsics(width: usize, height: usize, focal: f64) -> Mat3 {
        Mat3 {
            m: [
                [focal, 0.0, width as f64 / 2.0],
                [0.0, focal, height as f64 / 2.0],
                [0.0, 0.0, 1.0],
            ],
        }
    }

    pub fn intrinsics(&self) -> &Mat3 {
        &self.intrinsics
    }

    pub fn cam_to_world(&self) -> &Iso3 {
        &self.cam_to_world
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn center(&self) -> Vec3 {
        self.cam_to_world.translation
    }

    /// World-frame viewing direction (camera +z axis).
    pub fn forward(&self) -> Vec3 {
        self.cam_to_world.rotation.col(2)
    }

    /// Ray through the center of pixel (u, v). Fractional indices are
    /// allowed; the ray passes through continuous image point
    /// (u + 0.5, v + 0.5).
    pub fn pixel_ray(&self, u: f64, v: f64) -> Ray {
        debug_assert!(u >= 0.0 && u < self.width as f64);
        debug_assert!(v >= 0.0 && v < self.height as f64);
        let dir_cam = self.inv_intrinsics.mul_vec(Vec3::new(u + 0.5, v + 0.5, 1.0));
        let dir_world = self.cam_to_world.transform_vector(dir_cam).normalize_or_zero();
        Ray { origin: self.center(), direction: dir_world }
    }

    /// Project a world point into continuous pixel coordinates.
    pub fn project(&self, p: Vec3) -> Projection {
        let pc = self.world_to_cam.transform_point(p);
        if pc.z <= 0.0 {
            return Projection::BehindCamera;
        }
        let uvw = self.intrinsics.mul_vec(Vec3::new(pc.x / pc.z, pc.y / pc.z, 1.0));
        Projection::InImagePlane { u: uvw.x, v: uvw.y, depth: pc.z }
    }

    /// Camera-frame depth (z) of a world point; negative behind the camera.
    pub fn depth_of(&self, p: Vec3) -> f64 {
        self.world_to_cam.transform_point(p).z
    }
}

/// Serialize a pose as 16 whitespace-separated floats (row-major 4x4
/// camera-to-world).
pub fn format_pose(pose: &Iso3) -> String {
    let m = pose.to_matrix4();
    let rows: Vec<String> = m
        .chunks(4)
        .map(|r| r.iter().map(|x| format!("{x:.16e}")).collect::<Vec<_>>().join(" "))
        .collect();
    rows.join("\n") + "\n"
}

fn parse_16_floats(text: &str) -> Result<[f64; 16]> {
    let values: Vec<f64> = text
        .split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| {
            Error::InvalidFormat(format!("invalid float '{t}' in matrix file"))
        }))
        .collect::<Result<_>>()?;
    if values.len() != 16 {
        return Err(Error::InvalidFormat(format!(
            "expected 16 floats, found {}",
            values.len()
        )));
    }
    let mut m = [0.0; 16];
    m.copy_from_slice(&values);
    Ok(m)
}

/// Parse a pose file: 16 floats, row-major 4x4 camera-to-world.
pub fn parse_pose(text: &str) -> Result<Iso3> {
    let m = parse_16_floats(text)?;
    Iso3::from_matrix4(&m)
        .ok_or_else(|| Error::InvalidFormat("pose bottom row must be 0 0 0 1".into()))
}

/// Serialize intrinsics as a 4x4 with K in the upper-left 3x3.
pub fn format_intrinsics(k: &Mat3) -> String {
    let mut m = [0.0f64; 16];
    for i in 0..3 {
        for j in 0..3 {
            m[i * 4 + j] = k.m[i][j];
        }
    }
    m[15] = 1.0;
    let rows: Vec<String> = m
        .chunks(4)
        .map(|r| r.iter().map(|x| format!("{x:.16e}")).collect::<Vec<_>>().join(" "))
        .collect();
    rows.join("\n") + "\n"
}

/// Parse an intrinsics file: 16 floats row-major, K in the upper-left 3x3;
/// the remaining entries must follow the 4x4 identity pattern.
pub fn parse_intrinsics(text: &str) -> Result<Mat3> {
    let m = parse_16_floats(text)?;
    let pattern_ok = m[3].abs() < 1e-9
        && m[7].abs() < 1e-9
        && m[11].abs() < 1e-9
        && m[12].abs() < 1e-9
        && m[13].abs() < 1e-9
        && m[14].abs() < 1e-9
        && (m[15] - 1.0).abs() < 1e-9;
    if !pattern_ok {
        return Err(Error::InvalidFormat(
            "intrinsics outside the upper-left 3x3 must be the identity pattern".into(),
        ));
    }
    Ok(Mat3 {
        m: [
            [m[0], m[1], m[2]],
            [m[4], m[5], m[6]],
            [m[8], m[9], m[10]],
        ],
    })
}
