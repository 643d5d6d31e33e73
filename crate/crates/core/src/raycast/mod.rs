//! Ray casting against triangle meshes and per-pixel association maps.

mod bvh;

pub use bvh::{raycast_brute_force, Bvh, Hit, LEAF_SIZE, RAY_T_MIN};

use crate::camera::CameraView;
use crate::error::{Error, Result};
use crate::geometry::{BarycentricWeights, Mesh};
use rayon::prelude::*;
use std::io::{Read, Write};

/// Per-pixel hit record: which triangle the pixel's center ray strikes
/// first, where inside it, and at what camera-frame depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelHit {
    pub triangle: u32,
    pub weights: BarycentricWeights,
    /// Camera-frame z of the intersection, always positive.
    pub depth: f64,
}

/// Dense map of ray-cast results for every pixel of a view, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct AssociationMap {
    width: usize,
    height: usize,
    pixels: Vec<Option<PixelHit>>,
}

impl AssociationMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn pixel(&self, row: usize, col: usize) -> Option<&PixelHit> {
        self.pixels[row * self.width + col].as_ref()
    }

    pub fn pixels(&self) -> impl Iterator<Item = Option<&PixelHit>> {
        self.pixels.iter().map(|p| p.as_ref())
    }

    /// Iterate (row, col, hit) over hit pixels only.
    pub fn hits(&self) -> impl Iterator<Item = (usize, usize, &PixelHit)> {
        self.pixels.iter().enumerate().filter_map(move |(i, p)| {
            p.as_ref().map(|h| (i / self.width, i % self.width, h))
        })
    }

    pub fn hit_count(&self) -> usize {
        self.pixels.iter().filter(|p| p.is_some()).count()
    }

    /// Fraction of pixels whose ray hit any triangle.
    pub fn hit_fraction(&self) -> f64 {
        self.hit_count() as f64 / self.pixels.len() as f64
    }
}

/// Cast one ray per pixel center and record the nearest intersection.
/// Pixels are independent, so rows are evaluated in parallel; the result is
/// identical to sequential evaluation.
pub fn render_association(mesh: &Mesh, bvh: &Bvh, camera: &CameraView) -> AssociationMap {
    let width = camera.width();
    let height = camera.height();
    let pixels: Vec<Option<PixelHit>> = (0..height)
        .into_par_iter()
        .flat_map_iter(|row| {
            (0..width).map(move |col| {
                let ray = camera.pixel_ray(col as f64, row as f64);
                bvh.raycast_nearest(ray.origin, ray.direction).map(|hit| {
                    let point = ray.origin + ray.direction * hit.t;
                    PixelHit {
                        triangle: hit.triangle,
                        weights: hit.weights,
                        depth: camera.depth_of(point),
                    }
                })
            })
        })
        .collect();
    let _ = mesh; // geometry is baked into the BVH
    AssociationMap { width, height, pixels }
}

const AMAP_MAGIC: &[u8; 4] = b"AMAP";

/// Debug dump: magic "AMAP", u32 h, w (LE), then per pixel
/// i32 triangle id (-1 = miss), 3 x f32 weights, f32 depth.
pub fn write_amap<W: Write>(map: &AssociationMap, out: &mut W) -> Result<()> {
    out.write_all(AMAP_MAGIC)?;
    out.write_all(&(map.height as u32).to_le_bytes())?;
    out.write_all(&(map.width as u32).to_le_bytes())?;
    for p in &map.pixels {
        match p {
            Some(h) => {
                out.write_all(&(h.triangle as i32).to_le_bytes())?;
                out.write_all(&(h.weights.w1 as f32).to_le_bytes())?;
                out.write_all(&(h.weights.w2 as f32).to_le_bytes())?;
                out.write_all(&(h.weights.w3 as f32).to_le_bytes())?;
                out.write_all(&(h.depth as f32).to_le_bytes())?;
            }
            None => {
                out.write_all(&(-1i32).to_le_bytes())?;
                out.write_all(&[0u8; 16])?;
            }
        }
    }
    Ok(())
}

pub fn read_amap<R: Read>(input: &mut R) -> Result<AssociationMap> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != AMAP_MAGIC {
        return Err(Error::InvalidFormat("bad AMAP magic".into()));
    }
    let mut buf4 = [0u8; 4];
    input.read_exact(&mut buf4)?;
    let height = u32::from_le_bytes(buf4) as usize;
    input.read_exact(&mut buf4)?;
    let width = u32::from_le_bytes(buf4) as usize;
    let count = height
        .checked_mul(width)
        .ok_or_else(|| Error::InvalidFormat("AMAP dimensions overflow".into()))?;
    let mut pixels = Vec::with_capacity(count);
    for _ in 0..count {
        input.read_exact(&mut buf4)?;
        let id = i32::from_le_bytes(buf4);
        let mut floats = [0f32; 4];
        for f in &mut floats {
            input.read_exact(&mut buf4)?;
            *f = f32::from_le_bytes(buf4);
        }
        if id < 0 {
            pixels.push(None);
        } else {
            pixels.push(Some(PixelHit {
                triangle: id as u32,
                weights: BarycentricWeights::new(
                    floats[0] as f64,
                    floats[1] as f64,
                    floats[2] as f64,
                ),
                depth: floats[3] as f64,
            }));
        }
    }
    Ok(AssociationMap { width, height, pixels })
}
