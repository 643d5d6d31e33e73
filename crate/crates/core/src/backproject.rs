//! Splatting per-pixel features onto mesh vertices.
//!
//! Each hit pixel distributes its feature vector to the three vertices of
//! the hit triangle, weighted barycentrically. Sums accumulate in f64 across
//! any number of images and are L2-normalized once at the end; vertices that
//! never received a pixel stay all-zero.

use crate::error::{Error, Result};
use crate::raycast::AssociationMap;
use rayon::prelude::*;
use std::io::{Read, Write};

/// Dense per-pixel feature image, row-major (row, col, channel), f32.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureImage {
    pub height: usize,
    pub width: usize,
    pub dim: usize,
    pub data: Vec<f32>,
}

impl FeatureImage {
    pub fn zeros(height: usize, width: usize, dim: usize) -> Self {
        FeatureImage { height, width, dim, data: vec![0.0; height * width * dim] }
    }

    #[inline]
    pub fn pixel(&self, row: usize, col: usize) -> &[f32] {
        let start = (row * self.width + col) * self.dim;
        &self.data[start..start + self.dim]
    }

    #[inline]
    pub fn pixel_mut(&mut self, row: usize, col: usize) -> &mut [f32] {
        let start = (row * self.width + col) * self.dim;
        &mut self.data[start..start + self.dim]
    }

    pub fn validate(&self) -> Result<()> {
        if self.data.len() != self.height * self.width * self.dim {
            return Err(Error::ShapeMismatch(format!(
                "feature image data length {} != {}x{}x{}",
                self.data.len(),
                self.height,
                self.width,
                self.dim
            )));
        }
        if self.data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidFormat("feature image contains non-finite values".into()));
        }
        Ok(())
    }

    /// Bilinear up-sampling to a target resolution (used for feature maps
    /// produced at reduced scale). Sample positions map pixel centers to
    /// pixel centers.
    pub fn upsample_bilinear(&self, height: usize, width: usize) -> FeatureImage {
        let mut out = FeatureImage::zeros(height, width, self.dim);
        let scale_r = self.height as f64 / height as f64;
        let scale_c = self.width as f64 / width as f64;
        for r in 0..height {
            let src_r = ((r as f64 + 0.5) * scale_r - 0.5).clamp(0.0, (self.height - 1) as f64);
            let r0 = src_r.floor() as usize;
            let r1 = (r0 + 1).min(self.height - 1);
            let fr = src_r - r0 as f64;
            for c in 0..width {
                let src_c = ((c as f64 + 0.5) * scale_c - 0.5).clamp(0.0, (self.width - 1) as f64);
                let c0 = src_c.floor() as usize;
                let c1 = (c0 + 1).min(self.width - 1);
                let fc = src_c - c0 as f64;
                let w00 = (1.0 - fr) * (1.0 - fc);
                let w01 = (1.0 - fr) * fc;
                let w10 = fr * (1.0 - fc);
                let w11 = fr * fc;
                let (p00, p01) = (self.pixel(r0, c0), self.pixel(r0, c1));
                let (p10, p11) = (self.pixel(r1, c0), self.pixel(r1, c1));
                let dst = out.pixel_mut(r, c);
                for k in 0..self.dim {
                    dst[k] = (p00[k] as f64 * w00
                        + p01[k] as f64 * w01
                        + p10[k] as f64 * w10
                        + p11[k] as f64 * w11) as f32;
                }
            }
        }
        out
    }
}

/// Running per-vertex sums of splatted features plus received weight.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexFeatureAccumulator {
    n: usize,
    dim: usize,
    sums: Vec<f64>,
    weight_totals: Vec<f64>,
}

impl VertexFeatureAccumulator {
    pub fn new(n: usize, dim: usize) -> Self {
        VertexFeatureAccumulator { n, dim, sums: vec![0.0; n * dim], weight_totals: vec![0.0; n] }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, v: usize) -> &[f64] {
        &self.sums[v * self.dim..(v + 1) * self.dim]
    }

    pub fn weight_total(&self, v: usize) -> f64 {
        self.weight_totals[v]
    }

    /// Total accumulated feature mass (sum over all vertices and channels);
    /// before normalization this equals the sum of all splatted pixel
    /// features because barycentric weights sum to one per pixel.
    pub fn total_mass(&self) -> f64 {
        self.sums.iter().sum()
    }
}

/// Splat one image into the accumulator. `faces` are the mesh faces the
/// association map's triangle ids refer to.
pub fn splat_image(
    assoc: &AssociationMap,
    feat: &FeatureImage,
    faces: &[[u32; 3]],
    acc: &mut VertexFeatureAccumulator,
) -> Result<()> {
    if assoc.width() != feat.width || assoc.height() != feat.height {
        return Err(Error::ShapeMismatch(format!(
            "association map {}x{} vs feature image {}x{}",
            assoc.height(),
            assoc.width(),
            feat.height,
            feat.width
        )));
    }
    if acc.dim != feat.dim {
        return Err(Error::ShapeMismatch(format!(
            "accumulator dim {} vs feature dim {}",
            acc.dim, feat.dim
        )));
    }
    for (row, col, hit) in assoc.hits() {
        let face = faces
            .get(hit.triangle as usize)
            .ok_or_else(|| Error::ShapeMismatch(format!(
                "association references triangle {} of {}",
                hit.triangle,
                faces.len()
            )))?;
        let f = feat.pixel(row, col);
        let weights = [hit.weights.w1, hit.weights.w2, hit.weights.w3];
        for (&vertex, &w) in face.iter().zip(&weights) {
            let v = vertex as usize;
            if v >= acc.n {
                return Err(Error::ShapeMismatch(format!(
                    "face vertex {v} outside accumulator size {}",
                    acc.n
                )));
            }
            let rowslice = &mut acc.sums[v * acc.dim..(v + 1) * acc.dim];
            for (dst, &x) in rowslice.iter_mut().zip(f) {
                *dst += w * x as f64;
            }
            acc.weight_totals[v] += w;
        }
    }
    Ok(())
}

/// Elementwise sum of two accumulators (parallel-reduction support).
pub fn merge(
    a: &VertexFeatureAccumulator,
    b: &VertexFeatureAccumulator,
) -> Result<VertexFeatureAccumulator> {
    if a.n != b.n || a.dim != b.dim {
        return Err(Error::ShapeMismatch(format!(
            "accumulator shapes ({}, {}) vs ({}, {})",
            a.n, a.dim, b.n, b.dim
        )));
    }
    let mut out = a.clone();
    for (dst, &src) in out.sums.iter_mut().zip(&b.sums) {
        *dst += src;
    }
    for (dst, &src) in out.weight_totals.iter_mut().zip(&b.weight_totals) {
        *dst += src;
    }
    Ok(out)
}

/// Splat a batch of (association map, feature image) pairs. With
/// `parallel`, each image fills its own accumulator and the results merge
/// in input order, so the outcome does not depend on thread scheduling.
pub fn splat_images(
    pairs: &[(&AssociationMap, &FeatureImage)],
    faces: &[[u32; 3]],
    n_vertices: usize,
    dim: usize,
    parallel: bool,
) -> Result<VertexFeatureAccumulator> {
    if parallel {
        let locals: Vec<Result<VertexFeatureAccumulator>> = pairs
            .par_iter()
            .map(|(assoc, feat)| {
                let mut acc = VertexFeatureAccumulator::new(n_vertices, dim);
                splat_image(assoc, feat, faces, &mut acc)?;
                Ok(acc)
            })
            .collect();
        let mut total = VertexFeatureAccumulator::new(n_vertices, dim);
        for local in locals {
            total = merge(&total, &local?)?;
        }
        Ok(total)
    } else {
        let mut acc = VertexFeatureAccumulator::new(n_vertices, dim);
        for (assoc, feat) in pairs {
            splat_image(assoc, feat, faces, &mut acc)?;
        }
        Ok(acc)
    }
}

/// Finalized per-vertex features: unit rows for covered vertices, zero rows
/// for uncovered ones.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexFeatureStore {
    pub n: usize,
    pub dim: usize,
    pub features: Vec<f32>,
}

impl VertexFeatureStore {
    pub fn row(&self, v: usize) -> &[f32] {
        &self.features[v * self.dim..(v + 1) * self.dim]
    }
}

/// Normalize accumulated sums to unit length. Rows with no received weight
/// (and rows whose sum is exactly zero) stay zero.
pub fn finalize(acc: &VertexFeatureAccumulator) -> VertexFeatureStore {
    let mut features = vec![0.0f32; acc.n * acc.dim];
    for v in 0..acc.n {
        if acc.weight_totals[v] <= 0.0 {
            continue;
        }
        let row = acc.row(v);
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            let dst = &mut features[v * acc.dim..(v + 1) * acc.dim];
            for (d, &x) in dst.iter_mut().zip(row) {
                *d = (x / norm) as f32;
            }
        }
    }
    VertexFeatureStore { n: acc.n, dim: acc.dim, features }
}

/// Fraction of vertices that received any positive splat weight.
pub fn vertex_coverage(acc: &VertexFeatureAccumulator) -> Result<f64> {
    if acc.n == 0 {
        return Err(Error::ShapeMismatch("coverage of an empty accumulator".into()));
    }
    let covered = acc.weight_totals.iter().filter(|&&w| w > 0.0).count();
    Ok(covered as f64 / acc.n as f64)
}

const FMAP_MAGIC: &[u8; 4] = b"FMAP";
const VFTR_MAGIC: &[u8; 4] = b"VFTR";

/// Binary feature image: magic "FMAP", u32 version=1, u32 h, w, d (LE),
/// then h*w*d f32, row-major (row, col, channel).
pub fn write_fmap<W: Write>(feat: &FeatureImage, out: &mut W) -> Result<()> {
    out.write_all(FMAP_MAGIC)?;
    out.write_all(&1u32.to_le_bytes())?;
    out.write_all(&(feat.height as u32).to_le_bytes())?;
    out.write_all(&(feat.width as u32).to_le_bytes())?;
    out.write_all(&(feat.dim as u32).to_le_bytes())?;
    for v in &feat.data {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_fmap<R: Read>(input: &mut R) -> Result<FeatureImage> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != FMAP_MAGIC {
        return Err(Error::InvalidFormat("bad FMAP magic".into()));
    }
    let mut buf = [0u8; 4];
    input.read_exact(&mut buf)?;
    let version = u32::from_le_bytes(buf);
    if version != 1 {
        return Err(Error::InvalidFormat(format!("unsupported FMAP version {version}")));
    }
    let read_u32 = |input: &mut R| -> Result<usize> {
        let mut b = [0u8; 4];
        input.read_exact(&mut b)?;
        Ok(u32::from_le_bytes(b) as usize)
    };
    let height = read_u32(input)?;
    let width = read_u32(input)?;
    let dim = read_u32(input)?;
    if height == 0 || width == 0 || dim == 0 {
        return Err(Error::InvalidFormat("FMAP with zero dimension".into()));
    }
    let count = height
        .checked_mul(width)
        .and_then(|x| x.checked_mul(dim))
        .ok_or_else(|| Error::InvalidFormat("FMAP dimensions overflow".into()))?;
    let mut data = vec![0f32; count];
    let mut bytes = vec![0u8; count * 4];
    input.read_exact(&mut bytes)?;
    for (i, chunk) in bytes.chunks_exact(4).enumerate() {
        data[i] = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
    }
    let feat = FeatureImage { height, width, dim, data };
    feat.validate()?;
    Ok(feat)
}

/// Binary vertex-feature store: magic "VFTR", u32 n, d, then n*d f32.
pub fn write_vftr<W: Write>(store: &VertexFeatureStore, out: &mut W) -> Result<()> {
    out.write_all(VFTR_MAGIC)?;
    out.write_all(&(store.n as u32).to_le_bytes())?;
    out.write_all(&(store.dim as u32).to_le_bytes())?;
    for v in &store.features {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_vftr<R: Read>(input: &mut R) -> Result<VertexFeatureStore> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != VFTR_MAGIC {
        return Err(Error::InvalidFormat("bad VFTR magic".into()));
    }
    let mut buf = [0u8; 4];
    input.read_exact(&mut buf)?;
    let n = u32::from_le_bytes(buf) as usize;
    input.read_exact(&mut buf)?;
    let dim = u32::from_le_bytes(buf) as usize;
    let count = n
        .checked_mul(dim)
        .ok_or_else(|| Error::InvalidFormat("VFTR dimensions overflow".into()))?;
    let mut features = vec![0f32; count];
    let mut bytes = vec![0u8; count * 4];
    input.read_exact(&mut bytes)?;
    for (i, chunk) in bytes.chunks_exact(4).enumerate() {
        features[i] = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
    }
    Ok(VertexFeatureStore { n, dim, features })
}
