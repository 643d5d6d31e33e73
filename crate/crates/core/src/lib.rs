//! Point-based 3D semantic segmentation pipeline.
//!
//! The library covers the full path from a labeled triangle mesh to a
//! per-vertex semantic prediction:
//!
//! 1. [`geometry`] — triangle meshes, ASCII PLY I/O, vertex normals,
//!    barycentric coordinates.
//! 2. [`camera`] / [`raycast`] — pinhole cameras, BVH-accelerated ray
//!    casting, per-pixel association maps.
//! 3. [`backproject`] — splatting per-pixel feature vectors onto mesh
//!    vertices and normalizing the accumulated result.
//! 4. [`posegen`] — synthetic camera-pose grids and greedy max-coverage
//!    image selection.
//! 5. [`sampling`] — sub-volume extraction, random / farthest-point
//!    sampling, ball queries, interpolation weights, augmentation.
//! 6. [`network`] — local + global point-set encoders, fusion decoder,
//!    weighted cross-entropy, hand-rolled reverse-mode gradients, Adam.
//! 7. [`infer`] / [`eval`] — overlapping sliding-window inference with
//!    class-probability summation, and mIoU evaluation.
//! 8. [`scene`] / [`synthfeat`] — synthetic labeled room generator and a
//!    synthetic per-pixel feature extractor used in place of a learned
//!    2D network.

pub mod backproject;
pub mod camera;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod infer;
pub mod math;
pub mod network;
pub mod posegen;
pub mod raycast;
pub mod sampling;
pub mod scene;
pub mod synthfeat;

pub use error::{Error, Result};
