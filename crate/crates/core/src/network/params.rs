//! Named parameter tensors, initialization, and the checkpoint format.

use crate::error::{Error, Result};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::io::{Read, Write};

/// A named f64 tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub name: String,
    pub dims: Vec<usize>,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}

/// Ordered collection of parameter tensors. Order is the registration
/// order and is stable, so flat indexing is well-defined for optimizers
/// and finite-difference probes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamSet {
    tensors: Vec<Tensor>,
}

impl ParamSet {
    pub fn add(&mut self, name: impl Into<String>, dims: Vec<usize>, data: Vec<f64>) -> usize {
        debug_assert_eq!(dims.iter().product::<usize>(), data.len());
        self.tensors.push(Tensor { name: name.into(), dims, data });
        self.tensors.len() - 1
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn tensor(&self, idx: usize) -> &Tensor {
        &self.tensors[idx]
    }

    pub fn tensor_mut(&mut self, idx: usize) -> &mut Tensor {
        &mut self.tensors[idx]
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    /// Total scalar count across all tensors.
    pub fn flat_len(&self) -> usize {
        self.tensors.iter().map(|t| t.data.len()).sum()
    }

    pub fn get_flat(&self, mut i: usize) -> f64 {
        for t in &self.tensors {
            if i < t.data.len() {
                return t.data[i];
            }
            i -= t.data.len();
        }
        panic!("flat index out of range");
    }

    pub fn set_flat(&mut self, mut i: usize, value: f64) {
        for t in &mut self.tensors {
            if i < t.data.len() {
                t.data[i] = value;
                return;
            }
            i -= t.data.len();
        }
        panic!("flat index out of range");
    }
}

/// Handle to one affine layer's tensors inside a [`ParamSet`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineRef {
    pub weight: usize,
    pub bias: usize,
    pub in_dim: usize,
    pub out_dim: usize,
}

/// Register an affine layer with Glorot-uniform weights and zero biases.
pub fn init_affine(
    params: &mut ParamSet,
    rng: &mut ChaCha8Rng,
    name: &str,
    in_dim: usize,
    out_dim: usize,
) -> AffineRef {
    let bound = (6.0 / (in_dim + out_dim) as f64).sqrt();
    let weight: Vec<f64> = (0..in_dim * out_dim)
        .map(|_| rng.random_range(-bound..bound))
        .collect();
    let w = params.add(format!("{name}.w"), vec![out_dim, in_dim], weight);
    let b = params.add(format!("{name}.b"), vec![out_dim], vec![0.0; out_dim]);
    AffineRef { weight: w, bias: b, in_dim, out_dim }
}

/// Per-tensor gradient buffers aligned with a [`ParamSet`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub data: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(params: &ParamSet) -> Self {
        Gradients { data: params.tensors().iter().map(|t| vec![0.0; t.data.len()]).collect() }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|t| t.iter().all(|x| x.is_finite()))
    }

    pub fn get_flat(&self, mut i: usize) -> f64 {
        for t in &self.data {
            if i < t.len() {
                return t[i];
            }
            i -= t.len();
        }
        panic!("flat index out of range");
    }

    /// Elementwise add another gradient set (batch accumulation).
    pub fn accumulate(&mut self, other: &Gradients) {
        for (dst, src) in self.data.iter_mut().zip(&other.data) {
            for (d, &s) in dst.iter_mut().zip(src) {
                *d += s;
            }
        }
    }
}

const PNET_MAGIC: &[u8; 4] = b"PNET";

/// Checkpoint: magic "PNET", u32 version, u32 tensor count, then per tensor
/// u16 name length, name bytes, u32 rank, rank x u32 dims, f32 data.
pub fn write_pnet<W: Write>(params: &ParamSet, out: &mut W) -> Result<()> {
    out.write_all(PNET_MAGIC)?;
    out.write_all(&1u32.to_le_bytes())?;
    out.write_all(&(params.len() as u32).to_le_bytes())?;
    for t in params.tensors() {
        let name = t.name.as_bytes();
        if name.len() > u16::MAX as usize {
            return Err(Error::InvalidFormat("tensor name too long".into()));
        }
        out.write_all(&(name.len() as u16).to_le_bytes())?;
        out.write_all(name)?;
        out.write_all(&(t.dims.len() as u32).to_le_bytes())?;
        for &d in &t.dims {
            out.write_all(&(d as u32).to_le_bytes())?;
        }
        for &x in &t.data {
            out.write_all(&(x as f32).to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_pnet<R: Read>(input: &mut R) -> Result<ParamSet> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != PNET_MAGIC {
        return Err(Error::InvalidFormat("bad PNET magic".into()));
    }
    let mut b4 = [0u8; 4];
    input.read_exact(&mut b4)?;
    let version = u32::from_le_bytes(b4);
    if version != 1 {
        return Err(Error::InvalidFormat(format!("unsupported PNET version {version}")));
    }
    input.read_exact(&mut b4)?;
    let count = u32::from_le_bytes(b4) as usize;
    let mut params = ParamSet::default();
    for _ in 0..count {
        let mut b2 = [0u8; 2];
        input.read_exact(&mut b2)?;
        let name_len = u16::from_le_bytes(b2) as usize;
        let mut name = vec![0u8; name_len];
        input.read_exact(&mut name)?;
        let name = String::from_utf8(name)
            .map_err(|_| Error::InvalidFormat("tensor name is not UTF-8".into()))?;
        input.read_exact(&mut b4)?;
        let rank = u32::from_le_bytes(b4) as usize;
        let mut dims = Vec::with_capacity(rank);
        for _ in 0..rank {
            input.read_exact(&mut b4)?;
            dims.push(u32::from_le_bytes(b4) as usize);
        }
        let len: usize = dims.iter().product();
        let mut bytes = vec![0u8; len * 4];
        input.read_exact(&mut bytes)?;
        let data: Vec<f64> = bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect();
        params.add(name, dims, data);
    }
    Ok(params)
}

/// Copy checkpoint values into an existing parameter set by tensor name.
/// Shapes must match exactly.
pub fn load_into(params: &mut ParamSet, loaded: &ParamSet) -> Result<()> {
    if params.len() != loaded.len() {
        return Err(Error::ShapeMismatch(format!(
            "checkpoint has {} tensors, model expects {}",
            loaded.len(),
            params.len()
        )));
    }
    for idx in 0..params.len() {
        let src = loaded
            .tensors()
            .iter()
            .find(|t| t.name == params.tensor(idx).name)
            .ok_or_else(|| Error::ShapeMismatch(format!(
                "checkpoint is missing tensor '{}'",
                params.tensor(idx).name
            )))?;
        if src.dims != params.tensor(idx).dims {
            return Err(Error::ShapeMismatch(format!(
                "tensor '{}' has dims {:?}, expected {:?}",
                src.name,
                src.dims,
                params.tensor(idx).dims
            )));
        }
        params.tensor_mut(idx).data.copy_from_slice(&src.data);
    }
    Ok(())
}
