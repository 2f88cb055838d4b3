//! Binary tensor checkpoints.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "DDPGCKPT"            8-byte magic
//! version               u32
//! repeated until EOF:
//!   name_len            u32
//!   name                UTF-8, name_len bytes
//!   rank                u32
//!   dims                rank × u32
//!   values              product(dims) × f64 (IEEE-754), row-major
//! ```

use std::collections::BTreeMap;
use std::io::{Read, Write};

use crate::error::{Error, Result};

use super::mlp::{DenseLayer, Mlp};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"DDPGCKPT";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    pub name: String,
    pub dims: Vec<u32>,
    pub values: Vec<f64>,
}

impl Tensor {
    pub fn new(name: impl Into<String>, dims: Vec<u32>, values: Vec<f64>) -> Result<Self> {
        let expected: usize = dims.iter().map(|&d| d as usize).product();
        if expected != values.len() {
            return Err(Error::DimensionMismatch {
                expected,
                actual: values.len(),
            });
        }
        Ok(Self {
            name: name.into(),
            dims,
            values,
        })
    }

    pub fn vector(name: impl Into<String>, values: Vec<f64>) -> Self {
        let dims = vec![values.len() as u32];
        Self {
            name: name.into(),
            dims,
            values,
        }
    }
}

pub fn write_tensors<W: Write>(w: &mut W, tensors: &[Tensor]) -> Result<()> {
    w.write_all(CHECKPOINT_MAGIC)?;
    w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    for t in tensors {
        let name = t.name.as_bytes();
        w.write_all(&(name.len() as u32).to_le_bytes())?;
        w.write_all(name)?;
        w.write_all(&(t.dims.len() as u32).to_le_bytes())?;
        for d in &t.dims {
            w.write_all(&d.to_le_bytes())?;
        }
        for v in &t.values {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_tensors<R: Read>(r: &mut R) -> Result<Vec<Tensor>> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let mut cur = Cursor { bytes: &bytes, pos: 0 };

    let magic = cur.take(8, "magic")?;
    if magic != CHECKPOINT_MAGIC {
        return Err(Error::Format {
            offset: 0,
            message: "bad magic".into(),
        });
    }
    let version_at = cur.pos;
    let version = cur.u32("format version")?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::Format {
            offset: version_at as u64,
            message: format!("unsupported version {version}"),
        });
    }

    let mut tensors = Vec::new();
    while cur.pos < bytes.len() {
        let name_len = cur.u32("name length")? as usize;
        let name_at = cur.pos;
        let name = std::str::from_utf8(cur.take(name_len, "tensor name")?)
            .map_err(|_| Error::Format {
                offset: name_at as u64,
                message: "tensor name is not UTF-8".into(),
            })?
            .to_owned();
        let rank = cur.u32("rank")? as usize;
        let mut dims = Vec::with_capacity(rank.min(8));
        for _ in 0..rank {
            dims.push(cur.u32("dimension")?);
        }
        let count = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d as usize))
            .filter(|&c| c.checked_mul(8).is_some_and(|b| b <= bytes.len() - cur.pos))
            .ok_or_else(|| Error::Format {
                offset: cur.pos as u64,
                message: format!("tensor '{name}' extends past end of file"),
            })?;
        let raw = cur.take(count * 8, "tensor values")?;
        let values = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        tensors.push(Tensor { name, dims, values });
    }
    Ok(tensors)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::Format {
                offset: self.pos as u64,
                message: format!("truncated {what}"),
            });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }
}

impl Mlp {
    /// Tensors named `{prefix}.L{i}.w` (`out × in`) and `{prefix}.L{i}.b`.
    pub fn to_tensors(&self, prefix: &str) -> Vec<Tensor> {
        let mut out = Vec::with_capacity(2 * self.layers().len());
        for (i, l) in self.layers().iter().enumerate() {
            out.push(Tensor {
                name: format!("{prefix}.L{i}.w"),
                dims: vec![l.output_dim() as u32, l.input_dim() as u32],
                values: l.weights().to_vec(),
            });
            out.push(Tensor::vector(format!("{prefix}.L{i}.b"), l.biases().to_vec()));
        }
        out
    }

    /// Overwrites parameters from tensors written by [`Mlp::to_tensors`].
    /// Shapes must match this network exactly.
    pub fn load_tensors(&mut self, prefix: &str, tensors: &BTreeMap<String, Tensor>) -> Result<()> {
        let mut layers: Vec<DenseLayer> = self.layers().to_vec();
        for (i, l) in layers.iter_mut().enumerate() {
            let w = lookup(tensors, &format!("{prefix}.L{i}.w"))?;
            let b = lookup(tensors, &format!("{prefix}.L{i}.b"))?;
            if w.dims != [l.output_dim() as u32, l.input_dim() as u32] {
                return Err(Error::invalid(format!(
                    "tensor {} has shape {:?}, expected [{}, {}]",
                    w.name,
                    w.dims,
                    l.output_dim(),
                    l.input_dim()
                )));
            }
            if b.dims != [l.output_dim() as u32] {
                return Err(Error::invalid(format!(
                    "tensor {} has shape {:?}, expected [{}]",
                    b.name,
                    b.dims,
                    l.output_dim()
                )));
            }
            l.weights_mut().copy_from_slice(&w.values);
            l.biases_mut().copy_from_slice(&b.values);
        }
        *self = Mlp::from_layers(layers)?;
        Ok(())
    }
}

fn lookup<'a>(tensors: &'a BTreeMap<String, Tensor>, name: &str) -> Result<&'a Tensor> {
    tensors
        .get(name)
        .ok_or_else(|| Error::invalid(format!("checkpoint has no tensor '{name}'")))
}
