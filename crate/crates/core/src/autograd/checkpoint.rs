//! Binary parameter checkpoints.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic      8 bytes  "PCNNCKPT"
//! version    u32      = 1
//! count      u32      number of parameters
//! repeated `count` times:
//!   name_len u32, name (UTF-8, name_len bytes)
//!   role     u8       0 mask_amplitude, 1 mask_phase, 2 weight, 3 bias, 4 output_scale
//!   trainable u8      0 or 1
//!   ndim     u32, then ndim x u64 dimensions
//!   values   prod(dims) x f64
//! ```

use std::io::{Read, Write};

use super::param::{ParamRole, ParameterStore};
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"PCNNCKPT";
pub const CHECKPOINT_VERSION: u32 = 1;

pub fn write_checkpoint<W: Write>(store: &ParameterStore, mut out: W) -> Result<()> {
    let io = |e| Error::Checkpoint(format!("write failed: {e}"));
    out.write_all(CHECKPOINT_MAGIC).map_err(io)?;
    out.write_all(&CHECKPOINT_VERSION.to_le_bytes()).map_err(io)?;
    out.write_all(&(store.len() as u32).to_le_bytes()).map_err(io)?;
    for (_, p) in store.iter() {
        let name = p.name.as_bytes();
        out.write_all(&(name.len() as u32).to_le_bytes()).map_err(io)?;
        out.write_all(name).map_err(io)?;
        out.write_all(&[p.role.tag(), u8::from(p.trainable)]).map_err(io)?;
        out.write_all(&(p.shape.len() as u32).to_le_bytes()).map_err(io)?;
        for &d in &p.shape {
            out.write_all(&(d as u64).to_le_bytes()).map_err(io)?;
        }
        for v in &p.values {
            out.write_all(&v.to_le_bytes()).map_err(io)?;
        }
    }
    Ok(())
}

pub fn read_checkpoint<R: Read>(mut input: R) -> Result<ParameterStore> {
    let mut magic = [0u8; 8];
    read_exact(&mut input, &mut magic)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(Error::Checkpoint("not a checkpoint (bad magic)".into()));
    }
    let version = read_u32(&mut input)?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let count = read_u32(&mut input)?;
    let mut store = ParameterStore::new();
    for _ in 0..count {
        let len = read_u32(&mut input)? as usize;
        let mut name = vec![0u8; len];
        read_exact(&mut input, &mut name)?;
        let name = String::from_utf8(name).map_err(|_| Error::Checkpoint("parameter name is not UTF-8".into()))?;
        let mut flags = [0u8; 2];
        read_exact(&mut input, &mut flags)?;
        let role = ParamRole::from_tag(flags[0]).ok_or_else(|| Error::Checkpoint(format!("unknown role tag {}", flags[0])))?;
        let ndim = read_u32(&mut input)? as usize;
        let mut shape = Vec::with_capacity(ndim);
        for _ in 0..ndim {
            let mut b = [0u8; 8];
            read_exact(&mut input, &mut b)?;
            shape.push(u64::from_le_bytes(b) as usize);
        }
        let n: usize = shape.iter().product();
        let mut values = Vec::with_capacity(n);
        for _ in 0..n {
            let mut b = [0u8; 8];
            read_exact(&mut input, &mut b)?;
            values.push(f64::from_le_bytes(b));
        }
        let id = store.add(name, shape, values, role)?;
        store.get_mut(id).trainable = flags[1] != 0;
    }
    Ok(store)
}

impl ParameterStore {
    /// Copies values from `other`, which must hold the same names and shapes
    /// in the same order.
    pub fn load_values_from(&mut self, other: &ParameterStore) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::Checkpoint(format!(
                "checkpoint has {} parameters, model has {}",
                other.len(),
                self.len()
            )));
        }
        for ((_, dst), (_, src)) in self.iter_mut().zip(other.iter()) {
            if dst.name != src.name || dst.shape != src.shape {
                return Err(Error::Checkpoint(format!(
                    "parameter `{}` {:?} does not match checkpoint `{}` {:?}",
                    dst.name, dst.shape, src.name, src.shape
                )));
            }
            dst.values.copy_from_slice(&src.values);
        }
        Ok(())
    }
}

fn read_exact<R: Read>(input: &mut R, buf: &mut [u8]) -> Result<()> {
    input
        .read_exact(buf)
        .map_err(|e| Error::Checkpoint(format!("truncated checkpoint: {e}")))
}

fn read_u32<R: Read>(input: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(input, &mut b)?;
    Ok(u32::from_le_bytes(b))
}
