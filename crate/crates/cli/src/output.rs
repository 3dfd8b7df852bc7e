//! Run directories, the manifest and the binary matrix format.
//!
//! Matrix files (`.cmat`) are little-endian:
//!
//! | bytes | content |
//! |-------|---------|
//! | 4     | magic `CMAT` |
//! | 4     | format version (u32, currently 1) |
//! | 8     | rows (u64) |
//! | 8     | cols (u64) |
//! | 16 x rows x cols | entries in row-major order, each `re` then `im` as f64 |

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use photoconv_core::{Complex64, ComplexMatrix};
use sha2::{Digest, Sha256};

pub const CMAT_MAGIC: &[u8; 4] = b"CMAT";
pub const CMAT_VERSION: u32 = 1;
pub const MANIFEST: &str = "manifest.txt";

/// An output directory that records every file written into it.
#[derive(Debug)]
pub struct RunDir {
    root: PathBuf,
    files: Vec<String>,
}

impl RunDir {
    /// Creates `root`, refusing to reuse a directory that already has
    /// content.
    pub fn create(root: &Path) -> Result<Self> {
        if root.exists() {
            let mut entries = fs::read_dir(root).with_context(|| format!("reading {}", root.display()))?;
            if entries.next().is_some() {
                bail!("output directory {} is not empty; choose another --out", root.display());
            }
        }
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.path(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.files.push(name.to_string());
        Ok(path)
    }

    /// Writes `manifest.txt`: one `sha256  bytes  name` line per file.
    pub fn finish(self) -> Result<PathBuf> {
        let mut lines = String::new();
        for name in &self.files {
            let path = self.path(name);
            let bytes = fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
            let digest = hex::encode(Sha256::digest(&bytes));
            lines.push_str(&format!("{digest}  {}  {name}\n", bytes.len()));
        }
        let path = self.path(MANIFEST);
        fs::write(&path, lines).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

pub fn encode_cmat(m: &ComplexMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(24 + 16 * m.len());
    out.extend_from_slice(CMAT_MAGIC);
    out.extend_from_slice(&CMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(m.nrows() as u64).to_le_bytes());
    out.extend_from_slice(&(m.ncols() as u64).to_le_bytes());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let z = m[(r, c)];
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out
}

pub fn decode_cmat<R: Read>(mut input: R) -> Result<ComplexMatrix> {
    let mut header = [0u8; 24];
    input.read_exact(&mut header).context("truncated matrix header")?;
    if &header[..4] != CMAT_MAGIC {
        bail!("not a CMAT file");
    }
    let version = u32::from_le_bytes(header[4..8].try_into()?);
    if version != CMAT_VERSION {
        bail!("unsupported CMAT version {version}");
    }
    let rows = u64::from_le_bytes(header[8..16].try_into()?) as usize;
    let cols = u64::from_le_bytes(header[16..24].try_into()?) as usize;
    let mut body = Vec::new();
    input.read_to_end(&mut body)?;
    if body.len() != 16 * rows * cols {
        bail!("matrix body has {} bytes, expected {}", body.len(), 16 * rows * cols);
    }
    let f = |k: usize| f64::from_le_bytes(body[8 * k..8 * k + 8].try_into().expect("8 bytes"));
    Ok(ComplexMatrix::from_fn(rows, cols, |r, c| {
        let k = 2 * (r * cols + c);
        Complex64::new(f(k), f(k + 1))
    }))
}

/// Round-trippable decimal form of an `f64`.
pub fn full(x: f64) -> String {
    format!("{x:.16e}")
}

/// `key = value` lines for human-readable summaries.
pub fn summary(pairs: &[(&str, String)]) -> String {
    let mut s = String::new();
    for (k, v) in pairs {
        s.push_str(&format!("{k} = {v}\n"));
    }
    s
}
