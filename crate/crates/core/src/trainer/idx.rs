//! IDX container reader for the MNIST family, with transparent gzip support.

use std::fs;
use std::io::Read;
use std::path::Path;

use flate2::read::GzDecoder;

use crate::error::{Error, Result};

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;
const IMAGE_SIDE: usize = 28;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IdxKind {
    Images,
    Labels,
}

/// Contents of one IDX file.
#[derive(Clone, Debug, PartialEq)]
pub enum IdxPart {
    /// `count` images of 784 pixels scaled to `[0, 1]`, stored row-major.
    Images { count: usize, pixels: Vec<f64> },
    Labels(Vec<u8>),
}

/// Reads an IDX images (`0x803`, 28x28) or labels (`0x801`) file, gzipped
/// or not.
pub fn load_idx(path: &Path, kind: IdxKind) -> Result<IdxPart> {
    let raw = fs::read(path).map_err(|e| Error::io(path, e))?;
    let bytes = if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(&raw[..])
            .read_to_end(&mut out)
            .map_err(|e| Error::io(path, e))?;
        out
    } else {
        raw
    };
    parse_idx(path, &bytes, kind)
}

pub(crate) fn parse_idx(path: &Path, bytes: &[u8], kind: IdxKind) -> Result<IdxPart> {
    let (magic, ndim) = match kind {
        IdxKind::Images => (IMAGES_MAGIC, 3),
        IdxKind::Labels => (LABELS_MAGIC, 1),
    };
    let header = 4 + 4 * ndim;
    if bytes.len() < 4 {
        return Err(Error::Truncated {
            path: path.into(),
            expected: header,
            actual: bytes.len(),
        });
    }
    let found = be_u32(bytes, 0);
    if found != magic {
        return Err(Error::BadMagic {
            path: path.into(),
            expected: magic,
            found,
        });
    }
    if bytes.len() < header {
        return Err(Error::Truncated {
            path: path.into(),
            expected: header,
            actual: bytes.len(),
        });
    }
    let dims: Vec<usize> = (0..ndim).map(|i| be_u32(bytes, 4 + 4 * i) as usize).collect();
    if kind == IdxKind::Images && (dims[1] != IMAGE_SIDE || dims[2] != IMAGE_SIDE) {
        return Err(Error::DimensionMismatch {
            path: path.into(),
            detail: format!("images are {}x{}, expected {IMAGE_SIDE}x{IMAGE_SIDE}", dims[1], dims[2]),
        });
    }
    let body: usize = dims.iter().product();
    if bytes.len() < header + body {
        return Err(Error::Truncated {
            path: path.into(),
            expected: header + body,
            actual: bytes.len(),
        });
    }
    let payload = &bytes[header..header + body];
    Ok(match kind {
        IdxKind::Images => IdxPart::Images {
            count: dims[0],
            pixels: payload.iter().map(|&p| f64::from(p) / 255.0).collect(),
        },
        IdxKind::Labels => IdxPart::Labels(payload.to_vec()),
    })
}

fn be_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_be_bytes([bytes[at], bytes[at + 1], bytes[at + 2], bytes[at + 3]])
}

/// Serialises images (values in `[0, 1]`, rounded to bytes) in IDX form.
pub fn encode_idx_images(pixels: &[f64], count: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + pixels.len());
    out.extend_from_slice(&IMAGES_MAGIC.to_be_bytes());
    for d in [count, IMAGE_SIDE, IMAGE_SIDE] {
        out.extend_from_slice(&(d as u32).to_be_bytes());
    }
    out.extend(pixels.iter().map(|p| (p.clamp(0.0, 1.0) * 255.0).round() as u8));
    out
}

pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn round_trip_plain_and_gzip() {
        let dir = tempfile::tempdir().unwrap();
        let pixels: Vec<f64> = (0..2 * 784).map(|i| (i % 256) as f64 / 255.0).collect();
        let plain = dir.path().join("img");
        fs::write(&plain, encode_idx_images(&pixels, 2)).unwrap();
        let gz = dir.path().join("img.gz");
        let mut enc = flate2::write::GzEncoder::new(Vec::new(), flate2::Compression::fast());
        enc.write_all(&encode_idx_images(&pixels, 2)).unwrap();
        fs::write(&gz, enc.finish().unwrap()).unwrap();
        for p in [plain, gz] {
            match load_idx(&p, IdxKind::Images).unwrap() {
                IdxPart::Images { count, pixels: got } => {
                    assert_eq!(count, 2);
                    assert_eq!(got, pixels);
                }
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn distinct_errors() {
        let p = Path::new("x");
        let mut bad = encode_idx_labels(&[1, 2]);
        bad[3] = 0x02;
        assert!(matches!(parse_idx(p, &bad, IdxKind::Labels), Err(Error::BadMagic { found: 0x802, .. })));
        let short = encode_idx_labels(&[1, 2, 3]);
        assert!(matches!(
            parse_idx(p, &short[..short.len() - 1], IdxKind::Labels),
            Err(Error::Truncated { .. })
        ));
        let mut wrong = encode_idx_images(&[0.0; 784], 1);
        wrong[11] = 27;
        assert!(matches!(parse_idx(p, &wrong, IdxKind::Images), Err(Error::DimensionMismatch { .. })));
        let err = load_idx(Path::new("/definitely/missing"), IdxKind::Labels).unwrap_err();
        assert!(err.to_string().contains("/definitely/missing"));
    }
}
