use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::idx::{load_idx, IdxKind, IdxPart};
use crate::error::{Error, Result};

pub const PIXELS: usize = 784;
pub const CLASSES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn expected_len(self) -> usize {
        match self {
            Split::Train => 60_000,
            Split::Test => 10_000,
        }
    }

    fn prefix(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "t10k",
        }
    }
}

/// Labelled real-valued samples stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    width: usize,
    classes: usize,
    values: Vec<f64>,
    labels: Vec<u8>,
}

impl Dataset {
    pub fn new(width: usize, classes: usize, values: Vec<f64>, labels: Vec<u8>) -> Result<Self> {
        if width == 0 || values.len() != width * labels.len() {
            return Err(Error::shape(
                format!("{} x {width} values", labels.len()),
                values.len(),
            ));
        }
        if let Some(&bad) = labels.iter().find(|&&l| usize::from(l) >= classes) {
            return Err(Error::LabelOutOfRange {
                label: bad.into(),
                classes,
            });
        }
        Ok(Self {
            width,
            classes,
            values,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        &self.values[i * self.width..(i + 1) * self.width]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i].into()
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// The first `n` samples (all of them when `n >= len`).
    pub fn head(&self, n: usize) -> Self {
        let n = n.min(self.len());
        Self {
            width: self.width,
            classes: self.classes,
            values: self.values[..n * self.width].to_vec(),
            labels: self.labels[..n].to_vec(),
        }
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        let mut values = Vec::with_capacity(indices.len() * self.width);
        for &i in indices {
            values.extend_from_slice(self.sample(i));
        }
        Self {
            width: self.width,
            classes: self.classes,
            values,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// `n` samples drawn without replacement using `seed`.
    pub fn random_subset(&self, n: usize, seed: u64) -> Self {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        idx.truncate(n.min(self.len()));
        self.select(&idx)
    }

    /// Images multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * factor).collect(),
            ..self.clone()
        }
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes];
        for &l in &self.labels {
            counts[usize::from(l)] += 1;
        }
        counts
    }
}

/// Locates `train-images-idx3-ubyte` style files (optionally `.gz`) in a
/// directory.
pub fn idx_path(dir: &Path, split: Split, kind: IdxKind) -> PathBuf {
    let stem = match kind {
        IdxKind::Images => format!("{}-images-idx3-ubyte", split.prefix()),
        IdxKind::Labels => format!("{}-labels-idx1-ubyte", split.prefix()),
    };
    let plain = dir.join(&stem);
    if plain.exists() {
        return plain;
    }
    let gz = dir.join(format!("{stem}.gz"));
    if gz.exists() {
        gz
    } else {
        plain
    }
}

/// Loads one split of an MNIST-format dataset from `dir` and checks that it
/// has the standard size.
pub fn load_mnist(dir: &Path, split: Split) -> Result<Dataset> {
    load_split(dir, split, true)
}

/// As [`load_mnist`]; with `strict = false` any sample count is accepted.
pub fn load_split(dir: &Path, split: Split, strict: bool) -> Result<Dataset> {
    let images_path = idx_path(dir, split, IdxKind::Images);
    let labels_path = idx_path(dir, split, IdxKind::Labels);
    let IdxPart::Images { count, pixels } = load_idx(&images_path, IdxKind::Images)? else {
        unreachable!("image loader returns images")
    };
    let IdxPart::Labels(labels) = load_idx(&labels_path, IdxKind::Labels)? else {
        unreachable!("label loader returns labels")
    };
    if count != labels.len() {
        return Err(Error::DimensionMismatch {
            path: labels_path,
            detail: format!("{} labels for {count} images", labels.len()),
        });
    }
    if strict && count != split.expected_len() {
        return Err(Error::DimensionMismatch {
            path: images_path,
            detail: format!("{count} samples, expected {} for {split:?}", split.expected_len()),
        });
    }
    Dataset::new(PIXELS, CLASSES, pixels, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Dataset {
        Dataset::new(2, 3, vec![0.0, 1.0, 0.5, 0.5, 1.0, 0.0], vec![0, 2, 1]).unwrap()
    }

    #[test]
    fn accessors_and_subsets() {
        let d = toy();
        assert_eq!(d.len(), 3);
        assert_eq!(d.sample(1), &[0.5, 0.5]);
        assert_eq!(d.head(2).labels(), &[0, 2]);
        assert_eq!(d.select(&[2, 0]).sample(0), &[1.0, 0.0]);
        assert_eq!(d.random_subset(3, 7).class_counts(), vec![1, 1, 1]);
        assert_eq!(d.random_subset(2, 7), d.random_subset(2, 7));
        assert_eq!(d.scaled(0.5).sample(0), &[0.0, 0.5]);
    }

    #[test]
    fn validation() {
        assert!(Dataset::new(2, 3, vec![0.0; 5], vec![0, 1]).is_err());
        assert!(matches!(
            Dataset::new(1, 3, vec![0.0], vec![3]),
            Err(Error::LabelOutOfRange { label: 3, .. })
        ));
    }

    #[test]
    fn split_size_is_enforced() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("t10k-images-idx3-ubyte"),
            super::super::idx::encode_idx_images(&[0.0; 784], 1),
        )
        .unwrap();
        std::fs::write(
            dir.path().join("t10k-labels-idx1-ubyte"),
            super::super::idx::encode_idx_labels(&[3]),
        )
        .unwrap();
        assert!(matches!(load_mnist(dir.path(), Split::Test), Err(Error::DimensionMismatch { .. })));
        let d = load_split(dir.path(), Split::Test, false).unwrap();
        assert_eq!(d.label(0), 3);
    }
}
