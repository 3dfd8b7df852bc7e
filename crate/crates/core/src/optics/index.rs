use crate::error::{Error, Result};

/// Symmetric index range `n0 ..= n0 + N - 1` with `n0 = -N/2` (even `N`) or
/// `-(N-1)/2` (odd `N`). Always contains 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CenteredIndexRange {
    size: usize,
    offset: i64,
}

impl CenteredIndexRange {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidSize("index range needs N >= 1".into()));
        }
        let offset = -((size / 2) as i64);
        Ok(Self { size, offset })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// `n0`, the most negative index.
    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn last(&self) -> i64 {
        self.offset + self.size as i64 - 1
    }

    /// Index stored at array position `pos`.
    pub fn index_at(&self, pos: usize) -> i64 {
        self.offset + pos as i64
    }

    /// Array position of index `n`, if it lies in the range.
    pub fn position_of(&self, n: i64) -> Option<usize> {
        let p = n - self.offset;
        (0..self.size as i64).contains(&p).then_some(p as usize)
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> + Clone {
        self.offset..=self.last()
    }

    /// Largest `|n|` in the range (equals `|n0|`).
    pub fn max_abs(&self) -> u64 {
        self.offset.unsigned_abs()
    }
}
