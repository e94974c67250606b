use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// An ordered, non-empty list of square matrices of one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixFamily {
    matrices: Vec<Matrix>,
    labels: Vec<String>,
}

impl MatrixFamily {
    pub fn new(matrices: Vec<Matrix>) -> Result<Self> {
        let labels = (1..=matrices.len()).map(|i| format!("A{i}")).collect();
        Self::with_labels(matrices, labels)
    }

    pub fn with_labels(matrices: Vec<Matrix>, labels: Vec<String>) -> Result<Self> {
        let Some(first) = matrices.first() else {
            return Err(Error::InvalidInput("family must contain at least one matrix".into()));
        };
        let d = first.nrows();
        if d == 0 {
            return Err(Error::DimensionMismatch("matrices must have positive dimension".into()));
        }
        for (i, m) in matrices.iter().enumerate() {
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::DimensionMismatch(format!(
                    "matrix {} is {}x{}, expected {d}x{d}",
                    i + 1,
                    m.nrows(),
                    m.ncols()
                )));
            }
            if m.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput(format!("matrix {} has non-finite entries", i + 1)));
            }
        }
        if labels.len() != matrices.len() {
            return Err(Error::InvalidInput("one label per matrix required".into()));
        }
        Ok(MatrixFamily { matrices, labels })
    }

    pub fn dim(&self) -> usize {
        self.matrices[0].nrows()
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&Matrix> {
        self.matrices.get(i)
    }

    pub fn matrices(&self) -> &[Matrix] {
        &self.matrices
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn iter(&self) -> impl Iterator<Item = &Matrix> {
        self.matrices.iter()
    }

    /// Every matrix multiplied by `c`.
    pub fn scaled(&self, c: f64) -> MatrixFamily {
        MatrixFamily {
            matrices: self.matrices.iter().map(|m| m * c).collect(),
            labels: self.labels.clone(),
        }
    }

    pub fn transposed(&self) -> MatrixFamily {
        MatrixFamily {
            matrices: self.matrices.iter().map(|m| m.transpose()).collect(),
            labels: self.labels.clone(),
        }
    }

    /// Hex SHA-256 over dimensions and entry bits.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.dim() as u64).to_le_bytes());
        h.update((self.len() as u64).to_le_bytes());
        for m in &self.matrices {
            for x in m.iter() {
                h.update(x.to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }
}
