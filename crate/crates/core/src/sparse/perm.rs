use crate::error::{Error, Result};

/// A bijection on `0..n`. `forward[i]` is the destination of index `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    forward: Vec<usize>,
    inverse: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self {
            forward: (0..n).collect(),
            inverse: (0..n).collect(),
        }
    }

    /// Builds from the destination array, validating bijectivity.
    pub fn from_forward(forward: Vec<usize>) -> Result<Self> {
        let n = forward.len();
        let mut inverse = vec![usize::MAX; n];
        for (i, &d) in forward.iter().enumerate() {
            if d >= n || inverse[d] != usize::MAX {
                return Err(Error::InvalidStructure(format!(
                    "not a permutation: index {i} maps to {d}"
                )));
            }
            inverse[d] = i;
        }
        Ok(Self { forward, inverse })
    }

    /// Builds from an order list: `order[k]` is the index placed at position `k`.
    pub fn from_order(order: Vec<usize>) -> Result<Self> {
        let p = Self::from_forward(order)?;
        Ok(p.inverted())
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn forward(&self) -> &[usize] {
        &self.forward
    }

    pub fn inverse(&self) -> &[usize] {
        &self.inverse
    }

    pub fn apply(&self, i: usize) -> usize {
        self.forward[i]
    }

    pub fn inverted(&self) -> Self {
        Self {
            forward: self.inverse.clone(),
            inverse: self.forward.clone(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.forward.iter().enumerate().all(|(i, &d)| i == d)
    }

    /// `self` applied after `first`.
    pub fn compose(&self, first: &Permutation) -> Self {
        let forward = first.forward.iter().map(|&d| self.forward[d]).collect();
        Self::from_forward(forward).expect("composition of permutations")
    }
}

/// Row and column equilibration factors, forming `D_r A D_c`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalScaling {
    pub row_scale: Vec<f64>,
    pub col_scale: Vec<f64>,
}

impl DiagonalScaling {
    pub fn ones(n: usize) -> Self {
        Self {
            row_scale: vec![1.0; n],
            col_scale: vec![1.0; n],
        }
    }

    pub fn new(row_scale: Vec<f64>, col_scale: Vec<f64>) -> Result<Self> {
        let s = Self {
            row_scale,
            col_scale,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, &v) in self.row_scale.iter().chain(&self.col_scale).enumerate() {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::NonPositiveScale(i % self.row_scale.len().max(1)));
            }
        }
        Ok(())
    }

    pub fn inverted(&self) -> Self {
        Self {
            row_scale: self.row_scale.iter().map(|v| 1.0 / v).collect(),
            col_scale: self.col_scale.iter().map(|v| 1.0 / v).collect(),
        }
    }
}
