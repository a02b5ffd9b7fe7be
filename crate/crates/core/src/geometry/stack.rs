use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `m` blocks of dimension `n`, stored contiguously block after block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StackJson")]
pub struct StackedPoint {
    m: usize,
    n: usize,
    #[serde(serialize_with = "crate::serial::floats")]
    data: Vec<f64>,
}

#[derive(Deserialize)]
struct StackJson {
    m: usize,
    n: usize,
    data: Vec<f64>,
}

impl TryFrom<StackJson> for StackedPoint {
    type Error = Error;
    fn try_from(s: StackJson) -> Result<Self> {
        StackedPoint::from_data(s.m, s.n, s.data)
    }
}

impl StackedPoint {
    pub fn zeros(m: usize, n: usize) -> Self {
        StackedPoint { m, n, data: vec![0.0; m * n] }
    }

    pub fn from_data(m: usize, n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != m * n {
            return Err(Error::Dimension { expected: m * n, got: data.len() });
        }
        Ok(StackedPoint { m, n, data })
    }

    pub fn from_blocks(blocks: &[Vec<f64>]) -> Result<Self> {
        let m = blocks.len();
        let n = blocks.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(m * n);
        for b in blocks {
            if b.len() != n {
                return Err(Error::Dimension { expected: n, got: b.len() });
            }
            data.extend_from_slice(b);
        }
        Ok(StackedPoint { m, n, data })
    }

    /// `1_m ⊗ block`.
    pub fn consensus(m: usize, block: &[f64]) -> Self {
        let n = block.len();
        let mut data = Vec::with_capacity(m * n);
        (0..m).for_each(|_| data.extend_from_slice(block));
        StackedPoint { m, n, data }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn block(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn block_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn blocks(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        (0..self.m).map(move |i| self.block(i))
    }

    /// `Σ_i x_i`.
    pub fn block_sum(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.n];
        for b in self.blocks() {
            s.iter_mut().zip(b).for_each(|(a, x)| *a += x);
        }
        s
    }

    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    pub fn max_abs_diff(&self, other: &StackedPoint) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub(crate) fn same_shape(&self, other: &StackedPoint) -> Result<()> {
        if self.m != other.m {
            return Err(Error::Dimension { expected: self.m, got: other.m });
        }
        if self.n != other.n {
            return Err(Error::Dimension { expected: self.n, got: other.n });
        }
        Ok(())
    }
}
