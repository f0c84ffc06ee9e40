//! Signature matrix and the noiseless superposition `y = A v`.

use rand::Rng;

use crate::channel::ChannelRealization;
use crate::error::{invalid, Result};

/// `r x n` matrix of ±1 chips; column `i` is user `i`'s signature.
///
/// Stored column-major so that correlations `a_j^T y` read contiguous memory.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl SensingMatrix {
    /// Builds a matrix from column-major entries, each of which must be ±1.
    pub fn from_columns(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(invalid(
                "sensing matrix needs at least one row and one column",
            ));
        }
        if data.len() != rows * cols {
            return Err(invalid(format!(
                "expected {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|&x| x != 1.0 && x != -1.0) {
            return Err(invalid("sensing matrix entries must be +1 or -1"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }

    /// `A^T y`.
    pub fn correlate(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.rows {
            return Err(invalid(format!(
                "measurement has length {}, matrix has {} rows",
                y.len(),
                self.rows
            )));
        }
        Ok((0..self.cols).map(|j| dot(self.column(j), y)).collect())
    }

    /// Matrix with columns reordered so that new column `i` is old column
    /// `perm[i]`.
    pub fn permute_columns(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.cols {
            return Err(invalid("permutation length must equal column count"));
        }
        let mut data = Vec::with_capacity(self.data.len());
        for &p in perm {
            if p >= self.cols {
                return Err(invalid("permutation index out of range"));
            }
            data.extend_from_slice(self.column(p));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Draws an `r x n` matrix of i.i.d. equiprobable ±1 entries.
///
/// Entries are filled column by column from the bits of successive `u64`
/// draws, least significant bit first; a set bit is `+1`.
pub fn generate_bernoulli_matrix<R: Rng + ?Sized>(
    r: usize,
    n: usize,
    rng: &mut R,
) -> Result<SensingMatrix> {
    if r == 0 || n == 0 {
        return Err(invalid("sensing matrix needs r >= 1 and n >= 1"));
    }
    let total = r * n;
    let mut data = Vec::with_capacity(total);
    while data.len() < total {
        let word: u64 = rng.next_u64();
        let take = (total - data.len()).min(64);
        data.extend((0..take).map(|b| if (word >> b) & 1 == 1 { 1.0 } else { -1.0 }));
    }
    Ok(SensingMatrix {
        rows: r,
        cols: n,
        data,
    })
}

/// Sparse contention vector `v` together with its support.
#[derive(Debug, Clone, PartialEq)]
pub struct ContentionVector {
    pub values: Vec<f64>,
    /// Ascending indices of the non-zero entries.
    pub support: Vec<usize>,
}

impl ContentionVector {
    fn from_rule(gains: &ChannelRealization, rule: impl Fn(f64) -> Option<f64>) -> Self {
        let mut support = Vec::new();
        let values = gains
            .gains()
            .iter()
            .enumerate()
            .map(|(i, &h)| match rule(h) {
                Some(v) => {
                    support.push(i);
                    v
                }
                None => 0.0,
            })
            .collect();
        Self { values, support }
    }
}

/// Analog contention: strong users (`h >= zeta`) send their gain.
pub fn build_vector_analog(gains: &ChannelRealization, zeta: f64) -> ContentionVector {
    debug_assert!(zeta > 0.0);
    ContentionVector::from_rule(gains, |h| (h >= zeta).then_some(h))
}

/// Digital contention: users with `lo <= h < hi` send a 1.
pub fn build_vector_digital(
    gains: &ChannelRealization,
    lo: f64,
    hi: f64,
) -> Result<ContentionVector> {
    if !(lo > 0.0 && lo < hi) {
        return Err(invalid(format!(
            "interval [{lo}, {hi}) is empty or inverted"
        )));
    }
    Ok(ContentionVector::from_rule(gains, |h| {
        (h >= lo && h < hi).then_some(1.0)
    }))
}

/// Noiseless measurement `y = A v`.
pub fn measure(a: &SensingMatrix, v: &[f64]) -> Result<Vec<f64>> {
    if v.len() != a.cols() {
        return Err(invalid(format!(
            "vector has length {}, matrix has {} columns",
            v.len(),
            a.cols()
        )));
    }
    let mut y = vec![0.0; a.rows()];
    for (j, &vj) in v.iter().enumerate() {
        if vj != 0.0 {
            for (yi, aij) in y.iter_mut().zip(a.column(j)) {
                *yi += aij * vj;
            }
        }
    }
    Ok(y)
}

/// One contention round's full data: `A`, `v`, `y = A v` and `S`.
#[derive(Debug, Clone)]
pub struct ContentionInstance<'a> {
    pub matrix: &'a SensingMatrix,
    pub sparse_vector: Vec<f64>,
    pub measurement: Vec<f64>,
    pub true_support: Vec<usize>,
}

impl<'a> ContentionInstance<'a> {
    pub fn new(matrix: &'a SensingMatrix, v: ContentionVector) -> Result<Self> {
        let measurement = measure(matrix, &v.values)?;
        Ok(Self {
            matrix,
            sparse_vector: v.values,
            measurement,
            true_support: v.support,
        })
    }
}
