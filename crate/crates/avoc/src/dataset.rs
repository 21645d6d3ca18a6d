use crate::error::{Error, Result};

/// Immutable N x D point matrix. Point identity is the row index.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: Vec<f64>,
    n: usize,
    d: usize,
}

impl Dataset {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::EmptyDataset);
        }
        let d = rows[0].len();
        let mut points = Vec::with_capacity(rows.len() * d);
        for (row, r) in rows.iter().enumerate() {
            if r.len() != d {
                return Err(Error::RaggedRow {
                    row,
                    found: r.len(),
                    expected: d,
                });
            }
            for (col, &v) in r.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFiniteValue { row, col });
                }
                points.push(v);
            }
        }
        Ok(Self {
            points,
            n: rows.len(),
            d,
        })
    }

    pub fn from_flat(points: Vec<f64>, n: usize, d: usize) -> Result<Self> {
        if n == 0 || d == 0 || points.len() != n * d {
            return Err(Error::EmptyDataset);
        }
        for (idx, &v) in points.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteValue {
                    row: idx / d,
                    col: idx % d,
                });
            }
        }
        Ok(Self { points, n, d })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.d)
    }
}

/// Squared Euclidean distance.
pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        let diff = x - y;
        s += diff * diff;
    }
    s
}

/// Compensated (Kahan) accumulator. The decomposition identities are
/// checked at 1e-8 relative, which naive summation misses at large N.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let y = value - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}
