//! Square bit matrices over GF(2) and rank computation.

use rand::Rng;

use crate::error::{invalid, Result};
use crate::MAX_ARITY;

/// An `n x n` matrix over GF(2); row `i` is a bit mask over columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    n: usize,
    rows: Vec<usize>,
}

impl BitMatrix {
    pub fn identity(n: usize) -> Self {
        BitMatrix {
            n,
            rows: (0..n).map(|i| 1 << i).collect(),
        }
    }

    pub fn from_rows(n: usize, rows: Vec<usize>) -> Result<Self> {
        if n > MAX_ARITY {
            return invalid(format!("matrix dimension {n} exceeds {MAX_ARITY}"));
        }
        if rows.len() != n {
            return invalid(format!("expected {n} rows, got {}", rows.len()));
        }
        if let Some(r) = rows.iter().find(|&&r| r >> n != 0) {
            return invalid(format!("row {r:#b} has bits beyond column {n}"));
        }
        Ok(BitMatrix { n, rows })
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mask = (1usize << n) - 1;
        BitMatrix {
            n,
            rows: (0..n).map(|_| (rng.random::<u64>() as usize) & mask).collect(),
        }
    }

    /// Rejection-samples a uniformly random invertible matrix.
    pub fn random_invertible<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        loop {
            let m = Self::random(n, rng);
            if m.is_invertible() {
                return m;
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    /// `Ax`: bit `i` of the result is the parity of `row_i & x`.
    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.rows
            .iter()
            .enumerate()
            .fold(0, |y, (i, &r)| y | ((((r & x).count_ones() & 1) as usize) << i))
    }

    pub fn rank(&self) -> usize {
        rank(self.rows.iter().map(|&r| vec![r as u64]).collect())
    }

    pub fn is_invertible(&self) -> bool {
        self.rank() == self.n
    }
}

/// Rank over GF(2) of vectors given as little-endian words.
pub fn rank(mut rows: Vec<Vec<u64>>) -> usize {
    let width = rows.iter().map(Vec::len).max().unwrap_or(0);
    let mut r = 0;
    for col in 0..width * 64 {
        let (w, b) = (col / 64, col % 64);
        let bit = |row: &Vec<u64>| row.get(w).is_some_and(|&x| (x >> b) & 1 == 1);
        let Some(p) = (r..rows.len()).find(|&i| bit(&rows[i])) else {
            continue;
        };
        rows.swap(r, p);
        let pivot = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && bit(row) {
                row.resize(row.len().max(pivot.len()), 0);
                for (x, y) in row.iter_mut().zip(&pivot) {
                    *x ^= y;
                }
            }
        }
        r += 1;
    }
    r
}
