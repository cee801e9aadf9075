//! Compressed sparse storage for symmetric matrices and sparse vectors.

use serde::{Deserialize, Serialize};

use crate::error::ProblemError;

/// Symmetric sparse matrix in compressed sparse row form.
///
/// Both triangles are stored, but every off-diagonal value is written from a
/// single source entry, so `get(i, j)` and `get(j, i)` are bit-identical.
/// Rows are sorted by column index and hold no explicit zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct SymCsr {
    n: usize,
    offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SymCsr {
    /// Builds from `(i, j, value)` entries. Each unordered pair is given once,
    /// from either triangle; repeated pairs are summed.
    pub fn from_triplets(n: usize, entries: &[(usize, usize, f64)]) -> Result<Self, ProblemError> {
        let mut upper: Vec<(usize, usize, f64)> = Vec::with_capacity(entries.len());
        for &(i, j, v) in entries {
            if i >= n || j >= n {
                return Err(ProblemError::InvalidParameter(format!(
                    "entry ({i},{j}) out of range for dimension {n}"
                )));
            }
            if !v.is_finite() {
                return Err(ProblemError::InvalidParameter(format!(
                    "non-finite entry at ({i},{j})"
                )));
            }
            upper.push((i.min(j), i.max(j), v));
        }
        upper.sort_by_key(|a| (a.0, a.1));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(upper.len());
        for (i, j, v) in upper {
            match merged.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => merged.push((i, j, v)),
            }
        }
        merged.retain(|e| e.2 != 0.0);

        let mut counts = vec![0usize; n];
        for &(i, j, _) in &merged {
            counts[i] += 1;
            if i != j {
                counts[j] += 1;
            }
        }
        let mut offsets = vec![0usize; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + counts[i];
        }
        let nnz = offsets[n];
        let mut cols = vec![0usize; nnz];
        let mut vals = vec![0.0; nnz];
        let mut fill = offsets[..n].to_vec();
        for &(i, j, v) in &merged {
            cols[fill[i]] = j;
            vals[fill[i]] = v;
            fill[i] += 1;
            if i != j {
                cols[fill[j]] = i;
                vals[fill[j]] = v;
                fill[j] += 1;
            }
        }
        for i in 0..n {
            let (lo, hi) = (offsets[i], offsets[i + 1]);
            let mut row: Vec<(usize, f64)> = cols[lo..hi]
                .iter()
                .copied()
                .zip(vals[lo..hi].iter().copied())
                .collect();
            row.sort_by_key(|e| e.0);
            for (k, (c, v)) in row.into_iter().enumerate() {
                cols[lo + k] = c;
                vals[lo + k] = v;
            }
        }
        Ok(Self {
            n,
            offsets,
            cols,
            vals,
        })
    }

    /// Builds from a dense row-major matrix, which must be exactly symmetric.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self, ProblemError> {
        let n = rows.len();
        let mut entries = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(ProblemError::Dimension {
                    expected: n,
                    got: row.len(),
                });
            }
            for j in i..n {
                if rows[i][j] != rows[j][i] {
                    return Err(ProblemError::NotMMatrix(format!(
                        "asymmetric entry at ({i},{j})"
                    )));
                }
                if row[j] != 0.0 {
                    entries.push((i, j, row[j]));
                }
            }
        }
        Self::from_triplets(n, &entries)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.offsets[i], self.offsets[i + 1]);
        (&self.cols[lo..hi], &self.vals[lo..hi])
    }

    #[inline]
    pub fn row_nnz(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    pub fn diag(&self, i: usize) -> f64 {
        self.get(i, i)
    }

    /// Entries with `i <= j`, in row-major order.
    pub fn upper_triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.nnz() / 2 + self.n);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if j >= i {
                    out.push((i, j, v));
                }
            }
        }
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.n]; self.n];
        for (i, row) in out.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                row[j] = v;
            }
        }
        out
    }

    /// Dense product `Q x`.
    pub fn mul_dense(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum()
            })
            .collect()
    }
}

/// Sparse vector with sorted indices and no stored zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    pub dim: usize,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseVector {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn from_dense(x: &[f64]) -> Self {
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for (i, &v) in x.iter().enumerate() {
            if v != 0.0 {
                indices.push(i);
                values.push(v);
            }
        }
        Self {
            dim: x.len(),
            indices,
            values,
        }
    }

    /// Builds from unordered `(index, value)` pairs; zeros are dropped.
    pub fn from_pairs(dim: usize, pairs: impl IntoIterator<Item = (usize, f64)>) -> Self {
        let mut pairs: Vec<(usize, f64)> = pairs.into_iter().filter(|p| p.1 != 0.0).collect();
        pairs.sort_by_key(|p| p.0);
        let (indices, values) = pairs.into_iter().unzip();
        Self {
            dim,
            indices,
            values,
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (&i, &v) in self.indices.iter().zip(&self.values) {
            out[i] = v;
        }
        out
    }

    pub fn get(&self, i: usize) -> f64 {
        match self.indices.binary_search(&i) {
            Ok(k) => self.values[k],
            Err(_) => 0.0,
        }
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }
}
