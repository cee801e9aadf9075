use crate::problem::MQuadratic;
use crate::solvers::Counters;
use crate::sparse::SparseVector;

const ABSENT: usize = usize::MAX;

/// The known-good coordinate set `S` together with the principal submatrix
/// `Q[S, S]`, built incrementally so that restricted gradients cost `ṽol(S)`.
///
/// Local index `k` refers to the `k`-th coordinate added to `S`.
#[derive(Debug, Clone)]
pub struct SupportState<'a> {
    q: &'a MQuadratic,
    members: Vec<usize>,
    local: Vec<usize>,
    rows: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
    history: Vec<usize>,
    internal_nnz: usize,
}

impl<'a> SupportState<'a> {
    pub fn new(q: &'a MQuadratic) -> Self {
        Self {
            q,
            members: Vec::new(),
            local: vec![ABSENT; q.dim()],
            rows: Vec::new(),
            rhs: Vec::new(),
            history: Vec::new(),
            internal_nnz: 0,
        }
    }

    /// State over an explicit set, ignoring duplicates.
    pub fn with_members(q: &'a MQuadratic, members: &[usize]) -> Self {
        let mut state = Self::new(q);
        state.extend(members, &mut Counters::default());
        state
    }

    pub fn quadratic(&self) -> &'a MQuadratic {
        self.q
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Members in insertion order.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn sorted_members(&self) -> Vec<usize> {
        let mut out = self.members.clone();
        out.sort_unstable();
        out
    }

    pub fn contains(&self, i: usize) -> bool {
        self.local[i] != ABSENT
    }

    pub fn local_index(&self, i: usize) -> Option<usize> {
        match self.local[i] {
            ABSENT => None,
            k => Some(k),
        }
    }

    /// `|S|` recorded at each call to [`Self::mark_stage`].
    pub fn history(&self) -> &[usize] {
        &self.history
    }

    pub fn mark_stage(&mut self) {
        self.history.push(self.members.len());
    }

    /// `ṽol(S)`.
    pub fn internal_volume(&self) -> usize {
        self.internal_nnz
    }

    /// Local row of `Q[S, S]` as `(local column, value)` pairs.
    pub fn row(&self, k: usize) -> &[(usize, f64)] {
        &self.rows[k]
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    /// Adds coordinates to `S`, reading each new row of `Q` once.
    pub fn extend(&mut self, new: &[usize], counters: &mut Counters) {
        for &i in new {
            if self.contains(i) {
                continue;
            }
            let k = self.members.len();
            self.members.push(i);
            self.local[i] = k;
            self.rows.push(Vec::new());
            self.rhs.push(self.q.rhs()[i]);
            let (cols, vals) = self.q.matrix().row(i);
            counters.nnz_touched += cols.len() as u64;
            for (&j, &v) in cols.iter().zip(vals) {
                let kj = self.local[j];
                if kj == ABSENT {
                    continue;
                }
                self.rows[k].push((kj, v));
                self.internal_nnz += 1;
                if kj != k {
                    self.rows[kj].push((k, v));
                    self.internal_nnz += 1;
                }
            }
        }
    }

    /// `∇_S g(x)` for `x` supported on `S` (local coordinates).
    pub fn restricted_gradient(&self, x: &[f64], out: &mut [f64], counters: &mut Counters) {
        for (k, row) in self.rows.iter().enumerate() {
            let mut gk = -self.rhs[k];
            for &(j, v) in row {
                gk += v * x[j];
            }
            out[k] = gk;
        }
        counters.nnz_touched += self.internal_nnz as u64;
        counters.restricted_gradients += 1;
    }

    /// `Q[S, S] v` in local coordinates.
    pub fn mul(&self, v: &[f64], out: &mut [f64], counters: &mut Counters) {
        for (k, row) in self.rows.iter().enumerate() {
            out[k] = row.iter().map(|&(j, q)| q * v[j]).sum();
        }
        counters.nnz_touched += self.internal_nnz as u64;
    }

    /// Local vector as a global sparse vector.
    pub fn embed(&self, x: &[f64]) -> SparseVector {
        SparseVector::from_pairs(
            self.q.dim(),
            self.members.iter().copied().zip(x.iter().copied()),
        )
    }

    /// Global dense vector restricted to `S`, in local coordinates.
    pub fn restrict(&self, x: &[f64]) -> Vec<f64> {
        self.members.iter().map(|&i| x[i]).collect()
    }

    /// Local `(global index, value)` pairs.
    pub fn pairs<'b>(&'b self, x: &'b [f64]) -> impl Iterator<Item = (usize, f64)> + 'b {
        self.members.iter().copied().zip(x.iter().copied())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::problem::{build_pagerank_quadratic, PageRankInstance, Teleport};

    #[test]
    fn extend_builds_principal_submatrix() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let q = build_pagerank_quadratic(&PageRankInstance::new(g, 0.5, 0.01, Teleport::Seed(0)).unwrap())
            .unwrap();
        let mut c = Counters::default();
        let mut s = SupportState::new(&q);
        s.extend(&[2, 0, 2], &mut c);
        assert_eq!(s.members(), &[2, 0]);
        // 0 and 2 are not adjacent: only diagonals.
        assert_eq!(s.internal_volume(), 2);
        s.extend(&[1], &mut c);
        assert_eq!(s.internal_volume(), q.internal_volume(&[0, 1, 2]));
        assert_eq!(c.nnz_touched, 9);

        let x_local = vec![0.1, 0.2, 0.3];
        let mut out = vec![0.0; 3];
        s.restricted_gradient(&x_local, &mut out, &mut c);
        let mut dense = vec![0.0; 4];
        for (k, &i) in s.members().iter().enumerate() {
            dense[i] = x_local[k];
        }
        let full = q.gradient(&dense, None, &mut Counters::default());
        for (k, &i) in s.members().iter().enumerate() {
            assert!((out[k] - full[i]).abs() < 1e-15);
        }
    }
}
