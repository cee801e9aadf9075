//! Quadratics `g(x) = ½⟨x, Qx⟩ − ⟨b, x⟩` with a symmetric positive-definite
//! M-matrix `Q`, and the personalized PageRank instances that produce them.
//!
//! The nonnegativity-constrained minimizer `x*` of `g` is characterized by
//! `∇ᵢg(x*) = 0` where `x*ᵢ > 0` and `∇ᵢg(x*) ≥ 0` where `x*ᵢ = 0`. For the
//! PageRank quadratic the gradient at zero coordinates is further bounded
//! above by `αρ√dᵢ`.

use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::ProblemError;
use crate::graph::Graph;
use crate::solvers::Counters;
use crate::sparse::{SparseVector, SymCsr};

/// Dimension up to which `validate_m_matrix` checks the spectrum densely.
pub const DENSE_SPECTRUM_LIMIT: usize = 64;

/// Slack allowed on the dense spectral bounds check.
pub const SPECTRUM_SLACK: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct MQuadratic {
    q: SymCsr,
    b: Vec<f64>,
    alpha: f64,
    smoothness: f64,
    positive_rhs: Vec<usize>,
    pagerank_box: Option<Vec<f64>>,
}

impl MQuadratic {
    /// Validates `Q`, `α` and `L` with [`validate_m_matrix`] and builds the quadratic.
    pub fn new(q: SymCsr, b: Vec<f64>, alpha: f64, smoothness: f64) -> Result<Self, ProblemError> {
        if b.len() != q.dim() {
            return Err(ProblemError::Dimension {
                expected: q.dim(),
                got: b.len(),
            });
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(ProblemError::InvalidParameter("b has non-finite entries".into()));
        }
        let validation = validate_m_matrix(&q, alpha, smoothness);
        if !validation.is_valid() {
            return Err(ProblemError::NotMMatrix(validation.to_string()));
        }
        let positive_rhs = (0..b.len()).filter(|&i| b[i] > 0.0).collect();
        Ok(Self {
            q,
            b,
            alpha,
            smoothness,
            positive_rhs,
            pagerank_box: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.q.dim()
    }

    pub fn matrix(&self) -> &SymCsr {
        &self.q
    }

    pub fn rhs(&self) -> &[f64] {
        &self.b
    }

    /// Strong convexity constant (lower spectral bound).
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Smoothness constant (upper spectral bound).
    pub fn smoothness(&self) -> f64 {
        self.smoothness
    }

    pub fn condition_number(&self) -> f64 {
        self.smoothness / self.alpha
    }

    /// Coordinates with `bᵢ > 0`, i.e. where `∇g(0)` is negative.
    pub fn positive_rhs(&self) -> &[usize] {
        &self.positive_rhs
    }

    /// Upper bounds `αρ√dᵢ` on the gradient at zero coordinates, for PageRank quadratics.
    pub fn pagerank_box(&self) -> Option<&[f64]> {
        self.pagerank_box.as_deref()
    }

    /// Default threshold below which a gradient entry counts as negative:
    /// `1e-12 · L · ‖b‖∞`.
    pub fn default_tol_neg(&self) -> f64 {
        let bmax = self.b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        1e-12 * self.smoothness * bmax
    }

    /// `(Qx − b)ᵢ` for the requested coordinates, or the full gradient.
    ///
    /// Full gradients are charged `Σ_{j∈supp(x)} nnz(Q:,j)`; restricted ones
    /// the nonzeros of the requested rows that meet `supp(x)`. Both routes sum
    /// in increasing column order, so a restricted gradient equals the matching
    /// slice of the full gradient bit for bit.
    pub fn gradient(&self, x: &[f64], coords: Option<&[usize]>, counters: &mut Counters) -> Vec<f64> {
        assert_eq!(x.len(), self.dim(), "gradient: dimension mismatch");
        match coords {
            None => {
                let mut g: Vec<f64> = self.b.iter().map(|v| -v).collect();
                for (j, &xj) in x.iter().enumerate() {
                    if xj == 0.0 {
                        continue;
                    }
                    let (rows, vals) = self.q.row(j);
                    counters.nnz_touched += rows.len() as u64;
                    for (&i, &v) in rows.iter().zip(vals) {
                        g[i] += v * xj;
                    }
                }
                counters.full_gradients += 1;
                g
            }
            Some(coords) => {
                let out = coords
                    .iter()
                    .map(|&i| {
                        let (cols, vals) = self.q.row(i);
                        let mut gi = -self.b[i];
                        for (&j, &v) in cols.iter().zip(vals) {
                            if x[j] != 0.0 {
                                counters.nnz_touched += 1;
                                gi += v * x[j];
                            }
                        }
                        gi
                    })
                    .collect();
                counters.restricted_gradients += 1;
                out
            }
        }
    }

    /// `½⟨x, Qx⟩ − ⟨b, x⟩` for a dense `x`.
    pub fn objective(&self, x: &[f64]) -> f64 {
        let mut quad = 0.0;
        let mut lin = 0.0;
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            let (cols, vals) = self.q.row(i);
            let qx: f64 = cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum();
            quad += xi * qx;
            lin += self.b[i] * xi;
        }
        0.5 * quad - lin
    }

    pub fn objective_sparse(&self, x: &SparseVector) -> f64 {
        let mut quad = 0.0;
        let mut lin = 0.0;
        for (i, xi) in x.iter() {
            let (cols, vals) = self.q.row(i);
            let qx: f64 = cols.iter().zip(vals).map(|(&j, &v)| v * x.get(j)).sum();
            quad += xi * qx;
            lin += self.b[i] * xi;
        }
        0.5 * quad - lin
    }

    /// Gradient entries at every coordinate where it can differ from `−b`,
    /// plus every coordinate where `−b` is negative.
    pub fn sparse_gradient(&self, x: &SparseVector) -> Vec<(usize, f64)> {
        let mut ws = GradientWorkspace::new(self.dim());
        let mut scratch = Counters::default();
        ws.scatter(self, x.iter(), &mut scratch);
        for &i in &self.positive_rhs {
            ws.touch(self, i);
        }
        let mut out: Vec<(usize, f64)> = ws.touched().iter().map(|&i| (i, ws.value(self, i))).collect();
        out.sort_by_key(|e| e.0);
        out
    }

    /// Optimality residuals at a nonnegative `x`. Without a box only the
    /// coordinates returned by [`Self::sparse_gradient`] can violate anything;
    /// with a box every coordinate is scanned.
    pub fn check_optimality(&self, x: &SparseVector, pagerank_box: Option<&[f64]>) -> OptimalityReport {
        let mut report = OptimalityReport::default();
        let mut visit = |i: usize, gi: f64| {
            if x.get(i) > 0.0 {
                report.max_violation_positive = report.max_violation_positive.max(gi.abs());
            } else {
                report.max_violation_zero_low = report.max_violation_zero_low.max(-gi);
                if let Some(upper) = pagerank_box {
                    if gi > upper[i] + 1e-12 * (1.0 + upper[i].abs()) {
                        report.upper_box_violations.push(i);
                    }
                }
            }
        };
        match pagerank_box {
            None => {
                for (i, gi) in self.sparse_gradient(x) {
                    visit(i, gi);
                }
            }
            Some(_) => {
                let mut ws = GradientWorkspace::new(self.dim());
                ws.scatter(self, x.iter(), &mut Counters::default());
                for i in 0..self.dim() {
                    visit(i, ws.value(self, i));
                }
            }
        }
        report
    }

    pub fn check_optimality_dense(&self, x: &[f64], pagerank_box: Option<&[f64]>) -> OptimalityReport {
        self.check_optimality(&SparseVector::from_dense(x), pagerank_box)
    }

    /// `vol(S) = nnz(Q[:, S])`.
    pub fn volume(&self, set: &[usize]) -> usize {
        set.iter().map(|&j| self.q.row_nnz(j)).sum()
    }

    /// `ṽol(S) = nnz(Q[S, S])`.
    pub fn internal_volume(&self, set: &[usize]) -> usize {
        let mut member = std::collections::HashSet::with_capacity(set.len());
        member.extend(set.iter().copied());
        set.iter()
            .map(|&i| self.q.row(i).0.iter().filter(|j| member.contains(j)).count())
            .sum()
    }
}

/// Dense scatter buffer for sparse gradient evaluation, reused across calls.
/// Only touched slots are reset on `clear`.
#[derive(Debug, Clone)]
pub(crate) struct GradientWorkspace {
    acc: Vec<f64>,
    flag: Vec<bool>,
    touched: Vec<usize>,
}

impl GradientWorkspace {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            acc: vec![0.0; n],
            flag: vec![false; n],
            touched: Vec::new(),
        }
    }

    pub(crate) fn clear(&mut self) {
        for &i in &self.touched {
            self.flag[i] = false;
            self.acc[i] = 0.0;
        }
        self.touched.clear();
    }

    #[inline]
    pub(crate) fn touch(&mut self, q: &MQuadratic, i: usize) {
        if !self.flag[i] {
            self.flag[i] = true;
            self.acc[i] = -q.b[i];
            self.touched.push(i);
        }
    }

    /// Adds `Q[:, j] xⱼ` for every pair, charging one full gradient.
    pub(crate) fn scatter(
        &mut self,
        q: &MQuadratic,
        pairs: impl Iterator<Item = (usize, f64)>,
        counters: &mut Counters,
    ) {
        for (j, xj) in pairs {
            if xj == 0.0 {
                continue;
            }
            let (rows, vals) = q.q.row(j);
            counters.nnz_touched += rows.len() as u64;
            for (&i, &v) in rows.iter().zip(vals) {
                self.touch(q, i);
                self.acc[i] += v * xj;
            }
        }
        counters.full_gradients += 1;
    }

    #[inline]
    pub(crate) fn value(&self, q: &MQuadratic, i: usize) -> f64 {
        if self.flag[i] {
            self.acc[i]
        } else {
            -q.b[i]
        }
    }

    pub(crate) fn touched(&self) -> &[usize] {
        &self.touched
    }

    /// Coordinates with gradient below `-tol`: touched ones and untouched
    /// ones with `bᵢ > tol`. Sorted.
    pub(crate) fn negatives(&self, q: &MQuadratic, tol: f64) -> Vec<(usize, f64)> {
        let mut out: Vec<(usize, f64)> = self
            .touched
            .iter()
            .map(|&i| (i, self.acc[i]))
            .filter(|&(_, g)| g < -tol)
            .collect();
        for &i in &q.positive_rhs {
            if !self.flag[i] && -q.b[i] < -tol {
                out.push((i, -q.b[i]));
            }
        }
        out.sort_by_key(|e| e.0);
        out
    }
}

/// Residuals of the nonnegative-orthant optimality conditions.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OptimalityReport {
    /// Largest `|∇ᵢg(x)|` over `xᵢ > 0`.
    pub max_violation_positive: f64,
    /// Largest `max(0, −∇ᵢg(x))` over `xᵢ = 0`.
    pub max_violation_zero_low: f64,
    /// Zero coordinates whose gradient exceeds the PageRank box `αρ√dᵢ`.
    pub upper_box_violations: Vec<usize>,
}

impl OptimalityReport {
    pub fn is_stationary(&self, tol: f64) -> bool {
        self.max_violation_positive <= tol && self.max_violation_zero_low <= tol
    }
}

/// A single failed M-matrix requirement.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    InvalidBounds { alpha: f64, smoothness: f64 },
    PositiveOffDiagonal { i: usize, j: usize, value: f64 },
    NonPositiveDiagonal { i: usize, value: f64 },
    DiagonalAboveSmoothness { i: usize, value: f64 },
    Asymmetric { i: usize, j: usize },
    StrongConvexity { lambda_min: f64, alpha: f64 },
    Smoothness { lambda_max: f64, smoothness: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::InvalidBounds { alpha, smoothness } => {
                write!(f, "invalid spectral bounds alpha={alpha}, L={smoothness}")
            }
            Violation::PositiveOffDiagonal { i, j, value } => {
                write!(f, "positive off-diagonal at ({i},{j}): {value}")
            }
            Violation::NonPositiveDiagonal { i, value } => {
                write!(f, "non-positive diagonal at ({i},{i}): {value}")
            }
            Violation::DiagonalAboveSmoothness { i, value } => {
                write!(f, "diagonal above L at ({i},{i}): {value}")
            }
            Violation::Asymmetric { i, j } => write!(f, "asymmetric entry at ({i},{j})"),
            Violation::StrongConvexity { lambda_min, alpha } => {
                write!(f, "smallest eigenvalue {lambda_min} below alpha {alpha}")
            }
            Violation::Smoothness { lambda_max, smoothness } => {
                write!(f, "largest eigenvalue {lambda_max} above L {smoothness}")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MatrixValidation {
    pub violations: Vec<Violation>,
    /// `(λmin, λmax)` when the spectrum was computed.
    pub spectrum: Option<(f64, f64)>,
}

impl MatrixValidation {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for MatrixValidation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Checks symmetry, off-diagonal signs, `0 < Qᵢᵢ ≤ L` and, for small
/// matrices, `αI ⪯ Q ⪯ LI` from the dense spectrum.
pub fn validate_m_matrix(q: &SymCsr, alpha: f64, smoothness: f64) -> MatrixValidation {
    let mut out = MatrixValidation::default();
    if !(alpha > 0.0 && alpha.is_finite() && smoothness >= alpha && smoothness.is_finite()) {
        out.violations.push(Violation::InvalidBounds { alpha, smoothness });
    }
    let n = q.dim();
    for i in 0..n {
        let (cols, vals) = q.row(i);
        let mut has_diag = false;
        for (&j, &v) in cols.iter().zip(vals) {
            if j == i {
                has_diag = true;
                if v <= 0.0 {
                    out.violations.push(Violation::NonPositiveDiagonal { i, value: v });
                } else if v > smoothness * (1.0 + 1e-12) {
                    out.violations.push(Violation::DiagonalAboveSmoothness { i, value: v });
                }
            } else {
                if v > 0.0 && i < j {
                    out.violations.push(Violation::PositiveOffDiagonal { i, j, value: v });
                }
                if i < j && q.get(j, i).to_bits() != v.to_bits() {
                    out.violations.push(Violation::Asymmetric { i, j });
                }
            }
        }
        if !has_diag {
            out.violations.push(Violation::NonPositiveDiagonal { i, value: 0.0 });
        }
    }
    if n <= DENSE_SPECTRUM_LIMIT && n > 0 {
        let (lo, hi) = dense_spectrum(q);
        out.spectrum = Some((lo, hi));
        if lo < alpha - SPECTRUM_SLACK {
            out.violations.push(Violation::StrongConvexity {
                lambda_min: lo,
                alpha,
            });
        }
        if hi > smoothness + SPECTRUM_SLACK {
            out.violations.push(Violation::Smoothness {
                lambda_max: hi,
                smoothness,
            });
        }
    }
    out
}

/// Smallest and largest eigenvalue of a symmetric matrix.
pub fn dense_spectrum(q: &SymCsr) -> (f64, f64) {
    let n = q.dim();
    let dense = DMatrix::from_fn(n, n, |i, j| q.get(i, j));
    let eig = SymmetricEigen::new(dense);
    let lo = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Teleportation distribution: a single seed node or explicit weights.
#[derive(Debug, Clone, PartialEq)]
pub enum Teleport {
    Seed(usize),
    Distribution(Vec<(usize, f64)>),
}

/// Personalized PageRank problem with ℓ1 weight `ρ`.
#[derive(Debug, Clone)]
pub struct PageRankInstance {
    pub graph: Graph,
    pub alpha: f64,
    pub rho: f64,
    pub teleport: Teleport,
}

impl PageRankInstance {
    pub fn new(graph: Graph, alpha: f64, rho: f64, teleport: Teleport) -> Result<Self, ProblemError> {
        let inst = Self {
            graph,
            alpha,
            rho,
            teleport,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(ProblemError::InvalidParameter(format!(
                "alpha must lie in (0,1), got {}",
                self.alpha
            )));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(ProblemError::InvalidParameter(format!(
                "rho must be positive, got {}",
                self.rho
            )));
        }
        let n = self.graph.node_count();
        match &self.teleport {
            Teleport::Seed(v) if *v >= n => Err(ProblemError::InvalidParameter(format!(
                "seed node {v} out of range for {n} nodes"
            ))),
            Teleport::Seed(_) => Ok(()),
            Teleport::Distribution(pairs) => {
                let mut sum = 0.0;
                for &(i, w) in pairs {
                    if i >= n {
                        return Err(ProblemError::InvalidParameter(format!(
                            "teleport node {i} out of range for {n} nodes"
                        )));
                    }
                    if !(w >= 0.0 && w.is_finite()) {
                        return Err(ProblemError::InvalidParameter(format!(
                            "teleport weight {w} at node {i} is not a nonnegative number"
                        )));
                    }
                    sum += w;
                }
                if (sum - 1.0).abs() > 1e-12 {
                    return Err(ProblemError::NotOnSimplex { sum });
                }
                Ok(())
            }
        }
    }

    /// Dense teleportation vector `s`.
    pub fn teleport_vector(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.graph.node_count()];
        match &self.teleport {
            Teleport::Seed(v) => s[*v] = 1.0,
            Teleport::Distribution(pairs) => {
                for &(i, w) in pairs {
                    s[i] += w;
                }
            }
        }
        s
    }

    /// `αρ√dᵢ` per node.
    pub fn box_bounds(&self) -> Vec<f64> {
        self.graph
            .degrees()
            .into_iter()
            .map(|d| self.alpha * self.rho * (d as f64).sqrt())
            .collect()
    }
}

/// `Q = αI + (1−α)/2 · (I − D^{-1/2} A D^{-1/2})`,
/// `b = α D^{-1/2} s − αρ D^{1/2} 1`, `L = 1`.
pub fn build_pagerank_quadratic(instance: &PageRankInstance) -> Result<MQuadratic, ProblemError> {
    instance.validate()?;
    let g = &instance.graph;
    let n = g.node_count();
    let alpha = instance.alpha;
    let half = (1.0 - alpha) / 2.0;
    let sqrt_d: Vec<f64> = g.degrees().into_iter().map(|d| (d as f64).sqrt()).collect();

    let mut entries = Vec::with_capacity(n + g.edge_count());
    for i in 0..n {
        entries.push((i, i, alpha + half));
    }
    for &(u, v) in g.edges() {
        entries.push((u, v, -half / (sqrt_d[u] * sqrt_d[v])));
    }
    let q = SymCsr::from_triplets(n, &entries)?;

    let s = instance.teleport_vector();
    let b: Vec<f64> = (0..n)
        .map(|i| alpha * s[i] / sqrt_d[i] - alpha * instance.rho * sqrt_d[i])
        .collect();
    let mut quad = MQuadratic::new(q, b, alpha, 1.0)?;
    quad.pagerank_box = Some(instance.box_bounds());
    Ok(quad)
}
