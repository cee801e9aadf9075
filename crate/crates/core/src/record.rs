//! Serializable run records: the `solve` JSON document, benchmark CSV rows
//! and per-instance regime predictors.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::problem::{MQuadratic, OptimalityReport};
use crate::solvers::{AsprVariant, Counters, GapBound, Solution, SolverKind};

/// Stdout document of `ppr solve`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutput {
    pub solver: String,
    /// `[node, value]` pairs, sorted by node.
    pub x: Vec<(usize, f64)>,
    pub support_size: usize,
    pub gap_bound: GapBound,
    pub counters: Counters,
    pub residuals: OptimalityReport,
}

impl SolveOutput {
    pub fn new(kind: SolverKind, sol: &Solution) -> Self {
        Self {
            solver: kind.name().to_string(),
            x: sol.x.iter().collect(),
            support_size: sol.support.len(),
            gap_bound: sol.gap_bound,
            counters: sol.counters,
            residuals: sol.report.clone(),
        }
    }
}

/// Where an instance came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InstanceSource {
    File { path: String, format: String },
    Generator { family: String, seed: u64 },
}

/// Everything known about one solver run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub source: InstanceSource,
    pub n: usize,
    pub alpha: f64,
    pub rho: Option<f64>,
    pub solver: String,
    pub variant: String,
    pub eps: f64,
    pub counters: Counters,
    pub support_size: usize,
    /// `|supp*|`, `vol(supp*)` and `ṽol(supp*)` of the reference solution.
    pub reference_support_size: Option<usize>,
    pub vol_supp: Option<usize>,
    pub ivol_supp: Option<usize>,
    /// `g(x) − g(x*)` against the reference.
    pub gap: Option<f64>,
    pub residuals: OptimalityReport,
    pub wall_ns: u64,
}

pub fn variant_name(kind: SolverKind, variant: AsprVariant) -> &'static str {
    match kind {
        SolverKind::Aspr => variant.name(),
        _ => "-",
    }
}

impl RunRecord {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("records contain only finite numbers and strings")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn bench_row(&self, family: &str) -> BenchRow {
        BenchRow {
            family: family.to_string(),
            n: self.n,
            alpha: self.alpha,
            rho: self.rho.unwrap_or(f64::NAN),
            solver: self.solver.clone(),
            variant: self.variant.clone(),
            stages: self.counters.stages,
            inner_iters: self.counters.inner_iters,
            nnz_touched: self.counters.nnz_touched,
            full_gradients: self.counters.full_gradients,
            support_size: self.support_size,
            vol_supp: self.vol_supp,
            ivol_supp: self.ivol_supp,
            gap: self.gap,
            wall_ns: self.wall_ns,
        }
    }
}

/// One CSV row of `ppr bench`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub family: String,
    pub n: usize,
    pub alpha: f64,
    pub rho: f64,
    pub solver: String,
    pub variant: String,
    pub stages: u64,
    pub inner_iters: u64,
    pub nnz_touched: u64,
    pub full_gradients: u64,
    pub support_size: usize,
    pub vol_supp: Option<usize>,
    pub ivol_supp: Option<usize>,
    pub gap: Option<f64>,
    pub wall_ns: u64,
}

pub const BENCH_HEADER: &str = "family,n,alpha,rho,solver,variant,stages,inner_iters,nnz_touched,full_gradients,support_size,vol_supp,ivol_supp,gap,wall_ns";

pub fn write_csv<T: Serialize>(out: impl Write, rows: &[T]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(input: impl Read) -> csv::Result<Vec<T>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

/// Predictors for which method should win on an instance, with
/// `s = |supp*|`, `κ = L/α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeRow {
    pub family: String,
    pub n: usize,
    pub alpha: f64,
    pub rho: f64,
    pub kappa: f64,
    pub support_size: usize,
    pub vol_supp: usize,
    pub ivol_supp: usize,
    /// `max(s³/vol, s)`: CDPR beats ISTA when `κ` exceeds it.
    pub cdpr_over_ista: f64,
    /// `max((s·ṽol/vol)², s)`: ASPR beats ISTA when `κ` exceeds it.
    pub aspr_over_ista: f64,
    /// `(s²/ṽol)²`: CDPR beats ASPR when `κ` exceeds it.
    pub cdpr_over_aspr: f64,
    pub cdpr_beats_ista: bool,
    pub aspr_beats_ista: bool,
    pub cdpr_beats_aspr: bool,
}

impl RegimeRow {
    pub fn new(family: &str, q: &MQuadratic, rho: f64, support: &[usize]) -> Self {
        let kappa = q.condition_number();
        let s = support.len() as f64;
        let vol = q.volume(support);
        let ivol = q.internal_volume(support);
        let (v, iv) = (vol.max(1) as f64, ivol.max(1) as f64);
        let cdpr_over_ista = (s.powi(3) / v).max(s);
        let aspr_over_ista = (s * iv / v).powi(2).max(s);
        let cdpr_over_aspr = (s * s / iv).powi(2);
        Self {
            family: family.to_string(),
            n: q.dim(),
            alpha: q.alpha(),
            rho,
            kappa,
            support_size: support.len(),
            vol_supp: vol,
            ivol_supp: ivol,
            cdpr_over_ista,
            aspr_over_ista,
            cdpr_over_aspr,
            cdpr_beats_ista: kappa > cdpr_over_ista,
            aspr_beats_ista: kappa > aspr_over_ista,
            cdpr_beats_aspr: kappa > cdpr_over_aspr,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> BenchRow {
        BenchRow {
            family: "grid".into(),
            n: 16,
            alpha: 0.1 + 0.2,
            rho: 1e-3 / 3.0,
            solver: "aspr".into(),
            variant: "plain".into(),
            stages: 3,
            inner_iters: 120,
            nnz_touched: 9001,
            full_gradients: 4,
            support_size: 5,
            vol_supp: Some(21),
            ivol_supp: None,
            gap: Some(std::f64::consts::PI * 1e-9),
            wall_ns: 123_456,
        }
    }

    #[test]
    fn csv_header_and_round_trip() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &[row()]).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), BENCH_HEADER);
        let back: Vec<BenchRow> = read_csv(&buf[..]).unwrap();
        assert_eq!(back, vec![row()]);
    }
}
