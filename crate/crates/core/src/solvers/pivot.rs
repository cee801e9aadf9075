use crate::error::SolverError;

/// Candidate with the most negative gradient; ties go to the smallest index.
pub fn select_pivot(candidates: &[(usize, f64)]) -> Result<usize, SolverError> {
    candidates
        .iter()
        .copied()
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .ok_or(SolverError::EmptyPivotSet)
}
