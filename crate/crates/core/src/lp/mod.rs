//! Linear programs and the simplex-based LP solver.
//!
//! A [`LinearProgram`] is `min cᵀx` subject to sparse rows `aᵢᵀx {≤,=,≥} bᵢ`
//! and variable bounds `l ≤ x ≤ u` (bounds may be infinite). It is the
//! vertex engine underneath the MILP solver, the criticality measure, the
//! feasibility projection and the refinement step.

mod simplex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub(crate) use simplex::Simplex;

/// Row sense.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sense {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

/// One sparse linear row `Σ coeffs · x  sense  rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    /// `(column, coefficient)` pairs, sorted by column with no duplicates.
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    /// Builds a row, summing repeated columns and dropping exact zeros.
    pub fn new(coeffs: impl IntoIterator<Item = (usize, f64)>, sense: Sense, rhs: f64) -> Self {
        let mut coeffs: Vec<(usize, f64)> = coeffs.into_iter().collect();
        coeffs.sort_by_key(|&(j, _)| j);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(coeffs.len());
        for (j, v) in coeffs {
            match merged.last_mut() {
                Some(last) if last.0 == j => last.1 += v,
                _ => merged.push((j, v)),
            }
        }
        merged.retain(|&(_, v)| v != 0.0);
        Constraint {
            coeffs: merged,
            sense,
            // Normalizes −0 so equal rows compare equal bitwise.
            rhs: rhs + 0.0,
        }
    }

    pub fn le(coeffs: impl IntoIterator<Item = (usize, f64)>, rhs: f64) -> Self {
        Constraint::new(coeffs, Sense::Le, rhs)
    }

    pub fn ge(coeffs: impl IntoIterator<Item = (usize, f64)>, rhs: f64) -> Self {
        Constraint::new(coeffs, Sense::Ge, rhs)
    }

    pub fn eq(coeffs: impl IntoIterator<Item = (usize, f64)>, rhs: f64) -> Self {
        Constraint::new(coeffs, Sense::Eq, rhs)
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, v)| v * x[j]).sum()
    }

    /// Amount by which `x` violates the row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let act = self.activity(x);
        match self.sense {
            Sense::Le => (act - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - act).max(0.0),
            Sense::Eq => (act - self.rhs).abs(),
        }
    }

    pub fn max_column(&self) -> Option<usize> {
        self.coeffs.last().map(|&(j, _)| j)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("column index {col} out of range for {n} variables")]
    ColumnOutOfRange { col: usize, n: usize },
    #[error("row index {row} out of range for {m} rows")]
    RowOutOfRange { row: usize, m: usize },
    #[error("vector length {got} does not match expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("variable {var} has invalid bounds [{lower}, {upper}]")]
    InvalidBounds { var: usize, lower: f64, upper: f64 },
    #[error("non-finite coefficient in {0}")]
    NonFinite(&'static str),
}

/// `min cᵀx` over sparse rows and variable bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    rows: Vec<Constraint>,
}

impl LinearProgram {
    /// `n` variables with zero objective and bounds `[0, ∞)`.
    pub fn new(n: usize) -> Self {
        LinearProgram {
            objective: vec![0.0; n],
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
            rows: Vec::new(),
        }
    }

    pub fn with_bounds(objective: Vec<f64>, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, LpError> {
        let lp = LinearProgram {
            objective,
            lower,
            upper,
            rows: Vec::new(),
        };
        lp.validate()?;
        Ok(lp)
    }

    /// Assembles an LP from `(row, col, value)` triplets. Repeated
    /// `(row, col)` entries are summed.
    #[allow(clippy::too_many_arguments)]
    pub fn from_triplets(
        n: usize,
        triplets: &[(usize, usize, f64)],
        senses: &[Sense],
        rhs: &[f64],
        objective: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> Result<Self, LpError> {
        let m = senses.len();
        if rhs.len() != m {
            return Err(LpError::DimensionMismatch {
                expected: m,
                got: rhs.len(),
            });
        }
        let mut row_entries: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
        for &(r, c, v) in triplets {
            if r >= m {
                return Err(LpError::RowOutOfRange { row: r, m });
            }
            if c >= n {
                return Err(LpError::ColumnOutOfRange { col: c, n });
            }
            row_entries[r].push((c, v));
        }
        let mut lp = LinearProgram::with_bounds(objective, lower, upper)?;
        if lp.num_vars() != n {
            return Err(LpError::DimensionMismatch {
                expected: n,
                got: lp.num_vars(),
            });
        }
        for (entries, (&sense, &b)) in row_entries.into_iter().zip(senses.iter().zip(rhs)) {
            lp.add_constraint(Constraint::new(entries, sense, b))?;
        }
        Ok(lp)
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn rows(&self) -> &[Constraint] {
        &self.rows
    }

    /// Iterates the constraint matrix as `(row, col, value)` triplets.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.coeffs.iter().map(move |&(j, v)| (i, j, v)))
    }

    pub fn set_objective(&mut self, c: Vec<f64>) -> Result<(), LpError> {
        if c.len() != self.num_vars() {
            return Err(LpError::DimensionMismatch {
                expected: self.num_vars(),
                got: c.len(),
            });
        }
        if c.iter().any(|v| !v.is_finite()) {
            return Err(LpError::NonFinite("objective"));
        }
        self.objective = c;
        Ok(())
    }

    pub fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) -> Result<(), LpError> {
        if j >= self.num_vars() {
            return Err(LpError::ColumnOutOfRange {
                col: j,
                n: self.num_vars(),
            });
        }
        check_bounds(j, lower, upper)?;
        self.lower[j] = lower;
        self.upper[j] = upper;
        Ok(())
    }

    /// Appends a variable and returns its index.
    pub fn add_variable(&mut self, cost: f64, lower: f64, upper: f64) -> Result<usize, LpError> {
        let j = self.num_vars();
        check_bounds(j, lower, upper)?;
        self.objective.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        Ok(j)
    }

    pub fn add_constraint(&mut self, row: Constraint) -> Result<usize, LpError> {
        if let Some(col) = row.max_column() {
            if col >= self.num_vars() {
                return Err(LpError::ColumnOutOfRange {
                    col,
                    n: self.num_vars(),
                });
            }
        }
        if !row.rhs.is_finite() || row.coeffs.iter().any(|(_, v)| !v.is_finite()) {
            return Err(LpError::NonFinite("constraint"));
        }
        self.rows.push(row);
        Ok(self.rows.len() - 1)
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.objective.len();
        for len in [self.lower.len(), self.upper.len()] {
            if len != n {
                return Err(LpError::DimensionMismatch { expected: n, got: len });
            }
        }
        if self.objective.iter().any(|v| !v.is_finite()) {
            return Err(LpError::NonFinite("objective"));
        }
        for j in 0..n {
            check_bounds(j, self.lower[j], self.upper[j])?;
        }
        for row in &self.rows {
            if let Some(col) = row.max_column() {
                if col >= n {
                    return Err(LpError::ColumnOutOfRange { col, n });
                }
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest row violation at `x`.
    pub fn max_row_violation(&self, x: &[f64]) -> f64 {
        self.rows.iter().map(|r| r.violation(x)).fold(0.0, f64::max)
    }

    /// Largest bound violation at `x`.
    pub fn max_bound_violation(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&v, (&l, &u))| (l - v).max(v - u).max(0.0))
            .fold(0.0, f64::max)
    }
}

fn check_bounds(j: usize, lower: f64, upper: f64) -> Result<(), LpError> {
    if lower.is_nan() || upper.is_nan() || lower > upper || lower == f64::INFINITY || upper == f64::NEG_INFINITY {
        return Err(LpError::InvalidBounds { var: j, lower, upper });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpSettings {
    /// Primal feasibility tolerance on rows and bounds.
    pub feas_tol: f64,
    /// Reduced-cost optimality tolerance.
    pub opt_tol: f64,
    /// Pivot limit; `None` picks a size-dependent default.
    pub max_iterations: Option<usize>,
}

impl Default for LpSettings {
    fn default() -> Self {
        LpSettings {
            feas_tol: 1e-9,
            opt_tol: 1e-9,
            max_iterations: None,
        }
    }
}

impl LpSettings {
    pub(crate) fn iteration_limit(&self, n: usize, m: usize) -> usize {
        self.max_iterations
            .unwrap_or_else(|| (20 * (n + m)).max(10_000))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    /// Basis became singular or the factorization lost accuracy.
    NumericalFailure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpOutcome {
    pub status: LpStatus,
    /// Present iff `status == Optimal`.
    pub x: Option<Vec<f64>>,
    pub objective: f64,
    pub iterations: usize,
}

impl LpOutcome {
    pub(crate) fn without_solution(status: LpStatus, iterations: usize) -> Self {
        let objective = match status {
            LpStatus::Infeasible => f64::INFINITY,
            LpStatus::Unbounded => f64::NEG_INFINITY,
            _ => f64::NAN,
        };
        LpOutcome {
            status,
            x: None,
            objective,
            iterations,
        }
    }
}

/// Solves `lp` with the two-phase bounded revised simplex method.
///
/// Deterministic: identical input yields an identical outcome.
pub fn solve_lp(lp: &LinearProgram, settings: &LpSettings) -> Result<LpOutcome, LpError> {
    lp.validate()?;
    let mut engine = Simplex::new(lp);
    Ok(engine.solve_primal(settings))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings() -> LpSettings {
        LpSettings::default()
    }

    #[test]
    fn box_minimum() {
        let lp = LinearProgram::with_bounds(vec![1.0], vec![0.0], vec![1.0]).unwrap();
        let out = solve_lp(&lp, &settings()).unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        assert_eq!(out.x.unwrap(), vec![0.0]);
        assert_eq!(out.objective, 0.0);
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        let mut lp = LinearProgram::with_bounds(vec![1.0], vec![f64::NEG_INFINITY], vec![f64::INFINITY]).unwrap();
        lp.add_constraint(Constraint::ge([(0, 1.0)], 1.0)).unwrap();
        lp.add_constraint(Constraint::le([(0, 1.0)], 0.0)).unwrap();
        let out = solve_lp(&lp, &settings()).unwrap();
        assert_eq!(out.status, LpStatus::Infeasible);
        assert!(out.x.is_none());
    }

    #[test]
    fn contradictory_bounds_are_rejected() {
        assert!(matches!(
            LinearProgram::with_bounds(vec![1.0], vec![1.0], vec![0.0]),
            Err(LpError::InvalidBounds { .. })
        ));
    }

    #[test]
    fn unbounded_ray_detected() {
        let mut lp = LinearProgram::with_bounds(vec![-1.0, 0.0], vec![0.0, 0.0], vec![f64::INFINITY, 1.0]).unwrap();
        lp.add_constraint(Constraint::le([(0, 1.0), (1, -1.0)], 3.0)).unwrap();
        lp.add_constraint(Constraint::ge([(0, 1.0)], 1.0)).unwrap();
        let out = solve_lp(&lp, &settings()).unwrap();
        // x0 - x1 <= 3 with x1 <= 1 caps x0 at 4.
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.objective + 4.0).abs() < 1e-12);

        let mut lp = LinearProgram::with_bounds(vec![-1.0, 0.0], vec![0.0, 0.0], vec![f64::INFINITY, f64::INFINITY]).unwrap();
        lp.add_constraint(Constraint::le([(0, 1.0), (1, -1.0)], 3.0)).unwrap();
        let out = solve_lp(&lp, &settings()).unwrap();
        assert_eq!(out.status, LpStatus::Unbounded);
    }

    #[test]
    fn textbook_lp() {
        // max 3x + 5y  s.t. x <= 4, 2y <= 12, 3x + 2y <= 18
        let mut lp = LinearProgram::with_bounds(vec![-3.0, -5.0], vec![0.0; 2], vec![f64::INFINITY; 2]).unwrap();
        lp.add_constraint(Constraint::le([(0, 1.0)], 4.0)).unwrap();
        lp.add_constraint(Constraint::le([(1, 2.0)], 12.0)).unwrap();
        lp.add_constraint(Constraint::le([(0, 3.0), (1, 2.0)], 18.0)).unwrap();
        let out = solve_lp(&lp, &settings()).unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        let x = out.x.unwrap();
        assert!((x[0] - 2.0).abs() < 1e-12 && (x[1] - 6.0).abs() < 1e-12);
        assert!((out.objective + 36.0).abs() < 1e-12);
    }

    #[test]
    fn equality_rows_and_free_variables() {
        // min x0 + 2 x1 s.t. x0 + x1 = 3, x0 - x1 >= -1, x0 free, 0 <= x1
        let mut lp = LinearProgram::with_bounds(
            vec![1.0, 2.0],
            vec![f64::NEG_INFINITY, 0.0],
            vec![f64::INFINITY, f64::INFINITY],
        )
        .unwrap();
        lp.add_constraint(Constraint::eq([(0, 1.0), (1, 1.0)], 3.0)).unwrap();
        lp.add_constraint(Constraint::ge([(0, 1.0), (1, -1.0)], -1.0)).unwrap();
        let out = solve_lp(&lp, &settings()).unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        let x = out.x.unwrap();
        assert!((x[0] - 3.0).abs() < 1e-12 && x[1].abs() < 1e-12);
    }

    #[test]
    fn duplicate_and_zero_rows_do_not_change_optimum() {
        let mut lp = LinearProgram::with_bounds(vec![-1.0, -1.0], vec![0.0; 2], vec![3.0; 2]).unwrap();
        lp.add_constraint(Constraint::le([(0, 1.0), (1, 2.0)], 4.0)).unwrap();
        let base = solve_lp(&lp, &settings()).unwrap();
        lp.add_constraint(Constraint::le([(0, 1.0), (1, 2.0)], 4.0)).unwrap();
        lp.add_constraint(Constraint::le(std::iter::empty(), 0.0)).unwrap();
        lp.add_constraint(Constraint::eq([(0, 0.0)], 0.0)).unwrap();
        let dup = solve_lp(&lp, &settings()).unwrap();
        assert_eq!(dup.status, LpStatus::Optimal);
        assert!((base.objective - dup.objective).abs() < 1e-12);
    }

    #[test]
    fn triplets_merge_duplicates() {
        let lp = LinearProgram::from_triplets(
            2,
            &[(0, 0, 1.0), (0, 0, 1.0), (0, 1, 1.0)],
            &[Sense::Le],
            &[4.0],
            vec![-1.0, 0.0],
            vec![0.0, 0.0],
            vec![10.0, 10.0],
        )
        .unwrap();
        assert_eq!(lp.rows()[0].coeffs, vec![(0, 2.0), (1, 1.0)]);
        assert!(LinearProgram::from_triplets(1, &[(0, 3, 1.0)], &[Sense::Le], &[1.0], vec![0.0], vec![0.0], vec![1.0]).is_err());
        let out = solve_lp(&lp, &settings()).unwrap();
        assert!((out.objective + 2.0).abs() < 1e-12);
    }

    #[test]
    fn iteration_limit_is_a_distinct_status() {
        let mut lp = LinearProgram::with_bounds(vec![-1.0, -1.0], vec![0.0; 2], vec![f64::INFINITY; 2]).unwrap();
        lp.add_constraint(Constraint::le([(0, 1.0), (1, 2.0)], 4.0)).unwrap();
        lp.add_constraint(Constraint::le([(0, 3.0), (1, 1.0)], 6.0)).unwrap();
        let s = LpSettings {
            max_iterations: Some(0),
            ..LpSettings::default()
        };
        assert_eq!(solve_lp(&lp, &s).unwrap().status, LpStatus::IterationLimit);
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's example, which cycles under naive Dantzig pricing.
        let mut lp = LinearProgram::with_bounds(
            vec![-0.75, 150.0, -0.02, 6.0],
            vec![0.0; 4],
            vec![f64::INFINITY; 4],
        )
        .unwrap();
        lp.add_constraint(Constraint::le([(0, 0.25), (1, -60.0), (2, -0.04), (3, 9.0)], 0.0)).unwrap();
        lp.add_constraint(Constraint::le([(0, 0.5), (1, -90.0), (2, -0.02), (3, 3.0)], 0.0)).unwrap();
        lp.add_constraint(Constraint::le([(2, 1.0)], 1.0)).unwrap();
        let out = solve_lp(&lp, &settings()).unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        assert!((out.objective + 0.05).abs() < 1e-9);
    }
}
