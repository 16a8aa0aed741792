//! Problem representation: the mixed-integer polyhedron `X`, objectives of the
//! form `f1(u) + ⟨f2, z⟩`, the partial-localization seminorm, feasibility
//! reports, and logic-to-linear encoders.
//!
//! Throughout, `u` are the real coordinates of `x` and `z` the integer ones.

mod encode;
pub(crate) mod functions;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::EvalError;
use crate::lp::{Constraint, LinearProgram, LpError};
use crate::milp::{Milp, MilpError};

pub use encode::{encode_bigm_equality, encode_bigm_implication, encode_clause, encode_xor, LinearExpr, Literal};
pub use functions::{QuadraticFn, TurboCost};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Milp(#[from] MilpError),
    #[error("empty clause")]
    EmptyClause,
    #[error("big-M constant must be positive, got {0}")]
    NonPositiveBigM(f64),
    #[error("implications need an inequality row")]
    EqualityImplication,
    #[error("f1 depends on integer variable x{0}")]
    IntegerInSmoothPart(usize),
    #[error("expected {expected} entries, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("duplicate variable name {0:?}")]
    DuplicateName(String),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
}

/// `X = {x : rows, l ≤ x ≤ u, x_i ∈ ℤ for i ∈ I}` with finite bounds on `I`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedIntegerPolyhedron {
    /// Rows and bounds; the objective is unused and kept at zero.
    lp: LinearProgram,
    integers: Vec<usize>,
    is_integer: Vec<bool>,
    names: Vec<String>,
}

impl MixedIntegerPolyhedron {
    pub fn new(lp: LinearProgram, integers: impl IntoIterator<Item = usize>) -> Result<Self, ModelError> {
        let n = lp.num_vars();
        let names = (1..=n).map(|i| format!("x{i}")).collect();
        Self::with_names(lp, integers, names)
    }

    pub fn with_names(
        mut lp: LinearProgram,
        integers: impl IntoIterator<Item = usize>,
        names: Vec<String>,
    ) -> Result<Self, ModelError> {
        let n = lp.num_vars();
        if names.len() != n {
            return Err(ModelError::Dimension {
                expected: n,
                got: names.len(),
            });
        }
        lp.set_objective(vec![0.0; n])?;
        let (lp, integers) = Milp::new(lp, integers)?.into_parts();
        let mut is_integer = vec![false; n];
        for &i in &integers {
            is_integer[i] = true;
        }
        Ok(MixedIntegerPolyhedron {
            lp,
            integers,
            is_integer,
            names,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.lp.num_vars()
    }

    /// Sorted integer indices `I`.
    pub fn integers(&self) -> &[usize] {
        &self.integers
    }

    pub fn is_integer(&self, i: usize) -> bool {
        self.is_integer[i]
    }

    /// Indices outside `I`, ascending.
    pub fn real_indices(&self) -> Vec<usize> {
        (0..self.num_vars()).filter(|&i| !self.is_integer[i]).collect()
    }

    pub fn lower(&self) -> &[f64] {
        self.lp.lower()
    }

    pub fn upper(&self) -> &[f64] {
        self.lp.upper()
    }

    pub fn rows(&self) -> &[Constraint] {
        self.lp.rows()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// The underlying rows and bounds with a zero objective.
    pub fn lp(&self) -> &LinearProgram {
        &self.lp
    }

    /// `min ⟨c, x⟩ over X` as a MILP.
    pub fn milp(&self, objective: Vec<f64>) -> Result<Milp, ModelError> {
        let mut lp = self.lp.clone();
        lp.set_objective(objective)?;
        Ok(Milp::new(lp, self.integers.iter().copied())?)
    }

    /// The integer block `z` of `x`, rounded to the nearest integers.
    pub fn integer_block(&self, x: &[f64]) -> Vec<f64> {
        self.integers.iter().map(|&i| x[i].round()).collect()
    }

    pub fn check_feasible(&self, x: &[f64], feas_tol: f64, int_tol: f64) -> FeasibilityReport {
        assert_eq!(x.len(), self.num_vars(), "point dimension mismatch");
        let max_row_violation = self.lp.max_row_violation(x);
        let max_bound_violation = self.lp.max_bound_violation(x);
        let max_integrality_violation = self
            .integers
            .iter()
            .map(|&i| (x[i] - x[i].round()).abs())
            .fold(0.0, f64::max);
        FeasibilityReport {
            max_row_violation,
            max_bound_violation,
            max_integrality_violation,
            feasible: max_row_violation <= feas_tol
                && max_bound_violation <= feas_tol
                && max_integrality_violation <= int_tol,
        }
    }

    /// Feasibility at the default tolerances (rows/bounds 1e-8, integrality 1e-6).
    pub fn check_feasible_default(&self, x: &[f64]) -> FeasibilityReport {
        self.check_feasible(x, DEFAULT_FEAS_TOL, DEFAULT_INT_TOL)
    }
}

pub const DEFAULT_FEAS_TOL: f64 = 1e-8;
pub const DEFAULT_INT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub max_row_violation: f64,
    pub max_bound_violation: f64,
    pub max_integrality_violation: f64,
    pub feasible: bool,
}

/// Incremental construction of a [`MixedIntegerPolyhedron`] with named variables.
#[derive(Debug, Clone)]
pub struct PolyhedronBuilder {
    lp: LinearProgram,
    integers: Vec<usize>,
    names: Vec<String>,
}

impl Default for PolyhedronBuilder {
    fn default() -> Self {
        PolyhedronBuilder {
            lp: LinearProgram::new(0),
            integers: Vec::new(),
            names: Vec::new(),
        }
    }
}

impl PolyhedronBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64, integer: bool) -> Result<usize, ModelError> {
        let name = name.into();
        if self.names.contains(&name) {
            return Err(ModelError::DuplicateName(name));
        }
        let j = self.lp.add_variable(0.0, lower, upper)?;
        if integer {
            self.integers.push(j);
        }
        self.names.push(name);
        Ok(j)
    }

    pub fn add_row(&mut self, row: Constraint) -> Result<usize, ModelError> {
        Ok(self.lp.add_constraint(row)?)
    }

    pub fn num_vars(&self) -> usize {
        self.lp.num_vars()
    }

    pub fn build(self) -> Result<MixedIntegerPolyhedron, ModelError> {
        MixedIntegerPolyhedron::with_names(self.lp, self.integers, self.names)
    }
}

/// A smooth function of the real coordinates, read from the full vector `x`.
pub trait SmoothFn: Send + Sync + fmt::Debug {
    fn value(&self, x: &[f64]) -> Result<f64, EvalError>;

    /// Overwrites `grad` (same length as `x`) with the gradient.
    fn gradient(&self, x: &[f64], grad: &mut [f64]) -> Result<(), EvalError>;

    /// Equivalent expression over 1-based `x1, x2, …`, if one exists.
    fn to_expression(&self) -> Option<String> {
        None
    }

    /// Indices the function may depend on, if known.
    fn support(&self) -> Option<Vec<usize>> {
        None
    }
}

impl SmoothFn for crate::expr::Expression {
    fn value(&self, x: &[f64]) -> Result<f64, EvalError> {
        self.eval(x)
    }

    fn gradient(&self, x: &[f64], grad: &mut [f64]) -> Result<(), EvalError> {
        self.value_and_gradient(x, grad).map(|_| ())
    }

    fn to_expression(&self) -> Option<String> {
        Some(self.to_string())
    }

    fn support(&self) -> Option<Vec<usize>> {
        Some(self.variables().into_iter().map(|v| v - 1).collect())
    }
}

/// `f(x) = f1(u) + ⟨f2, z⟩`.
///
/// `f1` is evaluated with the integer coordinates zeroed, so it cannot see `z`
/// even if its implementation reads those slots.
#[derive(Debug, Clone)]
pub struct SmoothObjective {
    f1: Arc<dyn SmoothFn>,
    /// Parallel to `integers`.
    f2: Vec<f64>,
    integers: Vec<usize>,
    n: usize,
}

impl SmoothObjective {
    pub fn new(n: usize, f1: Arc<dyn SmoothFn>, integers: &[usize], f2: Vec<f64>) -> Result<Self, ModelError> {
        if f2.len() != integers.len() {
            return Err(ModelError::Dimension {
                expected: integers.len(),
                got: f2.len(),
            });
        }
        if let Some(support) = f1.support() {
            for j in support {
                if j >= n {
                    return Err(ModelError::Dimension { expected: n, got: j + 1 });
                }
                if integers.contains(&j) {
                    return Err(ModelError::IntegerInSmoothPart(j + 1));
                }
            }
        }
        Ok(SmoothObjective {
            f1,
            f2,
            integers: integers.to_vec(),
            n,
        })
    }

    /// Objective over `X` with `f1` and `f2` as given.
    pub fn for_polyhedron(x: &MixedIntegerPolyhedron, f1: Arc<dyn SmoothFn>, f2: Vec<f64>) -> Result<Self, ModelError> {
        Self::new(x.num_vars(), f1, x.integers(), f2)
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn f1(&self) -> &Arc<dyn SmoothFn> {
        &self.f1
    }

    pub fn f2(&self) -> &[f64] {
        &self.f2
    }

    pub fn integers(&self) -> &[usize] {
        &self.integers
    }

    fn real_part(&self, x: &[f64]) -> Vec<f64> {
        let mut u = x.to_vec();
        for &i in &self.integers {
            u[i] = 0.0;
        }
        u
    }

    fn linear_part(&self, x: &[f64]) -> f64 {
        self.integers.iter().zip(&self.f2).map(|(&i, c)| c * x[i]).sum()
    }

    pub fn value(&self, x: &[f64]) -> Result<f64, EvalError> {
        self.check_len(x)?;
        let v = self.f1.value(&self.real_part(x))? + self.linear_part(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    /// `(∇f1(u), f2)` as a full-length vector.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>, EvalError> {
        self.check_len(x)?;
        let mut g = vec![0.0; self.n];
        self.f1.gradient(&self.real_part(x), &mut g)?;
        for (&i, &c) in self.integers.iter().zip(&self.f2) {
            g[i] = c;
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(EvalError::NonFinite);
        }
        Ok(g)
    }

    fn check_len(&self, x: &[f64]) -> Result<(), EvalError> {
        if x.len() != self.n {
            return Err(EvalError::Dimension {
                needed: self.n,
                got: x.len(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NormKind {
    L1,
    Linf,
}

/// The seminorm applying ℓ1 or ℓ∞ to the real coordinates only.
#[derive(Debug, Clone, PartialEq)]
pub struct PlNorm {
    pub kind: NormKind,
    pub real_indices: Vec<usize>,
}

impl PlNorm {
    pub fn new(kind: NormKind, x: &MixedIntegerPolyhedron) -> Self {
        PlNorm {
            kind,
            real_indices: x.real_indices(),
        }
    }

    /// Norm over `n` variables with integer set `integers`.
    pub fn from_integers(kind: NormKind, n: usize, integers: &[usize]) -> Self {
        PlNorm {
            kind,
            real_indices: (0..n).filter(|i| !integers.contains(i)).collect(),
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        pl_norm(self, x)
    }

    /// `‖x − y‖_PL`.
    pub fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        let d = self.real_indices.iter().map(|&i| (x[i] - y[i]).abs());
        match self.kind {
            NormKind::L1 => d.sum(),
            NormKind::Linf => d.fold(0.0, f64::max),
        }
    }
}

pub fn pl_norm(norm: &PlNorm, x: &[f64]) -> f64 {
    let a = norm.real_indices.iter().map(|&i| x[i].abs());
    match norm.kind {
        NormKind::L1 => a.sum(),
        NormKind::Linf => a.fold(0.0, f64::max),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expression;
    use proptest::prelude::*;

    #[test]
    fn pl_norm_examples() {
        let linf = PlNorm::from_integers(NormKind::Linf, 3, &[2]);
        assert_eq!(pl_norm(&linf, &[1.0, -2.0, 7.0]), 2.0);
        for kind in [NormKind::L1, NormKind::Linf] {
            let all = PlNorm::from_integers(kind, 3, &[0, 1, 2]);
            assert_eq!(pl_norm(&all, &[5.0, 5.0, 5.0]), 0.0);
        }
        let l1 = PlNorm::from_integers(NormKind::L1, 3, &[1]);
        assert_eq!(pl_norm(&l1, &[1.5, 9.0, -0.5]), 2.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn pl_norm_is_a_seminorm(
            x in prop::collection::vec(-100.0f64..100.0, 5),
            y in prop::collection::vec(-100.0f64..100.0, 5),
            alpha in -10.0f64..10.0,
            linf in any::<bool>(),
        ) {
            let kind = if linf { NormKind::Linf } else { NormKind::L1 };
            let norm = PlNorm::from_integers(kind, 5, &[1, 3]);
            let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
            let scaled: Vec<f64> = x.iter().map(|a| alpha * a).collect();
            let (nx, ny) = (pl_norm(&norm, &x), pl_norm(&norm, &y));
            prop_assert!(pl_norm(&norm, &sum) <= nx + ny + 1e-12 * (1.0 + nx + ny));
            prop_assert!((pl_norm(&norm, &scaled) - alpha.abs() * nx).abs() <= 1e-12 * (1.0 + alpha.abs() * nx));
            let mut z_only = vec![0.0; 5];
            z_only[1] = x[1];
            z_only[3] = x[3];
            prop_assert_eq!(pl_norm(&norm, &z_only), 0.0);
        }
    }

    fn square_with_binary() -> MixedIntegerPolyhedron {
        let mut b = PolyhedronBuilder::new();
        let u = b.add_var("u", 0.0, 2.0, false).unwrap();
        let z = b.add_var("z", 0.0, 1.0, true).unwrap();
        b.add_row(Constraint::le([(u, 1.0), (z, -1.0)], 1.0)).unwrap();
        b.build().unwrap()
    }

    #[test]
    fn feasibility_report() {
        let x = square_with_binary();
        let on_boundary = x.check_feasible(&[2.0, 1.0], 1e-8, 1e-6);
        assert!(on_boundary.feasible);
        assert_eq!(on_boundary.max_row_violation, 0.0);
        assert_eq!(on_boundary.max_bound_violation, 0.0);
        let fractional = x.check_feasible(&[0.5, 0.5], 1e-8, 1e-6);
        assert!(!fractional.feasible);
        assert_eq!(fractional.max_integrality_violation, 0.5);
        assert!(!x.check_feasible(&[2.0, 0.0], 1e-8, 1e-6).feasible);
    }

    #[test]
    fn integer_bounds_must_be_finite() {
        let mut b = PolyhedronBuilder::new();
        b.add_var("z", 0.0, f64::INFINITY, true).unwrap();
        assert!(b.build().is_err());
    }

    #[test]
    fn objective_splits_real_and_integer_parts() {
        let x = square_with_binary();
        let f1 = Arc::new(Expression::parse("x1^2").unwrap());
        let f = SmoothObjective::for_polyhedron(&x, f1, vec![3.0]).unwrap();
        assert_eq!(f.value(&[1.5, 1.0]).unwrap(), 2.25 + 3.0);
        assert_eq!(f.gradient(&[1.5, 1.0]).unwrap(), vec![3.0, 3.0]);
        let bad = Arc::new(Expression::parse("x1 + x2").unwrap());
        assert_eq!(
            SmoothObjective::for_polyhedron(&x, bad, vec![0.0]).unwrap_err(),
            ModelError::IntegerInSmoothPart(2)
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn integer_gradient_block_is_constant(u in -5.0f64..5.0, v in -5.0f64..5.0, z in 0u8..2) {
            let mut b = PolyhedronBuilder::new();
            b.add_var("u", -10.0, 10.0, false).unwrap();
            b.add_var("z", 0.0, 1.0, true).unwrap();
            b.add_var("v", -10.0, 10.0, false).unwrap();
            let x = b.build().unwrap();
            let f1 = Arc::new(Expression::parse("exp(x1*x3) + x3^3").unwrap());
            let f = SmoothObjective::for_polyhedron(&x, f1, vec![-1.25]).unwrap();
            let g = f.gradient(&[u, z as f64, v]).unwrap();
            prop_assert_eq!(g[1], -1.25);
        }
    }
}
