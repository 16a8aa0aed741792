//! Logic-to-linear encodings over binary variables.

use crate::lp::{Constraint, Sense};

use super::ModelError;

/// `Σ coeffs · x + constant`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearExpr {
    pub coeffs: Vec<(usize, f64)>,
    pub constant: f64,
}

impl LinearExpr {
    pub fn new(coeffs: impl IntoIterator<Item = (usize, f64)>, constant: f64) -> Self {
        LinearExpr {
            coeffs: coeffs.into_iter().collect(),
            constant,
        }
    }
}

/// A binary variable required to take the value `value`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Literal {
    pub var: usize,
    pub value: bool,
}

impl Literal {
    pub fn is_true(var: usize) -> Self {
        Literal { var, value: true }
    }

    pub fn is_false(var: usize) -> Self {
        Literal { var, value: false }
    }
}

/// `⋁_{i∈pos} z_i ∨ ⋁_{j∈neg} ¬z_j` as `Σ_pos z_i + Σ_neg (1 − z_j) ≥ 1`.
pub fn encode_clause(positives: &[usize], negatives: &[usize]) -> Result<Constraint, ModelError> {
    if positives.is_empty() && negatives.is_empty() {
        return Err(ModelError::EmptyClause);
    }
    let coeffs = positives
        .iter()
        .map(|&i| (i, 1.0))
        .chain(negatives.iter().map(|&j| (j, -1.0)));
    Ok(Constraint::ge(coeffs, 1.0 - negatives.len() as f64))
}

/// `z_a ⊻ z_b` as `z_a + z_b = 1`.
pub fn encode_xor(a: usize, b: usize) -> Constraint {
    Constraint::eq([(a, 1.0), (b, 1.0)], 1.0)
}

/// `−M s ≤ expr ≤ M s` with `s = 1 − z_guard` when `polarity`, else
/// `s = z_guard`; `expr` is forced to zero whenever `s = 0`.
///
/// Returns the `≤` row first.
pub fn encode_bigm_equality(guard: usize, polarity: bool, expr: &LinearExpr, m: f64) -> Result<[Constraint; 2], ModelError> {
    if !(m > 0.0) {
        return Err(ModelError::NonPositiveBigM(m));
    }
    let k = expr.constant;
    let terms = expr.coeffs.iter().copied();
    let rows = if polarity {
        // expr ≤ M(1 − z) and expr ≥ −M(1 − z)
        [
            Constraint::le(terms.clone().chain([(guard, m)]), m - k),
            Constraint::ge(terms.chain([(guard, -m)]), -m - k),
        ]
    } else {
        // expr ≤ M z and expr ≥ −M z
        [
            Constraint::le(terms.clone().chain([(guard, -m)]), -k),
            Constraint::ge(terms.chain([(guard, m)]), -k),
        ]
    };
    Ok(rows)
}

/// `(⋀ literals) ⇒ row`, relaxing the row by `M` for every violated literal.
///
/// For `a·x ≤ b` this is `a·x ≤ b + M Σ_ℓ [ℓ false]`, where `[z = 1 false]`
/// is `1 − z` and `[z = 0 false]` is `z`; `≥` rows are relaxed downwards.
pub fn encode_bigm_implication(literals: &[Literal], row: &Constraint, m: f64) -> Result<Constraint, ModelError> {
    if !(m > 0.0) {
        return Err(ModelError::NonPositiveBigM(m));
    }
    let sign = match row.sense {
        Sense::Le => -1.0,
        Sense::Ge => 1.0,
        Sense::Eq => return Err(ModelError::EqualityImplication),
    };
    // Relaxation term M·Σ ind moved to the left-hand side with `sign`.
    let mut coeffs = row.coeffs.clone();
    let mut rhs = row.rhs;
    for lit in literals {
        if lit.value {
            // ind = 1 − z
            coeffs.push((lit.var, -sign * m));
            rhs += sign * -m;
        } else {
            // ind = z
            coeffs.push((lit.var, sign * m));
        }
    }
    Ok(Constraint::new(coeffs, row.sense, rhs))
}
