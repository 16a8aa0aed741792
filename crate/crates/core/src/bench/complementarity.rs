//! Lifted complementarity set `{u ∈ [0,U]² : u1 u2 = 0}` with one binary
//! selecting which component may be nonzero.
//!
//! Variables are `(u1, u2, z)`. With a linear objective `g1 u1 + g2 u2 + g3 z`
//! the criticality of the two origins `(0,0,0)` and `(0,0,1)` has closed forms;
//! both the published cone description and the exact Δ-criticality condition
//! are provided so they can be compared against the computed measure.

use std::sync::Arc;

use crate::expr::Expression;
use crate::lp::Constraint;
use crate::model::{MixedIntegerPolyhedron, ModelError, PolyhedronBuilder, SmoothObjective};

/// The origin with `z = 0`.
pub const ORIGIN_OFF: [f64; 3] = [0.0, 0.0, 0.0];
/// The origin with `z = 1`.
pub const ORIGIN_ON: [f64; 3] = [0.0, 0.0, 1.0];

/// `0 ≤ u1 ≤ U z`, `0 ≤ u2 ≤ U (1 − z)`, `z ∈ {0, 1}`.
pub fn build_complementarity(u: f64) -> Result<MixedIntegerPolyhedron, ModelError> {
    if !(u > 0.0 && u.is_finite()) {
        return Err(ModelError::InvalidParameters(format!("bound must be positive, got {u}")));
    }
    let mut b = PolyhedronBuilder::new();
    let u1 = b.add_var("u1", 0.0, u, false)?;
    let u2 = b.add_var("u2", 0.0, u, false)?;
    let z = b.add_var("z", 0.0, 1.0, true)?;
    b.add_row(Constraint::le([(u1, 1.0), (z, -u)], 0.0))?;
    b.add_row(Constraint::le([(u2, 1.0), (z, u)], u))?;
    b.build()
}

/// `f(u, z) = g1 u1 + g2 u2 + g3 z`.
pub fn linear_objective(set: &MixedIntegerPolyhedron, g: [f64; 3]) -> Result<SmoothObjective, ModelError> {
    let text = format!(
        "{}*x1 + {}*x2",
        crate::model::functions::literal(g[0]),
        crate::model::functions::literal(g[1])
    );
    let f1 = Expression::parse(&text).expect("generated expression parses");
    SmoothObjective::for_polyhedron(set, Arc::new(f1), vec![g[2]])
}

/// Published cone condition at `(0,0,0)`: `−g ∈ (−∞, 0]³`.
pub fn published_critical_off(g: [f64; 3]) -> bool {
    g.iter().all(|&v| v >= 0.0)
}

/// Published cone condition at `(0,0,1)`: `−g ∈ (−∞, 0]² × [0, ∞)`.
pub fn published_critical_on(g: [f64; 3]) -> bool {
    g[0] >= 0.0 && g[1] >= 0.0 && g[2] <= 0.0
}

/// Exact `Ψ(ORIGIN_OFF; Δ) = 0` for `Δ ≤ U` under either PL-norm.
///
/// Staying at `z = 0` only moves `u2`; switching to `z = 1` gains `−g3`
/// plus at most `Δ max(0, −g1)` from `u1`.
pub fn exact_critical_off(g: [f64; 3], delta: f64) -> bool {
    g[1] >= 0.0 && -g[2] + delta * (-g[0]).max(0.0) <= 0.0
}

/// Exact `Ψ(ORIGIN_ON; Δ) = 0` for `Δ ≤ U` under either PL-norm.
pub fn exact_critical_on(g: [f64; 3], delta: f64) -> bool {
    g[0] >= 0.0 && g[2] + delta * (-g[1]).max(0.0) <= 0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::MilpSettings;
    use crate::model::NormKind;
    use crate::oracle::enumerate_minlp;
    use crate::refine::RefineConfig;
    use crate::smil::criticality_measure;

    #[test]
    fn binary_forces_one_component_to_zero() {
        let set = build_complementarity(1.0).unwrap();
        assert!(set.check_feasible_default(&[0.5, 0.0, 1.0]).feasible);
        assert!(!set.check_feasible_default(&[0.5, 0.0, 0.0]).feasible);
        assert!(set.check_feasible_default(&[0.0, 0.5, 0.0]).feasible);
        assert!(!set.check_feasible_default(&[0.0, 0.5, 1.0]).feasible);
        assert!(build_complementarity(0.0).is_err());
    }

    #[test]
    fn conditions_coincide_without_integer_cost() {
        for g in [[1.0, 2.0, 0.0], [-1.0, 2.0, 0.0], [1.0, -2.0, 0.0], [0.0, 0.0, 0.0]] {
            assert_eq!(published_critical_off(g), published_critical_on(g));
            assert_eq!(published_critical_off(g), exact_critical_off(g, 1e-3));
            assert_eq!(published_critical_on(g), exact_critical_on(g, 1e-3));
        }
    }

    #[test]
    fn exact_conditions_match_measure() {
        let set = build_complementarity(1.0).unwrap();
        let s = MilpSettings::default();
        let gs = [
            [-1.0, 1.0, 1.0],
            [1.0, 1.0, 1.0],
            [1.0, -1.0, -1.0],
            [0.5, 0.2, -0.3],
            [-0.5, 0.2, 0.3],
            [0.4, -0.7, 0.9],
        ];
        for g in gs {
            let f = linear_objective(&set, g).unwrap();
            for norm in [NormKind::Linf, NormKind::L1] {
                let off = criticality_measure(&set, &f, &ORIGIN_OFF, 1e-3, norm, &s, 1e-9).unwrap();
                let on = criticality_measure(&set, &f, &ORIGIN_ON, 1e-3, norm, &s, 1e-9).unwrap();
                assert_eq!(off <= 1e-12, exact_critical_off(g, 1e-3), "{g:?} off {off}");
                assert_eq!(on <= 1e-12, exact_critical_on(g, 1e-3), "{g:?} on {on}");
            }
        }
    }

    #[test]
    fn enumeration_matches_branch_minima() {
        // (u1 − 0.3)² + (u2 − 0.8)² + 0.1 z: branch z=0 gives 0.09, z=1 gives 0.74.
        let set = build_complementarity(1.0).unwrap();
        let f1 = Expression::parse("(x1 - 0.3)^2 + (x2 - 0.8)^2").unwrap();
        let f = SmoothObjective::for_polyhedron(&set, Arc::new(f1), vec![0.1]).unwrap();
        let cfg = RefineConfig {
            eps: 1e-12,
            ..RefineConfig::default()
        };
        let e = enumerate_minlp(&set, &f, 16, 3, &cfg, 7).unwrap();
        assert_eq!(e.feasible_combos, 2);
        let branch: Vec<f64> = e.table.iter().map(|r| r.best_f.unwrap()).collect();
        assert!((branch[0] - 0.09).abs() < 1e-6, "{branch:?}");
        assert!((branch[1] - 0.74).abs() < 1e-6, "{branch:?}");
        let (x, best) = e.best.unwrap();
        assert!((best - 0.09).abs() < 1e-6);
        assert_eq!(x[2], 0.0);
    }
}
