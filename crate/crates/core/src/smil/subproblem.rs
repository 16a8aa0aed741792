//! The MILPs solved around the main loop: the trust-region subproblem, the
//! criticality measure, the ℓ1 feasibility projection and the polyhedral
//! projected-gradient step.

use crate::lp::Constraint;
use crate::milp::{solve_milp, Milp, MilpSettings, MilpStatus};
use crate::model::{MixedIntegerPolyhedron, NormKind, SmoothObjective};

use super::SmilError;

/// `min ⟨g, w⟩ over X ∩ {‖w − x̄‖_PL ≤ Δ}`.
///
/// For ℓ∞ the real bounds are intersected with `[x̄ − Δ, x̄ + Δ]`. For ℓ1,
/// variables `t_i ≥ |w_i − x̄_i|` with `Σ t_i ≤ Δ` are appended after the
/// original ones at zero cost. Integer variables are never localized.
pub fn build_tr_subproblem(
    set: &MixedIntegerPolyhedron,
    xbar: &[f64],
    g: &[f64],
    delta: f64,
    norm: NormKind,
) -> Result<Milp, SmilError> {
    if !(delta > 0.0) {
        return Err(SmilError::NonPositiveRadius(delta));
    }
    let n = set.num_vars();
    check_len(n, xbar.len())?;
    check_len(n, g.len())?;
    let mut lp = set.lp().clone();
    lp.set_objective(g.to_vec())?;
    let real = set.real_indices();
    match norm {
        NormKind::Linf => {
            for &i in &real {
                let (l, u) = (set.lower()[i], set.upper()[i]);
                // Clamping keeps the interval nonempty when x̄ sits a hair
                // outside its bounds.
                let lo = l.max(xbar[i] - delta).min(u);
                let hi = u.min(xbar[i] + delta).max(lo);
                lp.set_bounds(i, lo, hi)?;
            }
        }
        NormKind::L1 => {
            let mut budget = Vec::with_capacity(real.len());
            for &i in &real {
                let t = lp.add_variable(0.0, 0.0, f64::INFINITY)?;
                lp.add_constraint(Constraint::ge([(t, 1.0), (i, -1.0)], -xbar[i]))?;
                lp.add_constraint(Constraint::ge([(t, 1.0), (i, 1.0)], xbar[i]))?;
                budget.push((t, 1.0));
            }
            lp.add_constraint(Constraint::le(budget, delta))?;
        }
    }
    Ok(Milp::new(lp, set.integers().iter().copied())?)
}

/// `Ψ(x; Δ) = max ⟨∇f(x), x − w⟩ over w ∈ X ∩ B_PL(x, Δ)`.
///
/// Values in `[−tol_neg, 0)` are round-off and reported as 0; anything
/// lower is [`SmilError::NegativeCriticality`].
pub fn criticality_measure(
    set: &MixedIntegerPolyhedron,
    objective: &SmoothObjective,
    x: &[f64],
    delta: f64,
    norm: NormKind,
    milp: &MilpSettings,
    tol_neg: f64,
) -> Result<f64, SmilError> {
    if delta == 0.0 {
        return Ok(0.0);
    }
    let g = objective.gradient(x)?;
    let sub = build_tr_subproblem(set, x, &g, delta, norm)?;
    let out = solve_milp(&sub, milp);
    let w = match (out.status, out.x) {
        (MilpStatus::Optimal, Some(w)) => w,
        (status, _) => return Err(SmilError::Subproblem(status)),
    };
    let psi: f64 = g.iter().zip(x.iter().zip(&w)).map(|(gi, (xi, wi))| gi * (xi - wi)).sum();
    clamp_psi(psi, tol_neg)
}

pub(crate) fn clamp_psi(psi: f64, tol_neg: f64) -> Result<f64, SmilError> {
    if psi < -tol_neg {
        Err(SmilError::NegativeCriticality(psi))
    } else {
        Ok(psi.max(0.0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub x: Vec<f64>,
    /// `‖x − x0‖₁` over all coordinates.
    pub distance: f64,
    pub milp_nodes: usize,
}

/// A minimizer of `‖x − x0‖₁` over `X`.
pub fn initial_projection(set: &MixedIntegerPolyhedron, x0: &[f64], milp: &MilpSettings) -> Result<Projection, SmilError> {
    let n = set.num_vars();
    check_len(n, x0.len())?;
    let mut lp = set.lp().clone();
    for (i, &target) in x0.iter().enumerate() {
        let t = lp.add_variable(1.0, 0.0, f64::INFINITY)?;
        lp.add_constraint(Constraint::ge([(t, 1.0), (i, -1.0)], -target))?;
        lp.add_constraint(Constraint::ge([(t, 1.0), (i, 1.0)], target))?;
    }
    let sub = Milp::new(lp, set.integers().iter().copied())?;
    let out = solve_milp(&sub, milp);
    match (out.status, out.x) {
        (MilpStatus::Optimal, Some(w)) => {
            let x = w[..n].to_vec();
            let distance = x.iter().zip(x0).map(|(a, b)| (a - b).abs()).sum();
            Ok(Projection {
                x,
                distance,
                milp_nodes: out.nodes,
            })
        }
        (MilpStatus::Infeasible, _) => Err(SmilError::EmptySet),
        (status, _) => Err(SmilError::Subproblem(status)),
    }
}

/// `x⁺ ∈ argmin_{x ∈ X} ‖x̄ − γ∇f(x̄) − x‖_p` over all coordinates.
pub fn projected_gradient_step(
    set: &MixedIntegerPolyhedron,
    objective: &SmoothObjective,
    xbar: &[f64],
    gamma: f64,
    p: NormKind,
    milp: &MilpSettings,
) -> Result<Vec<f64>, SmilError> {
    let n = set.num_vars();
    check_len(n, xbar.len())?;
    let g = objective.gradient(xbar)?;
    let target: Vec<f64> = xbar.iter().zip(&g).map(|(x, gi)| x - gamma * gi).collect();
    let mut lp = set.lp().clone();
    match p {
        NormKind::L1 => {
            for (i, &y) in target.iter().enumerate() {
                let t = lp.add_variable(1.0, 0.0, f64::INFINITY)?;
                lp.add_constraint(Constraint::ge([(t, 1.0), (i, -1.0)], -y))?;
                lp.add_constraint(Constraint::ge([(t, 1.0), (i, 1.0)], y))?;
            }
        }
        NormKind::Linf => {
            let t = lp.add_variable(1.0, 0.0, f64::INFINITY)?;
            for (i, &y) in target.iter().enumerate() {
                lp.add_constraint(Constraint::ge([(t, 1.0), (i, -1.0)], -y))?;
                lp.add_constraint(Constraint::ge([(t, 1.0), (i, 1.0)], y))?;
            }
        }
    }
    let sub = Milp::new(lp, set.integers().iter().copied())?;
    let out = solve_milp(&sub, milp);
    match (out.status, out.x) {
        (MilpStatus::Optimal, Some(w)) => Ok(w[..n].to_vec()),
        (status, _) => Err(SmilError::Subproblem(status)),
    }
}

fn check_len(expected: usize, got: usize) -> Result<(), SmilError> {
    if expected != got {
        return Err(SmilError::Dimension { expected, got });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expression;
    use crate::model::PolyhedronBuilder;
    use std::sync::Arc;

    fn interval() -> (MixedIntegerPolyhedron, SmoothObjective) {
        let mut b = PolyhedronBuilder::new();
        b.add_var("x", 0.0, 2.0, false).unwrap();
        let set = b.build().unwrap();
        let f = SmoothObjective::for_polyhedron(&set, Arc::new(Expression::parse("x1").unwrap()), vec![]).unwrap();
        (set, f)
    }

    #[test]
    fn interval_subproblem() {
        let (set, _) = interval();
        for norm in [NormKind::L1, NormKind::Linf] {
            let sub = build_tr_subproblem(&set, &[1.0], &[1.0], 0.5, norm).unwrap();
            let out = solve_milp(&sub, &MilpSettings::default());
            assert!((out.x.unwrap()[0] - 0.5).abs() < 1e-12);
            let wide = build_tr_subproblem(&set, &[1.0], &[1.0], 1e6, norm).unwrap();
            assert_eq!(solve_milp(&wide, &MilpSettings::default()).x.unwrap()[0], 0.0);
        }
        assert!(build_tr_subproblem(&set, &[1.0], &[1.0], 0.0, NormKind::Linf).is_err());
    }

    #[test]
    fn integer_only_ball_is_inactive() {
        let mut b = PolyhedronBuilder::new();
        b.add_var("z1", -3.0, 3.0, true).unwrap();
        b.add_var("z2", 0.0, 2.0, true).unwrap();
        let set = b.build().unwrap();
        for delta in [1e-3, 1.0, 10.0] {
            let sub = build_tr_subproblem(&set, &[0.0, 1.0], &[1.0, -1.0], delta, NormKind::L1).unwrap();
            let out = solve_milp(&sub, &MilpSettings::default());
            assert_eq!(out.x.unwrap(), vec![-3.0, 2.0]);
        }
    }

    #[test]
    fn interval_criticality() {
        let (set, f) = interval();
        let s = MilpSettings::default();
        let psi = criticality_measure(&set, &f, &[1.0], 0.5, NormKind::Linf, &s, 1e-9).unwrap();
        assert!((psi - 0.5).abs() < 1e-12);
        assert_eq!(criticality_measure(&set, &f, &[0.0], 0.5, NormKind::Linf, &s, 1e-9).unwrap(), 0.0);
        assert_eq!(criticality_measure(&set, &f, &[1.0], 0.0, NormKind::Linf, &s, 1e-9).unwrap(), 0.0);
    }

    #[test]
    fn negative_values_beyond_tolerance_fail() {
        assert_eq!(clamp_psi(-5e-10, 1e-9).unwrap(), 0.0);
        assert!(matches!(clamp_psi(-2e-9, 1e-9), Err(SmilError::NegativeCriticality(_))));
    }

    #[test]
    fn projection_examples() {
        let mut b = PolyhedronBuilder::new();
        b.add_var("z", 0.0, 1.0, true).unwrap();
        let set = b.build().unwrap();
        let p = initial_projection(&set, &[0.4], &MilpSettings::default()).unwrap();
        assert_eq!(p.x, vec![0.0]);
        assert!((p.distance - 0.4).abs() < 1e-12);

        let (set, _) = interval();
        let p = initial_projection(&set, &[1.3], &MilpSettings::default()).unwrap();
        assert_eq!(p.distance, 0.0);
    }

    #[test]
    fn projected_gradient_examples() {
        let (set, f) = interval();
        let s = MilpSettings::default();
        let x = projected_gradient_step(&set, &f, &[1.0], 0.25, NormKind::L1, &s).unwrap();
        assert!((x[0] - 0.75).abs() < 1e-12);
        let flat = SmoothObjective::for_polyhedron(&set, Arc::new(Expression::parse("5").unwrap()), vec![]).unwrap();
        let x = projected_gradient_step(&set, &flat, &[1.3], 1.0, NormKind::Linf, &s).unwrap();
        assert_eq!(x, vec![1.3]);
    }
}
