//! Fixed-integer refinement by an active-set conditional-gradient method.
//!
//! The integer block is pinned through equal bounds, so every linear
//! minimization step is an LP over the real slice of `X` at the current `z`.
//! Each iteration takes one Frank-Wolfe step, which certifies progress
//! through its gap and lets the iterate leave a face, followed by projected
//! conjugate-gradient steps inside the smallest face through the iterate.
//! The in-face steps settle the minimizer of a face that plain Frank-Wolfe
//! only reaches by zigzagging between vertices.

use thiserror::Error;

use crate::expr::EvalError;
use crate::lp::{LinearProgram, LpSettings, LpStatus, Sense, Simplex};
use crate::model::{MixedIntegerPolyhedron, SmoothObjective};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineConfig {
    /// Stop once the conditional-gradient gap is at most this.
    pub eps: f64,
    /// Cap on linear minimization steps.
    pub max_iterations: usize,
    /// Armijo sufficient-decrease coefficient.
    pub sigma: f64,
    /// Armijo backtracking factor.
    pub beta: f64,
    pub lp: LpSettings,
}

impl Default for RefineConfig {
    fn default() -> Self {
        RefineConfig {
            eps: 1e-8,
            max_iterations: 500,
            sigma: 1e-4,
            beta: 0.5,
            lp: LpSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RefineError {
    #[error("objective evaluation failed at the starting point: {0}")]
    Eval(#[from] EvalError),
    #[error("linear minimization step ended with status {0:?}")]
    Lp(LpStatus),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefineResult {
    pub x: Vec<f64>,
    pub f: f64,
    /// Linear minimization steps performed.
    pub iterations: usize,
    /// Last gap `max_s ⟨∇f(x), x − s⟩` computed.
    pub gap: f64,
    pub converged: bool,
    /// Gap per linear minimization, in order.
    pub gaps: Vec<f64>,
    /// Objective after each accepted step, starting with `f(x0)`.
    pub values: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

/// Smallest Armijo step tried before declaring stagnation.
const MIN_STEP: f64 = 1e-16;
/// Relative distance at which a bound or row counts as active.
const ACTIVE_TOL: f64 = 1e-9;
/// Constraint violation a step may reach when the start has less.
const VIOLATION_TOL: f64 = 1e-9;

fn violation(lp: &LinearProgram, x: &[f64]) -> f64 {
    lp.max_row_violation(x).max(lp.max_bound_violation(x))
}

/// Decreases `f` over `{w ∈ X : w_I = x_I}` starting from feasible `x`.
///
/// The result keeps `x_I` bit-for-bit and never has a larger objective.
pub fn refine_fixed_integer(
    set: &MixedIntegerPolyhedron,
    objective: &SmoothObjective,
    x: &[f64],
    cfg: &RefineConfig,
) -> Result<RefineResult, RefineError> {
    let mut lp = set.lp().clone();
    for &i in set.integers() {
        lp.set_bounds(i, x[i], x[i]).map_err(|_| RefineError::Lp(LpStatus::Infeasible))?;
    }
    let mut engine = Simplex::new(&lp);
    let mut search = LineSearch {
        set,
        objective,
        cfg,
        lp: &lp,
        allowed: 0.0,
    };

    let mut x = x.to_vec();
    let mut f = objective.value(&x)?;
    search.allowed = violation(&lp, &x).max(VIOLATION_TOL);
    let mut gaps = Vec::new();
    let mut values = vec![f];
    let mut gap = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;

    'outer: while iterations < cfg.max_iterations {
        let g = objective.gradient(&x)?;
        engine.set_objective(&g);
        let out = engine.solve_primal(&cfg.lp);
        iterations += 1;
        if out.status != LpStatus::Optimal {
            return Err(RefineError::Lp(out.status));
        }
        let s = out.x.expect("optimal outcome carries a solution");
        // x is feasible for the LP, so a negative gap is round-off.
        gap = (dot(&g, &x) - out.objective).max(0.0);
        gaps.push(gap);
        if gap <= cfg.eps {
            converged = true;
            break;
        }

        let d: Vec<f64> = s.iter().zip(&x).map(|(a, b)| a - b).collect();
        let fw = search.run(&x, f, &d, gap, 1.0);
        let moved = fw.is_some();
        if let Some((trial, ft)) = fw {
            x = trial;
            f = ft;
            values.push(f);
        }

        // Conjugate gradients on the active face, restarted whenever the
        // face changes. At most one step per free dimension.
        let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
        let mut face = ActiveFace::at(&lp, &x);
        let mut in_face_moved = false;
        for _ in 0..face.free_dims.max(1) {
            let Ok(g) = objective.gradient(&x) else {
                break 'outer;
            };
            let pg = face.project(&g);
            let pg_sq = dot(&pg, &pg);
            // Below this the direction is round-off and need not lie in the face.
            if pg_sq <= 1e-20 * (1.0 + dot(&g, &g)) {
                break;
            }
            let mut d: Vec<f64> = pg.iter().map(|v| -v).collect();
            if let Some((pg_old, d_old)) = &prev {
                // Polak-Ribiere, clipped at zero.
                let beta = (pg_sq - dot(&pg, pg_old)).max(0.0) / dot(pg_old, pg_old);
                d.iter_mut().zip(d_old).for_each(|(a, b)| *a += beta * b);
                if dot(&g, &d) >= 0.0 {
                    d = pg.iter().map(|v| -v).collect();
                }
            }
            let slope = -dot(&g, &d);
            let t_max = face.max_step(&lp, &x, &d);
            let Some((trial, ft)) = search.run(&x, f, &d, slope, t_max) else {
                break;
            };
            x = trial;
            f = ft;
            values.push(f);
            in_face_moved = true;
            let next = ActiveFace::at(&lp, &x);
            if next.active != face.active {
                break;
            }
            face = next;
            prev = Some((pg, d));
        }
        if !moved && !in_face_moved {
            break;
        }
    }

    Ok(RefineResult {
        x,
        f,
        iterations,
        gap,
        converged,
        gaps,
        values,
    })
}

/// Armijo backtracking along a feasible segment `x + t d`, `t ∈ [0, t_max]`,
/// followed by one quadratic-interpolation trial.
struct LineSearch<'a> {
    set: &'a MixedIntegerPolyhedron,
    objective: &'a SmoothObjective,
    cfg: &'a RefineConfig,
    lp: &'a LinearProgram,
    /// Trials violating the slice by more than this are rejected, which
    /// guards in-face directions against drift off their face.
    allowed: f64,
}

impl LineSearch<'_> {
    fn point(&self, x: &[f64], d: &[f64], t: f64) -> Vec<f64> {
        let mut p: Vec<f64> = x.iter().zip(d).map(|(a, b)| a + t * b).collect();
        // d vanishes on the fixed block; copying also keeps the sign of zero.
        for &i in self.set.integers() {
            p[i] = x[i];
        }
        p
    }

    fn value(&self, p: &[f64]) -> Option<f64> {
        if violation(self.lp, p) > self.allowed {
            return None;
        }
        self.objective.value(p).ok()
    }

    /// `slope` is `-⟨∇f(x), d⟩ > 0`. Returns the accepted point and value.
    fn run(&self, x: &[f64], f: f64, d: &[f64], slope: f64, t_max: f64) -> Option<(Vec<f64>, f64)> {
        if !(slope > 0.0) || !(t_max > 0.0) {
            return None;
        }
        // An unbounded ray starts from a unit step; interpolation can extend it.
        let mut t = if t_max.is_finite() { t_max } else { 1.0 };
        let mut accepted = None;
        while t >= MIN_STEP {
            let trial = self.point(x, d, t);
            if let Some(ft) = self.value(&trial) {
                if ft <= f - self.cfg.sigma * t * slope {
                    accepted = Some((trial, ft));
                    break;
                }
            }
            t *= self.cfg.beta;
        }
        let (mut best, mut fb) = accepted?;
        // Small sigma accepts steps up to twice the line minimizer, where a
        // quadratic has barely moved. The minimizer of the quadratic through
        // f, -slope and f(t) is exact for quadratics; a lower value there
        // still satisfies Armijo at the smaller of the two steps.
        let curvature = fb - f + slope * t;
        if curvature > 0.0 {
            let tq = (slope * t * t / (2.0 * curvature)).min(t_max);
            if tq > 0.0 && tq != t {
                let cand = self.point(x, d, tq);
                if let Some(fq) = self.value(&cand) {
                    if fq < fb && fq <= f - self.cfg.sigma * tq.min(t) * slope {
                        best = cand;
                        fb = fq;
                    }
                }
            }
        }
        Some((best, fb))
    }
}

/// Active bounds and rows of the slice LP at a point, with an orthonormal
/// basis of their normals.
struct ActiveFace {
    /// Active flags, bounds first, then rows.
    active: Vec<bool>,
    basis: Vec<Vec<f64>>,
    free_dims: usize,
}

impl ActiveFace {
    fn at(lp: &LinearProgram, x: &[f64]) -> Self {
        let n = lp.num_vars();
        let (lower, upper) = (lp.lower(), lp.upper());
        let mut active = Vec::with_capacity(n + lp.num_rows());
        let mut normals = Vec::new();
        for j in 0..n {
            let near = |b: f64| (x[j] - b).abs() <= ACTIVE_TOL * (1.0 + b.abs());
            let on = lower[j] == upper[j] || near(lower[j]) || near(upper[j]);
            active.push(on);
            if on {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                normals.push(e);
            }
        }
        for row in lp.rows() {
            let on = row.sense == Sense::Eq || (row.activity(x) - row.rhs).abs() <= ACTIVE_TOL * (1.0 + row.rhs.abs());
            active.push(on);
            if on {
                let mut a = vec![0.0; n];
                row.coeffs.iter().for_each(|&(j, v)| a[j] = v);
                normals.push(a);
            }
        }

        // Modified Gram-Schmidt with one reorthogonalization pass; dependent
        // normals are dropped.
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for mut v in normals {
            let norm0 = dot(&v, &v).sqrt();
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(q, &v);
                    v.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
                }
            }
            let norm = dot(&v, &v).sqrt();
            if norm > 1e-10 * norm0.max(1.0) {
                v.iter_mut().for_each(|a| *a /= norm);
                basis.push(v);
            }
        }
        ActiveFace {
            active,
            free_dims: n - basis.len(),
            basis,
        }
    }

    /// Projection onto the directions that keep every active constraint tight.
    fn project(&self, g: &[f64]) -> Vec<f64> {
        let mut p = g.to_vec();
        for q in &self.basis {
            let c = dot(q, &p);
            p.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
        }
        // Active bounds must not drift through round-off.
        for (pj, &on) in p.iter_mut().zip(&self.active) {
            if on {
                *pj = 0.0;
            }
        }
        p
    }

    /// Largest `t` keeping `x + t d` within the inactive bounds and rows.
    fn max_step(&self, lp: &LinearProgram, x: &[f64], d: &[f64]) -> f64 {
        let n = lp.num_vars();
        let mut t = f64::INFINITY;
        for j in (0..n).filter(|&j| !self.active[j]) {
            if d[j] > 0.0 {
                t = t.min((lp.upper()[j] - x[j]) / d[j]);
            } else if d[j] < 0.0 {
                t = t.min((lp.lower()[j] - x[j]) / d[j]);
            }
        }
        for (row, _) in lp.rows().iter().zip(&self.active[n..]).filter(|(_, &on)| !on) {
            let ad = row.activity(d);
            let slack = row.rhs - row.activity(x);
            match row.sense {
                Sense::Le if ad > 0.0 => t = t.min(slack / ad),
                Sense::Ge if ad < 0.0 => t = t.min(slack / ad),
                _ => {}
            }
        }
        t.max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expression;
    use crate::lp::Constraint;
    use crate::model::PolyhedronBuilder;
    use std::sync::Arc;

    fn objective(set: &MixedIntegerPolyhedron, text: &str, f2: Vec<f64>) -> SmoothObjective {
        SmoothObjective::for_polyhedron(set, Arc::new(Expression::parse(text).unwrap()), f2).unwrap()
    }

    #[test]
    fn interval_minimum() {
        let mut b = PolyhedronBuilder::new();
        b.add_var("x", 0.0, 2.0, false).unwrap();
        let set = b.build().unwrap();
        let f = objective(&set, "(x1 - 0.7)^2", vec![]);
        let cfg = RefineConfig {
            eps: 1e-10,
            max_iterations: 200,
            ..RefineConfig::default()
        };
        let r = refine_fixed_integer(&set, &f, &[2.0], &cfg).unwrap();
        assert!((r.x[0] - 0.7).abs() < 1e-4, "{:?}", r.x);
        assert!(r.iterations <= 200);
    }

    #[test]
    fn stationary_start_is_returned_unchanged() {
        let mut b = PolyhedronBuilder::new();
        b.add_var("x", 0.0, 2.0, false).unwrap();
        let set = b.build().unwrap();
        let f = objective(&set, "x1", vec![]);
        let r = refine_fixed_integer(&set, &f, &[0.0], &RefineConfig::default()).unwrap();
        assert_eq!(r.x, vec![0.0]);
        assert_eq!(r.iterations, 1);
        assert!(r.converged);
    }

    #[test]
    fn simplex_quadratic_matches_grid() {
        // min (x-0.8)^2 + 2(y-0.6)^2 + x y over x + y <= 1, x, y >= 0
        let mut b = PolyhedronBuilder::new();
        b.add_var("x", 0.0, 1.0, false).unwrap();
        b.add_var("y", 0.0, 1.0, false).unwrap();
        b.add_row(Constraint::le([(0, 1.0), (1, 1.0)], 1.0)).unwrap();
        let set = b.build().unwrap();
        let text = "(x1 - 0.8)^2 + 2*(x2 - 0.6)^2 + x1*x2";
        let f = objective(&set, text, vec![]);
        let r = refine_fixed_integer(&set, &f, &[0.0, 0.0], &RefineConfig::default()).unwrap();

        let e = Expression::parse(text).unwrap();
        let mut best = f64::INFINITY;
        let steps = 1000;
        for i in 0..=steps {
            for j in 0..=(steps - i) {
                let p = [i as f64 / steps as f64, j as f64 / steps as f64];
                best = best.min(e.eval(&p).unwrap());
            }
        }
        assert!((r.f - best).abs() < 1e-3, "{} vs {}", r.f, best);
        assert!(r.values.windows(2).all(|w| w[1] <= w[0]));
        assert!(r.gaps.iter().all(|&g| g >= 0.0));
    }

    #[test]
    fn interior_start_reaches_face_minimizer() {
        // Long flat box with the minimizer on its bottom edge.
        let mut b = PolyhedronBuilder::new();
        b.add_var("x", -4.0, 3.0, false).unwrap();
        b.add_var("y", -1.0, 0.5, false).unwrap();
        let set = b.build().unwrap();
        let f = objective(&set, "3.5*(x1 - 1.2)^2 + 3.7*(x1 - 1.2)*(x2 + 1.2) + 1.2*(x2 + 1.2)^2", vec![]);
        let r = refine_fixed_integer(&set, &f, &[-1.9, -0.1], &RefineConfig::default()).unwrap();
        assert!(r.converged, "gap {}", r.gap);
        assert!(r.iterations <= 10, "{} iterations", r.iterations);
        assert!((r.x[1] + 1.0).abs() < 1e-9);
        // On y = -1: d/dx = 7 (x - 1.2) + 3.7 * 0.2 = 0.
        assert!((r.x[0] - (1.2 - 0.74 / 7.0)).abs() < 1e-8, "{:?}", r.x);
    }

    #[test]
    fn integer_block_is_preserved() {
        let mut b = PolyhedronBuilder::new();
        b.add_var("u", -3.0, 3.0, false).unwrap();
        b.add_var("z", 0.0, 2.0, true).unwrap();
        b.add_row(Constraint::le([(0, 1.0), (1, 1.0)], 2.5)).unwrap();
        let set = b.build().unwrap();
        let f = objective(&set, "(x1 - 3)^2", vec![1.0]);
        let r = refine_fixed_integer(&set, &f, &[-3.0, 2.0], &RefineConfig::default()).unwrap();
        assert_eq!(r.x[1].to_bits(), 2.0f64.to_bits());
        assert!((r.x[0] - 0.5).abs() < 1e-9);
    }
}
