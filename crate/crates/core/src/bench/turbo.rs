//! Point-to-point control of a car whose thrust triples while a hysteretic
//! turbo is engaged, transcribed on a uniform grid.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::lp::Constraint;
use crate::model::{
    encode_bigm_equality, encode_bigm_implication, LinearExpr, Literal, MixedIntegerPolyhedron, ModelError,
    PolyhedronBuilder, SmoothObjective, TurboCost,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurboParams {
    /// Number of grid intervals.
    pub n: usize,
    /// Horizon in seconds.
    pub t: f64,
    pub alpha_a: f64,
    pub alpha_b: f64,
    pub q_end: f64,
    pub a_max: f64,
    pub b_max: f64,
    pub v_max: f64,
    /// Turbo switches on above this speed.
    pub v_plus: f64,
    /// Turbo switches off below this speed.
    pub v_minus: f64,
    pub big_m: f64,
}

impl Default for TurboParams {
    fn default() -> Self {
        TurboParams {
            n: 25,
            t: 10.0,
            alpha_a: 1.0,
            alpha_b: 0.01,
            q_end: 150.0,
            a_max: 5.0,
            b_max: 10.0,
            v_max: 25.0,
            v_plus: 10.0,
            v_minus: 5.0,
            big_m: 20.0,
        }
    }
}

impl TurboParams {
    pub fn with_intervals(n: usize) -> Self {
        TurboParams {
            n,
            ..TurboParams::default()
        }
    }

    pub fn h(&self) -> f64 {
        self.t / self.n as f64
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.n == 0 {
            return Err("need at least one interval".into());
        }
        let positive = [self.t, self.a_max, self.b_max, self.v_max, self.big_m];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err("horizon, bounds and big-M must be positive".into());
        }
        // A zero target is allowed: it makes the idle trajectory feasible.
        if !(self.q_end >= 0.0 && self.q_end.is_finite()) {
            return Err("target position must be nonnegative".into());
        }
        if !(self.v_minus < self.v_plus) {
            return Err("need v_minus < v_plus".into());
        }
        Ok(())
    }
}

/// Variable indices per grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct TurboLayout {
    pub q: Vec<usize>,
    pub v: Vec<usize>,
    pub f: Vec<usize>,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub w: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct TurboInstance {
    pub params: TurboParams,
    pub set: MixedIntegerPolyhedron,
    pub objective: SmoothObjective,
    pub layout: TurboLayout,
}

/// Builds the transcription. Variables are laid out in blocks
/// `q, v, f, a, b, w`, each indexed by grid point `0..=N`; rows are the
/// `2N` dynamics equalities, then four thrust rows per grid point, then four
/// hysteresis rows per interval.
pub fn build_turbo(p: &TurboParams) -> Result<TurboInstance, ModelError> {
    p.validate().map_err(ModelError::InvalidParameters)?;

    let n = p.n;
    let h = p.h();
    let inf = f64::INFINITY;
    let mut b = PolyhedronBuilder::new();
    let block = |name: &str, lo: f64, hi: f64, integer: bool, b: &mut PolyhedronBuilder| -> Result<Vec<usize>, ModelError> {
        (0..=n).map(|k| b.add_var(format!("{name}{k}"), lo, hi, integer)).collect()
    };
    let q = block("q", -inf, inf, false, &mut b)?;
    let v = block("v", -p.v_max, p.v_max, false, &mut b)?;
    let f = block("f", -inf, inf, false, &mut b)?;
    let a = block("a", 0.0, p.a_max, false, &mut b)?;
    let bb = block("b", 0.0, p.b_max, false, &mut b)?;
    let w = block("w", 0.0, 1.0, true, &mut b)?;

    for k in 0..n {
        // (q_{k+1} − q_k)/h = (v_{k+1} + v_k)/2
        b.add_row(Constraint::eq(
            [(q[k + 1], 1.0), (q[k], -1.0), (v[k + 1], -h / 2.0), (v[k], -h / 2.0)],
            0.0,
        ))?;
        // (v_{k+1} − v_k)/h = (f_{k+1} + f_k)/2 − (b_{k+1} + b_k)/2
        b.add_row(Constraint::eq(
            [
                (v[k + 1], 1.0),
                (v[k], -1.0),
                (f[k + 1], -h / 2.0),
                (f[k], -h / 2.0),
                (bb[k + 1], h / 2.0),
                (bb[k], h / 2.0),
            ],
            0.0,
        ))?;
    }
    for k in 0..=n {
        // w_k = 0 ⇒ f_k = a_k and w_k = 1 ⇒ f_k = 3 a_k
        let plain = LinearExpr::new([(f[k], 1.0), (a[k], -1.0)], 0.0);
        for row in encode_bigm_equality(w[k], false, &plain, p.big_m)? {
            b.add_row(row)?;
        }
        let boosted = LinearExpr::new([(f[k], 1.0), (a[k], -3.0)], 0.0);
        for row in encode_bigm_equality(w[k], true, &boosted, p.big_m)? {
            b.add_row(row)?;
        }
    }
    for k in 0..n {
        let (wk, wn) = (w[k], w[k + 1]);
        let rules = [
            // stays off ⇒ v_k ≤ v+
            ([Literal::is_false(wk), Literal::is_false(wn)], Constraint::le([(v[k], 1.0)], p.v_plus)),
            // stays on ⇒ v_k ≥ v−
            ([Literal::is_true(wk), Literal::is_true(wn)], Constraint::ge([(v[k], 1.0)], p.v_minus)),
            // switches on ⇒ v_k ≥ v+
            ([Literal::is_false(wk), Literal::is_true(wn)], Constraint::ge([(v[k], 1.0)], p.v_plus)),
            // switches off ⇒ v_k ≤ v−
            ([Literal::is_true(wk), Literal::is_false(wn)], Constraint::le([(v[k], 1.0)], p.v_minus)),
        ];
        for (lits, row) in rules {
            b.add_row(encode_bigm_implication(&lits, &row, p.big_m)?)?;
        }
    }

    let mut set = b.build()?;
    set = fix_boundary(set, &[(q[0], 0.0), (v[0], 0.0), (w[0], 0.0), (q[n], p.q_end), (v[n], 0.0)])?;

    let cost = TurboCost {
        a: a.clone(),
        b: bb.clone(),
        h,
        alpha_a: p.alpha_a,
        alpha_b: p.alpha_b,
    };
    let objective = SmoothObjective::for_polyhedron(&set, Arc::new(cost), vec![0.0; n + 1])?;
    Ok(TurboInstance {
        params: *p,
        set,
        objective,
        layout: TurboLayout { q, v, f, a, b: bb, w },
    })
}

fn fix_boundary(set: MixedIntegerPolyhedron, fixes: &[(usize, f64)]) -> Result<MixedIntegerPolyhedron, ModelError> {
    let mut lp = set.lp().clone();
    for &(j, value) in fixes {
        lp.set_bounds(j, value, value)?;
    }
    MixedIntegerPolyhedron::with_names(lp, set.integers().iter().copied(), set.names().to_vec())
}

/// Initial guess with i.i.d. `N(0, 10²)` entries.
pub fn turbo_initial_guess(num_vars: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 10.0).expect("valid normal parameters");
    (0..num_vars).map(|_| normal.sample(&mut rng)).collect()
}

/// One grid point of a decoded trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub q: f64,
    pub v: f64,
    pub w: f64,
    pub a: f64,
    pub b: f64,
}

pub fn decode_trajectory(inst: &TurboInstance, x: &[f64]) -> Vec<TrajectoryPoint> {
    let h = inst.params.h();
    let l = &inst.layout;
    (0..=inst.params.n)
        .map(|k| TrajectoryPoint {
            t: k as f64 * h,
            q: x[l.q[k]],
            v: x[l.v[k]],
            w: x[l.w[k]].round(),
            a: x[l.a[k]],
            b: x[l.b[k]],
        })
        .collect()
}

/// Intervals violating the switching logic: off-to-off above `v+`, or
/// on-to-on below `v−`, beyond `tol`.
pub fn hysteresis_violations(inst: &TurboInstance, x: &[f64], tol: f64) -> Vec<usize> {
    let p = &inst.params;
    let l = &inst.layout;
    (0..p.n)
        .filter(|&k| {
            let (v, wk, wn) = (x[l.v[k]], x[l.w[k]].round(), x[l.w[k + 1]].round());
            (v > p.v_plus + tol && wk == 0.0 && wn == 0.0) || (v < p.v_minus - tol && wk == 1.0 && wn == 1.0)
        })
        .collect()
}
