//! Bounded-variable revised simplex with an explicit dense basis inverse.
//!
//! Rows are put in the form `A x + s = b` with one logical variable per row;
//! the row sense becomes a bound on its logical (`≤`: `s ≥ 0`, `≥`: `s ≤ 0`,
//! `=`: `s = 0`). Nonbasic variables sit at a finite bound, or at 0 when free.
//! The inverse is updated in product form and rebuilt periodically.

use std::sync::Arc;

use super::{LinearProgram, LpOutcome, LpSettings, LpStatus, Sense};

const PIVOT_TOL: f64 = 1e-9;
const SINGULAR_TOL: f64 = 1e-11;
/// Relative row residual above which a basis is refactored before it is
/// declared optimal.
const RESIDUAL_TOL: f64 = 1e-10;
const REFACTOR_EVERY: usize = 64;
const DEGENERATE_STEP: f64 = 1e-12;
/// Consecutive degenerate pivots before switching to Bland's rule.
const BLAND_AFTER: usize = 50;
/// Consecutive degenerate dual pivots before giving up on the dual method.
const DUAL_STALL: usize = 500;
/// Dual infeasibility accepted when warm-starting the dual method.
const DUAL_FEAS_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic,
    AtLower,
    AtUpper,
    Free,
}

#[derive(Debug, Clone)]
struct Data {
    n: usize,
    m: usize,
    /// Sparse columns for structurals then logicals.
    cols: Vec<Vec<(usize, f64)>>,
    cost: Vec<f64>,
    rhs: Vec<f64>,
}

enum Step {
    Unbounded,
    Flip { t: f64 },
    Pivot { row: usize, t: f64, to_upper: bool },
}

enum DualEnd {
    PrimalFeasible,
    Infeasible,
    IterationLimit,
    Fallback,
}

struct Singular;

#[derive(Debug, Clone)]
pub(crate) struct Simplex {
    data: Arc<Data>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    state: Vec<VarState>,
    x: Vec<f64>,
    /// `basis[i]` is the variable basic in row position `i`.
    basis: Vec<usize>,
    /// Row-major `m × m` inverse of the basis matrix.
    binv: Vec<f64>,
    since_refactor: usize,
    iterations: usize,
}

impl Simplex {
    pub(crate) fn new(lp: &LinearProgram) -> Self {
        let n = lp.num_vars();
        let m = lp.num_rows();
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n + m];
        for (i, j, v) in lp.triplets() {
            cols[j].push((i, v));
        }
        for (i, col) in cols[n..].iter_mut().enumerate() {
            col.push((i, 1.0));
        }
        let mut cost = lp.objective().to_vec();
        cost.resize(n + m, 0.0);
        let rhs: Vec<f64> = lp.rows().iter().map(|r| r.rhs).collect();

        let mut lower = lp.lower().to_vec();
        let mut upper = lp.upper().to_vec();
        for row in lp.rows() {
            let (l, u) = match row.sense {
                Sense::Le => (0.0, f64::INFINITY),
                Sense::Ge => (f64::NEG_INFINITY, 0.0),
                Sense::Eq => (0.0, 0.0),
            };
            lower.push(l);
            upper.push(u);
        }

        let mut s = Simplex {
            data: Arc::new(Data { n, m, cols, cost, rhs }),
            lower,
            upper,
            state: vec![VarState::Basic; n + m],
            x: vec![0.0; n + m],
            basis: (n..n + m).collect(),
            binv: identity(m),
            since_refactor: 0,
            iterations: 0,
        };
        for j in 0..n {
            s.place_nonbasic(j);
        }
        s.recompute_basics();
        s
    }

    /// Replaces the structural costs; the basis stays primal feasible.
    pub(crate) fn set_objective(&mut self, c: &[f64]) {
        let data = Arc::make_mut(&mut self.data);
        data.cost[..c.len()].copy_from_slice(c);
    }

    /// Changes the bounds of structural `j`, keeping the basis.
    ///
    /// A nonbasic variable stays on the same side when that bound is finite,
    /// which preserves dual feasibility for a subsequent [`Simplex::resolve`].
    pub(crate) fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        debug_assert!(j < self.data.n && lower <= upper);
        self.lower[j] = lower;
        self.upper[j] = upper;
        match self.state[j] {
            VarState::Basic => {}
            VarState::AtUpper if upper.is_finite() => self.x[j] = upper,
            VarState::AtLower if lower.is_finite() => self.x[j] = lower,
            _ => self.place_nonbasic(j),
        }
    }

    /// Solves from the current basis with the primal method.
    pub(crate) fn solve_primal(&mut self, s: &LpSettings) -> LpOutcome {
        let start = self.iterations;
        let status = self.run_primal(s, start);
        self.outcome(status, start)
    }

    /// Re-optimizes after bound changes, using the dual method when the
    /// current basis is still dual feasible.
    pub(crate) fn resolve(&mut self, s: &LpSettings) -> LpOutcome {
        let start = self.iterations;
        self.recompute_basics();
        let status = match self.dual_loop(s, start) {
            DualEnd::PrimalFeasible | DualEnd::Fallback => self.run_primal(s, start),
            DualEnd::Infeasible => LpStatus::Infeasible,
            DualEnd::IterationLimit => LpStatus::IterationLimit,
        };
        self.outcome(status, start)
    }

    fn outcome(&self, status: LpStatus, start: usize) -> LpOutcome {
        let iterations = self.iterations - start;
        if status != LpStatus::Optimal {
            return LpOutcome::without_solution(status, iterations);
        }
        let n = self.data.n;
        let x = self.x[..n].to_vec();
        let objective = self.data.cost[..n].iter().zip(&x).map(|(c, v)| c * v).sum();
        LpOutcome {
            status,
            x: Some(x),
            objective,
            iterations,
        }
    }

    fn place_nonbasic(&mut self, j: usize) {
        if self.lower[j].is_finite() {
            self.state[j] = VarState::AtLower;
            self.x[j] = self.lower[j];
        } else if self.upper[j].is_finite() {
            self.state[j] = VarState::AtUpper;
            self.x[j] = self.upper[j];
        } else {
            self.state[j] = VarState::Free;
            self.x[j] = 0.0;
        }
    }

    fn reset_to_slack_basis(&mut self) {
        let n = self.data.n;
        let m = self.data.m;
        for j in 0..n {
            self.place_nonbasic(j);
        }
        for i in 0..m {
            self.state[n + i] = VarState::Basic;
        }
        self.basis = (n..n + m).collect();
        self.binv = identity(m);
        self.since_refactor = 0;
        self.recompute_basics();
    }

    fn run_primal(&mut self, s: &LpSettings, start: usize) -> LpStatus {
        match self.primal_loop(s, start) {
            LpStatus::NumericalFailure => {
                self.reset_to_slack_basis();
                self.primal_loop(s, start)
            }
            st => st,
        }
    }

    /// `x_B = B⁻¹ (b − N x_N)`.
    fn recompute_basics(&mut self) {
        let m = self.data.m;
        let mut r = self.data.rhs.clone();
        for (j, col) in self.data.cols.iter().enumerate() {
            if self.state[j] == VarState::Basic || self.x[j] == 0.0 {
                continue;
            }
            let xj = self.x[j];
            for &(i, v) in col {
                r[i] -= v * xj;
            }
        }
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            let v: f64 = row.iter().zip(&r).map(|(a, b)| a * b).sum();
            self.x[self.basis[i]] = v;
        }
    }

    /// Rebuilds `B⁻¹` by Gauss-Jordan elimination with partial pivoting.
    fn refactor(&mut self) -> Result<(), Singular> {
        let m = self.data.m;
        let mut b = vec![0.0; m * m];
        for (k, &j) in self.basis.iter().enumerate() {
            for &(i, v) in &self.data.cols[j] {
                b[i * m + k] = v;
            }
        }
        let mut inv = identity(m);
        for c in 0..m {
            let mut p = c;
            let mut best = b[c * m + c].abs();
            for r in c + 1..m {
                let v = b[r * m + c].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best < SINGULAR_TOL {
                return Err(Singular);
            }
            if p != c {
                for k in 0..m {
                    b.swap(p * m + k, c * m + k);
                    inv.swap(p * m + k, c * m + k);
                }
            }
            let piv = 1.0 / b[c * m + c];
            for k in 0..m {
                b[c * m + k] *= piv;
                inv[c * m + k] *= piv;
            }
            let (pivot_b, pivot_inv) = (b[c * m..(c + 1) * m].to_vec(), inv[c * m..(c + 1) * m].to_vec());
            for r in 0..m {
                if r == c {
                    continue;
                }
                let f = b[r * m + c];
                if f == 0.0 {
                    continue;
                }
                axpy(&mut b[r * m + c..(r + 1) * m], -f, &pivot_b[c..]);
                axpy(&mut inv[r * m..(r + 1) * m], -f, &pivot_inv);
            }
        }
        self.binv = inv;
        self.since_refactor = 0;
        self.recompute_basics();
        Ok(())
    }

    /// `B⁻¹ a_j`.
    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.data.m;
        let mut out = vec![0.0; m];
        for &(k, v) in &self.data.cols[j] {
            for (i, o) in out.iter_mut().enumerate() {
                *o += self.binv[i * m + k] * v;
            }
        }
        out
    }

    /// `c_Bᵀ B⁻¹`.
    fn btran(&self, cb: &[f64]) -> Vec<f64> {
        let m = self.data.m;
        let mut y = vec![0.0; m];
        for (i, &c) in cb.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let row = &self.binv[i * m..(i + 1) * m];
            for (yk, &b) in y.iter_mut().zip(row) {
                *yk += c * b;
            }
        }
        y
    }

    fn col_dot(&self, j: usize, y: &[f64]) -> f64 {
        self.data.cols[j].iter().map(|&(i, v)| v * y[i]).sum()
    }

    fn pivot(&mut self, r: usize, q: usize, alpha: &[f64]) {
        let m = self.data.m;
        let inv_piv = 1.0 / alpha[r];
        for k in 0..m {
            self.binv[r * m + k] *= inv_piv;
        }
        let pivot_row = self.binv[r * m..(r + 1) * m].to_vec();
        for (i, row) in self.binv.chunks_exact_mut(m).enumerate() {
            let a = alpha[i];
            if i == r || a == 0.0 {
                continue;
            }
            axpy(row, -a, &pivot_row);
        }
        self.state[q] = VarState::Basic;
        self.basis[r] = q;
        self.since_refactor += 1;
    }

    fn infeasibility(&self, j: usize) -> f64 {
        (self.lower[j] - self.x[j]).max(self.x[j] - self.upper[j]).max(0.0)
    }

    /// Basic costs for the current phase. Phase 1 minimizes the total bound
    /// violation of the basic variables.
    fn phase_costs(&self, feas_tol: f64) -> (bool, Vec<f64>) {
        let mut phase1 = false;
        let mut cb = vec![0.0; self.data.m];
        for (i, &b) in self.basis.iter().enumerate() {
            if self.x[b] < self.lower[b] - feas_tol {
                cb[i] = -1.0;
                phase1 = true;
            } else if self.x[b] > self.upper[b] + feas_tol {
                cb[i] = 1.0;
                phase1 = true;
            }
        }
        if !phase1 {
            for (i, &b) in self.basis.iter().enumerate() {
                cb[i] = self.data.cost[b];
            }
        }
        (phase1, cb)
    }

    fn is_fixed(&self, j: usize) -> bool {
        self.upper[j] - self.lower[j] <= 0.0
    }

    /// Entering variable and direction (+1 increase, -1 decrease).
    fn price(&self, y: &[f64], phase1: bool, opt_tol: f64, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.data.n + self.data.m {
            let st = self.state[j];
            if st == VarState::Basic || self.is_fixed(j) {
                continue;
            }
            let c = if phase1 { 0.0 } else { self.data.cost[j] };
            let d = c - self.col_dot(j, y);
            let dir = match st {
                VarState::AtLower if d < -opt_tol => 1.0,
                VarState::AtUpper if d > opt_tol => -1.0,
                VarState::Free if d.abs() > opt_tol => -d.signum(),
                _ => continue,
            };
            if bland {
                return Some((j, dir));
            }
            if d.abs() > best_score {
                best_score = d.abs();
                best = Some((j, dir));
            }
        }
        best
    }

    /// Harris two-pass ratio test; Bland mode takes the plain minimum ratio
    /// with ties broken by smallest variable index.
    fn ratio_test(&self, q: usize, dir: f64, alpha: &[f64], phase1: bool, feas_tol: f64, bland: bool) -> Step {
        // (row, exact ratio, relaxed ratio, leaves at upper)
        let mut cands: Vec<(usize, f64, f64, bool)> = Vec::new();
        for (i, &a) in alpha.iter().enumerate() {
            if a.abs() <= PIVOT_TOL {
                continue;
            }
            let b = self.basis[i];
            let xb = self.x[b];
            let (l, u) = (self.lower[b], self.upper[b]);
            let rate = -dir * a;
            if rate < 0.0 {
                if phase1 && xb > u + feas_tol {
                    cands.push((i, (xb - u) / -rate, (xb - u + feas_tol) / -rate, true));
                } else if !(phase1 && xb < l - feas_tol) && l.is_finite() {
                    let dist = (xb - l).max(0.0);
                    cands.push((i, dist / -rate, (dist + feas_tol) / -rate, false));
                }
            } else if phase1 && xb < l - feas_tol {
                cands.push((i, (l - xb) / rate, (l - xb + feas_tol) / rate, false));
            } else if !(phase1 && xb > u + feas_tol) && u.is_finite() {
                let dist = (u - xb).max(0.0);
                cands.push((i, dist / rate, (dist + feas_tol) / rate, true));
            }
        }
        let range = self.upper[q] - self.lower[q];

        let chosen = if bland {
            let mut best: Option<(usize, f64, bool)> = None;
            for &(i, t, _, up) in &cands {
                let better = match best {
                    None => true,
                    Some((bi, bt, _)) => t < bt - DEGENERATE_STEP || (t <= bt + DEGENERATE_STEP && self.basis[i] < self.basis[bi]),
                };
                if better {
                    best = Some((i, t, up));
                }
            }
            best
        } else {
            let t_max = cands.iter().map(|c| c.2).fold(f64::INFINITY, f64::min);
            let mut best: Option<(usize, f64, bool)> = None;
            let mut best_abs = 0.0;
            for &(i, t, _, up) in &cands {
                if t <= t_max && alpha[i].abs() > best_abs {
                    best_abs = alpha[i].abs();
                    best = Some((i, t, up));
                }
            }
            best
        };

        match chosen {
            Some((_, t, _)) if range.is_finite() && range <= t => Step::Flip { t: range },
            Some((row, t, to_upper)) => Step::Pivot { row, t, to_upper },
            None if range.is_finite() => Step::Flip { t: range },
            None => Step::Unbounded,
        }
    }

    fn primal_loop(&mut self, s: &LpSettings, start: usize) -> LpStatus {
        let limit = s.iteration_limit(self.data.n, self.data.m);
        let mut bland = false;
        let mut degenerate = 0usize;
        loop {
            if self.since_refactor >= REFACTOR_EVERY && self.refactor().is_err() {
                return LpStatus::NumericalFailure;
            }
            let (phase1, cb) = self.phase_costs(s.feas_tol);
            let y = self.btran(&cb);
            let Some((q, dir)) = self.price(&y, phase1, s.opt_tol, bland) else {
                // Refactor only when accumulated update error is visible in
                // the row residuals.
                if self.since_refactor > 0 && self.primal_residual() > RESIDUAL_TOL {
                    if self.refactor().is_err() {
                        return LpStatus::NumericalFailure;
                    }
                    continue;
                }
                return if phase1 { LpStatus::Infeasible } else { LpStatus::Optimal };
            };
            if self.iterations - start >= limit {
                return LpStatus::IterationLimit;
            }
            let alpha = self.ftran(q);
            let t = match self.ratio_test(q, dir, &alpha, phase1, s.feas_tol, bland) {
                Step::Unbounded => {
                    if self.since_refactor > 0 {
                        if self.refactor().is_err() {
                            return LpStatus::NumericalFailure;
                        }
                        continue;
                    }
                    // The phase-1 objective is bounded below by zero.
                    return if phase1 { LpStatus::NumericalFailure } else { LpStatus::Unbounded };
                }
                Step::Flip { t } => {
                    self.shift(q, dir * t, &alpha);
                    if dir > 0.0 {
                        self.state[q] = VarState::AtUpper;
                        self.x[q] = self.upper[q];
                    } else {
                        self.state[q] = VarState::AtLower;
                        self.x[q] = self.lower[q];
                    }
                    t
                }
                Step::Pivot { row, t, to_upper } => {
                    self.shift(q, dir * t, &alpha);
                    let leaving = self.basis[row];
                    if to_upper {
                        self.state[leaving] = VarState::AtUpper;
                        self.x[leaving] = self.upper[leaving];
                    } else {
                        self.state[leaving] = VarState::AtLower;
                        self.x[leaving] = self.lower[leaving];
                    }
                    self.pivot(row, q, &alpha);
                    t
                }
            };
            self.iterations += 1;
            if t < DEGENERATE_STEP {
                degenerate += 1;
                if degenerate >= BLAND_AFTER {
                    bland = true;
                }
            } else {
                degenerate = 0;
                bland = false;
            }
        }
    }

    /// `max_i |(A x − b)_i| / (1 + |b_i|)` over all rows, slacks included.
    fn primal_residual(&self) -> f64 {
        let mut acc = vec![0.0; self.data.m];
        for (j, col) in self.data.cols.iter().enumerate() {
            let xj = self.x[j];
            if xj == 0.0 {
                continue;
            }
            for &(i, v) in col {
                acc[i] += v * xj;
            }
        }
        acc.iter()
            .zip(&self.data.rhs)
            .map(|(a, b)| (a - b).abs() / (1.0 + b.abs()))
            .fold(0.0, f64::max)
    }

    /// Moves nonbasic `q` by `delta` and the basics along `-alpha · delta`.
    fn shift(&mut self, q: usize, delta: f64, alpha: &[f64]) {
        if delta == 0.0 {
            return;
        }
        self.x[q] += delta;
        for (i, &a) in alpha.iter().enumerate() {
            if a != 0.0 {
                self.x[self.basis[i]] -= a * delta;
            }
        }
    }

    fn reduced_costs(&self) -> Vec<f64> {
        let cb: Vec<f64> = self.basis.iter().map(|&b| self.data.cost[b]).collect();
        let y = self.btran(&cb);
        (0..self.data.n + self.data.m)
            .map(|j| {
                if self.state[j] == VarState::Basic {
                    0.0
                } else {
                    self.data.cost[j] - self.col_dot(j, &y)
                }
            })
            .collect()
    }

    fn dual_loop(&mut self, s: &LpSettings, start: usize) -> DualEnd {
        let limit = s.iteration_limit(self.data.n, self.data.m);
        let mut d = self.reduced_costs();
        for (j, &dj) in d.iter().enumerate() {
            if self.is_fixed(j) {
                continue;
            }
            let bad = match self.state[j] {
                VarState::Basic => false,
                VarState::AtLower => dj < -DUAL_FEAS_TOL,
                VarState::AtUpper => dj > DUAL_FEAS_TOL,
                VarState::Free => dj.abs() > DUAL_FEAS_TOL,
            };
            if bad {
                return DualEnd::Fallback;
            }
        }
        let m = self.data.m;
        let mut degenerate = 0usize;
        let mut row_r = vec![0.0; self.data.n + m];
        loop {
            if self.since_refactor >= REFACTOR_EVERY {
                if self.refactor().is_err() {
                    return DualEnd::Fallback;
                }
                d = self.reduced_costs();
            }
            let mut leave: Option<usize> = None;
            let mut worst = s.feas_tol;
            for (i, &b) in self.basis.iter().enumerate() {
                let inf = self.infeasibility(b);
                if inf > worst {
                    worst = inf;
                    leave = Some(i);
                }
            }
            let Some(r) = leave else {
                return DualEnd::PrimalFeasible;
            };
            if self.iterations - start >= limit {
                return DualEnd::IterationLimit;
            }
            let b = self.basis[r];
            let going_up = self.x[b] < self.lower[b];
            let rho = self.binv[r * m..(r + 1) * m].to_vec();

            // (column, alpha_rj, ratio)
            let mut cands: Vec<(usize, f64, f64)> = Vec::new();
            for j in 0..self.data.n + m {
                let st = self.state[j];
                if st == VarState::Basic || self.is_fixed(j) {
                    continue;
                }
                let a = self.col_dot(j, &rho);
                row_r[j] = a;
                let (ok, dj) = match st {
                    VarState::AtLower => (if going_up { a < -PIVOT_TOL } else { a > PIVOT_TOL }, d[j].max(0.0)),
                    VarState::AtUpper => (if going_up { a > PIVOT_TOL } else { a < -PIVOT_TOL }, (-d[j]).max(0.0)),
                    VarState::Free => (a.abs() > PIVOT_TOL, d[j].abs()),
                    VarState::Basic => unreachable!(),
                };
                if ok {
                    cands.push((j, a, dj / a.abs()));
                }
            }
            let t_max = cands
                .iter()
                .map(|&(j, a, _)| {
                    let dj = match self.state[j] {
                        VarState::AtLower => d[j].max(0.0),
                        VarState::AtUpper => (-d[j]).max(0.0),
                        _ => d[j].abs(),
                    };
                    (dj + s.opt_tol) / a.abs()
                })
                .fold(f64::INFINITY, f64::min);
            let mut chosen: Option<(usize, f64, f64)> = None;
            for &(j, a, t) in &cands {
                if t <= t_max && chosen.map_or(true, |(_, ba, _)| a.abs() > ba.abs()) {
                    chosen = Some((j, a, t));
                }
            }
            let Some((q, a_rq, ratio)) = chosen else {
                if self.since_refactor > 0 {
                    if self.refactor().is_err() {
                        return DualEnd::Fallback;
                    }
                    d = self.reduced_costs();
                    continue;
                }
                return DualEnd::Infeasible;
            };
            let alpha = self.ftran(q);
            if (alpha[r] - a_rq).abs() > 1e-6 * (1.0 + a_rq.abs()) {
                if self.since_refactor > 0 {
                    if self.refactor().is_err() {
                        return DualEnd::Fallback;
                    }
                    d = self.reduced_costs();
                    continue;
                }
                return DualEnd::Fallback;
            }
            let target = if going_up { self.lower[b] } else { self.upper[b] };
            let theta = (self.x[b] - target) / alpha[r];
            self.shift(q, theta, &alpha);
            self.x[b] = target;
            self.state[b] = if going_up { VarState::AtLower } else { VarState::AtUpper };
            self.pivot(r, q, &alpha);
            // d_j −= (d_q / α_rq) α_rj on the nonbasic columns; the leaving
            // variable has α_rb = 1.
            let step = d[q] / a_rq;
            for j in 0..self.data.n + m {
                let st = self.state[j];
                if st != VarState::Basic && !self.is_fixed(j) && j != b {
                    d[j] -= step * row_r[j];
                }
            }
            d[q] = 0.0;
            d[b] = -step;
            self.iterations += 1;
            if ratio < DEGENERATE_STEP {
                degenerate += 1;
                if degenerate > DUAL_STALL {
                    return DualEnd::Fallback;
                }
            } else {
                degenerate = 0;
            }
        }
    }
}

/// `y += a x`.
fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn identity(m: usize) -> Vec<f64> {
    let mut v = vec![0.0; m * m];
    for i in 0..m {
        v[i * m + i] = 1.0;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{solve_lp, Constraint};

    fn knapsack_relaxation() -> LinearProgram {
        let mut lp = LinearProgram::with_bounds(vec![-5.0, -4.0, -3.0], vec![0.0; 3], vec![1.0; 3]).unwrap();
        lp.add_constraint(Constraint::le([(0, 2.0), (1, 3.0), (2, 1.0)], 4.0)).unwrap();
        lp.add_constraint(Constraint::le([(0, 4.0), (1, 1.0), (2, 2.0)], 5.0)).unwrap();
        lp
    }

    #[test]
    fn warm_resolve_matches_cold_solve() {
        let lp = knapsack_relaxation();
        let s = LpSettings::default();
        let mut engine = Simplex::new(&lp);
        let root = engine.solve_primal(&s);
        assert_eq!(root.status, LpStatus::Optimal);
        for j in 0..3 {
            for (lo, hi) in [(0.0, 0.0), (1.0, 1.0)] {
                let mut warm = engine.clone();
                warm.set_bounds(j, lo, hi);
                let w = warm.resolve(&s);
                let mut cold_lp = lp.clone();
                cold_lp.set_bounds(j, lo, hi).unwrap();
                let c = solve_lp(&cold_lp, &s).unwrap();
                assert_eq!(w.status, c.status);
                if c.status == LpStatus::Optimal {
                    assert!((w.objective - c.objective).abs() < 1e-9, "{} vs {}", w.objective, c.objective);
                }
            }
        }
    }

    #[test]
    fn warm_resolve_detects_infeasibility() {
        let mut lp = LinearProgram::with_bounds(vec![-1.0, -1.0], vec![0.0; 2], vec![1.0; 2]).unwrap();
        lp.add_constraint(Constraint::le([(0, 1.0), (1, 1.0)], 1.0)).unwrap();
        let s = LpSettings::default();
        let mut engine = Simplex::new(&lp);
        assert_eq!(engine.solve_primal(&s).status, LpStatus::Optimal);
        engine.set_bounds(0, 1.0, 1.0);
        engine.set_bounds(1, 1.0, 1.0);
        assert_eq!(engine.resolve(&s).status, LpStatus::Infeasible);
    }
}
