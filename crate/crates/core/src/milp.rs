//! Branch-and-bound for mixed-integer linear programs.
//!
//! Best-bound-first node selection (deeper nodes first on ties, then creation
//! order), most-fractional branching with the lowest index on ties, and
//! children re-optimized from the parent basis with the dual simplex method.
//! The first incumbent found at a given objective is kept.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::{LinearProgram, LpError, LpOutcome, LpSettings, LpStatus, Simplex};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MilpError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("integer index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("integer variable {var} must have finite bounds, got [{lower}, {upper}]")]
    UnboundedInteger { var: usize, lower: f64, upper: f64 },
}

/// An LP together with the set of variables required to be integral.
#[derive(Debug, Clone, PartialEq)]
pub struct Milp {
    lp: LinearProgram,
    /// Sorted, without duplicates.
    integers: Vec<usize>,
}

impl Milp {
    pub fn new(lp: LinearProgram, integers: impl IntoIterator<Item = usize>) -> Result<Self, MilpError> {
        lp.validate()?;
        let mut integers: Vec<usize> = integers.into_iter().collect();
        integers.sort_unstable();
        integers.dedup();
        for &i in &integers {
            if i >= lp.num_vars() {
                return Err(MilpError::IndexOutOfRange(i));
            }
            let (lower, upper) = (lp.lower()[i], lp.upper()[i]);
            if !lower.is_finite() || !upper.is_finite() {
                return Err(MilpError::UnboundedInteger { var: i, lower, upper });
            }
        }
        Ok(Milp { lp, integers })
    }

    pub fn lp(&self) -> &LinearProgram {
        &self.lp
    }

    pub fn integers(&self) -> &[usize] {
        &self.integers
    }

    pub fn into_parts(self) -> (LinearProgram, Vec<usize>) {
        (self.lp, self.integers)
    }

    /// Largest `|x_i − round(x_i)|` over the integer variables.
    pub fn integrality_violation(&self, x: &[f64]) -> f64 {
        self.integers
            .iter()
            .map(|&i| (x[i] - x[i].round()).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MilpSettings {
    pub int_tol: f64,
    pub gap_abs: f64,
    pub gap_rel: f64,
    /// Maximum number of LP relaxations solved.
    pub node_limit: usize,
    pub lp: LpSettings,
    /// Keep a `(parent bound, child bound)` record per solved node.
    pub record_nodes: bool,
}

impl Default for MilpSettings {
    fn default() -> Self {
        MilpSettings {
            int_tol: 1e-6,
            gap_abs: 1e-8,
            gap_rel: 1e-8,
            node_limit: 100_000,
            lp: LpSettings::default(),
            record_nodes: false,
        }
    }
}

impl MilpSettings {
    fn prune_tol(&self, incumbent: f64) -> f64 {
        self.gap_abs.max(self.gap_rel * incumbent.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MilpStatus {
    Optimal,
    Infeasible,
    /// Node budget exhausted; the incumbent, if any, is reported.
    NodeLimit,
    Unbounded,
    /// The LP engine failed on some node.
    SolverFailure,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeRecord {
    pub depth: usize,
    pub parent_bound: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpOutcome {
    pub status: MilpStatus,
    /// Incumbent; present for `Optimal` and possibly for `NodeLimit`.
    pub x: Option<Vec<f64>>,
    pub objective: f64,
    /// LP relaxations solved.
    pub nodes: usize,
    pub best_bound: f64,
    pub lp_iterations: usize,
    pub node_log: Vec<NodeRecord>,
}

impl MilpOutcome {
    pub(crate) fn failed(status: MilpStatus, nodes: usize, lp_iterations: usize) -> Self {
        let (objective, best_bound) = match status {
            MilpStatus::Infeasible => (f64::INFINITY, f64::INFINITY),
            MilpStatus::Unbounded => (f64::NEG_INFINITY, f64::NEG_INFINITY),
            _ => (f64::NAN, f64::NAN),
        };
        MilpOutcome {
            status,
            x: None,
            objective,
            nodes,
            best_bound,
            lp_iterations,
            node_log: Vec::new(),
        }
    }
}

struct Node {
    bound: f64,
    depth: usize,
    seq: usize,
    engine: Simplex,
    x: Vec<f64>,
    /// Current bounds of the integer variables, parallel to `Milp::integers`.
    int_bounds: Vec<(f64, f64)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    /// Max-heap order: smaller bound, then deeper, then older is "greater".
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.seq.cmp(&self.seq))
    }
}

struct Search<'a> {
    p: &'a Milp,
    s: &'a MilpSettings,
    heap: BinaryHeap<Node>,
    incumbent: Option<(Vec<f64>, f64)>,
    /// Smallest bound among nodes discarded by the gap test.
    pruned_bound: f64,
    nodes: usize,
    lp_iterations: usize,
    seq: usize,
    log: Vec<NodeRecord>,
}

enum Solved {
    Done,
    Unbounded,
    Failure,
}

impl Search<'_> {
    fn cutoff(&self) -> f64 {
        match &self.incumbent {
            Some((_, v)) => v - self.s.prune_tol(*v),
            None => f64::INFINITY,
        }
    }

    /// Index into `p.integers` of the most fractional variable.
    fn branching_var(&self, x: &[f64]) -> Option<usize> {
        let mut best = None;
        let mut best_dist = self.s.int_tol;
        for (k, &i) in self.p.integers.iter().enumerate() {
            let frac = x[i] - x[i].floor();
            let dist = frac.min(1.0 - frac);
            if dist > best_dist {
                best_dist = dist;
                best = Some(k);
            }
        }
        best
    }

    /// Files a freshly solved relaxation: prune, record an incumbent, or queue.
    fn absorb(
        &mut self,
        engine: Simplex,
        out: LpOutcome,
        depth: usize,
        parent_bound: f64,
        int_bounds: Vec<(f64, f64)>,
    ) -> Solved {
        self.nodes += 1;
        self.lp_iterations += out.iterations;
        match out.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => return Solved::Done,
            LpStatus::Unbounded => return Solved::Unbounded,
            LpStatus::IterationLimit | LpStatus::NumericalFailure => return Solved::Failure,
        }
        let x = out.x.expect("optimal outcome carries a solution");
        let bound = out.objective;
        if self.s.record_nodes {
            self.log.push(NodeRecord {
                depth,
                parent_bound,
                bound,
            });
        }
        if bound >= self.cutoff() {
            self.pruned_bound = self.pruned_bound.min(bound);
            return Solved::Done;
        }
        if self.branching_var(&x).is_none() {
            self.incumbent = Some((x, bound));
            return Solved::Done;
        }
        self.seq += 1;
        self.heap.push(Node {
            bound,
            depth,
            seq: self.seq,
            engine,
            x,
            int_bounds,
        });
        Solved::Done
    }

    /// Re-solves a child; falls back to a cold start if the warm start fails.
    fn solve_child(&self, mut engine: Simplex, int_bounds: &[(f64, f64)]) -> (Simplex, LpOutcome) {
        for (&i, &(lo, hi)) in self.p.integers.iter().zip(int_bounds) {
            engine.set_bounds(i, lo, hi);
        }
        let out = engine.resolve(&self.s.lp);
        if matches!(out.status, LpStatus::IterationLimit | LpStatus::NumericalFailure) {
            let mut lp = self.p.lp.clone();
            for (&i, &(lo, hi)) in self.p.integers.iter().zip(int_bounds) {
                lp.set_bounds(i, lo, hi).expect("branching keeps bounds ordered");
            }
            let mut cold = Simplex::new(&lp);
            let cold_out = cold.solve_primal(&self.s.lp);
            return (cold, cold_out);
        }
        (engine, out)
    }
}

/// Solves `p` to optimality within the gap tolerances.
///
/// With no integer variables the result is exactly that of
/// [`crate::lp::solve_lp`].
pub fn solve_milp(p: &Milp, s: &MilpSettings) -> MilpOutcome {
    let mut root = Simplex::new(&p.lp);
    let root_out = root.solve_primal(&s.lp);
    let int_bounds: Vec<(f64, f64)> = p
        .integers
        .iter()
        .map(|&i| (p.lp.lower()[i], p.lp.upper()[i]))
        .collect();

    let mut search = Search {
        p,
        s,
        heap: BinaryHeap::new(),
        incumbent: None,
        pruned_bound: f64::INFINITY,
        nodes: 0,
        lp_iterations: 0,
        seq: 0,
        log: Vec::new(),
    };

    match search.absorb(root, root_out, 0, f64::NEG_INFINITY, int_bounds) {
        Solved::Done => {}
        Solved::Unbounded => return MilpOutcome::failed(MilpStatus::Unbounded, 1, search.lp_iterations),
        Solved::Failure => return MilpOutcome::failed(MilpStatus::SolverFailure, 1, search.lp_iterations),
    }

    while let Some(node) = search.heap.pop() {
        if node.bound >= search.cutoff() {
            search.pruned_bound = search.pruned_bound.min(node.bound);
            continue;
        }
        if search.nodes >= s.node_limit {
            let open_bound = node.bound;
            return finish(search, MilpStatus::NodeLimit, open_bound);
        }
        let k = search.branching_var(&node.x).expect("queued nodes are fractional");
        let i = p.integers[k];
        let v = node.x[i];

        let mut down_bounds = node.int_bounds.clone();
        down_bounds[k].1 = v.floor();
        let mut up_bounds = node.int_bounds;
        up_bounds[k].0 = v.ceil();

        let children = [(down_bounds, node.engine.clone()), (up_bounds, node.engine)];
        for (bounds, engine) in children {
            // A child whose integer range is empty needs no relaxation.
            if bounds[k].0 > bounds[k].1 {
                continue;
            }
            let (engine, out) = search.solve_child(engine, &bounds);
            match search.absorb(engine, out, node.depth + 1, node.bound, bounds) {
                Solved::Done => {}
                Solved::Unbounded | Solved::Failure => {
                    return MilpOutcome::failed(MilpStatus::SolverFailure, search.nodes, search.lp_iterations)
                }
            }
        }
    }
    finish(search, MilpStatus::Optimal, f64::INFINITY)
}

fn finish(search: Search<'_>, status: MilpStatus, open_bound: f64) -> MilpOutcome {
    let open = search.heap.iter().map(|n| n.bound).fold(open_bound, f64::min);
    let mut bound = open.min(search.pruned_bound);
    match search.incumbent {
        Some((x, objective)) => {
            bound = bound.min(objective);
            MilpOutcome {
                status,
                x: Some(x),
                objective,
                nodes: search.nodes,
                best_bound: bound,
                lp_iterations: search.lp_iterations,
                node_log: search.log,
            }
        }
        None => {
            let status = if status == MilpStatus::Optimal { MilpStatus::Infeasible } else { status };
            let mut out = MilpOutcome::failed(status, search.nodes, search.lp_iterations);
            if status == MilpStatus::NodeLimit {
                out.best_bound = bound;
            }
            out.node_log = search.log;
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{solve_lp, Constraint};

    #[test]
    fn two_candidate_knapsack() {
        let mut lp = LinearProgram::with_bounds(vec![-2.0, -3.0], vec![0.0; 2], vec![1.0; 2]).unwrap();
        lp.add_constraint(Constraint::le([(0, 1.0), (1, 1.0)], 1.0)).unwrap();
        let p = Milp::new(lp, [0, 1]).unwrap();
        let out = solve_milp(&p, &MilpSettings::default());
        assert_eq!(out.status, MilpStatus::Optimal);
        assert_eq!(out.x.unwrap(), vec![0.0, 1.0]);
        assert_eq!(out.objective, -3.0);
    }

    #[test]
    fn empty_integer_slice_is_infeasible() {
        let lp = LinearProgram::with_bounds(vec![1.0], vec![0.4], vec![0.6]).unwrap();
        let p = Milp::new(lp, [0]).unwrap();
        let out = solve_milp(&p, &MilpSettings::default());
        assert_eq!(out.status, MilpStatus::Infeasible);
        assert!(out.x.is_none());
    }

    #[test]
    fn unbounded_integer_rejected() {
        let lp = LinearProgram::with_bounds(vec![1.0], vec![0.0], vec![f64::INFINITY]).unwrap();
        assert!(matches!(Milp::new(lp, [0]), Err(MilpError::UnboundedInteger { .. })));
    }

    #[test]
    fn continuous_problem_reproduces_lp() {
        let mut lp = LinearProgram::with_bounds(vec![-3.0, -5.0], vec![0.0; 2], vec![10.0; 2]).unwrap();
        lp.add_constraint(Constraint::le([(0, 3.0), (1, 2.0)], 18.0)).unwrap();
        lp.add_constraint(Constraint::le([(1, 2.0)], 12.0)).unwrap();
        let direct = solve_lp(&lp, &LpSettings::default()).unwrap();
        let out = solve_milp(&Milp::new(lp, []).unwrap(), &MilpSettings::default());
        assert_eq!(out.status, MilpStatus::Optimal);
        assert_eq!(out.x.unwrap(), direct.x.unwrap());
        assert_eq!(out.objective, direct.objective);
    }

    #[test]
    fn general_integers_need_branching() {
        // max x + y s.t. 2x + 2y <= 7, x - y <= 0.5, x, y in {0..5}
        let mut lp = LinearProgram::with_bounds(vec![-1.0, -1.0], vec![0.0; 2], vec![5.0; 2]).unwrap();
        lp.add_constraint(Constraint::le([(0, 2.0), (1, 2.0)], 7.0)).unwrap();
        lp.add_constraint(Constraint::le([(0, 1.0), (1, -1.0)], 0.5)).unwrap();
        let s = MilpSettings {
            record_nodes: true,
            ..MilpSettings::default()
        };
        let out = solve_milp(&Milp::new(lp, [0, 1]).unwrap(), &s);
        assert_eq!(out.status, MilpStatus::Optimal);
        assert!((out.objective + 3.0).abs() < 1e-12);
        assert!(out.nodes > 1);
        for r in &out.node_log {
            assert!(r.bound >= r.parent_bound - 1e-9);
        }
        assert!(out.objective - out.best_bound <= 1e-8);
    }

    #[test]
    fn node_limit_keeps_incumbent() {
        let mut lp = LinearProgram::with_bounds(vec![-1.0, -1.0, -1.0], vec![0.0; 3], vec![3.0; 3]).unwrap();
        lp.add_constraint(Constraint::le([(0, 2.0), (1, 2.0), (2, 2.0)], 7.0)).unwrap();
        let s = MilpSettings {
            node_limit: 1,
            ..MilpSettings::default()
        };
        let out = solve_milp(&Milp::new(lp, [0, 1, 2]).unwrap(), &s);
        assert_eq!(out.status, MilpStatus::NodeLimit);
    }
}
