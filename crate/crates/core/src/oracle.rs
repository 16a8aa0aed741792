//! Brute-force reference solvers.
//!
//! These are deliberately naive: vertex enumeration for LPs, exhaustive
//! integer enumeration over LPs for MILPs, and enumeration plus multistart
//! refinement for the nonlinear problems. They share only the LP engine with
//! the production solvers and never call branch-and-bound or the trust-region
//! loop.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::lp::{solve_lp, LinearProgram, LpOutcome, LpSettings, LpStatus, Sense};
use crate::milp::{Milp, MilpOutcome, MilpStatus};
use crate::model::{MixedIntegerPolyhedron, SmoothObjective};
use crate::refine::{refine_fixed_integer, RefineConfig};

pub const DEFAULT_SIZE_LIMIT: usize = 14;
pub const DEFAULT_COMBO_LIMIT: usize = 4096;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("problem size {size} exceeds the oracle limit {limit}")]
    SizeLimit { size: usize, limit: usize },
    #[error("vertex enumeration needs finite bounds; variable {0} is unbounded")]
    InfiniteBound(usize),
    #[error("{count} integer combinations exceed the limit {limit}")]
    ComboLimit { count: usize, limit: usize },
}

/// A hyperplane `a·x = b` that may be active at a vertex.
struct Plane {
    a: Vec<f64>,
    b: f64,
    /// Bound planes carry the variable they bound, to skip `l_j` with `u_j`.
    var: Option<usize>,
}

/// Exact LP optimum by enumerating all basic solutions.
///
/// Every variable must have finite bounds, so the feasible set is a polytope
/// and the result is `Optimal` or `Infeasible`. Requires `n + m ≤ size_limit`.
pub fn lp_basis_oracle(lp: &LinearProgram, size_limit: usize) -> Result<LpOutcome, OracleError> {
    let n = lp.num_vars();
    let size = n + lp.num_rows();
    if size > size_limit {
        return Err(OracleError::SizeLimit { size, limit: size_limit });
    }
    for j in 0..n {
        if !lp.lower()[j].is_finite() || !lp.upper()[j].is_finite() {
            return Err(OracleError::InfiniteBound(j));
        }
    }

    let dense = |coeffs: &[(usize, f64)]| {
        let mut a = vec![0.0; n];
        for &(j, v) in coeffs {
            a[j] = v;
        }
        a
    };
    let mut forced = Vec::new();
    let mut optional = Vec::new();
    for row in lp.rows() {
        let plane = Plane {
            a: dense(&row.coeffs),
            b: row.rhs,
            var: None,
        };
        if row.sense == Sense::Eq {
            forced.push(plane);
        } else {
            optional.push(plane);
        }
    }
    for j in 0..n {
        for b in [lp.lower()[j], lp.upper()[j]] {
            let mut a = vec![0.0; n];
            a[j] = 1.0;
            optional.push(Plane { a, b, var: Some(j) });
        }
    }
    // Dependent equalities (including empty rows) would make every system
    // singular; keep a maximal independent subset. The feasibility check
    // still enforces every row.
    let forced = independent_planes(forced, n);
    let k = n - forced.len();

    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut systems = 0usize;
    let mut chosen: Vec<usize> = (0..k).collect();
    let feasible = |x: &[f64]| {
        lp.rows().iter().all(|r| r.violation(x) <= 1e-9 * (1.0 + r.rhs.abs()))
            && lp.max_bound_violation(x) <= 1e-9
    };
    loop {
        if k <= optional.len() && !pairs_same_var(&optional, &chosen) {
            let planes: Vec<&Plane> = forced.iter().chain(chosen.iter().map(|&i| &optional[i])).collect();
            systems += 1;
            if let Some(mut x) = solve_square(&planes, n) {
                // Snap bound-defined coordinates to their exact values.
                for p in &planes {
                    if let Some(j) = p.var {
                        x[j] = p.b;
                    }
                }
                if feasible(&x) {
                    let obj = lp.objective_value(&x);
                    if best.as_ref().map_or(true, |(_, b)| obj < *b) {
                        best = Some((x, obj));
                    }
                }
            }
        }
        if !next_combination(&mut chosen, optional.len()) {
            break;
        }
    }
    Ok(match best {
        Some((x, objective)) => LpOutcome {
            status: LpStatus::Optimal,
            x: Some(x),
            objective,
            iterations: systems,
        },
        None => LpOutcome {
            status: LpStatus::Infeasible,
            x: None,
            objective: f64::INFINITY,
            iterations: systems,
        },
    })
}

/// Greedy maximal subset of `planes` with linearly independent normals.
fn independent_planes(planes: Vec<Plane>, n: usize) -> Vec<Plane> {
    // Orthonormalized copies of the normals kept so far.
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut kept = Vec::new();
    for p in planes {
        let norm0 = p.a.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut r = p.a.clone();
        for q in &basis {
            let d: f64 = r.iter().zip(q).map(|(a, b)| a * b).sum();
            r.iter_mut().zip(q).for_each(|(a, b)| *a -= d * b);
        }
        let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-10 * norm0.max(1.0) && basis.len() < n {
            basis.push(r.into_iter().map(|v| v / norm).collect());
            kept.push(p);
        }
    }
    kept
}

fn pairs_same_var(planes: &[Plane], chosen: &[usize]) -> bool {
    let mut seen = Vec::new();
    for &i in chosen {
        if let Some(j) = planes[i].var {
            if seen.contains(&j) {
                return true;
            }
            seen.push(j);
        }
    }
    false
}

/// Advances `c` to the next `k`-subset of `0..len` in lexicographic order.
fn next_combination(c: &mut [usize], len: usize) -> bool {
    let k = c.len();
    if k == 0 || k > len {
        return false;
    }
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < len - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve_square(planes: &[&Plane], n: usize) -> Option<Vec<f64>> {
    let mut m: Vec<Vec<f64>> = planes
        .iter()
        .map(|p| {
            let mut row = p.a.clone();
            row.push(p.b);
            row
        })
        .collect();
    let scale = m
        .iter()
        .flat_map(|r| r[..n].iter())
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(1.0);
    for c in 0..n {
        let p = (c..n).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs()))?;
        if m[p][c].abs() <= 1e-10 * scale {
            return None;
        }
        m.swap(p, c);
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            if f != 0.0 {
                for k in c..=n {
                    m[r][k] -= f * m[c][k];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for c in (0..n).rev() {
        let s: f64 = (c + 1..n).map(|k| m[c][k] * x[k]).sum();
        x[c] = (m[c][n] - s) / m[c][c];
    }
    Some(x)
}

/// Integer values admitted by `[lower, upper]`, ascending.
fn integer_range(lower: f64, upper: f64) -> Vec<f64> {
    // Adding 0.0 turns the -0.0 from ceil(-1e-9) into 0.0.
    let lo = (lower - 1e-9).ceil() + 0.0;
    let hi = (upper + 1e-9).floor();
    let mut v = Vec::new();
    let mut z = lo;
    while z <= hi {
        v.push(z);
        z += 1.0;
    }
    v
}

/// All integer combinations in lexicographic order, or `ComboLimit`.
fn combinations(ranges: &[Vec<f64>], limit: usize) -> Result<Vec<Vec<f64>>, OracleError> {
    let mut count = 1usize;
    for r in ranges {
        count = count.saturating_mul(r.len());
    }
    if count > limit {
        return Err(OracleError::ComboLimit { count, limit });
    }
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return Ok(out);
    }
    let mut idx = vec![0usize; ranges.len()];
    loop {
        out.push(idx.iter().zip(ranges).map(|(&i, r)| r[i]).collect());
        let mut k = ranges.len();
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < ranges[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

fn fix_integers(lp: &LinearProgram, integers: &[usize], combo: &[f64]) -> LinearProgram {
    let mut fixed = lp.clone();
    for (&i, &v) in integers.iter().zip(combo) {
        fixed.set_bounds(i, v, v).expect("combination lies within the bounds");
    }
    fixed
}

/// Exact MILP optimum by solving one LP per integer combination.
///
/// The first combination in lexicographic order wins ties.
pub fn enumerate_milp(p: &Milp, combo_limit: usize) -> Result<MilpOutcome, OracleError> {
    let settings = LpSettings::default();
    let ranges: Vec<Vec<f64>> = p
        .integers()
        .iter()
        .map(|&i| integer_range(p.lp().lower()[i], p.lp().upper()[i]))
        .collect();
    let combos = combinations(&ranges, combo_limit)?;
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut iterations = 0;
    for combo in &combos {
        let lp = fix_integers(p.lp(), p.integers(), combo);
        let out = solve_lp(&lp, &settings).expect("fixed LP stays well-formed");
        iterations += out.iterations;
        match out.status {
            LpStatus::Optimal => {
                if best.as_ref().map_or(true, |(_, b)| out.objective < *b) {
                    best = Some((out.x.expect("optimal outcome carries a solution"), out.objective));
                }
            }
            LpStatus::Infeasible => {}
            LpStatus::Unbounded => return Ok(MilpOutcome::failed(MilpStatus::Unbounded, combos.len(), iterations)),
            LpStatus::IterationLimit | LpStatus::NumericalFailure => {
                return Ok(MilpOutcome::failed(MilpStatus::SolverFailure, combos.len(), iterations))
            }
        }
    }
    Ok(match best {
        Some((x, objective)) => MilpOutcome {
            status: MilpStatus::Optimal,
            x: Some(x),
            objective,
            nodes: combos.len(),
            best_bound: objective,
            lp_iterations: iterations,
            node_log: Vec::new(),
        },
        None => MilpOutcome::failed(MilpStatus::Infeasible, combos.len(), iterations),
    })
}

/// One row of the enumeration table.
#[derive(Debug, Clone, PartialEq)]
pub struct ComboResult {
    /// Integer values, parallel to the integer index set.
    pub combo: Vec<f64>,
    pub feasible: bool,
    /// Best refined objective over the starts, for feasible combinations.
    pub best_f: Option<f64>,
    pub best_x: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinlpEnumeration {
    pub table: Vec<ComboResult>,
    pub feasible_combos: usize,
    /// Global best `(x, f)`, lexicographically smallest combination on ties.
    pub best: Option<(Vec<f64>, f64)>,
}

/// Enumerates integer combinations, checks each fixed slice for feasibility
/// and refines from `starts_per_combo` random feasible starts.
///
/// Starts are random convex combinations of LP vertices of the slice. Each
/// combination draws from its own stream of `seed`, so the result does not
/// depend on thread scheduling.
pub fn enumerate_minlp(
    set: &MixedIntegerPolyhedron,
    objective: &SmoothObjective,
    combo_limit: usize,
    starts_per_combo: usize,
    cfg: &RefineConfig,
    seed: u64,
) -> Result<MinlpEnumeration, OracleError> {
    let ranges: Vec<Vec<f64>> = set
        .integers()
        .iter()
        .map(|&i| integer_range(set.lower()[i], set.upper()[i]))
        .collect();
    let combos = combinations(&ranges, combo_limit)?;
    let table: Vec<ComboResult> = combos
        .into_par_iter()
        .enumerate()
        .map(|(idx, combo)| explore_combo(set, objective, combo, idx as u64, starts_per_combo, cfg, seed))
        .collect();

    let mut best: Option<(Vec<f64>, f64)> = None;
    for row in &table {
        if let (Some(f), Some(x)) = (row.best_f, &row.best_x) {
            if best.as_ref().map_or(true, |(_, b)| f < *b) {
                best = Some((x.clone(), f));
            }
        }
    }
    Ok(MinlpEnumeration {
        feasible_combos: table.iter().filter(|r| r.feasible).count(),
        table,
        best,
    })
}

fn explore_combo(
    set: &MixedIntegerPolyhedron,
    objective: &SmoothObjective,
    combo: Vec<f64>,
    stream: u64,
    starts: usize,
    cfg: &RefineConfig,
    seed: u64,
) -> ComboResult {
    let lp = fix_integers(set.lp(), set.integers(), &combo);
    let settings = LpSettings::default();
    let probe = solve_lp(&lp, &settings).expect("fixed LP stays well-formed");
    let Some(anchor) = probe.x else {
        return ComboResult {
            combo,
            feasible: false,
            best_f: None,
            best_x: None,
        };
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let n = set.num_vars();
    let mut best: Option<(Vec<f64>, f64)> = None;
    for _ in 0..starts {
        // Convex combination of the anchor and a few random vertices.
        let mut points = vec![anchor.clone()];
        for _ in 0..3 {
            let mut vlp = lp.clone();
            let c: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            vlp.set_objective(c).expect("objective length matches");
            if let Ok(LpOutcome { x: Some(v), .. }) = solve_lp(&vlp, &settings) {
                points.push(v);
            }
        }
        let weights: Vec<f64> = points.iter().map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = weights.iter().sum();
        let mut start = vec![0.0; n];
        for (p, w) in points.iter().zip(&weights) {
            start.iter_mut().zip(p).for_each(|(s, v)| *s += w / total * v);
        }
        // The combination is exact on the fixed block only up to round-off.
        for (&i, &v) in set.integers().iter().zip(&combo) {
            start[i] = v;
        }
        if let Ok(r) = refine_fixed_integer(set, objective, &start, cfg) {
            if best.as_ref().map_or(true, |(_, b)| r.f < *b) {
                best = Some((r.x, r.f));
            }
        }
    }
    let (best_x, best_f) = match best {
        Some((x, f)) => (Some(x), Some(f)),
        None => (None, None),
    };
    ComboResult {
        combo,
        feasible: true,
        best_f,
        best_x,
    }
}
