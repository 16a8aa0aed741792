//! The sequential mixed-integer linearization trust-region method.
//!
//! Each iteration minimizes the linearization `⟨∇f(x^k), w⟩` over `X`
//! intersected with a partial-localization ball of radius `Δ_k`, accepts the
//! step when the nonmonotone merit decrease `a_k = m_k − f(x^{k+1})` is at
//! least `ϱ Ψ_k`, and otherwise shrinks the radius and re-solves. The merit
//! value is an exponential average of past objective values.

mod subproblem;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::EvalError;
use crate::lp::LpError;
use crate::milp::{solve_milp, MilpError, MilpSettings, MilpStatus};
use crate::model::{MixedIntegerPolyhedron, ModelError, NormKind, SmoothObjective};
use crate::refine::{refine_fixed_integer, RefineConfig};

pub use subproblem::{build_tr_subproblem, criticality_measure, initial_projection, projected_gradient_step, Projection};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SmilError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("trust-region radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("expected a vector of length {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("criticality measure is negative ({0})")]
    NegativeCriticality(f64),
    #[error("MILP subproblem ended with status {0:?}")]
    Subproblem(MilpStatus),
    #[error("the feasible set is empty")]
    EmptySet,
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Milp(#[from] MilpError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Radius update after an accepted step, driven by `ρ_k = a_k / Ψ_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TrRule {
    /// `κΔ` if `ρ < ϱ1`, `Δ` if `ϱ1 ≤ ρ < ϱ2`, `Δ/κ` otherwise.
    Classic { rho1: f64, rho2: f64 },
    /// `clamp(Δ/κ, Δmin, Δmax)` regardless of `ρ`.
    Reset { delta_min: f64, delta_max: f64 },
}

impl TrRule {
    pub fn default_reset() -> Self {
        TrRule::Reset {
            delta_min: 1e-6,
            delta_max: 1e3,
        }
    }
}

pub fn tr_update(rho_k: f64, delta: f64, kappa: f64, rule: &TrRule) -> f64 {
    match *rule {
        TrRule::Classic { rho1, rho2 } => {
            if rho_k < rho1 {
                kappa * delta
            } else if rho_k < rho2 {
                delta
            } else {
                delta / kappa
            }
        }
        TrRule::Reset { delta_min, delta_max } => (delta / kappa).clamp(delta_min, delta_max),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Criticality tolerance ε.
    pub eps: f64,
    pub delta0: f64,
    /// Acceptance ratio ϱ.
    pub rho: f64,
    /// Backtracking and radius factor κ.
    pub kappa: f64,
    /// Merit averaging weight κ_m.
    pub kappa_m: f64,
    pub norm: NormKind,
    pub tr_rule: TrRule,
    pub max_outer_iterations: usize,
    pub max_backtracks: usize,
    /// Fixed-integer refinement after accepted steps that keep `z`.
    pub refine: Option<RefineConfig>,
    /// Objective values below this end the run as diverging.
    pub f_floor: f64,
    /// Negative Ψ values down to `−tol_neg` count as zero.
    pub tol_neg: f64,
    pub milp: MilpSettings,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            eps: 1e-8,
            delta0: 1.0,
            rho: 0.1,
            kappa: 0.5,
            kappa_m: 0.5,
            norm: NormKind::Linf,
            tr_rule: TrRule::Classic { rho1: 0.1, rho2: 0.2 },
            max_outer_iterations: 1000,
            max_backtracks: 60,
            refine: None,
            f_floor: -1e12,
            tol_neg: 1e-9,
            milp: MilpSettings::default(),
        }
    }
}

impl SolverConfig {
    /// Refinement with the outer ε as its stationarity tolerance.
    pub fn with_refinement(mut self) -> Self {
        self.refine = Some(RefineConfig {
            eps: self.eps,
            ..RefineConfig::default()
        });
        self
    }

    pub fn validate(&self) -> Result<(), SmilError> {
        let bad = |msg: &str| Err(SmilError::InvalidConfig(msg.to_string()));
        if !(self.eps >= 0.0) {
            return bad("eps must be nonnegative");
        }
        if !(self.delta0 > 0.0) {
            return bad("delta0 must be positive");
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return bad("rho must lie in (0, 1)");
        }
        if !(self.kappa > 0.0 && self.kappa < 1.0) {
            return bad("kappa must lie in (0, 1)");
        }
        if !(self.kappa_m > 0.0 && self.kappa_m <= 1.0) {
            return bad("kappa_m must lie in (0, 1]");
        }
        match self.tr_rule {
            TrRule::Classic { rho1, rho2 } => {
                if !(self.rho <= rho1 && rho1 < rho2 && rho2 < 1.0) {
                    return bad("classic rule needs rho <= rho1 < rho2 < 1");
                }
            }
            TrRule::Reset { delta_min, delta_max } => {
                if !(delta_min > 0.0 && delta_min <= delta_max) {
                    return bad("reset rule needs 0 < delta_min <= delta_max");
                }
            }
        }
        if let Some(r) = &self.refine {
            if !(r.sigma > 0.0 && r.sigma < 1.0 && r.beta > 0.0 && r.beta < 1.0 && r.eps >= 0.0) {
                return bad("refinement needs sigma, beta in (0, 1) and eps >= 0");
            }
        }
        if !(self.tol_neg >= 0.0) {
            return bad("tol_neg must be nonnegative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    /// `Ψ_k ≤ ε` at the returned point.
    Critical,
    IterationLimit,
    BacktrackLimit,
    /// The MILP engine declared a subproblem infeasible.
    MilpSubproblemInfeasible,
    /// The MILP engine failed otherwise (node limit, LP breakdown).
    SubproblemFailure,
    NegativeCriticality,
    ObjectiveDiverging,
    /// The initial projection found `X` empty.
    InfeasibleSet,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Critical => "critical",
            SolveStatus::IterationLimit => "iteration_limit",
            SolveStatus::BacktrackLimit => "backtrack_limit",
            SolveStatus::MilpSubproblemInfeasible => "milp_subproblem_infeasible",
            SolveStatus::SubproblemFailure => "subproblem_failure",
            SolveStatus::NegativeCriticality => "negative_criticality",
            SolveStatus::ObjectiveDiverging => "objective_diverging",
            SolveStatus::InfeasibleSet => "infeasible_set",
        }
    }
}

/// One accepted iteration `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    /// `x^{k+1}`, after refinement when it ran.
    pub x: Vec<f64>,
    /// `f(x^{k+1})`, after refinement.
    pub f: f64,
    /// `f(x^{k+1})` as returned by the subproblem.
    pub f_trial: f64,
    /// Integer coordinates of the subproblem solution, before refinement.
    pub z_trial: Vec<f64>,
    /// `m_{k+1}`.
    pub m: f64,
    /// `m_k`.
    pub m_prev: f64,
    /// Accepted radius `Δ_k`.
    pub delta: f64,
    pub psi: f64,
    pub a: f64,
    pub rho: f64,
    /// Rejected attempts before acceptance.
    pub backtracks: usize,
    /// Subproblems solved in this iteration (`backtracks + 1`).
    pub milp_solves: usize,
    pub milp_nodes: usize,
    pub refined: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    pub f: f64,
    /// Feasible starting point (projected if `x0 ∉ X`).
    pub x_start: Vec<f64>,
    pub f_start: f64,
    /// Ψ from the last subproblem solved; `NaN` if none was solved.
    pub last_psi: f64,
    /// Radius of the last subproblem.
    pub last_delta: f64,
    pub trace: Vec<IterationRecord>,
    /// All trust-region subproblems, including rejected and final ones.
    pub milp_solves: usize,
    pub milp_nodes: usize,
}

impl SolveResult {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }
}

/// Runs the method from `x0`, projecting it onto `X` first if infeasible.
///
/// Returns `Err` only for malformed input or when `f` cannot be evaluated at
/// the starting point; algorithmic outcomes are reported in the status.
pub fn solve(
    set: &MixedIntegerPolyhedron,
    objective: &SmoothObjective,
    x0: &[f64],
    cfg: &SolverConfig,
) -> Result<SolveResult, SmilError> {
    cfg.validate()?;
    let n = set.num_vars();
    if x0.len() != n {
        return Err(SmilError::Dimension { expected: n, got: x0.len() });
    }
    if objective.num_vars() != n {
        return Err(SmilError::Dimension {
            expected: n,
            got: objective.num_vars(),
        });
    }

    let mut milp_solves = 0usize;
    let mut milp_nodes = 0usize;
    let start = if set.check_feasible_default(x0).feasible {
        x0.to_vec()
    } else {
        match initial_projection(set, x0, &cfg.milp) {
            Ok(p) => {
                milp_nodes += p.milp_nodes;
                p.x
            }
            Err(SmilError::EmptySet) => {
                return Ok(SolveResult {
                    status: SolveStatus::InfeasibleSet,
                    x: x0.to_vec(),
                    f: f64::NAN,
                    x_start: x0.to_vec(),
                    f_start: f64::NAN,
                    last_psi: f64::NAN,
                    last_delta: cfg.delta0,
                    trace: Vec::new(),
                    milp_solves: 1,
                    milp_nodes: 0,
                })
            }
            Err(e) => return Err(e),
        }
    };
    let f_start = objective.value(&start)?;

    let mut x = start.clone();
    let mut f = f_start;
    let mut m = f_start;
    let mut delta = cfg.delta0;
    let mut trace: Vec<IterationRecord> = Vec::new();
    let mut last_psi = f64::NAN;

    let status = 'outer: loop {
        if trace.len() >= cfg.max_outer_iterations {
            break SolveStatus::IterationLimit;
        }
        let g = objective.gradient(&x)?;
        let mut backtracks = 0usize;
        let mut iter_nodes = 0usize;
        // Shrink the radius until the subproblem step gives sufficient merit decrease.
        let (x_next, f_trial, psi, a) = loop {
            let sub = build_tr_subproblem(set, &x, &g, delta, cfg.norm)?;
            let out = solve_milp(&sub, &cfg.milp);
            milp_solves += 1;
            milp_nodes += out.nodes;
            iter_nodes += out.nodes;
            let w = match (out.status, out.x) {
                (MilpStatus::Optimal, Some(w)) => w[..n].to_vec(),
                (MilpStatus::Infeasible, _) => break 'outer SolveStatus::MilpSubproblemInfeasible,
                _ => break 'outer SolveStatus::SubproblemFailure,
            };
            let raw: f64 = g.iter().zip(x.iter().zip(&w)).map(|(gi, (xi, wi))| gi * (xi - wi)).sum();
            let psi = match subproblem::clamp_psi(raw, cfg.tol_neg) {
                Ok(v) => v,
                Err(_) => {
                    last_psi = raw;
                    break 'outer SolveStatus::NegativeCriticality;
                }
            };
            last_psi = psi;
            if psi <= cfg.eps {
                break 'outer SolveStatus::Critical;
            }
            // An evaluation failure at the trial point counts as a rejection.
            let f_trial = objective.value(&w).unwrap_or(f64::INFINITY);
            let a = m - f_trial;
            if a >= cfg.rho * psi {
                break (w, f_trial, psi, a);
            }
            if backtracks == cfg.max_backtracks {
                break 'outer SolveStatus::BacktrackLimit;
            }
            backtracks += 1;
            delta *= cfg.kappa;
        };

        let rho_k = a / psi;
        let z_trial: Vec<f64> = set.integers().iter().map(|&i| x_next[i]).collect();
        let mut x_next = x_next;
        let mut f_next = f_trial;
        let mut refined = false;
        if let Some(rcfg) = &cfg.refine {
            if set.integer_block(&x_next) == set.integer_block(&x) {
                if let Ok(r) = refine_fixed_integer(set, objective, &x_next, rcfg) {
                    if r.f <= f_next {
                        x_next = r.x;
                        f_next = r.f;
                        refined = true;
                    }
                }
            }
        }

        let m_prev = m;
        m = (1.0 - cfg.kappa_m) * m + cfg.kappa_m * f_next;
        trace.push(IterationRecord {
            k: trace.len(),
            x: x_next.clone(),
            f: f_next,
            f_trial,
            z_trial,
            m,
            m_prev,
            delta,
            psi,
            a,
            rho: rho_k,
            backtracks,
            milp_solves: backtracks + 1,
            milp_nodes: iter_nodes,
            refined,
        });
        x = x_next;
        f = f_next;
        delta = tr_update(rho_k, delta, cfg.kappa, &cfg.tr_rule);
        log::debug!("iteration {}: f = {f:.10e}, Ψ = {psi:.3e}, Δ = {delta:.3e}", trace.len() - 1);
        if f < cfg.f_floor {
            break SolveStatus::ObjectiveDiverging;
        }
    };

    Ok(SolveResult {
        status,
        x,
        f,
        x_start: start,
        f_start,
        last_psi,
        last_delta: delta,
        trace,
        milp_solves,
        milp_nodes,
    })
}
