//! Text outputs: the iteration trace CSV, per-run summaries, turbo
//! trajectories and multi-run statistics.
//!
//! All writers are deterministic: floats use Rust's shortest round-trip
//! formatting and rows follow input order.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::bench::TrajectoryPoint;
use crate::smil::{SolveResult, SolveStatus};

pub const TRACE_HEADER: &str = "k,f,m,delta,psi,a,rho,backtracks,milp_nodes,refined";

/// One header line plus one line per accepted iteration.
pub fn trace_csv(result: &SolveResult) -> String {
    let mut out = String::with_capacity(64 * (result.trace.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in &result.trace {
        writeln!(
            out,
            "{},{:?},{:?},{:?},{:?},{:?},{:?},{},{},{}",
            r.k,
            r.f,
            r.m,
            r.delta,
            r.psi,
            r.a,
            r.rho,
            r.backtracks,
            r.milp_nodes,
            u8::from(r.refined)
        )
        .expect("writing to a String cannot fail");
    }
    out
}

pub fn trajectory_csv(points: &[TrajectoryPoint]) -> String {
    let mut out = String::from("t,q,v,w,a,b\n");
    for p in points {
        writeln!(out, "{:?},{:?},{:?},{},{:?},{:?}", p.t, p.q, p.v, p.w as i64, p.a, p.b)
            .expect("writing to a String cannot fail");
    }
    out
}

/// Per-run statistics, one JSON document per solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub problem: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub status: SolveStatus,
    pub objective: f64,
    pub iterations: usize,
    pub milp_count: usize,
    pub milp_nodes: usize,
    pub runtime_seconds: f64,
    pub initial_objective: f64,
    /// `None` when no subproblem was solved.
    pub final_psi: Option<f64>,
    pub final_delta: f64,
    pub x: Vec<f64>,
}

impl Summary {
    pub fn new(problem: impl Into<String>, seed: Option<u64>, result: &SolveResult, runtime_seconds: f64) -> Self {
        Summary {
            problem: problem.into(),
            seed,
            status: result.status,
            objective: result.f,
            iterations: result.iterations(),
            milp_count: result.milp_solves,
            milp_nodes: result.milp_nodes,
            runtime_seconds,
            initial_objective: result.f_start,
            final_psi: Some(result.last_psi).filter(|v| !v.is_nan()),
            final_delta: result.last_delta,
            x: result.x.clone(),
        }
    }
}

/// Minimum, quartiles and maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quartiles {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Quartiles by linear interpolation between order statistics; `None` for
/// an empty sample or one containing NaN.
pub fn quartiles(values: &[f64]) -> Option<Quartiles> {
    if values.is_empty() || values.iter().any(|v| v.is_nan()) {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
    let at = |p: f64| {
        let pos = p * (v.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
    };
    Some(Quartiles {
        min: v[0],
        q1: at(0.25),
        median: at(0.5),
        q3: at(0.75),
        max: v[v.len() - 1],
    })
}

/// Aggregate over a campaign of summaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignStats {
    pub runs: usize,
    pub critical: usize,
    pub objective: Option<Quartiles>,
    pub iterations: Option<Quartiles>,
    pub milp_count: Option<Quartiles>,
    pub runtime_seconds: Option<Quartiles>,
}

pub fn campaign_stats(runs: &[Summary]) -> CampaignStats {
    let col = |f: fn(&Summary) -> f64| quartiles(&runs.iter().map(f).collect::<Vec<_>>());
    CampaignStats {
        runs: runs.len(),
        critical: runs.iter().filter(|s| s.status == SolveStatus::Critical).count(),
        objective: col(|s| s.objective),
        iterations: col(|s| s.iterations as f64),
        milp_count: col(|s| s.milp_count as f64),
        runtime_seconds: col(|s| s.runtime_seconds),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartiles_interpolate() {
        let q = quartiles(&[4.0, 1.0, 3.0, 2.0, 5.0]).unwrap();
        assert_eq!((q.min, q.q1, q.median, q.q3, q.max), (1.0, 2.0, 3.0, 4.0, 5.0));
        let q = quartiles(&[1.0, 2.0]).unwrap();
        assert_eq!(q.median, 1.5);
        assert!(quartiles(&[]).is_none());
        assert!(quartiles(&[1.0, f64::NAN]).is_none());
    }

    #[test]
    fn trajectory_columns() {
        let csv = trajectory_csv(&[TrajectoryPoint {
            t: 0.0,
            q: 1.5,
            v: -2.0,
            w: 1.0,
            a: 0.25,
            b: 0.0,
        }]);
        assert_eq!(csv, "t,q,v,w,a,b\n0.0,1.5,-2.0,1,0.25,0.0\n");
    }
}
