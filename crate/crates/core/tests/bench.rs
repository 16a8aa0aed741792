use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use smil::bench::{build_turbo, decode_trajectory, hysteresis_violations, turbo_initial_guess, TurboParams};
use smil::expr::Expression;
use smil::lp::Constraint;
use smil::model::{PolyhedronBuilder, SmoothObjective};
use smil::oracle::enumerate_minlp;
use smil::refine::RefineConfig;
use smil::smil::{initial_projection, solve, SolveStatus, SolverConfig};

#[test]
fn projection_of_a_random_turbo_guess_is_feasible() {
    let inst = build_turbo(&TurboParams::with_intervals(10)).unwrap();
    let x0 = turbo_initial_guess(inst.set.num_vars(), 42);
    assert!(!inst.set.check_feasible_default(&x0).feasible);
    let p = initial_projection(&inst.set, &x0, &SolverConfig::default().milp).unwrap();
    assert!(inst.set.check_feasible_default(&p.x).feasible);
    assert!(p.distance > 0.0);
}

#[test]
fn small_turbo_solution_respects_hysteresis() {
    let inst = build_turbo(&TurboParams::with_intervals(8)).unwrap();
    let x0 = turbo_initial_guess(inst.set.num_vars(), 1);
    let r = solve(&inst.set, &inst.objective, &x0, &SolverConfig::default()).unwrap();
    assert_eq!(r.status, SolveStatus::Critical);
    assert!(hysteresis_violations(&inst, &r.x, 1e-6).is_empty());
    let traj = decode_trajectory(&inst, &r.x);
    assert_eq!(traj.len(), 9);
    let p = &inst.params;
    assert!(traj[0].q.abs() < 1e-9 && (traj[8].q - p.q_end).abs() < 1e-6);
    assert!(traj.iter().all(|pt| pt.w == 0.0 || pt.w == 1.0));
}

/// Two continuous flows gated by binaries, plus an optional third unit.
#[test]
fn three_binary_design_matches_enumeration() {
    let mut b = PolyhedronBuilder::new();
    let u1 = b.add_var("u1", 0.0, 4.0, false).unwrap();
    let u2 = b.add_var("u2", 0.0, 4.0, false).unwrap();
    let y1 = b.add_var("y1", 0.0, 1.0, true).unwrap();
    let y2 = b.add_var("y2", 0.0, 1.0, true).unwrap();
    let y3 = b.add_var("y3", 0.0, 1.0, true).unwrap();
    b.add_row(Constraint::le([(u1, 1.0), (y1, -4.0)], 0.0)).unwrap();
    b.add_row(Constraint::le([(u2, 1.0), (y2, -4.0)], 0.0)).unwrap();
    // Demand of 3 that the third unit can cover 2 of.
    b.add_row(Constraint::ge([(u1, 1.0), (u2, 1.0), (y3, 2.0)], 3.0)).unwrap();
    b.add_row(Constraint::le([(y1, 1.0), (y2, 1.0), (y3, 1.0)], 2.0)).unwrap();
    let set = b.build().unwrap();
    let f1 = Expression::parse("(x1 - 3)^2 + (x2 - 2)^2 + 0.5*x1*x2").unwrap();
    let objective = SmoothObjective::for_polyhedron(&set, Arc::new(f1), vec![1.0, 1.5, 2.0]).unwrap();

    let cfg = RefineConfig {
        eps: 1e-10,
        ..RefineConfig::default()
    };
    let e = enumerate_minlp(&set, &objective, 256, 5, &cfg, 3).unwrap();
    assert_eq!(e.table.len(), 8);
    // y1 + y2 + y3 <= 2 removes (1,1,1); (0,0,0) and (0,0,1) cannot meet demand.
    assert_eq!(e.feasible_combos, 5);
    let (_, best) = e.best.unwrap();

    let solver = SolverConfig::default().with_refinement();
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut best_solve = f64::INFINITY;
    for _ in 0..20 {
        let x0: Vec<f64> = (0..5).map(|i| if i < 2 { rng.random_range(0.0..4.0) } else { rng.random_range(0..2) as f64 }).collect();
        let r = solve(&set, &objective, &x0, &solver).unwrap();
        assert_eq!(r.status, SolveStatus::Critical);
        best_solve = best_solve.min(r.f);
    }
    assert!((best_solve - best).abs() < 1e-6, "solve {best_solve} vs enumeration {best}");
}
