//! Seeded random instances for oracle cross-checks and property tests.
//!
//! Every generator draws from a `ChaCha8Rng` seeded with `seed` only, so the
//! same arguments always produce the same instance.

use std::sync::Arc;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::lp::{Constraint, LinearProgram, Sense};
use crate::milp::Milp;
use crate::model::{MixedIntegerPolyhedron, ModelError, PolyhedronBuilder, QuadraticFn, SmoothObjective};

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Small integer coefficient in `[-4, 4]`, zero with probability about 0.3.
fn sparse_int(rng: &mut ChaCha8Rng) -> f64 {
    if rng.random_bool(0.3) {
        0.0
    } else {
        rng.random_range(-4..=4) as f64
    }
}

/// Bounded LP with `n` variables and `m` rows of mixed sense.
///
/// Integer-valued data makes degenerate vertices and ties common. Roughly
/// one row in five is drawn without regard to a reference point, so a share
/// of the instances is infeasible.
pub fn random_lp(seed: u64, n: usize, m: usize) -> LinearProgram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lower: Vec<f64> = (0..n).map(|_| -(rng.random_range(0..=5) as f64)).collect();
    let upper: Vec<f64> = lower.iter().map(|l| l + rng.random_range(1..=8) as f64).collect();
    let objective: Vec<f64> = (0..n).map(|_| rng.random_range(-5..=5) as f64).collect();
    let reference: Vec<f64> = lower
        .iter()
        .zip(&upper)
        .map(|(l, u)| rng.random_range(*l..=*u))
        .collect();
    let mut lp = LinearProgram::with_bounds(objective, lower, upper).expect("generated bounds are valid");
    for _ in 0..m {
        let coeffs: Vec<(usize, f64)> = (0..n).map(|j| (j, sparse_int(&mut rng))).collect();
        let sense = match rng.random_range(0..20) {
            0..=8 => Sense::Le,
            9..=16 => Sense::Ge,
            _ => Sense::Eq,
        };
        let activity: f64 = coeffs.iter().map(|&(j, a)| a * reference[j]).sum();
        let rhs = if rng.random_bool(0.8) {
            let slack = rng.random_range(0..=3) as f64;
            match sense {
                Sense::Le => (activity + slack).round(),
                Sense::Ge => (activity - slack).round(),
                Sense::Eq => activity,
            }
        } else {
            rng.random_range(-10..=10) as f64
        };
        lp.add_constraint(Constraint::new(coeffs, sense, rhs)).expect("columns in range");
    }
    lp
}

/// Bounded MILP with `n` variables, `n_int` of which are integer with at
/// most four admissible values each.
pub fn random_milp(seed: u64, n: usize, n_int: usize, m: usize) -> Milp {
    assert!(n_int <= n, "more integers than variables");
    let mut lp = random_lp(seed, n, m);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let ints = sample(&mut rng, n, n_int).into_vec();
    for &j in &ints {
        let lo = rng.random_range(-2..=1) as f64;
        let width = rng.random_range(0..=3) as f64;
        lp.set_bounds(j, lo, lo + width).expect("integer bounds are valid");
    }
    Milp::new(lp, ints).expect("integer bounds are finite")
}

#[derive(Debug, Clone)]
pub struct RandomInstance {
    pub set: MixedIntegerPolyhedron,
    pub objective: SmoothObjective,
    /// The convex quadratic `f1`, kept for export.
    pub f1: QuadraticFn,
    /// Feasible by construction.
    pub planted: Vec<f64>,
}

/// Bounded instance with reals `u0..`, then integers `z0..`, and `m_rows`
/// inequality rows that hold at a planted point with slack in `[0, 1)`.
///
/// `f1 = ½ (u − c)ᵀ Q (u − c)` with `Q = L Lᵀ + 0.1 I`, and `f2` is Gaussian.
pub fn random_instance(seed: u64, n_real: usize, n_int: usize, m_rows: usize) -> Result<RandomInstance, ModelError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = n_real + n_int;
    let mut b = PolyhedronBuilder::new();
    let mut planted = Vec::with_capacity(n);
    let mut center = Vec::with_capacity(n_real);
    for i in 0..n_real {
        let lo = -rng.random_range(1.0..5.0);
        let hi = rng.random_range(1.0..5.0);
        b.add_var(format!("u{i}"), lo, hi, false)?;
        planted.push(rng.random_range(0.5 * lo..0.5 * hi));
        center.push(rng.random_range(1.5 * lo..1.5 * hi));
    }
    for i in 0..n_int {
        let hi = rng.random_range(1..=3);
        b.add_var(format!("z{i}"), 0.0, hi as f64, true)?;
        planted.push(rng.random_range(0..=hi) as f64);
    }
    for _ in 0..m_rows {
        let mut coeffs = Vec::new();
        for j in 0..n {
            if rng.random_bool(0.7) {
                coeffs.push((j, normal(&mut rng)));
            }
        }
        if coeffs.is_empty() && n > 0 {
            let j = rng.random_range(0..n);
            coeffs.push((j, normal(&mut rng)));
        }
        let activity: f64 = coeffs.iter().map(|&(j, a)| a * planted[j]).sum();
        let rhs = activity + rng.random_range(0.0..1.0);
        b.add_row(Constraint::le(coeffs, rhs))?;
    }
    let set = b.build()?;

    let l: Vec<f64> = (0..n_real * n_real).map(|_| normal(&mut rng)).collect();
    let mut q = vec![0.0; n_real * n_real];
    for r in 0..n_real {
        for c in 0..n_real {
            let dot: f64 = (0..n_real).map(|k| l[r * n_real + k] * l[c * n_real + k]).sum();
            q[r * n_real + c] = dot / n_real as f64 + if r == c { 0.1 } else { 0.0 };
        }
    }
    let f1 = QuadraticFn::new((0..n_real).collect(), q, center);
    let f2: Vec<f64> = (0..n_int).map(|_| normal(&mut rng)).collect();
    let objective = SmoothObjective::for_polyhedron(&set, Arc::new(f1.clone()), f2)?;
    Ok(RandomInstance {
        set,
        objective,
        f1,
        planted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planted_point_is_feasible() {
        for seed in 0..50 {
            let inst = random_instance(seed, 3, 2, 4).unwrap();
            let rep = inst.set.check_feasible_default(&inst.planted);
            assert!(rep.feasible, "seed {seed}: {rep:?}");
        }
    }

    #[test]
    fn generators_are_deterministic() {
        let a = random_instance(11, 3, 2, 4).unwrap();
        let b = random_instance(11, 3, 2, 4).unwrap();
        assert_eq!(a.set, b.set);
        assert_eq!(a.f1, b.f1);
        assert_eq!(a.objective.f2(), b.objective.f2());
        assert_eq!(random_lp(5, 4, 6), random_lp(5, 4, 6));
        let (m1, m2) = (random_milp(5, 6, 3, 4), random_milp(5, 6, 3, 4));
        assert_eq!(m1.lp(), m2.lp());
        assert_eq!(m1.integers(), m2.integers());
    }

    #[test]
    fn milp_integer_ranges_are_small() {
        for seed in 0..100 {
            let p = random_milp(seed, 8, 5, 6);
            for &j in p.integers() {
                let width = p.lp().upper()[j] - p.lp().lower()[j];
                assert!((0.0..=3.0).contains(&width));
            }
        }
    }

    #[test]
    fn quadratic_is_convex() {
        let inst = random_instance(3, 4, 1, 3).unwrap();
        let k = 4;
        // Diagonal dominance is not guaranteed, but xᵀQx > 0 on random probes.
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            let d: Vec<f64> = (0..k).map(|_| normal(&mut rng)).collect();
            let quad: f64 = (0..k)
                .map(|r| (0..k).map(|c| d[r] * inst.f1.q[r * k + c] * d[c]).sum::<f64>())
                .sum();
            assert!(quad > 0.0);
        }
    }
}
