//! Native smooth functions used by the benchmark builders.

use crate::expr::EvalError;

use super::SmoothFn;

/// `½ (u − c)ᵀ Q (u − c)` over the coordinates `indices`; `Q` is dense,
/// row-major and symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticFn {
    pub indices: Vec<usize>,
    pub q: Vec<f64>,
    pub center: Vec<f64>,
}

impl QuadraticFn {
    pub fn new(indices: Vec<usize>, q: Vec<f64>, center: Vec<f64>) -> Self {
        let k = indices.len();
        assert_eq!(q.len(), k * k, "Q must be k×k");
        assert_eq!(center.len(), k, "center length");
        QuadraticFn { indices, q, center }
    }

    fn shifted(&self, x: &[f64]) -> Result<Vec<f64>, EvalError> {
        self.indices
            .iter()
            .zip(&self.center)
            .map(|(&i, c)| {
                x.get(i).map(|v| v - c).ok_or(EvalError::Dimension {
                    needed: i + 1,
                    got: x.len(),
                })
            })
            .collect()
    }

    fn q_times(&self, d: &[f64]) -> Vec<f64> {
        let k = d.len();
        (0..k)
            .map(|r| self.q[r * k..(r + 1) * k].iter().zip(d).map(|(a, b)| a * b).sum())
            .collect()
    }
}

impl SmoothFn for QuadraticFn {
    fn value(&self, x: &[f64]) -> Result<f64, EvalError> {
        let d = self.shifted(x)?;
        let qd = self.q_times(&d);
        Ok(0.5 * d.iter().zip(&qd).map(|(a, b)| a * b).sum::<f64>())
    }

    fn gradient(&self, x: &[f64], grad: &mut [f64]) -> Result<(), EvalError> {
        let d = self.shifted(x)?;
        let qd = self.q_times(&d);
        grad.iter_mut().for_each(|g| *g = 0.0);
        for (&i, v) in self.indices.iter().zip(qd) {
            grad[i] = v;
        }
        Ok(())
    }

    fn to_expression(&self) -> Option<String> {
        let k = self.indices.len();
        let shifted: Vec<String> = self
            .indices
            .iter()
            .zip(&self.center)
            .map(|(&i, c)| format!("(x{} - {})", i + 1, literal(*c)))
            .collect();
        let mut terms = Vec::new();
        for r in 0..k {
            for c in 0..k {
                let v = self.q[r * k + c];
                if v != 0.0 {
                    terms.push(format!("{}*{}*{}", literal(0.5 * v), shifted[r], shifted[c]));
                }
            }
        }
        Some(if terms.is_empty() { "0".to_string() } else { terms.join(" + ") })
    }

    fn support(&self) -> Option<Vec<usize>> {
        Some(self.indices.clone())
    }
}

/// Trapezoidal effort cost `α_a h Σ (a_k² + a_{k+1}²)/2 + α_b h Σ (b_k³ + b_{k+1}³)/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct TurboCost {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub h: f64,
    pub alpha_a: f64,
    pub alpha_b: f64,
}

impl TurboCost {
    /// Weight of grid point `k` in the trapezoidal sum.
    fn weight(&self, k: usize) -> f64 {
        let last = self.a.len() - 1;
        if k == 0 || k == last {
            0.5 * self.h
        } else {
            self.h
        }
    }
}

impl SmoothFn for TurboCost {
    fn value(&self, x: &[f64]) -> Result<f64, EvalError> {
        let mut acc_a = 0.0;
        let mut acc_b = 0.0;
        for k in 0..self.a.len() - 1 {
            let (a0, a1) = (x[self.a[k]], x[self.a[k + 1]]);
            let (b0, b1) = (x[self.b[k]], x[self.b[k + 1]]);
            acc_a += (a0 * a0 + a1 * a1) / 2.0;
            acc_b += (b0 * b0 * b0 + b1 * b1 * b1) / 2.0;
        }
        Ok(self.alpha_a * self.h * acc_a + self.alpha_b * self.h * acc_b)
    }

    fn gradient(&self, x: &[f64], grad: &mut [f64]) -> Result<(), EvalError> {
        grad.iter_mut().for_each(|g| *g = 0.0);
        for k in 0..self.a.len() {
            let w = self.weight(k);
            let (a, b) = (x[self.a[k]], x[self.b[k]]);
            grad[self.a[k]] = self.alpha_a * w * 2.0 * a;
            grad[self.b[k]] = self.alpha_b * w * 3.0 * b * b;
        }
        Ok(())
    }

    fn to_expression(&self) -> Option<String> {
        let mut terms = Vec::new();
        for k in 0..self.a.len() {
            let w = self.weight(k);
            terms.push(format!("{}*x{}^2", literal(self.alpha_a * w), self.a[k] + 1));
            terms.push(format!("{}*x{}^3", literal(self.alpha_b * w), self.b[k] + 1));
        }
        Some(terms.join(" + "))
    }

    fn support(&self) -> Option<Vec<usize>> {
        Some(self.a.iter().chain(&self.b).copied().collect())
    }
}

/// Round-trippable numeric literal; negatives are parenthesized.
pub(crate) fn literal(v: f64) -> String {
    if v < 0.0 {
        format!("(-{:?})", -v)
    } else {
        format!("{v:?}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expression;

    #[test]
    fn quadratic_matches_its_expression() {
        let f = QuadraticFn::new(vec![0, 2], vec![2.0, 0.5, 0.5, 1.0], vec![1.0, -2.0]);
        let e = Expression::parse(&f.to_expression().unwrap()).unwrap();
        let x = [0.3, 9.0, 1.7];
        assert!((f.value(&x).unwrap() - e.eval(&x).unwrap()).abs() < 1e-12);
        let mut g = vec![0.0; 3];
        f.gradient(&x, &mut g).unwrap();
        let ge = e.gradient(&x).unwrap();
        for (a, b) in g.iter().zip(&ge) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn turbo_cost_matches_its_expression() {
        let f = TurboCost {
            a: vec![0, 1, 2],
            b: vec![3, 4, 5],
            h: 0.4,
            alpha_a: 1.0,
            alpha_b: 0.01,
        };
        let e = Expression::parse(&f.to_expression().unwrap()).unwrap();
        let x = [1.0, 2.0, 3.0, 0.5, 4.0, 2.0];
        // 0.4 * ((1+4)/2 + (4+9)/2) + 0.004 * ((0.125+64)/2 + (64+8)/2)
        let expected = 0.4 * 9.0 + 0.004 * (64.125 / 2.0 + 36.0);
        assert!((f.value(&x).unwrap() - expected).abs() < 1e-12);
        assert!((e.eval(&x).unwrap() - expected).abs() < 1e-12);
        let mut g = vec![0.0; 6];
        f.gradient(&x, &mut g).unwrap();
        for (a, b) in g.iter().zip(&e.gradient(&x).unwrap()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
