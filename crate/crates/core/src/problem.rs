//! JSON problem files.
//!
//! ```json
//! {
//!   "variables": [
//!     {"name": "u", "lb": -1.0, "ub": 2.0},
//!     {"name": "z", "lb": 0, "ub": 1, "integer": true}
//!   ],
//!   "constraints": [
//!     {"coeffs": {"u": 1.0, "z": -2.0}, "sense": "<=", "rhs": 0.0}
//!   ],
//!   "objective": {"f1": "(x1 - 0.5)^2", "f2": {"z": 0.3}},
//!   "initial_point": [0.0, 0.0]
//! }
//! ```
//!
//! A missing or `null` bound means unbounded. `f1` refers to variables by
//! position (`x1` is the first declared variable) and may only use real
//! variables; `f2` holds the linear cost of the integer variables by name.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::Expression;
use crate::lp::{Constraint, Sense};
use crate::model::{MixedIntegerPolyhedron, ModelError, PolyhedronBuilder, SmoothObjective};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{}{path}: {message}", line.map(|l| format!("line {l}, ")).unwrap_or_default())]
    Semantic {
        /// Best-effort line of the offending token.
        line: Option<usize>,
        /// Location inside the document, e.g. `constraints[2]`.
        path: String,
        message: String,
    },
    #[error("objective part f1 has no expression form and cannot be exported")]
    NotExportable,
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableSpec {
    pub name: String,
    #[serde(default)]
    pub lb: Option<f64>,
    #[serde(default)]
    pub ub: Option<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub integer: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub coeffs: BTreeMap<String, f64>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveSpec {
    pub f1: String,
    #[serde(default)]
    pub f2: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub variables: Vec<VariableSpec>,
    #[serde(default)]
    pub constraints: Vec<ConstraintSpec>,
    pub objective: ObjectiveSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_point: Option<Vec<f64>>,
}

/// A loaded problem.
#[derive(Debug, Clone)]
pub struct Problem {
    pub set: MixedIntegerPolyhedron,
    pub objective: SmoothObjective,
    pub initial_point: Option<Vec<f64>>,
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self, ProblemError> {
        serde_json::from_str(text).map_err(|e| ProblemError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string().split(" at line ").next().unwrap_or_default().to_string(),
        })
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files always serialize")
    }

    /// Describes `set` and `objective` as a file; `f1` must have an
    /// expression form.
    pub fn export(
        set: &MixedIntegerPolyhedron,
        objective: &SmoothObjective,
        initial_point: Option<Vec<f64>>,
    ) -> Result<Self, ProblemError> {
        let names = set.names();
        let variables = (0..set.num_vars())
            .map(|j| VariableSpec {
                name: names[j].clone(),
                lb: Some(set.lower()[j]).filter(|v| v.is_finite()),
                ub: Some(set.upper()[j]).filter(|v| v.is_finite()),
                integer: set.is_integer(j),
            })
            .collect();
        let constraints = set
            .rows()
            .iter()
            .map(|r| ConstraintSpec {
                name: None,
                coeffs: r.coeffs.iter().map(|&(j, v)| (names[j].clone(), v)).collect(),
                sense: r.sense,
                rhs: r.rhs,
            })
            .collect();
        let f1 = objective.f1().to_expression().ok_or(ProblemError::NotExportable)?;
        let f2 = set
            .integers()
            .iter()
            .zip(objective.f2())
            .filter(|(_, c)| **c != 0.0)
            .map(|(&i, &c)| (names[i].clone(), c))
            .collect();
        Ok(ProblemFile {
            variables,
            constraints,
            objective: ObjectiveSpec { f1, f2 },
            initial_point,
        })
    }

    /// Builds the problem. `source`, when given, is the text the file was
    /// read from and is only used to attach line numbers to errors.
    pub fn build(&self, source: Option<&str>) -> Result<Problem, ProblemError> {
        let semantic = |path: String, token: Option<&str>, message: String| ProblemError::Semantic {
            line: source.zip(token).and_then(|(s, t)| line_of(s, t)),
            path,
            message,
        };

        let mut index: HashMap<&str, usize> = HashMap::new();
        let mut b = PolyhedronBuilder::new();
        for (j, v) in self.variables.iter().enumerate() {
            let path = format!("variables[{j}]");
            let lo = v.lb.unwrap_or(f64::NEG_INFINITY);
            let hi = v.ub.unwrap_or(f64::INFINITY);
            if index.insert(v.name.as_str(), j).is_some() {
                return Err(semantic(path, Some(&v.name), format!("duplicate variable name {:?}", v.name)));
            }
            if lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(semantic(path, Some(&v.name), format!("empty bound interval [{lo}, {hi}]")));
            }
            if v.integer && !(lo.is_finite() && hi.is_finite()) {
                return Err(semantic(path, Some(&v.name), "integer variables need finite bounds".into()));
            }
            b.add_var(v.name.clone(), lo, hi, v.integer)?;
        }

        for (i, c) in self.constraints.iter().enumerate() {
            let path = format!("constraints[{i}]");
            let mut coeffs = Vec::with_capacity(c.coeffs.len());
            for (name, &value) in &c.coeffs {
                let Some(&j) = index.get(name.as_str()) else {
                    return Err(semantic(path, Some(name), format!("unknown variable {name:?}")));
                };
                if !value.is_finite() {
                    return Err(semantic(path, Some(name), "non-finite coefficient".into()));
                }
                coeffs.push((j, value));
            }
            if !c.rhs.is_finite() {
                return Err(semantic(path, None, "non-finite right-hand side".into()));
            }
            b.add_row(Constraint::new(coeffs, c.sense, c.rhs))?;
        }
        let set = b.build()?;
        let n = set.num_vars();

        let f1 = Expression::parse(&self.objective.f1).map_err(|e| {
            semantic(
                "objective.f1".into(),
                Some("f1"),
                format!("{} (character {} of the expression)", e.message, e.position),
            )
        })?;
        if f1.max_var() > n {
            return Err(semantic(
                "objective.f1".into(),
                Some("f1"),
                format!("x{} referenced but only {n} variables are declared", f1.max_var()),
            ));
        }
        if let Some(&k) = f1.variables().iter().find(|&&k| set.is_integer(k - 1)) {
            return Err(semantic(
                "objective.f1".into(),
                Some("f1"),
                format!("x{k} ({}) is integer; put its cost in f2", set.names()[k - 1]),
            ));
        }
        let mut f2 = vec![0.0; set.integers().len()];
        for (name, &value) in &self.objective.f2 {
            let Some(&j) = index.get(name.as_str()) else {
                return Err(semantic("objective.f2".into(), Some(name), format!("unknown variable {name:?}")));
            };
            let Ok(pos) = set.integers().binary_search(&j) else {
                return Err(semantic(
                    "objective.f2".into(),
                    Some(name),
                    format!("{name:?} is not an integer variable"),
                ));
            };
            f2[pos] = value;
        }
        let objective = SmoothObjective::for_polyhedron(&set, Arc::new(f1), f2)?;

        if let Some(x0) = &self.initial_point {
            if x0.len() != n {
                return Err(semantic(
                    "initial_point".into(),
                    Some("initial_point"),
                    format!("expected {n} entries, got {}", x0.len()),
                ));
            }
        }
        Ok(Problem {
            set,
            objective,
            initial_point: self.initial_point.clone(),
        })
    }
}

/// Parses and builds a problem from JSON text.
pub fn load_problem(text: &str) -> Result<Problem, ProblemError> {
    ProblemFile::from_json(text)?.build(Some(text))
}

/// 1-based line of the first quoted occurrence of `token`.
fn line_of(text: &str, token: &str) -> Option<usize> {
    let quoted = format!("\"{token}\"");
    let at = text.find(&quoted)?;
    Some(text[..at].matches('\n').count() + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{build_turbo, random_instance, TurboParams};

    const SAMPLE: &str = r#"{
  "variables": [
    {"name": "u", "lb": -1.0, "ub": 2.0},
    {"name": "w"},
    {"name": "z", "lb": 0, "ub": 1, "integer": true}
  ],
  "constraints": [
    {"coeffs": {"u": 1.0, "z": -2.0}, "sense": "<=", "rhs": 0.0},
    {"coeffs": {"w": 1.0, "u": 1.0}, "sense": "=", "rhs": 1.0}
  ],
  "objective": {"f1": "(x1 - 0.5)^2 + x2^2", "f2": {"z": 0.3}},
  "initial_point": [0.0, 1.0, 0.0]
}"#;

    #[test]
    fn sample_loads() {
        let p = load_problem(SAMPLE).unwrap();
        assert_eq!(p.set.num_vars(), 3);
        assert_eq!(p.set.integers(), &[2]);
        assert_eq!(p.set.lower()[1], f64::NEG_INFINITY);
        assert_eq!(p.set.rows().len(), 2);
        assert_eq!(p.set.rows()[1].sense, Sense::Eq);
        let f = p.objective.value(&[0.5, 1.0, 1.0]).unwrap();
        assert!((f - 1.3).abs() < 1e-12);
        assert_eq!(p.initial_point, Some(vec![0.0, 1.0, 0.0]));
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let broken = SAMPLE.replace("\"rhs\": 1.0}", "\"rhs\": }");
        match load_problem(&broken) {
            Err(ProblemError::Syntax { line, .. }) => assert_eq!(line, 9),
            other => panic!("{other:?}"),
        }
        let unknown_field = SAMPLE.replace("\"integer\": true", "\"integral\": true");
        assert!(matches!(load_problem(&unknown_field), Err(ProblemError::Syntax { line: 5, .. })));
    }

    #[test]
    fn semantic_errors_point_at_the_token() {
        let bad = SAMPLE.replace("{\"w\": 1.0, \"u\": 1.0}", "{\"v\": 1.0, \"u\": 1.0}");
        match load_problem(&bad) {
            Err(ProblemError::Semantic { line, path, .. }) => {
                assert_eq!(line, Some(9));
                assert_eq!(path, "constraints[1]");
            }
            other => panic!("{other:?}"),
        }
        let integer_in_f1 = SAMPLE.replace("x2^2", "x3^2");
        assert!(matches!(
            load_problem(&integer_in_f1),
            Err(ProblemError::Semantic { line: Some(11), .. })
        ));
        let bad_expr = SAMPLE.replace("x2^2", "x2^");
        assert!(load_problem(&bad_expr).unwrap_err().to_string().starts_with("line 11, objective.f1"));
        let short = SAMPLE.replace("[0.0, 1.0, 0.0]", "[0.0]");
        assert!(load_problem(&short).is_err());
        let dup = SAMPLE.replace("\"name\": \"w\"", "\"name\": \"u\"");
        assert!(matches!(load_problem(&dup), Err(ProblemError::Semantic { .. })));
    }

    #[test]
    fn export_round_trips() {
        let inst = random_instance(4, 3, 2, 3).unwrap();
        let file = ProblemFile::export(&inst.set, &inst.objective, Some(inst.planted.clone())).unwrap();
        let text = file.to_json_pretty();
        let back = load_problem(&text).unwrap();
        assert_eq!(back.set, inst.set);
        assert_eq!(back.objective.f2(), inst.objective.f2());
        for x in [inst.planted.clone(), vec![0.3, -0.2, 1.1, 1.0, 0.0]] {
            let (a, b) = (back.objective.value(&x).unwrap(), inst.objective.value(&x).unwrap());
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "{a} vs {b}");
        }
        assert_eq!(ProblemFile::from_json(&text).unwrap().to_json_pretty(), text);
    }

    #[test]
    fn turbo_exports() {
        let inst = build_turbo(&TurboParams::with_intervals(4)).unwrap();
        let text = ProblemFile::export(&inst.set, &inst.objective, None).unwrap().to_json_pretty();
        let back = load_problem(&text).unwrap();
        assert_eq!(back.set, inst.set);
        let x: Vec<f64> = (0..inst.set.num_vars()).map(|i| (i % 7) as f64 * 0.5).collect();
        let (a, b) = (back.objective.value(&x).unwrap(), inst.objective.value(&x).unwrap());
        assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
    }
}
