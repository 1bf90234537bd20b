//! JSON problem files.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::expr::{parse_with, Constants, Expr, Number, SampleBox};
use crate::grps::{ProblemSpec, SolveError};

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("{pointer}: {message}")]
    Schema { pointer: String, message: String },
    #[error("{pointer}: {source}")]
    Expression {
        pointer: String,
        source: crate::expr::ExprError,
    },
    #[error(transparent)]
    Spec(#[from] SolveError),
}

fn schema(pointer: impl Into<String>, message: impl Into<String>) -> ProblemError {
    ProblemError::Schema {
        pointer: pointer.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ConstantValue {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientFormula {
    /// First index the formula applies to.
    pub from: usize,
    /// Expression in the spatial variables and the index `k`.
    pub expr: String,
}

/// Problem document as read from disk.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub name: String,
    pub order_n: usize,
    pub alpha: f64,
    pub spatial_vars: Vec<String>,
    pub nonlinearity: String,
    pub initials: Vec<String>,
    #[serde(default)]
    pub source_h: Vec<String>,
    #[serde(default)]
    pub constants: BTreeMap<String, ConstantValue>,
    #[serde(default)]
    pub exact_solution: Option<String>,
    #[serde(default)]
    pub exact_tolerance: Option<f64>,
    #[serde(default)]
    pub coefficient_formula: Option<CoefficientFormula>,
    #[serde(default)]
    pub domain: BTreeMap<String, [f64; 2]>,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default)]
    pub order: Option<usize>,
}

fn default_grid() -> usize {
    5
}

fn json_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    if out.is_empty() {
        out.push('/');
    }
    out
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self, ProblemError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let pointer = json_pointer(e.path());
            let message = e.into_inner().to_string();
            schema(pointer, message)
        })
    }

    pub fn load(path: &Path) -> Result<Self, ProblemError> {
        let text = std::fs::read_to_string(path).map_err(|e| ProblemError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_json(&text)
    }

    /// Resolves constants, parses every expression and validates the problem.
    pub fn compile(&self, alpha: Option<f64>) -> Result<Problem, ProblemError> {
        let alpha = alpha.unwrap_or(self.alpha);
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(schema(
                "/alpha",
                format!("alpha must lie in (0, 1], got {alpha}"),
            ));
        }
        let exact_alpha = Number::from_f64_decimal(alpha)
            .ok_or_else(|| schema("/alpha", "not a finite number"))?;
        let mut consts = Constants::new();
        consts.insert("alpha".into(), Expr::constant(exact_alpha));
        for (name, v) in &self.constants {
            if let ConstantValue::Number(x) = v {
                let n = Number::from_f64_decimal(*x)
                    .ok_or_else(|| schema(format!("/constants/{name}"), "not finite"))?;
                consts.insert(name.clone(), Expr::constant(n));
            }
        }
        let numeric = consts.clone();
        for (name, v) in &self.constants {
            if let ConstantValue::Text(src) = v {
                let e = parse_at(src, &numeric, &format!("/constants/{name}"))?;
                if !e.symbols().is_empty() {
                    return Err(schema(
                        format!("/constants/{name}"),
                        "constant expression must not contain variables",
                    ));
                }
                consts.insert(name.clone(), e);
            }
        }
        for v in &self.spatial_vars {
            if consts.contains_key(v) || v == "t" {
                return Err(schema(
                    "/spatial_vars",
                    format!("`{v}` clashes with a constant or the time variable"),
                ));
            }
        }

        let nonlinearity = parse_at(&self.nonlinearity, &consts, "/nonlinearity")?;
        let initials = self
            .initials
            .iter()
            .enumerate()
            .map(|(i, s)| parse_at(s, &consts, &format!("/initials/{i}")))
            .collect::<Result<Vec<_>, _>>()?;
        let source_h = self
            .source_h
            .iter()
            .enumerate()
            .map(|(i, s)| parse_at(s, &consts, &format!("/source_h/{i}")))
            .collect::<Result<Vec<_>, _>>()?;
        let vars: Vec<&str> = self.spatial_vars.iter().map(String::as_str).collect();
        let spec = ProblemSpec::new(self.order_n, alpha, &vars, nonlinearity, initials, source_h)?;

        let mut domain = SampleBox::new();
        for v in &self.spatial_vars {
            let [lo, hi] = self.domain.get(v).copied().unwrap_or([0.0, 1.0]);
            domain = domain.with(v, lo, hi);
        }
        for (v, [lo, hi]) in &self.domain {
            if lo.is_nan() || hi.is_nan() || lo > hi {
                return Err(schema(
                    format!("/domain/{v}"),
                    "interval must satisfy lo <= hi",
                ));
            }
            if v != "t" && !self.spatial_vars.contains(v) {
                return Err(schema(format!("/domain/{v}"), "not a declared variable"));
            }
        }
        let time = self.domain.get("t").map(|[lo, hi]| (*lo, *hi));

        let exact_solution = match &self.exact_solution {
            Some(src) => {
                let e = parse_at(src, &consts, "/exact_solution")?;
                if time.is_none() {
                    return Err(schema("/domain", "exact_solution needs a `t` interval"));
                }
                check_vars(&e, &self.spatial_vars, true, "/exact_solution")?;
                Some(e)
            }
            None => None,
        };

        let formula = match &self.coefficient_formula {
            Some(f) => {
                let mut with_k = consts.clone();
                with_k.insert("k".into(), Expr::int(f.from as i64));
                let e = parse_at(&f.expr, &with_k, "/coefficient_formula/expr")?;
                check_vars(&e, &self.spatial_vars, false, "/coefficient_formula/expr")?;
                Some(Formula {
                    from: f.from,
                    source: f.expr.clone(),
                    consts: consts.clone(),
                })
            }
            None => None,
        };
        if self.grid == 0 {
            return Err(schema("/grid", "grid must be at least 1"));
        }

        Ok(Problem {
            name: self.name.clone(),
            spec,
            domain,
            time,
            grid: self.grid,
            exact_solution,
            exact_tolerance: self.exact_tolerance,
            formula,
            order: self.order,
        })
    }
}

fn parse_at(src: &str, consts: &Constants, pointer: &str) -> Result<Expr, ProblemError> {
    parse_with(src, consts).map_err(|source| ProblemError::Expression {
        pointer: pointer.to_string(),
        source,
    })
}

fn check_vars(e: &Expr, vars: &[String], allow_t: bool, pointer: &str) -> Result<(), ProblemError> {
    for s in e.symbols() {
        if !(vars.contains(&s) || (allow_t && s == "t")) {
            return Err(schema(pointer, format!("undeclared variable `{s}`")));
        }
    }
    Ok(())
}

/// A validated problem ready to run.
#[derive(Debug, Clone)]
pub struct Problem {
    pub name: String,
    pub spec: ProblemSpec,
    /// Sampling box over the spatial variables.
    pub domain: SampleBox,
    pub time: Option<(f64, f64)>,
    pub grid: usize,
    pub exact_solution: Option<Expr>,
    pub exact_tolerance: Option<f64>,
    pub formula: Option<Formula>,
    pub order: Option<usize>,
}

/// Closed form of φ_k for k ≥ `from`, parsed once per index.
#[derive(Debug, Clone)]
pub struct Formula {
    pub from: usize,
    source: String,
    consts: Constants,
}

impl Problem {
    /// Closed-form coefficient for index k, if the formula covers it.
    pub fn formula_at(&self, k: usize) -> Option<Expr> {
        let f = self.formula.as_ref()?;
        if k < f.from {
            return None;
        }
        let mut consts = f.consts.clone();
        consts.insert("k".into(), Expr::int(k as i64));
        Some(parse_with(&f.source, &consts).expect("formula validated at compile time"))
    }
}
