//! Coefficient recurrence for D_t^{nα}ψ = N[ψ] + h.
//!
//! With ψ = Σ φ_k t^{kα}/Γ(1+kα), the first n coefficients are the initial
//! data and every later one is read off the nonlinearity applied to the
//! already known part of the series:
//!
//! φ_k = coefficient (k−n) of N[Θ] + h,  Θ = Σ_{j<k} φ_j t^{jα}/Γ(1+jα).

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::expr::{Expr, ExprError, Node, VarBinding, PSI};
use crate::fracseries::{series_sum, FracSeries, SeriesError};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("equation order must be at least 1")]
    ZeroOrder,
    #[error("expected {expected} initial functions, got {got}")]
    InitialCount { expected: usize, got: usize },
    #[error("{context} uses undeclared variable `{name}`")]
    UndeclaredVariable { context: String, name: String },
    #[error("{context} must not depend on psi")]
    UnexpectedPsi { context: String },
    #[error("unsupported template node `{node}`: {reason}")]
    Template { node: String, reason: String },
    #[error("nonlinearity is not affine in psi: `{0}`")]
    NotAffine(String),
    #[error("target order {target} is below the initial block (order {order_n})")]
    OrderTooLow { target: usize, order_n: usize },
    #[error("residual probe depth {upto} exceeds {max}")]
    ProbeTooDeep { upto: usize, max: usize },
    #[error("step {k}: {source}")]
    Step { k: usize, source: Box<SolveError> },
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

impl SolveError {
    fn at(self, k: usize) -> Self {
        match self {
            SolveError::Step { .. } => self,
            other => SolveError::Step {
                k,
                source: Box::new(other),
            },
        }
    }
}

/// D_t^{nα}ψ = N[ψ] + h with D_t^{kα}ψ(x,0) = f_k(x) for k < n.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    order_n: usize,
    alpha: f64,
    spatial_vars: Vec<String>,
    nonlinearity: Expr,
    initials: Vec<Expr>,
    source_h: Vec<Expr>,
}

impl ProblemSpec {
    /// Validates and normalises a problem.
    ///
    /// `source_h` lists h_0, h_1, … in the series basis; coefficients past
    /// the end of the list are zero.
    pub fn new(
        order_n: usize,
        alpha: f64,
        spatial_vars: &[&str],
        nonlinearity: Expr,
        initials: Vec<Expr>,
        source_h: Vec<Expr>,
    ) -> Result<Self, SolveError> {
        if order_n == 0 {
            return Err(SolveError::ZeroOrder);
        }
        FracSeries::zero(alpha, 0)?;
        if initials.len() != order_n {
            return Err(SolveError::InitialCount {
                expected: order_n,
                got: initials.len(),
            });
        }
        let spatial_vars: Vec<String> = spatial_vars.iter().map(|s| s.to_string()).collect();
        let declared = |context: &str, e: &Expr, allow_psi: bool| -> Result<(), SolveError> {
            for name in e.symbols() {
                if name == PSI && allow_psi {
                    continue;
                }
                if name == PSI {
                    return Err(SolveError::UnexpectedPsi {
                        context: context.to_string(),
                    });
                }
                if !spatial_vars.contains(&name) {
                    return Err(SolveError::UndeclaredVariable {
                        context: context.to_string(),
                        name,
                    });
                }
            }
            Ok(())
        };
        let nonlinearity = nonlinearity.normalize();
        declared("nonlinearity", &nonlinearity, true)?;
        let initials: Vec<Expr> = initials.iter().map(Expr::normalize).collect();
        for (k, f) in initials.iter().enumerate() {
            declared(&format!("initial function f_{k}"), f, false)?;
        }
        let source_h: Vec<Expr> = source_h.iter().map(Expr::normalize).collect();
        for (j, h) in source_h.iter().enumerate() {
            declared(&format!("source coefficient h_{j}"), h, false)?;
        }
        Ok(Self {
            order_n,
            alpha,
            spatial_vars,
            nonlinearity,
            initials,
            source_h,
        })
    }

    pub fn order_n(&self) -> usize {
        self.order_n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn spatial_vars(&self) -> &[String] {
        &self.spatial_vars
    }

    pub fn nonlinearity(&self) -> &Expr {
        &self.nonlinearity
    }

    pub fn initials(&self) -> &[Expr] {
        &self.initials
    }

    pub fn source_h(&self) -> &[Expr] {
        &self.source_h
    }

    /// h_j, zero past the supplied list.
    pub fn source_coeff(&self, j: usize) -> Expr {
        self.source_h.get(j).cloned().unwrap_or_else(Expr::zero)
    }

    /// The source as a series truncated at `order`.
    pub fn source_series(&self, order: usize) -> FracSeries {
        let coeffs = (0..=order).map(|j| self.source_coeff(j)).collect();
        FracSeries::new(self.alpha, coeffs).expect("alpha validated at construction")
    }

    /// Same problem at another fractional order.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self, SolveError> {
        FracSeries::zero(alpha, 0)?;
        Ok(Self {
            alpha,
            ..self.clone()
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    InitialCondition,
    Formula,
    LinearFastPath,
    Oracle,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::InitialCondition => "initial-condition",
            Provenance::Formula => "formula",
            Provenance::LinearFastPath => "linear-fast-path",
            Provenance::Oracle => "oracle",
        })
    }
}

/// φ_0..φ_K with the origin of each entry.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable {
    alpha: f64,
    coeffs: Vec<Expr>,
    provenance: Vec<Provenance>,
}

impl CoefficientTable {
    pub fn new(alpha: f64, entries: Vec<(Expr, Provenance)>) -> Self {
        let (coeffs, provenance) = entries.into_iter().unzip();
        Self {
            alpha,
            coeffs,
            provenance,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Highest stored index K.
    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, k: usize) -> &Expr {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[Expr] {
        &self.coeffs
    }

    pub fn provenance(&self, k: usize) -> Provenance {
        self.provenance[k]
    }

    pub fn to_series(&self) -> FracSeries {
        FracSeries::new(self.alpha, self.coeffs.clone()).expect("non-empty table with valid alpha")
    }

    /// Copy with φ_k replaced, e.g. to probe a deliberately wrong table.
    pub fn with_coeff(&self, k: usize, value: Expr) -> Self {
        let mut out = self.clone();
        out.coeffs[k] = value;
        out
    }
}

enum Val {
    Free(Expr),
    Series(FracSeries),
}

struct Interp<'a> {
    theta: &'a FracSeries,
    memo: HashMap<Expr, FracSeries>,
}

fn template_error(e: &Expr, reason: &str) -> SolveError {
    SolveError::Template {
        node: e.to_string(),
        reason: reason.to_string(),
    }
}

impl Interp<'_> {
    fn add(&self, a: Val, b: Val) -> Result<Val, SolveError> {
        Ok(match (a, b) {
            (Val::Free(x), Val::Free(y)) => Val::Free(&x + &y),
            (Val::Series(s), Val::Free(g)) | (Val::Free(g), Val::Series(s)) => {
                let mut cs = s.into_coeffs();
                cs[0] = &cs[0] + &g;
                Val::Series(FracSeries::new(self.theta.alpha(), cs)?)
            }
            (Val::Series(s), Val::Series(r)) => Val::Series(s.add(&r)?),
        })
    }

    fn mul(&self, a: Val, b: Val) -> Result<Val, SolveError> {
        Ok(match (a, b) {
            (Val::Free(x), Val::Free(y)) => Val::Free(&x * &y),
            (Val::Series(s), Val::Free(g)) | (Val::Free(g), Val::Series(s)) => {
                Val::Series(s.scale(&g))
            }
            (Val::Series(s), Val::Series(r)) => Val::Series(s.mul(&r)?),
        })
    }

    fn eval(&mut self, e: &Expr) -> Result<Val, SolveError> {
        if !e.has_unknown() {
            return Ok(Val::Free(e.clone()));
        }
        if let Some(s) = self.memo.get(e) {
            return Ok(Val::Series(s.clone()));
        }
        let v = match e.node() {
            Node::Var(_) => Val::Series(self.theta.clone()),
            Node::Sum(ts) => {
                let mut acc = Val::Free(Expr::zero());
                for t in ts {
                    let v = self.eval(t)?;
                    acc = self.add(acc, v)?;
                }
                acc
            }
            Node::Product(fs) => {
                let mut acc = Val::Free(Expr::one());
                for f in fs {
                    let v = self.eval(f)?;
                    acc = self.mul(acc, v)?;
                }
                acc
            }
            Node::Pow(b, p) => {
                let n = match (p.is_integer(), p.to_integer().try_into()) {
                    (true, Ok(n)) if n >= 1u32 => n,
                    _ => {
                        return Err(template_error(
                            e,
                            "psi may only be raised to a positive integer power",
                        ))
                    }
                };
                let base = self.eval(b)?;
                let mut acc = Val::Free(Expr::one());
                let mut base = Some(base);
                for i in 0..n {
                    let factor = if i + 1 == n {
                        base.take().unwrap()
                    } else {
                        match base.as_ref().unwrap() {
                            Val::Free(x) => Val::Free(x.clone()),
                            Val::Series(s) => Val::Series(s.clone()),
                        }
                    };
                    acc = self.mul(acc, factor)?;
                }
                acc
            }
            Node::Deriv { var, order, inner } => match self.eval(inner)? {
                Val::Free(x) => Val::Free(x.diff_n(var, *order)),
                Val::Series(s) => Val::Series(s.spatial_diff(var, *order)),
            },
            Node::Func(..) | Node::MittagLeffler(..) => {
                return Err(template_error(
                    e,
                    "functions of psi are outside the supported operator class",
                ))
            }
            Node::Quotient(..) => {
                return Err(template_error(e, "division by an expression in psi"))
            }
            Node::Const(_) => unreachable!("constants have no unknown"),
        };
        if let Val::Series(s) = &v {
            self.memo.insert(e.clone(), s.clone());
        }
        Ok(v)
    }
}

/// N[Θ] + h as a series with the truncation of `theta`.
pub fn apply_nonlinearity(
    spec: &ProblemSpec,
    theta: &FracSeries,
) -> Result<FracSeries, SolveError> {
    if theta.alpha() != spec.alpha {
        return Err(SeriesError::AlphaMismatch {
            left: spec.alpha,
            right: theta.alpha(),
        }
        .into());
    }
    let mut interp = Interp {
        theta,
        memo: HashMap::new(),
    };
    let n = interp.eval(&spec.nonlinearity)?;
    let n = match n {
        Val::Series(s) => s,
        Val::Free(g) => FracSeries::constant(spec.alpha, g, theta.order())?,
    };
    Ok(n.add(&spec.source_series(theta.order()))?)
}

/// φ_0..φ_K by the explicit recurrence.
pub fn solve(spec: &ProblemSpec, target: usize) -> Result<CoefficientTable, SolveError> {
    let n = spec.order_n;
    if target + 1 < n {
        return Err(SolveError::OrderTooLow { target, order_n: n });
    }
    let mut entries: Vec<(Expr, Provenance)> = spec
        .initials
        .iter()
        .map(|f| (f.clone(), Provenance::InitialCondition))
        .collect();
    let mut known: Vec<Expr> = spec.initials.clone();
    for k in n..=target {
        // only φ_0..φ_{k−n} reach coefficient k−n of N[Θ]
        let theta = FracSeries::new(spec.alpha, known[..=k - n].to_vec())?;
        let image = apply_nonlinearity(spec, &theta).map_err(|e| e.at(k))?;
        let phi = image.coeff(k - n).normalize();
        known.push(phi.clone());
        entries.push((phi, Provenance::Formula));
    }
    Ok(CoefficientTable::new(spec.alpha, entries))
}

/// Degree of the template in psi, `None` when it is not polynomial.
fn psi_degree(e: &Expr) -> Option<u64> {
    if !e.has_unknown() {
        return Some(0);
    }
    match e.node() {
        Node::Var(_) => Some(1),
        Node::Sum(ts) => ts
            .iter()
            .map(psi_degree)
            .try_fold(0, |acc, d| d.map(|d| acc.max(d))),
        Node::Product(fs) => fs
            .iter()
            .map(psi_degree)
            .try_fold(0, |acc, d| d.map(|d| acc + d)),
        Node::Pow(b, p) => {
            let d = psi_degree(b)?;
            let p: u64 = p
                .is_integer()
                .then(|| p.to_integer().try_into().ok())
                .flatten()?;
            Some(d * p)
        }
        Node::Deriv { inner, .. } => psi_degree(inner),
        _ => None,
    }
}

/// Linear fast path φ_k = L[φ_{k−n}] + h_{k−n}, for templates affine in psi.
///
/// A constant part N[0] of the operator contributes to φ_n only.
pub fn solve_linear(spec: &ProblemSpec, target: usize) -> Result<CoefficientTable, SolveError> {
    let n = spec.order_n;
    if target + 1 < n {
        return Err(SolveError::OrderTooLow { target, order_n: n });
    }
    if !matches!(psi_degree(&spec.nonlinearity), Some(0 | 1)) {
        return Err(SolveError::NotAffine(spec.nonlinearity.to_string()));
    }
    let offset = spec.nonlinearity.substitute(PSI, &Expr::zero());
    let mut entries: Vec<(Expr, Provenance)> = spec
        .initials
        .iter()
        .map(|f| (f.clone(), Provenance::InitialCondition))
        .collect();
    for k in n..=target {
        let prev = &entries[k - n].0;
        let applied = &spec.nonlinearity.substitute(PSI, prev) - &offset;
        let mut phi = &applied + &spec.source_coeff(k - n);
        if k == n {
            phi = &phi + &offset;
        }
        entries.push((phi.normalize(), Provenance::LinearFastPath));
    }
    Ok(CoefficientTable::new(spec.alpha, entries))
}

/// ψ_N(x, t) = Σ_{k≤upto} φ_k t^{kα}/Γ(1+kα).
pub fn partial_sum_eval<T: Scalar>(
    table: &CoefficientTable,
    b: &VarBinding<T>,
    t: T,
    upto: usize,
) -> Result<T, SeriesError> {
    let upto = upto.min(table.order());
    series_sum(&table.coeffs[..=upto], T::lit(table.alpha), b, t)
}

/// Coefficients 0..=upto of D^{nα}Θ − N[Θ] − h for the tabulated Θ.
///
/// Coefficient j concerns φ_{j+n}; a consistent table gives zeros.
pub fn residual_probe(
    spec: &ProblemSpec,
    table: &CoefficientTable,
    upto: usize,
) -> Result<Vec<Expr>, SolveError> {
    let n = spec.order_n;
    if table.order() < n || upto > table.order() - n {
        return Err(SolveError::ProbeTooDeep {
            upto,
            max: table.order().saturating_sub(n),
        });
    }
    let theta = table.to_series().truncate(upto + n);
    let lhs = theta.caputo_shift(n)?;
    let rhs = apply_nonlinearity(spec, &theta.truncate(upto))?;
    Ok(lhs.sub(&rhs)?.into_coeffs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{equiv, parse, EquivConfig, SampleBox};

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    fn gas(alpha: f64) -> ProblemSpec {
        ProblemSpec::new(
            1,
            alpha,
            &["x", "c"],
            p("c*psi*(1-psi) - psi*Dx(psi)"),
            vec![p("exp(-x)")],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn validation() {
        assert_eq!(
            ProblemSpec::new(1, 0.5, &["x"], p("psi*y"), vec![p("1")], vec![]),
            Err(SolveError::UndeclaredVariable {
                context: "nonlinearity".into(),
                name: "y".into()
            })
        );
        assert!(matches!(
            ProblemSpec::new(2, 0.5, &["x"], p("psi"), vec![p("1")], vec![]),
            Err(SolveError::InitialCount {
                expected: 2,
                got: 1
            })
        ));
        assert!(matches!(
            ProblemSpec::new(1, 1.5, &["x"], p("psi"), vec![p("1")], vec![]),
            Err(SolveError::Series(SeriesError::BadAlpha(_)))
        ));
        assert!(matches!(
            ProblemSpec::new(1, 0.5, &["x"], p("psi"), vec![p("psi")], vec![]),
            Err(SolveError::UnexpectedPsi { .. })
        ));
    }

    #[test]
    fn first_gas_coefficient() {
        let spec = gas(0.5);
        let theta = FracSeries::new(0.5, vec![p("exp(-x)")]).unwrap();
        let n = apply_nonlinearity(&spec, &theta).unwrap();
        let f = p("exp(-x)");
        let expected = &(&(&p("c") * &f) * &(&Expr::one() - &f)) - &(&f * &f.diff("x"));
        assert_eq!(*n.coeff(0), expected.normalize());
    }

    #[test]
    fn identity_operator_adds_source() {
        let spec = ProblemSpec::new(
            1,
            0.5,
            &["x"],
            p("psi"),
            vec![p("x")],
            vec![p("1"), p("x^2")],
        )
        .unwrap();
        let theta = FracSeries::new(0.5, vec![p("x"), p("2*x"), p("3")]).unwrap();
        let out = apply_nonlinearity(&spec, &theta).unwrap();
        assert_eq!(out.coeffs(), &[p("1 + x"), p("2*x + x^2"), p("3")]);
    }

    #[test]
    fn biological_second_coefficient_template() {
        let spec = ProblemSpec::new(
            1,
            0.6,
            &["x", "y", "c", "r"],
            p("Dx(psi^2, 2) + Dy(psi^2, 2) + c*psi*(1 - r*psi)"),
            vec![p("exp(x*y)")],
            vec![],
        )
        .unwrap();
        let (f0, f1) = (p("exp(x*y)"), p("sin(x) + y"));
        let theta = FracSeries::new(0.6, vec![f0.clone(), f1.clone()]).unwrap();
        let out = apply_nonlinearity(&spec, &theta).unwrap();
        let prod = &f0 * &f1;
        let expected = Expr::add([
            Expr::mul([Expr::int(2), prod.diff_n("x", 2)]),
            Expr::mul([Expr::int(2), prod.diff_n("y", 2)]),
            &p("c") * &f1,
            Expr::mul([Expr::int(-2), p("c*r"), prod]),
        ]);
        let b = SampleBox::new()
            .with("x", 0.0, 1.0)
            .with("y", 0.0, 1.0)
            .with("c", 0.5, 2.0)
            .with("r", 0.5, 2.0);
        assert!(equiv(out.coeff(1), &expected, &b, &EquivConfig::default()).unwrap());
    }

    #[test]
    fn zero_problem_and_exponential() {
        let spec =
            ProblemSpec::new(1, 0.5, &["x"], Expr::zero(), vec![p("sin(x)")], vec![]).unwrap();
        let t = solve(&spec, 5).unwrap();
        assert!(t.coeffs()[1..].iter().all(Expr::is_zero));
        let spec = ProblemSpec::new(1, 1.0, &["x"], p("psi"), vec![p("cos(x)")], vec![]).unwrap();
        let t = solve(&spec, 20).unwrap();
        assert!(t.coeffs().iter().all(|c| *c == p("cos(x)")));
        let b = VarBinding::from_pairs([("x", 0.4)]);
        let v = partial_sum_eval(&t, &b, 1.0, 20).unwrap();
        let exact = 0.4f64.cos() * std::f64::consts::E;
        assert!(((v - exact) / exact).abs() < 1e-8);
        assert_eq!(partial_sum_eval(&t, &b, 0.0, 20).unwrap(), 0.4f64.cos());
        assert_eq!(solve_linear(&spec, 20).unwrap().coeffs(), t.coeffs());
    }

    #[test]
    fn causality() {
        let spec = gas(0.7);
        let a = solve(&spec, 4).unwrap();
        let b = solve(&spec, 6).unwrap();
        assert_eq!(a.coeffs(), &b.coeffs()[..5]);
    }

    #[test]
    fn affine_check() {
        let spec = gas(0.5);
        assert!(matches!(
            solve_linear(&spec, 3),
            Err(SolveError::NotAffine(_))
        ));
        let spec = ProblemSpec::new(
            1,
            0.5,
            &["x"],
            p("x*Dx(psi, 2) + 3"),
            vec![p("x^3")],
            vec![p("x")],
        )
        .unwrap();
        let lin = solve_linear(&spec, 4).unwrap();
        let full = solve(&spec, 4).unwrap();
        assert_eq!(lin.coeffs(), full.coeffs());
        assert_eq!(lin.provenance(1), Provenance::LinearFastPath);
        assert_eq!(full.provenance(0), Provenance::InitialCondition);
    }

    #[test]
    fn residual_probe_detects_corruption() {
        let spec = gas(0.5);
        let table = solve(&spec, 4).unwrap();
        let r = residual_probe(&spec, &table, 3).unwrap();
        assert_eq!(r.len(), 4);
        let b = SampleBox::new().with("x", 0.0, 1.0).with("c", 0.5, 2.0);
        for c in &r {
            assert!(
                equiv(c, &Expr::zero(), &b, &EquivConfig::default()).unwrap(),
                "{c}"
            );
        }
        let bad = table.with_coeff(2, &table.coeff(2).clone() + &Expr::one());
        let r = residual_probe(&spec, &bad, 3).unwrap();
        assert!(!equiv(&r[1], &Expr::zero(), &b, &EquivConfig::default()).unwrap());
        assert!(matches!(
            residual_probe(&spec, &table, 4),
            Err(SolveError::ProbeTooDeep { .. })
        ));
    }

    #[test]
    fn template_errors_name_the_step() {
        let spec = ProblemSpec::new(1, 0.5, &["x"], p("exp(psi)"), vec![p("x")], vec![]).unwrap();
        match solve(&spec, 2) {
            Err(SolveError::Step { k: 1, source }) => {
                assert!(matches!(*source, SolveError::Template { .. }))
            }
            other => panic!("{other:?}"),
        }
    }
}
