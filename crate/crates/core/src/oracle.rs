//! Coefficients recovered directly from the transform-domain residual.
//!
//! This path shares no recurrence code with [`crate::grps`]: the unknown
//! series is carried in raw monomials t^{jα} (no Γ weights), products are
//! plain convolutions, and each φ_m is isolated as the ω → ∞ limit of
//!
//! ν^{-1} ω^{1+mα} · ( T{U} − Σ_{k<n} f_k ν ω^{−1−kα} − ω^{−nα} T{N[U] + h} )
//!
//! with U = Σ_{k≤m} φ_k t^{kα}/Γ(1+kα) and φ_m a placeholder symbol.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use thiserror::Error;

use crate::expr::{Expr, ExprError, Node, Number, VarBinding, PSI};
use crate::grps::{CoefficientTable, ProblemSpec, Provenance, SolveError};
use crate::specfun::{gamma, SpecfunError};
use crate::transform::{
    limit_at_infinity, Exponent, Term, TransformError, TransformPreset, TransformSeries, ZeroTest,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("coefficient {m}: unknown appears at non-negative exponent {exponent} in the nonlinear part")]
    UnknownAtNonNegative { m: usize, exponent: String },
    #[error("coefficient {m}: residual limit is not linear in the unknown: {residual}")]
    UnknownSurvives { m: usize, residual: String },
    #[error("unsupported template node `{0}`")]
    Template(String),
    #[error("table holds {have} coefficients, probe needs {need}")]
    TableTooShort { have: usize, need: usize },
    #[error("coefficient {m}: {source}")]
    Limit { m: usize, source: TransformError },
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Γ(1+jα), exact at α = 1.
fn gamma_weight(j: usize, alpha: f64) -> Result<Number, SpecfunError> {
    if alpha == 1.0 {
        let f = (1..=j as u64).fold(BigInt::one(), |acc, i| acc * BigInt::from(i));
        return Ok(Number::Rational(BigRational::from_integer(f)));
    }
    gamma(1.0 + j as f64 * alpha).map(Number::float)
}

fn inv_gamma_weight(j: usize, alpha: f64) -> Result<Number, SpecfunError> {
    Ok(match gamma_weight(j, alpha)? {
        Number::Rational(r) => Number::Rational(r.recip()),
        Number::Float(g) => Number::float(1.0 / g),
    })
}

enum Raw {
    Free(Expr),
    Poly(Vec<Expr>),
}

fn poly_add(mut a: Vec<Expr>, b: &[Expr]) -> Vec<Expr> {
    if a.len() < b.len() {
        a.resize(b.len(), Expr::zero());
    }
    for (x, y) in a.iter_mut().zip(b) {
        *x = &*x + y;
    }
    a
}

fn poly_mul(a: &[Expr], b: &[Expr], cap: usize) -> Vec<Expr> {
    let len = (a.len() + b.len() - 1).min(cap + 1);
    let mut out = vec![Vec::new(); len];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate().take(len.saturating_sub(i)) {
            out[i + j].push(x * y);
        }
    }
    out.into_iter().map(Expr::add).collect()
}

fn raw_combine(a: Raw, b: Raw, product: bool, cap: usize) -> Raw {
    match (a, b, product) {
        (Raw::Free(x), Raw::Free(y), false) => Raw::Free(&x + &y),
        (Raw::Free(x), Raw::Free(y), true) => Raw::Free(&x * &y),
        (Raw::Poly(p), Raw::Free(g), false) | (Raw::Free(g), Raw::Poly(p), false) => {
            Raw::Poly(poly_add(p, &[g]))
        }
        (Raw::Poly(p), Raw::Free(g), true) | (Raw::Free(g), Raw::Poly(p), true) => {
            Raw::Poly(p.iter().map(|c| c * &g).collect())
        }
        (Raw::Poly(p), Raw::Poly(q), false) => Raw::Poly(poly_add(p, &q)),
        (Raw::Poly(p), Raw::Poly(q), true) => Raw::Poly(poly_mul(&p, &q, cap)),
    }
}

/// N applied to a raw polynomial in t^α, dropping powers above t^{cap·α}.
fn raw_apply(template: &Expr, u: &[Expr], cap: usize) -> Result<Raw, OracleError> {
    if !template.contains_symbol(PSI) {
        return Ok(Raw::Free(template.clone()));
    }
    Ok(match template.node() {
        Node::Var(_) => Raw::Poly(u.to_vec()),
        Node::Sum(ts) | Node::Product(ts) => {
            let product = matches!(template.node(), Node::Product(_));
            let mut acc = Raw::Free(if product { Expr::one() } else { Expr::zero() });
            for t in ts {
                acc = raw_combine(acc, raw_apply(t, u, cap)?, product, cap);
            }
            acc
        }
        Node::Pow(b, p) if p.is_integer() && *p >= BigRational::one() => {
            let times: usize = p
                .to_integer()
                .try_into()
                .map_err(|_| OracleError::Template(template.to_string()))?;
            let mut acc = Raw::Free(Expr::one());
            for _ in 0..times {
                acc = raw_combine(acc, raw_apply(b, u, cap)?, true, cap);
            }
            acc
        }
        Node::Deriv { var, order, inner } => match raw_apply(inner, u, cap)? {
            Raw::Free(g) => Raw::Free(g.diff_n(var, *order)),
            Raw::Poly(p) => Raw::Poly(p.iter().map(|c| c.diff_n(var, *order)).collect()),
        },
        _ => return Err(OracleError::Template(template.to_string())),
    })
}

/// Builds ν^{-1} ω^{1+mα}·GRes_m for the coefficients `phi` (length m+1).
///
/// With `limit_only`, forcing terms of negative ω-exponent are not formed.
fn scaled_residual(
    spec: &ProblemSpec,
    phi: &[Expr],
    preset: &TransformPreset,
    limit_only: bool,
) -> Result<(TransformSeries, TransformSeries), OracleError> {
    let alpha = spec.alpha();
    let n = spec.order_n() as i64;
    let m = phi.len() - 1;
    let image = |k: usize| Exponent::int(-1, -(k as i64));

    let psi_terms = phi.iter().enumerate().map(|(k, c)| Term {
        coef: c.clone(),
        nu_power: 1,
        exponent: image(k),
    });
    let block = spec.initials().iter().enumerate().map(|(k, f)| Term {
        coef: Expr::neg(f),
        nu_power: 1,
        exponent: image(k),
    });
    let linear = TransformSeries::new(alpha, preset.clone(), psi_terms.chain(block));

    let cap = if limit_only {
        m.saturating_sub(n as usize)
    } else {
        usize::MAX / 2
    };
    let mut u = Vec::with_capacity(phi.len());
    for (k, c) in phi.iter().enumerate() {
        u.push(c * &Expr::constant(inv_gamma_weight(k, alpha)?));
    }
    let mut raw = match raw_apply(spec.nonlinearity(), &u, cap)? {
        Raw::Poly(p) => p,
        Raw::Free(g) => vec![g],
    };
    for (j, h) in spec
        .source_h()
        .iter()
        .enumerate()
        .take(cap.saturating_add(1))
    {
        let hj = h * &Expr::constant(inv_gamma_weight(j, alpha)?);
        raw = poly_add(raw, &[vec![Expr::zero(); j], vec![hj]].concat());
    }
    let mut forced = Vec::with_capacity(raw.len());
    for (j, a) in raw.iter().enumerate() {
        let coef = a * &Expr::constant(gamma_weight(j, alpha)?);
        forced.push(Term {
            coef,
            nu_power: 1,
            exponent: image(j).add(&Exponent::int(0, -n)),
        });
    }
    let forced = TransformSeries::new(alpha, preset.clone(), forced);

    let up = Exponent::int(1, m as i64);
    Ok((linear.shift(-1, &up), forced.shift(-1, &up)))
}

/// φ_0..φ_K read off the transform-domain residual, one coefficient at a time.
///
/// Positive-exponent terms of each scaled residual must vanish under `zero`.
pub fn direct_coefficients(
    spec: &ProblemSpec,
    target: usize,
    preset: &TransformPreset,
    zero: ZeroTest<'_>,
) -> Result<CoefficientTable, OracleError> {
    let n = spec.order_n();
    let mut phi: Vec<Expr> = spec.initials().to_vec();
    phi.truncate(target + 1);
    for m in n..=target {
        let name = format!("__phi{m}");
        let unknown = Expr::var(&name);
        let mut trial = phi.clone();
        trial.push(unknown.clone());
        let (linear, forced) = scaled_residual(spec, &trial, preset, true)?;
        for t in forced.terms() {
            if t.coef.contains_symbol(&name) && t.exponent.value(spec.alpha()) >= 0.0 {
                return Err(OracleError::UnknownAtNonNegative {
                    m,
                    exponent: t.exponent.to_string(),
                });
            }
        }
        let total = linear.sub(&forced);
        let limit = limit_at_infinity(&total, 0, &Exponent::zero(), zero)
            .map_err(|source| OracleError::Limit { m, source })?;
        let rest = (&limit - &unknown).normalize();
        if rest.contains_symbol(&name) {
            return Err(OracleError::UnknownSurvives {
                m,
                residual: rest.to_string(),
            });
        }
        phi.push(Expr::neg(&rest).normalize());
    }
    let entries = phi
        .into_iter()
        .enumerate()
        .map(|(k, c)| {
            (
                c,
                if k < n {
                    Provenance::InitialCondition
                } else {
                    Provenance::Oracle
                },
            )
        })
        .collect();
    Ok(CoefficientTable::new(spec.alpha(), entries))
}

/// Numerical behaviour of ν^{-1}ω^{1+mα}·GRes_m as ω grows.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub omegas: Vec<f64>,
    pub values: Vec<f64>,
    /// values[i+1] / values[i].
    pub ratios: Vec<f64>,
    /// |value| never grows over the second half of the samples.
    pub tail_non_increasing: bool,
    /// |value| at the largest ω is within tolerance.
    pub below_tol: bool,
    /// Every term with exponent ≥ 0 vanishes, i.e. the limit is zero.
    pub limit_terms_vanish: bool,
}

/// Evaluates the scaled residual of `table` (first m+1 coefficients) at a
/// spatial point for each ω in `omegas`.
///
/// A term of exponent ≥ 0 whose linear and forced parts agree under `zero`
/// is taken as exactly zero rather than evaluated.
#[allow(clippy::too_many_arguments)]
pub fn residual_limit_decay(
    spec: &ProblemSpec,
    table: &CoefficientTable,
    m: usize,
    preset: &TransformPreset,
    omegas: &[f64],
    point: &VarBinding<f64>,
    tol: f64,
    zero: ZeroTest<'_>,
) -> Result<DecayReport, OracleError> {
    if table.len() < m + 1 {
        return Err(OracleError::TableTooShort {
            have: table.len(),
            need: m + 1,
        });
    }
    let alpha = spec.alpha();
    let (linear, forced) = scaled_residual(spec, &table.coeffs()[..=m], preset, false)?;
    let total = linear.sub(&forced);
    let mut limit_terms_vanish = true;
    let mut evaluated = Vec::new();
    for t in total.terms() {
        if t.nu_power != 0 {
            return Err(TransformError::ResidualNu(t.nu_power).into());
        }
        let e = t.exponent.value(alpha);
        if e >= 0.0 {
            let part = |s: &TransformSeries| {
                s.terms()
                    .iter()
                    .find(|u| u.nu_power == t.nu_power && u.exponent == t.exponent)
                    .map_or_else(Expr::zero, |u| u.coef.clone())
            };
            if zero.agree(&part(&linear), &part(&forced))? {
                continue;
            }
            limit_terms_vanish = false;
        }
        evaluated.push((t.coef.eval(point)?, e));
    }
    let values: Vec<f64> = omegas
        .iter()
        .map(|w| evaluated.iter().map(|(c, e)| c * w.powf(*e)).sum())
        .collect();
    let ratios = values.windows(2).map(|w| w[1] / w[0]).collect();
    let tail = &values[values.len() / 2..];
    let tail_non_increasing = tail.windows(2).all(|w| w[1].abs() <= w[0].abs());
    let below_tol = values.last().is_some_and(|v| v.abs() <= tol);
    Ok(DecayReport {
        omegas: omegas.to_vec(),
        values,
        ratios,
        tail_non_increasing,
        below_tol,
        limit_terms_vanish,
    })
}
