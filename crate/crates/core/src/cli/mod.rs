//! Problem files in, coefficient reports out.

pub mod problem;
pub mod report;

use std::path::Path;
use std::time::Instant;

use thiserror::Error;

use crate::expr::{equiv, EquivConfig, Expr, ExprError, VarBinding};
use crate::grps::{partial_sum_eval, residual_probe, solve, solve_linear, SolveError};
use crate::oracle::{direct_coefficients, OracleError};
use crate::transform::{preset, presets, TransformError, ZeroTest};

pub use problem::{Formula, Problem, ProblemError, ProblemFile};
pub use report::{emit_csv, CoefficientRow, ExactCheck, RunReport, Verdict};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VERDICT: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

pub const DEFAULT_ORDER: usize = 10;

static SCHEMA: &str = include_str!("../../../../docs/problem.schema.json");

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Preset(TransformError),
    #[error("solver: {0}")]
    Solve(#[from] SolveError),
    #[error("oracle: {0}")]
    Oracle(#[from] OracleError),
    #[error("evaluation: {0}")]
    Expr(#[from] ExprError),
    #[error("solver: {0}")]
    Series(#[from] crate::fracseries::SeriesError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Problem(_) | CliError::Preset(_) => EXIT_INPUT,
            _ => EXIT_SOLVER,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub order: Option<usize>,
    pub alpha: Option<f64>,
    pub verify: bool,
    pub linear: bool,
    pub preset: String,
    pub equiv: EquivConfig,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            order: None,
            alpha: None,
            verify: false,
            linear: false,
            preset: "laplace".into(),
            equiv: EquivConfig::default(),
        }
    }
}

pub fn run_solve(path: &Path, opts: &SolveOptions) -> Result<RunReport, CliError> {
    let problem = ProblemFile::load(path)?.compile(opts.alpha)?;
    run_problem(&problem, opts)
}

pub fn run_problem(problem: &Problem, opts: &SolveOptions) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let spec = &problem.spec;
    let n = spec.order_n();
    let order = opts
        .order
        .or(problem.order)
        .unwrap_or(DEFAULT_ORDER)
        .max(n - 1);
    let pr = preset(&opts.preset).map_err(CliError::Preset)?;
    let cfg = &opts.equiv;
    let same = |a: &Expr, b: &Expr| equiv(a, b, &problem.domain, cfg);

    let table = if opts.linear {
        solve_linear(spec, order)?
    } else {
        solve(spec, order)?
    };

    let linear_agreement = if opts.linear {
        let reference = solve(spec, order)?;
        let mut ok = Vec::new();
        for k in 0..=order {
            ok.push(same(table.coeff(k), reference.coeff(k))?);
        }
        Verdict::all(ok)
    } else {
        Verdict::Skipped
    };

    let mut oracle = vec![Verdict::Skipped; order + 1];
    let mut residual = vec![Verdict::Skipped; order + 1];
    if opts.verify {
        let zero = ZeroTest::Sampled {
            domain: &problem.domain,
            cfg,
        };
        let direct = direct_coefficients(spec, order, &pr, zero)?;
        for (k, v) in oracle.iter_mut().enumerate() {
            *v = Verdict::from_bool(same(direct.coeff(k), table.coeff(k))?);
        }
        if order >= n {
            let r = residual_probe(spec, &table, order - n)?;
            for (j, c) in r.iter().enumerate() {
                residual[j + n] = Verdict::from_bool(same(c, &Expr::zero())?);
            }
        }
    }

    let mut closed = Vec::new();
    for k in 0..=order {
        if let Some(f) = problem.formula_at(k) {
            closed.push(same(table.coeff(k), &f)?);
        }
    }
    let closed_form = Verdict::all(closed);

    let centre = VarBinding::from_pairs(problem.domain.vars().map(|v| {
        let (lo, hi) = problem.domain.get(v).expect("listed variable");
        (v, 0.5 * (lo + hi))
    }));
    let rows = (0..=order)
        .map(|k| CoefficientRow {
            k,
            coefficient_text: table.coeff(k).to_string(),
            sample_value: table.coeff(k).eval(&centre).ok(),
            oracle_match: oracle[k],
            residual_zero: residual[k],
        })
        .collect();

    let exact = match (&problem.exact_solution, problem.time) {
        (Some(u), Some(time)) => Some(exact_check(problem, u, time, &table, order)?),
        _ => None,
    };

    Ok(RunReport {
        name: problem.name.clone(),
        alpha: spec.alpha(),
        order,
        preset: pr.name.to_string(),
        rows,
        linear_agreement,
        closed_form,
        exact,
        elapsed: start.elapsed(),
    })
}

fn axis(lo: f64, hi: f64, g: usize) -> Vec<f64> {
    if g == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..g)
        .map(|i| lo + (hi - lo) * i as f64 / (g - 1) as f64)
        .collect()
}

fn exact_check(
    problem: &Problem,
    u: &Expr,
    (t_lo, t_hi): (f64, f64),
    table: &crate::grps::CoefficientTable,
    order: usize,
) -> Result<ExactCheck, CliError> {
    let mut axes: Vec<(String, Vec<f64>)> = problem
        .domain
        .vars()
        .map(|v| {
            let (lo, hi) = problem.domain.get(v).expect("listed variable");
            (v.to_string(), axis(lo, hi, problem.grid))
        })
        .collect();
    axes.push(("t".into(), axis(t_lo, t_hi, problem.grid)));

    let total: usize = axes.iter().map(|(_, a)| a.len()).product();
    let mut points = Vec::with_capacity(total);
    let mut max_error: f64 = 0.0;
    for idx in 0..total {
        let mut rem = idx;
        let mut coords = Vec::with_capacity(axes.len());
        for (_, a) in axes.iter().rev() {
            coords.push(a[rem % a.len()]);
            rem /= a.len();
        }
        coords.reverse();
        let (t, space) = coords.split_last().expect("time axis present");
        let mut b =
            VarBinding::from_pairs(axes.iter().zip(space).map(|((v, _), x)| (v.as_str(), *x)));
        let approx = partial_sum_eval(table, &b, *t, order)?;
        b.set("t", *t);
        let exact = u.eval(&b)?;
        max_error = max_error.max((approx - exact).abs());
        points.push((coords, approx, exact));
    }
    let verdict = match problem.exact_tolerance {
        Some(tol) => Verdict::from_bool(max_error <= tol),
        None => Verdict::Skipped,
    };
    Ok(ExactCheck {
        points,
        axes: axes.into_iter().map(|(v, _)| v).collect(),
        max_error,
        tolerance: problem.exact_tolerance,
        verdict,
    })
}

/// One line per preset: name, ω(s), ν(s).
pub fn list_presets() -> String {
    let mut out = String::new();
    for p in presets() {
        out.push_str(&format!(
            "{:<14} omega = {:<8} nu = {}\n",
            p.name,
            p.omega.to_string(),
            p.nu
        ));
    }
    out
}

/// JSON schema of problem files.
pub fn schema() -> &'static str {
    SCHEMA
}
