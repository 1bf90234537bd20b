use std::fmt;
use std::io;
use std::path::Path;
use std::time::Duration;

/// Outcome of one check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    /// Pass only if every input passes; skipped if there were none.
    pub fn all(items: impl IntoIterator<Item = bool>) -> Self {
        let mut out = Verdict::Skipped;
        for ok in items {
            match (out, ok) {
                (_, false) => return Verdict::Fail,
                _ => out = Verdict::Pass,
            }
        }
        out
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Skipped => "skipped",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientRow {
    pub k: usize,
    pub coefficient_text: String,
    /// φ_k at the centre of the sampling box.
    pub sample_value: Option<f64>,
    pub oracle_match: Verdict,
    pub residual_zero: Verdict,
}

/// Grid comparison of the partial sum against the exact solution.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactCheck {
    /// Grid coordinates (spatial variables, then t), approximation, exact value.
    pub points: Vec<(Vec<f64>, f64, f64)>,
    pub axes: Vec<String>,
    pub max_error: f64,
    pub tolerance: Option<f64>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub name: String,
    pub alpha: f64,
    pub order: usize,
    pub preset: String,
    pub rows: Vec<CoefficientRow>,
    pub linear_agreement: Verdict,
    pub closed_form: Verdict,
    pub exact: Option<ExactCheck>,
    pub elapsed: Duration,
}

pub const CSV_HEADER: [&str; 5] = [
    "k",
    "coefficient_text",
    "sample_value",
    "oracle_match",
    "residual_zero",
];

fn format_sample(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{v:.15e}"),
        None => String::new(),
    }
}

impl RunReport {
    pub fn verdicts(&self) -> Vec<Verdict> {
        let mut out = vec![self.linear_agreement, self.closed_form];
        out.extend(self.exact.iter().map(|e| e.verdict));
        for r in &self.rows {
            out.push(r.oracle_match);
            out.push(r.residual_zero);
        }
        out
    }

    /// No enabled check failed.
    pub fn passed(&self) -> bool {
        !self.verdicts().contains(&Verdict::Fail)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER).expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                r.k.to_string(),
                r.coefficient_text.clone(),
                format_sample(r.sample_value),
                r.oracle_match.to_string(),
                r.residual_zero.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "{}: alpha = {}, K = {}, preset = {}\n",
            self.name, self.alpha, self.order, self.preset
        );
        for r in &self.rows {
            s.push_str(&format!("  phi_{} = {}\n", r.k, r.coefficient_text));
        }
        let oracle = Verdict::all(
            self.rows
                .iter()
                .filter(|r| r.oracle_match != Verdict::Skipped)
                .map(|r| r.oracle_match == Verdict::Pass),
        );
        let residual = Verdict::all(
            self.rows
                .iter()
                .filter(|r| r.residual_zero != Verdict::Skipped)
                .map(|r| r.residual_zero == Verdict::Pass),
        );
        s.push_str(&format!("oracle agreement: {oracle}\n"));
        s.push_str(&format!("residual probe: {residual}\n"));
        s.push_str(&format!("linear fast path: {}\n", self.linear_agreement));
        s.push_str(&format!("closed-form coefficients: {}\n", self.closed_form));
        match &self.exact {
            Some(e) => {
                s.push_str(&format!(
                    "exact solution: max |u_N - u| = {:.3e} over {} points",
                    e.max_error,
                    e.points.len()
                ));
                match e.tolerance {
                    Some(tol) => s.push_str(&format!(", tolerance {tol:e}: {}\n", e.verdict)),
                    None => s.push('\n'),
                }
            }
            None => s.push_str("exact solution: skipped\n"),
        }
        s.push_str(&format!("elapsed: {:.3} s\n", self.elapsed.as_secs_f64()));
        s
    }
}

pub fn emit_csv(report: &RunReport, path: &Path) -> io::Result<()> {
    std::fs::write(path, report.to_csv())
}
