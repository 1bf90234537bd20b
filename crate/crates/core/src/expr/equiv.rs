//! Numerical equivalence of expressions on a sampling box.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Expr, ExprError, VarBinding};

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Closed interval per variable.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SampleBox {
    intervals: BTreeMap<String, (f64, f64)>,
}

impl SampleBox {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, var: &str, lo: f64, hi: f64) -> Self {
        self.set(var, lo, hi);
        self
    }

    pub fn set(&mut self, var: &str, lo: f64, hi: f64) {
        assert!(lo <= hi, "empty interval for `{var}`");
        self.intervals.insert(var.to_string(), (lo, hi));
    }

    pub fn get(&self, var: &str) -> Option<(f64, f64)> {
        self.intervals.get(var).copied()
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.intervals.keys().map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivConfig {
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for EquivConfig {
    fn default() -> Self {
        Self {
            samples: 64,
            tol: 1e-10,
            seed: 0x5EED,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivReport {
    pub checked: usize,
    pub skipped: usize,
    pub failures: usize,
    /// Largest scaled discrepancy |a - b| / (1 + |a|) seen.
    pub worst: f64,
    pub passed: bool,
}

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += (i % b) as f64 * f;
        i /= b;
        f *= inv;
    }
    r
}

/// Randomly shifted Halton points in the box, one binding per sample.
///
/// Dimensions follow the sorted variable names; the shift is drawn from a
/// ChaCha stream so identical seeds give identical points.
pub fn sample_points(b: &SampleBox, samples: usize, seed: u64) -> Vec<VarBinding<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dims: Vec<(&str, (f64, f64), f64)> = b
        .intervals
        .iter()
        .map(|(k, &iv)| (k.as_str(), iv, rng.gen::<f64>()))
        .collect();
    assert!(dims.len() <= PRIMES.len(), "too many sampling dimensions");
    (1..=samples as u64)
        .map(|i| {
            let mut p = VarBinding::new();
            for (d, (name, (lo, hi), shift)) in dims.iter().enumerate() {
                let u = (radical_inverse(i, PRIMES[d]) + shift).fract();
                p.set(name, lo + (hi - lo) * u);
            }
            p
        })
        .collect()
}

/// Compares `a` and `b` at the sample points.
///
/// A point where either side is undefined is skipped; the check fails when
/// more than a tenth of the points are skipped or any point differs by more
/// than `tol * (1 + |a|)`.
pub fn equiv_report(
    a: &Expr,
    b: &Expr,
    domain: &SampleBox,
    cfg: &EquivConfig,
) -> Result<EquivReport, ExprError> {
    for v in a.symbols().union(&b.symbols()) {
        if domain.get(v).is_none() {
            return Err(ExprError::MissingInterval(v.clone()));
        }
    }
    let mut report = EquivReport {
        checked: 0,
        skipped: 0,
        failures: 0,
        worst: 0.0,
        passed: false,
    };
    let diff = Expr::sub(a, b);
    if diff.is_zero() {
        report.checked = cfg.samples;
        report.passed = true;
        return Ok(report);
    }
    for p in sample_points(domain, cfg.samples, cfg.seed) {
        let (va, vb) = match (a.eval(&p), b.eval(&p)) {
            (Ok(x), Ok(y)) => (x, y),
            (Err(e @ ExprError::Unresolved(_)), _) | (_, Err(e @ ExprError::Unresolved(_))) => {
                return Err(e)
            }
            _ => {
                report.skipped += 1;
                continue;
            }
        };
        report.checked += 1;
        let scaled = (va - vb).abs() / (1.0 + va.abs());
        report.worst = report.worst.max(scaled);
        if scaled > cfg.tol {
            report.failures += 1;
        }
    }
    report.passed =
        report.failures == 0 && report.checked > 0 && report.skipped * 10 <= cfg.samples;
    Ok(report)
}

/// True when `a` and `b` agree on the box; see [`equiv_report`].
pub fn equiv(a: &Expr, b: &Expr, domain: &SampleBox, cfg: &EquivConfig) -> Result<bool, ExprError> {
    equiv_report(a, b, domain, cfg).map(|r| r.passed)
}
