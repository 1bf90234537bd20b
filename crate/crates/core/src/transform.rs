//! Laplace-like integral transforms T{f}(s) = ν(s) ∫₀^∞ f(t) e^{−ω(s)t} dt
//! acting on fractional series through an exponent ledger.
//!
//! A transform-domain series is a formal sum of terms c(x)·ν^p·ω^e. The
//! exponent e is kept exactly as `a + b·α` with rational a, b so that the
//! ω → ∞ limit can decide "exponent is zero" without float comparison.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::expr::{equiv_report, EquivConfig, Expr, ExprError, SampleBox};
use crate::fracseries::{FracSeries, SeriesError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransformError {
    #[error("unknown transform preset `{0}`")]
    UnknownPreset(String),
    #[error("term {coef} · ν^{nu_power} · ω^({exponent}) is not the image of a monomial")]
    NotMonomialImage {
        coef: String,
        nu_power: i32,
        exponent: String,
    },
    #[error("initial value {index} does not match the series: expected {expected}, got {got}")]
    InitialMismatch {
        index: usize,
        expected: String,
        got: String,
    },
    #[error("expected {expected} initial values, got {got}")]
    InitialCount { expected: usize, got: usize },
    #[error("limit diverges: coefficient {coef} of ω^({exponent}) does not vanish")]
    Divergence { coef: String, exponent: String },
    #[error("limit still depends on ν (power {0})")]
    ResidualNu(i32),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// ω-exponent `constant + alpha_mult·α`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Exponent {
    pub constant: BigRational,
    pub alpha_mult: BigRational,
}

impl Exponent {
    pub fn new(constant: BigRational, alpha_mult: BigRational) -> Self {
        Self {
            constant,
            alpha_mult,
        }
    }

    pub fn int(constant: i64, alpha_mult: i64) -> Self {
        Self::new(rat(constant), rat(alpha_mult))
    }

    pub fn zero() -> Self {
        Self::int(0, 0)
    }

    /// −1 − kα, the exponent of the image of t^{kα}.
    pub fn monomial_image(k: usize) -> Self {
        Self::int(-1, -(k as i64))
    }

    pub fn is_zero(&self) -> bool {
        self.constant.is_zero() && self.alpha_mult.is_zero()
    }

    pub fn value(&self, alpha: f64) -> f64 {
        self.constant.to_f64().unwrap_or(f64::NAN)
            + self.alpha_mult.to_f64().unwrap_or(f64::NAN) * alpha
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(
            &self.constant + &other.constant,
            &self.alpha_mult + &other.alpha_mult,
        )
    }

    pub fn neg(&self) -> Self {
        Self::new(-&self.constant, -&self.alpha_mult)
    }

    /// k when the exponent is exactly −1 − kα for an integer k ≥ 0.
    pub fn monomial_index(&self) -> Option<usize> {
        if self.constant != rat(-1)
            || !self.alpha_mult.is_integer()
            || self.alpha_mult.is_positive()
        {
            return None;
        }
        (-self.alpha_mult.to_integer()).to_usize()
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.constant.is_zero(), self.alpha_mult.is_zero()) {
            (true, true) => write!(f, "0"),
            (false, true) => write!(f, "{}", self.constant),
            (true, false) => write!(f, "{}α", self.alpha_mult),
            (false, false) => {
                let sign = if self.alpha_mult.is_negative() {
                    '-'
                } else {
                    '+'
                };
                write!(f, "{}{sign}{}α", self.constant, self.alpha_mult.abs())
            }
        }
    }
}

/// A kernel function s^p.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Kernel {
    pub power: BigRational,
}

impl Kernel {
    fn pow(n: i64, d: i64) -> Self {
        Self {
            power: BigRational::new(n.into(), d.into()),
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        s.powf(self.power.to_f64().unwrap_or(f64::NAN))
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.power;
        if p.is_zero() {
            return write!(f, "1");
        }
        let mag = p.abs();
        let body = if mag.is_one() {
            "s".to_string()
        } else if mag.is_integer() {
            format!("s^{mag}")
        } else {
            format!("s^({mag})")
        };
        if p.is_negative() {
            write!(f, "1/{body}")
        } else {
            write!(f, "{body}")
        }
    }
}

/// One row of the transform family: ω(s) and ν(s) as powers of s.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransformPreset {
    pub name: &'static str,
    pub omega: Kernel,
    pub nu: Kernel,
}

impl TransformPreset {
    /// +1 if ω → ∞ as s → ∞, −1 if ω → ∞ as s → 0⁺.
    pub fn limit_direction(&self) -> i32 {
        if self.omega.power.is_positive() {
            1
        } else {
            -1
        }
    }
}

/// Transform parameter used by the α-Laplace row (ω = s^{1/a}).
pub const ALPHA_LAPLACE_PARAM: i64 = 2;
/// Transform parameter used by the G-transform row (ν = s^a).
pub const G_TRANSFORM_PARAM: i64 = 2;

/// The ten presets in a fixed order.
pub fn presets() -> Vec<TransformPreset> {
    let p = |name, omega: Kernel, nu: Kernel| TransformPreset { name, omega, nu };
    vec![
        p("aboodh", Kernel::pow(1, 1), Kernel::pow(-1, 1)),
        p("elzaki", Kernel::pow(-1, 1), Kernel::pow(1, 1)),
        p("kamal", Kernel::pow(-1, 1), Kernel::pow(0, 1)),
        p("laplace", Kernel::pow(1, 1), Kernel::pow(0, 1)),
        p(
            "alpha-laplace",
            Kernel::pow(1, ALPHA_LAPLACE_PARAM),
            Kernel::pow(0, 1),
        ),
        p(
            "g-transform",
            Kernel::pow(-1, 1),
            Kernel::pow(G_TRANSFORM_PARAM, 1),
        ),
        p("mohand", Kernel::pow(1, 1), Kernel::pow(2, 1)),
        p("pourreza", Kernel::pow(2, 1), Kernel::pow(1, 1)),
        p("sawi", Kernel::pow(-1, 1), Kernel::pow(-2, 1)),
        p("sumudu", Kernel::pow(-1, 1), Kernel::pow(-1, 1)),
    ]
}

pub fn preset(name: &str) -> Result<TransformPreset, TransformError> {
    let key = name.to_ascii_lowercase().replace('_', "-");
    presets()
        .into_iter()
        .find(|p| p.name == key)
        .ok_or_else(|| TransformError::UnknownPreset(name.to_string()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coef: Expr,
    pub nu_power: i32,
    pub exponent: Exponent,
}

/// Formal sum Σ c·ν^p·ω^e.
///
/// Terms are kept combined (one per (p, e)) and sorted by descending
/// numeric exponent. The attached preset is a label only: no operation
/// reads it.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformSeries {
    alpha: f64,
    preset: TransformPreset,
    terms: Vec<Term>,
    truncation: Option<usize>,
}

impl TransformSeries {
    pub fn new(alpha: f64, preset: TransformPreset, terms: impl IntoIterator<Item = Term>) -> Self {
        let mut s = Self {
            alpha,
            preset,
            terms: Vec::new(),
            truncation: None,
        };
        s.terms = combine(alpha, terms);
        s
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn preset(&self) -> &TransformPreset {
        &self.preset
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn with_preset(mut self, preset: TransformPreset) -> Self {
        self.preset = preset;
        self
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = Self::new(
            self.alpha,
            self.preset.clone(),
            self.terms.iter().chain(&other.terms).cloned(),
        );
        out.truncation = None;
        out
    }

    pub fn neg(&self) -> Self {
        self.map_terms(|t| Term {
            coef: Expr::neg(&t.coef),
            ..t.clone()
        })
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Multiplies every term by ν^q ω^e.
    pub fn shift(&self, q: i32, e: &Exponent) -> Self {
        self.map_terms(|t| Term {
            coef: t.coef.clone(),
            nu_power: t.nu_power + q,
            exponent: t.exponent.add(e),
        })
    }

    pub fn scale(&self, g: &Expr) -> Self {
        self.map_terms(|t| Term {
            coef: &t.coef * g,
            ..t.clone()
        })
    }

    fn map_terms(&self, f: impl Fn(&Term) -> Term) -> Self {
        Self::new(self.alpha, self.preset.clone(), self.terms.iter().map(f))
    }
}

fn combine(alpha: f64, terms: impl IntoIterator<Item = Term>) -> Vec<Term> {
    let mut acc: BTreeMap<(i32, Exponent), Vec<Expr>> = BTreeMap::new();
    for t in terms {
        acc.entry((t.nu_power, t.exponent))
            .or_default()
            .push(t.coef);
    }
    let mut out: Vec<Term> = acc
        .into_iter()
        .filter_map(|((nu_power, exponent), cs)| {
            let coef = Expr::add(cs);
            (!coef.is_zero()).then_some(Term {
                coef,
                nu_power,
                exponent,
            })
        })
        .collect();
    out.sort_by(|a, b| {
        b.exponent
            .value(alpha)
            .total_cmp(&a.exponent.value(alpha))
            .then_with(|| b.exponent.cmp(&a.exponent))
            .then_with(|| a.nu_power.cmp(&b.nu_power))
    });
    out
}

/// Image of a series: φ_k ↦ φ_k·ν·ω^{−1−kα}. The Γ factors of the monomial
/// image cancel against the 1/Γ(1+kα) of the coefficient basis.
pub fn to_transform_domain(a: &FracSeries, preset: &TransformPreset) -> TransformSeries {
    let terms = a.coeffs().iter().enumerate().map(|(k, c)| Term {
        coef: c.clone(),
        nu_power: 1,
        exponent: Exponent::monomial_image(k),
    });
    let mut out = TransformSeries::new(a.alpha(), preset.clone(), terms);
    out.truncation = Some(a.order());
    out
}

/// Inverse of [`to_transform_domain`], term by term.
pub fn from_transform_domain(t: &TransformSeries) -> Result<FracSeries, TransformError> {
    let mut by_index: BTreeMap<usize, Expr> = BTreeMap::new();
    for term in &t.terms {
        match term.exponent.monomial_index() {
            Some(k) if term.nu_power == 1 => {
                by_index.insert(k, term.coef.clone());
            }
            _ => {
                return Err(TransformError::NotMonomialImage {
                    coef: term.coef.to_string(),
                    nu_power: term.nu_power,
                    exponent: term.exponent.to_string(),
                })
            }
        }
    }
    let top = by_index.keys().next_back().copied().unwrap_or(0);
    let order = t.truncation.map_or(top, |k| k.max(top));
    let coeffs = (0..=order)
        .map(|k| by_index.remove(&k).unwrap_or_else(Expr::zero))
        .collect();
    Ok(FracSeries::new(t.alpha, coeffs)?)
}

/// T{D^{nα} a} = ω^{nα} T{a} − ν Σ_{k<n} ω^{(n−k)α−1} f_k.
pub fn transform_of_caputo(
    a: &FracSeries,
    n: usize,
    initials: &[Expr],
    preset: &TransformPreset,
) -> Result<TransformSeries, TransformError> {
    if initials.len() != n {
        return Err(TransformError::InitialCount {
            expected: n,
            got: initials.len(),
        });
    }
    for (k, f) in initials.iter().enumerate() {
        let have = if k <= a.order() {
            a.coeff(k).clone()
        } else {
            Expr::zero()
        };
        if have != f.normalize() {
            return Err(TransformError::InitialMismatch {
                index: k,
                expected: have.to_string(),
                got: f.to_string(),
            });
        }
    }
    let lifted = to_transform_domain(a, preset).shift(0, &Exponent::int(0, n as i64));
    let block = initials.iter().enumerate().map(|(k, f)| Term {
        coef: f.clone(),
        nu_power: 1,
        exponent: Exponent::int(-1, (n - k) as i64),
    });
    Ok(lifted.sub(&TransformSeries::new(a.alpha(), preset.clone(), block)))
}

/// How a positive-exponent coefficient is shown to vanish.
#[derive(Debug, Clone, Copy)]
pub enum ZeroTest<'a> {
    /// Only a coefficient that normalises to 0 counts as zero.
    Structural,
    /// Sampled comparison against 0 on a box.
    Sampled {
        domain: &'a SampleBox,
        cfg: &'a EquivConfig,
    },
}

impl ZeroTest<'_> {
    pub fn vanishes(&self, e: &Expr) -> Result<bool, ExprError> {
        if e.is_zero() {
            return Ok(true);
        }
        match self {
            ZeroTest::Structural => Ok(false),
            ZeroTest::Sampled { domain, cfg } => {
                Ok(equiv_report(e, &Expr::zero(), domain, cfg)?.passed)
            }
        }
    }

    /// Whether a and b agree, measured against the size of a rather than 0.
    pub fn agree(&self, a: &Expr, b: &Expr) -> Result<bool, ExprError> {
        if (a - b).normalize().is_zero() {
            return Ok(true);
        }
        match self {
            ZeroTest::Structural => Ok(false),
            ZeroTest::Sampled { domain, cfg } => Ok(equiv_report(a, b, domain, cfg)?.passed),
        }
    }
}

/// lim_{ω→∞} ν^q ω^p · T.
///
/// Every term must be ν-free after the multiplication. Terms with positive
/// exponent must vanish (per `zero`), otherwise the limit diverges; the
/// result is the sum of the exponent-zero coefficients.
pub fn limit_at_infinity(
    t: &TransformSeries,
    q: i32,
    p: &Exponent,
    zero: ZeroTest<'_>,
) -> Result<Expr, TransformError> {
    let scaled = t.shift(q, p);
    let mut out = Vec::new();
    for term in scaled.terms() {
        if term.nu_power != 0 {
            return Err(TransformError::ResidualNu(term.nu_power));
        }
        if term.exponent.is_zero() {
            out.push(term.coef.clone());
        } else if term.exponent.value(t.alpha) > 0.0 && !zero.vanishes(&term.coef)? {
            return Err(TransformError::Divergence {
                coef: term.coef.to_string(),
                exponent: term.exponent.to_string(),
            });
        }
    }
    Ok(Expr::add(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn laplace() -> TransformPreset {
        preset("laplace").unwrap()
    }

    fn series(alpha: f64, src: &[&str]) -> FracSeries {
        FracSeries::new(alpha, src.iter().map(|s| parse(s).unwrap()).collect()).unwrap()
    }

    #[test]
    fn registry_is_complete_and_ordered() {
        let names: Vec<_> = presets().iter().map(|p| p.name).collect();
        assert_eq!(names.len(), 10);
        assert_eq!(names[0], "aboodh");
        assert_eq!(names[9], "sumudu");
        assert!(preset("Sumudu").is_ok());
        assert!(matches!(
            preset("mellin"),
            Err(TransformError::UnknownPreset(_))
        ));
        for p in presets() {
            assert!(!p.omega.power.is_zero(), "{} has constant omega", p.name);
            let (w1, w2) = (p.omega.eval(1.5), p.omega.eval(3.0));
            assert!(w1 > 0.0 && w2 > 0.0 && w1 != w2);
            assert!(p.nu.eval(2.0) != 0.0);
        }
    }

    #[test]
    fn kernel_display() {
        let text: Vec<String> = presets()
            .iter()
            .map(|p| format!("{} {}", p.omega, p.nu))
            .collect();
        assert_eq!(text[0], "s 1/s");
        assert_eq!(text[4], "s^(1/2) 1");
        assert_eq!(text[8], "1/s 1/s^2");
    }

    #[test]
    fn image_of_constant_and_monomial() {
        let c = to_transform_domain(&series(0.5, &["c"]), &laplace());
        assert_eq!(
            c.terms(),
            &[Term {
                coef: Expr::var("c"),
                nu_power: 1,
                exponent: Exponent::int(-1, 0)
            }]
        );
        let m = to_transform_domain(&series(0.5, &["0", "1"]), &laplace());
        assert_eq!(m.terms().len(), 1);
        assert_eq!(m.terms()[0].exponent, Exponent::int(-1, -1));
        assert_eq!(m.terms()[0].exponent.value(0.5), -1.5);
    }

    #[test]
    fn round_trip_keeps_trailing_zeros() {
        let s = series(0.3, &["x", "0", "sin(x)", "0"]);
        let back = from_transform_domain(&to_transform_domain(&s, &laplace())).unwrap();
        assert_eq!(back, s);
        let bad = TransformSeries::new(
            0.3,
            laplace(),
            [Term {
                coef: Expr::one(),
                nu_power: 1,
                exponent: Exponent::int(0, 1),
            }],
        );
        assert!(matches!(
            from_transform_domain(&bad),
            Err(TransformError::NotMonomialImage { .. })
        ));
    }

    #[test]
    fn caputo_of_constant_vanishes() {
        let a = series(0.5, &["f0"]);
        let t = transform_of_caputo(&a, 1, &[Expr::var("f0")], &laplace()).unwrap();
        assert!(t.terms().is_empty());
        let b = series(0.5, &["0", "p1"]);
        let t = transform_of_caputo(&b, 1, &[Expr::zero()], &laplace()).unwrap();
        assert_eq!(
            t.terms(),
            to_transform_domain(&b.caputo_shift(1).unwrap(), &laplace()).terms()
        );
        assert!(matches!(
            transform_of_caputo(&b, 1, &[Expr::one()], &laplace()),
            Err(TransformError::InitialMismatch { index: 0, .. })
        ));
    }

    #[test]
    fn limits() {
        let s = series(0.5, &["f0", "p1", "p2"]);
        let t = to_transform_domain(&s, &laplace());
        let l = limit_at_infinity(&t, -1, &Exponent::int(1, 0), ZeroTest::Structural).unwrap();
        assert_eq!(l, Expr::var("f0"));
        let single = to_transform_domain(&series(0.5, &["0", "1"]), &laplace());
        assert!(
            limit_at_infinity(&single, -1, &Exponent::int(1, 0), ZeroTest::Structural)
                .unwrap()
                .is_zero()
        );
        let c = to_transform_domain(&series(0.5, &["1"]), &laplace());
        assert!(matches!(
            limit_at_infinity(&c, -1, &Exponent::int(1, 1), ZeroTest::Structural),
            Err(TransformError::Divergence { .. })
        ));
        assert!(matches!(
            limit_at_infinity(&c, 0, &Exponent::int(1, 0), ZeroTest::Structural),
            Err(TransformError::ResidualNu(1))
        ));
    }

    #[test]
    fn sampled_zero_test_accepts_identities() {
        let t = TransformSeries::new(
            1.0,
            laplace(),
            [
                Term {
                    coef: parse("sin(x)^2 + cos(x)^2 - 1").unwrap(),
                    nu_power: 0,
                    exponent: Exponent::int(1, 0),
                },
                Term {
                    coef: Expr::var("x"),
                    nu_power: 0,
                    exponent: Exponent::zero(),
                },
            ],
        );
        let domain = SampleBox::new().with("x", 0.0, 1.0);
        let cfg = EquivConfig::default();
        assert!(limit_at_infinity(&t, 0, &Exponent::zero(), ZeroTest::Structural).is_err());
        let l = limit_at_infinity(
            &t,
            0,
            &Exponent::zero(),
            ZeroTest::Sampled {
                domain: &domain,
                cfg: &cfg,
            },
        )
        .unwrap();
        assert_eq!(l, Expr::var("x"));
    }
}
