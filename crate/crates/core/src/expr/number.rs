use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Numeric constant inside an expression: an exact rational or a binary float.
///
/// Literals and structural coefficients stay exact; floats only appear when a
/// transcendental function is folded or a Γ-weight is attached.
#[derive(Debug, Clone)]
pub enum Number {
    Rational(BigRational),
    Float(f64),
}

impl Number {
    pub fn zero() -> Self {
        Number::Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Number::Rational(BigRational::one())
    }

    pub fn int(v: i64) -> Self {
        Number::Rational(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Number::Rational(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    /// Wraps a float; `-0.0` is canonicalised to `0.0`.
    pub fn float(v: f64) -> Self {
        assert!(v.is_finite(), "non-finite float constant");
        Number::Float(if v == 0.0 { 0.0 } else { v })
    }

    /// Parses a plain decimal literal (`12`, `0.06`, `.5`) exactly.
    pub fn parse_decimal(text: &str) -> Option<Self> {
        let (int_part, frac_part) = match text.split_once('.') {
            Some((a, b)) => (a, b),
            None => (text, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return None;
        }
        if !int_part.chars().all(|c| c.is_ascii_digit())
            || !frac_part.chars().all(|c| c.is_ascii_digit())
        {
            return None;
        }
        let digits = format!("{int_part}{frac_part}");
        let numer: BigInt = digits.parse().ok()?;
        let denom = num_traits::pow(BigInt::from(10), frac_part.len());
        Some(Number::Rational(BigRational::new(numer, denom)))
    }

    /// Exact rational for a float that is printed in shortest decimal form.
    ///
    /// `0.06_f64` becomes `3/50` rather than the nearest dyadic value.
    pub fn from_f64_decimal(v: f64) -> Option<Self> {
        if !v.is_finite() {
            return None;
        }
        let text = format!("{}", v.abs());
        let n = if text.contains('e') {
            // Display never emits exponents for finite f64, kept for safety
            Number::float(v.abs())
        } else {
            Number::parse_decimal(&text)?
        };
        Some(if v < 0.0 { n.neg() } else { n })
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Number::Rational(r) => r.is_zero(),
            Number::Float(f) => *f == 0.0,
        }
    }

    /// True only for the exact rational one.
    pub fn is_one(&self) -> bool {
        matches!(self, Number::Rational(r) if r.is_one())
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Number::Rational(r) => r.is_negative(),
            Number::Float(f) => *f < 0.0,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Number::Rational(_))
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Number::Rational(r) => Some(r),
            Number::Float(_) => None,
        }
    }

    /// Integer value if the number is an exact integer fitting in `i64`.
    pub fn as_i64(&self) -> Option<i64> {
        match self {
            Number::Rational(r) if r.is_integer() => r.to_integer().to_i64(),
            _ => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Number::Rational(r) => rational_to_f64(r),
            Number::Float(f) => *f,
        }
    }

    pub fn neg(&self) -> Self {
        match self {
            Number::Rational(r) => Number::Rational(-r),
            Number::Float(f) => Number::float(-f),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        match (self, other) {
            (Number::Rational(a), Number::Rational(b)) => Number::Rational(a + b),
            _ => Number::float(self.to_f64() + other.to_f64()),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        match (self, other) {
            (Number::Rational(a), Number::Rational(b)) => Number::Rational(a * b),
            _ => Number::float(self.to_f64() * other.to_f64()),
        }
    }

    /// Exact power when possible; `None` when the result would be undefined
    /// (0 to a negative power, negative base to a fractional power) or
    /// non-finite.
    pub fn pow(&self, exp: &BigRational) -> Option<Self> {
        if exp.is_zero() {
            return Some(Number::one());
        }
        if self.is_zero() {
            return if exp.is_positive() {
                Some(Number::zero())
            } else {
                None
            };
        }
        match self {
            Number::Rational(base) => {
                if exp.is_integer() {
                    let e = exp.to_integer().to_i32()?;
                    if e.unsigned_abs() > 4096 {
                        return float_pow(base.to_f64()?, exp);
                    }
                    return Some(Number::Rational(num_traits::pow::Pow::pow(base, e)));
                }
                if base.is_negative() {
                    return None;
                }
                exact_root(base, exp)
                    .map(Number::Rational)
                    .or_else(|| float_pow(rational_to_f64(base), exp))
            }
            Number::Float(f) => {
                if exp.is_integer() {
                    let v = f.powi(exp.to_integer().to_i32()?);
                    return v.is_finite().then(|| Number::float(v));
                }
                if *f < 0.0 {
                    return None;
                }
                float_pow(*f, exp)
            }
        }
    }

    fn kind_rank(&self) -> u8 {
        match self {
            Number::Rational(_) => 0,
            Number::Float(_) => 1,
        }
    }
}

fn float_pow(base: f64, exp: &BigRational) -> Option<Number> {
    let v = base.powf(rational_to_f64(exp));
    v.is_finite().then(|| Number::float(v))
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // numerator/denominator beyond f64 range: scale through logs
        let n = r.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

/// base^(p/q) exactly, when numerator and denominator are perfect q-th powers.
fn exact_root(base: &BigRational, exp: &BigRational) -> Option<BigRational> {
    let q = exp.denom().to_u32()?;
    let p = exp.numer().to_i32()?;
    if q > 64 {
        return None;
    }
    let root = |n: &BigInt| -> Option<BigInt> {
        let r = n.nth_root(q);
        (num_traits::pow::Pow::pow(&r, q) == *n).then_some(r)
    };
    let rn = root(base.numer())?;
    let rd = root(base.denom())?;
    let r = BigRational::new(rn, rd);
    Some(num_traits::pow::Pow::pow(&r, p))
}

impl PartialEq for Number {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Number {}

impl PartialOrd for Number {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Structural order: all rationals before all floats, then by value.
impl Ord for Number {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Number::Rational(a), Number::Rational(b)) => a.cmp(b),
            (Number::Float(a), Number::Float(b)) => a.total_cmp(b),
            _ => self.kind_rank().cmp(&other.kind_rank()),
        }
    }
}

impl Hash for Number {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Number::Rational(r) => {
                0u8.hash(state);
                r.hash(state);
            }
            Number::Float(f) => {
                1u8.hash(state);
                f.to_bits().hash(state);
            }
        }
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Rational(r) => {
                if r.is_integer() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            // exponent form marks the literal as a float for the parser
            Number::Float(v) => write!(f, "{v:e}"),
        }
    }
}
