//! Truncated fractional power series in `t` with symbolic coefficients.
//!
//! A series stores φ_0..φ_K and represents Σ φ_k t^{kα}/Γ(1+kα). In this
//! basis the sequential Caputo derivative D^{jα} is an index shift and the
//! Cauchy product picks up the weights
//! R(k,m,α) = Γ(1+kα) / (Γ(1+mα) Γ(1+(k−m)α)).

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use crate::expr::{Expr, ExprError, Number, VarBinding};
use crate::scalar::Scalar;
use crate::specfun::{self, SpecfunError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeriesError {
    #[error("alpha must lie in (0, 1], got {0}")]
    BadAlpha(f64),
    #[error("series needs at least one coefficient")]
    Empty,
    #[error("alpha mismatch: {left} vs {right}")]
    AlphaMismatch { left: f64, right: f64 },
    #[error("cannot shift by {shift}: series is truncated at order {order}")]
    ShiftTooLarge { shift: usize, order: usize },
    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
}

/// Result of applying D^{mα} to t^{kα}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CaputoMonomial<T> {
    Zero,
    /// Γ(kα+1), when k = m.
    Constant(T),
    /// `factor · t^power`, when k > m.
    Monomial {
        factor: T,
        power: T,
    },
}

/// D^{mα} t^{kα} for the sequential Caputo derivative.
pub fn caputo_monomial<T: Scalar>(
    m: u32,
    k: u32,
    alpha: T,
) -> Result<CaputoMonomial<T>, SpecfunError> {
    use std::cmp::Ordering::*;
    let ka = T::lit(k as f64) * alpha;
    Ok(match k.cmp(&m) {
        Less => CaputoMonomial::Zero,
        Equal => CaputoMonomial::Constant(specfun::gamma(ka + T::one())?),
        Greater => {
            let power = T::lit((k - m) as f64) * alpha;
            let lg = specfun::log_gamma(ka + T::one())? - specfun::log_gamma(power + T::one())?;
            CaputoMonomial::Monomial {
                factor: lg.exp(),
                power,
            }
        }
    })
}

fn binomial(k: u64, m: u64) -> BigInt {
    let m = m.min(k - m);
    let mut acc = BigInt::from(1);
    for i in 0..m {
        acc = acc * BigInt::from(k - i) / BigInt::from(i + 1);
    }
    acc
}

/// R(k,m,α) as an expression constant: exact at the ends and for α = 1,
/// a float otherwise.
pub fn cauchy_weight(k: usize, m: usize, alpha: f64) -> Number {
    assert!(m <= k);
    if m == 0 || m == k {
        Number::one()
    } else if alpha == 1.0 {
        Number::Rational(BigRational::from_integer(binomial(k as u64, m as u64)))
    } else {
        Number::float(specfun::gamma_ratio(k as u32, m as u32, alpha))
    }
}

fn check_alpha(alpha: f64) -> Result<(), SeriesError> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(SeriesError::BadAlpha(alpha))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FracSeries {
    alpha: f64,
    coeffs: Vec<Expr>,
}

impl FracSeries {
    pub fn new(alpha: f64, coeffs: Vec<Expr>) -> Result<Self, SeriesError> {
        check_alpha(alpha)?;
        if coeffs.is_empty() {
            return Err(SeriesError::Empty);
        }
        Ok(Self { alpha, coeffs })
    }

    /// All-zero series truncated at `order`.
    pub fn zero(alpha: f64, order: usize) -> Result<Self, SeriesError> {
        Self::new(alpha, vec![Expr::zero(); order + 1])
    }

    /// `value` as a series constant in `t`, truncated at `order`.
    pub fn constant(alpha: f64, value: Expr, order: usize) -> Result<Self, SeriesError> {
        let mut s = Self::zero(alpha, order)?;
        s.coeffs[0] = value;
        Ok(s)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Truncation order K.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Expr] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> &Expr {
        &self.coeffs[k]
    }

    pub fn into_coeffs(self) -> Vec<Expr> {
        self.coeffs
    }

    /// Drops every coefficient above `order`.
    pub fn truncate(&self, order: usize) -> Self {
        let keep = (order + 1).min(self.coeffs.len());
        Self {
            alpha: self.alpha,
            coeffs: self.coeffs[..keep].to_vec(),
        }
    }

    fn same_alpha(&self, other: &Self) -> Result<(), SeriesError> {
        if self.alpha == other.alpha {
            Ok(())
        } else {
            Err(SeriesError::AlphaMismatch {
                left: self.alpha,
                right: other.alpha,
            })
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.same_alpha(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self {
            alpha: self.alpha,
            coeffs,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.same_alpha(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self {
            alpha: self.alpha,
            coeffs,
        })
    }

    /// Multiplies every coefficient by `g`, a function of the spatial variables.
    pub fn scale(&self, g: &Expr) -> Self {
        Self {
            alpha: self.alpha,
            coeffs: self.coeffs.iter().map(|c| c * g).collect(),
        }
    }

    /// Γ-weighted Cauchy product, truncated at the smaller order.
    pub fn mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.same_alpha(other)?;
        let order = self.order().min(other.order());
        let coeffs = (0..=order)
            .map(|k| {
                let terms = (0..=k).filter_map(|m| {
                    let (a, b) = (&self.coeffs[m], &other.coeffs[k - m]);
                    if a.is_zero() || b.is_zero() {
                        return None;
                    }
                    Some(Expr::mul([
                        Expr::constant(cauchy_weight(k, m, self.alpha)),
                        a.clone(),
                        b.clone(),
                    ]))
                });
                Expr::add(terms)
            })
            .collect();
        Ok(Self {
            alpha: self.alpha,
            coeffs,
        })
    }

    /// Coefficientwise ∂^order/∂var^order.
    pub fn spatial_diff(&self, var: &str, order: u32) -> Self {
        Self {
            alpha: self.alpha,
            coeffs: self.coeffs.iter().map(|c| c.diff_n(var, order)).collect(),
        }
    }

    /// D_t^{jα} applied termwise: the coefficients φ_j..φ_K.
    pub fn caputo_shift(&self, j: usize) -> Result<Self, SeriesError> {
        if j > self.order() {
            return Err(SeriesError::ShiftTooLarge {
                shift: j,
                order: self.order(),
            });
        }
        Ok(Self {
            alpha: self.alpha,
            coeffs: self.coeffs[j..].to_vec(),
        })
    }

    /// The series at t = 0, i.e. φ_0.
    pub fn value_at_zero(&self) -> &Expr {
        &self.coeffs[0]
    }

    /// Numeric value of the truncated sum at spatial point `b` and time `t`.
    pub fn eval<T: Scalar>(&self, b: &VarBinding<T>, t: T) -> Result<T, SeriesError> {
        series_sum(&self.coeffs, T::lit(self.alpha), b, t)
    }
}

/// Σ_k c_k t^{kα}/Γ(1+kα) evaluated with the monomial in log space.
pub(crate) fn series_sum<T: Scalar>(
    coeffs: &[Expr],
    alpha: T,
    b: &VarBinding<T>,
    t: T,
) -> Result<T, SeriesError> {
    if t < T::zero() {
        return Err(SeriesError::NegativeTime(t.to_f64().unwrap_or(f64::NAN)));
    }
    let mut sum = T::zero();
    for (k, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let v = c.eval(b)?;
        if k == 0 {
            sum = sum + v;
            continue;
        }
        if t == T::zero() {
            continue;
        }
        let ka = T::lit(k as f64) * alpha;
        let basis = (ka * t.ln() - specfun::log_gamma(ka + T::one())?).exp();
        sum = sum + v * basis;
    }
    Ok(sum)
}
