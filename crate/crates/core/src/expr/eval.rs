use std::collections::BTreeMap;

use num_traits::{One, Signed, ToPrimitive};

use super::{Expr, ExprError, Func, Node};
use crate::scalar::Scalar;

/// Values for the free variables of an expression.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VarBinding<T> {
    values: BTreeMap<String, T>,
}

impl<T: Scalar> VarBinding<T> {
    pub fn new() -> Self {
        Self {
            values: BTreeMap::new(),
        }
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, T)>) -> Self {
        Self {
            values: pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        }
    }

    pub fn set(&mut self, name: &str, value: T) {
        self.values.insert(name.to_string(), value);
    }

    pub fn with(mut self, name: &str, value: T) -> Self {
        self.set(name, value);
        self
    }

    pub fn get(&self, name: &str) -> Option<T> {
        self.values.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, T)> {
        self.values.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

fn domain(e: &Expr, reason: &str) -> ExprError {
    ExprError::Domain {
        expr: e.to_string(),
        reason: reason.to_string(),
    }
}

impl Expr {
    /// Numeric value at a point. Every free variable must be bound.
    ///
    /// Undefined operations (ln of a non-positive number, division by zero,
    /// fractional power of a negative base) and overflow are reported as
    /// [`ExprError::Domain`] rather than propagating NaN.
    pub fn eval<T: Scalar>(&self, b: &VarBinding<T>) -> Result<T, ExprError> {
        let v = match self.node() {
            Node::Const(n) => T::lit(n.to_f64()),
            Node::Var(name) => b
                .get(name)
                .ok_or_else(|| ExprError::Unbound(name.to_string()))?,
            Node::Sum(ts) => {
                let mut acc = T::zero();
                for t in ts {
                    acc = acc + t.eval(b)?;
                }
                acc
            }
            Node::Product(fs) => {
                let mut acc = T::one();
                for f in fs {
                    acc = acc * f.eval(b)?;
                }
                acc
            }
            Node::Quotient(n, d) => {
                let den = d.eval(b)?;
                if den == T::zero() {
                    return Err(domain(self, "division by zero"));
                }
                n.eval(b)? / den
            }
            Node::Pow(base, e) => {
                let x = base.eval(b)?;
                if x == T::zero() && e.is_negative() {
                    return Err(domain(self, "division by zero"));
                }
                if e.is_integer() {
                    match e.to_integer().to_i32() {
                        Some(k) => x.powi(k),
                        None => return Err(domain(self, "exponent out of range")),
                    }
                } else if x < T::zero() {
                    return Err(domain(self, "fractional power of a negative number"));
                } else if *e.denom() == 2.into() && e.numer().abs().is_one() {
                    let r = x.sqrt();
                    if e.is_negative() {
                        r.recip()
                    } else {
                        r
                    }
                } else {
                    x.powf(T::lit(super::number::rational_to_f64(e)))
                }
            }
            Node::Func(f, a) => {
                let x = a.eval(b)?;
                match f {
                    Func::Exp => x.exp(),
                    Func::Ln => {
                        if x <= T::zero() {
                            return Err(domain(self, "logarithm of a non-positive number"));
                        }
                        x.ln()
                    }
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Ramp => x.max(T::zero()),
                    Func::Step => {
                        if x > T::zero() {
                            T::one()
                        } else {
                            T::zero()
                        }
                    }
                }
            }
            Node::MittagLeffler(p, a) => {
                let z = a.eval(b)?;
                crate::specfun::mittag_leffler_general(
                    T::lit(p.alpha.to_f64()),
                    T::lit(p.beta.to_f64()),
                    T::lit(p.gamma.to_f64()),
                    z,
                )
                .map_err(|err| domain(self, &err.to_string()))?
            }
            Node::Deriv { .. } => return Err(ExprError::Unresolved(self.to_string())),
        };
        if !v.is_finite() {
            return Err(domain(self, "non-finite value"));
        }
        Ok(v)
    }
}
