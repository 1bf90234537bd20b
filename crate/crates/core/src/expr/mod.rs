//! Immutable symbolic expressions over spatial variables.
//!
//! Every public constructor returns an expression in normal form: constants
//! folded, sums and products flattened, like terms collected with exact
//! rational coefficients, powers of a common base merged and products
//! distributed over sums. No trigonometric or exponential identities are
//! applied; identities of that kind are checked numerically with
//! [`equiv`](crate::expr::equiv).
//!
//! Two node kinds exist only for nonlinearity templates: the reserved
//! variable [`PSI`] and the held derivative `Deriv`, which stays unevaluated
//! while its argument still depends on `psi`.

mod diff;
mod equiv;
mod eval;
mod number;
mod parse;
mod print;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub use equiv::{equiv, equiv_report, sample_points, EquivConfig, EquivReport, SampleBox};
pub use eval::VarBinding;
pub use number::Number;
pub use parse::{parse, parse_with, Constants};

/// Name of the unknown function inside nonlinearity templates.
pub const PSI: &str = "psi";

/// Sums raised to a positive integer power up to this bound are expanded.
const MAX_EXPAND_POWER: i64 = 16;

pub type Symbol = Arc<str>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error("domain error in `{expr}`: {reason}")]
    Domain { expr: String, reason: String },
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("cannot evaluate template node `{0}` numerically")]
    Unresolved(String),
    #[error("variable `{0}` has no sampling interval")]
    MissingInterval(String),
}

/// Elementary functions of one argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Exp,
    Ln,
    Sin,
    Cos,
    /// max(u, 0)
    Ramp,
    /// 1 if u > 0 else 0
    Step,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Ramp => "max",
            Func::Step => "step",
        }
    }
}

/// Parameters (α, β, γ) of a three-parameter Mittag-Leffler node.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MlParams {
    pub alpha: Number,
    pub beta: Number,
    pub gamma: Number,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Const(Number),
    Var(Symbol),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Quotient(Expr, Expr),
    Pow(Expr, BigRational),
    Func(Func, Expr),
    MittagLeffler(MlParams, Expr),
    Deriv {
        var: Symbol,
        order: u32,
        inner: Expr,
    },
}

/// True for `psi` and for the internal unknowns (names starting with `__`)
/// whose spatial derivatives are held rather than evaluated.
pub fn is_unknown_symbol(name: &str) -> bool {
    name == PSI || name.starts_with("__")
}

struct Inner {
    node: Node,
    unknown: bool,
}

/// Shared, immutable expression tree.
#[derive(Clone)]
pub struct Expr(Arc<Inner>);

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.node == other.0.node
    }
}

impl Eq for Expr {}

impl PartialOrd for Expr {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Expr {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        self.0.node.cmp(&other.0.node)
    }
}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.node.hash(state)
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl Expr {
    /// Wraps a node without normalising it.
    pub fn from_node(node: Node) -> Self {
        let unknown = match &node {
            Node::Var(v) => is_unknown_symbol(v),
            Node::Const(_) => false,
            Node::Sum(xs) | Node::Product(xs) => xs.iter().any(Expr::has_unknown),
            Node::Quotient(a, b) => a.has_unknown() || b.has_unknown(),
            Node::Pow(b, _) => b.has_unknown(),
            Node::Func(_, a) | Node::MittagLeffler(_, a) => a.has_unknown(),
            Node::Deriv { inner, .. } => inner.has_unknown(),
        };
        Expr(Arc::new(Inner { node, unknown }))
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    /// Whether the tree mentions `psi` or an internal unknown.
    pub fn has_unknown(&self) -> bool {
        self.0.unknown
    }

    pub fn constant(n: Number) -> Self {
        Expr::from_node(Node::Const(n))
    }

    pub fn zero() -> Self {
        Expr::constant(Number::zero())
    }

    pub fn one() -> Self {
        Expr::constant(Number::one())
    }

    pub fn int(v: i64) -> Self {
        Expr::constant(Number::int(v))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Expr::constant(Number::ratio(n, d))
    }

    pub fn float(v: f64) -> Self {
        Expr::constant(Number::float(v))
    }

    pub fn var(name: &str) -> Self {
        Expr::from_node(Node::Var(Arc::from(name)))
    }

    pub fn psi() -> Self {
        Expr::var(PSI)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.node(), Node::Const(n) if n.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self.node(), Node::Const(n) if n.is_one())
    }

    pub fn as_number(&self) -> Option<&Number> {
        match self.node() {
            Node::Const(n) => Some(n),
            _ => None,
        }
    }

    /// Terms of a sum, or the expression itself.
    pub fn terms(&self) -> Vec<Expr> {
        match self.node() {
            Node::Sum(ts) => ts.clone(),
            _ if self.is_zero() => Vec::new(),
            _ => vec![self.clone()],
        }
    }

    // ----- canonical constructors -------------------------------------------------

    pub fn add(terms: impl IntoIterator<Item = Expr>) -> Expr {
        let mut collected: BTreeMap<Expr, Number> = BTreeMap::new();
        let mut stack: Vec<Expr> = terms.into_iter().collect();
        while let Some(t) = stack.pop() {
            if let Node::Sum(ts) = t.node() {
                stack.extend(ts.iter().cloned());
                continue;
            }
            let (c, rest) = split_coeff(&t);
            match collected.get_mut(&rest) {
                Some(acc) => *acc = acc.add(&c),
                None => {
                    collected.insert(rest, c);
                }
            }
        }
        let mut out: Vec<Expr> = collected
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(rest, c)| with_coeff(c, rest))
            .collect();
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => Expr::from_node(Node::Sum(out)),
        }
    }

    pub fn mul(factors: impl IntoIterator<Item = Expr>) -> Expr {
        let mut coef = Number::one();
        let mut powers: BTreeMap<Expr, BigRational> = BTreeMap::new();
        let mut stack: Vec<Expr> = factors.into_iter().collect();
        while let Some(f) = stack.pop() {
            match f.node() {
                Node::Const(n) => coef = coef.mul(n),
                Node::Product(fs) => stack.extend(fs.iter().cloned()),
                Node::Pow(b, e) => *powers.entry(b.clone()).or_insert_with(BigRational::zero) += e,
                _ => *powers.entry(f).or_insert_with(BigRational::zero) += BigRational::one(),
            }
        }
        if coef.is_zero() {
            return Expr::zero();
        }
        let mut plain = Vec::new();
        let mut expand = Vec::new();
        for (base, e) in powers {
            if e.is_zero() {
                continue;
            }
            if matches!(base.node(), Node::Sum(_))
                && e.is_integer()
                && e.is_positive()
                && e <= rat(MAX_EXPAND_POWER)
            {
                expand.push((base, e));
                continue;
            }
            let p = Expr::powr(&base, &e);
            match p.node() {
                Node::Const(n) => coef = coef.mul(n),
                Node::Product(_) | Node::Sum(_) => expand.push((p, BigRational::one())),
                _ => plain.push(p),
            }
        }
        if coef.is_zero() {
            return Expr::zero();
        }
        if expand.is_empty() {
            return product_node(coef, plain);
        }
        let mut acc = vec![product_node(coef, plain)];
        for (s, e) in expand {
            let reps = e.to_integer().try_into().unwrap_or(1u32);
            let parts = s.terms();
            for _ in 0..reps {
                let mut next = Vec::with_capacity(acc.len() * parts.len().max(1));
                for a in &acc {
                    for t in &parts {
                        next.push(Expr::mul([a.clone(), t.clone()]));
                    }
                }
                acc = next;
            }
        }
        Expr::add(acc)
    }

    /// `base^e` for a rational exponent.
    pub fn powr(base: &Expr, e: &BigRational) -> Expr {
        if e.is_zero() {
            return Expr::one();
        }
        if e.is_one() {
            return base.clone();
        }
        match base.node() {
            Node::Const(n) => match n.pow(e) {
                Some(v) => Expr::constant(v),
                None => Expr::from_node(Node::Pow(base.clone(), e.clone())),
            },
            Node::Pow(b, e2) if e.is_integer() => Expr::powr(b, &(e2 * e)),
            Node::Product(fs) if e.is_integer() => Expr::mul(fs.iter().map(|f| Expr::powr(f, e))),
            Node::Product(fs) => {
                // pull a positive numeric coefficient out of a fractional power
                if let Node::Const(c) = fs[0].node() {
                    if !c.is_negative() {
                        if let Some(ce) = c.pow(e) {
                            let rest = Expr::mul(fs[1..].iter().cloned());
                            return Expr::mul([Expr::constant(ce), Expr::powr(&rest, e)]);
                        }
                    }
                }
                Expr::from_node(Node::Pow(base.clone(), e.clone()))
            }
            Node::Sum(_) if e.is_integer() && e.is_positive() && *e <= rat(MAX_EXPAND_POWER) => {
                let n: u32 = e.to_integer().try_into().unwrap_or(1);
                Expr::mul(std::iter::repeat_n(base.clone(), n as usize))
            }
            Node::Quotient(..) => Expr::powr(&base.normalize(), e),
            _ => Expr::from_node(Node::Pow(base.clone(), e.clone())),
        }
    }

    /// General power; a non-rational exponent becomes `exp(e·ln(base))`.
    pub fn pow(base: &Expr, exponent: &Expr) -> Expr {
        match exponent.node() {
            Node::Const(Number::Rational(r)) => Expr::powr(base, r),
            _ => Expr::func(
                Func::Exp,
                Expr::mul([exponent.clone(), Expr::func(Func::Ln, base.clone())]),
            ),
        }
    }

    pub fn powi(base: &Expr, e: i64) -> Expr {
        Expr::powr(base, &rat(e))
    }

    pub fn sqrt(base: &Expr) -> Expr {
        Expr::powr(base, &BigRational::new(1.into(), 2.into()))
    }

    pub fn neg(a: &Expr) -> Expr {
        Expr::mul([Expr::int(-1), a.clone()])
    }

    pub fn sub(a: &Expr, b: &Expr) -> Expr {
        Expr::add([a.clone(), Expr::neg(b)])
    }

    pub fn div(a: &Expr, b: &Expr) -> Expr {
        Expr::mul([a.clone(), Expr::powi(b, -1)])
    }

    pub fn func(f: Func, arg: Expr) -> Expr {
        if let Node::Const(n) = arg.node() {
            if let Some(v) = fold_func(f, n) {
                return Expr::constant(v);
            }
        }
        Expr::from_node(Node::Func(f, arg))
    }

    pub fn exp(arg: Expr) -> Expr {
        Expr::func(Func::Exp, arg)
    }

    pub fn ln(arg: Expr) -> Expr {
        Expr::func(Func::Ln, arg)
    }

    pub fn sin(arg: Expr) -> Expr {
        Expr::func(Func::Sin, arg)
    }

    pub fn cos(arg: Expr) -> Expr {
        Expr::func(Func::Cos, arg)
    }

    pub fn ramp(arg: Expr) -> Expr {
        Expr::func(Func::Ramp, arg)
    }

    pub fn step(arg: Expr) -> Expr {
        Expr::func(Func::Step, arg)
    }

    /// E^γ_{α,β}(arg).
    pub fn mittag_leffler(params: MlParams, arg: Expr) -> Expr {
        if let Node::Const(z) = arg.node() {
            let v = crate::specfun::mittag_leffler_general(
                params.alpha.to_f64(),
                params.beta.to_f64(),
                params.gamma.to_f64(),
                z.to_f64(),
            );
            if let Ok(v) = v {
                return Expr::float(v);
            }
        }
        Expr::from_node(Node::MittagLeffler(params, arg))
    }

    /// Held spatial derivative ∂^order/∂var^order of `inner`.
    ///
    /// Resolved immediately unless `inner` depends on [`PSI`] or another
    /// unknown (see [`is_unknown_symbol`]).
    pub fn deriv(var: &str, order: u32, inner: Expr) -> Expr {
        if order == 0 {
            return inner;
        }
        if !inner.has_unknown() {
            return inner.diff_n(var, order);
        }
        if let Node::Deriv {
            var: v2,
            order: o2,
            inner: i2,
        } = inner.node()
        {
            if &**v2 == var {
                return Expr::from_node(Node::Deriv {
                    var: v2.clone(),
                    order: o2 + order,
                    inner: i2.clone(),
                });
            }
        }
        Expr::from_node(Node::Deriv {
            var: Arc::from(var),
            order,
            inner,
        })
    }

    /// Rebuilds the tree bottom-up through the canonical constructors.
    pub fn normalize(&self) -> Expr {
        match self.node() {
            Node::Const(_) | Node::Var(_) => self.clone(),
            Node::Sum(ts) => Expr::add(ts.iter().map(Expr::normalize)),
            Node::Product(fs) => Expr::mul(fs.iter().map(Expr::normalize)),
            Node::Quotient(a, b) => Expr::div(&a.normalize(), &b.normalize()),
            Node::Pow(b, e) => Expr::powr(&b.normalize(), e),
            Node::Func(f, a) => Expr::func(*f, a.normalize()),
            Node::MittagLeffler(p, a) => Expr::mittag_leffler(p.clone(), a.normalize()),
            Node::Deriv { var, order, inner } => Expr::deriv(var, *order, inner.normalize()),
        }
    }

    // ----- queries ---------------------------------------------------------------

    /// Children in evaluation order.
    pub fn children(&self) -> Vec<&Expr> {
        match self.node() {
            Node::Const(_) | Node::Var(_) => Vec::new(),
            Node::Sum(xs) | Node::Product(xs) => xs.iter().collect(),
            Node::Quotient(a, b) => vec![a, b],
            Node::Pow(b, _) => vec![b],
            Node::Func(_, a) | Node::MittagLeffler(_, a) => vec![a],
            Node::Deriv { inner, .. } => vec![inner],
        }
    }

    pub fn contains_symbol(&self, name: &str) -> bool {
        match self.node() {
            Node::Var(v) => &**v == name,
            Node::Deriv { var, inner, .. } => &**var == name || inner.contains_symbol(name),
            _ => self.children().into_iter().any(|c| c.contains_symbol(name)),
        }
    }

    /// Every variable name referenced, including derivative variables.
    pub fn symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<String>) {
        match self.node() {
            Node::Var(v) => {
                out.insert(v.to_string());
            }
            Node::Deriv { var, inner, .. } => {
                out.insert(var.to_string());
                inner.collect_symbols(out);
            }
            _ => {
                for c in self.children() {
                    c.collect_symbols(out);
                }
            }
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Expr::size).sum::<usize>()
    }

    /// Replaces every occurrence of variable `name` and renormalises.
    pub fn substitute(&self, name: &str, value: &Expr) -> Expr {
        if !self.contains_symbol(name) {
            return self.clone();
        }
        let sub = |e: &Expr| e.substitute(name, value);
        match self.node() {
            Node::Const(_) => self.clone(),
            Node::Var(v) => {
                if &**v == name {
                    value.clone()
                } else {
                    self.clone()
                }
            }
            Node::Sum(ts) => Expr::add(ts.iter().map(sub)),
            Node::Product(fs) => Expr::mul(fs.iter().map(sub)),
            Node::Quotient(a, b) => Expr::div(&sub(a), &sub(b)),
            Node::Pow(b, e) => Expr::powr(&sub(b), e),
            Node::Func(f, a) => Expr::func(*f, sub(a)),
            Node::MittagLeffler(p, a) => Expr::mittag_leffler(p.clone(), sub(a)),
            Node::Deriv { var, order, inner } => Expr::deriv(var, *order, sub(inner)),
        }
    }
}

/// Splits a normalised term into numeric coefficient and remaining factor.
pub(crate) fn split_coeff(t: &Expr) -> (Number, Expr) {
    match t.node() {
        Node::Const(n) => (n.clone(), Expr::one()),
        Node::Product(fs) => match fs[0].node() {
            Node::Const(c) => {
                let rest = if fs.len() == 2 {
                    fs[1].clone()
                } else {
                    Expr::from_node(Node::Product(fs[1..].to_vec()))
                };
                (c.clone(), rest)
            }
            _ => (Number::one(), t.clone()),
        },
        _ => (Number::one(), t.clone()),
    }
}

fn with_coeff(c: Number, rest: Expr) -> Expr {
    if rest.is_one() {
        return Expr::constant(c);
    }
    if c.is_one() {
        return rest;
    }
    let mut fs = vec![Expr::constant(c)];
    match rest.node() {
        Node::Product(rs) => fs.extend(rs.iter().cloned()),
        _ => fs.push(rest),
    }
    Expr::from_node(Node::Product(fs))
}

fn product_node(coef: Number, mut plain: Vec<Expr>) -> Expr {
    plain.sort();
    match (plain.len(), coef.is_one()) {
        (0, _) => Expr::constant(coef),
        (1, true) => plain.pop().unwrap(),
        (_, true) => Expr::from_node(Node::Product(plain)),
        _ => {
            let mut fs = Vec::with_capacity(plain.len() + 1);
            fs.push(Expr::constant(coef));
            fs.extend(plain);
            Expr::from_node(Node::Product(fs))
        }
    }
}

fn fold_func(f: Func, n: &Number) -> Option<Number> {
    let x = n.to_f64();
    let float = |v: f64| v.is_finite().then(|| Number::float(v));
    match f {
        Func::Exp if n.is_zero() => Some(Number::one()),
        Func::Exp => float(x.exp()),
        Func::Ln if n.is_one() => Some(Number::zero()),
        Func::Ln if x > 0.0 => float(x.ln()),
        Func::Ln => None,
        Func::Sin if n.is_zero() => Some(Number::zero()),
        Func::Sin => float(x.sin()),
        Func::Cos if n.is_zero() => Some(Number::one()),
        Func::Cos => float(x.cos()),
        Func::Ramp => Some(if n.is_negative() {
            Number::zero()
        } else {
            n.clone()
        }),
        Func::Step => Some(if n.is_negative() || n.is_zero() {
            Number::zero()
        } else {
            Number::one()
        }),
    }
}

impl std::ops::Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        Expr::add([self.clone(), rhs.clone()])
    }
}

impl std::ops::Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        Expr::sub(self, rhs)
    }
}

impl std::ops::Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        Expr::mul([self.clone(), rhs.clone()])
    }
}

impl std::ops::Div for &Expr {
    type Output = Expr;
    fn div(self, rhs: &Expr) -> Expr {
        Expr::div(self, rhs)
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}
