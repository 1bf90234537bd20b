use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};

use super::{split_coeff, Expr, Func, Node, Number};

// Binding strength of a printed form; a child is parenthesised when its
// level is below what the context requires.
const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const POWER: u8 = 3;
const ATOM: u8 = 4;

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self).0)
    }
}

fn wrap(e: &Expr, need: u8) -> String {
    let (s, level) = render(e);
    if level < need {
        format!("({s})")
    } else {
        s
    }
}

fn number_level(n: &Number) -> u8 {
    match n {
        _ if n.is_negative() => PRODUCT,
        Number::Rational(r) if !r.is_integer() => PRODUCT,
        _ => ATOM,
    }
}

fn exponent(e: &BigRational) -> String {
    if e.is_integer() && !e.is_negative() {
        format!("{}", e.numer())
    } else if e.is_integer() {
        format!("({})", e.numer())
    } else {
        format!("({}/{})", e.numer(), e.denom())
    }
}

fn render(e: &Expr) -> (String, u8) {
    match e.node() {
        Node::Const(n) => (n.to_string(), number_level(n)),
        Node::Var(v) => (v.to_string(), ATOM),
        Node::Sum(ts) => {
            let mut out = String::new();
            for (i, t) in ts.iter().enumerate() {
                let (c, rest) = split_coeff(t);
                if i > 0 && c.is_negative() {
                    out.push_str(" - ");
                    out.push_str(&wrap(&scaled(c.neg(), rest), PRODUCT));
                } else {
                    if i > 0 {
                        out.push_str(" + ");
                    }
                    out.push_str(&wrap(t, PRODUCT));
                }
            }
            (out, SUM)
        }
        Node::Product(fs) => render_product(fs),
        Node::Quotient(a, b) => (format!("{}/{}", wrap(a, PRODUCT), wrap(b, POWER)), PRODUCT),
        Node::Pow(b, p) => {
            if *p == BigRational::new(1.into(), 2.into()) {
                return (format!("sqrt({})", render(b).0), ATOM);
            }
            (format!("{}^{}", wrap(b, ATOM), exponent(p)), POWER)
        }
        Node::Func(Func::Ramp, a) => (format!("max({}, 0)", render(a).0), ATOM),
        Node::Func(func, a) => (format!("{}({})", func.name(), render(a).0), ATOM),
        Node::MittagLeffler(p, a) => {
            let s = if p.gamma.is_one() {
                format!("ml({}, {}, {})", p.alpha, p.beta, render(a).0)
            } else {
                format!("ml({}, {}, {}, {})", p.alpha, p.beta, p.gamma, render(a).0)
            };
            (s, ATOM)
        }
        Node::Deriv { var, order, inner } => {
            let body = render(inner).0;
            let s = match (&**var, *order) {
                ("x" | "y" | "z", 1) => format!("D{var}({body})"),
                ("x" | "y" | "z", k) => format!("D{var}({body}, {k})"),
                (v, k) => format!("D({body}, {v}, {k})"),
            };
            (s, ATOM)
        }
    }
}

fn scaled(c: Number, rest: Expr) -> Expr {
    Expr::mul([Expr::constant(c), rest])
}

fn render_product(fs: &[Expr]) -> (String, u8) {
    let mut num: Vec<String> = Vec::new();
    let mut den: Vec<String> = Vec::new();
    let mut coef_den = None;
    let mut sign = "";
    let mut start = 0;
    if let Node::Const(c) = fs[0].node() {
        start = 1;
        let c = if c.is_negative() {
            sign = "-";
            c.neg()
        } else {
            c.clone()
        };
        match &c {
            Number::Rational(r) => {
                if !r.numer().is_one() {
                    num.push(r.numer().to_string());
                }
                if *r.denom() != BigInt::one() {
                    coef_den = Some(r.denom().to_string());
                }
            }
            Number::Float(_) => num.push(c.to_string()),
        }
    }
    for f in &fs[start..] {
        match f.node() {
            // (sum)^2 would expand on parsing, so keep (sum)^(-2) as a factor
            Node::Pow(b, p)
                if p.is_integer()
                    && *p < -BigRational::one()
                    && matches!(b.node(), Node::Sum(_)) =>
            {
                num.push(wrap(f, POWER))
            }
            Node::Pow(b, p) if p.is_negative() => den.push(wrap(&Expr::powr(b, &-p), POWER)),
            _ => num.push(wrap(f, POWER)),
        }
    }
    // one divisor per factor; "(a*b)" would expand on parsing
    den.extend(coef_den);
    let mut out = String::from(sign);
    if num.is_empty() {
        out.push('1');
    } else {
        out.push_str(&num.join("*"));
    }
    for d in den {
        out.push('/');
        out.push_str(&d);
    }
    (out, PRODUCT)
}
