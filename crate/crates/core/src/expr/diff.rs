use num_rational::BigRational;
use num_traits::One;

use super::{is_unknown_symbol, Expr, Func, MlParams, Node};

impl Expr {
    /// Partial derivative with respect to `var`, in normal form.
    ///
    /// d/du max(u,0) = step(u) and d/du step(u) = 0: the distributional part
    /// of the step derivative is dropped. Derivatives of anything that still
    /// depends on [`PSI`](super::PSI) are held as `Deriv` nodes.
    pub fn diff(&self, var: &str) -> Expr {
        if !self.has_unknown() && !self.contains_symbol(var) {
            return Expr::zero();
        }
        match self.node() {
            Node::Const(_) => Expr::zero(),
            Node::Var(v) => {
                if &**v == var {
                    Expr::one()
                } else if is_unknown_symbol(v) {
                    Expr::deriv(var, 1, self.clone())
                } else {
                    Expr::zero()
                }
            }
            Node::Sum(ts) => Expr::add(ts.iter().map(|t| t.diff(var))),
            Node::Product(fs) => {
                let mut terms = Vec::with_capacity(fs.len());
                for i in 0..fs.len() {
                    let d = fs[i].diff(var);
                    if d.is_zero() {
                        continue;
                    }
                    let mut parts: Vec<Expr> = fs.clone();
                    parts[i] = d;
                    terms.push(Expr::mul(parts));
                }
                Expr::add(terms)
            }
            Node::Quotient(..) => self.normalize().diff(var),
            Node::Pow(b, e) => {
                let db = b.diff(var);
                if db.is_zero() {
                    return Expr::zero();
                }
                let lowered = Expr::powr(b, &(e - BigRational::one()));
                Expr::mul([
                    Expr::constant(super::Number::Rational(e.clone())),
                    lowered,
                    db,
                ])
            }
            Node::Func(f, u) => {
                let du = u.diff(var);
                if du.is_zero() {
                    return Expr::zero();
                }
                let outer = match f {
                    Func::Exp => self.clone(),
                    Func::Ln => Expr::powi(u, -1),
                    Func::Sin => Expr::cos(u.clone()),
                    Func::Cos => Expr::neg(&Expr::sin(u.clone())),
                    Func::Ramp => Expr::step(u.clone()),
                    Func::Step => return Expr::zero(),
                };
                Expr::mul([outer, du])
            }
            Node::MittagLeffler(p, u) => {
                let du = u.diff(var);
                if du.is_zero() {
                    return Expr::zero();
                }
                // d/dz E^γ_{α,β}(z) = γ E^{γ+1}_{α,α+β}(z)
                let raised = MlParams {
                    alpha: p.alpha.clone(),
                    beta: p.alpha.add(&p.beta),
                    gamma: p.gamma.add(&super::Number::one()),
                };
                Expr::mul([
                    Expr::constant(p.gamma.clone()),
                    Expr::mittag_leffler(raised, u.clone()),
                    du,
                ])
            }
            Node::Deriv {
                var: v,
                order,
                inner,
            } => {
                if &**v == var {
                    Expr::deriv(var, order + 1, inner.clone())
                } else {
                    Expr::deriv(var, 1, self.clone())
                }
            }
        }
    }

    /// `order`-fold derivative.
    pub fn diff_n(&self, var: &str, order: u32) -> Expr {
        (0..order).fold(self.clone(), |e, _| e.diff(var))
    }
}
