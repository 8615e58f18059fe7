use alloc::collections::BTreeMap;
use alloc::string::String;

use super::{Expr, Func, Kind, Number};

/// Partial derivative along one coordinate, memoized on node identity so
/// that shared subtrees are differentiated once and stay shared in the
/// result. Reuse one `Differentiator` across all components of a tensor.
pub struct Differentiator {
    var: String,
    // node id -> (node kept alive so the id stays unique, derivative)
    cache: BTreeMap<usize, (Expr, Expr)>,
}

impl Differentiator {
    pub fn new(var: &str) -> Self {
        Differentiator {
            var: String::from(var),
            cache: BTreeMap::new(),
        }
    }

    pub fn variable(&self) -> &str {
        &self.var
    }

    pub fn derive(&mut self, e: &Expr) -> Expr {
        if let Some((_, d)) = self.cache.get(&e.id()) {
            return d.clone();
        }
        let d = self.derive_node(e);
        self.cache.insert(e.id(), (e.clone(), d.clone()));
        d
    }

    fn derive_node(&mut self, e: &Expr) -> Expr {
        match e.kind() {
            Kind::Const(_) => Expr::zero(),
            Kind::Var(name) => {
                if **name == *self.var {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Kind::Neg(a) => self.derive(a).neg(),
            Kind::Add(a, b) => self.derive(a).add(&self.derive(b)),
            Kind::Sub(a, b) => self.derive(a).sub(&self.derive(b)),
            Kind::Mul(a, b) => {
                let (da, db) = (self.derive(a), self.derive(b));
                da.mul(b).add(&a.mul(&db))
            }
            Kind::Div(a, b) => {
                let (da, db) = (self.derive(a), self.derive(b));
                if db.is_zero() {
                    return da.div(b);
                }
                da.mul(b).sub(&a.mul(&db)).div(&b.powi(2))
            }
            Kind::Pow(a, b) => {
                let (da, db) = (self.derive(a), self.derive(b));
                match b.as_number() {
                    Some(c) => {
                        let lowered = a.pow(&Expr::number(c.sub(Number::ONE)));
                        lowered.scale(c).mul(&da)
                    }
                    None => {
                        // d(a^b) = a^b (b' ln a + b a'/a)
                        let log_part = db.mul(&Expr::call(Func::Ln, a));
                        let base_part = b.mul(&da).div(a);
                        e.mul(&log_part.add(&base_part))
                    }
                }
            }
            Kind::Call(f, a) => {
                let da = self.derive(a);
                if da.is_zero() {
                    return Expr::zero();
                }
                let outer = match f {
                    Func::Sin => Expr::call(Func::Cos, a),
                    Func::Cos => Expr::call(Func::Sin, a).neg(),
                    Func::Tan => Expr::one().add(&e.powi(2)),
                    Func::Cot => Expr::one().add(&e.powi(2)).neg(),
                    Func::Exp => e.clone(),
                    Func::Ln => Expr::one().div(a),
                    Func::Sinh => Expr::call(Func::Cosh, a),
                    Func::Cosh => Expr::call(Func::Sinh, a),
                    Func::Sqrt => Expr::one().div(&Expr::int(2).mul(e)),
                    // d|a| = a/|a| da, undefined at a = 0
                    Func::Abs => a.div(e),
                };
                outer.mul(&da)
            }
        }
    }
}

/// Exact symbolic partial derivative of `e` with respect to `var`.
pub fn differentiate(e: &Expr, var: &str) -> Expr {
    Differentiator::new(var).derive(e)
}
