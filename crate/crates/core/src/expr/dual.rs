//! Forward-mode dual numbers, used as an independent oracle for
//! [`differentiate`](super::differentiate).

use alloc::collections::BTreeMap;
use core::ops::{Add, Div, Mul, Neg, Sub};

use super::eval::{apply_call, apply_div, apply_pow, apply_powi, Bindings, DomainKind, EvalError};
use super::print::abbreviate;
use super::{Expr, Func, Kind};

/// `value + deriv·ε` with `ε² = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual {
    pub value: f64,
    pub deriv: f64,
}

impl Dual {
    pub fn new(value: f64, deriv: f64) -> Self {
        Dual { value, deriv }
    }

    pub fn constant(value: f64) -> Self {
        Dual { value, deriv: 0.0 }
    }

    pub fn variable(value: f64) -> Self {
        Dual { value, deriv: 1.0 }
    }

    fn chain(self, value: f64, slope: f64) -> Dual {
        Dual::new(value, slope * self.deriv)
    }

    pub fn sin(self) -> Dual {
        self.chain(libm::sin(self.value), libm::cos(self.value))
    }

    pub fn cos(self) -> Dual {
        self.chain(libm::cos(self.value), -libm::sin(self.value))
    }

    pub fn exp(self) -> Dual {
        let e = libm::exp(self.value);
        self.chain(e, e)
    }

    pub fn sinh(self) -> Dual {
        self.chain(libm::sinh(self.value), libm::cosh(self.value))
    }

    pub fn cosh(self) -> Dual {
        self.chain(libm::cosh(self.value), libm::sinh(self.value))
    }

    fn checked_div(self, rhs: Dual) -> Result<Dual, DomainKind> {
        let value = apply_div(self.value, rhs.value)?;
        let deriv = (self.deriv * rhs.value - self.value * rhs.deriv) / (rhs.value * rhs.value);
        Ok(Dual::new(value, deriv))
    }

    fn call(self, f: Func) -> Result<Dual, DomainKind> {
        let x = self.value;
        let value = apply_call(f, x)?;
        let slope = match f {
            Func::Sin => return Ok(self.sin()),
            Func::Cos => return Ok(self.cos()),
            Func::Exp => return Ok(self.exp()),
            Func::Sinh => return Ok(self.sinh()),
            Func::Cosh => return Ok(self.cosh()),
            Func::Tan => {
                let c = libm::cos(x);
                1.0 / (c * c)
            }
            Func::Cot => {
                let s = libm::sin(x);
                -1.0 / (s * s)
            }
            Func::Ln => 1.0 / x,
            Func::Sqrt => apply_div(0.5, value)?,
            Func::Abs => {
                if x == 0.0 {
                    return Err(DomainKind::DivisionByZero);
                }
                libm::copysign(1.0, x)
            }
        };
        Ok(self.chain(value, slope))
    }

    fn powi(self, k: i64) -> Result<Dual, DomainKind> {
        let value = apply_powi(self.value, k)?;
        let slope = if k == 0 {
            0.0
        } else {
            k as f64 * apply_powi(self.value, k - 1)?
        };
        Ok(self.chain(value, slope))
    }

    fn pow(self, rhs: Dual) -> Result<Dual, DomainKind> {
        let value = apply_pow(self.value, rhs.value)?;
        let mut deriv = 0.0;
        if self.deriv != 0.0 {
            deriv += rhs.value * apply_pow(self.value, rhs.value - 1.0)? * self.deriv;
        }
        if rhs.deriv != 0.0 {
            if self.value <= 0.0 {
                return Err(DomainKind::LogOfNonPositive);
            }
            deriv += value * libm::log(self.value) * rhs.deriv;
        }
        Ok(Dual::new(value, deriv))
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, rhs: Dual) -> Dual {
        Dual::new(self.value + rhs.value, self.deriv + rhs.deriv)
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, rhs: Dual) -> Dual {
        Dual::new(self.value - rhs.value, self.deriv - rhs.deriv)
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, rhs: Dual) -> Dual {
        Dual::new(self.value * rhs.value, self.value * rhs.deriv + self.deriv * rhs.value)
    }
}

impl Div for Dual {
    type Output = Dual;
    /// Unchecked; a zero divisor yields non-finite parts.
    fn div(self, rhs: Dual) -> Dual {
        Dual::new(
            self.value / rhs.value,
            (self.deriv * rhs.value - self.value * rhs.deriv) / (rhs.value * rhs.value),
        )
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual::new(-self.value, -self.deriv)
    }
}

/// Evaluates `e` and its partial derivative along `direction` in one pass.
pub fn evaluate_dual<B: Bindings + ?Sized>(
    e: &Expr,
    point: &B,
    direction: &str,
) -> Result<Dual, EvalError> {
    let mut memo = BTreeMap::new();
    eval_dual(e, point, direction, &mut memo)
}

fn eval_dual<B: Bindings + ?Sized>(
    e: &Expr,
    point: &B,
    direction: &str,
    memo: &mut BTreeMap<usize, Dual>,
) -> Result<Dual, EvalError> {
    if let Some(d) = memo.get(&e.id()) {
        return Ok(*d);
    }
    let mut go = |x: &Expr| eval_dual(x, point, direction, memo);
    let fail = |kind: DomainKind| EvalError::Domain {
        kind,
        subexpr: abbreviate(e, 160),
    };
    let d = match e.kind() {
        Kind::Const(n) => Dual::constant(n.to_f64()),
        Kind::Var(name) => {
            let v = point
                .value(name)
                .ok_or_else(|| EvalError::Unbound(alloc::string::String::from(&**name)))?;
            if **name == *direction {
                Dual::variable(v)
            } else {
                Dual::constant(v)
            }
        }
        Kind::Neg(a) => -go(a)?,
        Kind::Add(a, b) => go(a)? + go(b)?,
        Kind::Sub(a, b) => go(a)? - go(b)?,
        Kind::Mul(a, b) => go(a)? * go(b)?,
        Kind::Div(a, b) => {
            let (x, y) = (go(a)?, go(b)?);
            x.checked_div(y).map_err(fail)?
        }
        Kind::Pow(a, b) => {
            let x = go(a)?;
            match b.as_number().and_then(|n| n.as_integer()) {
                Some(k) => x.powi(k),
                None => {
                    let y = go(b)?;
                    x.pow(y)
                }
            }
            .map_err(fail)?
        }
        Kind::Call(f, a) => go(a)?.call(*f).map_err(fail)?,
    };
    if !(d.value.is_finite() && d.deriv.is_finite()) {
        return Err(fail(DomainKind::NonFinite));
    }
    memo.insert(e.id(), d);
    Ok(d)
}
