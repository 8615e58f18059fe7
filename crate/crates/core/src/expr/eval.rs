use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::print::abbreviate;
use super::{Expr, Func, Kind};

/// Variable lookup for [`evaluate`].
pub trait Bindings {
    fn value(&self, name: &str) -> Option<f64>;
}

impl Bindings for BTreeMap<String, f64> {
    fn value(&self, name: &str) -> Option<f64> {
        self.get(name).copied()
    }
}

impl<S: AsRef<str>> Bindings for [(S, f64)] {
    fn value(&self, name: &str) -> Option<f64> {
        self.iter().find(|(n, _)| n.as_ref() == name).map(|(_, v)| *v)
    }
}

impl<S: AsRef<str>, const N: usize> Bindings for [(S, f64); N] {
    fn value(&self, name: &str) -> Option<f64> {
        self.as_slice().value(name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainKind {
    DivisionByZero,
    LogOfNonPositive,
    SqrtOfNegative,
    /// Negative base with a non-integer exponent, or zero to a negative power.
    Power,
    /// `tan` or `cot` at a pole.
    Pole,
    NonFinite,
}

#[derive(Clone, Debug, PartialEq)]
pub enum EvalError {
    Unbound(String),
    Domain {
        kind: DomainKind,
        /// Abbreviated text of the offending subexpression.
        subexpr: String,
    },
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::Unbound(name) => write!(f, "no value bound for coordinate '{name}'"),
            EvalError::Domain { kind, subexpr } => write!(f, "{kind:?} in {subexpr}"),
        }
    }
}

const SUBEXPR_CHARS: usize = 160;

fn domain(kind: DomainKind, e: &Expr) -> EvalError {
    EvalError::Domain {
        kind,
        subexpr: abbreviate(e, SUBEXPR_CHARS),
    }
}

pub(crate) fn apply_call(f: Func, a: f64) -> Result<f64, DomainKind> {
    let v = match f {
        Func::Sin => libm::sin(a),
        Func::Cos => libm::cos(a),
        Func::Tan => {
            let c = libm::cos(a);
            if c == 0.0 {
                return Err(DomainKind::Pole);
            }
            libm::sin(a) / c
        }
        Func::Cot => {
            let s = libm::sin(a);
            if s == 0.0 {
                return Err(DomainKind::Pole);
            }
            libm::cos(a) / s
        }
        Func::Exp => libm::exp(a),
        Func::Ln => {
            if a <= 0.0 {
                return Err(DomainKind::LogOfNonPositive);
            }
            libm::log(a)
        }
        Func::Sinh => libm::sinh(a),
        Func::Cosh => libm::cosh(a),
        Func::Sqrt => {
            if a < 0.0 {
                return Err(DomainKind::SqrtOfNegative);
            }
            libm::sqrt(a)
        }
        Func::Abs => libm::fabs(a),
    };
    Ok(v)
}

pub(crate) fn apply_div(a: f64, b: f64) -> Result<f64, DomainKind> {
    if b == 0.0 {
        Err(DomainKind::DivisionByZero)
    } else {
        Ok(a / b)
    }
}

pub(crate) fn apply_powi(a: f64, k: i64) -> Result<f64, DomainKind> {
    if a == 0.0 && k < 0 {
        return Err(DomainKind::Power);
    }
    let mut base = if k < 0 { 1.0 / a } else { a };
    let mut n = k.unsigned_abs();
    let mut acc = 1.0;
    while n > 0 {
        if n & 1 == 1 {
            acc *= base;
        }
        base *= base;
        n >>= 1;
    }
    Ok(acc)
}

pub(crate) fn apply_pow(a: f64, b: f64) -> Result<f64, DomainKind> {
    if a < 0.0 && libm::trunc(b) != b {
        return Err(DomainKind::Power);
    }
    if a == 0.0 && b < 0.0 {
        return Err(DomainKind::Power);
    }
    Ok(libm::pow(a, b))
}

fn check(v: f64, e: &Expr) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(domain(DomainKind::NonFinite, e))
    }
}

/// Evaluates `e` in IEEE doubles. Domain violations name the offending
/// subexpression.
pub fn evaluate<B: Bindings + ?Sized>(e: &Expr, point: &B) -> Result<f64, EvalError> {
    let mut memo = BTreeMap::new();
    eval_memo(e, point, &mut memo)
}

fn eval_memo<B: Bindings + ?Sized>(
    e: &Expr,
    point: &B,
    memo: &mut BTreeMap<usize, f64>,
) -> Result<f64, EvalError> {
    if let Some(v) = memo.get(&e.id()) {
        return Ok(*v);
    }
    let v = match e.kind() {
        Kind::Const(n) => n.to_f64(),
        Kind::Var(name) => point
            .value(name)
            .ok_or_else(|| EvalError::Unbound(String::from(&**name)))?,
        Kind::Neg(a) => -eval_memo(a, point, memo)?,
        Kind::Add(a, b) => eval_memo(a, point, memo)? + eval_memo(b, point, memo)?,
        Kind::Sub(a, b) => eval_memo(a, point, memo)? - eval_memo(b, point, memo)?,
        Kind::Mul(a, b) => eval_memo(a, point, memo)? * eval_memo(b, point, memo)?,
        Kind::Div(a, b) => {
            let (x, y) = (eval_memo(a, point, memo)?, eval_memo(b, point, memo)?);
            apply_div(x, y).map_err(|k| domain(k, e))?
        }
        Kind::Pow(a, b) => {
            let x = eval_memo(a, point, memo)?;
            match b.as_number().and_then(|n| n.as_integer()) {
                Some(k) => apply_powi(x, k),
                None => apply_pow(x, eval_memo(b, point, memo)?),
            }
            .map_err(|k| domain(k, e))?
        }
        Kind::Call(f, a) => {
            let x = eval_memo(a, point, memo)?;
            apply_call(*f, x).map_err(|k| domain(k, e))?
        }
    };
    let v = check(v, e)?;
    memo.insert(e.id(), v);
    Ok(v)
}

#[derive(Clone, Copy, Debug)]
enum Op {
    Const(f64),
    Var(u32),
    Neg(u32),
    Add(u32, u32),
    Sub(u32, u32),
    Mul(u32, u32),
    Div(u32, u32),
    PowI(u32, i64),
    Pow(u32, u32),
    Call(Func, u32),
}

/// A batch of expressions flattened into one straight-line program over a
/// fixed coordinate order. Shared subtrees are computed once per point.
#[derive(Clone)]
pub struct Tape {
    ops: Vec<Op>,
    nodes: Vec<Expr>,
    outputs: Vec<u32>,
}

impl Tape {
    /// Compiles `exprs` with variables resolved against `coordinates`.
    pub fn compile<S: AsRef<str>>(coordinates: &[S], exprs: &[Expr]) -> Result<Tape, EvalError> {
        let mut tape = Tape {
            ops: Vec::new(),
            nodes: Vec::new(),
            outputs: Vec::with_capacity(exprs.len()),
        };
        let mut slots: BTreeMap<usize, u32> = BTreeMap::new();
        for e in exprs {
            let slot = tape.emit(e, coordinates, &mut slots)?;
            tape.outputs.push(slot);
        }
        Ok(tape)
    }

    fn push(&mut self, op: Op, e: &Expr) -> u32 {
        self.ops.push(op);
        self.nodes.push(e.clone());
        (self.ops.len() - 1) as u32
    }

    fn emit<S: AsRef<str>>(
        &mut self,
        e: &Expr,
        coordinates: &[S],
        slots: &mut BTreeMap<usize, u32>,
    ) -> Result<u32, EvalError> {
        if let Some(s) = slots.get(&e.id()) {
            return Ok(*s);
        }
        let op = match e.kind() {
            Kind::Const(n) => Op::Const(n.to_f64()),
            Kind::Var(name) => {
                let i = coordinates
                    .iter()
                    .position(|c| c.as_ref() == &**name)
                    .ok_or_else(|| EvalError::Unbound(String::from(&**name)))?;
                Op::Var(i as u32)
            }
            Kind::Neg(a) => Op::Neg(self.emit(a, coordinates, slots)?),
            Kind::Add(a, b) => Op::Add(self.emit(a, coordinates, slots)?, self.emit(b, coordinates, slots)?),
            Kind::Sub(a, b) => Op::Sub(self.emit(a, coordinates, slots)?, self.emit(b, coordinates, slots)?),
            Kind::Mul(a, b) => Op::Mul(self.emit(a, coordinates, slots)?, self.emit(b, coordinates, slots)?),
            Kind::Div(a, b) => Op::Div(self.emit(a, coordinates, slots)?, self.emit(b, coordinates, slots)?),
            Kind::Pow(a, b) => {
                let base = self.emit(a, coordinates, slots)?;
                match b.as_number().and_then(|n| n.as_integer()) {
                    Some(k) => Op::PowI(base, k),
                    None => Op::Pow(base, self.emit(b, coordinates, slots)?),
                }
            }
            Kind::Call(f, a) => Op::Call(*f, self.emit(a, coordinates, slots)?),
        };
        let slot = self.push(op, e);
        slots.insert(e.id(), slot);
        Ok(slot)
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    /// Number of distinct operations per evaluation.
    pub fn op_count(&self) -> usize {
        self.ops.len()
    }

    /// Evaluates every compiled expression at `values` (one per coordinate).
    pub fn eval(&self, values: &[f64]) -> Result<Vec<f64>, EvalError> {
        let mut regs: Vec<f64> = Vec::with_capacity(self.ops.len());
        for (i, op) in self.ops.iter().enumerate() {
            let r = |j: &u32| regs[*j as usize];
            let v: Result<f64, DomainKind> = match op {
                Op::Const(c) => Ok(*c),
                Op::Var(j) => Ok(values[*j as usize]),
                Op::Neg(a) => Ok(-r(a)),
                Op::Add(a, b) => Ok(r(a) + r(b)),
                Op::Sub(a, b) => Ok(r(a) - r(b)),
                Op::Mul(a, b) => Ok(r(a) * r(b)),
                Op::Div(a, b) => apply_div(r(a), r(b)),
                Op::PowI(a, k) => apply_powi(r(a), *k),
                Op::Pow(a, b) => apply_pow(r(a), r(b)),
                Op::Call(f, a) => apply_call(*f, r(a)),
            };
            let v = v.map_err(|k| domain(k, &self.nodes[i]))?;
            regs.push(check(v, &self.nodes[i])?);
        }
        Ok(self.outputs.iter().map(|s| regs[*s as usize]).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn xy() -> Vec<String> {
        vec!["x".to_string(), "y".to_string()]
    }

    #[test]
    fn basic_values() {
        let c = xy();
        assert_eq!(evaluate(&parse("x^2", &c).unwrap(), &[("x", 2.0)]).unwrap(), 4.0);
        assert_eq!(evaluate(&parse("sin(y)", &c).unwrap(), &[("y", 0.0)]).unwrap(), 0.0);
        assert_eq!(evaluate(&parse("(-2)^3", &c).unwrap(), &[("x", 0.0)]).unwrap(), -8.0);
    }

    #[test]
    fn pole_is_a_domain_error() {
        let e = parse("1 + 1/x", &xy()).unwrap();
        let err = evaluate(&e, &[("x", 0.0)]).unwrap_err();
        assert_eq!(
            err,
            EvalError::Domain {
                kind: DomainKind::DivisionByZero,
                subexpr: "1/x".to_string()
            }
        );
    }

    #[test]
    fn other_domain_errors() {
        let c = xy();
        let at = |text: &str, x: f64| evaluate(&parse(text, &c).unwrap(), &[("x", x)]);
        assert!(matches!(at("ln(x)", 0.0), Err(EvalError::Domain { kind: DomainKind::LogOfNonPositive, .. })));
        assert!(matches!(at("sqrt(x)", -1.0), Err(EvalError::Domain { kind: DomainKind::SqrtOfNegative, .. })));
        assert!(matches!(at("x^0.5", -1.0), Err(EvalError::Domain { kind: DomainKind::Power, .. })));
        assert!(matches!(at("cot(x)", 0.0), Err(EvalError::Domain { kind: DomainKind::Pole, .. })));
        assert!(matches!(at("y", 0.0), Err(EvalError::Unbound(name)) if name == "y"));
    }

    #[test]
    fn tape_agrees_with_tree_walk() {
        let c = xy();
        let exprs: Vec<Expr> = ["x*y + sin(x)", "exp(x)/y", "x^3 - y^(1/2)", "abs(x - y)"]
            .iter()
            .map(|t| parse(t, &c).unwrap())
            .collect();
        let tape = Tape::compile(&c, &exprs).unwrap();
        let values = tape.eval(&[0.3, 1.7]).unwrap();
        for (e, v) in exprs.iter().zip(values) {
            assert_eq!(evaluate(e, &[("x", 0.3), ("y", 1.7)]).unwrap(), v);
        }
        assert!(tape.eval(&[0.3, 0.0]).is_err());
    }
}
