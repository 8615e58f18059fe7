//! Symbolic scalar expressions over chart coordinates.
//!
//! An [`Expr`] is an immutable, reference-counted tree. Subtrees are shared
//! freely, so the pipelines that build curvature tensors produce DAGs rather
//! than trees; differentiation, simplification and compilation all memoize
//! on node identity to keep that sharing intact.
//!
//! The folding constructors ([`Expr::add`], [`Expr::mul`], ...) apply only
//! local, always-sound rewrites (constant folding and 0/1 identities). The
//! parser uses the raw constructors so that a parsed tree mirrors its text.

mod diff;
mod dual;
mod eval;
mod number;
mod parse;
mod print;
pub(crate) mod simplify;

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use core::hash::{Hash, Hasher};

pub use diff::{differentiate, Differentiator};
pub use dual::{evaluate_dual, Dual};
pub use eval::{evaluate, Bindings, DomainKind, EvalError, Tape};
pub use number::Number;
pub use parse::{parse, ParseError};
pub use simplify::simplify;

/// Elementary functions understood by the grammar.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Cot,
    Exp,
    Ln,
    Sinh,
    Cosh,
    Sqrt,
    Abs,
}

impl Func {
    pub const ALL: [Func; 10] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Cot,
        Func::Exp,
        Func::Ln,
        Func::Sinh,
        Func::Cosh,
        Func::Sqrt,
        Func::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Cot => "cot",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Kind {
    Const(Number),
    Var(Arc<str>),
    Neg(Expr),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Pow(Expr, Expr),
    Call(Func, Expr),
}

#[derive(Debug)]
struct Node {
    kind: Kind,
    hash: u64,
}

/// Shared handle to an immutable expression node.
#[derive(Clone)]
pub struct Expr(Arc<Node>);

fn mix(state: u64, value: u64) -> u64 {
    // splitmix64 finalizer over the running state
    let mut z = state ^ value.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(state << 6);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn structural_hash(kind: &Kind) -> u64 {
    match kind {
        Kind::Const(Number::Rational(r)) => mix(mix(1, *r.numer() as u64), *r.denom() as u64),
        Kind::Const(Number::Float(f)) => {
            // 0.0 and -0.0 compare equal, so they must hash equal
            let bits = if *f == 0.0 { 0 } else { f.to_bits() };
            mix(2, bits)
        }
        Kind::Var(name) => name.bytes().fold(3, |h, b| mix(h, b as u64)),
        Kind::Neg(a) => mix(4, a.hash()),
        Kind::Add(a, b) => mix(mix(5, a.hash()), b.hash()),
        Kind::Sub(a, b) => mix(mix(6, a.hash()), b.hash()),
        Kind::Mul(a, b) => mix(mix(7, a.hash()), b.hash()),
        Kind::Div(a, b) => mix(mix(8, a.hash()), b.hash()),
        Kind::Pow(a, b) => mix(mix(9, a.hash()), b.hash()),
        Kind::Call(f, a) => mix(mix(10, *f as u64), a.hash()),
    }
}

impl Expr {
    /// Wraps a node kind without any rewriting.
    pub fn from_kind(kind: Kind) -> Expr {
        let hash = structural_hash(&kind);
        Expr(Arc::new(Node { kind, hash }))
    }

    pub fn kind(&self) -> &Kind {
        &self.0.kind
    }

    /// Structural hash; equal trees hash equal.
    pub fn hash(&self) -> u64 {
        self.0.hash
    }

    /// Identity of the shared node, used as a memoization key.
    pub(crate) fn id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn ptr_eq(&self, other: &Expr) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub fn number(n: Number) -> Expr {
        Expr::from_kind(Kind::Const(n))
    }

    pub fn int(v: i64) -> Expr {
        Expr::number(Number::int(v))
    }

    pub fn ratio(num: i64, den: i64) -> Expr {
        Expr::number(Number::ratio(num, den))
    }

    pub fn float(v: f64) -> Expr {
        Expr::number(Number::Float(v))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn var(name: &str) -> Expr {
        Expr::from_kind(Kind::Var(Arc::from(name)))
    }

    pub fn as_number(&self) -> Option<Number> {
        match self.kind() {
            Kind::Const(n) => Some(*n),
            _ => None,
        }
    }

    /// True only for a literal zero; mathematically vanishing trees that
    /// are not folded to a literal return false.
    pub fn is_zero(&self) -> bool {
        self.as_number().is_some_and(Number::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.as_number().is_some_and(Number::is_one)
    }

    pub fn neg(&self) -> Expr {
        match self.kind() {
            Kind::Const(n) => Expr::number(n.neg()),
            Kind::Neg(inner) => inner.clone(),
            _ => Expr::from_kind(Kind::Neg(self.clone())),
        }
    }

    pub fn add(&self, other: &Expr) -> Expr {
        match (self.as_number(), other.as_number()) {
            (Some(a), Some(b)) => Expr::number(a.add(b)),
            (Some(a), _) if a.is_zero() => other.clone(),
            (_, Some(b)) if b.is_zero() => self.clone(),
            _ => match other.kind() {
                Kind::Neg(inner) => Expr::from_kind(Kind::Sub(self.clone(), inner.clone())),
                _ => Expr::from_kind(Kind::Add(self.clone(), other.clone())),
            },
        }
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        if self.ptr_eq(other) {
            return Expr::zero();
        }
        match (self.as_number(), other.as_number()) {
            (Some(a), Some(b)) => Expr::number(a.sub(b)),
            (Some(a), _) if a.is_zero() => other.neg(),
            (_, Some(b)) if b.is_zero() => self.clone(),
            _ => match other.kind() {
                Kind::Neg(inner) => Expr::from_kind(Kind::Add(self.clone(), inner.clone())),
                _ => Expr::from_kind(Kind::Sub(self.clone(), other.clone())),
            },
        }
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        match (self.as_number(), other.as_number()) {
            (Some(a), Some(b)) => Expr::number(a.mul(b)),
            (Some(a), _) if a.is_zero() => Expr::zero(),
            (_, Some(b)) if b.is_zero() => Expr::zero(),
            (Some(a), _) if a.is_one() => other.clone(),
            (_, Some(b)) if b.is_one() => self.clone(),
            (Some(a), _) if a.is_minus_one() => other.neg(),
            (_, Some(b)) if b.is_minus_one() => self.neg(),
            (_, Some(_)) => Expr::from_kind(Kind::Mul(other.clone(), self.clone())),
            _ => Expr::from_kind(Kind::Mul(self.clone(), other.clone())),
        }
    }

    /// Division. A literal zero numerator folds to zero; a literal zero
    /// denominator is kept so that evaluation reports the pole.
    pub fn div(&self, other: &Expr) -> Expr {
        if let (Some(a), Some(b)) = (self.as_number(), other.as_number()) {
            if let Some(q) = a.div(b) {
                return Expr::number(q);
            }
        }
        if self.is_zero() && !other.is_zero() {
            return Expr::zero();
        }
        if other.is_one() {
            return self.clone();
        }
        if self.ptr_eq(other) {
            return Expr::one();
        }
        Expr::from_kind(Kind::Div(self.clone(), other.clone()))
    }

    pub fn pow(&self, exponent: &Expr) -> Expr {
        if let Some(e) = exponent.as_number() {
            if e.is_zero() {
                return Expr::one();
            }
            if e.is_one() {
                return self.clone();
            }
            if let (Some(base), Some(k)) = (self.as_number(), e.as_integer()) {
                if k.abs() <= 16 {
                    if let Some(v) = base.powi(k) {
                        return Expr::number(v);
                    }
                }
            }
        }
        if self.is_one() {
            return Expr::one();
        }
        Expr::from_kind(Kind::Pow(self.clone(), exponent.clone()))
    }

    pub fn powi(&self, k: i64) -> Expr {
        self.pow(&Expr::int(k))
    }

    pub fn call(f: Func, arg: &Expr) -> Expr {
        if arg.is_zero() {
            match f {
                Func::Sin | Func::Tan | Func::Sinh | Func::Sqrt | Func::Abs => return Expr::zero(),
                Func::Cos | Func::Exp | Func::Cosh => return Expr::one(),
                _ => {}
            }
        }
        if arg.is_one() {
            match f {
                Func::Ln => return Expr::zero(),
                Func::Sqrt | Func::Abs => return Expr::one(),
                _ => {}
            }
        }
        Expr::from_kind(Kind::Call(f, arg.clone()))
    }

    pub fn scale(&self, c: Number) -> Expr {
        Expr::number(c).mul(self)
    }

    /// Balanced sum of the terms, skipping literal zeros. Balancing keeps
    /// the tree depth logarithmic for the long contractions in the
    /// curvature pipelines.
    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        let terms: Vec<Expr> = terms.into_iter().filter(|t| !t.is_zero()).collect();
        balanced(&terms)
    }

    /// Visits every distinct node once.
    pub fn node_count(&self) -> usize {
        count_nodes(core::slice::from_ref(self))
    }

    /// Names of the variables occurring in the tree, sorted and deduplicated.
    pub fn variables(&self) -> Vec<String> {
        let mut names = alloc::collections::BTreeSet::new();
        let mut seen = alloc::collections::BTreeSet::new();
        let mut stack = alloc::vec![self.clone()];
        while let Some(e) = stack.pop() {
            if !seen.insert(e.id()) {
                continue;
            }
            match e.kind() {
                Kind::Const(_) => {}
                Kind::Var(name) => {
                    names.insert(String::from(&**name));
                }
                Kind::Neg(a) | Kind::Call(_, a) => stack.push(a.clone()),
                Kind::Add(a, b)
                | Kind::Sub(a, b)
                | Kind::Mul(a, b)
                | Kind::Div(a, b)
                | Kind::Pow(a, b) => {
                    stack.push(a.clone());
                    stack.push(b.clone());
                }
            }
        }
        names.into_iter().collect()
    }
}

fn balanced(terms: &[Expr]) -> Expr {
    match terms {
        [] => Expr::zero(),
        [t] => t.clone(),
        _ => {
            let (l, r) = terms.split_at(terms.len() / 2);
            balanced(l).add(&balanced(r))
        }
    }
}

/// Number of distinct nodes reachable from `roots`.
pub fn count_nodes(roots: &[Expr]) -> usize {
    let mut seen = alloc::collections::BTreeSet::new();
    let mut stack: Vec<Expr> = roots.to_vec();
    while let Some(e) = stack.pop() {
        if !seen.insert(e.id()) {
            continue;
        }
        match e.kind() {
            Kind::Const(_) | Kind::Var(_) => {}
            Kind::Neg(a) | Kind::Call(_, a) => stack.push(a.clone()),
            Kind::Add(a, b)
            | Kind::Sub(a, b)
            | Kind::Mul(a, b)
            | Kind::Div(a, b)
            | Kind::Pow(a, b) => {
                stack.push(a.clone());
                stack.push(b.clone());
            }
        }
    }
    seen.len()
}

impl PartialEq for Expr {
    fn eq(&self, other: &Expr) -> bool {
        self.ptr_eq(other) || (self.hash() == other.hash() && self.kind() == other.kind())
    }
}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

macro_rules! binary_op {
    ($trait:ident, $method:ident, $inherent:ident) => {
        impl core::ops::$trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::$inherent(self, rhs)
            }
        }
        impl core::ops::$trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$inherent(&self, &rhs)
            }
        }
    };
}

binary_op!(Add, add, add);
binary_op!(Sub, sub, sub);
binary_op!(Mul, mul, mul);
binary_op!(Div, div, div);

impl core::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl core::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folding_constructors() {
        let x = Expr::var("x");
        assert_eq!(Expr::zero().mul(&Expr::call(Func::Sin, &x)), Expr::zero());
        assert_eq!(x.add(&Expr::zero()), x);
        assert_eq!(Expr::int(2).mul(&Expr::int(3)), Expr::int(6));
        assert_eq!(Expr::ratio(1, 2).add(&Expr::ratio(1, 3)), Expr::ratio(5, 6));
        assert_eq!(x.sub(&x), Expr::zero());
        assert_eq!(x.powi(1), x);
        assert_eq!(Expr::call(Func::Cos, &Expr::zero()), Expr::one());
    }

    #[test]
    fn structural_equality_ignores_sharing() {
        let a = Expr::var("x").mul(&Expr::var("y"));
        let b = Expr::var("x").mul(&Expr::var("y"));
        assert!(!a.ptr_eq(&b));
        assert_eq!(a, b);
        assert_ne!(a, Expr::var("y").mul(&Expr::var("x")));
    }

    #[test]
    fn balanced_sum_is_shallow() {
        let terms = (0..1024).map(|i| Expr::var("x").mul(&Expr::int(i + 1)));
        let s = Expr::sum(terms);
        fn depth(e: &Expr) -> usize {
            match e.kind() {
                Kind::Add(a, b) | Kind::Sub(a, b) => 1 + depth(a).max(depth(b)),
                _ => 1,
            }
        }
        assert!(depth(&s) <= 12);
    }

    #[test]
    fn variables_are_collected_once() {
        let x = Expr::var("x");
        let e = x.mul(&x).add(&Expr::call(Func::Sin, &Expr::var("y")));
        assert_eq!(e.variables(), alloc::vec![String::from("x"), String::from("y")]);
    }
}
