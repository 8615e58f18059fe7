//! Conservative simplification: constant folding, 0/1 identities, and
//! collection of like terms in flattened sums and like bases in flattened
//! products. No trigonometric or other function-level rewriting.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::{Expr, Kind, Number};

// Flattening shared sums can inline the same subtree many times; beyond
// this many terms the node is left as built.
const MAX_FLAT_TERMS: usize = 4096;

/// Returns an expression equal to `e` wherever `e` is defined.
pub fn simplify(e: &Expr) -> Expr {
    Simplifier::default().run(e)
}

#[derive(Default)]
pub(crate) struct Simplifier {
    cache: BTreeMap<usize, (Expr, Expr)>,
}

impl Simplifier {
    pub(crate) fn run(&mut self, e: &Expr) -> Expr {
        if let Some((_, s)) = self.cache.get(&e.id()) {
            return s.clone();
        }
        let s = self.node(e);
        self.cache.insert(e.id(), (e.clone(), s.clone()));
        s
    }

    fn node(&mut self, e: &Expr) -> Expr {
        match e.kind() {
            Kind::Const(_) | Kind::Var(_) => e.clone(),
            Kind::Neg(a) => collect_sum(&self.run(a).neg()),
            Kind::Add(a, b) => collect_sum(&self.run(a).add(&self.run(b))),
            Kind::Sub(a, b) => collect_sum(&self.run(a).sub(&self.run(b))),
            Kind::Mul(a, b) => collect_product(&self.run(a).mul(&self.run(b))),
            Kind::Div(a, b) => collect_product(&self.run(a).div(&self.run(b))),
            Kind::Pow(a, b) => {
                let (base, exp) = (self.run(a), self.run(b));
                if let (Kind::Pow(inner, k1), Some(k2)) = (base.kind(), exp.as_number()) {
                    // (x^a)^b = x^(ab) for integer a and b
                    if let (Some(p), Some(q)) = (k1.as_number().and_then(|n| n.as_integer()), k2.as_integer()) {
                        if let Some(pq) = p.checked_mul(q) {
                            return inner.powi(pq);
                        }
                    }
                }
                base.pow(&exp)
            }
            Kind::Call(f, a) => Expr::call(*f, &self.run(a)),
        }
    }
}

/// Groups structurally equal keys while keeping first-seen order.
struct Grouped {
    entries: Vec<(Expr, Number)>,
    index: BTreeMap<u64, Vec<usize>>,
}

impl Grouped {
    fn new() -> Self {
        Grouped {
            entries: Vec::new(),
            index: BTreeMap::new(),
        }
    }

    fn add(&mut self, key: Expr, amount: Number) {
        let bucket = self.index.entry(key.hash()).or_default();
        for &i in bucket.iter() {
            if self.entries[i].0 == key {
                self.entries[i].1 = self.entries[i].1.add(amount);
                return;
            }
        }
        bucket.push(self.entries.len());
        self.entries.push((key, amount));
    }
}

fn flatten_sum(e: &Expr, sign: Number, constant: &mut Number, terms: &mut Vec<(Expr, Number)>) -> bool {
    if terms.len() > MAX_FLAT_TERMS {
        return false;
    }
    match e.kind() {
        Kind::Add(a, b) => flatten_sum(a, sign, constant, terms) && flatten_sum(b, sign, constant, terms),
        Kind::Sub(a, b) => flatten_sum(a, sign, constant, terms) && flatten_sum(b, sign.neg(), constant, terms),
        Kind::Neg(a) => flatten_sum(a, sign.neg(), constant, terms),
        Kind::Const(c) => {
            *constant = constant.add(c.mul(sign));
            true
        }
        Kind::Mul(a, b) if a.as_number().is_some() => {
            let c = a.as_number().unwrap_or(Number::ONE);
            terms.push((b.clone(), c.mul(sign)));
            true
        }
        _ => {
            terms.push((e.clone(), sign));
            true
        }
    }
}

fn collect_sum(e: &Expr) -> Expr {
    if !matches!(e.kind(), Kind::Add(..) | Kind::Sub(..) | Kind::Neg(_)) {
        return e.clone();
    }
    let mut constant = Number::ZERO;
    let mut terms = Vec::new();
    if !flatten_sum(e, Number::ONE, &mut constant, &mut terms) {
        return e.clone();
    }
    let mut grouped = Grouped::new();
    for (t, c) in terms {
        grouped.add(t, c);
    }
    let mut acc: Option<Expr> = None;
    for (t, c) in grouped.entries {
        if c.is_zero() {
            continue;
        }
        acc = Some(match acc {
            None => t.scale(c),
            Some(a) if c.is_negative() => a.sub(&t.scale(c.neg())),
            Some(a) => a.add(&t.scale(c)),
        });
    }
    match acc {
        None => Expr::number(constant),
        Some(a) if constant.is_negative() => a.sub(&Expr::number(constant.neg())),
        Some(a) => a.add(&Expr::number(constant)),
    }
}

fn flatten_product(e: &Expr, sign: i64, coeff: &mut Number, factors: &mut Vec<(Expr, Number)>) -> bool {
    if factors.len() > MAX_FLAT_TERMS {
        return false;
    }
    match e.kind() {
        Kind::Mul(a, b) => flatten_product(a, sign, coeff, factors) && flatten_product(b, sign, coeff, factors),
        Kind::Div(a, b) => flatten_product(a, sign, coeff, factors) && flatten_product(b, -sign, coeff, factors),
        Kind::Neg(a) => {
            *coeff = coeff.neg();
            flatten_product(a, sign, coeff, factors)
        }
        Kind::Const(c) => match c.powi(sign) {
            Some(v) => {
                *coeff = coeff.mul(v);
                true
            }
            // literal zero divisor: keep the pole visible
            None => false,
        },
        Kind::Pow(base, exp) if exp.as_number().is_some() => {
            let k = exp.as_number().unwrap_or(Number::ONE);
            factors.push((base.clone(), k.mul(Number::int(sign))));
            true
        }
        _ => {
            factors.push((e.clone(), Number::int(sign)));
            true
        }
    }
}

fn collect_product(e: &Expr) -> Expr {
    if !matches!(e.kind(), Kind::Mul(..) | Kind::Div(..)) {
        return e.clone();
    }
    let mut coeff = Number::ONE;
    let mut factors = Vec::new();
    if !flatten_product(e, 1, &mut coeff, &mut factors) {
        return e.clone();
    }
    if coeff.is_zero() {
        return Expr::zero();
    }
    let mut grouped = Grouped::new();
    for (b, k) in factors {
        grouped.add(b, k);
    }
    let mut numerator = Expr::one();
    let mut denominator = Expr::one();
    for (base, k) in grouped.entries {
        if k.is_zero() {
            continue;
        }
        if k.is_negative() {
            denominator = denominator.mul(&base.pow(&Expr::number(k.neg())));
        } else {
            numerator = numerator.mul(&base.pow(&Expr::number(k)));
        }
    }
    numerator.scale(coeff).div(&denominator)
}
