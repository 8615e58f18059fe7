use alloc::string::String;
use core::fmt::{self, Write};

use super::{Expr, Kind, Number};

// Grammar levels: expr < term < factor < base.
const SUM: u8 = 0;
const TERM: u8 = 1;
const FACTOR: u8 = 2;
const BASE: u8 = 3;

fn level(e: &Expr) -> u8 {
    match e.kind() {
        Kind::Add(..) | Kind::Sub(..) => SUM,
        Kind::Mul(..) | Kind::Div(..) => TERM,
        Kind::Pow(..) => FACTOR,
        Kind::Const(_) | Kind::Var(_) | Kind::Neg(_) | Kind::Call(..) => BASE,
    }
}

fn write_number(f: &mut impl Write, n: Number) -> fmt::Result {
    if let Some(text) = n.terminating_decimal() {
        return f.write_str(&text);
    }
    // Negative or non-terminating constants have no literal form; the
    // parenthesized text parses back to an equal value.
    match n {
        Number::Float(v) if v >= 0.0 => write!(f, "{v}"),
        Number::Float(v) => write!(f, "(-{})", -v),
        Number::Rational(_) if n.is_negative() => write!(f, "(-{})", n.neg()),
        Number::Rational(_) => write!(f, "({n})"),
    }
}

fn write_at(f: &mut impl Write, e: &Expr, min: u8) -> fmt::Result {
    if level(e) < min {
        f.write_char('(')?;
        write_at(f, e, SUM)?;
        return f.write_char(')');
    }
    match e.kind() {
        Kind::Const(n) => write_number(f, *n),
        Kind::Var(name) => f.write_str(name),
        Kind::Neg(a) => {
            f.write_char('-')?;
            write_at(f, a, BASE)
        }
        Kind::Add(a, b) => {
            write_at(f, a, SUM)?;
            f.write_str(" + ")?;
            write_at(f, b, TERM)
        }
        Kind::Sub(a, b) => {
            write_at(f, a, SUM)?;
            f.write_str(" - ")?;
            write_at(f, b, TERM)
        }
        Kind::Mul(a, b) => {
            write_at(f, a, TERM)?;
            f.write_char('*')?;
            write_at(f, b, FACTOR)
        }
        Kind::Div(a, b) => {
            write_at(f, a, TERM)?;
            f.write_char('/')?;
            write_at(f, b, FACTOR)
        }
        Kind::Pow(a, b) => {
            write_at(f, a, BASE)?;
            f.write_char('^')?;
            write_at(f, b, FACTOR)
        }
        Kind::Call(func, a) => {
            f.write_str(func.name())?;
            f.write_char('(')?;
            write_at(f, a, SUM)?;
            f.write_char(')')
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_at(f, self, SUM)
    }
}

/// Printed form cut to `max` characters, for error messages about
/// subexpressions of large trees.
pub(crate) fn abbreviate(e: &Expr, max: usize) -> String {
    struct Capped {
        out: String,
        room: usize,
    }
    impl Write for Capped {
        fn write_str(&mut self, s: &str) -> fmt::Result {
            for c in s.chars() {
                if self.room == 0 {
                    return Err(fmt::Error);
                }
                self.out.push(c);
                self.room -= 1;
            }
            Ok(())
        }
    }
    let mut cap = Capped {
        out: String::new(),
        room: max,
    };
    if write_at(&mut cap, e, SUM).is_err() {
        cap.out.push_str("...");
    }
    cap.out
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;
    use alloc::string::ToString;
    use alloc::vec::Vec;

    fn xy() -> Vec<String> {
        ["x", "y"].iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parenthesizes_only_where_needed() {
        for text in [
            "x^2*sin(y)",
            "(x + y)*x",
            "x - (y - x)",
            "x/(y*x)",
            "-(x^2)",
            "(-x)^2",
            "2^3^x",
            "(2^3)^x",
            "x + -y",
            "0.25*x",
        ] {
            let e = parse(text, &xy()).unwrap();
            let printed = e.to_string();
            assert_eq!(parse(&printed, &xy()).unwrap(), e, "{text} -> {printed}");
        }
    }

    #[test]
    fn non_literal_constants() {
        assert_eq!(Expr::ratio(1, 3).to_string(), "(1/3)");
        assert_eq!(Expr::int(-2).to_string(), "(-2)");
        assert_eq!(Expr::int(2).mul(&Expr::var("x")).to_string(), "2*x");
    }

    #[test]
    fn abbreviation() {
        let e = parse("sin(x) + cos(y) + x*y", &xy()).unwrap();
        assert_eq!(abbreviate(&e, 6), "sin(x)...");
        assert_eq!(abbreviate(&e, 100), e.to_string());
    }
}
