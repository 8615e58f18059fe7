use core::fmt;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, Signed, Zero};

/// A numeric literal. Literals stay exact rationals until an operation
/// overflows `i64`, at which point they degrade to `f64`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Number {
    Rational(Ratio<i64>),
    Float(f64),
}

impl Number {
    pub const ZERO: Number = Number::Rational(Ratio::new_raw(0, 1));
    pub const ONE: Number = Number::Rational(Ratio::new_raw(1, 1));

    pub fn int(v: i64) -> Self {
        Number::Rational(Ratio::from_integer(v))
    }

    /// `num/den` reduced; `den` must be non-zero.
    pub fn ratio(num: i64, den: i64) -> Self {
        Number::Rational(Ratio::new(num, den))
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Number::Rational(r) => *r.numer() as f64 / *r.denom() as f64,
            Number::Float(f) => f,
        }
    }

    pub fn is_zero(self) -> bool {
        match self {
            Number::Rational(r) => r.is_zero(),
            Number::Float(f) => f == 0.0,
        }
    }

    pub fn is_one(self) -> bool {
        match self {
            Number::Rational(r) => *r.numer() == 1 && *r.denom() == 1,
            Number::Float(f) => f == 1.0,
        }
    }

    pub fn is_minus_one(self) -> bool {
        match self {
            Number::Rational(r) => *r.numer() == -1 && *r.denom() == 1,
            Number::Float(f) => f == -1.0,
        }
    }

    pub fn is_negative(self) -> bool {
        match self {
            Number::Rational(r) => r.is_negative(),
            Number::Float(f) => f < 0.0,
        }
    }

    /// The value as an integer, if it is one exactly.
    pub fn as_integer(self) -> Option<i64> {
        match self {
            Number::Rational(r) if r.is_integer() => Some(*r.numer()),
            _ => None,
        }
    }

    pub fn neg(self) -> Number {
        match self {
            Number::Rational(r) => match 0i64.checked_sub(*r.numer()) {
                Some(n) => Number::Rational(Ratio::new_raw(n, *r.denom())),
                None => Number::Float(-self.to_f64()),
            },
            Number::Float(f) => Number::Float(-f),
        }
    }

    pub fn add(self, other: Number) -> Number {
        self.exact_or_float(other, |a, b| a.checked_add(b), |a, b| a + b)
    }

    pub fn sub(self, other: Number) -> Number {
        self.exact_or_float(other, |a, b| a.checked_sub(b), |a, b| a - b)
    }

    pub fn mul(self, other: Number) -> Number {
        self.exact_or_float(other, |a, b| a.checked_mul(b), |a, b| a * b)
    }

    /// Division; `None` when dividing by an exact zero.
    pub fn div(self, other: Number) -> Option<Number> {
        if other.is_zero() {
            return None;
        }
        Some(self.exact_or_float(other, |a, b| a.checked_div(b), |a, b| a / b))
    }

    /// Exact integer power when the result fits; `None` for `0^negative`.
    pub fn powi(self, exp: i64) -> Option<Number> {
        if self.is_zero() && exp < 0 {
            return None;
        }
        match self {
            Number::Rational(r) => {
                let mut acc = Some(Ratio::from_integer(1i64));
                for _ in 0..exp.unsigned_abs().min(64) {
                    acc = acc.and_then(|a| a.checked_mul(&r));
                }
                match acc {
                    Some(a) if exp.unsigned_abs() <= 64 => {
                        if exp < 0 {
                            Some(Number::Rational(a.recip()))
                        } else {
                            Some(Number::Rational(a))
                        }
                    }
                    _ => Some(Number::Float(libm::pow(self.to_f64(), exp as f64))),
                }
            }
            Number::Float(f) => Some(Number::Float(libm::pow(f, exp as f64))),
        }
    }

    fn exact_or_float(
        self,
        other: Number,
        exact: impl Fn(&Ratio<i64>, &Ratio<i64>) -> Option<Ratio<i64>>,
        float: impl Fn(f64, f64) -> f64,
    ) -> Number {
        if let (Number::Rational(a), Number::Rational(b)) = (self, other) {
            if let Some(r) = exact(&a, &b) {
                return Number::Rational(r);
            }
        }
        Number::Float(float(self.to_f64(), other.to_f64()))
    }

    /// Decimal digits of a non-negative rational whose denominator is
    /// `2^a 5^b`, e.g. `1/4 -> "0.25"`.
    pub(crate) fn terminating_decimal(self) -> Option<alloc::string::String> {
        use alloc::format;
        let Number::Rational(r) = self else {
            return None;
        };
        if r.is_negative() {
            return None;
        }
        let (num, den) = (*r.numer() as i128, *r.denom() as i128);
        if den == 1 {
            return Some(format!("{num}"));
        }
        let mut rest = den;
        let (mut twos, mut fives) = (0u32, 0u32);
        while rest % 2 == 0 {
            rest /= 2;
            twos += 1;
        }
        while rest % 5 == 0 {
            rest /= 5;
            fives += 1;
        }
        if rest != 1 {
            return None;
        }
        let places = twos.max(fives);
        let scale = 10i128.checked_pow(places)?;
        let scaled = num.checked_mul(scale / den)?;
        let int_part = scaled / scale;
        let frac_part = scaled % scale;
        Some(format!("{int_part}.{frac_part:0width$}", width = places as usize))
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Rational(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Number::Rational(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Number::Float(v) => write!(f, "{v}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overflow_degrades_to_float() {
        let big = Number::int(i64::MAX);
        assert!(matches!(big.add(Number::ONE), Number::Float(_)));
        assert_eq!(Number::int(2).add(Number::int(3)), Number::int(5));
    }

    #[test]
    fn terminating_decimals() {
        assert_eq!(Number::ratio(1, 4).terminating_decimal().as_deref(), Some("0.25"));
        assert_eq!(Number::ratio(3, 40).terminating_decimal().as_deref(), Some("0.075"));
        assert_eq!(Number::ratio(1, 3).terminating_decimal(), None);
        assert_eq!(Number::int(-2).terminating_decimal(), None);
    }

    #[test]
    fn exact_powers() {
        assert_eq!(Number::ratio(2, 3).powi(-2), Some(Number::ratio(9, 4)));
        assert_eq!(Number::ZERO.powi(-1), None);
    }
}
