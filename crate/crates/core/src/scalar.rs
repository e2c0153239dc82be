//! Numeric abstraction shared by the generic parts of the crate.
//!
//! Instances, schedules, the heuristics and the small LP solver are written
//! against [`Scalar`], so they run over `f64`/`f32` as well as exact
//! rationals. The rounding and configuration code needs exact identities and
//! is fixed to [`Rational`](crate::Rational).

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

/// Ordered field-like number type.
pub trait Scalar:
    Num + Signed + Clone + PartialOrd + Debug + Display + FromPrimitive + ToPrimitive + Send + Sync + Sum + 'static
{
    /// True when the value has no fractional part.
    fn is_integral(&self) -> bool;
    fn floor_val(&self) -> Self;
    fn ceil_val(&self) -> Self;
    /// Magnitude below which a value counts as zero. Zero for exact types.
    fn tolerance() -> Self;

    fn of_u64(v: u64) -> Self {
        <Self as FromPrimitive>::from_u64(v).expect("u64 representable")
    }

    fn of_usize(v: usize) -> Self {
        <Self as FromPrimitive>::from_usize(v).expect("usize representable")
    }

    fn approx_zero(&self) -> bool {
        self.abs() <= Self::tolerance()
    }

    fn approx_le(&self, other: &Self) -> bool {
        self.clone() - other.clone() <= Self::tolerance()
    }

    fn half(&self) -> Self {
        self.clone() / (Self::one() + Self::one())
    }
}

macro_rules! float_scalar {
    ($t:ty, $tol:expr) => {
        impl Scalar for $t {
            fn is_integral(&self) -> bool {
                self.fract() == 0.0
            }
            fn floor_val(&self) -> Self {
                self.floor()
            }
            fn ceil_val(&self) -> Self {
                self.ceil()
            }
            fn tolerance() -> Self {
                $tol
            }
        }
    };
}

float_scalar!(f64, 1e-9);
float_scalar!(f32, 1e-5);

impl Scalar for BigRational {
    fn is_integral(&self) -> bool {
        self.is_integer()
    }
    fn floor_val(&self) -> Self {
        self.floor()
    }
    fn ceil_val(&self) -> Self {
        self.ceil()
    }
    fn tolerance() -> Self {
        Self::zero()
    }
}

/// Exact rational from a numerator/denominator pair.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"3"`, `"2.5"`, `"-0.125"` or `"7/36"` into an exact rational.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let s = text.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((a, b)) => (a, b),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let den = num_traits::pow(BigInt::from(10), frac_part.len());
    let r = BigRational::new(num, den);
    Some(if neg { -r } else { r })
}

/// Formats a rational as an integer when integral, otherwise as `num/den`.
pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.to_integer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Decimal rendering with a fixed number of digits after the point.
pub fn rational_to_decimal(r: &BigRational, digits: usize) -> String {
    let scale = num_traits::pow(BigInt::from(10), digits);
    let scaled = (r.abs() * BigRational::from_integer(scale.clone())).round().to_integer();
    let int = &scaled / &scale;
    let frac = &scaled % &scale;
    let sign = if r.is_negative() && !scaled.is_zero() { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{:0>width$}", frac.to_string(), width = digits)
    }
}

/// Smallest integer `c >= 0` with `2^c >= x`.
pub fn ceil_log2(x: &BigRational) -> u32 {
    let mut c = 0u32;
    let mut p = BigRational::one();
    while &p < x {
        p *= BigRational::from_integer(BigInt::from(2));
        c += 1;
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_and_fractions() {
        assert_eq!(parse_rational("2.5"), Some(ratio(5, 2)));
        assert_eq!(parse_rational("7/36"), Some(ratio(7, 36)));
        assert_eq!(parse_rational("-0.125"), Some(ratio(-1, 8)));
        assert_eq!(parse_rational("12"), Some(ratio(12, 1)));
        assert_eq!(parse_rational(".5"), Some(ratio(1, 2)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational(""), None);
    }

    #[test]
    fn formats() {
        assert_eq!(format_rational(&ratio(6, 3)), "2");
        assert_eq!(format_rational(&ratio(7, 36)), "7/36");
        assert_eq!(rational_to_decimal(&ratio(7, 6), 4), "1.1667");
        assert_eq!(rational_to_decimal(&ratio(-1, 8), 2), "-0.13");
    }

    #[test]
    fn log2_ceiling() {
        assert_eq!(ceil_log2(&ratio(4, 1)), 2);
        assert_eq!(ceil_log2(&ratio(5, 1)), 3);
        assert_eq!(ceil_log2(&ratio(1, 2)), 0);
    }
}
