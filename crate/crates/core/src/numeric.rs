//! Scalar plumbing shared by the series algebra and the solvers.
//!
//! Construction work runs either in exact rationals (when every input is
//! rational) or in 256-bit binary floats. Both implement [`Scalar`], so the
//! truncated-series routines are written once.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rug::float::Constant;
use rug::{Complex, Float, Rational};

use crate::error::{Error, Result};

/// Working precision in bits (about 77 significant decimal digits).
pub const PRECISION: u32 = 256;

/// Field operations needed by the truncated-series algebra.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
    + for<'a> Div<&'a Self, Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(n: i64) -> Self;
    fn from_rational(q: &Rational) -> Self;
    fn is_zero(&self) -> bool;
    /// Absolute value as a float, used for pivoting.
    fn magnitude(&self) -> Float;
}

/// Scalars that live on the real line.
pub trait RealScalar: Scalar {
    fn to_real(&self) -> Float;
    /// The exact value, when the scalar type carries one.
    fn exact(&self) -> Option<Rational>;
}

impl Scalar for Rational {
    fn zero() -> Self {
        Rational::new()
    }
    fn one() -> Self {
        Rational::from(1)
    }
    fn from_i64(n: i64) -> Self {
        Rational::from(n)
    }
    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }
    fn is_zero(&self) -> bool {
        self.cmp0() == std::cmp::Ordering::Equal
    }
    fn magnitude(&self) -> Float {
        Float::with_val(PRECISION, self.clone().abs())
    }
}

impl RealScalar for Rational {
    fn to_real(&self) -> Float {
        Float::with_val(PRECISION, self)
    }
    fn exact(&self) -> Option<Rational> {
        Some(self.clone())
    }
}

impl Scalar for Float {
    fn zero() -> Self {
        Float::new(PRECISION)
    }
    fn one() -> Self {
        Float::with_val(PRECISION, 1)
    }
    fn from_i64(n: i64) -> Self {
        Float::with_val(PRECISION, n)
    }
    fn from_rational(q: &Rational) -> Self {
        Float::with_val(PRECISION, q)
    }
    fn is_zero(&self) -> bool {
        Float::is_zero(self)
    }
    fn magnitude(&self) -> Float {
        Float::with_val(PRECISION, self.abs_ref())
    }
}

impl RealScalar for Float {
    fn to_real(&self) -> Float {
        self.clone()
    }
    fn exact(&self) -> Option<Rational> {
        None
    }
}

impl Scalar for Complex {
    fn zero() -> Self {
        Complex::new(PRECISION)
    }
    fn one() -> Self {
        Complex::with_val(PRECISION, 1)
    }
    fn from_i64(n: i64) -> Self {
        Complex::with_val(PRECISION, n)
    }
    fn from_rational(q: &Rational) -> Self {
        Complex::with_val(PRECISION, q)
    }
    fn is_zero(&self) -> bool {
        Complex::is_zero(self)
    }
    fn magnitude(&self) -> Float {
        Float::with_val(PRECISION, self.abs_ref())
    }
}

pub fn real(x: f64) -> Float {
    Float::with_val(PRECISION, x)
}

pub fn real_q(q: &Rational) -> Float {
    Float::with_val(PRECISION, q)
}

pub fn pi() -> Float {
    Float::with_val(PRECISION, Constant::Pi)
}

pub fn complex(re: &Float, im: &Float) -> Complex {
    Complex::with_val(PRECISION, (re, im))
}

pub fn complex_real(x: &Float) -> Complex {
    Complex::with_val(PRECISION, x)
}

/// `2^-bits`, used for relative tolerances tied to the working precision.
pub fn epsilon(bits: i32) -> Float {
    Float::with_val(PRECISION, Float::i_exp(1, -bits))
}

/// Parses a decimal string (`-1.591962e-2`, `3/10`, `7`) into an exact rational.
pub fn parse_decimal(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::invalid(format!("not a decimal number: {text:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((num, den)) = s.split_once('/') {
        let n = parse_decimal(num)?;
        let d = parse_decimal(den)?;
        if d.is_zero() {
            return Err(Error::invalid(format!("zero denominator in {text:?}")));
        }
        return Ok(n / d);
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let e: i32 = s[pos + 1..].parse().map_err(|_| bad())?;
            (&s[..pos], e)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = Rational::from(
        rug::Integer::from_str_radix(&all_digits, 10).map_err(|_| bad())?,
    );
    let scale = exponent - frac_part.len() as i32;
    let factor = Rational::from(rug::Integer::from(rug::Integer::u_pow_u(10, scale.unsigned_abs())));
    if scale >= 0 {
        value *= factor;
    } else {
        value /= factor;
    }
    if negative {
        value = -value;
    }
    Ok(value)
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
///
/// Returns `None` when a pivot falls below `rel_tol` times the largest entry
/// of its column block, i.e. the system is numerically singular. With
/// `rel_tol = 0` only an exactly zero pivot is rejected (the exact-rational case).
pub fn solve_linear<T: Scalar>(mut a: Vec<Vec<T>>, mut b: Vec<T>, rel_tol: &Float) -> Option<Vec<T>> {
    let n = b.len();
    let scale = a
        .iter()
        .flat_map(|row| row.iter().map(Scalar::magnitude))
        .fold(Float::new(PRECISION), |m, x| if x > m { x } else { m });
    if scale.is_zero() {
        return None;
    }
    let threshold = scale * rel_tol;
    for col in 0..n {
        let (pivot_row, pivot_mag) = (col..n)
            .map(|r| (r, a[r][col].magnitude()))
            .fold((col, Float::new(PRECISION)), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot_mag.is_zero() || pivot_mag <= threshold {
            return None;
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone() / &a[col][col];
            for c in col..n {
                let delta = factor.clone() * &a[col][c];
                a[r][c] = a[r][c].clone() - &delta;
            }
            let delta = factor * &b[col];
            b[r] = b[r].clone() - &delta;
        }
    }
    let mut x = vec![T::zero(); n];
    for r in (0..n).rev() {
        let mut acc = b[r].clone();
        for c in r + 1..n {
            acc = acc - &(a[r][c].clone() * &x[c]);
        }
        x[r] = acc / &a[r][r];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_strings_parse_exactly() {
        assert_eq!(parse_decimal("-1.591962e-2").unwrap(), Rational::from((-1591962, 100_000_000)));
        assert_eq!(parse_decimal("3/10").unwrap(), Rational::from((3, 10)));
        assert_eq!(parse_decimal("1329733.72705").unwrap(), Rational::from((132973372705i64, 100000)));
        assert_eq!(parse_decimal("+.5").unwrap(), Rational::from((1, 2)));
        assert_eq!(parse_decimal("2E3").unwrap(), Rational::from(2000));
        assert!(parse_decimal("1.2.3").is_err());
        assert!(parse_decimal("abc").is_err());
        assert!(parse_decimal("1/0").is_err());
        assert!(parse_decimal("").is_err());
    }

    #[test]
    fn linear_solve_exact_and_singular() {
        let q = |n: i64| Rational::from(n);
        let a = vec![vec![q(2), q(1)], vec![q(1), q(3)]];
        let x = solve_linear(a, vec![q(3), q(5)], &Float::new(PRECISION)).unwrap();
        assert_eq!(x, vec![Rational::from((4, 5)), Rational::from((7, 5))]);

        let singular = vec![vec![q(1), q(2)], vec![q(2), q(4)]];
        assert!(solve_linear(singular, vec![q(1), q(2)], &Float::new(PRECISION)).is_none());
    }

    #[test]
    fn epsilon_is_a_power_of_two() {
        assert_eq!(epsilon(10).to_f64(), 1.0 / 1024.0);
    }
}
