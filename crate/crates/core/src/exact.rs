//! Arbitrary-precision integers, rationals and binomial coefficients.
//!
//! Integers and rationals are the `num` crate's `BigInt` and `BigRational`.
//! `Ratio` reduces on construction and keeps a positive denominator, so
//! equality on [`ExactRational`] is value equality.

use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::ParseError;

pub type BigInteger = BigInt;
pub type ExactRational = BigRational;

/// `n!`, with `0! = 1`.
pub fn factorial(n: u64) -> BigInteger {
    (2..=n).fold(BigInt::one(), |acc, i| acc * i)
}

/// Binomial coefficient `C(n, l)`.
///
/// Total over all `l`: anything outside `0..=n` is zero, so lattice
/// recurrences can index unreachable neighbours freely.
pub fn binomial(n: u64, l: i64) -> BigInteger {
    if l < 0 || l as u64 > n {
        return BigInt::zero();
    }
    let l = l as u64;
    let l = l.min(n - l);
    let mut acc = BigInt::one();
    // acc stays integral: after step i it equals C(n - l + i, i).
    for i in 1..=l {
        acc *= n - l + i;
        acc /= i;
    }
    acc
}

/// Falling-factorial binomial `alpha (alpha-1) ... (alpha-l+1) / l!` for
/// rational `alpha`; `1` when `l == 0`.
pub fn generalized_binomial(alpha: &ExactRational, l: u64) -> ExactRational {
    let mut acc = BigRational::one();
    let mut factor = alpha.clone();
    for i in 1..=l {
        acc = acc * &factor / BigRational::from_integer(BigInt::from(i));
        factor -= BigRational::one();
    }
    acc
}

pub fn ratio(numer: i64, denom: i64) -> ExactRational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn integer(v: i64) -> ExactRational {
    BigRational::from_integer(BigInt::from(v))
}

/// `2^-n` as an exact rational.
pub fn inverse_power_of_two(n: u64) -> ExactRational {
    BigRational::new(BigInt::one(), BigInt::one() << n)
}

/// Exact square root of a non-negative rational, if it is itself rational.
pub fn exact_sqrt(value: &ExactRational) -> Option<ExactRational> {
    if value.is_negative() {
        return None;
    }
    let root = |v: &BigInt| {
        let r = v.sqrt();
        (&r * &r == *v).then_some(r)
    };
    // Reduced fraction: the root is rational iff both parts are squares.
    Some(BigRational::new(root(value.numer())?, root(value.denom())?))
}

/// Nearest `f64` to an exact rational, including values whose numerator and
/// denominator individually overflow `f64`.
pub fn to_f64(value: &ExactRational) -> f64 {
    if let Some(v) = value.to_f64() {
        if v.is_finite() && (v != 0.0 || value.is_zero()) {
            return v;
        }
    }
    scaled_to_f64(value)
}

fn scaled_to_f64(value: &ExactRational) -> f64 {
    let (sign, numer) = value.numer().clone().into_parts();
    let denom = value.denom().magnitude().clone();
    // Shift so the integer quotient carries 64 significant bits, then scale back.
    let shift = denom.bits() as i64 - numer.bits() as i64 + 64;
    let quotient = if shift >= 0 {
        (numer << shift as u64) / denom
    } else {
        numer / (denom << (-shift) as u64)
    };
    let magnitude = ldexp(quotient.to_f64().unwrap_or(f64::INFINITY), -shift);
    if sign == Sign::Minus {
        -magnitude
    } else {
        magnitude
    }
}

fn ldexp(mut mantissa: f64, mut exponent: i64) -> f64 {
    const STEP: i64 = 1000;
    while exponent > STEP && mantissa.is_finite() {
        mantissa *= 2f64.powi(STEP as i32);
        exponent -= STEP;
    }
    while exponent < -STEP && mantissa != 0.0 {
        mantissa *= 2f64.powi(-STEP as i32);
        exponent += STEP;
    }
    mantissa * 2f64.powi(exponent as i32)
}

/// Parses `a/b`, an integer, or a terminating decimal into an exact rational.
pub fn parse_rational(text: &str) -> Result<ExactRational, ParseError> {
    let text = text.trim();
    let bad = || ParseError::Rational(text.to_string());
    if let Some((n, d)) = text.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(ParseError::ZeroDenominator(text.to_string()));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((whole, frac)) = text.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = whole.starts_with('-');
        let whole = if whole.is_empty() || whole == "-" || whole == "+" {
            BigInt::zero()
        } else {
            BigInt::from_str(whole).map_err(|_| bad())?
        };
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let frac = BigInt::from_str(frac).map_err(|_| bad())?;
        let magnitude = whole.abs() * &scale + frac;
        let numer = if negative { -magnitude } else { magnitude };
        return Ok(BigRational::new(numer, scale));
    }
    BigInt::from_str(text).map(BigRational::from_integer).map_err(|_| bad())
}

/// True when the rational is an integer power of two in the denominator only,
/// i.e. of the form `m / 2^e`.
pub fn dyadic_exponent(value: &ExactRational) -> Option<u64> {
    let d = value.denom();
    let tz = d.trailing_zeros().unwrap_or(0);
    (d >> tz as usize).is_one().then_some(tz)
}

/// Greatest common divisor of numerator and denominator; `1` for every value
/// built through `Ratio::new`.
pub fn reduction_gcd(value: &ExactRational) -> BigInteger {
    value.numer().gcd(value.denom())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial_oracle(n: u64) -> u128 {
        let mut acc = 1u128;
        let mut i = 1u128;
        while i <= n as u128 {
            acc *= i;
            i += 1;
        }
        acc
    }

    #[test]
    fn factorial_values() {
        assert_eq!(factorial(0), BigInt::from(1));
        assert_eq!(factorial(5), BigInt::from(120));
        assert_eq!(factorial(10), BigInt::from(factorial_oracle(10)));
        assert_eq!(factorial(10), BigInt::from(3_628_800));
        for n in 0..=30 {
            assert_eq!(factorial(n), BigInt::from(factorial_oracle(n)));
        }
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(4, 2), BigInt::from(6));
        assert_eq!(binomial(6, 3), BigInt::from(20));
        assert_eq!(binomial(5, 7), BigInt::zero());
        assert_eq!(binomial(5, -1), BigInt::zero());
        assert_eq!(binomial(0, 0), BigInt::one());
    }

    #[test]
    fn binomial_matches_factorial_formula() {
        for n in 0..40u64 {
            for l in 0..=n {
                let expected = factorial(n) / (factorial(l) * factorial(n - l));
                assert_eq!(binomial(n, l as i64), expected);
            }
        }
    }

    #[test]
    fn pascal_identity_and_row_sum() {
        for n in 1..=200u64 {
            let mut sum = BigInt::zero();
            for l in 0..=n as i64 {
                if l >= 1 {
                    assert_eq!(
                        binomial(n, l),
                        binomial(n - 1, l - 1) + binomial(n - 1, l),
                        "n={n} l={l}"
                    );
                }
                sum += binomial(n, l);
            }
            assert_eq!(sum, BigInt::one() << n);
        }
    }

    #[test]
    fn generalized_binomial_values() {
        assert_eq!(generalized_binomial(&ratio(-1, 2), 2), ratio(3, 8));
        assert_eq!(generalized_binomial(&ratio(1, 2), 1), ratio(1, 2));
        assert_eq!(generalized_binomial(&ratio(7, 3), 0), integer(1));
        assert_eq!(generalized_binomial(&ratio(1, 2), 2), ratio(-1, 8));
        // -1/2 choose 3 = (-1/2)(-3/2)(-5/2)/6
        assert_eq!(generalized_binomial(&ratio(-1, 2), 3), ratio(-5, 16));
    }

    #[test]
    fn generalized_binomial_agrees_on_integers() {
        for k in 0..25i64 {
            for l in 0..30u64 {
                assert_eq!(
                    generalized_binomial(&integer(k), l),
                    BigRational::from_integer(binomial(k as u64, l as i64))
                );
            }
        }
    }

    #[test]
    fn rationals_stay_reduced() {
        let v = generalized_binomial(&ratio(-1, 2), 9) * ratio(6, 4) + ratio(10, 20);
        assert!(reduction_gcd(&v).is_one());
        assert!(v.denom().is_positive());
        let w = ratio(3, -9);
        assert_eq!(w.numer(), &BigInt::from(-1));
        assert_eq!(w.denom(), &BigInt::from(3));
    }

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("1/2").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational(" 6/4 ").unwrap(), ratio(3, 2));
        assert_eq!(parse_rational("3").unwrap(), integer(3));
        assert_eq!(parse_rational("0.25").unwrap(), ratio(1, 4));
        assert_eq!(parse_rational("-0.5").unwrap(), ratio(-1, 2));
        assert_eq!(parse_rational(".5").unwrap(), ratio(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1.").is_err());
    }

    #[test]
    fn sqrt_of_squares() {
        assert_eq!(exact_sqrt(&ratio(9, 25)), Some(ratio(3, 5)));
        assert_eq!(exact_sqrt(&integer(0)), Some(integer(0)));
        assert_eq!(exact_sqrt(&ratio(1, 2)), None);
        assert_eq!(exact_sqrt(&ratio(-1, 4)), None);
    }

    #[test]
    fn huge_rationals_convert() {
        // C(20000, 10000) / 4^10000 is about 1/sqrt(pi * 10000).
        let v = BigRational::new(binomial(20_000, 10_000), BigInt::one() << 20_000u32);
        let f = to_f64(&v);
        assert!((f - 0.005_641_825_633_6).abs() < 1e-9, "{f}");
        assert_eq!(to_f64(&ratio(-3, 4)), -0.75);
        assert_eq!(to_f64(&integer(0)), 0.0);
    }

    #[test]
    fn dyadic() {
        assert_eq!(dyadic_exponent(&ratio(15, 64)), Some(6));
        assert_eq!(dyadic_exponent(&integer(3)), Some(0));
        assert_eq!(dyadic_exponent(&ratio(1, 3)), None);
    }
}
