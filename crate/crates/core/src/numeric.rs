//! Small exact-arithmetic helpers shared across modules.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

/// `sqrt(n)` as a float. Display only.
pub fn sqrt_int_f64(n: &BigInt) -> f64 {
    n.to_f64().unwrap_or(f64::INFINITY).sqrt()
}

/// `sqrt(q)` as a float. Display only.
pub fn sqrt_rational_f64(q: &BigRational) -> f64 {
    rational_to_f64(q).sqrt()
}

pub fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        let n = q.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = q.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

/// Exact integer square root if `n` is a perfect square.
pub fn exact_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

/// Renders a rational as `a` or `a/b`.
pub fn fmt_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.to_integer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses `a`, `-a`, `a/b` or a finite decimal such as `7.5` into an exact
/// rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let negative = whole.starts_with('-');
        let w: BigInt = if whole.is_empty() || whole == "-" {
            BigInt::zero()
        } else {
            whole.parse().ok()?
        };
        let scale = BigInt::from(10).pow(frac.len() as u32);
        let f: BigInt = frac.parse().ok()?;
        let mut num = w.abs() * &scale + f;
        if negative {
            num = -num;
        }
        return Some(BigRational::new(num, scale));
    }
    s.parse::<BigInt>().ok().map(BigRational::from_integer)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_round_trip() {
        for s in ["3", "-4", "773/16", "-1/2"] {
            assert_eq!(fmt_rational(&parse_rational(s).unwrap()), s);
        }
        assert_eq!(fmt_rational(&parse_rational("7.25").unwrap()), "29/4");
        assert_eq!(fmt_rational(&parse_rational("-0.5").unwrap()), "-1/2");
        assert!(parse_rational("1/0").is_none());
        assert!(parse_rational("x").is_none());
    }

    #[test]
    fn perfect_squares() {
        assert_eq!(exact_sqrt(&BigInt::from(3730 - 61 * 61)), Some(3.into()));
        assert_eq!(exact_sqrt(&BigInt::from(3730 - 60 * 60)), None);
        assert_eq!(exact_sqrt(&BigInt::from(1009)), None);
        assert_eq!(exact_sqrt(&BigInt::from(841)), Some(29.into()));
        assert_eq!(exact_sqrt(&BigInt::from(0)), Some(0.into()));
    }
}
