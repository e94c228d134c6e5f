//! Exact rational helpers.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"p/q"`, `"-p/q"` or an integer literal.
pub fn parse_q(s: &str) -> Result<Q> {
    let t = s.trim();
    let bad = || Error::Structural(format!("not an exact rational: {s:?}"));
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (t, "1"),
    };
    let n: BigInt = num.parse().map_err(|_| bad())?;
    let d: BigInt = den.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(Error::Structural(format!("zero denominator in {s:?}")));
    }
    Ok(Q::new(n, d))
}

pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Accepts JSON strings and integers.
pub fn q_from_json(v: &serde_json::Value) -> Result<Q> {
    match v {
        serde_json::Value::String(s) => parse_q(s),
        serde_json::Value::Number(n) if n.is_i64() => Ok(q(n.as_i64().unwrap())),
        serde_json::Value::Number(n) if n.is_u64() => {
            Ok(Q::from_integer(BigInt::from(n.as_u64().unwrap())))
        }
        other => Err(Error::Structural(format!(
            "expected rational string or integer, got {other}"
        ))),
    }
}

/// Truncated decimal rendering with `digits` fractional digits.
pub fn to_decimal(x: &Q, digits: usize) -> String {
    let neg = x.is_negative();
    let a = x.abs();
    let scale = BigInt::from(10).pow(digits as u32);
    let scaled = (a.numer() * &scale).div_floor(a.denom());
    let (ip, fp) = scaled.div_mod_floor(&scale);
    let mut s = String::new();
    if neg && !scaled.is_zero() {
        s.push('-');
    }
    s.push_str(&ip.to_string());
    if digits > 0 {
        let f = fp.to_string();
        s.push('.');
        for _ in f.len()..digits {
            s.push('0');
        }
        s.push_str(&f);
    }
    s
}

/// Rounds down to a multiple of `1/den`.
pub fn floor_to(x: &Q, den: &BigInt) -> Q {
    let n = (x.numer() * den).div_floor(x.denom());
    Q::new(n, den.clone())
}

pub fn pow(x: &Q, k: usize) -> Q {
    let mut r = Q::one();
    for _ in 0..k {
        r *= x;
    }
    r
}

pub fn to_f64(x: &Q) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

pub mod serde_q {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Q, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        q_from_json(&v).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_q("3/18").unwrap(), qr(1, 6));
        assert_eq!(parse_q("-4").unwrap(), q(-4));
        assert_eq!(fmt_q(&qr(6, 4)), "3/2");
        assert_eq!(fmt_q(&q(-7)), "-7");
        assert!(parse_q("0.5").is_err());
        assert!(parse_q("1/0").is_err());
    }

    #[test]
    fn decimals() {
        assert_eq!(to_decimal(&qr(1, 3), 4), "0.3333");
        assert_eq!(to_decimal(&qr(-5, 2), 2), "-2.50");
        assert_eq!(to_decimal(&q(7), 0), "7");
    }

    #[test]
    fn floor_grid() {
        let den = BigInt::from(100);
        assert_eq!(floor_to(&qr(1, 3), &den), qr(33, 100));
        assert_eq!(floor_to(&qr(1, 4), &den), qr(1, 4));
    }
}
