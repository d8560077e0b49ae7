//! Exact rational helpers. Rationals are serialized as `"p/q"` strings.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn to_string(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn parse(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::BadRational(s.to_string());
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Q::new(n, d))
}

pub fn is_positive(x: &Q) -> bool {
    x.is_positive()
}

pub fn half(x: &Q) -> Q {
    x / Q::from_integer(BigInt::from(2))
}

pub fn one() -> Q {
    Q::one()
}

/// The first `count` primes strictly greater than `above`.
pub fn primes_above(above: u64, count: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut n = above + 1;
    while out.len() < count {
        if is_prime(n) {
            out.push(n);
        }
        n += 1;
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Serde adapter for `Q` as a `"p/q"` string.
pub mod serde_q {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&to_string(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        parse(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for `Vec<Q>`.
pub mod serde_vec_q {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(xs: &[Q], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(xs.iter().map(to_string))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Q>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| parse(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        assert_eq!(parse("3/6").unwrap(), frac(1, 2));
        assert_eq!(parse(" -4 ").unwrap(), q(-4));
        assert_eq!(to_string(&q(5)), "5/1");
        assert!(parse("1/0").is_err());
        assert!(parse("x").is_err());
    }

    #[test]
    fn primes() {
        assert_eq!(primes_above(4, 3), vec![5, 7, 11]);
    }
}
