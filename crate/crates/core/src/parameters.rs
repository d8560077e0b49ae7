//! Parameter bookkeeping for `(g, r, d, m)` and `(r, s, rho, m)`.
//!
//! The two coordinate systems are related by `s = g - d + r` and
//! `rho = g - (r + 1) s`, hence `g = (r + 1) s + rho` and `d = g + r - s`.
//! (The shorter `g = r s + rho` that sometimes circulates is a misprint: it
//! contradicts the definition of `rho` and every worked example.)

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `r + m` for which `C(r + m, m)` is guaranteed to fit in a `u128`.
const MAX_BINOM_TOP: u64 = 120;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ParameterQuadruple {
    pub r: u32,
    pub s: u32,
    pub rho: u32,
    pub m: u32,
    pub g: u32,
    pub d: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RangeKind {
    Injective,
    Surjective,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RangeClass {
    pub kind: RangeKind,
    /// `C(r + m, m)`, the number of multisets of size `m` over `0..=r`.
    pub binom: u128,
    /// `m d - g + 1`.
    pub sections: i64,
    pub target_size: u128,
}

impl ParameterQuadruple {
    pub fn from_rsrho(r: u32, s: u32, rho: u32, m: u32) -> Result<Self> {
        if r == 0 || s == 0 || m == 0 {
            return Err(Error::InvalidParameters(format!(
                "r, s and m must be positive (got r={r}, s={s}, m={m})"
            )));
        }
        if r as u64 + m as u64 > MAX_BINOM_TOP {
            return Err(Error::InvalidParameters(format!(
                "r + m = {} exceeds the supported maximum {MAX_BINOM_TOP}",
                r as u64 + m as u64
            )));
        }
        let g = (r as u64 + 1)
            .checked_mul(s as u64)
            .and_then(|x| x.checked_add(rho as u64))
            .filter(|&g| g <= u32::MAX as u64)
            .ok_or_else(|| Error::InvalidParameters("genus overflows".into()))?;
        let d = g + r as u64 - s as u64;
        Ok(Self {
            r,
            s,
            rho,
            m,
            g: g as u32,
            d: d as u32,
        })
    }

    /// Build from `(g, r, d, m)`; requires `d < g + r` and `g >= (r + 1)(g - d + r)`.
    pub fn from_grdm(g: u32, r: u32, d: u32, m: u32) -> Result<Self> {
        let s = g as i64 - d as i64 + r as i64;
        if s < 1 {
            return Err(Error::InvalidParameters(format!(
                "need d < g + r (got g={g}, r={r}, d={d})"
            )));
        }
        let rho = g as i64 - (r as i64 + 1) * s;
        if rho < 0 {
            return Err(Error::InvalidParameters(format!(
                "Brill-Noether number g - (r+1)(g-d+r) = {rho} is negative"
            )));
        }
        Self::from_rsrho(r, s as u32, rho as u32, m)
    }

    pub fn genus(&self) -> usize {
        self.g as usize
    }

    pub fn rank(&self) -> usize {
        self.r as usize
    }

    pub fn classify_range(&self) -> RangeClass {
        let binom = binomial(self.r as u64 + self.m as u64, self.m as u64);
        let sections = self.m as i64 * self.d as i64 - self.g as i64 + 1;
        let kind = match (binom as i128).cmp(&(sections as i128)) {
            std::cmp::Ordering::Less => RangeKind::Injective,
            std::cmp::Ordering::Greater => RangeKind::Surjective,
            std::cmp::Ordering::Equal => RangeKind::Both,
        };
        let target_size = binom.min(sections.max(0) as u128);
        RangeClass {
            kind,
            binom,
            sections,
            target_size,
        }
    }

    pub fn is_injective(&self) -> bool {
        matches!(
            self.classify_range().kind,
            RangeKind::Injective | RangeKind::Both
        )
    }

    pub fn is_surjective(&self) -> bool {
        matches!(
            self.classify_range().kind,
            RangeKind::Surjective | RangeKind::Both
        )
    }
}

impl fmt::Display for ParameterQuadruple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(r,s,rho,m)=({},{},{},{}) g={} d={}",
            self.r, self.s, self.rho, self.m, self.g, self.d
        )
    }
}

/// `C(n, k)`; saturates at `u128::MAX`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc.to_u128().unwrap_or(u128::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(r: u32, s: u32, rho: u32, m: u32) -> ParameterQuadruple {
        ParameterQuadruple::from_rsrho(r, s, rho, m).unwrap()
    }

    #[test]
    fn worked_examples() {
        let a = p(3, 2, 0, 3);
        assert_eq!((a.g, a.d), (8, 9));
        let c = p(2, 1, 0, 3);
        assert_eq!((c.g, c.d), (3, 4));
        let t = p(1, 1, 0, 1);
        assert_eq!((t.g, t.d), (2, 2));
    }

    #[test]
    fn rejects_non_positive() {
        assert!(ParameterQuadruple::from_rsrho(0, 1, 0, 1).is_err());
        assert!(ParameterQuadruple::from_rsrho(1, 0, 0, 1).is_err());
        assert!(ParameterQuadruple::from_rsrho(1, 1, 0, 0).is_err());
    }

    #[test]
    fn grdm_validation() {
        // d >= g + r
        assert!(ParameterQuadruple::from_grdm(3, 2, 5, 2).is_err());
        // negative Brill-Noether number
        assert!(ParameterQuadruple::from_grdm(3, 2, 3, 2).is_err());
        assert_eq!(
            ParameterQuadruple::from_grdm(8, 3, 9, 3).unwrap(),
            p(3, 2, 0, 3)
        );
    }

    #[test]
    fn range_examples() {
        let rc = p(3, 2, 0, 3).classify_range();
        assert_eq!(rc.kind, RangeKind::Both);
        assert_eq!((rc.binom, rc.sections, rc.target_size), (20, 20, 20));

        for m in 1..8 {
            let rc = p(2, 1, 0, m).classify_range();
            assert_eq!(rc.target_size, 4 * m as u128 - 2);
        }

        // r = s = 5: g = d = 30, C(8,3) = 56 < 3*30 - 30 + 1 = 61
        let rc = p(5, 5, 0, 3).classify_range();
        assert_eq!(p(5, 5, 0, 3).g, 30);
        assert_eq!(rc.kind, RangeKind::Injective);
        assert_eq!(rc.binom, 56);
        assert_eq!(rc.sections, 61);
        assert_eq!(rc.target_size, 56);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(6, 3), 20);
        assert_eq!(binomial(8, 3), 56);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(
            binomial(120, 60),
            96_614_908_840_363_322_603_893_139_521_372_656
        );
    }

    #[test]
    fn roundtrip_small() {
        for r in 1..=8 {
            for s in 1..=8 {
                for rho in 0..=8 {
                    let a = p(r, s, rho, 2);
                    let b = ParameterQuadruple::from_grdm(a.g, a.r, a.d, a.m).unwrap();
                    assert_eq!(a, b);
                }
            }
        }
    }

    #[test]
    fn range_monotonicity() {
        for r in 1..=7 {
            for s in 1..=7 {
                for rho in 0..=7 {
                    for m in 1..=5 {
                        let a = p(r, s, rho, m);
                        if a.is_injective() {
                            assert!(p(r, s, rho + 1, m).is_injective());
                            assert!(p(r, s + 1, rho, m).is_injective());
                        }
                        if a.is_surjective() && r >= s {
                            assert!(p(r + 1, s, rho, m).is_surjective(), "{a}");
                        }
                    }
                }
            }
        }
    }
}
