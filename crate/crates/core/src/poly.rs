//! Exact polynomials in the formal variable `u` with unbounded nonnegative
//! integer coefficients.
//!
//! The coefficient of `u^k` in a Hamming-distance polynomial counts ordered
//! pairs of solutions at distance `k`, so counts up to `4^n` must be exact.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul};

use num_bigint::BigUint;
use num_traits::{One, Zero};

/// A sparse polynomial in `u`. Zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct HDPoly {
    coeffs: BTreeMap<u32, BigUint>,
}

impl HDPoly {
    pub fn zero() -> Self {
        HDPoly::default()
    }

    pub fn one() -> Self {
        HDPoly::monomial(0, 1u32)
    }

    /// The monomial `u`.
    pub fn u() -> Self {
        HDPoly::monomial(1, 1u32)
    }

    pub fn monomial(degree: u32, coeff: impl Into<BigUint>) -> Self {
        let coeff = coeff.into();
        let mut coeffs = BTreeMap::new();
        if !coeff.is_zero() {
            coeffs.insert(degree, coeff);
        }
        HDPoly { coeffs }
    }

    /// Per-variable base weight: `u` when the two sides disagree, `1` otherwise.
    pub fn q(side1: bool, side2: bool) -> Self {
        if side1 != side2 {
            HDPoly::u()
        } else {
            HDPoly::one()
        }
    }

    /// Builds a polynomial from `(degree, coefficient)` terms, summing
    /// repeated degrees and dropping zeros.
    pub fn from_terms<I, C>(terms: I) -> Self
    where
        I: IntoIterator<Item = (u32, C)>,
        C: Into<BigUint>,
    {
        let mut p = HDPoly::zero();
        for (k, c) in terms {
            p.add_term(k, c.into());
        }
        p
    }

    fn add_term(&mut self, degree: u32, coeff: BigUint) {
        if coeff.is_zero() {
            return;
        }
        *self.coeffs.entry(degree).or_insert_with(BigUint::zero) += coeff;
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<u32> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn coeff(&self, degree: u32) -> BigUint {
        self.coeffs.get(&degree).cloned().unwrap_or_default()
    }

    /// Nonzero terms in ascending degree order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (u32, &BigUint)> + '_ {
        self.coeffs.iter().map(|(k, c)| (*k, c))
    }

    /// Sum of all coefficients, i.e. the value at `u = 1`.
    pub fn coeff_sum(&self) -> BigUint {
        self.coeffs.values().sum()
    }

    /// `[[degree, "coefficient"], ...]` ascending by degree.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.terms()
                .map(|(k, c)| serde_json::json!([k, c.to_string()]))
                .collect(),
        )
    }

    pub fn from_json(value: &serde_json::Value) -> Option<Self> {
        let mut p = HDPoly::zero();
        for pair in value.as_array()? {
            let pair = pair.as_array()?;
            if pair.len() != 2 {
                return None;
            }
            let k = u32::try_from(pair[0].as_u64()?).ok()?;
            let c: BigUint = pair[1].as_str()?.parse().ok()?;
            p.add_term(k, c);
        }
        Some(p)
    }
}

impl fmt::Display for HDPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (k, c)) in self.terms().rev().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            match k {
                0 => write!(f, "{c}")?,
                1 if c.is_one() => f.write_str("u")?,
                1 => write!(f, "{c}*u")?,
                _ if c.is_one() => write!(f, "u^{k}")?,
                _ => write!(f, "{c}*u^{k}")?,
            }
        }
        Ok(())
    }
}

impl AddAssign<&HDPoly> for HDPoly {
    fn add_assign(&mut self, rhs: &HDPoly) {
        for (k, c) in rhs.terms() {
            *self.coeffs.entry(k).or_insert_with(BigUint::zero) += c;
        }
    }
}

impl AddAssign for HDPoly {
    fn add_assign(&mut self, rhs: HDPoly) {
        if self.is_zero() {
            *self = rhs;
        } else {
            *self += &rhs;
        }
    }
}

impl Add for &HDPoly {
    type Output = HDPoly;

    fn add(self, rhs: &HDPoly) -> HDPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for HDPoly {
    type Output = HDPoly;

    fn add(mut self, rhs: HDPoly) -> HDPoly {
        self += rhs;
        self
    }
}

impl Mul for &HDPoly {
    type Output = HDPoly;

    fn mul(self, rhs: &HDPoly) -> HDPoly {
        if self.is_zero() || rhs.is_zero() {
            return HDPoly::zero();
        }
        // Fast path for the very common `1 * p`.
        if self.coeffs.len() == 1 && self.coeffs.get(&0).is_some_and(One::is_one) {
            return rhs.clone();
        }
        if rhs.coeffs.len() == 1 && rhs.coeffs.get(&0).is_some_and(One::is_one) {
            return self.clone();
        }
        let mut out = HDPoly::zero();
        for (ka, ca) in self.terms() {
            for (kb, cb) in rhs.terms() {
                *out.coeffs.entry(ka + kb).or_insert_with(BigUint::zero) += ca * cb;
            }
        }
        out
    }
}

impl Mul for HDPoly {
    type Output = HDPoly;

    fn mul(self, rhs: HDPoly) -> HDPoly {
        &self * &rhs
    }
}

impl std::iter::Sum for HDPoly {
    fn sum<I: Iterator<Item = HDPoly>>(iter: I) -> Self {
        iter.fold(HDPoly::zero(), |acc, p| acc + p)
    }
}

impl std::iter::Product for HDPoly {
    fn product<I: Iterator<Item = HDPoly>>(iter: I) -> Self {
        iter.fold(HDPoly::one(), |acc, p| acc * p)
    }
}
