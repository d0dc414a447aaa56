//! Exact rational arithmetic and radix-`q` digit extraction.
//!
//! Every sequence value in the crate is an [`ExactRational`]. Digit and
//! floor primitives address positions `j` as coefficients of `q^j`, so
//! negative positions read fractional digits.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Arbitrary-precision signed rational, always in lowest terms with a
/// positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ExactRational(BigRational);

impl ExactRational {
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Result<Self> {
        let denom = denom.into();
        if denom.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(ExactRational(BigRational::new(numer.into(), denom)))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        ExactRational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        ExactRational(BigRational::zero())
    }

    pub fn one() -> Self {
        ExactRational(BigRational::one())
    }

    /// `q^k` for any integer `k`.
    pub fn power_of(q: u32, k: i64) -> Self {
        let mag = BigInt::from(q).pow(k.unsigned_abs() as u32);
        if k >= 0 {
            Self::from_integer(mag)
        } else {
            ExactRational(BigRational::new(BigInt::one(), mag))
        }
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    /// Greatest integer not above `self`.
    pub fn floor(&self) -> BigInt {
        self.numer().div_floor(self.denom())
    }

    /// `self - floor(self)`, always in `[0, 1)`.
    pub fn fract(&self) -> ExactRational {
        ExactRational(BigRational::new(self.numer().mod_floor(self.denom()), self.denom().clone()))
    }

    pub fn scale_pow(&self, q: u32, k: i64) -> ExactRational {
        self * &Self::power_of(q, k)
    }

    pub fn recip(&self) -> Result<ExactRational> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(ExactRational(self.0.recip()))
    }

    pub fn abs(&self) -> ExactRational {
        ExactRational(self.0.abs())
    }

    /// Approximate value, for display and logarithmic diagnostics only.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn as_big_rational(&self) -> &BigRational {
        &self.0
    }

    /// The integer value, when `self` is an integer.
    pub fn to_integer(&self) -> Option<BigInt> {
        self.is_integer().then(|| self.numer().clone())
    }
}

impl From<BigInt> for ExactRational {
    fn from(n: BigInt) -> Self {
        Self::from_integer(n)
    }
}

impl From<BigUint> for ExactRational {
    fn from(n: BigUint) -> Self {
        Self::from_integer(BigInt::from(n))
    }
}

impl From<i64> for ExactRational {
    fn from(n: i64) -> Self {
        Self::from_integer(n)
    }
}

impl From<u64> for ExactRational {
    fn from(n: u64) -> Self {
        Self::from_integer(n)
    }
}

impl From<u32> for ExactRational {
    fn from(n: u32) -> Self {
        Self::from_integer(n)
    }
}

impl From<i32> for ExactRational {
    fn from(n: i32) -> Self {
        Self::from_integer(n)
    }
}

impl From<BigRational> for ExactRational {
    fn from(r: BigRational) -> Self {
        ExactRational(r)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident) => {
        impl $tr<&ExactRational> for &ExactRational {
            type Output = ExactRational;
            fn $m(self, rhs: &ExactRational) -> ExactRational {
                ExactRational((&self.0).$m(&rhs.0))
            }
        }
        impl $tr<ExactRational> for ExactRational {
            type Output = ExactRational;
            fn $m(self, rhs: ExactRational) -> ExactRational {
                ExactRational(self.0.$m(rhs.0))
            }
        }
        impl $tr<&ExactRational> for ExactRational {
            type Output = ExactRational;
            fn $m(self, rhs: &ExactRational) -> ExactRational {
                ExactRational(self.0.$m(&rhs.0))
            }
        }
        impl $tr<ExactRational> for &ExactRational {
            type Output = ExactRational;
            fn $m(self, rhs: ExactRational) -> ExactRational {
                ExactRational((&self.0).$m(rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

// Division by zero panics, as with the primitive types; use `recip` for a
// checked path.
forward_binop!(Div, div);

impl AddAssign<&ExactRational> for ExactRational {
    fn add_assign(&mut self, rhs: &ExactRational) {
        self.0 += &rhs.0;
    }
}

impl Neg for ExactRational {
    type Output = ExactRational;
    fn neg(self) -> ExactRational {
        ExactRational(-self.0)
    }
}

impl Neg for &ExactRational {
    type Output = ExactRational;
    fn neg(self) -> ExactRational {
        ExactRational(-&self.0)
    }
}

impl fmt::Display for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for ExactRational {
    type Err = Error;

    /// Accepts `"a"` or `"a/b"` with optional sign on `a`. Decimal points
    /// are rejected so no precision is lost at the boundary.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::ParseRational(s.to_string());
        let t = s.trim();
        let parse_int = |x: &str| -> Result<BigInt> {
            let x = x.trim();
            let digits = x.strip_prefix(['-', '+']).unwrap_or(x);
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            x.parse::<BigInt>().map_err(|_| bad())
        };
        match t.split_once('/') {
            None => Ok(Self::from_integer(parse_int(t)?)),
            Some((n, d)) => {
                let d = parse_int(d)?;
                if d.sign() != Sign::Plus {
                    return Err(bad());
                }
                Self::new(parse_int(n)?, d)
            }
        }
    }
}

impl Serialize for ExactRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ExactRational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Radix-`q` digits of a value over positions `j_lo..=j_hi`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DigitExpansion {
    pub base: u32,
    pub j_lo: i64,
    pub j_hi: i64,
    /// `digits[i]` is the coefficient of `base^(j_lo + i)`.
    pub digits: Vec<u32>,
}

impl DigitExpansion {
    /// Digit at position `j`, zero outside the window.
    pub fn at(&self, j: i64) -> u32 {
        if j < self.j_lo || j > self.j_hi {
            0
        } else {
            self.digits[(j - self.j_lo) as usize]
        }
    }

    /// `sum digits[j] * base^j` over the window.
    pub fn value(&self) -> ExactRational {
        let mut acc = BigInt::zero();
        for &d in self.digits.iter().rev() {
            acc = acc * self.base + d;
        }
        ExactRational::from_integer(acc).scale_pow(self.base, self.j_lo)
    }
}

fn check_base(q: u32) -> Result<()> {
    if q < 2 {
        Err(Error::InvalidBase(q))
    } else {
        Ok(())
    }
}

fn check_nonnegative(x: &ExactRational) -> Result<()> {
    if x.is_negative() {
        Err(Error::Negative(x.to_string()))
    } else {
        Ok(())
    }
}

/// `floor(x / q^k)`; negative `k` multiplies.
pub fn floor_scale(x: &ExactRational, q: u32, k: i64) -> Result<BigInt> {
    check_base(q)?;
    check_nonnegative(x)?;
    Ok(floor_scale_unchecked(x, q, k))
}

pub(crate) fn floor_scale_unchecked(x: &ExactRational, q: u32, k: i64) -> BigInt {
    let pow = BigInt::from(q).pow(k.unsigned_abs() as u32);
    if k >= 0 {
        x.numer().div_floor(&(x.denom() * pow))
    } else {
        (x.numer() * pow).div_floor(x.denom())
    }
}

/// `x / q^k - floor(x / q^k)`, in `[0, 1)`.
pub fn frac_scale(x: &ExactRational, q: u32, k: i64) -> Result<ExactRational> {
    check_base(q)?;
    check_nonnegative(x)?;
    Ok(x.scale_pow(q, -k).fract())
}

/// Base-`q` digit of `x` at position `j`.
pub fn digit_at(x: &ExactRational, q: u32, j: i64) -> Result<u32> {
    let f = floor_scale(x, q, j)?;
    Ok(f.mod_floor(&BigInt::from(q)).to_u32().expect("digit below base"))
}

/// Digits of `x` over `j_lo..=j_hi`.
pub fn digits_window(x: &ExactRational, q: u32, j_lo: i64, j_hi: i64) -> Result<DigitExpansion> {
    if j_lo > j_hi {
        return Err(Error::InvertedWindow { lo: j_lo, hi: j_hi });
    }
    let len = (j_hi - j_lo + 1) as usize;
    let mut rest = floor_scale(x, q, j_lo)?;
    let base = BigInt::from(q);
    let mut digits = Vec::with_capacity(len);
    for _ in 0..len {
        let (quot, rem) = rest.div_mod_floor(&base);
        digits.push(rem.to_u32().expect("digit below base"));
        rest = quot;
        if rest.is_zero() {
            break;
        }
    }
    digits.resize(len, 0);
    Ok(DigitExpansion { base: q, j_lo, j_hi, digits })
}

/// Largest `k` with `q^k | m`.
pub fn int_valuation(m: &BigUint, q: u32) -> Result<u32> {
    check_base(q)?;
    if m.is_zero() {
        return Err(Error::ZeroValuation);
    }
    if q == 2 {
        return Ok(m.trailing_zeros().expect("nonzero") as u32);
    }
    let base = BigUint::from(q);
    let mut k = 0;
    let mut rest = m.clone();
    loop {
        let (quot, rem) = rest.div_rem(&base);
        if !rem.is_zero() {
            return Ok(k);
        }
        rest = quot;
        k += 1;
    }
}

/// Whether `x` equals `q^k` for some integer `k >= 1`.
pub fn is_power_of(x: &ExactRational, q: u32) -> bool {
    let Some(n) = x.to_integer() else { return false };
    let Some(n) = n.to_biguint() else { return false };
    if n <= BigUint::one() {
        return false;
    }
    let base = BigUint::from(q);
    let mut rest = n;
    while rest > BigUint::one() {
        let (quot, rem) = rest.div_rem(&base);
        if !rem.is_zero() {
            return false;
        }
        rest = quot;
    }
    true
}

/// Serde adapter writing a [`BigUint`] as a decimal string.
pub mod biguint_string {
    use num_bigint::BigUint;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(n: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(n)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(de::Error::custom)
    }
}
