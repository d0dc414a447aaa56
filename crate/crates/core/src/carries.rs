//! Base-q carry digits of the addition `alpha x + beta x / q = p x / q`.
//!
//! The carry into position `j` has the closed form
//! `delta^j = floor((beta s^j + p {x / q^j}) / q)`, so any position is
//! addressable without expanding the (possibly infinite) fractional digits.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::branch::BranchParams;
use crate::error::{Error, Result};
use crate::numkernel::{self, ExactRational};

/// Source digits, destination digits and carries over a window `[j_lo, j_hi]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CarryRow {
    pub q: u32,
    pub alpha: u32,
    pub beta: u32,
    pub source: ExactRational,
    pub j_lo: i64,
    pub j_hi: i64,
    /// `delta^j` for `j` in the window, lowest position first.
    pub carries: Vec<u32>,
    /// Digits of `source`.
    pub src_digits: Vec<u32>,
    /// Digits of `p source / q`.
    pub dst_digits: Vec<u32>,
}

impl CarryRow {
    fn idx(&self, j: i64) -> usize {
        (j - self.j_lo) as usize
    }

    pub fn carry(&self, j: i64) -> u32 {
        self.carries[self.idx(j)]
    }

    pub fn src(&self, j: i64) -> u32 {
        self.src_digits[self.idx(j)]
    }

    pub fn dst(&self, j: i64) -> u32 {
        self.dst_digits[self.idx(j)]
    }
}

fn small(n: &BigInt) -> u32 {
    n.to_u32().expect("digit or carry below base")
}

/// `delta^j = floor((beta s^j + p {x / q^j}) / q)`.
pub fn carry_at(x: &ExactRational, params: &BranchParams, j: i64) -> Result<u32> {
    let q = params.q;
    let s = numkernel::digit_at(x, q, j)?;
    let frac = numkernel::frac_scale(x, q, j)?;
    let num = ExactRational::from(params.beta * s) + ExactRational::from(params.p) * frac;
    Ok(small(&numkernel::floor_scale(&num, q, 1)?))
}

/// Builds the carry row over `[j_lo, j_hi]` and verifies, as exact
/// equalities, the transition rule
/// `beta s^(j+1) + alpha s^j + delta^j = s'^j + q delta^(j+1)`, the
/// sequential carry recurrence, and the split of `p x / q^(j+1)` into
/// fractional and integer parts. Rules linking `j` and `j + 1` are checked
/// only where both positions lie in the window.
pub fn transition_report(x: &ExactRational, params: &BranchParams, j_lo: i64, j_hi: i64) -> Result<CarryRow> {
    let q = params.q;
    let src = numkernel::digits_window(x, q, j_lo, j_hi)?;
    let px_over_q = x * &ExactRational::new(params.p, q)?;
    let dst = numkernel::digits_window(&px_over_q, q, j_lo, j_hi)?;
    let carries = (j_lo..=j_hi).map(|j| carry_at(x, params, j)).collect::<Result<Vec<_>>>()?;
    let row = CarryRow {
        q,
        alpha: params.alpha,
        beta: params.beta,
        source: x.clone(),
        j_lo,
        j_hi,
        carries,
        src_digits: src.digits,
        dst_digits: dst.digits,
    };
    verify_row(&row, params)?;
    Ok(row)
}

fn verify_row(row: &CarryRow, params: &BranchParams) -> Result<()> {
    let (p, q) = (params.p, params.q);
    let x = &row.source;
    let fail = |identity, position| Err(Error::CarryIdentity { identity, position, value: x.to_string() });
    let p_over_q = ExactRational::new(p, q)?;
    let beta_over_q = ExactRational::new(params.beta, q)?;
    for j in row.j_lo..=row.j_hi {
        let (s, d) = (row.src(j), row.carry(j));
        if d >= q {
            return fail("carry bound", j);
        }
        // fractional and integer parts of p x / q^(j+1)
        let px = x * &ExactRational::from(p);
        let frac_lhs = numkernel::frac_scale(&px, q, j + 1)?;
        let frac_rhs = &p_over_q * &numkernel::frac_scale(x, q, j)? - ExactRational::from(d)
            + &beta_over_q * &ExactRational::from(s);
        if frac_lhs != frac_rhs {
            return fail("fractional part", j);
        }
        let floor_lhs = ExactRational::from(numkernel::floor_scale(&px, q, j + 1)?);
        let floor_rhs = &p_over_q * &ExactRational::from(numkernel::floor_scale(x, q, j)?)
            + ExactRational::from(d)
            - &beta_over_q * &ExactRational::from(s);
        if floor_lhs != floor_rhs {
            return fail("integer part", j);
        }
        if j < row.j_hi {
            let (s1, d1) = (row.src(j + 1), row.carry(j + 1));
            let column = BigInt::from(params.beta) * s1 + BigInt::from(params.alpha) * s + d;
            let (next_carry, digit) = column.div_mod_floor(&BigInt::from(q));
            if column != BigInt::from(row.dst(j)) + BigInt::from(q) * d1 {
                return fail("transition rule", j);
            }
            if small(&next_carry) != d1 || small(&digit) != row.dst(j) {
                return fail("sequential carry", j);
            }
        }
    }
    Ok(())
}
