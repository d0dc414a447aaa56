//! Binary cellular automaton of the `3/2` map on a fixed 2-adic lattice.
//!
//! Row `n` holds `V_n`, the state scaled onto a common lattice so that
//! lattice position `j` carries the coefficient of `2^j`. The next row is
//! `V + V/2` computed cell by cell:
//! `b(n+1, j) = (b(n, j+1) + b(n, j) + d(n, j)) mod 2` with carry
//! `d(n, j+1) = floor((b(n, j+1) + b(n, j) + d(n, j)) / 2)`.
//!
//! * Syracuse mode: `V_n = S_n 2^(e_n)` for the embedded trajectory. Each
//!   row starts at its lowest set bit with the carry cell there set to 1,
//!   which adds the perturbation `2^(offset - 1)`.
//! * Rational-power mode: `V_n = xi (3/2)^n`, no carry initialisation; the
//!   arithmetic starts one position below the lowest set bit.
//!
//! Each row also records `zero`, the lattice position of `2^0` of the
//! unscaled state (`e_n` in Syracuse mode, `0` for rational powers).

mod render;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::{self, ExactRational};
use crate::syracuse;

pub use render::{render, render_overlay, RenderFormat, RenderOptions};

/// Default number of fractional positions kept below `2^0` in overlays.
pub const DEFAULT_FRAC_DEPTH: i64 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaMode {
    Syracuse,
    RationalPower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Cell {
    pub bit: u8,
    pub carry: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaRow {
    /// Lattice position of `cells[0]`.
    pub offset: i64,
    /// Lattice position of `2^0` of the unscaled state.
    pub zero: i64,
    pub cells: Vec<Cell>,
}

impl CaRow {
    fn cell(&self, j: i64) -> Cell {
        if j < self.offset {
            return Cell::default();
        }
        self.cells.get((j - self.offset) as usize).copied().unwrap_or_default()
    }

    pub fn bit(&self, j: i64) -> u8 {
        self.cell(j).bit
    }

    pub fn carry(&self, j: i64) -> u8 {
        self.cell(j).carry
    }

    /// Highest lattice position held by the row.
    pub fn top(&self) -> i64 {
        self.offset + self.cells.len() as i64 - 1
    }

    /// Highest set bit, if any.
    pub fn top_bit(&self) -> Option<i64> {
        self.cells.iter().rposition(|c| c.bit == 1).map(|i| self.offset + i as i64)
    }

    /// The dyadic value `sum b_j 2^j`.
    pub fn value(&self) -> ExactRational {
        let mut m = BigInt::zero();
        for c in self.cells.iter().rev() {
            m = (m << 1) + c.bit as u32;
        }
        ExactRational::from(m).scale_pow(2, self.offset)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaGrid {
    pub mode: CaMode,
    pub base: u32,
    /// Columns in the rendered rectangle.
    pub width: usize,
    pub rows: Vec<CaRow>,
}

impl CaGrid {
    /// Highest lattice position with a set bit in any row.
    pub fn col_hi(&self) -> i64 {
        self.rows.iter().filter_map(CaRow::top_bit).max().unwrap_or(0)
    }

    /// Rendered columns, highest lattice position first.
    pub fn columns(&self) -> impl DoubleEndedIterator<Item = i64> {
        let hi = self.col_hi();
        (hi - self.width as i64 + 1..=hi).rev()
    }

    /// Columns needed to show the integer part of every row.
    pub fn required_width(&self) -> usize {
        let min_zero = self.rows.iter().map(|r| r.zero).min().unwrap_or(0);
        (self.col_hi() - min_zero + 1).max(1) as usize
    }

    /// Whether any set bit falls below the rendered rectangle.
    pub fn truncated(&self) -> bool {
        let lo = self.col_hi() - self.width as i64 + 1;
        self.rows.iter().any(|r| (r.offset..lo).any(|j| r.bit(j) == 1))
    }
}

/// Seed of a grid: an odd integer for Syracuse mode, a dyadic rational for
/// rational-power mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CaSeed {
    Odd(BigUint),
    Rational(ExactRational),
}

/// `(m, o)` with `x = m 2^o` and `m` odd.
fn dyadic_parts(x: &ExactRational) -> Result<(BigUint, i64)> {
    if !x.is_positive() {
        return Err(Error::Negative(x.to_string()));
    }
    let den = x.denom().magnitude();
    if (den & (den - BigUint::one())) != BigUint::zero() {
        return Err(Error::NotDyadic(x.to_string()));
    }
    let num = x.numer().magnitude();
    let tz = num.trailing_zeros().unwrap_or(0) as i64;
    let dz = den.trailing_zeros().unwrap_or(0) as i64;
    Ok((num >> tz as u64, tz - dz))
}

/// Lays out the bits of `v` from `offset` up, with one spare cell on top
/// for the outgoing carry.
fn bits_row(v: &ExactRational, offset: i64, zero: i64) -> Result<CaRow> {
    let (m, o) = dyadic_parts(v)?;
    let top = o + m.bits() as i64 - 1;
    let cells = (offset..=top + 1)
        .map(|j| Cell { bit: if j < o { 0 } else { m.bit((j - o) as u64) as u8 }, carry: 0 })
        .collect();
    Ok(CaRow { offset, zero, cells })
}

/// Fills the carry cells of `row` and returns the next row's bits as a value.
fn advance(row: &mut CaRow, start_carry: u8) -> ExactRational {
    let mut next = BigInt::zero();
    let mut carry = start_carry;
    let len = row.cells.len();
    for i in 0..len {
        row.cells[i].carry = carry;
        let above = if i + 1 < len { row.cells[i + 1].bit } else { 0 };
        let sum = above + row.cells[i].bit + carry;
        if sum % 2 == 1 {
            next.set_bit(i as u64, true);
        }
        carry = sum / 2;
    }
    if carry == 1 {
        next.set_bit(len as u64, true);
    }
    ExactRational::from(next).scale_pow(2, row.offset)
}

/// Row values from the independent sequence: `S_n 2^(e_n)` from the
/// Syracuse embedding, or `xi (3/2)^n`.
fn reference_values(mode: CaMode, seed: &CaSeed, rows: usize) -> Result<(Vec<ExactRational>, Vec<i64>)> {
    match (mode, seed) {
        (CaMode::Syracuse, CaSeed::Odd(w0)) => {
            let traj = syracuse::trajectory_steps(w0, rows as u64 - 1)?;
            let emb = syracuse::embed(&traj)?;
            let vals = emb.trajectory.steps.iter().map(|st| st.s.scale_pow(2, st.e as i64)).collect();
            let zeros = emb.trajectory.steps.iter().map(|st| st.e as i64).collect();
            Ok((vals, zeros))
        }
        (CaMode::RationalPower, CaSeed::Rational(xi)) => {
            let ratio = ExactRational::new(3, 2)?;
            let mut v = xi.clone();
            let mut vals = Vec::with_capacity(rows);
            for _ in 0..rows {
                vals.push(v.clone());
                v = &v * &ratio;
            }
            Ok((vals, vec![0; rows]))
        }
        (CaMode::Syracuse, CaSeed::Rational(x)) => Err(Error::NotOddPositive(x.to_string())),
        (CaMode::RationalPower, CaSeed::Odd(w)) => Err(Error::NotDyadic(format!("{w} given as an odd seed"))),
    }
}

/// Builds `rows` rows of the automaton. Each row is produced by the cell
/// rule from the previous one and then compared with the independently
/// computed sequence value.
pub fn build(mode: CaMode, seed: &CaSeed, rows: usize, width: usize) -> Result<CaGrid> {
    if rows == 0 {
        return Err(Error::GridShape("one row"));
    }
    if width < 4 {
        return Err(Error::GridShape("four columns"));
    }
    if let CaSeed::Rational(x) = seed {
        dyadic_parts(x)?;
    }
    let (refs, zeros) = reference_values(mode, seed, rows)?;
    let start = |v: &ExactRational| -> Result<(i64, u8)> {
        let (_, o) = dyadic_parts(v)?;
        Ok(match mode {
            CaMode::Syracuse => (o, 1),
            CaMode::RationalPower => (o - 1, 0),
        })
    };
    let mut out: Vec<CaRow> = Vec::with_capacity(rows);
    let mut value = refs[0].clone();
    for n in 0..rows {
        if value != refs[n] {
            return Err(Error::Internal(format!("row {n} holds {value}, sequence value is {}", refs[n])));
        }
        let (offset, carry) = start(&value)?;
        let mut row = bits_row(&value, offset, zeros[n])?;
        value = advance(&mut row, carry);
        out.push(row);
    }
    let grid = CaGrid { mode, base: 2, width, rows: out };
    let required = grid.required_width();
    if required > width {
        return Err(Error::GridTooNarrow { width, required });
    }
    Ok(grid)
}

/// Builds with the width fitted to the integer parts plus `frac_depth`
/// fractional columns.
pub fn build_fitted(mode: CaMode, seed: &CaSeed, rows: usize, frac_depth: usize) -> Result<CaGrid> {
    let mut grid = build(mode, seed, rows, usize::MAX)?;
    grid.width = (grid.required_width() + frac_depth).max(4);
    Ok(grid)
}

/// Checks every row against `digits_window` of `value(n)` and the cell rule
/// between consecutive rows. Returns the number of cells checked.
pub fn verify(grid: &CaGrid, value: impl Fn(usize) -> ExactRational) -> Result<u64> {
    let mut checked = 0u64;
    for (n, row) in grid.rows.iter().enumerate() {
        let digits = numkernel::digits_window(&value(n), 2, row.offset, row.top())?;
        for (i, c) in row.cells.iter().enumerate() {
            if c.bit as u32 != digits.digits[i] {
                return Err(Error::Internal(format!("row {n} bit {} disagrees with the sequence", row.offset + i as i64)));
            }
        }
        checked += row.cells.len() as u64;
        if let Some(next) = grid.rows.get(n + 1) {
            for j in row.offset..=row.top() {
                let sum = row.bit(j + 1) + row.bit(j) + row.carry(j);
                if next.bit(j) != sum % 2 || row.carry(j + 1) != sum / 2 {
                    return Err(Error::Internal(format!("cell rule fails at row {n}, position {j}")));
                }
                checked += 1;
            }
        }
    }
    Ok(checked)
}

/// Gray recoding `g_j = b_{j+1} xor b_j` within each row, with the bit above
/// the row taken as 0. Carry cells are kept.
pub fn gray(grid: &CaGrid) -> CaGrid {
    let rows = grid
        .rows
        .iter()
        .map(|row| {
            let cells = row
                .cells
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let above = row.cells.get(i + 1).map_or(0, |a| a.bit);
                    Cell { bit: above ^ c.bit, carry: c.carry }
                })
                .collect();
            CaRow { cells, ..row.clone() }
        })
        .collect();
    CaGrid { rows, ..grid.clone() }
}

/// Inverse of [`gray`]: prefix xor from the top of each row down.
pub fn inverse_gray(grid: &CaGrid) -> CaGrid {
    let rows = grid
        .rows
        .iter()
        .map(|row| {
            let mut cells = row.cells.clone();
            let mut acc = 0;
            for c in cells.iter_mut().rev() {
                acc ^= c.bit;
                c.bit = acc;
            }
            CaRow { cells, ..row.clone() }
        })
        .collect();
    CaGrid { rows, ..grid.clone() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlayClass {
    Identical,
    IntegerPerturbation,
    FractionalPerturbation,
    Outside,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlayCell {
    pub class: OverlayClass,
    /// Bit of the perturbed grid.
    pub bit: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlayGrid {
    /// Lattice position of the first column; columns run downwards.
    pub col_hi: i64,
    pub width: usize,
    pub rows: Vec<Vec<OverlayCell>>,
}

/// Compares `perturbed` against `reference` position by position over the
/// perturbed grid's rectangle. Differences at or above row `n`'s `2^0`
/// are integer perturbations, those below are fractional; positions more
/// than `frac_depth` below `2^0` are outside.
pub fn overlay(reference: &CaGrid, perturbed: &CaGrid, frac_depth: i64) -> Result<OverlayGrid> {
    if reference.rows.len() != perturbed.rows.len() {
        return Err(Error::GeometryMismatch(format!(
            "{} rows against {} rows",
            reference.rows.len(),
            perturbed.rows.len()
        )));
    }
    if reference.width != perturbed.width {
        return Err(Error::GeometryMismatch(format!("width {} against {}", reference.width, perturbed.width)));
    }
    let col_hi = reference.col_hi().max(perturbed.col_hi());
    let width = perturbed.width;
    let rows = reference
        .rows
        .iter()
        .zip(&perturbed.rows)
        .map(|(a, b)| {
            (0..width as i64)
                .map(|i| {
                    let j = col_hi - i;
                    let class = if j < b.zero - frac_depth {
                        OverlayClass::Outside
                    } else if a.bit(j) == b.bit(j) {
                        OverlayClass::Identical
                    } else if j >= b.zero {
                        OverlayClass::IntegerPerturbation
                    } else {
                        OverlayClass::FractionalPerturbation
                    };
                    OverlayCell { class, bit: b.bit(j) }
                })
                .collect()
        })
        .collect();
    Ok(OverlayGrid { col_hi, width, rows })
}

/// Whether `x` has a finite binary expansion.
pub fn is_dyadic(x: &ExactRational) -> bool {
    let den = x.denom().magnitude();
    (den & (den - BigUint::one())).is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> ExactRational {
        s.parse().unwrap()
    }

    fn odd(n: u32) -> CaSeed {
        CaSeed::Odd(BigUint::from(n))
    }

    #[test]
    fn syracuse_seven() {
        let g = build(CaMode::Syracuse, &odd(7), 6, 32).unwrap();
        assert_eq!(g.rows[0].value(), r("14"));
        let vals: Vec<_> = g.rows.iter().map(CaRow::value).collect();
        assert_eq!(vals, ["14", "22", "34", "52", "80", "128"].map(r));
        for row in &g.rows {
            assert_eq!(row.carry(row.offset), 1);
            assert_eq!(row.bit(row.offset), 1);
        }
        assert_eq!(g.rows.iter().map(|r| r.zero).collect::<Vec<_>>(), [0, 0, 1, 3, 6, 7]);
    }

    #[test]
    fn rational_power_fourteen() {
        let g = build(CaMode::RationalPower, &CaSeed::Rational(r("14")), 3, 32).unwrap();
        let vals: Vec<_> = g.rows.iter().map(CaRow::value).collect();
        assert_eq!(vals, ["14", "21", "63/2"].map(r));
        assert!(g.rows.iter().all(|row| row.carry(row.offset) == 0));
        verify(&g, |n| r("14") * ExactRational::new(3u32.pow(n as u32), 2u32.pow(n as u32)).unwrap()).unwrap();
    }

    #[test]
    fn fixed_point_rows_repeat() {
        let g = build(CaMode::Syracuse, &odd(1), 5, 8).unwrap();
        for row in &g.rows {
            assert_eq!(row.value(), ExactRational::power_of(2, row.zero));
        }
    }

    #[test]
    fn build_errors() {
        assert!(matches!(build(CaMode::Syracuse, &odd(27), 40, 8), Err(Error::GridTooNarrow { .. })));
        assert!(matches!(build(CaMode::Syracuse, &odd(7), 0, 32), Err(Error::GridShape(_))));
        assert!(matches!(build(CaMode::Syracuse, &odd(7), 3, 3), Err(Error::GridShape(_))));
        assert!(matches!(build(CaMode::RationalPower, &CaSeed::Rational(r("1/3")), 3, 32), Err(Error::NotDyadic(_))));
        assert!(build(CaMode::Syracuse, &odd(8), 3, 32).is_err());
    }

    #[test]
    fn gray_examples() {
        let row = |bits: &[u8]| CaRow { offset: 0, zero: 0, cells: bits.iter().map(|&b| Cell { bit: b, carry: 0 }).collect() };
        let grid = |rows| CaGrid { mode: CaMode::RationalPower, base: 2, width: 8, rows };
        // cells are stored lowest position first
        let g = gray(&grid(vec![row(&[0, 1, 1, 1]), row(&[1, 1, 0, 1]), row(&[0, 0, 0])]));
        let bits = |r: &CaRow| r.cells.iter().map(|c| c.bit).collect::<Vec<_>>();
        assert_eq!(bits(&g.rows[0]), [1, 0, 0, 1]);
        assert_eq!(bits(&g.rows[1]), [0, 1, 1, 1]);
        assert_eq!(bits(&g.rows[2]), [0, 0, 0]);
        let back = inverse_gray(&g);
        assert_eq!(bits(&back.rows[1]), [1, 1, 0, 1]);
    }

    #[test]
    fn overlay_examples() {
        let s = build(CaMode::Syracuse, &odd(7), 6, 32).unwrap();
        let c = build(CaMode::RationalPower, &CaSeed::Rational(r("14")), 6, 32).unwrap();
        let o = overlay(&c, &s, DEFAULT_FRAC_DEPTH).unwrap();
        let class_at = |n: usize, j: i64| o.rows[n][(o.col_hi - j) as usize].class;
        assert!(o.rows[0].iter().all(|c| matches!(c.class, OverlayClass::Identical | OverlayClass::Outside)));
        // 21 = 10101 against 22 = 10110
        assert_eq!(class_at(1, 0), OverlayClass::IntegerPerturbation);
        assert_eq!(class_at(1, 1), OverlayClass::IntegerPerturbation);
        assert_eq!(class_at(1, 2), OverlayClass::Identical);
        let same = overlay(&s, &s, DEFAULT_FRAC_DEPTH).unwrap();
        assert!(same.rows.iter().flatten().all(|c| c.class != OverlayClass::IntegerPerturbation && c.class != OverlayClass::FractionalPerturbation));
        let short = build(CaMode::Syracuse, &odd(7), 5, 32).unwrap();
        assert!(overlay(&c, &short, 16).is_err());
    }

    #[test]
    fn fitted_width() {
        let g = build_fitted(CaMode::Syracuse, &odd(27), 120, 0).unwrap();
        assert_eq!(g.width, g.required_width());
        assert!(build(CaMode::Syracuse, &odd(27), 120, g.width).is_ok());
        assert!(build(CaMode::Syracuse, &odd(27), 120, g.width - 1).is_err());
    }

    #[test]
    fn dyadic_check() {
        assert!(is_dyadic(&r("3/8")));
        assert!(is_dyadic(&r("5")));
        assert!(!is_dyadic(&r("1/3")));
    }
}
