//! Carry-independence sweeps and the floor-addition search.

use num_bigint::BigInt;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use super::report::{claim, ClaimReport, ClaimTally, Counterexample, Interpretation, Witness};
use crate::branch::{self, BranchParams, BranchStep, DerivedStep};
use crate::carries;
use crate::error::{Error, Result};
use crate::numkernel::{self, ExactRational};

/// Sweep resolution and the highest scale exponent tested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeOptions {
    pub k_max: u32,
    pub grid: u32,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions { k_max: 6, grid: 256 }
    }
}

/// Admissible perturbations swept for state `s`: `-{s} + t / grid` for
/// `0 <= t < grid`, the value `1 - {s} - q^-8` just below the open end, and
/// `r = 0`, plus the state's own perturbation when present. Points are
/// generated on demand.
struct Sweep {
    frac: ExactRational,
    grid: u32,
    extras: Vec<ExactRational>,
}

impl Sweep {
    fn new(s: &ExactRational, q: u32, grid: u32, actual: Option<&ExactRational>) -> Self {
        let frac = s.fract();
        let mut extras = vec![ExactRational::one() - &frac - ExactRational::power_of(q, -8), ExactRational::zero()];
        extras.extend(actual.cloned());
        Sweep { frac, grid, extras }
    }

    fn len(&self) -> usize {
        self.grid as usize + self.extras.len()
    }

    fn grid_point(&self, t: u32) -> ExactRational {
        ExactRational::new(t, self.grid).expect("grid > 0") - &self.frac
    }

    fn points(&self) -> impl Iterator<Item = ExactRational> + '_ {
        (0..self.grid).map(|t| self.grid_point(t)).chain(self.extras.iter().cloned())
    }

    fn first_positive_t(&self) -> u32 {
        // smallest t with t / grid > {s}
        let t = (&self.frac * &ExactRational::from(self.grid)).floor() + 1;
        num_traits::ToPrimitive::to_u32(&t).unwrap_or(u32::MAX)
    }

    fn positive_count(&self) -> usize {
        self.grid.saturating_sub(self.first_positive_t()) as usize + self.extras.iter().filter(|r| r.is_positive()).count()
    }

    /// Smallest and largest point, restricted to positive points when asked.
    fn extremes(&self, positive_only: bool) -> Option<(ExactRational, ExactRational)> {
        let first_t = if positive_only { self.first_positive_t() } else { 0 };
        let mut cands: Vec<ExactRational> = self.extras.clone();
        if first_t < self.grid {
            cands.push(self.grid_point(first_t));
            cands.push(self.grid_point(self.grid - 1));
        }
        cands.retain(|r| !positive_only || r.is_positive());
        let lo = cands.iter().min()?.clone();
        let hi = cands.iter().max()?.clone();
        Some((lo, hi))
    }
}

fn scaled_floor(x: &ExactRational, params: &BranchParams, k: u32) -> BigInt {
    (x * &params.p_rat()).scale_pow(params.q, -(1 + k as i64)).floor()
}

/// First swept point whose value under `f` differs from `base`. `f` is
/// nondecreasing in `r`, so agreement at both extremes settles agreement at
/// every point and the full scan only runs on failure.
fn first_mismatch<T: PartialEq>(
    sweep: &Sweep,
    positive_only: bool,
    base: &T,
    f: impl Fn(&ExactRational) -> T,
) -> Option<ExactRational> {
    let (lo, hi) = sweep.extremes(positive_only)?;
    if &f(&lo) == base && &f(&hi) == base {
        return None;
    }
    sweep.points().filter(|r| !positive_only || r.is_positive()).find(|r| &f(r) != base)
}

/// Checks that `floor(p (S + r) / q^(1+k))` does not depend on the
/// admissible perturbation `r` for `k` in `2..=k_max`, and that it equals
/// its carry decomposition at `r = 0`. With `derived` supplied, also checks
/// the transfer to `Delta`: `floor(Delta + r) = floor(Delta)` and
/// `floor(p (Delta + r) / q^(1+k)) = floor(p Delta / q^(1+k))`, once over
/// the positive swept `r` and once at the state's own perturbation.
pub fn independence_probe(
    params: &BranchParams,
    step: &BranchStep,
    opts: &ProbeOptions,
    derived: Option<&DerivedStep>,
) -> Result<Vec<ClaimReport>> {
    if opts.k_max < 2 {
        return Err(Error::InvertedRange { from: "2".into(), to: opts.k_max.to_string() });
    }
    if opts.grid == 0 {
        return Err(Error::ZeroResolution);
    }
    let (p, q) = (params.p, params.q);
    let s = &step.s;
    let instance = format!("p={p} q={q} n={} S={s} k=2..{} grid={}", step.n, opts.k_max, opts.grid);
    let sweep = Sweep::new(s, q, opts.grid, step.r.as_ref());
    let ks = 2..=opts.k_max;

    let mut out = Vec::with_capacity(3);
    if !branch::branch_condition(s, q)? {
        let (lo, hi) = sweep.extremes(false).expect("nonempty sweep");
        let spread: Vec<String> = ks
            .clone()
            .map(|k| format!("k={k}: floors {}..={}", scaled_floor(&(s + &lo), params, k), scaled_floor(&(s + &hi), params, k)))
            .collect();
        let mut rep = ClaimReport::precondition_failed(
            claim::CARRY_INDEPENDENCE,
            instance.clone(),
            format!("state {s} does not satisfy the branch condition"),
        );
        rep.notes.push(spread.join("; "));
        out.push(rep);
        if derived.is_some() {
            for id in [claim::CARRY_INDEPENDENCE_DELTA, claim::CARRY_INDEPENDENCE_DELTA_ACTUAL] {
                out.push(ClaimReport::precondition_failed(id, instance.clone(), "state off branch"));
            }
        }
        return Ok(out);
    }

    let mut tally = ClaimTally::new(claim::CARRY_INDEPENDENCE, instance.clone());
    for k in ks.clone() {
        let base = scaled_floor(s, params, k);
        let carry_form = ExactRational::new(p, q)? * ExactRational::from(numkernel::floor_scale(s, q, k as i64)?)
            + ExactRational::from(carries::carry_at(s, params, k as i64)?)
            - ExactRational::new(params.beta * numkernel::digit_at(s, q, k as i64)?, q)?;
        if carry_form != ExactRational::from(base.clone()) {
            return Err(Error::CarryIdentity { identity: "integer part", position: k as i64, value: s.to_string() });
        }
        let miss = first_mismatch(&sweep, false, &base, |r| scaled_floor(&(s + r), params, k));
        tally.add_tested(sweep.len() as u64 - 1);
        tally.check(miss.is_none(), || {
            Counterexample::from_witness(
                claim::CARRY_INDEPENDENCE,
                Witness::IndependenceFloor { p, q, s: s.clone(), r1: ExactRational::zero(), r2: miss.clone().expect("mismatch"), k },
            )
        })?;
    }
    out.push(tally.finish());

    let Some(d) = derived else { return Ok(out) };
    let delta = &d.delta;
    let witness = |id: &str, r: ExactRational, k: u32| {
        Counterexample::from_witness(id, Witness::DeltaTransfer { p, q, s: s.clone(), c: d.c.clone(), r, k })
    };
    let transfer_miss = |ks: std::ops::RangeInclusive<u32>, sweep: &Sweep| -> Vec<Option<ExactRational>> {
        let int_miss = first_mismatch(sweep, true, &delta.floor(), |r| (delta + r).floor());
        ks.map(|k| {
            int_miss.clone().or_else(|| {
                first_mismatch(sweep, true, &scaled_floor(delta, params, k), |r| scaled_floor(&(delta + r), params, k))
            })
        })
        .collect()
    };

    let mut tally = ClaimTally::new(claim::CARRY_INDEPENDENCE_DELTA, instance.clone());
    let positive = sweep.positive_count() as u64;
    for (k, miss) in ks.clone().zip(transfer_miss(ks.clone(), &sweep)) {
        tally.add_tested(positive.saturating_sub(1));
        tally.check(miss.is_none(), || witness(claim::CARRY_INDEPENDENCE_DELTA, miss.clone().expect("mismatch"), k))?;
    }
    out.push(tally.finish());

    let mut tally = ClaimTally::new(claim::CARRY_INDEPENDENCE_DELTA_ACTUAL, instance);
    if let Some(r) = step.r.as_ref().filter(|r| r.is_positive()) {
        let only = Sweep { frac: ExactRational::zero(), grid: 0, extras: vec![r.clone()] };
        for (k, miss) in ks.clone().zip(transfer_miss(ks, &only)) {
            tally.check(miss.is_none(), || witness(claim::CARRY_INDEPENDENCE_DELTA_ACTUAL, r.clone(), k))?;
        }
    }
    out.push(tally.finish());
    Ok(out)
}

/// Whether `(A, B, B')` meets the floor-addition hypothesis: equal integer
/// parts of `A + B` and `A + B'`, and for all_scales equal
/// `floor((A + B) / 2^k)` at every `k >= 0`.
pub fn floor_addition_hypothesis(interp: Interpretation, a: &ExactRational, b: &ExactRational, b_prime: &ExactRational) -> bool {
    let (x, y) = (a + b, a + b_prime);
    match interp {
        Interpretation::IntegerPart => x.floor() == y.floor(),
        Interpretation::AllScales => {
            let mut k = 0;
            loop {
                let (fx, fy) = (x.scale_pow(2, -k).floor(), y.scale_pow(2, -k).floor());
                if fx != fy {
                    return false;
                }
                if fx.bits() == 0 && fy.bits() == 0 && !x.is_negative() && !y.is_negative() {
                    return true;
                }
                k += 1;
            }
        }
    }
}

/// Exhaustive search over nonnegative rationals `A, B < B'` with
/// denominators up to `max_den` and values up to `max_val` for triples
/// meeting the hypothesis with `floor(B) != floor(B')`. Triples are visited
/// in lexicographic order of `(denominator of A, A, B, B')`, so the
/// certificate is the first counterexample in that order.
pub fn floor_addition_search(max_den: u32, max_val: u32, interpretation: Interpretation) -> Result<ClaimReport> {
    if max_den == 0 {
        return Err(Error::ZeroResolution);
    }
    // every candidate as an integer multiple of 1/L
    let l: u64 = (1..=max_den as u64).fold(1, |acc, d| acc.lcm(&d));
    let mut values: Vec<(u64, u32)> = Vec::new();
    for d in 1..=max_den {
        for num in 0..=max_val as u64 * d as u64 {
            if num.gcd(&(d as u64)) == 1 {
                values.push((num * (l / d as u64), d));
            }
        }
    }
    let mut sorted: Vec<u64> = values.iter().map(|v| v.0).collect();
    sorted.sort_unstable();
    sorted.dedup();
    let mut by_a = values.clone();
    by_a.sort_unstable_by_key(|&(v, d)| (d, v));

    let hyp = |a: u64, b: u64, b2: u64| match interpretation {
        Interpretation::IntegerPart => (a + b) / l == (a + b2) / l,
        Interpretation::AllScales => {
            let (mut x, mut y) = ((a + b) / l, (a + b2) / l);
            loop {
                if x != y {
                    return false;
                }
                if x == 0 {
                    return true;
                }
                x >>= 1;
                y >>= 1;
            }
        }
    };

    let instance = format!("max_den={max_den} max_val={max_val} interpretation={interpretation:?}");
    let mut tally = ClaimTally::new(claim::FLOOR_ADDITION, instance);
    let mut violations = 0u64;
    let rat = |v: u64| ExactRational::new(v, l).expect("l > 0");
    for &(a, _) in &by_a {
        for (i, &b) in sorted.iter().enumerate() {
            for &b2 in &sorted[i + 1..] {
                let bad = hyp(a, b, b2) && b / l != b2 / l;
                violations += bad as u64;
                tally.check(!bad, || {
                    Counterexample::from_witness(
                        claim::FLOOR_ADDITION,
                        Witness::FloorAddition { interpretation, a: rat(a), b: rat(b), b_prime: rat(b2) },
                    )
                })?;
            }
        }
    }
    if violations > 0 {
        tally.note(format!("{violations} violating triples in total"));
    }
    Ok(tally.finish())
}
