//! The Collatz map, its odd-only Syracuse form, the embedding of Syracuse
//! trajectories as Branch sequences with `p = 3`, `q = 2`, and range scans.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::branch::{self, BranchParams, BranchStep, BranchTrajectory, PerturbationSpec};
use crate::error::{Error, Result};
use crate::lemmalab::report::{claim, ClaimTally, Counterexample, Evaluation, StructureRelation, Witness};
use crate::lemmalab::{self, ClaimReport, ProbeOptions};
use crate::numkernel::{self, biguint_string, ExactRational};

/// Default step cap for trajectories and scans.
pub const DEFAULT_CAP: u64 = 1_000_000;

/// The perturbation constant `c = q / p` of the embedding.
pub fn embedding_constant() -> ExactRational {
    ExactRational::new(2, 3).expect("nonzero")
}

/// `(3t + 1) / 2` for odd `t`, `t / 2` for even `t`.
pub fn collatz_step(t: &BigUint) -> Result<BigUint> {
    if t.is_zero() {
        return Err(Error::ZeroSeed);
    }
    Ok(if t.is_odd() { (t * 3u32 + 1u32) >> 1 } else { t >> 1 })
}

fn check_odd(w: &BigUint) -> Result<()> {
    if w.is_even() {
        return Err(Error::NotOddPositive(w.to_string()));
    }
    Ok(())
}

/// `u = (3w + 1) / 2`, `h = v2(u)`, returns `(u / 2^h, h)`.
pub fn odd_step(w: &BigUint) -> Result<(BigUint, u32)> {
    check_odd(w)?;
    let u: BigUint = (w * 3u32 + 1u32) >> 1;
    let h = numkernel::int_valuation(&u, 2)?;
    Ok((u >> h, h))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyracuseStep {
    pub n: usize,
    #[serde(with = "biguint_string")]
    pub w: BigUint,
    /// `h_{n+1}`, the valuation consumed to reach `W_{n+1}`; absent on the last step.
    pub h: Option<u32>,
    /// `e'_n = h_1 + ... + h_n`.
    pub e_prime: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyracuseTrajectory {
    #[serde(with = "biguint_string")]
    pub w0: BigUint,
    pub cap: u64,
    pub reached_one: bool,
    pub steps: Vec<SyracuseStep>,
}

impl SyracuseTrajectory {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = &BigUint> {
        self.steps.iter().map(|s| &s.w)
    }

    /// `h_{n+1}` for every recorded state, including the continuation of the last one.
    pub fn next_valuations(&self) -> Result<Vec<u32>> {
        let mut hs: Vec<u32> = self.steps.iter().filter_map(|s| s.h).collect();
        hs.push(odd_step(&self.steps.last().expect("nonempty").w)?.1);
        Ok(hs)
    }
}

/// Iterates `odd_step` from `w0` for `steps` steps, or until `W = 1` when
/// `stop_at_one`. Checks at every step, in integers, that
/// `W_n 2^(n + e'_n) = 3^n W_0 + A_n` with `A_{n+1} = 3 A_n + 2^(n + e'_n)`,
/// which is the closed form `W_n = (3^n / 2^(n+e'_n)) (W_0 + Sigma'_n)`
/// multiplied out with `Sigma'_n = A_n / 3^n`.
fn iterate(w0: &BigUint, steps: u64, stop_at_one: bool) -> Result<SyracuseTrajectory> {
    check_odd(w0)?;
    let mut out = vec![SyracuseStep { n: 0, w: w0.clone(), h: None, e_prime: 0 }];
    let mut a = BigUint::zero();
    let mut pow3 = BigUint::one();
    let mut reached_one = w0.is_one();
    while (out.len() as u64) <= steps && !(stop_at_one && reached_one) {
        let cur = out.last_mut().expect("nonempty");
        let (next, h) = odd_step(&cur.w)?;
        cur.h = Some(h);
        let shift = cur.n as u64 + cur.e_prime;
        a = &a * 3u32 + (BigUint::one() << shift);
        pow3 *= 3u32;
        let e_prime = cur.e_prime + h as u64;
        let n = cur.n + 1;
        if (&next << (n as u64 + e_prime)) != &pow3 * w0 + &a {
            return Err(Error::Internal(format!("closed form fails for W0 = {w0} at n = {n}")));
        }
        reached_one |= next.is_one();
        out.push(SyracuseStep { n, w: next, h: None, e_prime });
    }
    Ok(SyracuseTrajectory { w0: w0.clone(), cap: steps, reached_one, steps: out })
}

/// Runs from `w0` until `W = 1` or `cap` steps.
pub fn trajectory(w0: &BigUint, cap: u64) -> Result<SyracuseTrajectory> {
    iterate(w0, cap, true)
}

/// Runs exactly `steps` steps, continuing through the fixed point `1 -> 1`.
pub fn trajectory_steps(w0: &BigUint, steps: u64) -> Result<SyracuseTrajectory> {
    iterate(w0, steps, false)
}

/// A Syracuse trajectory seen as a Branch trajectory, with the checks that
/// tie the two together.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Embedding {
    pub trajectory: BranchTrajectory,
    /// The valuation recurrence reproduces the `h`-derived states and valuations.
    pub consistency: ClaimReport,
    /// Every perturbation keeps the integer part of its state.
    pub admissibility: ClaimReport,
}

/// `S_n = 2 W_n / 2^(h_{n+1})` for every recorded state.
fn embedded_states(w: &[&BigUint], hs: &[u32]) -> Vec<ExactRational> {
    w.iter().zip(hs).map(|(w, &h)| ExactRational::from((*w).clone() << 1).scale_pow(2, -(h as i64))).collect()
}

/// `h`-derived Branch trajectory: `g_0 = 0`, `g_n = h_{n+1}` for `n >= 1`,
/// `r_0 = (2/3) / 2^(h_1)` and `r_n = (2/3) / 2^(g_n)`.
fn h_derived(traj: &SyracuseTrajectory) -> Result<BranchTrajectory> {
    let hs = traj.next_valuations()?;
    let ws: Vec<&BigUint> = traj.values().collect();
    let s = embedded_states(&ws, &hs);
    let params = BranchParams::with_start(3, 2, s[0].clone())?;
    let c = embedding_constant();
    let spec = PerturbationSpec::SyracuseType { c: c.clone(), initial_exponent: hs[0] };
    let last = s.len() - 1;
    let mut steps: Vec<BranchStep> = Vec::with_capacity(s.len());
    let mut sigma = ExactRational::zero();
    let mut e = 0u64;
    for (n, s_n) in s.into_iter().enumerate() {
        let g = if n == 0 { 0 } else { hs[n] };
        e += g as u64;
        let r_exp = if n == 0 { hs[0] } else { g };
        let r = (n < last).then(|| c.scale_pow(2, -(r_exp as i64)));
        let step = BranchStep { n, s: s_n, r: r.clone(), g, e, sigma: sigma.clone() };
        if let Some(r) = &r {
            sigma += &(r * &params.growth(n, e).recip()?);
        }
        steps.push(step);
    }
    Ok(BranchTrajectory { params, spec, steps })
}

fn embedding_witness(claim_id: &str, w0: &BigUint, n: usize) -> Result<Counterexample> {
    Counterexample::from_witness(claim_id, Witness::Embedding { w0: w0.clone(), n })
}

/// Builds the Branch trajectory of a Syracuse trajectory and cross-checks
/// it against the valuation recurrence run independently from `S_0`.
pub fn embed(traj: &SyracuseTrajectory) -> Result<Embedding> {
    if traj.is_empty() {
        return Err(Error::TrajectoryTooShort { needed: 1, have: 0 });
    }
    let derived = h_derived(traj)?;
    let instance = format!("W0={} states={}", traj.w0, traj.len());
    let independent = branch::iterate_v2(&derived.params, &derived.spec, derived.len() - 1);

    let mut consistency = ClaimTally::new(claim::EMBEDDING, instance.clone());
    match &independent {
        Ok(ind) => {
            for (n, (a, b)) in derived.steps.iter().zip(&ind.steps).enumerate() {
                consistency.check(a == b, || embedding_witness(claim::EMBEDDING, &traj.w0, n))?;
            }
        }
        Err(e) => {
            consistency.note(format!("valuation recurrence failed: {e}"));
            let n = match e {
                Error::Inadmissible { step, .. } | Error::CorruptedState { step, .. } => *step,
                _ => 0,
            };
            consistency.check(false, || embedding_witness(claim::EMBEDDING, &traj.w0, n))?;
        }
    }
    let mut admissibility = ClaimTally::new(claim::ADMISSIBILITY, instance);
    for st in &derived.steps {
        if let Some(r) = &st.r {
            let ok = branch::is_admissible(&st.s, r);
            admissibility.check(ok, || embedding_witness(claim::ADMISSIBILITY, &traj.w0, st.n))?;
        }
    }
    Ok(Embedding { trajectory: derived, consistency: consistency.finish(), admissibility: admissibility.finish() })
}

/// Recomputes the embedding of `w0` at index `n` both ways.
pub(crate) fn embedding_relation(w0: &BigUint, n: usize) -> Result<Evaluation> {
    let traj = trajectory_steps(w0, n as u64 + 1)?;
    let derived = h_derived(&traj)?;
    let st = &derived.steps[n];
    let lhs = format!("S = {}, g = {}, r = {}", st.s, st.g, st.r.clone().unwrap_or_default());
    let admissible = st.r.as_ref().is_none_or(|r| branch::is_admissible(&st.s, r));
    match branch::iterate_v2(&derived.params, &derived.spec, n) {
        Ok(ind) => {
            let other = &ind.steps[n];
            let rhs = format!("S = {}, g = {}", other.s, other.g);
            let same = other.s == st.s && other.g == st.g && other.e == st.e && other.sigma == st.sigma;
            Ok(Evaluation { lhs, rhs, violated: !same || !admissible })
        }
        Err(e) => Ok(Evaluation { lhs, rhs: format!("valuation recurrence failed: {e}"), violated: true }),
    }
}

/// Which of the two binary shapes `2 W` has.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructureCase {
    /// `h` odd: `2W = 2(4^a - 1)/3 + 4^a (2b)` with `b = 1 mod 8`.
    OddValuation,
    /// `h` even: `2W = 2(4^a - 1)/3 + 4^a b` with `b = 6 mod 8`.
    EvenValuation,
}

/// Decomposition of one odd state and the evaluation of its three relations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructureEvaluation {
    pub case: StructureCase,
    pub a: u32,
    pub b: BigInt,
    pub h: u32,
    pub classification: Evaluation,
    pub fractional_part: Evaluation,
    pub odd_successor: Evaluation,
    /// `2 W_next = floor(3 floor(S) / 2) + 1`, which holds in both cases.
    pub floor_successor_holds: bool,
}

/// Classifies `w` and evaluates the fractional-part and successor relations.
pub fn structure_relations(w: &BigUint) -> Result<StructureEvaluation> {
    let (w_next, h) = odd_step(w)?;
    let two_w: BigInt = BigInt::from(w.clone()) << 1;
    let s = ExactRational::from(two_w.clone()).scale_pow(2, -(h as i64));
    let (case, a, mult, residue) =
        if h % 2 == 1 { (StructureCase::OddValuation, (h - 1) / 2, 2u32, 1u32) } else { (StructureCase::EvenValuation, h / 2, 1, 6) };
    let four_a: BigInt = BigInt::one() << (2 * a);
    let low: BigInt = (&four_a - 1) * 2 / 3;
    let (b, rem) = (&two_w - &low).div_mod_floor(&(&four_a * mult));
    let b_mod8 = b.mod_floor(&BigInt::from(8));
    // low 2a bits of 2W read ...1010 from the top of the block down
    let pattern_ok = (0..2 * a as i64).all(|j| {
        let bit = numkernel::digit_at(&ExactRational::from(two_w.clone()), 2, j).expect("base 2");
        bit == (j % 2) as u32
    });
    let floor_s = s.floor();
    let class_ok = rem.is_zero() && b.sign() != num_bigint::Sign::Minus && b_mod8 == BigInt::from(residue) && pattern_ok && floor_s == b;
    let classification = Evaluation {
        lhs: format!("h = {h}, a = {a}, b = {b}, b mod 8 = {b_mod8}, floor(S) = {floor_s}"),
        rhs: format!("b = {residue} mod 8, floor(S) = b, alternating low block"),
        violated: !class_ok,
    };

    let frac = s.fract();
    let base = ExactRational::new(if case == StructureCase::OddValuation { 1 } else { 2 }, 3)?;
    let expected = base - ExactRational::new(2, 3)?.scale_pow(2, -(h as i64));
    let fractional_part = Evaluation { lhs: frac.to_string(), rhs: expected.to_string(), violated: frac != expected };

    let two_w_next = ExactRational::from(w_next.clone() << 1);
    let literal = (ExactRational::from(floor_s.clone() * 3) + ExactRational::one()) / ExactRational::from(2u32);
    let odd_successor = Evaluation { lhs: two_w_next.to_string(), rhs: literal.to_string(), violated: two_w_next != literal };
    let three_floor: BigInt = floor_s * 3;
    let floor_successor_holds = BigInt::from(w_next << 1) == three_floor.div_floor(&BigInt::from(2)) + 1;

    Ok(StructureEvaluation { case, a, b, h, classification, fractional_part, odd_successor, floor_successor_holds })
}

/// Checks the binary structure of state `n`: its classification, the
/// fractional part of `S_n`, and `2 W_{n+1} = (3 floor(S_n) + 1) / 2`.
pub fn structure_check(traj: &SyracuseTrajectory, n: usize) -> Result<Vec<ClaimReport>> {
    let st = traj.steps.get(n).ok_or(Error::IndexOutOfRange { index: n, len: traj.len() })?;
    if st.h.is_none() {
        return Err(Error::IndexOutOfRange { index: n, len: traj.len() - 1 });
    }
    let ev = structure_relations(&st.w)?;
    let instance = format!("W0={} n={n} W={} case={:?}", traj.w0, st.w, ev.case);
    let rels = [
        (claim::STRUCTURE_CASE, StructureRelation::Classification, &ev.classification),
        (claim::FRACTIONAL_PART, StructureRelation::FractionalPart, &ev.fractional_part),
        (claim::ODD_SUCCESSOR, StructureRelation::OddSuccessor, &ev.odd_successor),
    ];
    rels.into_iter()
        .map(|(id, relation, e)| {
            let mut tally = ClaimTally::new(id, instance.clone());
            tally.check(!e.violated, || Counterexample::from_witness(id, Witness::Structure { w: st.w.clone(), relation }))?;
            if relation == StructureRelation::OddSuccessor && e.violated && ev.floor_successor_holds {
                tally.note("2 W_next = floor(3 floor(S) / 2) + 1 holds");
            }
            Ok(tally.finish())
        })
        .collect()
}

/// Optional per-seed checks run during a scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanCheck {
    Embedding,
    Structure,
    Independence,
    Domination,
    Determinism,
    MinBound,
}

impl ScanCheck {
    pub const ALL: [ScanCheck; 6] = [
        ScanCheck::Embedding,
        ScanCheck::Structure,
        ScanCheck::Independence,
        ScanCheck::Domination,
        ScanCheck::Determinism,
        ScanCheck::MinBound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScanCheck::Embedding => "embedding",
            ScanCheck::Structure => "structure",
            ScanCheck::Independence => "independence",
            ScanCheck::Domination => "domination",
            ScanCheck::Determinism => "determinism",
            ScanCheck::MinBound => "min-bound",
        }
    }
}

impl std::str::FromStr for ScanCheck {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScanCheck::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| Error::ParseRational(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub cap: u64,
    pub checks: Vec<ScanCheck>,
    pub probe: ProbeOptions,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { cap: DEFAULT_CAP, checks: Vec::new(), probe: ProbeOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSummary {
    #[serde(with = "biguint_string")]
    pub w0: BigUint,
    /// Odd steps to reach 1; absent when the cap was hit.
    pub steps_to_one: Option<u64>,
    #[serde(with = "biguint_string")]
    pub max_w: BigUint,
    #[serde(with = "biguint_string")]
    pub min_w: BigUint,
    pub min_s: ExactRational,
    pub max_h: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanSummary {
    #[serde(with = "biguint_string")]
    pub from: BigUint,
    #[serde(with = "biguint_string")]
    pub to: BigUint,
    pub cap: u64,
    pub checks: Vec<ScanCheck>,
    pub seed_count: u64,
    pub resolved_count: u64,
    /// Seeds that did not reach 1 within the cap.
    pub failures: Vec<String>,
    pub max_steps: Option<(String, u64)>,
    pub max_w: Option<(String, String)>,
    pub max_h: u32,
    /// Largest per-seed minimum of `S_n` and of `W_n`.
    pub worst_min_s: Option<ExactRational>,
    pub worst_min_w: Option<String>,
    pub reports: Vec<ClaimReport>,
    pub seeds: Vec<SeedSummary>,
}

impl ScanSummary {
    pub fn any_violation(&self) -> bool {
        self.reports.iter().any(ClaimReport::is_violated)
    }
}

struct SeedOutcome {
    summary: SeedSummary,
    reports: Vec<ClaimReport>,
}

fn scan_seed(w0: &BigUint, opts: &ScanOptions) -> Result<SeedOutcome> {
    let traj = trajectory(w0, opts.cap)?;
    let hs = traj.next_valuations()?;
    let ws: Vec<&BigUint> = traj.values().collect();
    let min_s = embedded_states(&ws, &hs).into_iter().min().expect("nonempty");
    let summary = SeedSummary {
        w0: w0.clone(),
        steps_to_one: traj.reached_one.then(|| traj.len() as u64 - 1),
        max_w: ws.iter().max().map(|w| (*w).clone()).expect("nonempty"),
        min_w: ws.iter().min().map(|w| (*w).clone()).expect("nonempty"),
        min_s,
        max_h: traj.steps.iter().filter_map(|s| s.h).max().unwrap_or(0),
    };
    let mut reports = Vec::new();
    if opts.checks.is_empty() {
        return Ok(SeedOutcome { summary, reports });
    }
    let has = |c| opts.checks.contains(&c);
    let emb = embed(&traj)?;
    if has(ScanCheck::Embedding) {
        reports.push(emb.consistency.clone());
        reports.push(emb.admissibility.clone());
    }
    if has(ScanCheck::Structure) {
        for n in 0..traj.len() - 1 {
            reports.extend(structure_check(&traj, n)?);
        }
    }
    let bt = &emb.trajectory;
    if has(ScanCheck::Independence) {
        let ds = branch::derived_all(bt);
        for (st, d) in bt.steps.iter().zip(&ds) {
            reports.extend(lemmalab::independence_probe(&bt.params, st, &opts.probe, Some(d))?);
        }
    }
    if bt.len() >= 2 {
        if has(ScanCheck::Domination) {
            reports.extend(lemmalab::domination_check(bt, opts.probe.k_max)?);
        }
        if has(ScanCheck::Determinism) {
            reports.push(lemmalab::determinism_check(bt)?);
        }
    }
    if has(ScanCheck::MinBound) {
        reports.push(lemmalab::min_bound_check(bt)?);
    }
    Ok(SeedOutcome { summary, reports })
}

/// Scans every odd seed in `[from, to]` on `workers` threads. The summary
/// is independent of `workers`: seeds are processed in parallel but
/// collected in seed order.
pub fn scan(from: &BigUint, to: &BigUint, opts: &ScanOptions, workers: usize) -> Result<ScanSummary> {
    check_odd(from)?;
    check_odd(to)?;
    if from > to {
        return Err(Error::InvertedRange { from: from.to_string(), to: to.to_string() });
    }
    let count = ((to - from) >> 1u32).to_u64().ok_or_else(|| Error::Internal("range too large".into()))? + 1;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Internal(e.to_string()))?;
    let outcomes: Vec<SeedOutcome> = pool.install(|| {
        (0..count).into_par_iter().map(|i| scan_seed(&(from + BigUint::from(2 * i)), opts)).collect::<Result<Vec<_>>>()
    })?;

    let mut checks = opts.checks.clone();
    checks.sort_unstable();
    checks.dedup();
    let instance = format!("odd W0 in [{from}, {to}] cap={}", opts.cap);
    let mut by_claim: BTreeMap<String, Vec<&ClaimReport>> = BTreeMap::new();
    for o in &outcomes {
        for r in &o.reports {
            by_claim.entry(r.claim_id.clone()).or_default().push(r);
        }
    }
    let reports = by_claim
        .iter()
        .map(|(id, rs)| lemmalab::merge_reports(id, instance.clone(), rs.iter().copied()))
        .collect();

    let seeds: Vec<SeedSummary> = outcomes.into_iter().map(|o| o.summary).collect();
    let failures: Vec<String> = seeds.iter().filter(|s| s.steps_to_one.is_none()).map(|s| s.w0.to_string()).collect();
    let max_steps = seeds
        .iter()
        .filter_map(|s| s.steps_to_one.map(|k| (s, k)))
        .fold(None::<(&SeedSummary, u64)>, |best, (s, k)| match best {
            Some((_, bk)) if bk >= k => best,
            _ => Some((s, k)),
        })
        .map(|(s, k)| (s.w0.to_string(), k));
    let max_w = seeds
        .iter()
        .fold(None::<&SeedSummary>, |best, s| match best {
            Some(b) if b.max_w >= s.max_w => best,
            _ => Some(s),
        })
        .map(|s| (s.w0.to_string(), s.max_w.to_string()));
    Ok(ScanSummary {
        from: from.clone(),
        to: to.clone(),
        cap: opts.cap,
        checks,
        seed_count: count,
        resolved_count: count - failures.len() as u64,
        failures,
        max_steps,
        max_w,
        max_h: seeds.iter().map(|s| s.max_h).max().unwrap_or(0),
        worst_min_s: seeds.iter().map(|s| s.min_s.clone()).max(),
        worst_min_w: seeds.iter().map(|s| &s.min_w).max().map(ToString::to_string),
        reports,
        seeds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(n: u64) -> BigUint {
        BigUint::from(n)
    }

    fn r(s: &str) -> ExactRational {
        s.parse().unwrap()
    }

    #[test]
    fn collatz_examples() {
        assert_eq!(collatz_step(&u(7)).unwrap(), u(11));
        assert_eq!(collatz_step(&u(4)).unwrap(), u(2));
        assert_eq!(collatz_step(&u(2)).unwrap(), u(1));
        assert_eq!(collatz_step(&u(1)).unwrap(), u(2));
        assert!(matches!(collatz_step(&u(0)), Err(Error::ZeroSeed)));
    }

    #[test]
    fn odd_step_examples() {
        assert_eq!(odd_step(&u(7)).unwrap(), (u(11), 0));
        assert_eq!(odd_step(&u(13)).unwrap(), (u(5), 2));
        assert_eq!(odd_step(&u(5)).unwrap(), (u(1), 3));
        assert_eq!(odd_step(&u(1)).unwrap(), (u(1), 1));
        assert!(odd_step(&u(4)).is_err());
        assert!(odd_step(&u(0)).is_err());
    }

    #[test]
    fn trajectory_examples() {
        let t = trajectory(&u(7), 100).unwrap();
        assert_eq!(t.values().cloned().collect::<Vec<_>>(), [7, 11, 17, 13, 5, 1].map(u));
        assert_eq!(t.steps.iter().filter_map(|s| s.h).collect::<Vec<_>>(), [0, 0, 1, 2, 3]);
        assert!(t.reached_one);
        let t = trajectory(&u(1), 10).unwrap();
        assert_eq!(t.len(), 1);
        let t = trajectory(&u(27), 10_000).unwrap();
        assert!(t.reached_one);
        let t = trajectory(&u(27), 5).unwrap();
        assert!(!t.reached_one);
        assert_eq!(t.len(), 6);
    }

    #[test]
    fn embed_seven() {
        let e = embed(&trajectory(&u(7), 100).unwrap()).unwrap();
        let s: Vec<_> = e.trajectory.states().cloned().collect();
        assert_eq!(s, ["14", "22", "17", "13/2", "5/4", "1"].map(r));
        assert_eq!(e.trajectory.steps.iter().map(|s| s.g).collect::<Vec<_>>(), [0, 0, 1, 2, 3, 1]);
        assert!(e.consistency.is_pass(), "{:?}", e.consistency);
        assert!(e.admissibility.is_pass());
    }

    #[test]
    fn embed_one() {
        let e = embed(&trajectory_steps(&u(1), 3).unwrap()).unwrap();
        assert!(e.trajectory.states().all(|s| *s == r("1")));
        assert!(e.trajectory.perturbations().iter().all(|x| *x == r("1/3")));
        assert!(e.consistency.is_pass());
    }

    #[test]
    fn structure_examples() {
        let t = trajectory(&u(7), 100).unwrap();
        // n = 3: S = 13/2, even valuation, {S} = 2/3 - 2/12
        let ev = structure_relations(&u(13)).unwrap();
        assert_eq!((ev.case, ev.a, ev.b.clone()), (StructureCase::EvenValuation, 1, BigInt::from(6)));
        assert!(!ev.fractional_part.violated);
        assert_eq!(ev.fractional_part.lhs, "1/2");
        // n = 2: S = 17, odd valuation, 2 W3 = 26
        let reps = structure_check(&t, 2).unwrap();
        assert!(reps.iter().all(ClaimReport::is_pass), "{reps:?}");
        // the literal successor identity holds only for odd valuations
        let reps = structure_check(&t, 0).unwrap();
        assert!(reps[0].is_pass() && reps[1].is_pass());
        assert!(reps[2].is_violated());
        assert!(reps[2].certificate.as_ref().unwrap().replay().unwrap());
        assert!(ev.floor_successor_holds);
        assert!(structure_check(&t, 5).is_err());
    }

    #[test]
    fn scan_examples() {
        let s = scan(&u(7), &u(7), &ScanOptions { cap: 10, ..Default::default() }, 1).unwrap();
        assert_eq!(s.seeds[0].steps_to_one, Some(5));
        assert_eq!(s.seeds[0].max_w, u(17));
        let s = scan(&u(1), &u(1), &ScanOptions { cap: 1, ..Default::default() }, 1).unwrap();
        assert!(s.failures.is_empty());
        assert!(scan(&u(9), &u(7), &ScanOptions::default(), 1).is_err());
        assert!(scan(&u(2), &u(7), &ScanOptions::default(), 1).is_err());
    }

    #[test]
    fn scan_is_worker_independent() {
        let opts = ScanOptions { cap: 1000, checks: ScanCheck::ALL.to_vec(), probe: ProbeOptions { k_max: 4, grid: 16 } };
        let a = scan(&u(1), &u(41), &opts, 1).unwrap();
        let b = scan(&u(1), &u(41), &opts, 4).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
