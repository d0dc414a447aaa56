//! Claim reports and self-contained counterexample certificates.

use num_bigint::{BigInt, BigUint};
use serde::{Deserialize, Serialize};

use crate::branch::{self, derived_all, BranchParams, BranchStep, BranchTrajectory, PerturbationSpec};
use crate::error::{Error, Result};
use crate::numkernel::ExactRational;
use crate::syracuse;

pub mod claim {
    pub const CARRY_INDEPENDENCE: &str = "carry-independence";
    pub const CARRY_INDEPENDENCE_DELTA: &str = "carry-independence-delta";
    pub const CARRY_INDEPENDENCE_DELTA_ACTUAL: &str = "carry-independence-delta-actual";
    pub const FLOOR_ADDITION: &str = "floor-addition";
    pub const DOMINATION: &str = "domination";
    pub const DOMINATION_BASE_CASE: &str = "domination-base-case";
    pub const OMEGA_FLOOR_RECURSION: &str = "omega-floor-recursion";
    pub const DELTA_BOUNDS: &str = "delta-omega-bounds";
    pub const STATE_BOUNDS: &str = "state-bounds";
    pub const SUM_BOUNDS: &str = "sum-bounds";
    pub const MIN_BOUND: &str = "min-bound";
    pub const DETERMINISM: &str = "determinism";
    pub const EMBEDDING: &str = "embedding-consistency";
    pub const STRUCTURE_CASE: &str = "structure-classification";
    pub const FRACTIONAL_PART: &str = "fractional-part";
    pub const ODD_SUCCESSOR: &str = "odd-successor";
    pub const ADMISSIBILITY: &str = "admissibility";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Violated,
    PreconditionFailed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimReport {
    pub claim_id: String,
    pub instance: String,
    pub verdict: Verdict,
    pub certificate: Option<Counterexample>,
    pub tested_count: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ClaimReport {
    pub fn precondition_failed(claim_id: &str, instance: impl Into<String>, note: impl Into<String>) -> Self {
        ClaimReport {
            claim_id: claim_id.to_string(),
            instance: instance.into(),
            verdict: Verdict::PreconditionFailed,
            certificate: None,
            tested_count: 0,
            notes: vec![note.into()],
        }
    }

    pub fn is_pass(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn is_violated(&self) -> bool {
        self.verdict == Verdict::Violated
    }
}

/// Accumulates checks of one claim and keeps the first counterexample.
#[derive(Debug)]
pub struct ClaimTally {
    report: ClaimReport,
}

impl ClaimTally {
    pub fn new(claim_id: &str, instance: impl Into<String>) -> Self {
        ClaimTally {
            report: ClaimReport {
                claim_id: claim_id.to_string(),
                instance: instance.into(),
                verdict: Verdict::Pass,
                certificate: None,
                tested_count: 0,
                notes: Vec::new(),
            },
        }
    }

    /// Counts one tested case; `witness` is only built on the first failure.
    pub fn check(&mut self, holds: bool, witness: impl FnOnce() -> Result<Counterexample>) -> Result<()> {
        self.report.tested_count += 1;
        if !holds && self.report.certificate.is_none() {
            self.report.verdict = Verdict::Violated;
            self.report.certificate = Some(witness()?);
        }
        Ok(())
    }

    pub fn add_tested(&mut self, n: u64) {
        self.report.tested_count += n;
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.report.notes.push(note.into());
    }

    pub fn violated(&self) -> bool {
        self.report.certificate.is_some()
    }

    pub fn finish(self) -> ClaimReport {
        self.report
    }
}

/// Lemma 2.2 hypothesis reading (see [`crate::lemmalab::floor_addition_search`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpretation {
    IntegerPart,
    AllScales,
}

/// Relation checked on a replayed Branch trajectory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "relation", rename_all = "snake_case")]
pub enum TrajectoryRelation {
    /// `floor(Delta_n / q^k) = floor(Omega_n / q^k)`.
    Domination { n: usize, k: u32 },
    /// `Delta_1 = Omega_1`.
    DominationBaseCase,
    /// `floor(Omega_{n+1} / q^k) = floor(p Omega_n / q^(1 + g_{n+1} + k))`.
    OmegaFloorRecursion { n: usize, k: u32 },
    /// `Omega_n < Delta_n < Omega_n + q^2`, or `<=` on the left when not strict.
    DeltaBounds { n: usize, strict: bool },
    /// `Z_n < S_n < Z_n + q^2`, or `<=` on the left when not strict.
    StateBounds { n: usize, strict: bool },
    /// `omega_n < Sigma_n < omega_n + q^2 q^(n+e_n) / p^n`, or `<=` on the left.
    SumBounds { n: usize, strict: bool },
    /// `floor(S_n) = floor(S_m)` implies equal successors and equal next perturbations.
    Determinism { n: usize, m: usize },
    /// `min S <= q^2` over the replayed prefix.
    MinBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructureRelation {
    /// `2W` splits as an alternating low block plus `4^a (2b)` with `b = 1 mod 8`
    /// (odd `h`) or `4^a b` with `b = 6 mod 8` (even `h`).
    Classification,
    /// `{S} = 1/3 - 2/(3 2^h)` (odd `h`) or `2/3 - 2/(3 2^h)` (even `h`).
    FractionalPart,
    /// `2 W_next = (3 floor(S) + 1) / 2`.
    OddSuccessor,
}

/// Self-contained witness data; `evaluate` recomputes the relation from it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// `floor(A + B) = floor(A + B')` (at every scale `2^k` for all_scales)
    /// while `floor(B) != floor(B')`.
    FloorAddition { interpretation: Interpretation, a: ExactRational, b: ExactRational, b_prime: ExactRational },
    /// Two admissible perturbations of a branch-condition state whose
    /// floors `floor(p (S + r) / q^(1+k))` differ.
    IndependenceFloor { p: u32, q: u32, s: ExactRational, r1: ExactRational, r2: ExactRational, k: u32 },
    /// Positive admissible `r` for state `s` with `Delta = s - c`, where
    /// `floor(Delta + r) != floor(Delta)` or
    /// `floor(p (Delta + r) / q^(1+k)) != floor(p Delta / q^(1+k))`.
    DeltaTransfer { p: u32, q: u32, s: ExactRational, c: ExactRational, r: ExactRational, k: u32 },
    /// Branch trajectory from `start` driven by the explicit perturbations.
    Trajectory {
        p: u32,
        q: u32,
        start: ExactRational,
        perturbations: Vec<ExactRational>,
        #[serde(flatten)]
        relation: TrajectoryRelation,
    },
    /// Odd Syracuse state `w` and its successor.
    Structure {
        #[serde(with = "crate::numkernel::biguint_string")]
        w: BigUint,
        relation: StructureRelation,
    },
    /// Syracuse seed whose embedding disagrees with the valuation recurrence at `n`.
    Embedding {
        #[serde(with = "crate::numkernel::biguint_string")]
        w0: BigUint,
        n: usize,
    },
}

/// A certificate: the witness plus the two sides of the violated relation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub claim_id: String,
    pub witness: Witness,
    pub lhs: String,
    pub rhs: String,
}

/// Outcome of recomputing a witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evaluation {
    pub lhs: String,
    pub rhs: String,
    pub violated: bool,
}

impl Counterexample {
    /// Evaluates `witness` and packages it; fails if it does not actually violate.
    pub fn from_witness(claim_id: &str, witness: Witness) -> Result<Self> {
        let ev = witness.evaluate()?;
        if !ev.violated {
            return Err(Error::Internal(format!("witness for {claim_id} does not violate its relation")));
        }
        Ok(Counterexample { claim_id: claim_id.to_string(), witness, lhs: ev.lhs, rhs: ev.rhs })
    }

    /// Recomputes the witness from scratch: true iff it still violates the
    /// relation with the recorded sides.
    pub fn replay(&self) -> Result<bool> {
        let ev = self.witness.evaluate()?;
        Ok(ev.violated && ev.lhs == self.lhs && ev.rhs == self.rhs)
    }
}

fn floor_div_pow(x: &ExactRational, q: u32, k: i64) -> BigInt {
    x.scale_pow(q, -k).floor()
}

fn pair(lhs: impl ToString, rhs: impl ToString, violated: bool) -> Evaluation {
    Evaluation { lhs: lhs.to_string(), rhs: rhs.to_string(), violated }
}

fn branch_state_ok(p: u32, q: u32, s: &ExactRational) -> Result<BranchParams> {
    let params = BranchParams::with_start(p, q, s.clone())?;
    if !branch::branch_condition(s, q)? {
        return Err(Error::BranchCondition(s.to_string()));
    }
    Ok(params)
}

/// Rebuilds the trajectory from `start` by explicit stepping.
pub fn replay_trajectory(p: u32, q: u32, start: &ExactRational, rs: &[ExactRational]) -> Result<BranchTrajectory> {
    let params = branch_state_ok(p, q, start)?;
    let mut steps = vec![BranchStep::initial(start.clone())];
    for r in rs {
        let cur = steps.last_mut().expect("nonempty");
        let next = branch::step_v2_with(&params, cur, r)?;
        cur.r = Some(r.clone());
        steps.push(next);
    }
    Ok(BranchTrajectory { params, spec: PerturbationSpec::Explicit { values: rs.to_vec() }, steps })
}

impl Witness {
    pub fn evaluate(&self) -> Result<Evaluation> {
        match self {
            Witness::FloorAddition { interpretation, a, b, b_prime } => {
                let hyp = crate::lemmalab::floor_addition_hypothesis(*interpretation, a, b, b_prime);
                let (fb, fb2) = (b.floor(), b_prime.floor());
                Ok(pair(format!("floor(B) = {fb}"), format!("floor(B') = {fb2}"), hyp && fb != fb2))
            }
            Witness::IndependenceFloor { p, q, s, r1, r2, k } => {
                let params = branch_state_ok(*p, *q, s)?;
                if !branch::is_admissible(s, r1) || !branch::is_admissible(s, r2) {
                    return Err(Error::Internal("witness perturbation is not admissible".into()));
                }
                let f = |r: &ExactRational| floor_div_pow(&((s + r) * params.p_rat()), *q, 1 + *k as i64);
                let (l, r) = (f(r1), f(r2));
                Ok(pair(l.clone(), r.clone(), l != r))
            }
            Witness::DeltaTransfer { p, q, s, c, r, k } => {
                let params = branch_state_ok(*p, *q, s)?;
                if !branch::is_admissible(s, r) || !r.is_positive() {
                    return Err(Error::Internal("witness perturbation is not positive and admissible".into()));
                }
                let delta = s - c;
                let shifted = &delta + r;
                let int_ok = shifted.floor() == delta.floor();
                let l = floor_div_pow(&(&shifted * &params.p_rat()), *q, 1 + *k as i64);
                let rr = floor_div_pow(&(&delta * &params.p_rat()), *q, 1 + *k as i64);
                Ok(Evaluation {
                    lhs: format!("floor(D + r) = {}, scaled floor = {l}", shifted.floor()),
                    rhs: format!("floor(D) = {}, scaled floor = {rr}", delta.floor()),
                    violated: !int_ok || l != rr,
                })
            }
            Witness::Trajectory { p, q, start, perturbations, relation } => {
                let traj = replay_trajectory(*p, *q, start, perturbations)?;
                evaluate_relation(&traj, relation)
            }
            Witness::Structure { w, relation } => {
                let ev = syracuse::structure_relations(w)?;
                Ok(match relation {
                    StructureRelation::Classification => ev.classification,
                    StructureRelation::FractionalPart => ev.fractional_part,
                    StructureRelation::OddSuccessor => ev.odd_successor,
                })
            }
            Witness::Embedding { w0, n } => syracuse::embedding_relation(w0, *n),
        }
    }
}

fn need(traj: &BranchTrajectory, len: usize) -> Result<()> {
    if traj.len() < len {
        return Err(Error::TrajectoryTooShort { needed: len, have: traj.len() });
    }
    Ok(())
}

fn bounds(lo: &ExactRational, mid: &ExactRational, hi: &ExactRational, strict: bool) -> bool {
    let left = if strict { lo < mid } else { lo <= mid };
    left && mid < hi
}

pub(crate) fn evaluate_relation(traj: &BranchTrajectory, relation: &TrajectoryRelation) -> Result<Evaluation> {
    let params = &traj.params;
    let q = params.q;
    let q2 = ExactRational::from(q * q);
    match relation {
        TrajectoryRelation::Domination { n, k } => {
            need(traj, n + 1)?;
            let d = &derived_all(traj)[*n];
            let (l, r) = (floor_div_pow(&d.delta, q, *k as i64), floor_div_pow(&d.big_omega, q, *k as i64));
            Ok(pair(l.clone(), r.clone(), l != r))
        }
        TrajectoryRelation::DominationBaseCase => {
            need(traj, 2)?;
            let d = &derived_all(traj)[1];
            Ok(pair(&d.delta, &d.big_omega, d.delta != d.big_omega))
        }
        TrajectoryRelation::OmegaFloorRecursion { n, k } => {
            need(traj, n + 2)?;
            let ds = derived_all(traj);
            let g = traj.steps[n + 1].g as i64;
            let l = floor_div_pow(&ds[n + 1].big_omega, q, *k as i64);
            let r = floor_div_pow(&(&ds[*n].big_omega * &params.p_rat()), q, 1 + g + *k as i64);
            Ok(pair(l.clone(), r.clone(), l != r))
        }
        TrajectoryRelation::DeltaBounds { n, strict } => {
            need(traj, n + 1)?;
            let d = &derived_all(traj)[*n];
            let hi = &d.big_omega + &q2;
            Ok(pair(&d.delta, format!("[{}, {hi})", d.big_omega), !bounds(&d.big_omega, &d.delta, &hi, *strict)))
        }
        TrajectoryRelation::StateBounds { n, strict } => {
            need(traj, n + 1)?;
            let d = &derived_all(traj)[*n];
            let s = &traj.steps[*n].s;
            let hi = &d.z + &q2;
            Ok(pair(s, format!("[{}, {hi})", d.z), !bounds(&d.z, s, &hi, *strict)))
        }
        TrajectoryRelation::SumBounds { n, strict } => {
            need(traj, n + 1)?;
            let st = &traj.steps[*n];
            let d = &derived_all(traj)[*n];
            let hi = &d.omega + &(params.growth(*n, st.e).recip()? * q2);
            Ok(pair(&st.sigma, format!("[{}, {hi})", d.omega), !bounds(&d.omega, &st.sigma, &hi, *strict)))
        }
        TrajectoryRelation::Determinism { n, m } => {
            need(traj, n + 2)?;
            let (a, b) = (&traj.steps[*n], &traj.steps[*m]);
            if a.s.floor() != b.s.floor() || m >= n {
                return Ok(pair("hypothesis", "not met", false));
            }
            let (na, nb) = (&traj.steps[n + 1], &traj.steps[m + 1]);
            let show = |st: &BranchStep| match &st.r {
                Some(r) => format!("S = {}, r = {r}", st.s),
                None => format!("S = {}", st.s),
            };
            let r_differ = matches!((&na.r, &nb.r), (Some(x), Some(y)) if x != y);
            Ok(pair(show(na), show(nb), na.s != nb.s || r_differ))
        }
        TrajectoryRelation::MinBound => {
            let min = traj.states().min().cloned().unwrap_or_default();
            Ok(pair(&min, &q2, min > q2))
        }
    }
}
