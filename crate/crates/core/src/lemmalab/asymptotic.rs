//! Prefix diagnostics for the long-run behaviour of a trajectory: the
//! `e_n / n` versus `log_q(p/q)` trichotomy, periodicity, and the growth
//! case suggested by `omega_n` and `q^(n+e_n) / p^n`.

use std::cmp::Ordering;
use std::collections::HashMap;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::checks::determinism_check;
use crate::branch::{self, derived_all, BranchParams, BranchStep, BranchTrajectory, PerturbationSpec};
use crate::error::{Error, Result};
use crate::numkernel::ExactRational;

/// Precision attached to the floating-point threshold display.
pub const THRESHOLD_PRECISION: f64 = 1e-12;

const PREFIX_NOTE: &str = "prefix diagnostic, not a limit statement";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdSide {
    Above,
    Equal,
    Below,
}

impl From<Ordering> for ThresholdSide {
    fn from(o: Ordering) -> Self {
        match o {
            Ordering::Greater => ThresholdSide::Above,
            Ordering::Equal => ThresholdSide::Equal,
            Ordering::Less => ThresholdSide::Below,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticRow {
    pub n: usize,
    pub e: u64,
    /// `e_n / n`, absent at `n = 0`.
    pub ratio: Option<ExactRational>,
    /// Approximate `e_n / n`, for display only.
    pub ratio_approx: Option<f64>,
    /// Side of the threshold decided exactly from `q^(n+e_n)` versus `p^n`.
    pub side: Option<ThresholdSide>,
    /// `q^(n+e_n) / p^n`.
    pub inverse_growth: ExactRational,
    pub sigma: ExactRational,
    pub omega: ExactRational,
    pub floor_s: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classification {
    /// `S_{preperiod + period} = S_preperiod`, verified exactly.
    Periodic { period: usize, preperiod: usize },
    RatioAboveThreshold,
    RatioBelowThreshold,
    Inconclusive,
}

/// Which unbounded-growth case the prefix resembles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthCase {
    /// `omega_n` still increasing over the tail.
    Case1,
    /// `omega_n` settled and `q^(n+e_n) / p^n` shrinking towards 0.
    Case2,
    /// `omega_n` settled and `q^(n+e_n) / p^n` bounded away from 0.
    Case3,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub p: u32,
    pub q: u32,
    /// Approximate `log_q(p/q)`.
    pub threshold: f64,
    pub threshold_precision: f64,
    pub rows: Vec<AsymptoticRow>,
    pub classification: Classification,
    pub growth_case: GrowthCase,
    /// Whether the exact side agrees with the floating-point comparison at
    /// every row where the two differ by more than the display precision.
    pub display_consistent: bool,
    pub notes: Vec<String>,
}

fn side_exact(params: &BranchParams, n: usize, e: u64) -> ThresholdSide {
    branch::compare_ratio_to_threshold(params, n, e).into()
}

fn rows(traj: &BranchTrajectory) -> Vec<AsymptoticRow> {
    let params = &traj.params;
    derived_all(traj)
        .into_iter()
        .zip(&traj.steps)
        .map(|(d, st)| {
            let n = st.n;
            let ratio = (n > 0).then(|| ExactRational::new(st.e, n as u64).expect("n > 0"));
            AsymptoticRow {
                n,
                e: st.e,
                ratio_approx: (n > 0).then(|| st.e as f64 / n as f64),
                ratio,
                side: (n > 0).then(|| side_exact(params, n, st.e)),
                inverse_growth: params.growth(n, st.e).recip().expect("nonzero"),
                sigma: st.sigma.clone(),
                omega: d.omega,
                floor_s: st.s.floor(),
            }
        })
        .collect()
}

fn display_consistent(rows: &[AsymptoticRow], threshold: f64) -> bool {
    rows.iter().all(|row| match (row.ratio_approx, row.side) {
        (Some(x), Some(side)) if (x - threshold).abs() > THRESHOLD_PRECISION => {
            side == if x > threshold { ThresholdSide::Above } else { ThresholdSide::Below }
        }
        _ => true,
    })
}

/// Classifies the tail half of the prefix by the exact threshold side.
fn ratio_classification(rows: &[AsymptoticRow]) -> Classification {
    let tail = &rows[rows.len() / 2..];
    let sides: Vec<ThresholdSide> = tail.iter().filter_map(|r| r.side).collect();
    if sides.is_empty() {
        Classification::Inconclusive
    } else if sides.iter().all(|s| *s == ThresholdSide::Above) {
        Classification::RatioAboveThreshold
    } else if sides.iter().all(|s| *s == ThresholdSide::Below) {
        Classification::RatioBelowThreshold
    } else {
        Classification::Inconclusive
    }
}

fn growth_case(rows: &[AsymptoticRow], classification: &Classification) -> GrowthCase {
    if rows.len() < 4 || matches!(classification, Classification::Periodic { .. }) {
        return GrowthCase::Undetermined;
    }
    let mid = rows.len() / 2;
    let (head, tail) = rows.split_at(mid);
    if tail.last().expect("nonempty").omega > tail[0].omega {
        return GrowthCase::Case1;
    }
    let head_min = head.iter().map(|r| &r.inverse_growth).min().expect("nonempty");
    let tail_min = tail.iter().map(|r| &r.inverse_growth).min().expect("nonempty");
    if tail_min < head_min {
        GrowthCase::Case2
    } else {
        GrowthCase::Case3
    }
}

fn log_threshold(params: &BranchParams) -> f64 {
    branch::log_threshold(params)
}

fn assemble(traj: &BranchTrajectory, periodic: Option<(usize, usize)>, mut notes: Vec<String>) -> AsymptoticReport {
    let params = &traj.params;
    let threshold = log_threshold(params);
    let rows = rows(traj);
    let classification = match periodic {
        Some((preperiod, period)) => Classification::Periodic { period, preperiod },
        None => ratio_classification(&rows),
    };
    let growth_case = growth_case(&rows, &classification);
    notes.insert(0, PREFIX_NOTE.to_string());
    AsymptoticReport {
        p: params.p,
        q: params.q,
        threshold,
        threshold_precision: THRESHOLD_PRECISION,
        display_consistent: display_consistent(&rows, threshold),
        rows,
        classification,
        growth_case,
        notes,
    }
}

/// First `(m0, m)` with `S_{m0 + m} = S_{m0}` such that the prefix is
/// `m`-periodic from `m0` on.
fn periodic_tail(traj: &BranchTrajectory) -> Option<(usize, usize)> {
    let s: Vec<&ExactRational> = traj.states().collect();
    for n in 1..s.len() {
        for m0 in 0..n {
            if s[m0] == s[n] && (n..s.len()).all(|i| s[i] == s[i - (n - m0)]) {
                return Some((m0, n - m0));
            }
        }
    }
    None
}

/// Tabulates the prefix diagnostics for a recorded trajectory.
pub fn asymptotic_report(traj: &BranchTrajectory) -> Result<AsymptoticReport> {
    if traj.len() < 2 {
        return Err(Error::TrajectoryTooShort { needed: 2, have: traj.len() });
    }
    let periodic = if traj.spec.is_deterministic() { first_state_repeat(traj) } else { None };
    Ok(assemble(traj, periodic, Vec::new()))
}

/// For state-determined perturbations the pair `(S_n, r_n)` fixes the rest
/// of the trajectory, so its first repeat is a verified period.
fn first_state_repeat(traj: &BranchTrajectory) -> Option<(usize, usize)> {
    let mut seen: HashMap<(&ExactRational, Option<&ExactRational>), usize> = HashMap::new();
    for st in &traj.steps {
        if let Some(r) = &st.r {
            if let Some(&m) = seen.get(&(&st.s, Some(r))) {
                return Some((m, st.n - m));
            }
            seen.insert((&st.s, Some(r)), st.n);
        }
    }
    None
}

/// Iterates from `S_0 = xi` until the first exact repeat or `max_steps`.
///
/// Zero and Syracuse-type perturbations are functions of the state, so the
/// first repeat of `(S_n, r_n)` proves periodicity. Explicit lists are
/// iterated to the end of the list (or `max_steps`) and a period is only
/// reported when it holds over the whole computed prefix.
pub fn cycle_detect(params: &BranchParams, spec: &PerturbationSpec, max_steps: usize) -> Result<AsymptoticReport> {
    if let PerturbationSpec::GridProbe { .. } = spec {
        let traj = branch::iterate_v2(params, spec, max_steps.max(1))?;
        return Ok(assemble(&traj, None, vec!["perturbation is not a function of the state; no period claimed".into()]));
    }
    if !branch::branch_condition(&params.xi, params.q)? {
        return Err(Error::BranchCondition(params.xi.to_string()));
    }
    let mut steps = vec![BranchStep::initial(params.xi.clone())];
    let mut seen: HashMap<(ExactRational, ExactRational), usize> = HashMap::new();
    let mut found = None;
    let mut notes = Vec::new();
    let deterministic = spec.is_deterministic();
    for _ in 0..max_steps {
        let cur = steps.last_mut().expect("nonempty");
        let (r, next) = match branch::step_v2(params, cur, spec) {
            Ok(x) => x,
            Err(Error::PerturbationsExhausted(n)) => {
                notes.push(format!("explicit perturbations exhausted at step {n}"));
                break;
            }
            Err(e) => return Err(e),
        };
        cur.r = Some(r.clone());
        if deterministic {
            if let Some(&m) = seen.get(&(cur.s.clone(), r.clone())) {
                found = Some((m, cur.n - m));
                break;
            }
            seen.insert((cur.s.clone(), r), cur.n);
        }
        steps.push(next);
    }
    // close the repeated state so the trajectory ends on S_{m0 + m}
    if let Some((m0, m)) = found {
        debug_assert_eq!(steps[m0 + m].s, steps[m0].s);
        steps.truncate(m0 + m + 1);
        steps.last_mut().expect("nonempty").r = None;
    }
    let traj = BranchTrajectory { params: params.clone(), spec: spec.clone(), steps };
    if !deterministic {
        found = periodic_tail(&traj);
        if found.is_some() {
            notes.push("period verified over the computed prefix only".into());
        }
    }
    if found.is_none() {
        notes.push(format!("no cycle in {} steps", traj.len() - 1));
    }
    if traj.len() >= 2 {
        let det = determinism_check(&traj)?;
        notes.push(format!("determinism on prefix: {:?} over {} pairs", det.verdict, det.tested_count));
    }
    Ok(assemble(&traj, found, notes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branch::validate_params;

    fn r(s: &str) -> ExactRational {
        s.parse().unwrap()
    }

    #[test]
    fn fixed_point_of_one() {
        let p = BranchParams::with_start(3, 2, r("1")).unwrap();
        let spec = PerturbationSpec::SyracuseType { c: r("2/3"), initial_exponent: 1 };
        let rep = cycle_detect(&p, &spec, 20).unwrap();
        assert_eq!(rep.classification, Classification::Periodic { period: 1, preperiod: 0 });
    }

    #[test]
    fn seven_reaches_fixed_point() {
        let p = validate_params(3, 2, r("14")).unwrap();
        let rep = cycle_detect(&p, &PerturbationSpec::syracuse(r("2/3")), 50).unwrap();
        assert_eq!(rep.classification, Classification::Periodic { period: 1, preperiod: 5 });
    }

    #[test]
    fn zero_perturbation_has_no_cycle() {
        let p = validate_params(3, 2, r("14")).unwrap();
        let rep = cycle_detect(&p, &PerturbationSpec::Zero, 50).unwrap();
        assert!(!matches!(rep.classification, Classification::Periodic { .. }));
        assert!(rep.notes.iter().any(|n| n == "no cycle in 50 steps"));
        assert!(rep.rows.iter().all(|row| row.sigma.is_zero()));
    }

    #[test]
    fn seven_ratio_table() {
        let p = validate_params(3, 2, r("14")).unwrap();
        let t = branch::iterate_v2(&p, &PerturbationSpec::syracuse(r("2/3")), 5).unwrap();
        let rep = asymptotic_report(&t).unwrap();
        assert_eq!(rep.rows[4].ratio, Some(r("3/2")));
        assert_eq!(rep.rows[4].side, Some(ThresholdSide::Above));
        assert!((rep.threshold - 0.584962500721156).abs() < 1e-12);
        assert!(rep.display_consistent);
        assert_eq!(rep.notes[0], PREFIX_NOTE);
    }

    #[test]
    fn short_trajectory_rejected() {
        let p = validate_params(3, 2, r("14")).unwrap();
        let t = branch::iterate_v2(&p, &PerturbationSpec::Zero, 0).unwrap();
        assert!(asymptotic_report(&t).is_err());
    }
}
