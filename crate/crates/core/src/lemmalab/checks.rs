//! Trajectory-level checks: largest-perturbation domination and its bounds,
//! determinism, and the minimum bound.

use std::collections::HashMap;

use num_bigint::BigInt;

use super::report::{claim, ClaimReport, ClaimTally, Counterexample, TrajectoryRelation, Witness};
use crate::branch::{derived_all, BranchTrajectory};
use crate::error::{Error, Result};
use crate::numkernel::ExactRational;

fn trajectory_witness(traj: &BranchTrajectory, upto: usize, relation: TrajectoryRelation) -> Witness {
    let rs = traj.perturbations();
    Witness::Trajectory {
        p: traj.params.p,
        q: traj.params.q,
        start: traj.steps[0].s.clone(),
        perturbations: rs[..upto.min(rs.len())].to_vec(),
        relation,
    }
}

fn describe(traj: &BranchTrajectory) -> String {
    format!("p={} q={} S0={} spec={} states={}", traj.params.p, traj.params.q, traj.steps[0].s, traj.spec, traj.len())
}

fn floor_div_pow(x: &ExactRational, q: u32, k: i64) -> BigInt {
    x.scale_pow(q, -k).floor()
}

/// Checks largest-perturbation domination `floor(Delta_n / q^k) =
/// floor(Omega_n / q^k)` for `n >= 1`, the base case `Delta_1 = Omega_1`,
/// the recursion `floor(Omega_{n+1} / q^k) = floor(p Omega_n /
/// q^(1 + g_{n+1} + k))`, and the three equivalent bound chains on
/// `Delta`, `S` and `Sigma`, each for `k` in `2..=k_max`.
///
/// The bound chains are checked with a strict left inequality for `n >= 2`
/// and a non-strict one for `n <= 1`, where `Delta_0 = Omega_0 = 0` and
/// `Delta_1 = Omega_1` make strictness impossible.
pub fn domination_check(traj: &BranchTrajectory, k_max: u32) -> Result<Vec<ClaimReport>> {
    if k_max < 2 {
        return Err(Error::InvertedRange { from: "2".into(), to: k_max.to_string() });
    }
    if traj.len() < 2 {
        return Err(Error::TrajectoryTooShort { needed: 2, have: traj.len() });
    }
    let ids = [
        claim::DOMINATION,
        claim::DOMINATION_BASE_CASE,
        claim::OMEGA_FLOOR_RECURSION,
        claim::DELTA_BOUNDS,
        claim::STATE_BOUNDS,
        claim::SUM_BOUNDS,
    ];
    let instance = format!("{} k=2..{k_max}", describe(traj));
    if let Some((i, r)) = traj.perturbations().iter().enumerate().find(|(_, r)| !r.is_positive()) {
        let note = format!("perturbations must be positive: r[{i}] = {r}");
        return Ok(ids.iter().map(|id| ClaimReport::precondition_failed(id, instance.clone(), note.clone())).collect());
    }
    let params = &traj.params;
    let q = params.q;
    let q2 = ExactRational::from(q * q);
    let ds = derived_all(traj);
    let mut tallies = ids.map(|id| ClaimTally::new(id, instance.clone()));
    let [dom, base, rec, dbounds, sbounds, sumb] = &mut tallies;

    let n_len = traj.len();
    for n in 0..n_len {
        let d = &ds[n];
        let st = &traj.steps[n];
        for k in 2..=k_max as i64 {
            if n >= 1 {
                let holds = floor_div_pow(&d.delta, q, k) == floor_div_pow(&d.big_omega, q, k);
                dom.check(holds, || {
                    let rel = TrajectoryRelation::Domination { n, k: k as u32 };
                    Counterexample::from_witness(claim::DOMINATION, trajectory_witness(traj, n, rel))
                })?;
            }
            if n + 1 < n_len {
                let g = traj.steps[n + 1].g as i64;
                let lhs = floor_div_pow(&ds[n + 1].big_omega, q, k);
                let rhs = floor_div_pow(&(&d.big_omega * &params.p_rat()), q, 1 + g + k);
                rec.check(lhs == rhs, || {
                    let rel = TrajectoryRelation::OmegaFloorRecursion { n, k: k as u32 };
                    Counterexample::from_witness(claim::OMEGA_FLOOR_RECURSION, trajectory_witness(traj, n + 1, rel))
                })?;
            }
        }
        if n == 1 {
            base.check(d.delta == d.big_omega, || {
                let w = trajectory_witness(traj, 1, TrajectoryRelation::DominationBaseCase);
                Counterexample::from_witness(claim::DOMINATION_BASE_CASE, w)
            })?;
        }
        let strict = n >= 2;
        let within = |lo: &ExactRational, x: &ExactRational, hi: &ExactRational| {
            (if strict { lo < x } else { lo <= x }) && x < hi
        };
        dbounds.check(within(&d.big_omega, &d.delta, &(&d.big_omega + &q2)), || {
            let w = trajectory_witness(traj, n, TrajectoryRelation::DeltaBounds { n, strict });
            Counterexample::from_witness(claim::DELTA_BOUNDS, w)
        })?;
        sbounds.check(within(&d.z, &st.s, &(&d.z + &q2)), || {
            let w = trajectory_witness(traj, n, TrajectoryRelation::StateBounds { n, strict });
            Counterexample::from_witness(claim::STATE_BOUNDS, w)
        })?;
        let hi = &d.omega + &(params.growth(n, st.e).recip()? * q2.clone());
        sumb.check(within(&d.omega, &st.sigma, &hi), || {
            let w = trajectory_witness(traj, n, TrajectoryRelation::SumBounds { n, strict });
            Counterexample::from_witness(claim::SUM_BOUNDS, w)
        })?;
    }
    for t in tallies.iter_mut().skip(3) {
        t.note("left inequality strict for n >= 2, non-strict for n <= 1");
    }
    Ok(tallies.into_iter().map(ClaimTally::finish).collect())
}

/// Checks that equal integer parts `floor(S_n) = floor(S_m)` lead to equal
/// successors `S_{n+1} = S_{m+1}` and equal next perturbations.
pub fn determinism_check(traj: &BranchTrajectory) -> Result<ClaimReport> {
    if traj.len() < 2 {
        return Err(Error::TrajectoryTooShort { needed: 2, have: traj.len() });
    }
    let mut tally = ClaimTally::new(claim::DETERMINISM, describe(traj));
    let mut seen: HashMap<BigInt, Vec<usize>> = HashMap::new();
    // only states with a successor take part
    for n in 0..traj.len() - 1 {
        let fl = traj.steps[n].s.floor();
        let earlier = seen.entry(fl).or_default();
        for &m in earlier.iter() {
            let (a, b) = (&traj.steps[n + 1], &traj.steps[m + 1]);
            let r_differ = matches!((&a.r, &b.r), (Some(x), Some(y)) if x != y);
            tally.check(a.s == b.s && !r_differ, || {
                let w = trajectory_witness(traj, n + 2, TrajectoryRelation::Determinism { n, m });
                Counterexample::from_witness(claim::DETERMINISM, w)
            })?;
        }
        earlier.push(n);
    }
    Ok(tally.finish())
}

/// `min S_n <= q^2` over the recorded prefix.
pub fn min_bound_check(traj: &BranchTrajectory) -> Result<ClaimReport> {
    let q2 = ExactRational::from(traj.params.q * traj.params.q);
    let (argmin, min) = traj
        .states()
        .enumerate()
        .min_by(|a, b| a.1.cmp(b.1))
        .ok_or(Error::TrajectoryTooShort { needed: 1, have: 0 })?;
    let mut tally = ClaimTally::new(claim::MIN_BOUND, describe(traj));
    tally.add_tested(traj.len() as u64 - 1);
    tally.check(min <= &q2, || {
        let w = trajectory_witness(traj, usize::MAX, TrajectoryRelation::MinBound);
        Counterexample::from_witness(claim::MIN_BOUND, w)
    })?;
    tally.note(format!("min S = {min} at n = {argmin}"));
    if tally.violated() {
        tally.note("statement about the recorded prefix only, not a refutation of the limit claim");
    }
    Ok(tally.finish())
}
