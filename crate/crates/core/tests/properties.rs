use branchlab::branch::{self, BranchParams, PerturbationSpec};
use branchlab::carries;
use branchlab::numkernel::{self, ExactRational};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Pow;
use proptest::prelude::*;

fn rational() -> impl Strategy<Value = ExactRational> {
    (0u64..2_000_000, 1u64..5_000).prop_map(|(n, d)| ExactRational::new(n, d).unwrap())
}

fn pow(q: u32, k: u32) -> BigInt {
    Pow::pow(BigInt::from(q), k)
}

/// Validated `(p, q)` with `q <= 7`.
fn pq() -> impl Strategy<Value = (u32, u32)> {
    (2u32..=7)
        .prop_flat_map(|q| (q + 1..q * q, Just(q)))
        .prop_filter("valid block", |&(p, q)| branch::validate_params(p, q, ExactRational::new(7, 3).unwrap()).is_ok())
}

/// A start value that satisfies the branch condition and the `xi` rules.
fn block() -> impl Strategy<Value = BranchParams> {
    (pq(), 0u32..40, any::<bool>(), 0u32..1000).prop_filter_map("xi rules", |((p, q), m, top, f)| {
        let t = if top { q * q - 1 } else { 0 };
        let base = ExactRational::from(q * (m * q * q + t));
        let frac = ExactRational::new(f * q, 1000).unwrap();
        branch::validate_params(p, q, base + frac).ok()
    })
}

proptest! {
    #[test]
    fn floor_and_frac_reconstruct(x in rational(), q in 2u32..10, k in -6i64..6) {
        let fl = numkernel::floor_scale(&x, q, k).unwrap();
        let fr = numkernel::frac_scale(&x, q, k).unwrap();
        prop_assert!(fr >= ExactRational::zero() && fr < ExactRational::one());
        prop_assert_eq!((ExactRational::from(fl) + fr).scale_pow(q, k), x);
    }

    #[test]
    fn digit_matches_floor_difference(x in rational(), q in 2u32..10, j in -8i64..8) {
        let d = numkernel::digit_at(&x, q, j).unwrap();
        let lhs = numkernel::floor_scale(&x, q, j).unwrap() - BigInt::from(q) * numkernel::floor_scale(&x, q, j + 1).unwrap();
        prop_assert_eq!(BigInt::from(d), lhs);
    }

    #[test]
    fn floors_nest(x in rational(), q in 2u32..10, a in 0i64..6, b in 0i64..6) {
        let inner = ExactRational::from(numkernel::floor_scale(&x, q, a).unwrap());
        prop_assert_eq!(numkernel::floor_scale(&inner, q, b).unwrap(), numkernel::floor_scale(&x, q, a + b).unwrap());
    }

    #[test]
    fn window_reconstructs(x in rational(), q in 2u32..10, lo in -6i64..4, w in 1i64..10) {
        let hi = lo + w - 1;
        let win = numkernel::digits_window(&x, q, lo, hi).unwrap();
        prop_assert!(win.digits.iter().all(|&d| d < q));
        let modulus = pow(q, w as u32);
        let low = numkernel::floor_scale(&x, q, lo).unwrap().mod_floor(&modulus);
        prop_assert_eq!(win.value(), ExactRational::from(low).scale_pow(q, lo));
    }

    #[test]
    fn closed_form_and_delta_recurrence(params in block(), seed in any::<u64>(), res in 1u32..64) {
        let spec = PerturbationSpec::GridProbe { resolution: res, seed };
        let traj = branch::iterate_v2(&params, &spec, 30).unwrap();
        let closed = branch::closed_form_all(&traj);
        let ds = branch::derived_all(&traj);
        let p = params.p_rat();
        for (n, st) in traj.steps.iter().enumerate() {
            prop_assert_eq!(&closed[n], &st.s);
            prop_assert_eq!(&(&ds[n].c + &ds[n].delta), &st.s);
            prop_assert_eq!(&(&ds[n].c + &ds[n].big_omega), &ds[n].z);
            if let Some(r) = &st.r {
                prop_assert!(branch::is_admissible(&st.s, r));
                let next = &traj.steps[n + 1];
                let rhs = (&p * &(&ds[n].delta + r)).scale_pow(params.q, -(1 + next.g as i64));
                prop_assert_eq!(&ds[n + 1].delta, &rhs);
            }
        }
    }

    #[test]
    fn small_states_stay_small(params in block(), seed in any::<u64>()) {
        let spec = PerturbationSpec::GridProbe { resolution: 16, seed };
        let traj = branch::iterate_v2(&params, &spec, 40).unwrap();
        let q = ExactRational::from(params.q);
        if let Some(first) = traj.steps.iter().position(|st| st.s < q) {
            for st in &traj.steps[first..] {
                prop_assert!(st.s >= ExactRational::one() && st.s < q);
            }
            for st in &traj.steps[first + 1..] {
                prop_assert!(st.g <= 1);
            }
        }
    }

    #[test]
    fn zero_perturbation_collapses(params in block()) {
        let traj = branch::iterate_v2(&params, &PerturbationSpec::Zero, 25).unwrap();
        for st in &traj.steps {
            prop_assert!(st.sigma.is_zero());
            prop_assert_eq!(st.s.scale_pow(params.q, st.e as i64), branch::rational_power(&params, st.n));
        }
    }

    #[test]
    fn two_arm_rule_contains_the_valuation_walk(params in block(), seed in any::<u64>()) {
        let spec = PerturbationSpec::GridProbe { resolution: 32, seed };
        let traj = branch::iterate_v2(&params, &spec, 20).unwrap();
        let zero = ExactRational::zero();
        let mut t = traj.steps[0].s.clone();
        let mut idx = 0;
        let mut guard = 0;
        while idx < traj.steps.len() {
            guard += 1;
            prop_assert!(guard < 10_000);
            if branch::branch_condition(&t, params.q).unwrap() {
                prop_assert_eq!(&t, &traj.steps[idx].s);
                let Some(r) = traj.steps[idx].r.as_ref() else { break };
                let (next, took) = branch::step_v1(&params, &t, r).unwrap();
                prop_assert!(took);
                t = next;
                idx += 1;
            } else {
                let (next, took) = branch::step_v1(&params, &t, &zero).unwrap();
                prop_assert!(!took);
                t = next;
            }
        }
    }

    #[test]
    fn carry_identities(x in rational(), (p, q) in pq(), lo in -8i64..2, w in 2i64..12) {
        let params = branch::validate_params(p, q, ExactRational::new(7, 3).unwrap()).unwrap();
        let row = carries::transition_report(&x, &params, lo, lo + w - 1).unwrap();
        prop_assert!(row.carries.iter().all(|&d| d < q));
        let dst = numkernel::digits_window(&(&x * &ExactRational::new(p, q).unwrap()), q, lo, lo + w - 1).unwrap();
        prop_assert_eq!(&row.dst_digits, &dst.digits);
        for j in lo..lo + w {
            prop_assert_eq!(carries::carry_at(&x, &params, j).unwrap(), row.carries[(j - lo) as usize]);
        }
    }
}
