//! Branch-sequence engine.
//!
//! A Branch sequence perturbs the rational powers `xi (p/q)^n`. Each step
//! adds an admissible perturbation `r_n` (one that keeps the integer part),
//! multiplies by `p/q` and then divides by `q^g` where `g` is the smallest
//! power that brings the state back onto the branch condition
//! `floor(x / q) mod q^2 in {0, q^2 - 1}`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, ParamViolation, Result};
use crate::numkernel::{self, ExactRational};

/// Validated `(p, q, alpha, beta, xi)` block with `p = alpha q + beta`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchParams {
    pub p: u32,
    pub q: u32,
    pub alpha: u32,
    pub beta: u32,
    pub xi: ExactRational,
}

fn check_pq(p: u32, q: u32) -> Result<(u32, u32)> {
    let fail = |violation| Err(Error::Params { violation, p, q });
    if !(p > q && q > 1) {
        return fail(ParamViolation::Ordering);
    }
    if p.gcd(&q) != 1 {
        return fail(ParamViolation::Coprimality);
    }
    let (alpha, beta) = p.div_rem(&q);
    if alpha < 1 || beta < 1 {
        return fail(ParamViolation::Division);
    }
    if alpha + beta > q {
        return fail(ParamViolation::AlphaBetaBound);
    }
    Ok((alpha, beta))
}

/// Checks every parameter invariant and returns the validated block.
pub fn validate_params(p: u32, q: u32, xi: ExactRational) -> Result<BranchParams> {
    let (alpha, beta) = check_pq(p, q)?;
    if xi <= ExactRational::one() {
        return Err(Error::Params { violation: ParamViolation::XiRange, p, q });
    }
    if numkernel::is_power_of(&xi, q) {
        return Err(Error::Params { violation: ParamViolation::XiPowerOfBase, p, q });
    }
    Ok(BranchParams { p, q, alpha, beta, xi })
}

impl BranchParams {
    /// Validates `(p, q)` but only asks `start >= 1` of the start value.
    ///
    /// Embedded Syracuse trajectories need this: `W0 = 1` embeds at
    /// `S0 = 1`, which the strict `xi > 1` rule would reject.
    pub fn with_start(p: u32, q: u32, start: ExactRational) -> Result<BranchParams> {
        let (alpha, beta) = check_pq(p, q)?;
        if start < ExactRational::one() {
            return Err(Error::Params { violation: ParamViolation::StartBelowOne, p, q });
        }
        Ok(BranchParams { p, q, alpha, beta, xi: start })
    }

    pub fn p_rat(&self) -> ExactRational {
        ExactRational::from(self.p)
    }

    /// `p^n / q^(n + e)`, the factor that maps `xi + Sigma_n` onto `S_n`.
    pub fn growth(&self, n: usize, e: u64) -> ExactRational {
        let num = BigInt::from(self.p).pow(n as u32);
        let den = BigInt::from(self.q).pow(n as u32 + e as u32);
        ExactRational::new(num, den).expect("q > 1")
    }
}

/// Per-step perturbation policy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PerturbationSpec {
    Zero,
    /// `r_n = c / q^(g_n)` for `n >= 1`, and `r_0 = c / q^initial_exponent`.
    SyracuseType {
        c: ExactRational,
        #[serde(default)]
        initial_exponent: u32,
    },
    Explicit { values: Vec<ExactRational> },
    /// `r_n = -{S_n} + t / resolution` with `t` drawn uniformly from
    /// `0..resolution` by a ChaCha stream keyed on `(seed, n)`.
    GridProbe {
        resolution: u32,
        #[serde(default)]
        seed: u64,
    },
}

impl PerturbationSpec {
    pub fn syracuse(c: ExactRational) -> Self {
        PerturbationSpec::SyracuseType { c, initial_exponent: 0 }
    }

    /// Whether the perturbation is a function of the state alone.
    pub fn is_deterministic(&self) -> bool {
        matches!(self, PerturbationSpec::Zero | PerturbationSpec::SyracuseType { .. })
    }

    /// Whether every generated perturbation is strictly positive.
    pub fn is_positive(&self) -> bool {
        match self {
            PerturbationSpec::Zero | PerturbationSpec::GridProbe { .. } => false,
            PerturbationSpec::SyracuseType { c, .. } => c.is_positive(),
            PerturbationSpec::Explicit { values } => values.iter().all(ExactRational::is_positive),
        }
    }

    /// The perturbation applied at step `n` in state `s`, where `g_n` is the
    /// valuation recorded when `s` was produced.
    pub fn perturbation_at(&self, q: u32, n: usize, s: &ExactRational, g_n: u32) -> Result<ExactRational> {
        match self {
            PerturbationSpec::Zero => Ok(ExactRational::zero()),
            PerturbationSpec::SyracuseType { c, initial_exponent } => {
                let g = if n == 0 { *initial_exponent } else { g_n };
                Ok(c.scale_pow(q, -(g as i64)))
            }
            PerturbationSpec::Explicit { values } => {
                values.get(n).cloned().ok_or(Error::PerturbationsExhausted(n))
            }
            PerturbationSpec::GridProbe { resolution, seed } => {
                if *resolution == 0 {
                    return Err(Error::ZeroResolution);
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                rng.set_stream(n as u64);
                let t = rng.gen_range(0..*resolution);
                Ok(ExactRational::new(t, *resolution)? - s.fract())
            }
        }
    }
}

impl fmt::Display for PerturbationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PerturbationSpec::Zero => f.write_str("zero"),
            PerturbationSpec::SyracuseType { c, initial_exponent: 0 } => write!(f, "syracuse:{c}"),
            PerturbationSpec::SyracuseType { c, initial_exponent } => {
                write!(f, "syracuse:{c}:{initial_exponent}")
            }
            PerturbationSpec::Explicit { values } => {
                let parts: Vec<String> = values.iter().map(ToString::to_string).collect();
                write!(f, "explicit:{}", parts.join(","))
            }
            PerturbationSpec::GridProbe { resolution, seed } => write!(f, "grid:{resolution}:{seed}"),
        }
    }
}

impl FromStr for PerturbationSpec {
    type Err = Error;

    /// `zero`, `syracuse:C[:E0]`, `explicit:R0,R1,...` or `grid:RES[:SEED]`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::ParseRational(s.to_string());
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        match kind {
            "zero" if rest.is_empty() => Ok(PerturbationSpec::Zero),
            "syracuse" => {
                let (c, e0) = rest.split_once(':').unwrap_or((rest, "0"));
                Ok(PerturbationSpec::SyracuseType {
                    c: c.parse()?,
                    initial_exponent: e0.parse().map_err(|_| bad())?,
                })
            }
            "explicit" => {
                let values = rest.split(',').map(str::parse).collect::<Result<Vec<_>>>()?;
                Ok(PerturbationSpec::Explicit { values })
            }
            "grid" => {
                let (res, seed) = rest.split_once(':').unwrap_or((rest, "0"));
                Ok(PerturbationSpec::GridProbe {
                    resolution: res.parse().map_err(|_| bad())?,
                    seed: seed.parse().map_err(|_| bad())?,
                })
            }
            _ => Err(bad()),
        }
    }
}

/// One state of a Branch trajectory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchStep {
    pub n: usize,
    pub s: ExactRational,
    /// Perturbation applied to this state; absent on the final state.
    pub r: Option<ExactRational>,
    pub g: u32,
    pub e: u64,
    pub sigma: ExactRational,
}

impl BranchStep {
    pub fn initial(s0: ExactRational) -> Self {
        BranchStep { n: 0, s: s0, r: None, g: 0, e: 0, sigma: ExactRational::zero() }
    }
}

/// `C_n`, `Delta_n`, `omega_n`, `Omega_n`, `Z_n` at one index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivedStep {
    pub n: usize,
    pub c: ExactRational,
    pub delta: ExactRational,
    pub omega: ExactRational,
    pub big_omega: ExactRational,
    pub z: ExactRational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchTrajectory {
    pub params: BranchParams,
    pub spec: PerturbationSpec,
    pub steps: Vec<BranchStep>,
}

impl BranchTrajectory {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn state(&self, n: usize) -> Result<&BranchStep> {
        self.steps.get(n).ok_or(Error::IndexOutOfRange { index: n, len: self.steps.len() })
    }

    pub fn states(&self) -> impl Iterator<Item = &ExactRational> {
        self.steps.iter().map(|s| &s.s)
    }

    /// Recorded perturbations `r_0..r_{N-2}`.
    pub fn perturbations(&self) -> Vec<ExactRational> {
        self.steps.iter().filter_map(|s| s.r.clone()).collect()
    }
}

/// `floor(x / q) mod q^2` is `0` or `q^2 - 1`.
pub fn branch_condition(x: &ExactRational, q: u32) -> Result<bool> {
    let m = numkernel::floor_scale(x, q, 1)?;
    Ok(on_branch(&m, q))
}

fn on_branch(m: &BigInt, q: u32) -> bool {
    let q2 = BigInt::from(q) * q;
    let res = m.mod_floor(&q2);
    res.is_zero() || res == q2 - 1
}

/// Smallest `g` such that `x / q^g` satisfies the branch condition.
pub fn theta_valuation(x: &ExactRational, q: u32) -> Result<u32> {
    let mut m = numkernel::floor_scale(x, q, 1)?;
    let digits = {
        let int = x.floor();
        int.to_str_radix(q.min(36)).len() as u32
    };
    let cap = digits + 2;
    let qb = BigInt::from(q);
    for g in 0..=cap {
        if on_branch(&m, q) {
            return Ok(g);
        }
        m = m.div_floor(&qb);
    }
    Err(Error::ThetaCap { value: x.to_string(), cap })
}

/// `xi p^n / q^n`.
pub fn rational_power(params: &BranchParams, n: usize) -> ExactRational {
    &params.xi * &params.growth(n, 0)
}

fn admissible_interval(s: &ExactRational) -> (ExactRational, ExactRational) {
    let f = s.fract();
    (-&f, ExactRational::one() - f)
}

/// `-{s} <= r < 1 - {s}`, i.e. `floor(s + r) = floor(s)`.
pub fn is_admissible(s: &ExactRational, r: &ExactRational) -> bool {
    let (lo, hi) = admissible_interval(s);
    &lo <= r && r < &hi
}

fn check_admissible(step: usize, s: &ExactRational, r: &ExactRational) -> Result<()> {
    if is_admissible(s, r) {
        return Ok(());
    }
    let (lo, hi) = admissible_interval(s);
    Err(Error::Inadmissible { step, r: r.to_string(), lo: lo.to_string(), hi: hi.to_string() })
}

/// Advances `step` by one with an explicitly supplied perturbation.
pub fn step_v2_with(params: &BranchParams, step: &BranchStep, r: &ExactRational) -> Result<BranchStep> {
    if step.s < ExactRational::one() {
        return Err(Error::CorruptedState { step: step.n, value: step.s.to_string() });
    }
    check_admissible(step.n, &step.s, r)?;
    let q = params.q;
    let s_prime = (&step.s + r) * ExactRational::new(params.p, q)?;
    let g = theta_valuation(&s_prime, q)?;
    let s_next = s_prime.scale_pow(q, -(g as i64));
    let weight = params.growth(step.n, step.e).recip()?;
    Ok(BranchStep {
        n: step.n + 1,
        s: s_next,
        r: None,
        g,
        e: step.e + g as u64,
        sigma: &step.sigma + &(r * &weight),
    })
}

/// Advances `step` by one, drawing the perturbation from `spec`. Returns
/// the perturbation used and the next state.
pub fn step_v2(params: &BranchParams, step: &BranchStep, spec: &PerturbationSpec) -> Result<(ExactRational, BranchStep)> {
    let r = spec.perturbation_at(params.q, step.n, &step.s, step.g)?;
    let next = step_v2_with(params, step, &r)?;
    Ok((r, next))
}

/// Runs `steps` transitions from `S_0 = xi`.
pub fn iterate_v2(params: &BranchParams, spec: &PerturbationSpec, steps: usize) -> Result<BranchTrajectory> {
    if !branch_condition(&params.xi, params.q)? {
        return Err(Error::BranchCondition(params.xi.to_string()));
    }
    let mut out = Vec::with_capacity(steps + 1);
    out.push(BranchStep::initial(params.xi.clone()));
    for _ in 0..steps {
        let cur = out.last_mut().expect("nonempty");
        let (r, next) = step_v2(params, cur, spec)?;
        cur.r = Some(r);
        out.push(next);
    }
    Ok(BranchTrajectory { params: params.clone(), spec: spec.clone(), steps: out })
}

/// One step of the two-arm rule. Returns the next value and whether the
/// multiply arm fired; `r` is only consulted (and checked) on that arm.
pub fn step_v1(params: &BranchParams, t: &ExactRational, r: &ExactRational) -> Result<(ExactRational, bool)> {
    if t < &ExactRational::one() {
        return Err(Error::CorruptedState { step: 0, value: t.to_string() });
    }
    let q = ExactRational::from(params.q);
    if branch_condition(t, params.q)? {
        check_admissible(0, t, r)?;
        Ok(((t + r) * params.p_rat() / q, true))
    } else {
        Ok((t / &q, false))
    }
}

/// `(p^n / q^(n + e_n)) (xi + Sigma_n)` rebuilt from the recorded
/// perturbations and valuations alone.
pub fn closed_form(traj: &BranchTrajectory, n: usize) -> Result<ExactRational> {
    traj.state(n)?;
    Ok(closed_form_prefix(traj, n + 1).pop().expect("n + 1 values"))
}

/// Closed-form values for indices `0..traj.len()`, one pass.
pub fn closed_form_all(traj: &BranchTrajectory) -> Vec<ExactRational> {
    closed_form_prefix(traj, traj.len())
}

fn closed_form_prefix(traj: &BranchTrajectory, count: usize) -> Vec<ExactRational> {
    let params = &traj.params;
    let (p, q) = (BigInt::from(params.p), BigInt::from(params.q));
    let mut out = Vec::with_capacity(count);
    let mut sigma = ExactRational::zero();
    let mut e: u64 = 0;
    // q^(j + e_j) and p^j, maintained incrementally
    let mut q_pow = BigInt::from(1);
    let mut p_pow = BigInt::from(1);
    for n in 0..count {
        if n > 0 {
            e += traj.steps[n].g as u64;
        }
        let qe = BigInt::from(params.q).pow(e as u32);
        let factor = ExactRational::new(p_pow.clone(), &q_pow * &qe).expect("q > 1");
        out.push(factor * (&params.xi + &sigma));
        if n + 1 < count {
            let r = traj.steps[n].r.clone().unwrap_or_default();
            sigma += &(r * ExactRational::new(&q_pow * &qe, p_pow.clone()).expect("p > 0"));
            q_pow *= &q;
            p_pow *= &p;
        }
    }
    out
}

/// Derived sequences at index `n`.
pub fn derived(traj: &BranchTrajectory, n: usize) -> Result<DerivedStep> {
    traj.state(n)?;
    Ok(derived_prefix(traj, n + 1).pop().expect("n + 1 values"))
}

pub fn derived_all(traj: &BranchTrajectory) -> Vec<DerivedStep> {
    derived_prefix(traj, traj.len())
}

fn derived_prefix(traj: &BranchTrajectory, count: usize) -> Vec<DerivedStep> {
    let params = &traj.params;
    let mut out = Vec::with_capacity(count);
    let mut omega: Option<ExactRational> = None;
    for n in 0..count {
        let st = &traj.steps[n];
        let growth = params.growth(n, st.e);
        let c = &params.xi * &growth;
        let delta = &st.s - &c;
        let om = omega.clone().unwrap_or_default();
        let big_omega = &growth * &om;
        let z = &c + &big_omega;
        out.push(DerivedStep { n, c, delta, omega: om, big_omega, z });
        if let Some(r) = &st.r {
            let term = r * &params.growth(n, st.e).recip().expect("nonzero growth");
            omega = Some(match omega {
                Some(w) if w >= term => w,
                _ => term,
            });
        }
    }
    out
}

/// Exact comparison of `e_n / n` with `log_q(p/q)` via `q^(n + e_n)` vs `p^n`.
pub fn compare_ratio_to_threshold(params: &BranchParams, n: usize, e: u64) -> std::cmp::Ordering {
    let lhs = BigInt::from(params.q).pow(n as u32 + e as u32);
    let rhs = BigInt::from(params.p).pow(n as u32);
    lhs.cmp(&rhs)
}

/// Approximate `log_q(p/q)`.
pub fn log_threshold(params: &BranchParams) -> f64 {
    (params.p as f64 / params.q as f64).ln() / (params.q as f64).ln()
}
