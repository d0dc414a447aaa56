//! Verification and falsification harness. Every checker either passes on
//! the tested instances or returns a certificate that replays from its own
//! witness data.

mod asymptotic;
mod checks;
mod probes;
pub mod report;

pub use asymptotic::{
    asymptotic_report, cycle_detect, AsymptoticReport, AsymptoticRow, Classification, GrowthCase, ThresholdSide, THRESHOLD_PRECISION,
};
pub use checks::{determinism_check, domination_check, min_bound_check};
pub use probes::{floor_addition_hypothesis, floor_addition_search, independence_probe, ProbeOptions};
pub use report::{claim, ClaimReport, ClaimTally, Counterexample, Interpretation, Verdict, Witness};

/// Combines reports of one claim over many instances: counts add up, the
/// verdict is the worst seen and the first certificate in input order wins.
pub fn merge_reports<'a>(claim_id: &str, instance: impl Into<String>, reports: impl IntoIterator<Item = &'a ClaimReport>) -> ClaimReport {
    let mut out = ClaimReport {
        claim_id: claim_id.to_string(),
        instance: instance.into(),
        verdict: Verdict::Pass,
        certificate: None,
        tested_count: 0,
        notes: Vec::new(),
    };
    let mut preconditions = 0u64;
    for r in reports.into_iter().filter(|r| r.claim_id == claim_id) {
        out.tested_count += r.tested_count;
        match r.verdict {
            Verdict::Violated => {
                out.verdict = Verdict::Violated;
                if out.certificate.is_none() {
                    out.certificate = r.certificate.clone();
                    out.notes.push(format!("first violation in {}", r.instance));
                }
            }
            Verdict::PreconditionFailed => preconditions += 1,
            Verdict::Pass => {}
        }
    }
    if preconditions > 0 {
        out.notes.push(format!("{preconditions} instance(s) skipped: precondition failed"));
    }
    out
}
