//! Command-line frontend. Every subcommand writes its artifacts to files and
//! prints a one-line summary. Exit codes: 0 success, 2 claim violated,
//! 1 usage or I/O error.

pub mod output;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde::{Serialize, Serializer};
use serde_json::{json, Value};

use crate::branch::{self, BranchParams, BranchStep, BranchTrajectory, PerturbationSpec};
use crate::cagrid::{self, CaMode, CaSeed, RenderFormat, RenderOptions};
use crate::error::{Error, Result};
use crate::lemmalab::{self, ClaimReport, Counterexample, Interpretation, ProbeOptions};
use crate::numkernel::ExactRational;
use crate::syracuse::{self, ScanCheck, ScanOptions, DEFAULT_CAP};
use output::{csv_document, envelope, report_rows, to_json_bytes, write_certificates, write_file, REPORT_HEADER};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

/// Decimal big integer flag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Big(pub BigUint);

impl FromStr for Big {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        BigUint::from_str(s).map(Big).map_err(|_| format!("expected a nonnegative integer, got {s:?}"))
    }
}

impl fmt::Display for Big {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl Serialize for Big {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(&self.0)
    }
}

#[derive(Debug, Parser)]
#[command(name = "branchlab", version, about = "Exact experiments on Branch sequences and the Syracuse map")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Branch-sequence iteration and carry probes.
    #[command(subcommand)]
    Branch(BranchCmd),
    /// Claim checkers with certificates.
    #[command(subcommand)]
    Lemma(LemmaCmd),
    /// Syracuse trajectories, embedding checks and range scans.
    #[command(subcommand)]
    Syracuse(SyracuseCmd),
    /// Cellular automaton images.
    #[command(subcommand)]
    Ca(CaCmd),
}

#[derive(Debug, Subcommand)]
enum BranchCmd {
    /// Iterate and tabulate S, r, g, e, Sigma and the derived sequences.
    Iterate(IterateArgs),
    /// Sweep admissible perturbations and check floor independence.
    ProbeIndependence(ProbeArgs),
}

#[derive(Debug, Subcommand)]
enum LemmaCmd {
    /// Largest-perturbation domination and its bounds.
    Domination(DominationArgs),
    /// Exhaustive search for the floor-addition property.
    FloorAddSearch(FloorAddArgs),
    /// Equal floors force equal successors.
    Determinism(TrajOnlyArgs),
    /// Minimum of the recorded states against q^2.
    MinBound(TrajOnlyArgs),
    /// Prefix diagnostics for e_n / n, Sigma_n, omega_n and cycles.
    Asymptotics(AsymptoticsArgs),
    /// Recompute a certificate from its witness.
    Replay(ReplayArgs),
}

#[derive(Debug, Subcommand)]
enum SyracuseCmd {
    /// Scan a range of odd seeds.
    Scan(ScanArgs),
    /// Tabulate one trajectory.
    Trace(TraceArgs),
    /// Check the embedding and the binary-structure identities for one seed.
    EmbedCheck(EmbedCheckArgs),
}

#[derive(Debug, Subcommand)]
enum CaCmd {
    /// Render a grid, its Gray recoding or an overlay.
    Render(RenderArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum DataFormat {
    Json,
    Csv,
}

#[derive(Debug, Args, Serialize)]
struct OutputArgs {
    /// Output directory (default: $BRANCHLAB_OUT, then the working directory).
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<DataFormat>,
    /// Same as --format json.
    #[arg(long, conflicts_with = "format")]
    #[serde(skip)]
    json: bool,
}

impl OutputArgs {
    fn format(&self, default: DataFormat) -> DataFormat {
        if self.json {
            DataFormat::Json
        } else {
            self.format.unwrap_or(default)
        }
    }

    fn dir(&self) -> PathBuf {
        output::resolve_out(self.out.as_deref())
    }
}

#[derive(Debug, Args, Serialize)]
struct TrajArgs {
    /// Odd seed: use its embedded Syracuse trajectory, run to W = 1.
    #[arg(long, conflicts_with_all = ["xi", "start"])]
    w0: Option<Big>,
    #[arg(long, default_value_t = 3)]
    p: u32,
    #[arg(long, default_value_t = 2)]
    q: u32,
    /// Start value xi, validated strictly (xi > 1, not a power of q).
    #[arg(long)]
    #[serde(serialize_with = "ser_opt_display")]
    xi: Option<ExactRational>,
    /// Start value only required to be >= 1.
    #[arg(long, conflicts_with = "xi")]
    #[serde(serialize_with = "ser_opt_display")]
    start: Option<ExactRational>,
    /// zero | syracuse:C[:E0] | explicit:R0,R1,... | grid:RES[:SEED]
    #[arg(long, default_value = "syracuse:2/3")]
    perturbation: String,
    #[arg(long, default_value_t = 100)]
    steps: usize,
    /// Step cap for --w0 trajectories.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: u64,
    /// Seed for grid perturbations that do not name one.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn ser_opt_display<T: fmt::Display, S: Serializer>(v: &Option<T>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.collect_str(v),
        None => s.serialize_none(),
    }
}

impl TrajArgs {
    fn spec(&self) -> Result<PerturbationSpec> {
        let text = &self.perturbation;
        if text.starts_with("grid:") && text.matches(':').count() == 1 {
            return format!("{text}:{}", self.seed).parse();
        }
        text.parse()
    }

    fn build(&self) -> Result<BranchTrajectory> {
        if let Some(w0) = &self.w0 {
            let traj = syracuse::trajectory(&w0.0, self.cap)?;
            return Ok(syracuse::embed(&traj)?.trajectory);
        }
        let spec = self.spec()?;
        let params = match (&self.xi, &self.start) {
            (Some(xi), _) => branch::validate_params(self.p, self.q, xi.clone())?,
            (None, Some(s)) => BranchParams::with_start(self.p, self.q, s.clone())?,
            (None, None) => return Err(Error::Usage("one of --w0, --xi or --start is required".into())),
        };
        branch::iterate_v2(&params, &spec, self.steps)
    }
}

#[derive(Debug, Args, Serialize)]
struct IterateArgs {
    #[command(flatten)]
    traj: TrajArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
struct ProbeArgs {
    #[command(flatten)]
    traj: TrajArgs,
    /// Probe a single state instead of a trajectory.
    #[arg(long, conflicts_with_all = ["w0", "xi", "start"])]
    #[serde(serialize_with = "ser_opt_display")]
    state: Option<ExactRational>,
    #[arg(long, default_value_t = 6)]
    kmax: u32,
    #[arg(long, default_value_t = 256)]
    grid: u32,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
struct DominationArgs {
    #[command(flatten)]
    traj: TrajArgs,
    #[arg(long, default_value_t = 6)]
    kmax: u32,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum InterpretationArg {
    IntegerPart,
    AllScales,
    Both,
}

#[derive(Debug, Args, Serialize)]
struct FloorAddArgs {
    #[arg(long, default_value_t = 12)]
    max_den: u32,
    #[arg(long, default_value_t = 4)]
    max_val: u32,
    #[arg(long, value_enum, default_value_t = InterpretationArg::Both)]
    interpretation: InterpretationArg,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
struct TrajOnlyArgs {
    #[command(flatten)]
    traj: TrajArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
struct AsymptoticsArgs {
    #[command(flatten)]
    traj: TrajArgs,
    /// Step budget for cycle detection (default: --steps).
    #[arg(long)]
    max_steps: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
struct ReplayArgs {
    #[arg(long)]
    certificate: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct ScanArgs {
    #[arg(long)]
    from: Big,
    #[arg(long)]
    to: Big,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: u64,
    /// Comma-separated: embedding, structure, independence, domination,
    /// determinism, min-bound, or all.
    #[arg(long, value_delimiter = ',')]
    #[serde(serialize_with = "ser_checks")]
    checks: Vec<String>,
    #[arg(long, default_value_t = 6)]
    kmax: u32,
    #[arg(long, default_value_t = 256)]
    grid: u32,
    /// Worker threads (default: available parallelism). Not echoed: output
    /// does not depend on it.
    #[arg(long)]
    #[serde(skip)]
    workers: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

fn parse_checks(names: &[String]) -> Result<Vec<ScanCheck>> {
    let mut out = Vec::new();
    for name in names {
        if name == "all" {
            out.extend(ScanCheck::ALL);
        } else {
            out.push(name.parse().map_err(|_| Error::Usage(format!("unknown check {name:?}")))?);
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn ser_checks<S: Serializer>(names: &[String], s: S) -> std::result::Result<S::Ok, S::Error> {
    let checks = parse_checks(names).map_err(serde::ser::Error::custom)?;
    s.collect_seq(checks.iter().map(|c| c.name()))
}

#[derive(Debug, Args, Serialize)]
struct TraceArgs {
    #[arg(long)]
    w0: Big,
    #[arg(long, default_value_t = DEFAULT_CAP, conflicts_with = "steps")]
    cap: u64,
    /// Run exactly this many steps, continuing through the fixed point.
    #[arg(long)]
    steps: Option<u64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
struct EmbedCheckArgs {
    #[arg(long)]
    w0: Big,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
#[command(group(ArgGroup::new("seed").required(true).args(["w0", "xi"])))]
struct RenderArgs {
    /// Odd seed: Syracuse automaton.
    #[arg(long)]
    w0: Option<Big>,
    /// Dyadic start: the xi (3/2)^n automaton.
    #[arg(long)]
    #[serde(serialize_with = "ser_opt_display")]
    xi: Option<ExactRational>,
    #[arg(long, default_value_t = 64)]
    rows: usize,
    /// Columns (default: integer parts plus --frac-depth).
    #[arg(long)]
    width: Option<usize>,
    #[arg(long, default_value_t = cagrid::DEFAULT_FRAC_DEPTH as usize)]
    frac_depth: usize,
    /// Gray-recode each row.
    #[arg(long, conflicts_with = "overlay")]
    gray: bool,
    /// Overlay the Syracuse grid on the unperturbed xi (3/2)^n grid.
    #[arg(long, requires = "w0")]
    overlay: bool,
    /// Carry line under each row (text only).
    #[arg(long)]
    carries: bool,
    #[arg(long, default_value = "pbm")]
    #[serde(serialize_with = "ser_format")]
    format: RenderFormat,
    /// Output file (default: a generated name under $BRANCHLAB_OUT or the
    /// working directory).
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

fn ser_format<S: Serializer>(f: &RenderFormat, s: S) -> std::result::Result<S::Ok, S::Error> {
    f.serialize(s)
}

/// What a command reports back to `run`.
struct Outcome {
    code: i32,
    summary: String,
}

fn config(command: &str, args: &impl Serialize) -> Result<Value> {
    Ok(json!({ "command": command, "args": serde_json::to_value(args)? }))
}

/// Merges reports sharing a claim id, keeping first-appearance order.
fn merge_by_claim(instance: &str, reports: Vec<ClaimReport>) -> Vec<ClaimReport> {
    let mut order: Vec<String> = Vec::new();
    let mut groups: BTreeMap<String, Vec<ClaimReport>> = BTreeMap::new();
    for r in reports {
        if !groups.contains_key(&r.claim_id) {
            order.push(r.claim_id.clone());
        }
        groups.entry(r.claim_id.clone()).or_default().push(r);
    }
    order
        .into_iter()
        .map(|id| {
            let group = &groups[&id];
            if group.len() == 1 {
                group[0].clone()
            } else {
                lemmalab::merge_reports(&id, instance, group)
            }
        })
        .collect()
}

fn claims_summary(command: &str, reports: &[ClaimReport], certs: usize) -> Outcome {
    let violated: Vec<&str> = reports.iter().filter(|r| r.is_violated()).map(|r| r.claim_id.as_str()).collect();
    let skipped = reports.iter().filter(|r| r.verdict == lemmalab::Verdict::PreconditionFailed).count();
    let mut summary = format!("{command}: {} claim(s), {} violated", reports.len(), violated.len());
    if !violated.is_empty() {
        summary.push_str(&format!(" ({}); {certs} certificate(s) written", violated.join(", ")));
    }
    if skipped > 0 {
        summary.push_str(&format!("; {skipped} precondition failure(s)"));
    }
    Outcome { code: if violated.is_empty() { EXIT_OK } else { EXIT_VIOLATION }, summary }
}

/// Writes `<stem>.json` or `<stem>.csv` with the claim table, plus
/// certificates.
fn emit_reports(
    command: &str,
    stem: &str,
    out: &OutputArgs,
    config: &Value,
    reports: &[ClaimReport],
    extra: Option<Value>,
) -> Result<Outcome> {
    let dir = out.dir();
    let certs = write_certificates(&dir, stem, config, reports)?;
    match out.format(DataFormat::Json) {
        DataFormat::Json => {
            let mut body = json!({ "claims": reports, "certificates": certs });
            if let Some(Value::Object(extra)) = extra {
                body.as_object_mut().expect("object").extend(extra);
            }
            write_file(&dir.join(format!("{stem}.json")), &to_json_bytes(&envelope(config, "report", &body)?)?)?;
        }
        DataFormat::Csv => {
            let doc = csv_document("claims", config, &REPORT_HEADER, &report_rows(reports))?;
            write_file(&dir.join(format!("{stem}.csv")), &doc)?;
        }
    }
    Ok(claims_summary(command, reports, certs.len()))
}

fn traj_stem(name: &str, t: &TrajArgs) -> String {
    match (&t.w0, &t.xi, &t.start) {
        (Some(w), _, _) => format!("{name}-w{w}"),
        (_, Some(x), _) | (_, _, Some(x)) => format!("{name}-p{}q{}-{}", t.p, t.q, x.to_string().replace('/', "_")),
        _ => name.to_string(),
    }
}

fn cmd_iterate(a: &IterateArgs) -> Result<Outcome> {
    let cfg = config("branch iterate", a)?;
    let traj = a.traj.build()?;
    let closed = branch::closed_form_all(&traj);
    let derived = branch::derived_all(&traj);
    if let Some(n) = traj.steps.iter().zip(&closed).position(|(st, c)| &st.s != c) {
        return Err(Error::Internal(format!("closed form differs from the iterate at n = {n}")));
    }
    let stem = traj_stem("iterate", &a.traj);
    let dir = a.output.dir();
    match a.output.format(DataFormat::Csv) {
        DataFormat::Csv => {
            let header = ["n", "S", "r", "g", "e", "sigma", "closed_form", "C", "Delta", "omega", "Omega", "Z"];
            let rows: Vec<Vec<String>> = traj
                .steps
                .iter()
                .zip(&closed)
                .zip(&derived)
                .map(|((st, c), d)| {
                    vec![
                        st.n.to_string(),
                        st.s.to_string(),
                        st.r.as_ref().map(ToString::to_string).unwrap_or_default(),
                        st.g.to_string(),
                        st.e.to_string(),
                        st.sigma.to_string(),
                        c.to_string(),
                        d.c.to_string(),
                        d.delta.to_string(),
                        d.omega.to_string(),
                        d.big_omega.to_string(),
                        d.z.to_string(),
                    ]
                })
                .collect();
            write_file(&dir.join(format!("{stem}.csv")), &csv_document("trajectory", &cfg, &header, &rows)?)?;
        }
        DataFormat::Json => {
            let body = json!({ "trajectory": traj, "derived": derived, "closed_form_matches": true });
            write_file(&dir.join(format!("{stem}.json")), &to_json_bytes(&envelope(&cfg, "report", &body)?)?)?;
        }
    }
    Ok(Outcome {
        code: EXIT_OK,
        summary: format!("branch iterate: {} states, closed form equals S_n at every step", traj.len()),
    })
}

fn cmd_probe(a: &ProbeArgs) -> Result<Outcome> {
    let cfg = config("branch probe-independence", a)?;
    let opts = ProbeOptions { k_max: a.kmax, grid: a.grid };
    let (stem, reports) = if let Some(s) = &a.state {
        let params = BranchParams::with_start(a.traj.p, a.traj.q, s.clone())?;
        let step = BranchStep::initial(s.clone());
        let stem = format!("probe-p{}q{}-s{}", a.traj.p, a.traj.q, s.to_string().replace('/', "_"));
        (stem, lemmalab::independence_probe(&params, &step, &opts, None)?)
    } else {
        let traj = a.traj.build()?;
        let derived = branch::derived_all(&traj);
        let mut all = Vec::new();
        for (st, d) in traj.steps.iter().zip(&derived) {
            all.extend(lemmalab::independence_probe(&traj.params, st, &opts, Some(d))?);
        }
        let instance = format!("{} states of S0={} spec={}", traj.len(), traj.params.xi, traj.spec);
        (traj_stem("probe", &a.traj), merge_by_claim(&instance, all))
    };
    emit_reports("branch probe-independence", &stem, &a.output, &cfg, &reports, None)
}

fn cmd_domination(a: &DominationArgs) -> Result<Outcome> {
    let cfg = config("lemma domination", a)?;
    let traj = a.traj.build()?;
    let reports = lemmalab::domination_check(&traj, a.kmax)?;
    emit_reports("lemma domination", &traj_stem("domination", &a.traj), &a.output, &cfg, &reports, None)
}

fn cmd_floor_add(a: &FloorAddArgs) -> Result<Outcome> {
    let cfg = config("lemma floor-add-search", a)?;
    let interps: &[Interpretation] = match a.interpretation {
        InterpretationArg::IntegerPart => &[Interpretation::IntegerPart],
        InterpretationArg::AllScales => &[Interpretation::AllScales],
        InterpretationArg::Both => &[Interpretation::IntegerPart, Interpretation::AllScales],
    };
    let reports = interps
        .iter()
        .map(|&i| lemmalab::floor_addition_search(a.max_den, a.max_val, i))
        .collect::<Result<Vec<_>>>()?;
    let stem = format!("floor-add-d{}-v{}", a.max_den, a.max_val);
    // both interpretations share one claim id; keep one certificate file each
    let certs_dir = a.output.dir();
    let mut certs = Vec::new();
    for (r, i) in reports.iter().zip(interps) {
        let tag = match i {
            Interpretation::IntegerPart => "integer-part",
            Interpretation::AllScales => "all-scales",
        };
        certs.extend(write_certificates(&certs_dir, &format!("{stem}.{tag}"), &cfg, std::slice::from_ref(r))?);
    }
    match a.output.format(DataFormat::Json) {
        DataFormat::Json => {
            let body = json!({ "claims": reports, "certificates": certs });
            write_file(&certs_dir.join(format!("{stem}.json")), &to_json_bytes(&envelope(&cfg, "report", &body)?)?)?;
        }
        DataFormat::Csv => {
            let doc = csv_document("claims", &cfg, &REPORT_HEADER, &report_rows(&reports))?;
            write_file(&certs_dir.join(format!("{stem}.csv")), &doc)?;
        }
    }
    Ok(claims_summary("lemma floor-add-search", &reports, certs.len()))
}

fn cmd_determinism(a: &TrajOnlyArgs) -> Result<Outcome> {
    let cfg = config("lemma determinism", a)?;
    let traj = a.traj.build()?;
    let reports = vec![lemmalab::determinism_check(&traj)?];
    emit_reports("lemma determinism", &traj_stem("determinism", &a.traj), &a.output, &cfg, &reports, None)
}

fn cmd_min_bound(a: &TrajOnlyArgs) -> Result<Outcome> {
    let cfg = config("lemma min-bound", a)?;
    let traj = a.traj.build()?;
    let reports = vec![lemmalab::min_bound_check(&traj)?];
    emit_reports("lemma min-bound", &traj_stem("min-bound", &a.traj), &a.output, &cfg, &reports, None)
}

fn cmd_asymptotics(a: &AsymptoticsArgs) -> Result<Outcome> {
    let cfg = config("lemma asymptotics", a)?;
    let traj = a.traj.build()?;
    let report = lemmalab::asymptotic_report(&traj)?;
    let budget = a.max_steps.unwrap_or(a.traj.steps.max(traj.len()));
    let cycle = lemmalab::cycle_detect(&traj.params, &traj.spec, budget)?;
    let stem = traj_stem("asymptotics", &a.traj);
    let dir = a.output.dir();
    match a.output.format(DataFormat::Json) {
        DataFormat::Json => {
            let body = json!({ "prefix": report, "cycle": cycle });
            write_file(&dir.join(format!("{stem}.json")), &to_json_bytes(&envelope(&cfg, "report", &body)?)?)?;
        }
        DataFormat::Csv => {
            let header = ["n", "e", "ratio", "ratio_approx", "side", "inverse_growth", "sigma", "omega", "floor_s"];
            let opt = |v: Option<String>| v.unwrap_or_default();
            let rows: Vec<Vec<String>> = report
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.n.to_string(),
                        r.e.to_string(),
                        opt(r.ratio.as_ref().map(ToString::to_string)),
                        opt(r.ratio_approx.map(|x| format!("{x:.12}"))),
                        opt(r.side.map(|s| serde_json::to_value(s).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default())),
                        r.inverse_growth.to_string(),
                        r.sigma.to_string(),
                        r.omega.to_string(),
                        r.floor_s.to_string(),
                    ]
                })
                .collect();
            write_file(&dir.join(format!("{stem}.csv")), &csv_document("asymptotics", &cfg, &header, &rows)?)?;
        }
    }
    let describe = |c: &lemmalab::Classification| match c {
        lemmalab::Classification::Periodic { period, preperiod } => format!("periodic (period {period}, preperiod {preperiod})"),
        other => serde_json::to_value(other)
            .ok()
            .and_then(|v| v.get("kind").and_then(Value::as_str).map(String::from))
            .unwrap_or_default(),
    };
    Ok(Outcome {
        code: EXIT_OK,
        summary: format!(
            "lemma asymptotics: prefix {}, cycle search {}, growth case {:?}; {}",
            describe(&report.classification),
            describe(&cycle.classification),
            report.growth_case,
            report.notes.first().map(String::as_str).unwrap_or("")
        ),
    })
}

fn cmd_replay(a: &ReplayArgs) -> Result<Outcome> {
    let text = std::fs::read_to_string(&a.certificate)?;
    let value: Value = serde_json::from_str(&text)?;
    let body = value.get("certificate").cloned().unwrap_or(value);
    let cert: Counterexample = serde_json::from_value(body)?;
    if cert.replay()? {
        Ok(Outcome {
            code: EXIT_OK,
            summary: format!("lemma replay: certificate re-validates, {} violated ({} vs {})", cert.claim_id, cert.lhs, cert.rhs),
        })
    } else {
        Ok(Outcome {
            code: EXIT_ERROR,
            summary: format!("lemma replay: certificate for {} does not re-validate", cert.claim_id),
        })
    }
}

fn cmd_scan(a: &ScanArgs) -> Result<Outcome> {
    let cfg = config("syracuse scan", a)?;
    let opts = ScanOptions { cap: a.cap, checks: parse_checks(&a.checks)?, probe: ProbeOptions { k_max: a.kmax, grid: a.grid } };
    let workers = a.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let summary = syracuse::scan(&a.from.0, &a.to.0, &opts, workers)?;
    let stem = format!("scan-{}-{}", a.from, a.to);
    let dir = a.output.dir();
    let certs = write_certificates(&dir, &stem, &cfg, &summary.reports)?;
    match a.output.format(DataFormat::Csv) {
        DataFormat::Csv => {
            let header = ["w0", "steps_to_one", "max_w", "min_w", "min_s", "max_h"];
            let rows: Vec<Vec<String>> = summary
                .seeds
                .iter()
                .map(|s| {
                    vec![
                        s.w0.to_string(),
                        s.steps_to_one.map(|k| k.to_string()).unwrap_or_default(),
                        s.max_w.to_string(),
                        s.min_w.to_string(),
                        s.min_s.to_string(),
                        s.max_h.to_string(),
                    ]
                })
                .collect();
            let path = dir.join(format!("{stem}.csv"));
            write_file(&path, &csv_document("scan-seeds", &cfg, &header, &rows)?)?;
            let mut aggregate = summary.clone();
            aggregate.seeds.clear();
            let meta = json!({ "summary": aggregate, "certificates": certs });
            write_file(&dir.join(format!("{stem}.csv.meta.json")), &to_json_bytes(&envelope(&cfg, "report", &meta)?)?)?;
        }
        DataFormat::Json => {
            let body = json!({ "summary": summary, "certificates": certs });
            write_file(&dir.join(format!("{stem}.json")), &to_json_bytes(&envelope(&cfg, "report", &body)?)?)?;
        }
    }
    let violated: Vec<&str> = summary.reports.iter().filter(|r| r.is_violated()).map(|r| r.claim_id.as_str()).collect();
    let mut line = format!(
        "syracuse scan: {} seeds, {} reached 1 within cap {}",
        summary.seed_count, summary.resolved_count, summary.cap
    );
    if let Some((w, k)) = &summary.max_steps {
        line.push_str(&format!(", longest {k} steps at W0={w}"));
    }
    if let Some(s) = &summary.worst_min_s {
        line.push_str(&format!(", largest per-seed min S {s}"));
    }
    if !summary.reports.is_empty() {
        line.push_str(&format!(", {} claim(s), {} violated", summary.reports.len(), violated.len()));
        if !violated.is_empty() {
            line.push_str(&format!(" ({})", violated.join(", ")));
        }
    }
    let clean = summary.failures.is_empty() && violated.is_empty();
    Ok(Outcome { code: if clean { EXIT_OK } else { EXIT_VIOLATION }, summary: line })
}

fn cmd_trace(a: &TraceArgs) -> Result<Outcome> {
    let cfg = config("syracuse trace", a)?;
    let traj = match a.steps {
        Some(k) => syracuse::trajectory_steps(&a.w0.0, k)?,
        None => syracuse::trajectory(&a.w0.0, a.cap)?,
    };
    let stem = format!("trace-w{}", a.w0);
    let dir = a.output.dir();
    match a.output.format(DataFormat::Csv) {
        DataFormat::Csv => {
            let rows: Vec<Vec<String>> = traj
                .steps
                .iter()
                .map(|s| vec![s.n.to_string(), s.w.to_string(), s.h.map(|h| h.to_string()).unwrap_or_default(), s.e_prime.to_string()])
                .collect();
            write_file(&dir.join(format!("{stem}.csv")), &csv_document("syracuse-trace", &cfg, &["n", "W", "h", "e_prime"], &rows)?)?;
        }
        DataFormat::Json => {
            write_file(&dir.join(format!("{stem}.json")), &to_json_bytes(&envelope(&cfg, "report", &traj)?)?)?;
        }
    }
    let max_w = traj.values().max().expect("nonempty");
    let state = if traj.reached_one {
        format!("reached 1 after {} steps", traj.len() - 1)
    } else {
        format!("did not reach 1 within {} steps", traj.len() - 1)
    };
    Ok(Outcome {
        code: if traj.reached_one || a.steps.is_some() { EXIT_OK } else { EXIT_VIOLATION },
        summary: format!("syracuse trace: W0={} {state}, max W {max_w}", a.w0),
    })
}

fn cmd_embed_check(a: &EmbedCheckArgs) -> Result<Outcome> {
    let cfg = config("syracuse embed-check", a)?;
    let traj = syracuse::trajectory(&a.w0.0, a.cap)?;
    let emb = syracuse::embed(&traj)?;
    let mut reports = vec![emb.consistency.clone(), emb.admissibility.clone()];
    let mut structure = Vec::new();
    for n in 0..traj.len().saturating_sub(1) {
        structure.extend(syracuse::structure_check(&traj, n)?);
    }
    reports.extend(merge_by_claim(&format!("W0={} steps 0..{}", a.w0, traj.len().saturating_sub(1)), structure));
    let extra = json!({ "states": emb.trajectory.steps });
    emit_reports("syracuse embed-check", &format!("embed-w{}", a.w0), &a.output, &cfg, &reports, Some(extra))
}

fn render_ext(f: RenderFormat) -> &'static str {
    match f {
        RenderFormat::Text => "txt",
        RenderFormat::Pbm => "pbm",
        RenderFormat::Svg => "svg",
    }
}

fn cmd_render(a: &RenderArgs) -> Result<Outcome> {
    let cfg = config("ca render", a)?;
    if a.carries && a.format != RenderFormat::Text {
        return Err(Error::Usage("--carries applies to --format text only".into()));
    }
    let (mode, seed, tag) = match (&a.w0, &a.xi) {
        (Some(w), _) => (CaMode::Syracuse, CaSeed::Odd(w.0.clone()), format!("w{w}")),
        (None, Some(x)) => (CaMode::RationalPower, CaSeed::Rational(x.clone()), format!("xi{}", x.to_string().replace('/', "_"))),
        (None, None) => return Err(Error::Usage("one of --w0 or --xi is required".into())),
    };
    let variant = if a.gray {
        "-gray"
    } else if a.overlay {
        "-overlay"
    } else {
        ""
    };
    let name = format!("ca-{tag}-r{}{variant}.{}", a.rows, render_ext(a.format));
    let path = a.out.clone().unwrap_or_else(|| output::resolve_out(None).join(name));
    let mut bytes = Vec::new();
    let (width, truncated, col_hi) = if a.overlay {
        let mut s = cagrid::build(mode, &seed, a.rows, usize::MAX)?;
        let xi = s.rows[0].value();
        let mut c = cagrid::build(CaMode::RationalPower, &CaSeed::Rational(xi), a.rows, usize::MAX)?;
        let required = s.required_width().max(c.required_width());
        let width = match a.width {
            Some(w) if w < required => return Err(Error::GridTooNarrow { width: w, required }),
            Some(w) => w,
            None => required + a.frac_depth,
        };
        s.width = width;
        c.width = width;
        let ov = cagrid::overlay(&c, &s, a.frac_depth as i64)?;
        cagrid::render_overlay(&ov, a.format, &mut bytes)?;
        (width, s.truncated() || c.truncated(), ov.col_hi)
    } else {
        let mut grid = match a.width {
            Some(w) => cagrid::build(mode, &seed, a.rows, w)?,
            None => cagrid::build_fitted(mode, &seed, a.rows, a.frac_depth)?,
        };
        if a.gray {
            grid = cagrid::gray(&grid);
        }
        cagrid::render(&grid, a.format, RenderOptions { carries: a.carries }, &mut bytes)?;
        (grid.width, grid.truncated(), grid.col_hi())
    };
    write_file(&path, &bytes)?;
    let meta = json!({
        "file": path.file_name().map(|n| n.to_string_lossy().into_owned()),
        "mode": mode,
        "rows": a.rows,
        "width": width,
        "highest_position": col_hi,
        "truncated": truncated,
        "bytes": bytes.len(),
    });
    let meta_path = PathBuf::from(format!("{}.meta.json", path.display()));
    write_file(&meta_path, &to_json_bytes(&envelope(&cfg, "image", &meta)?)?)?;
    Ok(Outcome {
        code: EXIT_OK,
        summary: format!("ca render: wrote {} ({} rows x {width} columns, {} bytes)", path.display(), a.rows, bytes.len()),
    })
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Branch(BranchCmd::Iterate(a)) => cmd_iterate(a),
        Command::Branch(BranchCmd::ProbeIndependence(a)) => cmd_probe(a),
        Command::Lemma(LemmaCmd::Domination(a)) => cmd_domination(a),
        Command::Lemma(LemmaCmd::FloorAddSearch(a)) => cmd_floor_add(a),
        Command::Lemma(LemmaCmd::Determinism(a)) => cmd_determinism(a),
        Command::Lemma(LemmaCmd::MinBound(a)) => cmd_min_bound(a),
        Command::Lemma(LemmaCmd::Asymptotics(a)) => cmd_asymptotics(a),
        Command::Lemma(LemmaCmd::Replay(a)) => cmd_replay(a),
        Command::Syracuse(SyracuseCmd::Scan(a)) => cmd_scan(a),
        Command::Syracuse(SyracuseCmd::Trace(a)) => cmd_trace(a),
        Command::Syracuse(SyracuseCmd::EmbedCheck(a)) => cmd_embed_check(a),
        Command::Ca(CaCmd::Render(a)) => cmd_render(a),
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// exit code. The summary line goes to `stdout`, errors to `stderr`.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{rendered}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{rendered}");
                    EXIT_ERROR
                }
            };
        }
    };
    match dispatch(&cli) {
        Ok(outcome) => {
            let _ = writeln!(stdout, "{}", outcome.summary);
            outcome.code
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_ERROR
        }
    }
}
