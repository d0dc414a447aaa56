//! Artifact writing: JSON envelopes, versioned CSV tables, certificates.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Result;
use crate::lemmalab::{ClaimReport, Verdict};

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "BRANCHLAB_OUT";

/// Version tag written into every CSV header line.
pub const CSV_VERSION: u32 = 1;

/// `--out`, then `BRANCHLAB_OUT`, then the working directory.
pub fn resolve_out(flag: Option<&Path>) -> PathBuf {
    match flag {
        Some(p) => p.to_path_buf(),
        None => std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(".")),
    }
}

/// Writes `bytes` to `path`, creating parent directories.
pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, bytes)?;
    Ok(())
}

pub fn to_json_bytes(value: &impl Serialize) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// `{"tool", "version", "config", <key>}`.
pub fn envelope(config: &Value, key: &str, body: &impl Serialize) -> Result<Value> {
    let mut map = serde_json::Map::new();
    map.insert("tool".into(), json!("branchlab"));
    map.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    map.insert("config".into(), config.clone());
    map.insert(key.into(), serde_json::to_value(body)?);
    Ok(Value::Object(map))
}

/// A CSV document whose first line is `# branchlab <schema> v<N> config=<json>`.
pub fn csv_document(schema: &str, config: &Value, header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut out = format!("# branchlab {schema} v{CSV_VERSION} config={}\n", serde_json::to_string(config)?).into_bytes();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    out.extend(w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?);
    Ok(out)
}

pub fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Violated => "violated",
        Verdict::PreconditionFailed => "precondition_failed",
    }
}

/// Writes one `<stem>.<claim>.cert.json` per violated report and returns the
/// file names in report order.
pub fn write_certificates(dir: &Path, stem: &str, config: &Value, reports: &[ClaimReport]) -> Result<Vec<String>> {
    let mut names = Vec::new();
    for r in reports {
        if let Some(cert) = &r.certificate {
            let name = format!("{stem}.{}.cert.json", r.claim_id);
            write_file(&dir.join(&name), &to_json_bytes(&envelope(config, "certificate", cert)?)?)?;
            names.push(name);
        }
    }
    Ok(names)
}

pub fn report_rows(reports: &[ClaimReport]) -> Vec<Vec<String>> {
    reports
        .iter()
        .map(|r| {
            vec![
                r.claim_id.clone(),
                verdict_name(r.verdict).to_string(),
                r.tested_count.to_string(),
                r.instance.clone(),
                r.certificate.as_ref().map(|c| format!("{} vs {}", c.lhs, c.rhs)).unwrap_or_default(),
                r.notes.join("; "),
            ]
        })
        .collect()
}

pub const REPORT_HEADER: [&str; 6] = ["claim_id", "verdict", "tested_count", "instance", "witness", "notes"];
