//! Verification report and its JSON/CSV serializations.

use std::io::Write;

use bt_core::FieldCtx;
use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub status: Status,
    pub runtime_ms: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub payload: Value,
    pub witnesses: Value,
}

impl SuiteResult {
    pub fn skipped(name: &'static str, note: impl Into<Option<String>>) -> Self {
        SuiteResult {
            name,
            status: Status::Skipped,
            runtime_ms: 0,
            note: note.into(),
            payload: Value::Null,
            witnesses: Value::Array(Vec::new()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ContextInfo {
    pub e: u32,
    pub q: u32,
    pub big_order: u32,
    pub modulus: String,
    pub epsilon: String,
    pub delta: String,
    pub sigma_exp: u32,
    pub mul_table: bool,
}

impl ContextInfo {
    pub fn new(ctx: &FieldCtx) -> Self {
        ContextInfo {
            e: ctx.e(),
            q: ctx.q(),
            big_order: ctx.big_order(),
            modulus: format!("{:x}", ctx.modulus()),
            epsilon: ctx.epsilon().to_string(),
            delta: ctx.delta().to_string(),
            sigma_exp: ctx.sigma_exp(),
            mul_table: ctx.has_mul_table(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Reproducibility {
    pub command: String,
    pub threads: usize,
    pub budget: u128,
    pub scope: &'static str,
    pub semilinear: bool,
    /// `(r, s, t)` as indices into the sorted subfield.
    pub probe_ordering: Vec<(usize, usize, usize)>,
    pub shard_count: u64,
    pub sampling_seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub artifact_version: &'static str,
    pub context: ContextInfo,
    pub suites: Vec<SuiteResult>,
    pub reproducibility: Reproducibility,
    pub runtime_ms: u64,
}

impl VerificationReport {
    pub fn failed(&self) -> bool {
        self.suites.iter().any(|s| s.status == Status::Fail)
    }

    pub fn write_json(&self, out: &mut dyn Write) -> std::io::Result<()> {
        serde_json::to_writer_pretty(&mut *out, self)?;
        writeln!(out)
    }

    /// Summary table: one row per suite.
    pub fn write_summary_csv(&self, out: &mut dyn Write) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["suite", "status", "runtime_ms", "note"])?;
        for s in &self.suites {
            let status = serde_json::to_value(s.status).expect("enum");
            w.write_record([
                s.name,
                status.as_str().unwrap_or_default(),
                &s.runtime_ms.to_string(),
                s.note.as_deref().unwrap_or(""),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
