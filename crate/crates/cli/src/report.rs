use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use setalg::algebra::Element;
use setalg::rational::{to_exact_string, Rational};

pub const TOOL: &str = "setalg";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Fail,
}

/// Everything a command prints. Key order inside `result` is sorted, and
/// wall-clock time only appears when asked for, so two runs on the same
/// input and seed produce the same bytes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub input_sha256: Option<String>,
    pub seed: u64,
    pub status: Status,
    pub result: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u64>,
}

impl RunReport {
    pub fn new(
        command: impl Into<String>,
        input: Option<&[u8]>,
        seed: u64,
        ok: bool,
        result: Value,
    ) -> Self {
        Self {
            tool: TOOL,
            version: VERSION,
            command: command.into(),
            input_sha256: input.map(digest),
            seed,
            status: if ok { Status::Ok } else { Status::Fail },
            result,
            timing_ms: None,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == Status::Ok
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }
}

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn exact(r: &Rational) -> Value {
    Value::String(to_exact_string(r))
}

pub fn exact_list(rs: &[Rational]) -> Value {
    Value::Array(rs.iter().map(exact).collect())
}

pub fn element(e: &Element) -> Value {
    json!(e.atoms().collect::<Vec<u32>>())
}

pub fn elements(es: &[Element]) -> Value {
    Value::Array(es.iter().map(element).collect())
}
