use std::time::Duration;

use energia_core::checks::CheckReport;
use energia_core::exact::{format_float, Interval};
use energia_core::IntSet;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

pub const SCHEMA: u32 = 1;

/// One JSON document per invocation. Everything but `wall_time_ms` (only
/// present with `--timing`) is a function of command line, input and seed.
pub struct Report {
    pub command: Vec<String>,
    pub input_digest: Option<String>,
    pub seed: u64,
    pub precision: u32,
    pub results: Map<String, Value>,
    pub checks: Vec<CheckReport>,
    pub wall_time: Option<Duration>,
}

impl Report {
    pub fn new(command: Vec<String>, seed: u64, precision: u32) -> Self {
        Report { command, input_digest: None, seed, precision, results: Map::new(), checks: Vec::new(), wall_time: None }
    }

    pub fn input(&mut self, a: &IntSet) {
        self.input_digest = Some(hex::encode(Sha256::digest(a.canonical().as_bytes())));
    }

    pub fn put(&mut self, key: &str, value: impl Into<Value>) {
        self.results.insert(key.to_string(), value.into());
    }

    pub fn failed(&self) -> bool {
        self.checks.iter().any(CheckReport::is_violation)
    }

    pub fn to_json(&self) -> Value {
        let mandatory = self.checks.iter().filter(|c| c.mandatory).count();
        let violations = self.checks.iter().filter(|c| c.is_violation()).count();
        let mut doc = json!({
            "schema": SCHEMA,
            "engine": concat!("energia ", env!("CARGO_PKG_VERSION")),
            "command": self.command,
            "input_digest": self.input_digest,
            "seed": self.seed.to_string(),
            "precision_bits": self.precision,
            "results": self.results,
            "checks": self.checks,
            "summary": {
                "checks": self.checks.len().to_string(),
                "mandatory": mandatory.to_string(),
                "violations": violations.to_string(),
                "ok": violations == 0,
            },
        });
        if let Some(t) = self.wall_time {
            doc["wall_time_ms"] = json!(format!("{:.3}", t.as_secs_f64() * 1e3));
        }
        doc
    }
}

/// A real number as a decimal string tagged with the precision it was
/// computed at.
pub fn real(iv: &Interval, digits: usize) -> Value {
    json!({ "value": decimal(&format_float(&iv.mid(), digits)), "precision_bits": iv.prec() })
}

/// Rewrites `d.ddde-4` positionally when the exponent is moderate.
pub fn decimal(sci: &str) -> String {
    let Some((mantissa, exp)) = sci.split_once('e') else { return sci.to_string() };
    let Ok(exp) = exp.parse::<i32>() else { return sci.to_string() };
    if exp.abs() > 12 {
        return sci.to_string();
    }
    let (sign, m) = mantissa.strip_prefix('-').map_or(("", mantissa), |m| ("-", m));
    let (int, frac) = m.split_once('.').unwrap_or((m, ""));
    let digits = format!("{int}{frac}");
    let point = int.len() as i32 + exp;
    let body = if point <= 0 {
        format!("0.{}{digits}", "0".repeat((-point) as usize))
    } else if point as usize >= digits.len() {
        format!("{digits}{}", "0".repeat(point as usize - digits.len()))
    } else {
        format!("{}.{}", &digits[..point as usize], &digits[point as usize..])
    };
    format!("{sign}{body}")
}
