//! Inequality certificates. Every `holds` flag is decided exactly, or by a
//! certified interval enclosure when a side is irrational.

mod battery;
mod corpus;
mod lemmas;

use std::cmp::Ordering;
use std::fmt;

use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exact::{format_float, Interval, PowerProduct, DEFAULT_PREC};

pub use battery::{run_suite, Suite};
pub use corpus::{corpus_rng, random_set, CorpusRng};
pub use lemmas::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
}

impl Relation {
    fn accepts(self, ord: Ordering) -> bool {
        match self {
            Relation::Le => ord != Ordering::Greater,
            Relation::Lt => ord == Ordering::Less,
            Relation::Ge => ord != Ordering::Less,
            Relation::Gt => ord == Ordering::Greater,
        }
    }

    fn upper_bound(self) -> bool {
        matches!(self, Relation::Le | Relation::Lt)
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Lt => "<",
            Relation::Ge => ">=",
            Relation::Gt => ">",
        })
    }
}

/// One side of an inequality.
#[derive(Clone, Debug)]
pub enum Side {
    Exact(PowerProduct),
    /// Irrational; only an enclosure is available.
    Approx(Interval),
}

impl Side {
    pub fn int(x: impl Into<Integer>) -> Side {
        Side::Exact(PowerProduct::new(x.into()))
    }

    pub fn rational(x: Rational) -> Side {
        Side::Exact(PowerProduct::new(x))
    }

    fn enclose(&self, prec: u32) -> Result<Interval> {
        match self {
            Side::Exact(p) => p.enclose(prec),
            Side::Approx(iv) => Ok(iv.clone()),
        }
    }

    fn render(&self) -> String {
        match self {
            Side::Exact(p) => p.to_string(),
            Side::Approx(iv) => format!("~{iv}"),
        }
    }
}

/// Exact (or certified) three-way comparison of two sides.
pub fn compare(lhs: &Side, rhs: &Side, prec: u32) -> Result<Ordering> {
    if let (Side::Exact(a), Side::Exact(b)) = (lhs, rhs) {
        return a.cmp_exact(b);
    }
    let a = lhs.enclose(prec)?;
    let b = rhs.enclose(prec)?;
    a.cmp(&b).ok_or(Error::Undecided(prec))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub lhs: String,
    pub relation: Relation,
    pub rhs: String,
    pub holds: bool,
    /// `rhs/lhs` for upper bounds, `lhs/rhs` for lower bounds: at least 1
    /// exactly when a non-strict inequality holds.
    pub slack: String,
    /// False for informational measurements with uncalibrated thresholds.
    pub mandatory: bool,
    pub inputs_digest: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

impl CheckReport {
    pub fn evaluate(name: &str, lhs: Side, rel: Relation, rhs: Side, inputs: &str) -> Result<CheckReport> {
        Self::evaluate_prec(name, lhs, rel, rhs, inputs, DEFAULT_PREC)
    }

    pub fn evaluate_prec(
        name: &str,
        lhs: Side,
        rel: Relation,
        rhs: Side,
        inputs: &str,
        prec: u32,
    ) -> Result<CheckReport> {
        let holds = rel.accepts(compare(&lhs, &rhs, prec)?);
        let (num, den) = if rel.upper_bound() { (&rhs, &lhs) } else { (&lhs, &rhs) };
        let slack = slack_string(num, den);
        Ok(CheckReport {
            name: name.to_string(),
            lhs: lhs.render(),
            relation: rel,
            rhs: rhs.render(),
            holds,
            slack,
            mandatory: true,
            inputs_digest: digest(&format!("{name}|{inputs}")),
            note: None,
        })
    }

    pub fn informational(mut self) -> Self {
        self.mandatory = false;
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn slack_f64(&self) -> f64 {
        self.slack.parse().unwrap_or(f64::INFINITY)
    }

    /// A mandatory report that failed.
    pub fn is_violation(&self) -> bool {
        self.mandatory && !self.holds
    }
}

fn slack_string(num: &Side, den: &Side) -> String {
    const P: u32 = 128;
    let (Ok(n), Ok(d)) = (num.enclose(P), den.enclose(P)) else {
        return "nan".into();
    };
    if d.hi == 0 {
        return "inf".into();
    }
    match n.div(&d) {
        Ok(q) => format_float(&q.mid(), 20),
        Err(_) => {
            // denominator interval touches 0 but is not exactly 0
            let m = Float::with_val(P, n.mid() / d.mid());
            format_float(&m, 20)
        }
    }
}

/// Hex SHA-256 of a canonical input description.
pub fn digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}
