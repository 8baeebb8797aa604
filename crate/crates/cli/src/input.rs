//! Set ingestion: whitespace-separated decimal integers or a JSON array whose
//! entries are numbers or decimal strings.

use std::io::Read;
use std::path::Path;

use energia_core::IntSet;
use rug::Integer;
use serde_json::Value;

fn integer(token: &str) -> Result<Integer, String> {
    let t = token.strip_prefix('+').unwrap_or(token);
    let digits = t.strip_prefix('-').unwrap_or(t);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(format!("not a decimal integer: {token:?}"));
    }
    Integer::from_str_radix(t, 10).map_err(|e| format!("{token:?}: {e}"))
}

pub fn parse_set(text: &str) -> Result<IntSet, String> {
    let text = text.trim();
    let values: Vec<Integer> = if text.starts_with('[') {
        let items: Vec<Value> = serde_json::from_str(text).map_err(|e| format!("invalid JSON array: {e}"))?;
        items
            .iter()
            .map(|v| match v {
                Value::Number(n) => integer(&n.to_string()),
                Value::String(s) => integer(s.trim()),
                other => Err(format!("array entries must be integers, got {other}")),
            })
            .collect::<Result<_, _>>()?
    } else {
        text.split_whitespace().map(integer).collect::<Result<_, _>>()?
    };
    if values.is_empty() {
        return Err("input contains no integers".into());
    }
    Ok(IntSet::new(values))
}

/// Reads from a file, or standard input for `None` and `-`.
pub fn read_set(path: Option<&Path>) -> Result<IntSet, String> {
    let text = match path {
        Some(p) if p != Path::new("-") => {
            std::fs::read_to_string(p).map_err(|e| format!("cannot read {}: {e}", p.display()))?
        }
        _ => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map_err(|e| format!("cannot read standard input: {e}"))?;
            s
        }
    };
    parse_set(&text)
}

/// JSON array with every element as an exact number literal.
pub fn render_set(a: &IntSet) -> Value {
    Value::Array(a.iter().map(|x| Value::Number(x.to_string().parse().expect("integer literal"))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats() {
        let want = IntSet::new([1, 2, 3]);
        assert_eq!(parse_set("3 1\n2 2").unwrap(), want);
        assert_eq!(parse_set("[1, \"2\", 3]").unwrap(), want);
        let big = "[123456789012345678901234567890,-1]";
        let a = parse_set(big).unwrap();
        assert_eq!(render_set(&a).to_string(), "[-1,123456789012345678901234567890]");
        assert!(parse_set("x y").is_err());
        assert!(parse_set("1.5").is_err());
        assert!(parse_set("[1, [2]]").is_err());
        assert!(parse_set("  ").is_err());
    }
}
