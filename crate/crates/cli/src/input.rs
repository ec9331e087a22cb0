//! Reading samples: one number per line, `#` comments and blank lines skipped.

use std::fs;
use std::path::Path;

use crate::CliError;

pub fn parse_values(text: &str) -> Result<Vec<f64>, CliError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let v: f64 = t
            .parse()
            .map_err(|_| CliError::Parse(format!("line {}: cannot parse '{t}' as a number", i + 1)))?;
        if !v.is_finite() {
            return Err(CliError::Parse(format!("line {}: value '{t}' is not finite", i + 1)));
        }
        out.push(v);
    }
    Ok(out)
}

pub fn read_values(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    parse_values(&text)
}
