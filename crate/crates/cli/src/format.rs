//! File formats: exact rational literals, system/gains/vector JSON files,
//! and trajectory CSV output.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde_json::Value;

use swstab_core::ladder::ModeMatrices;
use swstab_core::matrix::{norm_sq, Matrix};
use swstab_core::rational::{approx, Rational};
use swstab_core::simulate::Trajectory;
use swstab_core::system::SwitchedSystem;

/// Parses an exact rational literal: an integer (`-3`), a fraction (`5/2`)
/// or a finite decimal (`2.5`, `-0.25`). Scientific notation is rejected;
/// every accepted literal converts without rounding.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    if text.is_empty() {
        bail!("empty number literal");
    }
    if text.contains(['e', 'E']) {
        bail!("scientific notation is not supported, write `{text}` as a fraction or decimal");
    }
    if let Some((num, den)) = text.split_once('/') {
        let num = BigInt::from_str(num.trim()).with_context(|| format!("bad numerator in `{text}`"))?;
        let den = BigInt::from_str(den.trim()).with_context(|| format!("bad denominator in `{text}`"))?;
        if den.is_zero() {
            bail!("zero denominator in `{text}`");
        }
        return Ok(Rational::new(num, den));
    }
    if let Some((int_part, frac_part)) = text.split_once('.') {
        if frac_part.contains(['+', '-']) {
            bail!("malformed decimal `{text}`");
        }
        let digits = format!("{int_part}{frac_part}");
        let num = BigInt::from_str(&digits).with_context(|| format!("malformed decimal `{text}`"))?;
        let mut den = BigInt::one();
        for _ in 0..frac_part.len() {
            den *= 10;
        }
        return Ok(Rational::new(num, den));
    }
    let num = BigInt::from_str(text).with_context(|| format!("malformed integer `{text}`"))?;
    Ok(Rational::from_integer(num))
}

/// `p/q` string, plain integer when the denominator is one. Round-trips
/// exactly through [`parse_rational`].
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn entry_to_rational(value: &Value) -> Result<Rational> {
    match value {
        // arbitrary_precision keeps the source literal, so decimals convert
        // exactly rather than through f64
        Value::Number(n) => parse_rational(&n.to_string()),
        Value::String(s) => parse_rational(s),
        other => bail!("expected a number or a rational string, got {other}"),
    }
}

fn parse_matrix(value: &Value, what: &str) -> Result<Matrix> {
    let rows = value.as_array().with_context(|| format!("{what} must be a list of rows"))?;
    let mut parsed: Vec<Vec<Rational>> = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let row = row.as_array().with_context(|| format!("{what} row {} must be a list", i + 1))?;
        let entries: Result<Vec<Rational>> = row.iter().map(entry_to_rational).collect();
        let entries = entries.with_context(|| format!("{what} row {}", i + 1))?;
        if let Some(first) = parsed.first() {
            if entries.len() != first.len() {
                bail!(
                    "{what} row {} has {} entries, expected {}",
                    i + 1,
                    entries.len(),
                    first.len()
                );
            }
        }
        parsed.push(entries);
    }
    if parsed.is_empty() {
        bail!("{what} has no rows");
    }
    Ok(Matrix::from_rows(parsed))
}

fn parse_matrix_list(value: &Value, what: &str) -> Result<Vec<Matrix>> {
    let list = value.as_array().with_context(|| format!("{what} must be a list of matrices"))?;
    list.iter()
        .enumerate()
        .map(|(j, m)| parse_matrix(m, &format!("{what}[{}]", j + 1)))
        .collect()
}

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("{} is not valid JSON", path.display()))
}

/// Reads `{"A": [M matrices], "B": [M matrices]}`.
pub fn parse_system(path: &Path) -> Result<SwitchedSystem> {
    let root = read_json(path)?;
    let a = root.get("A").with_context(|| format!("{}: missing field \"A\"", path.display()))?;
    let b = root.get("B").with_context(|| format!("{}: missing field \"B\"", path.display()))?;
    let a = parse_matrix_list(a, "A")?;
    let b = parse_matrix_list(b, "B")?;
    SwitchedSystem::new(a, b).with_context(|| format!("{}: inconsistent shapes", path.display()))
}

/// Reads `{"mode_kind": "md", "K": [matrices]}` or
/// `{"mode_kind": "mi", "K": matrix}`.
pub fn parse_gains(path: &Path) -> Result<ModeMatrices> {
    let root = read_json(path)?;
    let kind = root
        .get("mode_kind")
        .and_then(Value::as_str)
        .with_context(|| format!("{}: missing field \"mode_kind\"", path.display()))?;
    let k = root.get("K").with_context(|| format!("{}: missing field \"K\"", path.display()))?;
    match kind {
        "md" => Ok(ModeMatrices::PerMode(parse_matrix_list(k, "K")?)),
        "mi" => Ok(ModeMatrices::Shared(parse_matrix(k, "K")?)),
        other => bail!("{}: mode_kind must be \"md\" or \"mi\", got \"{other}\"", path.display()),
    }
}

/// Reads `{"vectors": [[...], ...]}`.
pub fn parse_vectors(path: &Path) -> Result<Vec<Vec<Rational>>> {
    let root = read_json(path)?;
    let list = root
        .get("vectors")
        .and_then(Value::as_array)
        .with_context(|| format!("{}: missing list field \"vectors\"", path.display()))?;
    let mut out = Vec::with_capacity(list.len());
    for (i, vec) in list.iter().enumerate() {
        let vec = vec
            .as_array()
            .with_context(|| format!("{}: vector {} must be a list", path.display(), i + 1))?;
        let entries: Result<Vec<Rational>> = vec.iter().map(entry_to_rational).collect();
        out.push(entries.with_context(|| format!("{}: vector {}", path.display(), i + 1))?);
    }
    Ok(out)
}

/// Parses a comma-separated rational vector from the command line.
pub fn parse_vector_arg(text: &str) -> Result<Vec<Rational>> {
    text.split(',').map(parse_rational).collect()
}

/// Writes the trajectory as CSV: time, applied mode (1-based, empty on the
/// final row), decimal display columns, exact `p/q` twin columns, and the
/// exact squared norm. The exact columns replay through the closed loop.
pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    let n = traj.x0.len();
    let mut writer = csv::Writer::from_path(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    let mut header = vec!["t".to_string(), "sigma".to_string()];
    header.extend((1..=n).map(|i| format!("x{i}")));
    header.extend((1..=n).map(|i| format!("x{i}_exact")));
    header.push("norm_sq_exact".to_string());
    writer.write_record(&header)?;
    for (t, state) in traj.states.iter().enumerate() {
        let mut record = vec![
            t.to_string(),
            traj.sigma.get(t).map_or_else(String::new, |j| (j + 1).to_string()),
        ];
        record.extend(state.iter().map(|c| format!("{}", approx(c))));
        record.extend(state.iter().map(format_rational));
        record.push(format_rational(&norm_sq(state)));
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use swstab_core::rational::{rat, ratio};

    #[test]
    fn rational_literals_parse_exactly() {
        assert_eq!(parse_rational("2.5").unwrap(), ratio(5, 2));
        assert_eq!(parse_rational("-0.25").unwrap(), ratio(-1, 4));
        assert_eq!(parse_rational("5/2").unwrap(), ratio(5, 2));
        assert_eq!(parse_rational("-6/4").unwrap(), ratio(-3, 2));
        assert_eq!(parse_rational("17").unwrap(), rat(17));
        assert_eq!(parse_rational(".5").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("-.5").unwrap(), ratio(-1, 2));
    }

    #[test]
    fn scientific_notation_is_rejected() {
        assert!(parse_rational("1e3").is_err());
        assert!(parse_rational("2.5E-1").is_err());
    }

    #[test]
    fn malformed_literals_are_rejected() {
        for bad in ["", "1/0", "one", "1.2.3", "2.-5", "--3"] {
            assert!(parse_rational(bad).is_err(), "accepted `{bad}`");
        }
    }

    #[test]
    fn formatting_round_trips() {
        for r in [rat(0), rat(-7), ratio(5, 2), ratio(-1, 3)] {
            assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
        }
        assert_eq!(format_rational(&rat(4)), "4");
        assert_eq!(format_rational(&ratio(-5, 2)), "-5/2");
    }
}
