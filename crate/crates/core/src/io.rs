//! Text formats: step-function CSV and point-set files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::PointSet;
use crate::spectra::StepFunction;

pub const STEP_CSV_HEADER: &str = "lambda,cumulative";

/// One row per breakpoint. Floats use the shortest round-trip form, so the
/// text is a pure function of the values.
pub fn step_function_to_csv(f: &StepFunction) -> String {
    let mut s = String::from(STEP_CSV_HEADER);
    s.push('\n');
    for (b, v) in f.breakpoints().iter().zip(f.values()) {
        let _ = writeln!(s, "{b},{v}");
    }
    s
}

pub fn step_function_from_csv(text: &str) -> Result<StepFunction> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == STEP_CSV_HEADER => {}
        _ => return Err(Error::Parse { line: 1, msg: format!("expected header {STEP_CSV_HEADER:?}") }),
    }
    let mut breakpoints = Vec::new();
    let mut values = Vec::new();
    for (k, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parse = |t: Option<&str>| -> Result<f64> {
            t.and_then(|t| t.trim().parse().ok())
                .ok_or_else(|| Error::Parse { line: k + 1, msg: format!("malformed row {line:?}") })
        };
        let mut cols = line.split(',');
        breakpoints.push(parse(cols.next())?);
        values.push(parse(cols.next())?);
        if cols.next().is_some() {
            return Err(Error::Parse { line: k + 1, msg: "too many columns".into() });
        }
    }
    StepFunction::from_parts(breakpoints, values)
}

pub fn write_point_set(path: &Path, set: &PointSet) -> Result<()> {
    fs::write(path, set.to_text())?;
    Ok(())
}

pub fn read_point_set(path: &Path) -> Result<PointSet> {
    PointSet::from_text(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let f = StepFunction::from_atoms([(-2f64.sqrt(), 1.0 / 3.0), (0.1, 1.0 / 3.0), (1.5, 1.0 / 3.0)]).unwrap();
        let text = step_function_to_csv(&f);
        assert!(text.starts_with("lambda,cumulative\n"));
        assert_eq!(step_function_from_csv(&text).unwrap(), f);
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        match step_function_from_csv("lambda,cumulative\n0,0.5\nx,1\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(step_function_from_csv("a,b\n").is_err());
    }
}
