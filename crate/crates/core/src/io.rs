//! Text formats: the `x,y` points CSV and the one-index-per-line cycle file.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::Point2D;
use crate::instance::VertexSet;

/// Formats `x` with `digits` significant digits in the style of C's `%.{digits}g`.
pub fn fmt_significant(x: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_fraction(mantissa), sign, exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_fraction(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_points<W: Write>(out: W, vs: &VertexSet) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "y"])?;
    for pt in &vs.points {
        w.write_record([fmt_significant(pt.x, 17), fmt_significant(pt.y, 17)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_points_file(path: &Path, vs: &VertexSet) -> Result<()> {
    write_points(BufWriter::new(File::create(path)?), vs)
}

/// Reads a points CSV. Every coordinate must be a finite number in `[0, 1]`.
pub fn read_points<R: Read>(input: R) -> Result<VertexSet> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(input);
    let headers = rdr.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "x" || &headers[1] != "y" {
        return Err(Error::Malformed(format!(
            "expected header `x,y`, found `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut points = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Malformed(e.to_string()))?;
        if record.len() != 2 {
            return Err(Error::Malformed(format!("record {} has {} fields", line + 1, record.len())));
        }
        let parse = |s: &str| -> Result<f64> {
            let v: f64 =
                s.parse().map_err(|_| Error::Malformed(format!("record {}: `{s}` is not a number", line + 1)))?;
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Malformed(format!("record {}: coordinate {v} outside [0, 1]", line + 1)));
            }
            Ok(v)
        };
        points.push(Point2D::new(parse(&record[0])?, parse(&record[1])?));
    }
    Ok(VertexSet::from_points(points))
}

pub fn read_points_file(path: &Path) -> Result<VertexSet> {
    read_points(BufReader::new(File::open(path)?))
}

pub fn write_cycle<W: Write>(mut out: W, cycle: &[usize]) -> Result<()> {
    for v in cycle {
        writeln!(out, "{v}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_cycle_file(path: &Path, cycle: &[usize]) -> Result<()> {
    write_cycle(BufWriter::new(File::create(path)?), cycle)
}

/// Reads a cycle file; blank lines are skipped.
pub fn read_cycle<R: Read>(input: R) -> Result<Vec<usize>> {
    let mut cycle = Vec::new();
    for (i, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let v =
            t.parse().map_err(|_| Error::Malformed(format!("cycle line {}: `{t}` is not a vertex index", i + 1)))?;
        cycle.push(v);
    }
    Ok(cycle)
}

pub fn read_cycle_file(path: &Path) -> Result<Vec<usize>> {
    read_cycle(File::open(path)?)
}
