//! CSV input and output of point sets.

use crate::error::{Error, Result};
use crate::phyllo::PhylloSet;
use num_complex::Complex64;
use std::io::{Read, Write};

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::Io(e.to_string())
}

/// Headerless rows `n,x,y`, or `n,k,x,y` for whorled sets.
pub fn write_points_csv<W: Write>(set: &PhylloSet, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    for p in &set.points {
        let (x, y) = (format!("{:.17e}", p.pos.re), format!("{:.17e}", p.pos.im));
        if set.whorl > 1 {
            w.write_record([p.n.to_string(), p.k.to_string(), x, y]).map_err(io_err)?;
        } else {
            w.write_record([p.n.to_string(), x, y]).map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)
}

/// Reads `x,y` rows; a non-numeric first row is a header. With more than two
/// columns the last two are the coordinates.
pub fn read_points_csv<R: Read>(input: R) -> Result<Vec<Complex64>> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(input);
    let mut pts = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(io_err)?;
        if rec.len() < 2 {
            if rec.iter().all(|f| f.is_empty()) {
                continue;
            }
            return Err(Error::Io(format!("line {}: expected at least two columns", line + 1)));
        }
        let (xs, ys) = (&rec[rec.len() - 2], &rec[rec.len() - 1]);
        match (xs.parse::<f64>(), ys.parse::<f64>()) {
            (Ok(x), Ok(y)) => pts.push(Complex64::new(x, y)),
            _ if line == 0 => continue,
            _ => return Err(Error::Io(format!("line {}: cannot parse `{xs},{ys}`", line + 1))),
        }
    }
    Ok(pts)
}
