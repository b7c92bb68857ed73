//! CSV forms of maps and sweep summaries.
//!
//! Maps use long format `b_mT,detuning_hz,s21_db` with field outer and
//! frequency inner, every value printed with nine significant digits.
//! Sweep summaries print frequencies with full round-trip precision, since
//! nine digits of an absolute microwave frequency would lose the doublet.

use std::io::{Read, Write};

use thiserror::Error;

use super::{FieldPoint, TransmissionMap};

pub const MAP_HEADER: [&str; 3] = ["b_mT", "detuning_hz", "s21_db"];
pub const SWEEP_HEADER: [&str; 7] = [
    "b_mT",
    "f_plus_hz",
    "f_minus_hz",
    "fwhm_plus_hz",
    "fwhm_minus_hz",
    "f_bare_up_hz",
    "f_bare_low_hz",
];

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("line {line}: {message}")]
    Format { line: u64, message: String },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl CsvError {
    fn at(line: u64, message: impl Into<String>) -> Self {
        CsvError::Format {
            line,
            message: message.into(),
        }
    }
}

impl From<csv::Error> for CsvError {
    fn from(err: csv::Error) -> Self {
        let line = err.position().map(|p| p.line()).unwrap_or(0);
        match err.into_kind() {
            csv::ErrorKind::Io(io) => CsvError::Io(io),
            other => CsvError::at(line, format!("{other:?}")),
        }
    }
}

/// Decimal rendering with nine significant digits.
///
/// Falls back to exponent notation outside `1e-6 ..= 1e15`.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{x:.8e}");
    let exp: i32 = sci
        .rsplit_once('e')
        .and_then(|(_, e)| e.parse().ok())
        .unwrap_or(0);
    if (-6..15).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}

fn parse_field(value: &str, line: u64, column: &str) -> Result<f64, CsvError> {
    let v: f64 = value
        .trim()
        .parse()
        .map_err(|_| CsvError::at(line, format!("`{column}`: cannot parse `{value}` as a number")))?;
    if !v.is_finite() {
        return Err(CsvError::at(line, format!("`{column}`: non-finite value")));
    }
    Ok(v)
}

fn check_header(rdr: &mut csv::Reader<impl Read>, expected: &[&str]) -> Result<(), CsvError> {
    let headers = rdr.headers()?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(CsvError::at(1, "empty input"));
    }
    if headers.iter().map(str::trim).ne(expected.iter().copied()) {
        return Err(CsvError::at(
            1,
            format!("expected header `{}`", expected.join(",")),
        ));
    }
    Ok(())
}

pub fn write_map_csv<W: Write>(map: &TransmissionMap, out: W) -> Result<(), CsvError> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(MAP_HEADER)?;
    for (b, row) in map.rows() {
        let b_mt = format_sig9(b * 1e3);
        for (f, v) in map.f_axis.iter().zip(row) {
            wtr.write_record([b_mt.as_str(), &format_sig9(*f), &format_sig9(*v)])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

/// Reads a long-format map. The result carries `seed = 0` and no SNR, since
/// the file does not record them.
pub fn read_map_csv<R: Read>(input: R) -> Result<TransmissionMap, CsvError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    check_header(&mut rdr, &MAP_HEADER)?;

    let mut b_axis: Vec<f64> = Vec::new();
    let mut f_axis: Vec<f64> = Vec::new();
    let mut values = Vec::new();
    let mut col = 0usize;
    let mut first_block = true;
    let mut last_line = 1;
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        last_line = line;
        if record.len() != 3 {
            return Err(CsvError::at(line, "expected 3 columns"));
        }
        let b = parse_field(&record[0], line, "b_mT")? * 1e-3;
        let f = parse_field(&record[1], line, "detuning_hz")?;
        let v = parse_field(&record[2], line, "s21_db")?;

        if b_axis.last() != Some(&b) {
            if let Some(&prev) = b_axis.last() {
                if b <= prev {
                    return Err(CsvError::at(line, "field values must increase between blocks"));
                }
                if f_axis.len() < 2 {
                    return Err(CsvError::at(line, "each block needs at least two frequencies"));
                }
                if col != f_axis.len() {
                    return Err(CsvError::at(line, "previous block is incomplete"));
                }
                first_block = false;
            }
            b_axis.push(b);
            col = 0;
        }

        if first_block {
            if f_axis.last().is_some_and(|&p| f <= p) {
                return Err(CsvError::at(line, "detuning must increase within a block"));
            }
            f_axis.push(f);
        } else if col >= f_axis.len() || f_axis[col] != f {
            return Err(CsvError::at(
                line,
                "frequency axis differs from the first block",
            ));
        }
        values.push(v);
        col += 1;
    }

    if b_axis.is_empty() {
        return Err(CsvError::at(last_line.max(1), "no data rows"));
    }
    if f_axis.len() < 2 {
        return Err(CsvError::at(last_line, "each block needs at least two frequencies"));
    }
    if col != f_axis.len() {
        return Err(CsvError::at(last_line, "last block is incomplete"));
    }
    Ok(TransmissionMap {
        b_axis,
        f_axis,
        values,
        seed: 0,
        snr_db: None,
    })
}

/// One line of the sweep summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRecord {
    pub b: f64,
    pub f_plus: f64,
    pub f_minus: f64,
    pub fwhm_plus: f64,
    pub fwhm_minus: f64,
    pub f_bare_up: f64,
    pub f_bare_low: f64,
}

impl From<&FieldPoint> for SweepRecord {
    fn from(p: &FieldPoint) -> Self {
        Self {
            b: p.b,
            f_plus: p.plus.f_center,
            f_minus: p.minus.f_center,
            fwhm_plus: p.plus.fwhm,
            fwhm_minus: p.minus.fwhm,
            f_bare_up: p.f_bare_up,
            f_bare_low: p.f_bare_low,
        }
    }
}

pub fn write_sweep_csv<W: Write>(records: &[SweepRecord], out: W) -> Result<(), CsvError> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(SWEEP_HEADER)?;
    for r in records {
        wtr.write_record([
            format_sig9(r.b * 1e3),
            r.f_plus.to_string(),
            r.f_minus.to_string(),
            r.fwhm_plus.to_string(),
            r.fwhm_minus.to_string(),
            r.f_bare_up.to_string(),
            r.f_bare_low.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_sweep_csv<R: Read>(input: R) -> Result<Vec<SweepRecord>, CsvError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    check_header(&mut rdr, &SWEEP_HEADER)?;
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != SWEEP_HEADER.len() {
            return Err(CsvError::at(line, "expected 7 columns"));
        }
        let v = |i: usize| parse_field(&record[i], line, SWEEP_HEADER[i]);
        out.push(SweepRecord {
            b: v(0)? * 1e-3,
            f_plus: v(1)?,
            f_minus: v(2)?,
            fwhm_plus: v(3)?,
            fwhm_minus: v(4)?,
            f_bare_up: v(5)?,
            f_bare_low: v(6)?,
        });
    }
    Ok(out)
}
