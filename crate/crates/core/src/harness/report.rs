use std::path::Path;

use serde::{Deserialize, Serialize};

use super::matfile::write_atomic;
use crate::error::{Error, Result};

pub const REPORT_HEADER: [&str; 8] = ["method", "n_train", "eps_t_max", "r_pod", "r_ei", "iterations", "offline_s", "speedup"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub method: String,
    pub n_train: usize,
    pub eps_t_max: f64,
    pub r_pod: usize,
    pub r_ei: usize,
    pub iterations: usize,
    pub offline_s: f64,
    /// Offline time of the fixed-set baseline over this row's offline time.
    pub speedup: Option<f64>,
}

/// Formats with `digits` significant digits, switching to exponent form
/// for very large or small magnitudes and dropping trailing zeros.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let digits = digits.max(1);
    let exp = x.abs().log10().floor() as i32;
    // rounding can carry into the next decade
    let rounded: f64 = format!("{:.*e}", digits - 1, x).parse().expect("formatted float");
    let exp = if rounded.abs() >= 10f64.powi(exp + 1) { exp + 1 } else { exp };
    if exp < -4 || exp >= digits as i32 {
        let s = format!("{:.*e}", digits - 1, x);
        let (mantissa, e) = s.split_once('e').expect("exponent form");
        let mantissa = if mantissa.contains('.') {
            mantissa.trim_end_matches('0').trim_end_matches('.')
        } else {
            mantissa
        };
        format!("{mantissa}e{e}")
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        let s = format!("{:.*}", decimals, x);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    }
}

pub fn render_report(rows: &[ResultRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(REPORT_HEADER).map_err(csv_error)?;
    for r in rows {
        let f = |x: f64| format_significant(x, 6);
        w.write_record([
            r.method.clone(),
            r.n_train.to_string(),
            f(r.eps_t_max),
            r.r_pod.to_string(),
            r.r_ei.to_string(),
            r.iterations.to_string(),
            f(r.offline_s),
            r.speedup.map(f).unwrap_or_default(),
        ])
        .map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn emit_report(rows: &[ResultRow], path: &Path) -> Result<()> {
    write_atomic(path, render_report(rows)?.as_bytes())
}

pub fn parse_report(text: &str) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers().map_err(csv_error)?.iter().map(str::to_string).collect();
    if header != REPORT_HEADER {
        return Err(Error::Config(format!("unexpected report header {header:?}")));
    }
    r.deserialize().map(|row| row.map_err(csv_error)).collect()
}

pub fn read_report(path: &Path) -> Result<Vec<ResultRow>> {
    parse_report(&std::fs::read_to_string(path)?)
}

fn csv_error(e: csv::Error) -> Error {
    Error::Config(format!("csv: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_significant(505.47, 6), "505.47");
        assert_eq!(format_significant(2.07e-8, 6), "2.07e-8");
        assert_eq!(format_significant(1.0 / 3.0, 6), "0.333333");
        assert_eq!(format_significant(999999.7, 6), "1e6");
        assert_eq!(format_significant(4.6, 6), "4.6");
        assert_eq!(format_significant(12.0, 6), "12");
    }

    #[test]
    fn empty_report_is_header_only() {
        assert_eq!(render_report(&[]).unwrap(), "method,n_train,eps_t_max,r_pod,r_ei,iterations,offline_s,speedup\n");
    }
}
