use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use gsrp_core::{Error, Result};

use crate::config::OutputFormat;
use crate::sweep::SweepRow;

pub const CSV_HEADER: &str =
    "lambda,snr_subspace_db,snr_regret_db,snr_constrained_db,snr_orthogonal_db,regret,bound_lower,bound_upper";

/// `v` with six significant digits, like C's `%.6g`.
pub fn sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp) as usize;
        let fixed = format!("{v:.decimals$}");
        if fixed.contains('.') {
            fixed.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            fixed
        }
    } else {
        let m = if mantissa.contains('.') {
            mantissa.trim_end_matches('0').trim_end_matches('.')
        } else {
            mantissa
        };
        format!("{m}e{exp}")
    }
}

fn fields(r: &SweepRow) -> [f64; 8] {
    [
        r.lambda,
        r.snr_subspace_db,
        r.snr_regret_db,
        r.snr_constrained_db,
        r.snr_orthogonal_db,
        r.regret_constrained,
        r.bound_lower,
        r.bound_upper,
    ]
}

pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let line: Vec<String> = fields(r).iter().map(|&v| sig6(v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn to_json(rows: &[SweepRow]) -> Result<String> {
    serde_json::to_string_pretty(rows).map_err(|e| Error::InvalidArgument(format!("json: {e}")))
}

pub fn render(rows: &[SweepRow], format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Csv => Ok(to_csv(rows)),
        OutputFormat::Json => to_json(rows),
    }
}

/// Writes the sweep to `path` in `format`.
pub fn emit(rows: &[SweepRow], format: OutputFormat, path: &Path) -> Result<()> {
    fs::write(path, render(rows, format)?)?;
    Ok(())
}

/// Parses CSV written by [`to_csv`].
pub fn read_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::SignalFormat("unexpected sweep CSV header".into()));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let v = line
                .split(',')
                .map(|f| f.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::SignalFormat(format!("row {}: {e}", i + 1)))?;
            let [lambda, sub, reg, con, orth, regret, lo, hi] = v[..] else {
                return Err(Error::SignalFormat(format!("row {}: expected 8 fields", i + 1)));
            };
            Ok(SweepRow {
                lambda,
                snr_subspace_db: sub,
                snr_regret_db: reg,
                snr_constrained_db: con,
                snr_orthogonal_db: orth,
                regret_constrained: regret,
                bound_lower: lo,
                bound_upper: hi,
            })
        })
        .collect()
}

/// Writes `snr_<scheme>.dat` files with `lambda snr_db` columns into `dir`.
pub fn emit_plot_data(rows: &[SweepRow], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    type Column = fn(&SweepRow) -> f64;
    let series: [(&str, Column); 4] = [
        ("subspace", |r| r.snr_subspace_db),
        ("regret", |r| r.snr_regret_db),
        ("constrained", |r| r.snr_constrained_db),
        ("orthogonal", |r| r.snr_orthogonal_db),
    ];
    for (name, get) in series {
        let mut text = format!("# lambda snr_{name}_db\n");
        for r in rows {
            writeln!(text, "{} {}", sig6(r.lambda), sig6(get(r))).expect("writing to a String");
        }
        fs::write(dir.join(format!("snr_{name}.dat")), text)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(lambda: f64) -> SweepRow {
        SweepRow {
            lambda,
            snr_subspace_db: 15.783_412_9,
            snr_regret_db: 14.644_801,
            snr_constrained_db: 17.043_3 + lambda,
            snr_orthogonal_db: 17.154_999_7,
            regret_constrained: 0.001_234_567_89,
            bound_lower: 1.5e-9,
            bound_upper: 123_456_789.0,
        }
    }

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(1.0), "1");
        assert_eq!(sig6(0.64), "0.64");
        assert_eq!(sig6(15.7834129), "15.7834");
        assert_eq!(sig6(-2.5), "-2.5");
        assert_eq!(sig6(0.00123456789), "0.00123457");
        assert_eq!(sig6(1.5e-9), "1.5e-9");
        assert_eq!(sig6(123456789.0), "1.23457e8");
        assert_eq!(sig6(f64::INFINITY), "inf");
    }

    #[test]
    fn empty_sweep_is_header_only() {
        assert_eq!(to_csv(&[]), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn three_rows_make_four_lines() {
        let csv = to_csv(&[row(0.0), row(0.5), row(1.0)]);
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn csv_round_trip_keeps_six_digits() {
        let rows = vec![row(0.0), row(0.37), row(1.0)];
        let back = read_csv(&to_csv(&rows)).unwrap();
        for (a, b) in rows.iter().zip(&back) {
            for (x, y) in fields(a).iter().zip(fields(b)) {
                assert!((x - y).abs() <= 5e-6 * x.abs(), "{x} vs {y}");
            }
        }
    }

    #[test]
    fn json_mirrors_fields() {
        let json = to_json(&[row(0.5)]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v[0]["lambda"], 0.5);
        assert_eq!(v[0]["regret_constrained"], 0.00123456789);
        let back: Vec<SweepRow> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, vec![row(0.5)]);
    }

    #[test]
    fn plot_files() {
        let dir = tempfile::tempdir().unwrap();
        emit_plot_data(&[row(0.0), row(1.0)], dir.path()).unwrap();
        let text = fs::read_to_string(dir.path().join("snr_constrained.dat")).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert_eq!(text.lines().nth(2), Some("1 18.0433"));
    }

    #[test]
    fn emit_writes_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.csv");
        emit(&[row(0.0)], OutputFormat::Csv, &p).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), to_csv(&[row(0.0)]));
        assert!(emit(&[], OutputFormat::Csv, &dir.path().join("missing/x.csv")).is_err());
    }
}
