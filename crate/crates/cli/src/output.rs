//! Text, JSON and CSV renderings of the reports.

use std::fmt::Write as _;

use clap::ValueEnum;
use covbreak::cusum::TestReport;
use covbreak::segment::SegmentationReport;
use covbreak::study::StudyResult;
use covbreak::transforms::RollingVolSeries;
use serde::Serialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

pub fn json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Data(format!("json output: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(crate::csvio::csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(crate::csvio::csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Data(format!("csv output: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn test_report(r: &TestReport, format: Format) -> CliResult<String> {
    match format {
        Format::Json => json(r),
        Format::Csv => csv_table(
            &[
                "statistic", "value", "standardized", "critical_value", "p_value", "p_value_se", "level", "reject",
                "theta_hat", "k_hat", "label", "n", "vdim", "window",
            ],
            [vec![
                r.statistic.to_string(),
                r.value.to_string(),
                r.standardized.to_string(),
                r.critical_value.to_string(),
                r.p_value.to_string(),
                opt(r.p_value_se),
                r.level.to_string(),
                r.reject.to_string(),
                r.theta_hat.to_string(),
                r.k_hat.to_string(),
                opt(r.label.as_deref()),
                r.n.to_string(),
                r.vdim.to_string(),
                r.window_used.to_string(),
            ]],
        ),
        Format::Text => {
            let mut s = String::new();
            let p = match r.p_value_se {
                Some(se) => format!("{:.4} (Monte Carlo, se {se:.4})", r.p_value),
                None => format!("{:.4}", r.p_value),
            };
            writeln!(s, "statistic       {}", r.statistic).unwrap();
            writeln!(s, "value           {:.6}", r.value).unwrap();
            writeln!(s, "standardized    {:.4}", r.standardized).unwrap();
            writeln!(s, "critical value  {:.6} (level {})", r.critical_value, r.level).unwrap();
            writeln!(s, "p-value         {p}").unwrap();
            writeln!(s, "decision        {}", if r.reject { "reject H0" } else { "do not reject H0" }).unwrap();
            writeln!(s, "theta_hat       {:.4}", r.theta_hat).unwrap();
            match &r.label {
                Some(l) => writeln!(s, "k_hat           {} ({l})", r.k_hat).unwrap(),
                None => writeln!(s, "k_hat           {}", r.k_hat).unwrap(),
            }
            writeln!(s, "n, d(vech)      {}, {}", r.n, r.vdim).unwrap();
            writeln!(s, "bartlett q      {}", r.window_used).unwrap();
            Ok(s)
        }
    }
}

pub fn segmentation(r: &SegmentationReport, format: Format) -> CliResult<String> {
    let rows = r.rows();
    match format {
        Format::Json => json(r),
        Format::Csv => csv_table(
            &["k", "label", "statistic", "round", "significant"],
            rows.iter().map(|row| {
                vec![
                    row.observation.to_string(),
                    opt(row.label.as_deref()),
                    row.value.to_string(),
                    row.round.to_string(),
                    row.significant.to_string(),
                ]
            }),
        ),
        Format::Text => {
            let mut s = String::new();
            writeln!(s, "{:>8}  {:<12} {:>12}  {:>5}  significant", "k*", "label", "statistic", "round").unwrap();
            for row in &rows {
                writeln!(
                    s,
                    "{:>8}  {:<12} {:>12.4}  {:>5}  {}",
                    row.observation,
                    row.label.as_deref().unwrap_or("-"),
                    row.value,
                    row.round,
                    if row.significant { "yes" } else { "no" }
                )
                .unwrap();
            }
            let unevaluated = r.root.walk().into_iter().filter(|n| n.error.is_some()).count();
            if unevaluated > 0 {
                writeln!(s, "{unevaluated} segment(s) could not be tested").unwrap();
            }
            let breaks: Vec<String> = r.breaks.iter().map(|b| (b.index + 1).to_string()).collect();
            writeln!(s, "breaks after observations: {}", if breaks.is_empty() { "none".into() } else { breaks.join(", ") })
                .unwrap();
            Ok(s)
        }
    }
}

pub fn study(r: &StudyResult, format: Format) -> CliResult<String> {
    match format {
        Format::Json => json(r),
        Format::Csv | Format::Text => {
            let rows = r.cells.iter().map(|c| {
                let t = c.theta;
                vec![
                    c.delta.to_string(),
                    c.n.to_string(),
                    c.level.to_string(),
                    c.replications.to_string(),
                    c.errors.to_string(),
                    c.rejections.to_string(),
                    c.frequency.to_string(),
                    c.se.to_string(),
                    opt(t.map(|t| t.mean)),
                    opt(t.map(|t| t.median)),
                    opt(t.map(|t| t.sd)),
                ]
            });
            let header = [
                "delta", "n", "level", "replications", "errors", "rejections", "freq", "se", "theta_mean",
                "theta_median", "theta_sd",
            ];
            if format == Format::Csv {
                return csv_table(&header, rows);
            }
            let mut s = String::new();
            writeln!(s, "{:>8} {:>6} {:>6} {:>7} {:>7} {:>8} {:>8}", "delta", "n", "level", "freq", "se", "theta_md", "theta_sd")
                .unwrap();
            for c in &r.cells {
                writeln!(
                    s,
                    "{:>8} {:>6} {:>6} {:>7.3} {:>7.3} {:>8} {:>8}",
                    c.delta,
                    c.n,
                    c.level,
                    c.frequency,
                    c.se,
                    c.theta.map(|t| format!("{:.3}", t.median)).unwrap_or_default(),
                    c.theta.map(|t| format!("{:.3}", t.sd)).unwrap_or_default(),
                )
                .unwrap();
            }
            Ok(s)
        }
    }
}

/// Long format `j,k,l,value` with 1-based coordinates.
pub fn rolling(r: &RollingVolSeries) -> CliResult<String> {
    let rows = r.pairs.iter().zip(&r.values).flat_map(|(&(k, l), series)| {
        r.ends
            .iter()
            .zip(series)
            .map(move |(j, v)| vec![j.to_string(), (k + 1).to_string(), (l + 1).to_string(), v.to_string()])
    });
    csv_table(&["j", "k", "l", "value"], rows)
}

/// Aligned columns, or CSV when `csv` is set.
pub fn rows_table(header: &[&str], rows: Vec<Vec<String>>, csv: bool) -> CliResult<String> {
    match csv {
        true => csv_table(header, rows),
        false => {
            let widths: Vec<usize> = (0..header.len())
                .map(|c| rows.iter().map(|r| r[c].len()).chain([header[c].len()]).max().unwrap_or(0))
                .collect();
            let mut s = String::new();
            let line = |cells: Vec<&str>| {
                cells
                    .iter()
                    .zip(&widths)
                    .map(|(c, w)| format!("{c:>w$}"))
                    .collect::<Vec<_>>()
                    .join("  ")
            };
            writeln!(s, "{}", line(header.to_vec())).unwrap();
            for r in &rows {
                writeln!(s, "{}", line(r.iter().map(String::as_str).collect())).unwrap();
            }
            Ok(s)
        }
    }
}
