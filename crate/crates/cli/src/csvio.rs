//! Reading numeric panels from delimited text and writing them back.

use std::io::{Read, Write};
use std::path::Path;

use covbreak::TimeSeriesPanel;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy)]
pub struct CsvFormat {
    pub delimiter: u8,
    pub header: bool,
    /// The first column holds row labels such as dates.
    pub labels: bool,
}

impl Default for CsvFormat {
    fn default() -> Self {
        Self {
            delimiter: b',',
            header: false,
            labels: false,
        }
    }
}

pub fn parse_delimiter(s: &str) -> Result<u8, String> {
    match s {
        "tab" | "\\t" => Ok(b'\t'),
        _ if s.len() == 1 && s.is_ascii() => Ok(s.as_bytes()[0]),
        _ => Err(format!("delimiter must be a single ASCII character or 'tab', got '{s}'")),
    }
}

pub fn ingest_csv(path: &Path, format: CsvFormat) -> CliResult<TimeSeriesPanel> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
    ingest_reader(file, format).map_err(|e| match e {
        CliError::Data(msg) => CliError::Data(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn ingest_reader(reader: impl Read, format: CsvFormat) -> CliResult<TimeSeriesPanel> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(format.delimiter)
        .has_headers(format.header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let skip = usize::from(format.labels);
    let mut width: Option<usize> = None;
    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut n = 0;
    for record in rdr.records() {
        let record = record.map_err(|e| CliError::Data(format!("malformed input: {e}")))?;
        let line = record.position().map_or(n + 1, |p| p.line() as usize);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(CliError::Data(format!(
                    "row {line} has {} fields, expected {w}",
                    record.len()
                )))
            }
            Some(_) => {}
        }
        if record.len() <= skip {
            return Err(CliError::Data(format!("row {line} has no numeric columns")));
        }
        if format.labels {
            labels.push(record[0].to_string());
        }
        for (c, cell) in record.iter().enumerate().skip(skip) {
            let v: f64 = cell.parse().map_err(|_| {
                CliError::Data(format!("row {line}, column {}: cannot parse '{cell}' as a number", c + 1))
            })?;
            if !v.is_finite() {
                return Err(CliError::Data(format!("row {line}, column {}: value '{cell}' is not finite", c + 1)));
            }
            values.push(v);
        }
        n += 1;
    }
    let Some(w) = width else {
        return Err(CliError::Data("input contains no data rows".into()));
    };
    let panel = TimeSeriesPanel::new(n, w - skip, values)?;
    if format.labels {
        Ok(panel.with_labels(labels)?)
    } else {
        Ok(panel)
    }
}

/// Writes the panel with labels (if any) in the first column.
pub fn write_panel(out: impl Write, panel: &TimeSeriesPanel, delimiter: u8, header: bool) -> CliResult<()> {
    let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(out);
    let with_labels = panel.labels().is_some();
    if header {
        let mut names: Vec<String> = Vec::new();
        if with_labels {
            names.push("label".into());
        }
        names.extend((1..=panel.d()).map(|c| format!("y{c}")));
        w.write_record(&names).map_err(csv_err)?;
    }
    for j in 0..panel.n() {
        let mut fields: Vec<String> = Vec::with_capacity(panel.d() + 1);
        if let Some(label) = panel.label(j) {
            fields.push(label.to_string());
        }
        fields.extend(panel.row(j).iter().map(|v| v.to_string()));
        w.write_record(&fields).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::io("output", e))?;
    Ok(())
}

pub fn csv_err(e: csv::Error) -> CliError {
    CliError::Data(format!("csv output: {e}"))
}
