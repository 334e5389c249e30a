//! CSV files with trailing `#` metadata lines.
//!
//! Numbers are written in Rust's shortest round-trip form, so equal inputs give
//! byte-equal files and parsing recovers every value exactly. Missing values
//! are empty fields.

use std::path::{Path, PathBuf};

use thermal_designs::analysis::{Curve, Estimator};

use crate::error::{CliError, CliResult};

pub const SWEEP_HEADER: [&str; 6] = [
    "beta",
    "trace_norm",
    "sym_overlap",
    "cycle",
    "bound",
    "stderr",
];
pub const THRESHOLD_HEADER: [&str; 4] = ["t", "epsilon", "beta_star", "temperature"];
pub const DOS_HEADER: [&str; 3] = ["bin_center", "density", "reference_density"];

pub fn format_value(v: Option<f64>) -> String {
    match v {
        None => String::new(),
        Some(x) if x.is_nan() => "NaN".into(),
        Some(x) if x == f64::INFINITY => "inf".into(),
        Some(x) if x == f64::NEG_INFINITY => "-inf".into(),
        Some(x) => format!("{x:?}"),
    }
}

/// Renders a table: header, data rows, then one `# ` line per metadata entry.
pub fn render_table(
    header: &[&str],
    rows: &[Vec<Option<f64>>],
    metadata: &[String],
) -> CliResult<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let to_cfg = |e: csv::Error| CliError::Config(format!("cannot render CSV: {e}"));
    w.write_record(header).map_err(to_cfg)?;
    for row in rows {
        w.write_record(row.iter().map(|v| format_value(*v)))
            .map_err(to_cfg)?;
    }
    let mut out = w
        .into_inner()
        .map_err(|e| CliError::Config(format!("cannot render CSV: {e}")))?;
    for line in metadata {
        for part in line.lines() {
            out.extend_from_slice(b"# ");
            out.extend_from_slice(part.as_bytes());
            out.push(b'\n');
        }
    }
    Ok(out)
}

pub fn write_table(
    path: &Path,
    header: &[&str],
    rows: &[Vec<Option<f64>>],
    metadata: &[String],
) -> CliResult<()> {
    let bytes = render_table(header, rows, metadata)?;
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// A parsed table; `metadata` holds comment lines without the leading `# `.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
    /// One-based file line of every data row.
    pub lines: Vec<u64>,
    pub metadata: Vec<String>,
}

/// Strict reader: exact header, fixed field count, numeric or empty fields,
/// and comment lines only after the last data row.
pub fn parse_table(path: &Path, text: &str, expected_header: &[&str]) -> CliResult<Table> {
    let err = |line: u64, message: String| CliError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut metadata = Vec::new();
    let mut first_comment: Option<u64> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i as u64 + 1;
        if let Some(rest) = raw.strip_prefix('#') {
            first_comment.get_or_insert(line_no);
            metadata.push(rest.strip_prefix(' ').unwrap_or(rest).to_string());
        } else if let Some(c) = first_comment {
            return Err(err(
                line_no,
                format!("data after the metadata block that starts on line {c}"),
            ));
        }
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| err(1, format!("unreadable header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    if header != expected_header {
        return Err(err(
            1,
            format!(
                "expected header {}, found {}",
                expected_header.join(","),
                header.join(",")
            ),
        ));
    }
    let mut rows = Vec::new();
    let mut lines = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            err(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let row = record
            .iter()
            .enumerate()
            .map(|(j, field)| match field {
                "" => Ok(None),
                f => f.parse::<f64>().map(Some).map_err(|_| {
                    err(
                        line,
                        format!("column {} ({}): {f:?} is not a number", j + 1, header[j]),
                    )
                }),
            })
            .collect::<CliResult<Vec<_>>>()?;
        rows.push(row);
        lines.push(line);
    }
    Ok(Table {
        header,
        rows,
        lines,
        metadata,
    })
}

pub fn read_table(path: &Path, expected_header: &[&str]) -> CliResult<Table> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_table(path, &text, expected_header)
}

/// Rebuilds a curve from a sweep-layout table; the `stderr` column is
/// attributed to the first populated estimator column.
pub fn curve_from_table(path: &Path, table: &Table) -> CliResult<Curve> {
    let err = |line: u64, message: String| CliError::Parse {
        path: PathBuf::from(path),
        line,
        message,
    };
    let column = |j: usize| -> CliResult<Option<Vec<f64>>> {
        let present = table.rows.iter().filter(|r| r[j].is_some()).count();
        if present == 0 {
            return Ok(None);
        }
        if present != table.rows.len() {
            let idx = table
                .rows
                .iter()
                .position(|r| r[j].is_none())
                .expect("some row is empty");
            return Err(err(
                table.lines[idx],
                format!("column {} is only partially filled", table.header[j]),
            ));
        }
        Ok(Some(
            table.rows.iter().map(|r| r[j].expect("checked")).collect(),
        ))
    };
    let betas = column(0)?.ok_or_else(|| err(1, "no data rows".into()))?;
    let mut values: [Option<Vec<f64>>; 4] = Default::default();
    for est in Estimator::ALL {
        values[est.index()] = column(est.index() + 1)?;
    }
    let mut stderrs: [Option<Vec<f64>>; 4] = Default::default();
    if let Some(se) = column(5)? {
        let primary = Estimator::ALL
            .into_iter()
            .find(|e| values[e.index()].is_some())
            .ok_or_else(|| err(1, "stderr given without any estimator column".into()))?;
        stderrs[primary.index()] = Some(se);
    }
    Ok(Curve {
        betas,
        values,
        stderrs,
    })
}

pub fn curve_rows(curve: &Curve) -> Vec<Vec<Option<f64>>> {
    let se = curve.primary_stderr();
    (0..curve.betas.len())
        .map(|i| {
            let mut row = vec![Some(curve.betas[i])];
            row.extend(curve.values.iter().map(|c| c.as_ref().map(|v| v[i])));
            row.push(se.map(|s| s[i]));
            row
        })
        .collect()
}
