//! CSV tables with fixed headers, written with 17 significant digits.

use std::path::Path;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Text,
    Num,
    /// Number or empty.
    OptNum,
}

#[derive(Debug, Clone, Copy)]
pub struct Schema {
    pub columns: &'static [(&'static str, Kind)],
}

use Kind::{Num, OptNum, Text};

pub const LOSS_TRAIN: Schema = Schema {
    columns: &[
        ("t", Num),
        ("train_loss", Num),
        ("test_loss", OptNum),
        ("train_acc", Num),
        ("test_acc", OptNum),
    ],
};
pub const LOSS_PSPIN: Schema = Schema {
    columns: &[("t", Num), ("energy_per_spin", Num)],
};
pub const MSD: Schema = Schema {
    columns: &[
        ("system", Text),
        ("run_id", Text),
        ("tw", Num),
        ("t", Num),
        ("delta", Num),
        ("D_tw", OptNum),
        ("delta_over_D", OptNum),
    ],
};
pub const NOISE: Schema = Schema {
    columns: &[("run_id", Text), ("tw", Num), ("D", Num)],
};
pub const REPORT: Schema = Schema {
    columns: &[
        ("run_id", Text),
        ("t1", OptNum),
        ("t2", OptNum),
        ("collapse_pre", OptNum),
        ("collapse_post", OptNum),
        ("late_slope", OptNum),
        ("plateau_q", OptNum),
    ],
};
pub const SWEEP: Schema = Schema {
    columns: &[
        ("sweep_value", Num),
        ("final_train_loss", OptNum),
        ("t1", OptNum),
        ("t2", OptNum),
        ("collapse_post", OptNum),
        ("plateau_q", OptNum),
    ],
};

impl Schema {
    pub fn header(&self) -> Vec<&'static str> {
        self.columns.iter().map(|c| c.0).collect()
    }
}

/// Fixed 17-significant-digit scientific notation; round-trips every f64.
pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt).unwrap_or_default()
}

pub fn write_table<I>(path: &Path, schema: &Schema, rows: I) -> CliResult<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(schema.header()).map_err(|e| csv_err(path, e))?;
    for row in rows {
        debug_assert_eq!(row.len(), schema.columns.len());
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::schema(path, line, format!("{other:?}")),
    }
}

/// One validated data row.
#[derive(Debug, Clone)]
pub struct Row {
    /// 1-based line number.
    pub line: usize,
    pub fields: Vec<String>,
}

impl Row {
    pub fn text(&self, i: usize) -> &str {
        &self.fields[i]
    }

    pub fn num(&self, i: usize) -> f64 {
        self.fields[i].parse().expect("validated on read")
    }

    pub fn opt(&self, i: usize) -> Option<f64> {
        let f = &self.fields[i];
        (!f.is_empty()).then(|| f.parse().expect("validated on read"))
    }
}

/// Reads `path`, requiring exactly the schema's header and cell kinds.
pub fn read_table(path: &Path, schema: &Schema) -> CliResult<Vec<Row>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let mut records = r.records();
    let header = match records.next() {
        Some(h) => h.map_err(|e| csv_err(path, e))?,
        None => return Err(CliError::schema(path, 1, "missing header")),
    };
    let want = schema.header();
    if header.iter().collect::<Vec<_>>() != want {
        return Err(CliError::schema(
            path,
            1,
            format!("header must be {}", want.join(",")),
        ));
    }
    let mut rows = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != want.len() {
            return Err(CliError::schema(
                path,
                line,
                format!("expected {} fields, got {}", want.len(), rec.len()),
            ));
        }
        for (cell, (name, kind)) in rec.iter().zip(schema.columns) {
            let ok = match kind {
                Text => true,
                Num => cell.parse::<f64>().is_ok(),
                OptNum => cell.is_empty() || cell.parse::<f64>().is_ok(),
            };
            if !ok {
                return Err(CliError::schema(path, line, format!("column {name}: bad value {cell:?}")));
            }
        }
        rows.push(Row {
            line,
            fields: rec.iter().map(str::to_owned).collect(),
        });
    }
    Ok(rows)
}
