//! Energy records as CSV: one header row, then one row per record with every
//! value written in round-trippable scientific notation.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use elreg_core::diagnostics::EnergyRecord;

use crate::FormatError;

/// Records read back from CSV, with the names of the extra norm columns.
#[derive(Clone, Debug, PartialEq)]
pub struct RecordTable {
    pub extra_columns: Vec<String>,
    pub records: Vec<EnergyRecord>,
}

pub fn header(extra_columns: &[String]) -> Vec<String> {
    EnergyRecord::COLUMNS
        .iter()
        .map(|s| s.to_string())
        .chain(extra_columns.iter().cloned())
        .collect()
}

pub fn write_records<W: Write>(out: W, records: &[EnergyRecord], extra_columns: &[String]) -> Result<(), FormatError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(extra_columns))?;
    for (i, r) in records.iter().enumerate() {
        if r.extra.len() != extra_columns.len() {
            return Err(FormatError::Malformed {
                line: i + 2,
                message: format!("record has {} extra values, header names {}", r.extra.len(), extra_columns.len()),
            });
        }
        w.write_record(r.values().iter().map(|v| format!("{v:.16e}")))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_records_csv(path: &Path, records: &[EnergyRecord], extra_columns: &[String]) -> Result<(), FormatError> {
    let file = File::create(path).map_err(|e| FormatError::io(path, e))?;
    write_records(BufWriter::new(file), records, extra_columns)
}

pub fn read_records<R: Read>(input: R) -> Result<RecordTable, FormatError> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let head = r.headers()?.clone();
    let fixed = EnergyRecord::COLUMNS.len();
    if head.len() < fixed || head.iter().take(fixed).ne(EnergyRecord::COLUMNS.iter().copied()) {
        return Err(FormatError::Malformed {
            line: 1,
            message: format!("header must start with {}", EnergyRecord::COLUMNS.join(",")),
        });
    }
    let extra_columns: Vec<String> = head.iter().skip(fixed).map(str::to_string).collect();
    let mut records = Vec::new();
    for row in r.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        if row.len() != head.len() {
            return Err(FormatError::Malformed {
                line,
                message: format!("expected {} fields, found {}", head.len(), row.len()),
            });
        }
        let values = row
            .iter()
            .map(|f| {
                f.trim().parse::<f64>().map_err(|_| FormatError::Malformed {
                    line,
                    message: format!("`{f}` is not a number"),
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        records.push(EnergyRecord::from_values(&values)?);
    }
    Ok(RecordTable { extra_columns, records })
}

pub fn read_records_csv(path: &Path) -> Result<RecordTable, FormatError> {
    let file = File::open(path).map_err(|e| FormatError::io(path, e))?;
    read_records(file)
}
