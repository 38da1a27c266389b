//! Readers for generic delimited nominal files and the UCI `german.data` file.

use std::collections::BTreeSet;

use nomarch_core::{NominalTable, VariableSchema};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("input has no data lines")]
    Empty,

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("line {line}: unknown attribute code `{code}` for {variable}")]
    Code { line: usize, code: String, variable: &'static str },

    #[error(transparent)]
    Table(#[from] nomarch_core::Error),
}

/// Parses delimited text into a nominal table. Each column becomes a
/// variable whose categories are its distinct labels in lexicographic order;
/// without a header, variables are named `v1`, `v2`, ...
pub fn parse_delimited(text: &str, delimiter: u8, has_header: bool) -> Result<NominalTable, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(has_header)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let names: Option<Vec<String>> = if has_header {
        let h = reader.headers().map_err(csv_error)?;
        Some(h.iter().map(str::to_string).collect())
    } else {
        None
    };

    let mut rows: Vec<Vec<String>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        rows.push(record.iter().map(str::to_string).collect());
    }
    if rows.is_empty() {
        return Err(IngestError::Empty);
    }
    let width = rows[0].len();
    let names = names.unwrap_or_else(|| (1..=width).map(|i| format!("v{i}")).collect());

    let mut schemas = Vec::with_capacity(width);
    for (c, name) in names.into_iter().enumerate() {
        let labels: BTreeSet<&str> = rows.iter().map(|r| r[c].as_str()).collect();
        let categories = labels.into_iter().map(str::to_string).collect();
        schemas.push(VariableSchema::new(name, categories)?);
    }
    Ok(NominalTable::new(schemas, &rows, None)?)
}

fn csv_error(e: csv::Error) -> IngestError {
    let line = e.position().map_or(0, |p| p.line());
    let message = match e.kind() {
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
            format!("expected {expected_len} fields, found {len}")
        }
        _ => e.to_string(),
    };
    IngestError::Parse { line, message }
}

/// One German-credit attribute: 0-based field position and its code book.
struct Attribute {
    name: &'static str,
    field: usize,
    codes: &'static [(&'static str, &'static str)],
}

// Codes that never occur in the file (A47 vacation, A95 female single) are
// left out so that category counts are 10, 5, 4, 4 and 2.
const GERMAN_ATTRIBUTES: [Attribute; 5] = [
    Attribute {
        name: "credit purpose",
        field: 3,
        codes: &[
            ("A40", "car (new)"),
            ("A41", "car (used)"),
            ("A42", "furniture/equipment"),
            ("A43", "radio/television"),
            ("A44", "domestic appliances"),
            ("A45", "repairs"),
            ("A46", "education"),
            ("A48", "retraining"),
            ("A49", "business"),
            ("A410", "others"),
        ],
    },
    Attribute {
        name: "employment period",
        field: 6,
        codes: &[
            ("A71", "unemployed"),
            ("A72", "... < 1 year"),
            ("A73", "1 <= ... < 4 years"),
            ("A74", "4 <= ... < 7 years"),
            ("A75", ".. >= 7 years"),
        ],
    },
    Attribute {
        name: "personal status and sex",
        field: 8,
        codes: &[
            ("A91", "male: divorced/separated"),
            ("A92", "female: divorced/separated/married"),
            ("A93", "male: single"),
            ("A94", "male: married/widowed"),
        ],
    },
    Attribute {
        name: "job situation",
        field: 16,
        codes: &[
            ("A171", "unemployed/unskilled - non-resident"),
            ("A172", "unskilled - resident"),
            ("A173", "skilled employee/official"),
            ("A174", "self-employed/highly qualified staff"),
        ],
    },
    Attribute { name: "credit risk", field: 20, codes: &[("1", "Good"), ("2", "Bad")] },
];

const GERMAN_FIELDS: usize = 21;

/// Name of the credit-risk variable in German-credit tables.
pub const GERMAN_RISK: &str = "credit risk";

/// Reads the whitespace-separated UCI Statlog `german.data` file, keeping
/// credit purpose, employment period, personal status and sex, job and credit
/// risk with their code-book labels.
pub fn parse_german_credit(text: &str) -> Result<NominalTable, IngestError> {
    let schemas = GERMAN_ATTRIBUTES
        .iter()
        .map(|a| VariableSchema::new(a.name, a.codes.iter().map(|(_, l)| l.to_string()).collect()))
        .collect::<Result<Vec<_>, _>>()?;

    let mut codes = Vec::new();
    let mut row_ids = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != GERMAN_FIELDS {
            return Err(IngestError::Parse {
                line: line_no as u64,
                message: format!("expected {GERMAN_FIELDS} fields, found {}", fields.len()),
            });
        }
        let row = GERMAN_ATTRIBUTES
            .iter()
            .map(|a| {
                let code = fields[a.field];
                a.codes.iter().position(|(c, _)| *c == code).ok_or_else(|| IngestError::Code {
                    line: line_no,
                    code: code.to_string(),
                    variable: a.name,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        codes.push(row);
        row_ids.push(line_no);
    }
    if codes.is_empty() {
        return Err(IngestError::Empty);
    }
    Ok(NominalTable::from_codes(schemas, codes, Some(row_ids))?)
}
