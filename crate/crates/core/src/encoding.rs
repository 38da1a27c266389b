//! Nominal tables and their dummy (one-hot) coding.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// A nominal variable: its name and ordered category labels. The order fixes
/// the dummy column order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableSchema {
    name: String,
    categories: Vec<String>,
}

impl VariableSchema {
    pub fn new(name: impl Into<String>, categories: Vec<String>) -> Result<Self> {
        let name = name.into();
        if categories.len() < 2 {
            return Err(Error::Schema(format!(
                "variable `{name}` has {} category, a nominal variable needs at least 2",
                categories.len()
            )));
        }
        let mut seen = BTreeSet::new();
        for c in &categories {
            if c.is_empty() {
                return Err(Error::Schema(format!("variable `{name}` has an empty category label")));
            }
            if !seen.insert(c.as_str()) {
                return Err(Error::Schema(format!("variable `{name}` repeats category `{c}`")));
            }
        }
        Ok(VariableSchema { name, categories })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.categories.iter().position(|c| c == label)
    }
}

/// Rows of category labels, stored as positions into each variable's schema.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NominalTable {
    schemas: Vec<VariableSchema>,
    codes: Vec<Vec<usize>>,
    row_ids: Vec<usize>,
}

impl NominalTable {
    /// Builds a table from label rows. `row_ids` are the 1-based source row
    /// numbers; pass `None` to number rows 1..=n.
    pub fn new(schemas: Vec<VariableSchema>, rows: &[Vec<String>], row_ids: Option<Vec<usize>>) -> Result<Self> {
        let mut codes = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            if row.len() != schemas.len() {
                return Err(Error::Dimension(format!(
                    "row {} has {} cells, expected {}",
                    i + 1,
                    row.len(),
                    schemas.len()
                )));
            }
            let mut code_row = Vec::with_capacity(row.len());
            for (schema, label) in schemas.iter().zip(row) {
                let p = schema.position(label).ok_or_else(|| {
                    Error::Schema(format!("row {}: `{label}` is not a category of `{}`", i + 1, schema.name()))
                })?;
                code_row.push(p);
            }
            codes.push(code_row);
        }
        Self::from_codes(schemas, codes, row_ids)
    }

    /// Builds a table from category positions.
    pub fn from_codes(schemas: Vec<VariableSchema>, codes: Vec<Vec<usize>>, row_ids: Option<Vec<usize>>) -> Result<Self> {
        for (i, row) in codes.iter().enumerate() {
            if row.len() != schemas.len() {
                return Err(Error::Dimension(format!(
                    "row {} has {} cells, expected {}",
                    i + 1,
                    row.len(),
                    schemas.len()
                )));
            }
            for (s, &c) in schemas.iter().zip(row) {
                if c >= s.len() {
                    return Err(Error::Schema(format!(
                        "row {}: code {c} out of range for `{}`",
                        i + 1,
                        s.name()
                    )));
                }
            }
        }
        let row_ids = match row_ids {
            Some(ids) if ids.len() != codes.len() => {
                return Err(Error::Dimension(format!("{} row ids for {} rows", ids.len(), codes.len())))
            }
            Some(ids) => ids,
            None => (1..=codes.len()).collect(),
        };
        Ok(NominalTable { schemas, codes, row_ids })
    }

    pub fn schemas(&self) -> &[VariableSchema] {
        &self.schemas
    }

    pub fn n_rows(&self) -> usize {
        self.codes.len()
    }

    pub fn n_vars(&self) -> usize {
        self.schemas.len()
    }

    pub fn row_ids(&self) -> &[usize] {
        &self.row_ids
    }

    pub fn codes(&self, row: usize) -> &[usize] {
        &self.codes[row]
    }

    pub fn label(&self, row: usize, var: usize) -> &str {
        &self.schemas[var].categories[self.codes[row][var]]
    }

    pub fn row_labels(&self, row: usize) -> Vec<&str> {
        (0..self.n_vars()).map(|v| self.label(row, v)).collect()
    }
}

/// Contiguous block of dummy columns belonging to one variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnGroup {
    pub name: String,
    pub start: usize,
    pub len: usize,
}

impl ColumnGroup {
    pub fn layout(schemas: &[VariableSchema]) -> Vec<ColumnGroup> {
        let mut start = 0;
        schemas
            .iter()
            .map(|s| {
                let g = ColumnGroup { name: s.name().to_string(), start, len: s.len() };
                start += s.len();
                g
            })
            .collect()
    }

    pub fn range(&self) -> core::ops::Range<usize> {
        self.start..self.start + self.len
    }
}

/// The binary design matrix `X` with its column groups.
#[derive(Debug, Clone, PartialEq)]
pub struct DummyMatrix {
    values: Matrix,
    groups: Vec<ColumnGroup>,
    schemas: Vec<VariableSchema>,
    row_ids: Vec<usize>,
}

impl DummyMatrix {
    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn groups(&self) -> &[ColumnGroup] {
        &self.groups
    }

    pub fn schemas(&self) -> &[VariableSchema] {
        &self.schemas
    }

    pub fn row_ids(&self) -> &[usize] {
        &self.row_ids
    }

    pub fn n_rows(&self) -> usize {
        self.values.rows()
    }

    pub fn n_cols(&self) -> usize {
        self.values.cols()
    }

    /// `var=category` names, one per column.
    pub fn column_names(&self) -> Vec<String> {
        self.schemas
            .iter()
            .flat_map(|s| s.categories().iter().map(move |c| format!("{}={}", s.name(), c)))
            .collect()
    }

    pub fn decode(&self, profile: &[f64]) -> Result<Vec<Outcome>> {
        decode_dummy(profile, &self.schemas)
    }
}

pub fn encode_dummy(table: &NominalTable) -> Result<DummyMatrix> {
    if table.n_rows() == 0 {
        return Err(Error::EmptyInput("nominal table has no rows"));
    }
    let groups = ColumnGroup::layout(table.schemas());
    let m: usize = table.schemas().iter().map(VariableSchema::len).sum();
    let mut values = Matrix::zeros(table.n_rows(), m);
    for i in 0..table.n_rows() {
        let row = values.row_mut(i);
        for (g, &c) in groups.iter().zip(table.codes(i)) {
            row[g.start + c] = 1.0;
        }
    }
    Ok(DummyMatrix {
        values,
        groups,
        schemas: table.schemas().to_vec(),
        row_ids: table.row_ids().to_vec(),
    })
}

/// Per-variable reading of a binary profile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    One(usize),
    None,
    Multiple(Vec<usize>),
}

impl Outcome {
    /// Human-readable cell: the label, `NONE`, or `MULTIPLE{a|b}`.
    pub fn describe(&self, schema: &VariableSchema) -> String {
        match self {
            Outcome::One(c) => schema.categories()[*c].clone(),
            Outcome::None => "NONE".to_string(),
            Outcome::Multiple(cs) => {
                let labels: Vec<&str> = cs.iter().map(|&c| schema.categories()[c].as_str()).collect();
                format!("MULTIPLE{{{}}}", labels.join("|"))
            }
        }
    }
}

pub fn decode_dummy(profile: &[f64], schemas: &[VariableSchema]) -> Result<Vec<Outcome>> {
    let m: usize = schemas.iter().map(VariableSchema::len).sum();
    if profile.len() != m {
        return Err(Error::Dimension(format!("profile has {} entries, expected {m}", profile.len())));
    }
    let mut out = Vec::with_capacity(schemas.len());
    for g in ColumnGroup::layout(schemas) {
        let mut ones = Vec::new();
        for (c, &v) in profile[g.range()].iter().enumerate() {
            if v == 1.0 {
                ones.push(c);
            } else if v != 0.0 {
                return Err(Error::Domain(format!("profile entry {v} in `{}` is not binary", g.name)));
            }
        }
        out.push(match ones.len() {
            0 => Outcome::None,
            1 => Outcome::One(ones[0]),
            _ => Outcome::Multiple(ones),
        });
    }
    Ok(out)
}
