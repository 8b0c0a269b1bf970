//! Performance tables and the clamped z-score normalization.
//!
//! Columns are always stored in the leaf order of the companion [`Hierarchy`],
//! whatever the column order of the source CSV; rows keep their file order.

use std::collections::HashSet;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::hierarchy::{Direction, Hierarchy};

/// Alternatives × elementary criteria, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PerformanceTable {
    alternatives: Vec<String>,
    criteria: Vec<String>,
    values: Vec<f64>,
}

/// Same layout as [`PerformanceTable`], every cell in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedTable {
    alternatives: Vec<String>,
    criteria: Vec<String>,
    values: Vec<f64>,
}

/// Per-column mean and population standard deviation.
#[derive(Clone, Debug, PartialEq)]
pub struct ColumnStats {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

macro_rules! table_accessors {
    ($t:ty) => {
        impl $t {
            pub fn alternatives(&self) -> &[String] {
                &self.alternatives
            }

            pub fn criteria(&self) -> &[String] {
                &self.criteria
            }

            pub fn alternative_count(&self) -> usize {
                self.alternatives.len()
            }

            pub fn criterion_count(&self) -> usize {
                self.criteria.len()
            }

            pub fn row(&self, alternative: usize) -> &[f64] {
                let n = self.criteria.len();
                &self.values[alternative * n..(alternative + 1) * n]
            }

            pub fn get(&self, alternative: usize, criterion: usize) -> f64 {
                self.values[alternative * self.criteria.len() + criterion]
            }

            pub fn column(&self, criterion: usize) -> Vec<f64> {
                (0..self.alternatives.len())
                    .map(|a| self.get(a, criterion))
                    .collect()
            }

            pub fn alternative_index(&self, label: &str) -> Option<usize> {
                self.alternatives.iter().position(|a| a == label)
            }
        }
    };
}

table_accessors!(PerformanceTable);
table_accessors!(NormalizedTable);

impl PerformanceTable {
    pub fn new(alternatives: Vec<String>, criteria: Vec<String>, values: Vec<f64>) -> Result<Self> {
        check_shape(&alternatives, &criteria, &values)?;
        Ok(PerformanceTable {
            alternatives,
            criteria,
            values,
        })
    }

    /// Replaces one cell, keeping everything else.
    pub fn with_value(mut self, alternative: usize, criterion: usize, value: f64) -> Self {
        let n = self.criteria.len();
        self.values[alternative * n + criterion] = value;
        self
    }
}

impl NormalizedTable {
    pub fn new(alternatives: Vec<String>, criteria: Vec<String>, values: Vec<f64>) -> Result<Self> {
        check_shape(&alternatives, &criteria, &values)?;
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Table(format!("normalized value {v} outside [0, 1]")));
        }
        Ok(NormalizedTable {
            alternatives,
            criteria,
            values,
        })
    }

    /// Reads an already-normalized table (for instance a golden file).
    pub fn load(path: impl AsRef<Path>, h: &Hierarchy) -> Result<Self> {
        let t = load_table_file(path.as_ref(), h)?;
        NormalizedTable::new(t.alternatives, t.criteria, t.values).map_err(|e| e.in_file(path.as_ref()))
    }
}

fn check_shape(alternatives: &[String], criteria: &[String], values: &[f64]) -> Result<()> {
    if alternatives.is_empty() {
        return Err(Error::Table("table has no alternatives".into()));
    }
    if values.len() != alternatives.len() * criteria.len() {
        return Err(Error::Table(format!(
            "expected {} cells, found {}",
            alternatives.len() * criteria.len(),
            values.len()
        )));
    }
    let mut seen = HashSet::new();
    for a in alternatives {
        if !seen.insert(a.as_str()) {
            return Err(Error::Table(format!("duplicate alternative `{a}`")));
        }
    }
    Ok(())
}

/// Parses the documented CSV layout: first column `alternative`, remaining
/// headers are leaf labels of `h` in any order.
pub fn load_table(source: impl Read, h: &Hierarchy) -> Result<PerformanceTable> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let headers = reader.headers()?.clone();
    if headers.is_empty() {
        return Err(Error::Table("empty file".into()));
    }
    if &headers[0] != "alternative" {
        return Err(Error::Table(format!(
            "first column must be `alternative`, found `{}`",
            &headers[0]
        )));
    }
    let leaves = h.leaf_labels();
    // position in the file of each leaf column
    let mut column_of = vec![usize::MAX; leaves.len()];
    for (pos, name) in headers.iter().enumerate().skip(1) {
        let leaf = leaves
            .iter()
            .position(|l| *l == name)
            .ok_or_else(|| Error::Table(format!("column `{name}` is not an elementary criterion")))?;
        if column_of[leaf] != usize::MAX {
            return Err(Error::Table(format!("duplicate column `{name}`")));
        }
        column_of[leaf] = pos;
    }
    if let Some(missing) = column_of.iter().position(|&c| c == usize::MAX) {
        return Err(Error::Table(format!("missing column `{}`", leaves[missing])));
    }

    let mut alternatives = Vec::new();
    let mut values = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let line = row + 2;
        if record.len() != headers.len() {
            return Err(Error::Table(format!(
                "line {line}: expected {} fields, found {}",
                headers.len(),
                record.len()
            )));
        }
        alternatives.push(record[0].to_string());
        for &pos in &column_of {
            let cell = &record[pos];
            let v: f64 = cell
                .parse()
                .map_err(|_| Error::Table(format!("line {line}: non-numeric cell `{cell}`")))?;
            if !v.is_finite() {
                return Err(Error::Table(format!("line {line}: non-finite cell `{cell}`")));
            }
            values.push(v);
        }
    }
    let criteria = leaves.iter().map(|s| s.to_string()).collect();
    PerformanceTable::new(alternatives, criteria, values)
}

pub fn load_table_file(path: &Path, h: &Hierarchy) -> Result<PerformanceTable> {
    let file = std::fs::File::open(path).map_err(|e| Error::from(e).in_file(path))?;
    load_table(std::io::BufReader::new(file), h).map_err(|e| e.in_file(path))
}

/// Mean and population standard deviation (divisor `|A|`) of every column.
pub fn column_stats(t: &PerformanceTable) -> ColumnStats {
    let n = t.alternative_count() as f64;
    let mut mean = Vec::with_capacity(t.criterion_count());
    let mut sd = Vec::with_capacity(t.criterion_count());
    for c in 0..t.criterion_count() {
        let col = t.column(c);
        let m = col.iter().sum::<f64>() / n;
        let var = col.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
        mean.push(m);
        sd.push(var.sqrt());
    }
    ColumnStats { mean, sd }
}

/// Clamped z-score map: `0.5 ± z/6` inside `(M - 3s, M + 3s)`, 0 or 1 outside.
pub fn normalize(t: &PerformanceTable, stats: &ColumnStats, h: &Hierarchy) -> Result<NormalizedTable> {
    let ncol = t.criterion_count();
    if stats.mean.len() != ncol || stats.sd.len() != ncol || h.leaf_count() != ncol {
        return Err(Error::Table("statistics do not match the table".into()));
    }
    for c in 0..ncol {
        if stats.sd[c] <= 0.0 {
            return Err(Error::DegenerateColumn(t.criteria()[c].clone()));
        }
    }
    let mut values = Vec::with_capacity(t.values.len());
    for a in 0..t.alternative_count() {
        for c in 0..ncol {
            let (m, s) = (stats.mean[c], stats.sd[c]);
            let x = t.get(a, c);
            let up = if x <= m - 3.0 * s {
                0.0
            } else if x >= m + 3.0 * s {
                1.0
            } else {
                (0.5 + (x - m) / s / 6.0).clamp(0.0, 1.0)
            };
            values.push(match h.leaf(c).direction {
                Direction::Max => up,
                Direction::Min => 1.0 - up,
            });
        }
    }
    NormalizedTable::new(t.alternatives.clone(), t.criteria.clone(), values)
}
