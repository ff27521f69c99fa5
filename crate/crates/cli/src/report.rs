use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

/// How a flag compares its value with the threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Comparison {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "<")]
    Below,
    #[serde(rename = ">")]
    Above,
}

/// A named pass/fail check. `margin` is positive when the check passes with
/// room to spare (threshold minus value for upper bounds, the reverse for
/// lower bounds).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Flag {
    pub name: String,
    /// The module invariant the flag exercises.
    pub invariant: String,
    pub passed: bool,
    pub value: f64,
    pub comparison: Comparison,
    pub threshold: f64,
    pub margin: f64,
}

impl Flag {
    pub fn compare(name: &str, invariant: &str, value: f64, cmp: Comparison, threshold: f64) -> Self {
        let (passed, margin) = match cmp {
            Comparison::AtMost => (value <= threshold, threshold - value),
            Comparison::Below => (value < threshold, threshold - value),
            Comparison::AtLeast => (value >= threshold, value - threshold),
            Comparison::Above => (value > threshold, value - threshold),
        };
        Self {
            name: name.to_string(),
            invariant: invariant.to_string(),
            passed: passed && value.is_finite(),
            value,
            comparison: cmp,
            threshold,
            margin,
        }
    }

    /// A boolean check recorded as value 1 (true) or 0 against threshold 1.
    pub fn holds(name: &str, invariant: &str, ok: bool) -> Self {
        Self::compare(name, invariant, if ok { 1.0 } else { 0.0 }, Comparison::AtLeast, 1.0)
    }
}

/// Rows of mixed cells written as one CSV file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Builds a table from equal-length numeric columns.
    pub fn from_columns(name: &str, columns: &[(&str, &[f64])]) -> Self {
        let mut t = Self::new(name, &columns.iter().map(|c| c.0).collect::<Vec<_>>());
        let n = columns.iter().map(|c| c.1.len()).min().unwrap_or(0);
        for i in 0..n {
            t.push(columns.iter().map(|c| Cell::Num(c.1[i])).collect());
        }
        t
    }
}

/// A line plot rendered as SVG; never consulted for pass/fail.
#[derive(Debug, Clone, PartialEq)]
pub struct Plot {
    pub name: String,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub lines: Vec<(String, Vec<(f64, f64)>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub scenario: String,
    pub anchor: String,
    pub seed: u64,
    /// Resolved grid, family parameters and tolerances.
    pub parameters: Value,
    pub scalars: BTreeMap<String, f64>,
    pub series: BTreeMap<String, Vec<f64>>,
    pub labels: BTreeMap<String, String>,
    pub flags: Vec<Flag>,
    pub tables: Vec<Table>,
    #[serde(skip)]
    pub plots: Vec<Plot>,
    pub passed: bool,
}

impl ExperimentReport {
    pub fn new(scenario: &str, anchor: &str, seed: u64, parameters: Value) -> Self {
        Self {
            scenario: scenario.to_string(),
            anchor: anchor.to_string(),
            seed,
            parameters,
            scalars: BTreeMap::new(),
            series: BTreeMap::new(),
            labels: BTreeMap::new(),
            flags: Vec::new(),
            tables: Vec::new(),
            plots: Vec::new(),
            passed: true,
        }
    }

    pub fn scalar(&mut self, name: &str, v: f64) {
        self.scalars.insert(name.to_string(), v);
    }

    pub fn series(&mut self, name: &str, v: Vec<f64>) {
        self.series.insert(name.to_string(), v);
    }

    pub fn label(&mut self, name: &str, v: &str) {
        self.labels.insert(name.to_string(), v.to_string());
    }

    pub fn flag(&mut self, f: Flag) {
        self.passed &= f.passed;
        self.flags.push(f);
    }

    pub fn table(&mut self, t: Table) {
        self.tables.push(t);
    }

    pub fn plot(&mut self, p: Plot) {
        self.plots.push(p);
    }

    pub fn failed_flags(&self) -> impl Iterator<Item = &Flag> {
        self.flags.iter().filter(|f| !f.passed)
    }

    pub fn flag_named(&self, name: &str) -> Option<&Flag> {
        self.flags.iter().find(|f| f.name == name)
    }
}
