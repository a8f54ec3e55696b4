//! Result containers shared by the engine, the experiments and the writers.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// A named quantity with its unit string, e.g. `("current", "pA")`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub unit: String,
}

impl Column {
    pub fn new(name: impl Into<String>, unit: impl Into<String>) -> Self {
        Column {
            name: name.into(),
            unit: unit.into(),
        }
    }

    /// `name_unit` header used by the CSV writer.
    pub fn header(&self) -> String {
        if self.unit.is_empty() {
            self.name.clone()
        } else {
            format!("{}_{}", self.name, self.unit)
        }
    }
}

/// Rectangular numeric data with labelled columns, the common shape of
/// every CSV output.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<f64>>,
    pub metadata: BTreeMap<String, Value>,
}

/// Observables sampled on a time grid (μs).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TimeTrace {
    pub times: Vec<f64>,
    pub columns: Vec<Column>,
    /// One row per time, one entry per column.
    pub rows: Vec<Vec<f64>>,
    pub metadata: BTreeMap<String, Value>,
}

impl TimeTrace {
    pub fn new(columns: Vec<Column>) -> Self {
        TimeTrace {
            columns,
            ..Default::default()
        }
    }

    pub fn push(&mut self, t: f64, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.times.push(t);
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let k = self
            .column_index(name)
            .ok_or_else(|| Error::OutOfDomain(format!("trace has no column '{name}'")))?;
        Ok(self.rows.iter().map(|r| r[k]).collect())
    }

    /// Mean of a column over samples with `from <= t <= to`.
    pub fn window_mean(&self, name: &str, from: f64, to: f64) -> Result<f64> {
        let col = self.column(name)?;
        let (sum, count) = self
            .times
            .iter()
            .zip(col)
            .filter(|(t, _)| **t >= from && **t <= to)
            .fold((0.0, 0usize), |(s, c), (_, v)| (s + v, c + 1));
        if count == 0 {
            return Err(Error::OutOfDomain(format!(
                "no samples of '{name}' in [{from}, {to}]"
            )));
        }
        Ok(sum / count as f64)
    }

    /// Time column first, then the observables.
    pub fn to_table(&self) -> Table {
        let mut columns = vec![Column::new("time", "us")];
        columns.extend(self.columns.iter().cloned());
        let rows = self
            .times
            .iter()
            .zip(&self.rows)
            .map(|(t, r)| {
                let mut row = Vec::with_capacity(r.len() + 1);
                row.push(*t);
                row.extend_from_slice(r);
                row
            })
            .collect();
        Table {
            columns,
            rows,
            metadata: self.metadata.clone(),
        }
    }
}

/// One axis of a two-dimensional sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub column: Column,
    pub values: Vec<f64>,
}

/// A scalar evaluated on the Cartesian product of two axes.
///
/// `values[iy * nx + ix]` belongs to `(x[ix], y[iy])`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub x: GridAxis,
    pub y: GridAxis,
    pub quantity: Column,
    pub values: Vec<f64>,
    pub metadata: BTreeMap<String, Value>,
}

impl SweepGrid {
    pub fn nx(&self) -> usize {
        self.x.values.len()
    }

    pub fn ny(&self) -> usize {
        self.y.values.len()
    }

    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.nx() + ix]
    }

    pub fn row(&self, iy: usize) -> &[f64] {
        let nx = self.nx();
        &self.values[iy * nx..(iy + 1) * nx]
    }

    pub fn column_values(&self, ix: usize) -> Vec<f64> {
        (0..self.ny()).map(|iy| self.get(ix, iy)).collect()
    }

    /// One row per grid node (x varying fastest): x, y, value.
    pub fn to_table(&self) -> Table {
        let mut rows = Vec::with_capacity(self.values.len());
        for iy in 0..self.ny() {
            for ix in 0..self.nx() {
                rows.push(vec![self.x.values[ix], self.y.values[iy], self.get(ix, iy)]);
            }
        }
        Table {
            columns: vec![
                self.x.column.clone(),
                self.y.column.clone(),
                self.quantity.clone(),
            ],
            rows,
            metadata: self.metadata.clone(),
        }
    }

    /// Index of the largest value along x for fixed `iy`.
    pub fn argmax_x(&self, iy: usize) -> usize {
        argmax(self.row(iy))
    }

    /// Index of the largest value along y for fixed `ix`.
    pub fn argmax_y(&self, ix: usize) -> usize {
        argmax(&self.column_values(ix))
    }
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_mean_selects_inclusive_range() {
        let mut t = TimeTrace::new(vec![Column::new("i", "pA")]);
        for k in 0..5 {
            t.push(k as f64, vec![k as f64 * 2.0]);
        }
        assert_eq!(t.window_mean("i", 1.0, 3.0).unwrap(), 4.0);
        assert!(t.window_mean("i", 10.0, 11.0).is_err());
        assert!(t.column("missing").is_err());
    }

    #[test]
    fn grid_indexing_and_argmax() {
        let g = SweepGrid {
            x: GridAxis {
                column: Column::new("x", ""),
                values: vec![0.0, 1.0, 2.0],
            },
            y: GridAxis {
                column: Column::new("y", ""),
                values: vec![0.0, 1.0],
            },
            quantity: Column::new("q", ""),
            values: vec![1.0, 5.0, 2.0, 7.0, 0.0, 3.0],
            metadata: BTreeMap::new(),
        };
        assert_eq!(g.get(2, 1), 3.0);
        assert_eq!(g.argmax_x(0), 1);
        assert_eq!(g.argmax_y(0), 1);
        assert_eq!(Column::new("b0", "mT").header(), "b0_mT");
    }
}
