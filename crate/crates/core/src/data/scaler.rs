//! Per-feature min-max scaling onto `[-1, 1]`, the generator's tanh range.

use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureScaler {
    mins: Vec<f64>,
    maxs: Vec<f64>,
}

impl FeatureScaler {
    /// Fits per-feature `(min, max)` on the given table.
    pub fn fit(table: &Matrix) -> Result<Self> {
        if table.rows() == 0 || table.cols() == 0 {
            return Err(Error::Schema("cannot fit scaler on an empty table".into()));
        }
        let mut mins = vec![f64::INFINITY; table.cols()];
        let mut maxs = vec![f64::NEG_INFINITY; table.cols()];
        for r in 0..table.rows() {
            for (c, &v) in table.row(r).iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::Numeric(format!(
                        "non-finite value in column {c} while fitting scaler"
                    )));
                }
                mins[c] = mins[c].min(v);
                maxs[c] = maxs[c].max(v);
            }
        }
        Ok(Self { mins, maxs })
    }

    pub fn dim(&self) -> usize {
        self.mins.len()
    }

    fn check_cols(&self, cols: usize) -> Result<()> {
        if cols != self.dim() {
            return Err(Error::Schema(format!(
                "table has {cols} columns, scaler was fitted on {}",
                self.dim()
            )));
        }
        Ok(())
    }

    /// `x -> 2 (x - min) / (max - min) - 1`; constant features map to 0.
    pub fn transform_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        self.check_cols(row.len())?;
        Ok(row
            .iter()
            .enumerate()
            .map(|(c, &v)| {
                let range = self.maxs[c] - self.mins[c];
                if range == 0.0 {
                    0.0
                } else {
                    2.0 * (v - self.mins[c]) / range - 1.0
                }
            })
            .collect())
    }

    /// Exact inverse of [`transform_row`](Self::transform_row); constant
    /// features recover their constant.
    pub fn inverse_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        self.check_cols(row.len())?;
        Ok(row
            .iter()
            .enumerate()
            .map(|(c, &v)| {
                let range = self.maxs[c] - self.mins[c];
                if range == 0.0 {
                    self.mins[c]
                } else {
                    (v + 1.0) / 2.0 * range + self.mins[c]
                }
            })
            .collect())
    }

    pub fn transform(&self, table: &Matrix) -> Result<Matrix> {
        self.check_cols(table.cols())?;
        let mut out = Matrix::zeros(table.rows(), table.cols());
        for r in 0..table.rows() {
            out.row_mut(r).copy_from_slice(&self.transform_row(table.row(r))?);
        }
        Ok(out)
    }

    pub fn inverse_transform(&self, table: &Matrix) -> Result<Matrix> {
        self.check_cols(table.cols())?;
        let mut out = Matrix::zeros(table.rows(), table.cols());
        for r in 0..table.rows() {
            out.row_mut(r).copy_from_slice(&self.inverse_row(table.row(r))?);
        }
        Ok(out)
    }
}
