//! Fingerprint dataset model: the radiomap table, a path-loss testbed
//! simulator standing in for real survey data, feature scaling, CSV I/O, and
//! fold splitting.

mod csv_io;
mod folds;
mod scaler;
mod table;
mod testbed;

pub use csv_io::{canonical_f64, load_csv, write_csv};
pub use folds::{fold_complement, kfold_split};
pub use scaler::FeatureScaler;
pub use table::{analysis_table, build_gan_table, synthetic_to_dataset, GanTable, TableLayout};
pub use testbed::{synthesize_queries, synthesize_testbed, TestbedSpec, ZoneRect};

use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;
use crate::{Error, Result};

/// RSS floor doubling as the "access point not detected" sentinel, in dBm.
pub const RSS_FLOOR_DBM: f64 = -100.0;
pub const RSS_CEIL_DBM: f64 = 0.0;

/// Localization flavor: predict coordinates or a discrete zone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    LocationBased,
    ZoneBased,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mode::LocationBased => write!(f, "location_based"),
            Mode::ZoneBased => write!(f, "zone_based"),
        }
    }
}

/// Declared shape of a dataset: which columns exist and their valid ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSchema {
    pub ap_count: usize,
    pub has_coords: bool,
    /// `Some(n)` when a zone column with indices in `[0, n)` is present.
    pub n_zones: Option<usize>,
    /// Testbed extent in meters, used to validate coordinates.
    pub bounds: Option<(f64, f64)>,
}

/// A radiomap: one row per reference point, RSS per access point plus the
/// point's coordinates and/or zone label. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FingerprintDataset {
    rss: Matrix,
    coords: Option<Vec<(f64, f64)>>,
    zones: Option<Vec<usize>>,
    schema: DatasetSchema,
}

impl FingerprintDataset {
    pub fn new(
        rss: Matrix,
        coords: Option<Vec<(f64, f64)>>,
        zones: Option<Vec<usize>>,
        schema: DatasetSchema,
    ) -> Result<Self> {
        if rss.rows() == 0 {
            return Err(Error::Schema("dataset has no records".into()));
        }
        if rss.cols() != schema.ap_count {
            return Err(Error::Schema(format!(
                "rss has {} columns, schema declares {} access points",
                rss.cols(),
                schema.ap_count
            )));
        }
        if coords.is_none() && zones.is_none() {
            return Err(Error::Schema(
                "dataset needs coordinates, zones, or both".into(),
            ));
        }
        if coords.is_some() != schema.has_coords {
            return Err(Error::Schema(
                "coordinate presence disagrees with schema".into(),
            ));
        }
        if zones.is_some() != schema.n_zones.is_some() {
            return Err(Error::Schema("zone presence disagrees with schema".into()));
        }
        for r in 0..rss.rows() {
            for &v in rss.row(r) {
                if !(RSS_FLOOR_DBM..=RSS_CEIL_DBM).contains(&v) {
                    return Err(Error::Schema(format!(
                        "row {}: rss {} outside [{}, {}] dBm",
                        r + 1,
                        v,
                        RSS_FLOOR_DBM,
                        RSS_CEIL_DBM
                    )));
                }
            }
        }
        if let Some(coords) = &coords {
            if coords.len() != rss.rows() {
                return Err(Error::Schema("coordinate count != record count".into()));
            }
            if let Some((w, h)) = schema.bounds {
                for (r, &(x, y)) in coords.iter().enumerate() {
                    if !(0.0..=w).contains(&x) || !(0.0..=h).contains(&y) {
                        return Err(Error::Schema(format!(
                            "row {}: coordinates ({x}, {y}) outside {w}x{h} m testbed",
                            r + 1
                        )));
                    }
                }
            }
        }
        if let Some(zones) = &zones {
            if zones.len() != rss.rows() {
                return Err(Error::Schema("zone count != record count".into()));
            }
            let n = schema.n_zones.unwrap();
            for (r, &z) in zones.iter().enumerate() {
                if z >= n {
                    return Err(Error::Schema(format!(
                        "row {}: zone index {z} outside [0, {n})",
                        r + 1
                    )));
                }
            }
        }
        Ok(Self {
            rss,
            coords,
            zones,
            schema,
        })
    }

    pub fn len(&self) -> usize {
        self.rss.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn ap_count(&self) -> usize {
        self.schema.ap_count
    }

    pub fn rss(&self) -> &Matrix {
        &self.rss
    }

    pub fn coords(&self) -> Option<&[(f64, f64)]> {
        self.coords.as_deref()
    }

    pub fn zones(&self) -> Option<&[usize]> {
        self.zones.as_deref()
    }

    pub fn schema(&self) -> &DatasetSchema {
        &self.schema
    }

    /// Copies the selected records into a new dataset, in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        Self::new(
            self.rss.select_rows(indices),
            self.coords
                .as_ref()
                .map(|c| indices.iter().map(|&i| c[i]).collect()),
            self.zones
                .as_ref()
                .map(|z| indices.iter().map(|&i| z[i]).collect()),
            self.schema.clone(),
        )
    }
}

#[cfg(test)]
mod tests;
