//! Assembly of the numeric tables the GAN and the evaluation metrics work
//! on, and the reverse mapping from generated tables back to datasets.

use serde::{Deserialize, Serialize};

use super::{DatasetSchema, FeatureScaler, FingerprintDataset, Mode, RSS_CEIL_DBM, RSS_FLOOR_DBM};
use crate::matrix::Matrix;
use crate::{Error, Result};

/// Column semantics of a GAN training table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableLayout {
    /// RSS columns followed by `x, y` (location-based WGAN).
    LocationFeatures { ap_count: usize },
    /// RSS columns followed by a one-hot zone block; the zone is generated
    /// like any other feature and decoded by argmax at sampling time
    /// (zone-based WGAN).
    ZoneOneHot { ap_count: usize, n_zones: usize },
    /// RSS columns only; the zone label conditions the nets instead of being
    /// generated (CGAN).
    RssWithLabels { ap_count: usize, n_zones: usize },
}

impl TableLayout {
    pub fn feature_dim(&self) -> usize {
        match *self {
            TableLayout::LocationFeatures { ap_count } => ap_count + 2,
            TableLayout::ZoneOneHot { ap_count, n_zones } => ap_count + n_zones,
            TableLayout::RssWithLabels { ap_count, .. } => ap_count,
        }
    }

    pub fn ap_count(&self) -> usize {
        match *self {
            TableLayout::LocationFeatures { ap_count }
            | TableLayout::ZoneOneHot { ap_count, .. }
            | TableLayout::RssWithLabels { ap_count, .. } => ap_count,
        }
    }

    /// Label cardinality when labels are conditioning inputs (CGAN only).
    pub fn label_cardinality(&self) -> Option<usize> {
        match *self {
            TableLayout::RssWithLabels { n_zones, .. } => Some(n_zones),
            _ => None,
        }
    }

    pub fn mode(&self) -> Mode {
        match self {
            TableLayout::LocationFeatures { .. } => Mode::LocationBased,
            _ => Mode::ZoneBased,
        }
    }

    pub fn column_names(&self) -> Vec<String> {
        let mut names: Vec<String> = (1..=self.ap_count()).map(|i| format!("AP_{i}")).collect();
        match *self {
            TableLayout::LocationFeatures { .. } => {
                names.push("x".into());
                names.push("y".into());
            }
            TableLayout::ZoneOneHot { n_zones, .. } => {
                names.extend((1..=n_zones).map(|z| format!("zone_{z}")));
            }
            TableLayout::RssWithLabels { .. } => {}
        }
        names
    }
}

/// A raw (unscaled) training table plus conditioning labels when the layout
/// calls for them.
#[derive(Debug, Clone)]
pub struct GanTable {
    pub features: Matrix,
    pub labels: Option<Vec<usize>>,
    pub layout: TableLayout,
}

/// Builds the table a GAN trains on. `conditional` selects the CGAN layout,
/// which exists only for zone-based localization.
pub fn build_gan_table(
    dataset: &FingerprintDataset,
    mode: Mode,
    conditional: bool,
) -> Result<GanTable> {
    match (mode, conditional) {
        (Mode::LocationBased, true) => Err(Error::Config(
            "conditional GAN conditions on zone labels; not available in location-based mode"
                .into(),
        )),
        (Mode::LocationBased, false) => {
            let coords = dataset.coords().ok_or_else(|| {
                Error::Schema("location-based table needs coordinates".into())
            })?;
            let xy = Matrix::from_rows(
                &coords.iter().map(|&(x, y)| vec![x, y]).collect::<Vec<_>>(),
            )?;
            Ok(GanTable {
                features: dataset.rss().hcat(&xy)?,
                labels: None,
                layout: TableLayout::LocationFeatures {
                    ap_count: dataset.ap_count(),
                },
            })
        }
        (Mode::ZoneBased, conditional) => {
            let zones = dataset
                .zones()
                .ok_or_else(|| Error::Schema("zone-based table needs zone labels".into()))?;
            let n_zones = dataset.schema().n_zones.unwrap();
            if conditional {
                Ok(GanTable {
                    features: dataset.rss().clone(),
                    labels: Some(zones.to_vec()),
                    layout: TableLayout::RssWithLabels {
                        ap_count: dataset.ap_count(),
                        n_zones,
                    },
                })
            } else {
                let mut onehot = Matrix::zeros(dataset.len(), n_zones);
                for (r, &z) in zones.iter().enumerate() {
                    onehot.set(r, z, 1.0);
                }
                Ok(GanTable {
                    features: dataset.rss().hcat(&onehot)?,
                    labels: None,
                    layout: TableLayout::ZoneOneHot {
                        ap_count: dataset.ap_count(),
                        n_zones,
                    },
                })
            }
        }
    }
}

/// Maps a generated (scaled) table back to a dataset: inverse-scales, clamps
/// RSS into the dBm range, and decodes zone labels per the layout.
pub fn synthetic_to_dataset(
    scaled: &Matrix,
    labels: Option<&[usize]>,
    layout: &TableLayout,
    scaler: &FeatureScaler,
    bounds: Option<(f64, f64)>,
) -> Result<FingerprintDataset> {
    if scaled.cols() != layout.feature_dim() {
        return Err(Error::Schema(format!(
            "generated table has {} columns, layout expects {}",
            scaled.cols(),
            layout.feature_dim()
        )));
    }
    let raw = scaler.inverse_transform(scaled)?;
    let ap = layout.ap_count();

    let mut rss = Matrix::zeros(raw.rows(), ap);
    for r in 0..raw.rows() {
        for c in 0..ap {
            rss.set(r, c, raw.get(r, c).clamp(RSS_FLOOR_DBM, RSS_CEIL_DBM));
        }
    }

    match *layout {
        TableLayout::LocationFeatures { .. } => {
            let coords = (0..raw.rows())
                .map(|r| (raw.get(r, ap), raw.get(r, ap + 1)))
                .collect();
            FingerprintDataset::new(
                rss,
                Some(coords),
                None,
                DatasetSchema {
                    ap_count: ap,
                    has_coords: true,
                    n_zones: None,
                    bounds,
                },
            )
        }
        TableLayout::ZoneOneHot { n_zones, .. } => {
            let zones = (0..raw.rows())
                .map(|r| {
                    let block = &raw.row(r)[ap..ap + n_zones];
                    let mut best = 0;
                    for (z, &v) in block.iter().enumerate() {
                        if v > block[best] {
                            best = z;
                        }
                    }
                    best
                })
                .collect();
            FingerprintDataset::new(
                rss,
                None,
                Some(zones),
                DatasetSchema {
                    ap_count: ap,
                    has_coords: false,
                    n_zones: Some(n_zones),
                    bounds,
                },
            )
        }
        TableLayout::RssWithLabels { n_zones, .. } => {
            let labels = labels.ok_or_else(|| {
                Error::Schema("conditional layout needs one label per generated row".into())
            })?;
            if labels.len() != raw.rows() {
                return Err(Error::Schema(format!(
                    "{} labels for {} generated rows",
                    labels.len(),
                    raw.rows()
                )));
            }
            FingerprintDataset::new(
                rss,
                None,
                Some(labels.to_vec()),
                DatasetSchema {
                    ap_count: ap,
                    has_coords: false,
                    n_zones: Some(n_zones),
                    bounds,
                },
            )
        }
    }
}

/// Numeric view of a dataset for correlation and disclosure analysis:
/// RSS plus coordinates (location mode) or RSS plus the 1-based zone number
/// (zone mode), with matching column names.
pub fn analysis_table(dataset: &FingerprintDataset, mode: Mode) -> Result<(Matrix, Vec<String>)> {
    let mut names: Vec<String> = (1..=dataset.ap_count()).map(|i| format!("AP_{i}")).collect();
    match mode {
        Mode::LocationBased => {
            let coords = dataset
                .coords()
                .ok_or_else(|| Error::Schema("analysis table needs coordinates".into()))?;
            let xy = Matrix::from_rows(
                &coords.iter().map(|&(x, y)| vec![x, y]).collect::<Vec<_>>(),
            )?;
            names.push("x".into());
            names.push("y".into());
            Ok((dataset.rss().hcat(&xy)?, names))
        }
        Mode::ZoneBased => {
            let zones = dataset
                .zones()
                .ok_or_else(|| Error::Schema("analysis table needs zone labels".into()))?;
            let z = Matrix::from_rows(
                &zones.iter().map(|&z| vec![(z + 1) as f64]).collect::<Vec<_>>(),
            )?;
            names.push("zone".into());
            Ok((dataset.rss().hcat(&z)?, names))
        }
    }
}
