//! Log-distance path-loss simulator generating radiomaps on a synthetic
//! testbed: a rectangular floor tiled by zones, ceiling-mounted access
//! points, and reference points on a regular grid.
//!
//! Per reference point and access point the simulated RSS is
//! `P0 - 10 n log10(max(d, d0) / d0)` plus log-normal shadowing averaged over
//! `samples_per_point` draws, clamped into the dataset's dBm range.

use rand::distributions::Distribution;
use rand::Rng;
use rand::SeedableRng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use super::{DatasetSchema, FingerprintDataset, RSS_CEIL_DBM, RSS_FLOOR_DBM};
use crate::matrix::Matrix;
use crate::{Error, Prng, Result};

/// Axis-aligned zone rectangle, half-open on its upper edges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZoneRect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl ZoneRect {
    fn area(&self) -> f64 {
        (self.x1 - self.x0).max(0.0) * (self.y1 - self.y0).max(0.0)
    }

    /// Half-open containment; the testbed's outer edges count as inside so
    /// the rectangles tile the full floor.
    fn contains(&self, x: f64, y: f64, width: f64, height: f64) -> bool {
        let x_in = x >= self.x0 && (x < self.x1 || (x == self.x1 && self.x1 == width));
        let y_in = y >= self.y0 && (y < self.y1 || (y == self.y1 && self.y1 == height));
        x_in && y_in
    }

    fn overlaps(&self, other: &ZoneRect) -> bool {
        let w = (self.x1.min(other.x1) - self.x0.max(other.x0)).max(0.0);
        let h = (self.y1.min(other.y1) - self.y0.max(other.y0)).max(0.0);
        w * h > 1e-9
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TestbedSpec {
    /// Floor extent in meters.
    pub width: f64,
    pub height: f64,
    pub ap_positions: Vec<(f64, f64)>,
    /// Reference-point grid spacing in meters along x and y; points sit at
    /// cell centers.
    pub rp_spacing: (f64, f64),
    /// Zone partition; must tile the floor without overlap.
    pub zones: Vec<ZoneRect>,
    pub pathloss_exponent: f64,
    /// Received power at the reference distance, in dBm.
    pub ref_power_dbm: f64,
    pub ref_distance_m: f64,
    pub shadowing_stddev_db: f64,
    /// Shadowing draws averaged per fingerprint.
    pub samples_per_point: u32,
    /// Size of the separate query set emitted for localization checks.
    pub query_count: usize,
    pub seed: u64,
}

impl Default for TestbedSpec {
    /// A 51 x 18 m floor with nine ceiling APs on a 3 x 3 grid, 15 zones
    /// (12 rooms flanking a corridor split in 3 segments), and a 24 x 16
    /// reference grid — 384 points.
    fn default() -> Self {
        let mut zones = Vec::new();
        for i in 0..6 {
            let x0 = i as f64 * 8.5;
            zones.push(ZoneRect {
                x0,
                y0: 11.0,
                x1: x0 + 8.5,
                y1: 18.0,
            });
        }
        for i in 0..6 {
            let x0 = i as f64 * 8.5;
            zones.push(ZoneRect {
                x0,
                y0: 0.0,
                x1: x0 + 8.5,
                y1: 7.0,
            });
        }
        for i in 0..3 {
            let x0 = i as f64 * 17.0;
            zones.push(ZoneRect {
                x0,
                y0: 7.0,
                x1: x0 + 17.0,
                y1: 11.0,
            });
        }
        let ap_positions = [8.5, 25.5, 42.5]
            .iter()
            .flat_map(|&x| [3.0, 9.0, 15.0].iter().map(move |&y| (x, y)))
            .collect();
        Self {
            width: 51.0,
            height: 18.0,
            ap_positions,
            rp_spacing: (2.125, 1.125),
            zones,
            pathloss_exponent: 2.5,
            ref_power_dbm: -30.0,
            ref_distance_m: 1.0,
            shadowing_stddev_db: 4.0,
            samples_per_point: 400,
            query_count: 100,
            seed: 1,
        }
    }
}

impl TestbedSpec {
    pub fn validate(&self) -> Result<()> {
        if self.width <= 0.0 || self.height <= 0.0 {
            return Err(Error::Config("testbed extent must be positive".into()));
        }
        if self.rp_spacing.0 <= 0.0 || self.rp_spacing.1 <= 0.0 {
            return Err(Error::Config("grid spacing must be positive".into()));
        }
        if self.ap_positions.is_empty() {
            return Err(Error::Config("at least one access point required".into()));
        }
        for &(x, y) in &self.ap_positions {
            if !(0.0..=self.width).contains(&x) || !(0.0..=self.height).contains(&y) {
                return Err(Error::Config(format!(
                    "access point ({x}, {y}) outside {}x{} m floor",
                    self.width, self.height
                )));
            }
        }
        if self.zones.is_empty() {
            return Err(Error::Config("zone partition is empty".into()));
        }
        let area: f64 = self.zones.iter().map(ZoneRect::area).sum();
        if (area - self.width * self.height).abs() > 1e-6 {
            return Err(Error::Config(format!(
                "zones cover {area} m^2, floor is {} m^2",
                self.width * self.height
            )));
        }
        for i in 0..self.zones.len() {
            for j in i + 1..self.zones.len() {
                if self.zones[i].overlaps(&self.zones[j]) {
                    return Err(Error::Config(format!("zones {i} and {j} overlap")));
                }
            }
        }
        if self.pathloss_exponent <= 0.0 || self.ref_distance_m <= 0.0 {
            return Err(Error::Config("path-loss parameters must be positive".into()));
        }
        if self.shadowing_stddev_db < 0.0 {
            return Err(Error::Config("shadowing stddev must be >= 0".into()));
        }
        if self.samples_per_point == 0 {
            return Err(Error::Config("samples_per_point must be >= 1".into()));
        }
        Ok(())
    }

    pub fn n_zones(&self) -> usize {
        self.zones.len()
    }

    /// Zone index containing the point, if any.
    pub fn zone_of(&self, x: f64, y: f64) -> Option<usize> {
        self.zones
            .iter()
            .position(|z| z.contains(x, y, self.width, self.height))
    }

    /// Mean RSS (no shadowing) of an access point at the given distance.
    pub fn mean_rss(&self, distance: f64) -> f64 {
        let d = distance.max(self.ref_distance_m);
        self.ref_power_dbm - 10.0 * self.pathloss_exponent * (d / self.ref_distance_m).log10()
    }

    fn schema(&self) -> DatasetSchema {
        DatasetSchema {
            ap_count: self.ap_positions.len(),
            has_coords: true,
            n_zones: Some(self.n_zones()),
            bounds: Some((self.width, self.height)),
        }
    }

    fn fingerprint(&self, x: f64, y: f64, rng: &mut Prng) -> Vec<f64> {
        let shadowing = if self.shadowing_stddev_db > 0.0 {
            Some(Normal::new(0.0, self.shadowing_stddev_db).expect("validated stddev"))
        } else {
            None
        };
        self.ap_positions
            .iter()
            .map(|&(ax, ay)| {
                let d = ((x - ax).powi(2) + (y - ay).powi(2)).sqrt();
                let mut rss = self.mean_rss(d);
                if let Some(normal) = &shadowing {
                    let mut total = 0.0;
                    for _ in 0..self.samples_per_point {
                        total += normal.sample(rng);
                    }
                    rss += total / f64::from(self.samples_per_point);
                }
                rss.clamp(RSS_FLOOR_DBM, RSS_CEIL_DBM)
            })
            .collect()
    }

    fn dataset_at(&self, positions: &[(f64, f64)], rng: &mut Prng) -> Result<FingerprintDataset> {
        let mut rss_rows = Vec::with_capacity(positions.len());
        let mut zones = Vec::with_capacity(positions.len());
        for &(x, y) in positions {
            rss_rows.push(self.fingerprint(x, y, rng));
            let zone = self.zone_of(x, y).ok_or_else(|| {
                Error::Config(format!("point ({x}, {y}) not covered by any zone"))
            })?;
            zones.push(zone);
        }
        FingerprintDataset::new(
            Matrix::from_rows(&rss_rows)?,
            Some(positions.to_vec()),
            Some(zones),
            self.schema(),
        )
    }
}

/// Builds the radiomap: one record per grid point, deterministic per seed.
pub fn synthesize_testbed(spec: &TestbedSpec) -> Result<FingerprintDataset> {
    spec.validate()?;
    let nx = (spec.width / spec.rp_spacing.0 + 1e-9).floor() as usize;
    let ny = (spec.height / spec.rp_spacing.1 + 1e-9).floor() as usize;
    if nx * ny == 0 {
        return Err(Error::Config(format!(
            "grid spacing {:?} yields no reference points on a {}x{} m floor",
            spec.rp_spacing, spec.width, spec.height
        )));
    }
    let mut positions = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            positions.push((
                (i as f64 + 0.5) * spec.rp_spacing.0,
                (j as f64 + 0.5) * spec.rp_spacing.1,
            ));
        }
    }
    let mut rng = Prng::seed_from_u64(spec.seed);
    spec.dataset_at(&positions, &mut rng)
}

/// Emits `spec.query_count` fingerprints at uniformly random off-grid
/// positions, on an RNG stream independent of the radiomap's.
pub fn synthesize_queries(spec: &TestbedSpec) -> Result<FingerprintDataset> {
    spec.validate()?;
    if spec.query_count == 0 {
        return Err(Error::Config("query_count must be >= 1".into()));
    }
    let mut rng = Prng::seed_from_u64(spec.seed.wrapping_add(0x9E37_79B9));
    let positions: Vec<(f64, f64)> = (0..spec.query_count)
        .map(|_| {
            (
                rng.gen_range(0.0..spec.width),
                rng.gen_range(0.0..spec.height),
            )
        })
        .collect();
    spec.dataset_at(&positions, &mut rng)
}
