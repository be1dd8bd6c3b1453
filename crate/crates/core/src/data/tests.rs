use std::io::Write as _;

use rand::Rng;
use rand::SeedableRng;

use super::*;
use crate::Prng;

#[test]
fn mean_rss_at_reference_distance_is_ref_power() {
    let spec = TestbedSpec::default();
    assert_eq!(spec.mean_rss(0.5), spec.ref_power_dbm); // inside d0
    assert_eq!(spec.mean_rss(1.0), spec.ref_power_dbm);
}

#[test]
fn mean_rss_drops_twenty_db_per_decade_at_exponent_two() {
    let spec = TestbedSpec {
        pathloss_exponent: 2.0,
        ..TestbedSpec::default()
    };
    let got = spec.mean_rss(10.0 * spec.ref_distance_m);
    assert!((got - (spec.ref_power_dbm - 20.0)).abs() < 1e-12);
}

#[test]
fn colocated_access_point_reads_ref_power_without_shadowing() {
    let spec = TestbedSpec {
        width: 2.0,
        height: 2.0,
        ap_positions: vec![(0.5, 0.5)],
        rp_spacing: (1.0, 1.0),
        zones: vec![ZoneRect {
            x0: 0.0,
            y0: 0.0,
            x1: 2.0,
            y1: 2.0,
        }],
        shadowing_stddev_db: 0.0,
        ..TestbedSpec::default()
    };
    let ds = synthesize_testbed(&spec).unwrap();
    assert_eq!(ds.len(), 4);
    // RP (0.5, 0.5) sits on the AP.
    assert_eq!(ds.rss().get(0, 0), spec.ref_power_dbm);
}

#[test]
fn default_testbed_mirrors_expected_geometry() {
    let spec = TestbedSpec::default();
    let ds = synthesize_testbed(&spec).unwrap();
    assert_eq!(ds.len(), 384);
    assert_eq!(ds.ap_count(), 9);
    assert_eq!(spec.n_zones(), 15);
    assert!(ds.coords().is_some());
    assert!(ds.zones().is_some());
}

#[test]
fn synthesis_is_seed_deterministic() {
    let spec = TestbedSpec::default();
    assert_eq!(synthesize_testbed(&spec).unwrap(), synthesize_testbed(&spec).unwrap());
    let other = TestbedSpec {
        seed: spec.seed + 1,
        ..spec
    };
    assert_ne!(
        synthesize_testbed(&other).unwrap(),
        synthesize_testbed(&TestbedSpec::default()).unwrap()
    );
}

#[test]
fn rss_is_monotone_in_distance_without_shadowing() {
    let spec = TestbedSpec {
        shadowing_stddev_db: 0.0,
        ..TestbedSpec::default()
    };
    let ds = synthesize_testbed(&spec).unwrap();
    let coords = ds.coords().unwrap();
    for (a, &(ax, ay)) in spec.ap_positions.iter().enumerate() {
        let mut pairs: Vec<(f64, f64)> = coords
            .iter()
            .enumerate()
            .map(|(r, &(x, y))| {
                let d = ((x - ax).powi(2) + (y - ay).powi(2)).sqrt();
                (d, ds.rss().get(r, a))
            })
            .collect();
        pairs.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
        for w in pairs.windows(2) {
            assert!(
                w[1].1 <= w[0].1 + 1e-12,
                "ap {a}: rss rose with distance: {w:?}"
            );
        }
    }
}

#[test]
fn every_record_zone_matches_partition_lookup() {
    let spec = TestbedSpec::default();
    let ds = synthesize_testbed(&spec).unwrap();
    let coords = ds.coords().unwrap();
    let zones = ds.zones().unwrap();
    for (r, (&(x, y), &z)) in coords.iter().zip(zones).enumerate() {
        assert_eq!(spec.zone_of(x, y), Some(z), "record {r} at ({x}, {y})");
    }
}

#[test]
fn overlapping_zones_are_rejected() {
    let mut spec = TestbedSpec::default();
    spec.zones[1].x0 -= 1.0;
    assert!(matches!(spec.validate(), Err(Error::Config(_))));
}

#[test]
fn degenerate_grid_is_rejected() {
    let spec = TestbedSpec {
        rp_spacing: (100.0, 100.0),
        ..TestbedSpec::default()
    };
    assert!(matches!(synthesize_testbed(&spec), Err(Error::Config(_))));
}

#[test]
fn query_set_has_requested_size_and_valid_zones() {
    let spec = TestbedSpec::default();
    let q = synthesize_queries(&spec).unwrap();
    assert_eq!(q.len(), spec.query_count);
    for &z in q.zones().unwrap() {
        assert!(z < spec.n_zones());
    }
}

#[test]
fn csv_round_trip_is_byte_exact() {
    let dir = tempfile::tempdir().unwrap();
    let spec = TestbedSpec::default();
    let ds = synthesize_testbed(&spec).unwrap();

    let first = dir.path().join("a.csv");
    write_csv(&ds, &first).unwrap();
    let loaded = load_csv(&first, ds.schema()).unwrap();
    assert_eq!(loaded.len(), 384);
    assert_eq!(loaded.ap_count(), 9);

    let second = dir.path().join("b.csv");
    write_csv(&loaded, &second).unwrap();
    assert_eq!(
        std::fs::read(&first).unwrap(),
        std::fs::read(&second).unwrap()
    );
}

#[test]
fn csv_header_has_twelve_columns_for_the_default_schema() {
    let dir = tempfile::tempdir().unwrap();
    let ds = synthesize_testbed(&TestbedSpec::default()).unwrap();
    let path = dir.path().join("d.csv");
    write_csv(&ds, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(header.split(',').count(), 12);
    assert_eq!(
        header,
        "AP_1,AP_2,AP_3,AP_4,AP_5,AP_6,AP_7,AP_8,AP_9,x,y,zone"
    );
}

fn schema_9_15() -> DatasetSchema {
    DatasetSchema {
        ap_count: 2,
        has_coords: false,
        n_zones: Some(15),
        bounds: None,
    }
}

#[test]
fn out_of_range_zone_is_rejected_with_row_number() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "AP_1,AP_2,zone").unwrap();
    writeln!(f, "-50,-60,3").unwrap();
    writeln!(f, "-55,-61,17").unwrap();
    drop(f);
    let err = load_csv(&path, &schema_9_15()).unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("row 2") && msg.contains("17"), "{msg}");
}

#[test]
fn non_numeric_cell_and_missing_column_are_schema_errors() {
    let dir = tempfile::tempdir().unwrap();

    let path = dir.path().join("nan.csv");
    std::fs::write(&path, "AP_1,AP_2,zone\n-50,abc,3\n").unwrap();
    let msg = load_csv(&path, &schema_9_15()).unwrap_err().to_string();
    assert!(msg.contains("row 1") && msg.contains("abc"), "{msg}");

    let path = dir.path().join("short.csv");
    std::fs::write(&path, "AP_1,zone\n-50,3\n").unwrap();
    assert!(matches!(
        load_csv(&path, &schema_9_15()),
        Err(Error::Schema(_))
    ));
}

#[test]
fn empty_file_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    std::fs::write(&path, "AP_1,AP_2,zone\n").unwrap();
    let msg = load_csv(&path, &schema_9_15()).unwrap_err().to_string();
    assert!(msg.contains("no data rows"), "{msg}");
}

#[test]
fn scaler_maps_midpoint_and_endpoints() {
    let table =
        crate::matrix::Matrix::from_rows(&[vec![-100.0], vec![-30.0], vec![-65.0]]).unwrap();
    let scaler = FeatureScaler::fit(&table).unwrap();
    assert_eq!(scaler.transform_row(&[-65.0]).unwrap()[0], 0.0);
    assert_eq!(scaler.transform_row(&[-100.0]).unwrap()[0], -1.0);
    assert_eq!(scaler.transform_row(&[-30.0]).unwrap()[0], 1.0);
}

#[test]
fn scaler_round_trip_is_tight() {
    let mut rng = Prng::seed_from_u64(5);
    let fit_rows: Vec<Vec<f64>> = (0..50)
        .map(|_| vec![rng.gen_range(-100.0..0.0), rng.gen_range(0.0..51.0)])
        .collect();
    let table = crate::matrix::Matrix::from_rows(&fit_rows).unwrap();
    let scaler = FeatureScaler::fit(&table).unwrap();
    for _ in 0..1000 {
        let row = vec![rng.gen_range(-100.0..0.0), rng.gen_range(0.0..51.0)];
        let clamped: Vec<f64> = row.clone(); // values may fall outside the fitted range
        let back = scaler
            .inverse_row(&scaler.transform_row(&clamped).unwrap())
            .unwrap();
        for (a, b) in back.iter().zip(&row) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }
}

#[test]
fn constant_feature_scales_to_zero_and_inverts_to_constant() {
    let table = crate::matrix::Matrix::from_rows(&[vec![-70.0, 1.0], vec![-70.0, 3.0]]).unwrap();
    let scaler = FeatureScaler::fit(&table).unwrap();
    let t = scaler.transform_row(&[-70.0, 2.0]).unwrap();
    assert_eq!(t[0], 0.0);
    let back = scaler.inverse_row(&t).unwrap();
    assert_eq!(back[0], -70.0);
    assert!((back[1] - 2.0).abs() < 1e-12);
}

#[test]
fn kfold_sizes_and_partition_for_the_radiomap() {
    let folds = kfold_split(384, 5, 9).unwrap();
    let mut sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
    sizes.sort_unstable();
    assert_eq!(sizes, vec![76, 77, 77, 77, 77]);

    let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
    all.sort_unstable();
    assert_eq!(all, (0..384).collect::<Vec<_>>());
}

#[test]
fn kfold_is_seeded() {
    assert_eq!(kfold_split(100, 4, 3).unwrap(), kfold_split(100, 4, 3).unwrap());
    assert_ne!(kfold_split(100, 4, 3).unwrap(), kfold_split(100, 4, 4).unwrap());
    assert!(matches!(kfold_split(3, 5, 0), Err(Error::Config(_))));
    assert!(matches!(kfold_split(10, 1, 0), Err(Error::Config(_))));
}

#[test]
fn gan_table_layouts() {
    let ds = synthesize_testbed(&TestbedSpec::default()).unwrap();

    let loc = build_gan_table(&ds, Mode::LocationBased, false).unwrap();
    assert_eq!(loc.features.cols(), 11);
    assert!(loc.labels.is_none());

    let zone = build_gan_table(&ds, Mode::ZoneBased, false).unwrap();
    assert_eq!(zone.features.cols(), 24);
    // One-hot block sums to one per row.
    for r in 0..zone.features.rows() {
        let s: f64 = zone.features.row(r)[9..].iter().sum();
        assert_eq!(s, 1.0);
    }

    let cond = build_gan_table(&ds, Mode::ZoneBased, true).unwrap();
    assert_eq!(cond.features.cols(), 9);
    assert_eq!(cond.labels.as_ref().unwrap().len(), ds.len());

    assert!(matches!(
        build_gan_table(&ds, Mode::LocationBased, true),
        Err(Error::Config(_))
    ));
}

#[test]
fn synthetic_tables_decode_back_to_datasets() {
    let ds = synthesize_testbed(&TestbedSpec::default()).unwrap();
    let table = build_gan_table(&ds, Mode::ZoneBased, false).unwrap();
    let scaler = FeatureScaler::fit(&table.features).unwrap();
    let scaled = scaler.transform(&table.features).unwrap();

    let back = synthetic_to_dataset(&scaled, None, &table.layout, &scaler, None).unwrap();
    assert_eq!(back.len(), ds.len());
    // Argmax decode recovers the original zones exactly.
    assert_eq!(back.zones().unwrap(), ds.zones().unwrap());
    for z in back.zones().unwrap() {
        assert!(*z < 15);
    }
}

#[test]
fn analysis_table_columns_per_mode() {
    let ds = synthesize_testbed(&TestbedSpec::default()).unwrap();
    let (loc, loc_names) = analysis_table(&ds, Mode::LocationBased).unwrap();
    assert_eq!(loc.cols(), 11);
    assert_eq!(loc_names.last().unwrap(), "y");
    let (zone, zone_names) = analysis_table(&ds, Mode::ZoneBased).unwrap();
    assert_eq!(zone.cols(), 10);
    assert_eq!(zone_names.last().unwrap(), "zone");
    // 1-based zone numbers.
    let z0 = zone.get(0, 9);
    assert!(z0 >= 1.0 && z0 <= 15.0);
}
