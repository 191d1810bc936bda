mod common;

use std::collections::BTreeMap;
use std::fs;

use common::{abc_dir, copy_abc};
use reshoreval::dataset::{load_dataset, load_dir, DatasetKind};
use reshoreval::Error;

fn diagnostics_text(err: &Error) -> String {
    err.to_string()
}

#[test]
fn abc_dataset_loads() {
    let bundle = load_dir(&abc_dir()).unwrap();
    assert_eq!(bundle.screening_rows.len(), 7);
    assert_eq!(bundle.tco_pairs().len(), 4);
    assert_eq!(bundle.ghg_pairs().len(), 4);
    assert_eq!(bundle.manifest.horizon_years, 5);
}

#[test]
fn abc_screening_rows_match_published_table() {
    let bundle = load_dir(&abc_dir()).unwrap();
    let expected = [
        ("Casting", "331523", 25.0, 55.0, 9.0, 41.13),
        ("Stamping", "336370", 30.0, 14.0, 12.89, 25.31),
        ("Forming", "331318", 23.0, 22.0, 7.24, 16.28),
    ];
    for (label, naics, ri, deficit, logistics, tariff) in expected {
        let row = bundle.screening_rows.iter().find(|r| r.label == label).unwrap();
        assert_eq!(row.naics_code.as_str(), naics);
        assert_eq!(row.ri_percent, ri);
        assert_eq!(row.trade_deficit_100k, deficit);
        assert_eq!(row.logistics_cost_percent, logistics);
        assert_eq!(row.tariff_share_percent, tariff);
    }
}

#[test]
fn header_only_legs_file_gives_no_legs() {
    let dir = tempfile::tempdir().unwrap();
    copy_abc(dir.path());
    fs::write(
        dir.path().join("legs.csv"),
        "product_label,scenario,item_id,mode,mass_tonnes,distance,distance_unit\n",
    )
    .unwrap();
    let bundle = load_dir(dir.path()).unwrap();
    assert!(bundle.legs.is_empty());
    assert!(bundle.ghg_pairs().is_empty());
}

#[test]
fn unknown_mode_names_row_and_allowed_values() {
    let dir = tempfile::tempdir().unwrap();
    copy_abc(dir.path());
    let legs = fs::read_to_string(dir.path().join("legs.csv")).unwrap();
    fs::write(dir.path().join("legs.csv"), legs.replacen(",sea,", ",rail,", 1)).unwrap();
    let err = load_dir(dir.path()).unwrap_err();
    assert_eq!(err.exit_code(), 1);
    let text = diagnostics_text(&err);
    assert!(text.contains("legs.csv: row 3, column 'mode'"), "{text}");
    assert!(text.contains("rail") && text.contains("road, sea"), "{text}");
}

#[test]
fn all_problems_are_reported_together() {
    let dir = tempfile::tempdir().unwrap();
    copy_abc(dir.path());
    let legs = fs::read_to_string(dir.path().join("legs.csv")).unwrap();
    fs::write(dir.path().join("legs.csv"), legs.replace(",sea,", ",rail,")).unwrap();
    let text = diagnostics_text(&load_dir(dir.path()).unwrap_err());
    assert_eq!(text.matches("unknown transport mode").count(), 4, "{text}");
}

#[test]
fn cogs_items_must_sum_to_cogs() {
    let dir = tempfile::tempdir().unwrap();
    copy_abc(dir.path());
    fs::write(
        dir.path().join("cogs_items.csv"),
        "product_label,role,item,amount\nCasting,offshore,packaging,1.00\nCasting,offshore,inspection,0.50\n",
    )
    .unwrap();
    let err = load_dir(dir.path()).unwrap_err();
    assert!(diagnostics_text(&err).contains("cogs_items"), "{err}");

    fs::write(
        dir.path().join("cogs_items.csv"),
        "product_label,role,item,amount\nCasting,offshore,packaging,1.00\nCasting,offshore,inspection,0.67\n",
    )
    .unwrap();
    let bundle = load_dir(dir.path()).unwrap();
    let (_, offshore) = &bundle.tco_pairs()["Casting"];
    assert_eq!(offshore.cogs_items.len(), 2);
}

#[test]
fn cogs_items_for_unknown_product_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    copy_abc(dir.path());
    fs::write(
        dir.path().join("cogs_items.csv"),
        "product_label,role,item,amount\nGearbox,offshore,packaging,1.00\n",
    )
    .unwrap();
    assert!(load_dir(dir.path()).is_err());
}

#[test]
fn missing_file_is_only_an_error_when_needed() {
    let dir = tempfile::tempdir().unwrap();
    copy_abc(dir.path());
    fs::remove_file(dir.path().join("legs.csv")).unwrap();
    fs::remove_file(dir.path().join("emission_factors.csv")).unwrap();
    let bundle = load_dir(dir.path()).unwrap();
    assert!(bundle.require(&[DatasetKind::Screening]).is_ok());
    assert!(bundle.require(&[DatasetKind::Legs]).is_err());
}

#[test]
fn legs_without_emission_factors_is_a_dangling_reference() {
    let dir = tempfile::tempdir().unwrap();
    copy_abc(dir.path());
    fs::remove_file(dir.path().join("emission_factors.csv")).unwrap();
    assert!(load_dir(dir.path()).is_err());
}

#[test]
fn explicit_paths_load_like_a_directory() {
    let mut paths = BTreeMap::new();
    for kind in [DatasetKind::Manifest, DatasetKind::Screening, DatasetKind::Scenarios] {
        paths.insert(kind, abc_dir().join(kind.file_name()));
    }
    let bundle = load_dataset(&paths).unwrap();
    assert_eq!(bundle.screening_rows.len(), 7);
    assert!(bundle.legs.is_empty());
}

#[test]
fn dataset_errors_do_not_touch_the_inputs() {
    let dir = tempfile::tempdir().unwrap();
    copy_abc(dir.path());
    fs::write(dir.path().join("screening.csv"), "label\n").unwrap();
    let before = fs::read(dir.path().join("screening.csv")).unwrap();
    assert!(load_dir(dir.path()).is_err());
    assert_eq!(fs::read(dir.path().join("screening.csv")).unwrap(), before);
}
