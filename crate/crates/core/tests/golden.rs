//! Byte comparisons against checked-in simulation outputs.
//! `UPDATE_GOLDEN=1 cargo test --test golden` rewrites them.

use std::path::PathBuf;

use persuasion::rsa::StickContest;
use persuasion::simulation::{belief_curves, effect_heatmap, SweepConfig};
use persuasion::world::WorldPrior;

fn check(name: &str, actual: &str) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(expected == actual, "{name} differs from the golden file:\n{actual}");
}

#[test]
fn heatmap_csv() {
    let h = effect_heatmap(&SweepConfig::default()).unwrap();
    check("heatmap.csv", &h.to_csv());
}

#[test]
fn curves_csv() {
    let engine = StickContest::new(&WorldPrior::experiment()).unwrap();
    let grid = engine.grid().values().to_vec();
    let c = belief_curves(&engine, 2.03, -0.13, &grid).unwrap();
    check("curves.csv", &c.to_csv());
}
