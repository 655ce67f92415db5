//! Byte-level regression of the figure tables. Regenerate with
//! `UPDATE_GOLDEN=1 cargo test -p nvzero --test golden`.

mod common;

use common::{golden_dir, golden_mismatches, golden_tables};

#[test]
fn figure_tables_match_golden_files() {
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(golden_dir()).unwrap();
        for (name, text) in golden_tables() {
            std::fs::write(golden_dir().join(name), text).unwrap();
        }
    }
    let bad = golden_mismatches();
    assert!(bad.is_empty(), "differs from golden: {bad:?}");
}

#[test]
fn consecutive_runs_are_identical() {
    assert_eq!(golden_tables(), golden_tables());
}

#[test]
fn tables_are_lf_terminated_and_small() {
    for (name, text) in golden_tables() {
        assert!(!text.contains('\r') && text.ends_with('\n'), "{name}");
        assert!(text.len() < 1 << 20, "{name}");
    }
}
