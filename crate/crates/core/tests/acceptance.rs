//! Runs every acceptance criterion and prints one line per criterion.

use tor_core::verify::{run_criterion, ALL_CRITERIA};

#[test]
fn acceptance_criteria() {
    let results: Vec<_> = ALL_CRITERIA.iter().map(|&id| run_criterion(id)).collect();
    for r in &results {
        println!("{r}");
    }
    let failed: Vec<u8> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
