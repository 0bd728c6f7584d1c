//! The shipped data files agree with the built-in defaults.

use std::path::PathBuf;

use skillprice_core::analysis::{default_ai_skills, parse_skill_list, AutomationTable};
use skillprice_core::ingest::PLATFORM_OCCUPATIONS;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

#[test]
fn ai_skill_file_matches_builtin_list() {
    let text = std::fs::read_to_string(data("ai_skills.txt")).unwrap();
    assert_eq!(parse_skill_list(&text), default_ai_skills());
}

#[test]
fn example_automation_table_covers_platform_occupations() {
    let file = std::fs::File::open(data("automation_example.csv")).unwrap();
    let table = AutomationTable::from_csv(file, "automation_example.csv").unwrap();
    for occ in PLATFORM_OCCUPATIONS {
        assert!(table.get(occ).is_some(), "{occ}");
    }
}
