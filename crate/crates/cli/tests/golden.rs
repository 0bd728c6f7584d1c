//! Full pipeline on the 200-project fixture against committed outputs.
//!
//! Regenerate with `UPDATE_GOLDEN=1 cargo test -p skillprice-cli --test golden`.

mod common;

use std::collections::BTreeMap;
use std::fs;

use common::{fixture_pipeline, fixtures, GOLDEN_FILES};
use skillprice_core::ingest::{parse_projects, Format, ParseOptions};

#[test]
fn fixture_outputs_match_golden_files() {
    let dir = tempfile::tempdir().unwrap();
    let model = fixture_pipeline(dir.path());
    let golden = fixtures().join("golden");
    let mut produced = vec![("model.json".to_string(), model)];
    produced.extend(GOLDEN_FILES.iter().map(|f| (f.to_string(), dir.path().join("export").join(f))));

    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::create_dir_all(&golden).unwrap();
        for (name, path) in &produced {
            fs::copy(path, golden.join(name)).unwrap();
        }
        return;
    }
    for (name, path) in &produced {
        let expected = fs::read(golden.join(name)).unwrap_or_else(|e| panic!("golden {name}: {e}"));
        let actual = fs::read(path).unwrap();
        assert!(expected == actual, "{name} differs from its golden copy");
    }
}

/// The committed valuation table agrees with a direct two-mean computation
/// over the fixture projects.
#[test]
fn golden_premia_match_direct_computation() {
    let projects = parse_projects(
        fs::File::open(fixtures().join("projects.csv")).unwrap(),
        Format::Csv,
        &ParseOptions::default(),
    )
    .unwrap();
    let text = fs::read_to_string(fixtures().join("golden/valuation.csv")).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut checked = BTreeMap::new();
    for row in rdr.records() {
        let row = row.unwrap();
        let skill = &row[0];
        let premium: f64 = row[1].parse().unwrap();
        let (mut sw, mut nw, mut so, mut no) = (0.0, 0.0, 0.0, 0.0);
        for r in &projects.records {
            if r.skills.iter().any(|s| s == skill) {
                sw += r.hourly_wage;
                nw += 1.0;
            } else {
                so += r.hourly_wage;
                no += 1.0;
            }
        }
        let direct = (sw / nw) / (so / no) - 1.0;
        assert!((premium - direct).abs() <= 1e-12, "{skill}: {premium} vs {direct}");
        let demand: f64 = row[4].parse().unwrap();
        assert_eq!(demand, nw);
        checked.insert(skill.to_string(), premium);
    }
    assert_eq!(checked.len(), 20);
}
