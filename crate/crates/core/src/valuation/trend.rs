use serde::{Deserialize, Serialize};

use super::premium::premium;
use crate::ingest::ProjectTable;
use crate::skillgraph::compute_skill_stats;
use crate::{Error, Result};

pub const DEFAULT_WINDOWS: [(i32, i32); 2] = [(2014, 2017), (2018, 2021)];

/// Premium, demand and supply of one skill per year window.
///
/// `premium_per_window[i]` is `None` where the premium is undefined in that
/// window (the skill is absent, or present in every project of the window).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendSeries {
    pub skill: String,
    pub windows: Vec<(i32, i32)>,
    pub premium_per_window: Vec<Option<f64>>,
    pub demand_per_window: Vec<usize>,
    pub supply_per_window: Vec<usize>,
}

/// Windows must be non-empty, ordered and disjoint.
pub fn validate_windows(windows: &[(i32, i32)]) -> Result<()> {
    if windows.is_empty() {
        return Err(Error::Config("at least one window required".into()));
    }
    for &(a, b) in windows {
        if a > b {
            return Err(Error::Config(format!("window {a}-{b} is empty")));
        }
    }
    for w in windows.windows(2) {
        if w[1].0 <= w[0].1 {
            return Err(Error::Config(format!(
                "windows {}-{} and {}-{} overlap or are out of order",
                w[0].0, w[0].1, w[1].0, w[1].1
            )));
        }
    }
    Ok(())
}

/// Parses `2014-2017,2018-2021`.
pub fn parse_windows(s: &str) -> Result<Vec<(i32, i32)>> {
    let windows = s
        .split(',')
        .map(|part| {
            let (a, b) = part
                .trim()
                .split_once('-')
                .ok_or_else(|| Error::Config(format!("bad window `{part}`")))?;
            let parse = |v: &str| {
                v.trim()
                    .parse::<i32>()
                    .map_err(|_| Error::Config(format!("bad year in window `{part}`")))
            };
            Ok((parse(a)?, parse(b)?))
        })
        .collect::<Result<Vec<_>>>()?;
    validate_windows(&windows)?;
    Ok(windows)
}

pub fn windowed_premium(skill: &str, projects: &ProjectTable, windows: &[(i32, i32)]) -> Result<TrendSeries> {
    validate_windows(windows)?;
    let mut series = TrendSeries {
        skill: skill.to_string(),
        windows: windows.to_vec(),
        premium_per_window: Vec::with_capacity(windows.len()),
        demand_per_window: Vec::with_capacity(windows.len()),
        supply_per_window: Vec::with_capacity(windows.len()),
    };
    for &(start, end) in windows {
        let sub = projects.window(start, end);
        let stats = compute_skill_stats(&sub);
        let (demand, supply) = stats.get(skill).map_or((0, 0), |s| (s.demand, s.supply));
        series.premium_per_window.push(premium(skill, &sub).ok().map(|p| p.premium));
        series.demand_per_window.push(demand);
        series.supply_per_window.push(supply);
    }
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::ProjectRecord;

    #[test]
    fn window_without_skill_is_missing() {
        let records = [(2015, 10.0, "b"), (2016, 12.0, "b"), (2019, 30.0, "a"), (2020, 10.0, "b")]
            .iter()
            .enumerate()
            .map(|(i, (y, w, s))| ProjectRecord {
                project_id: format!("p{i}"),
                worker_id: format!("w{i}"),
                year: *y,
                hourly_wage: *w,
                occupation: "x".into(),
                worker_experience: 0,
                skills: vec![s.to_string()],
            })
            .collect();
        let t = ProjectTable::from_records("t", records).unwrap();
        let s = windowed_premium("a", &t, &DEFAULT_WINDOWS).unwrap();
        assert_eq!(s.premium_per_window, vec![None, Some(2.0)]);
        assert_eq!(s.demand_per_window, vec![0, 1]);
        assert_eq!(s.supply_per_window, vec![0, 1]);
    }

    #[test]
    fn window_parsing_and_validation() {
        assert_eq!(parse_windows("2014-2017, 2018-2021").unwrap(), DEFAULT_WINDOWS.to_vec());
        assert!(parse_windows("2014-2018,2018-2021").is_err());
        assert!(parse_windows("2018-2021,2014-2017").is_err());
        assert!(parse_windows("2019-2017").is_err());
        assert!(parse_windows("x").is_err());
    }
}
