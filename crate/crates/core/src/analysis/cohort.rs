//! Cohort comparisons (AI skills against the rest).

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::ingest::normalize_slug;
use crate::{Error, Result};

/// Skills counted as AI-related by default.
pub const AI_SKILLS: [&str; 41] = [
    "advanced-analytics",
    "ai",
    "algorithm-development",
    "algorithms",
    "analytics",
    "apache-spark",
    "artificial-intelligence",
    "artificial-neural-networks",
    "automation",
    "automation-software-release",
    "big-data",
    "bot-development",
    "c++",
    "chatbot-development",
    "cloud-computing",
    "clustering",
    "computer-vision",
    "data-analysis",
    "data-analytics",
    "data-engineering",
    "data-science",
    "database-architecture",
    "deep-learning",
    "deep-neural-networks",
    "ibm-watson",
    "image-processing",
    "imageobject-recognition",
    "java",
    "keras",
    "machine-learning",
    "machine-learning-model",
    "natural-language-processing",
    "natural-language-toolkit-nltk",
    "neural-networks",
    "pattern-recognition",
    "python",
    "python-script",
    "robotic-process-automation",
    "robotics",
    "supervised-learning",
    "tensorflow",
];

/// One slug per line; blank lines and `#` comments are skipped.
pub fn parse_skill_list(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(normalize_slug)
        .collect()
}

pub fn default_ai_skills() -> BTreeSet<String> {
    AI_SKILLS.iter().map(|s| s.to_string()).collect()
}

/// Welch two-sample t-test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchTest {
    pub t: f64,
    pub df: f64,
    /// Two-sided.
    pub p_value: f64,
    pub mean_a: f64,
    pub mean_b: f64,
    pub n_a: usize,
    pub n_b: usize,
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Welch's unequal-variance t-test of `a` against `b`.
///
/// When both groups have zero variance the statistic is infinite if the
/// means differ (p = 0, `df = n_a + n_b - 2`) and undefined otherwise.
pub fn cohort_compare(a: &[f64], b: &[f64]) -> Result<WelchTest> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InsufficientData("each group needs at least two values".into()));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::Config("non-finite value in cohort".into()));
    }
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (sa, sb) = (va / na, vb / nb);
    let base = WelchTest { t: 0.0, df: 0.0, p_value: 1.0, mean_a: ma, mean_b: mb, n_a: a.len(), n_b: b.len() };
    if sa + sb == 0.0 {
        if ma == mb {
            return Err(Error::DegenerateTest("both groups are constant and equal".into()));
        }
        return Ok(WelchTest {
            t: if ma > mb { f64::INFINITY } else { f64::NEG_INFINITY },
            df: na + nb - 2.0,
            p_value: 0.0,
            ..base
        });
    }
    let t = (ma - mb) / (sa + sb).sqrt();
    let df = (sa + sb).powi(2) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::DegenerateTest(e.to_string()))?;
    let p_value = (2.0 * dist.sf(t.abs())).min(1.0);
    Ok(WelchTest { t, df, p_value, ..base })
}

/// Splits `values` into (members of `cohort`, everything else), each in
/// slug order.
pub fn cohort_split(values: &BTreeMap<String, f64>, cohort: &BTreeSet<String>) -> (Vec<f64>, Vec<f64>) {
    let (inside, outside): (Vec<_>, Vec<_>) = values.iter().partition(|(s, _)| cohort.contains(*s));
    (
        inside.into_iter().map(|(_, v)| *v).collect(),
        outside.into_iter().map(|(_, v)| *v).collect(),
    )
}
