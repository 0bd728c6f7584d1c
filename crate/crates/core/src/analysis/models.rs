//! Explanatory regressions of skill value on supply, demand, community and
//! network position.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::complementarity::ComplementarityScores;
use crate::skillgraph::{degree_centrality, CommunityPartition, SkillGraph};
use crate::valuation::{ols_fit, Design, RegressionFit, SkillPremium, SkillPrice};
use crate::{Error, Result};

/// Per-skill regressors and targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkillFeatureRow {
    pub skill: String,
    pub premium: f64,
    pub price_factor: f64,
    pub log_supply: f64,
    pub log_demand: f64,
    pub community: usize,
    /// `ln(1 + degree)`, so isolated skills stay finite.
    pub degree_log: f64,
    pub wpr_premium: f64,
    pub wpr_price: f64,
}

/// Joins the per-skill estimates into feature rows. Skills missing from any
/// input are left out; rows come back sorted by slug.
pub fn build_feature_rows(
    graph: &SkillGraph,
    partition: &CommunityPartition,
    premia: &BTreeMap<String, SkillPremium>,
    prices: &BTreeMap<String, SkillPrice>,
    wpr_premium: &ComplementarityScores,
    wpr_price: &ComplementarityScores,
) -> Vec<SkillFeatureRow> {
    let degree = degree_centrality(graph);
    graph
        .nodes()
        .iter()
        .filter_map(|node| {
            let s = node.skill.as_str();
            Some(SkillFeatureRow {
                skill: s.to_string(),
                premium: premia.get(s)?.premium,
                price_factor: prices.get(s)?.factor,
                log_supply: (node.supply as f64).ln(),
                log_demand: (node.demand as f64).ln(),
                community: partition.community_of(s)?,
                degree_log: degree.get(s)?.ln_1p(),
                wpr_premium: *wpr_premium.scores.get(s)?,
                wpr_price: *wpr_price.scores.get(s)?,
            })
        })
        .collect()
}

/// The six nested specifications.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PremiumModel {
    /// Premium on log supply.
    M1,
    /// + log demand.
    M2,
    /// + community dummies.
    M3,
    /// + log degree.
    M4,
    /// Log degree replaced by premium-weighted PageRank.
    M5,
    /// Price factor on supply, demand, communities and price-weighted PageRank.
    M6,
}

impl PremiumModel {
    pub const ALL: [PremiumModel; 6] = [Self::M1, Self::M2, Self::M3, Self::M4, Self::M5, Self::M6];

    pub fn name(self) -> &'static str {
        match self {
            Self::M1 => "model_1",
            Self::M2 => "model_2",
            Self::M3 => "model_3",
            Self::M4 => "model_4",
            Self::M5 => "model_5",
            Self::M6 => "model_6",
        }
    }

    pub fn target(self) -> &'static str {
        match self {
            Self::M6 => "price_factor",
            _ => "premium",
        }
    }

    fn has_demand(self) -> bool {
        self != Self::M1
    }

    fn has_communities(self) -> bool {
        self >= Self::M3
    }

    fn network_term(self) -> Option<&'static str> {
        match self {
            Self::M4 => Some("degree_log"),
            Self::M5 => Some("wpr_premium"),
            Self::M6 => Some("wpr_price"),
            _ => None,
        }
    }
}

/// Design matrix and response for `model`. Community dummies cover every
/// community present in `rows` except `reference`.
pub fn model_design(
    rows: &[SkillFeatureRow],
    model: PremiumModel,
    reference: usize,
) -> Result<(Design, Vec<f64>)> {
    let mut cols: Vec<(String, Vec<f64>)> = vec![
        ("(intercept)".into(), vec![1.0; rows.len()]),
        ("log_supply".into(), rows.iter().map(|r| r.log_supply).collect()),
    ];
    if model.has_demand() {
        cols.push(("log_demand".into(), rows.iter().map(|r| r.log_demand).collect()));
    }
    if model.has_communities() {
        let mut ids: Vec<usize> = rows.iter().map(|r| r.community).collect();
        ids.sort_unstable();
        ids.dedup();
        for c in ids.into_iter().filter(|&c| c != reference) {
            cols.push((
                community_term(c),
                rows.iter().map(|r| f64::from(u8::from(r.community == c))).collect(),
            ));
        }
    }
    if let Some(term) = model.network_term() {
        let v = rows
            .iter()
            .map(|r| match term {
                "degree_log" => r.degree_log,
                "wpr_premium" => r.wpr_premium,
                _ => r.wpr_price,
            })
            .collect();
        cols.push((term.into(), v));
    }
    let y = rows
        .iter()
        .map(|r| if model == PremiumModel::M6 { r.price_factor } else { r.premium })
        .collect();
    Ok((Design::from_columns(cols)?, y))
}

pub fn community_term(id: usize) -> String {
    format!("community[{id}]")
}

/// Fits Models 1–6. Each model needs at least twice as many rows as
/// parameters.
pub fn fit_premium_models(
    rows: &[SkillFeatureRow],
    reference: usize,
) -> Result<BTreeMap<PremiumModel, RegressionFit>> {
    PremiumModel::ALL
        .iter()
        .map(|&m| {
            let (design, y) = model_design(rows, m, reference)?;
            let p = design.names.len();
            if rows.len() < 2 * p {
                return Err(Error::InsufficientData(format!(
                    "{} needs at least {} skills, have {}",
                    m.name(),
                    2 * p,
                    rows.len()
                )));
            }
            Ok((m, ols_fit(&design, &y)?))
        })
        .collect()
}

/// Seeded k-fold cross-validated R²: out-of-fold predictions are pooled and
/// scored as `1 - SSE / SST` around the full-sample mean.
pub fn out_of_sample_r2(
    rows: &[SkillFeatureRow],
    model: PremiumModel,
    reference: usize,
    k: usize,
    seed: u64,
) -> Result<f64> {
    if k < 2 {
        return Err(Error::Config("k must be at least 2".into()));
    }
    let (design, y) = model_design(rows, model, reference)?;
    let n = y.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let mut predicted = vec![0.0; n];
    for fold in 0..k {
        let test: Vec<usize> = order.iter().skip(fold).step_by(k).copied().collect();
        if test.is_empty() {
            return Err(Error::FoldTooSmall { fold, k, reason: "no held-out rows".into() });
        }
        let mut train: Vec<usize> = order
            .iter()
            .enumerate()
            .filter(|(pos, _)| pos % k != fold)
            .map(|(_, &i)| i)
            .collect();
        train.sort_unstable();
        let y_train: Vec<f64> = train.iter().map(|&i| y[i]).collect();
        let fit = ols_fit(&design.select_rows(&train), &y_train).map_err(|e| Error::FoldTooSmall {
            fold,
            k,
            reason: e.to_string(),
        })?;
        for (&i, p) in test.iter().zip(fit.predict(&design.select_rows(&test))) {
            predicted[i] = p;
        }
    }
    let mean = y.iter().sum::<f64>() / n as f64;
    let sst: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let sse: f64 = y.iter().zip(&predicted).map(|(a, b)| (a - b).powi(2)).sum();
    if sst == 0.0 {
        return Err(Error::InsufficientData("response has zero variance".into()));
    }
    Ok(1.0 - sse / sst)
}

/// Planted linear structure for synthetic feature rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlantedFeatures {
    pub n_rows: usize,
    pub intercept: f64,
    pub supply: f64,
    pub demand: f64,
    /// Premium offset per community; community 0 is the reference.
    pub community_offsets: Vec<f64>,
    /// Effect of premium-weighted PageRank.
    pub complementarity: f64,
    /// Standard deviation of the PageRank regressor.
    pub complementarity_sd: f64,
    /// Correlation between `degree_log` and the PageRank regressor.
    pub degree_correlation: f64,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for PlantedFeatures {
    fn default() -> Self {
        Self {
            n_rows: 300,
            intercept: 0.2,
            supply: -0.1,
            demand: 0.1,
            community_offsets: vec![0.0, 0.15, -0.1, 0.3],
            complementarity: 2.0,
            complementarity_sd: 0.1,
            degree_correlation: 0.8,
            noise_sigma: 0.05,
            seed: 0,
        }
    }
}

/// Draws feature rows whose premium follows the planted coefficients.
///
/// `price_factor` is `1 + premium` rebuilt from the same terms with
/// `wpr_price` in place of `wpr_premium`, so Model 6 has the same planted
/// signs.
pub fn generate_planted_features(cfg: &PlantedFeatures) -> Result<Vec<SkillFeatureRow>> {
    if cfg.community_offsets.is_empty() {
        return Err(Error::Config("at least one community offset required".into()));
    }
    if !(-1.0..=1.0).contains(&cfg.degree_correlation) {
        return Err(Error::Config("degree_correlation must lie in [-1, 1]".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let std = Normal::new(0.0, 1.0).expect("unit normal");
    let noise = Normal::new(0.0, cfg.noise_sigma.max(0.0)).map_err(|e| Error::Config(e.to_string()))?;
    let n_comm = cfg.community_offsets.len();
    let rho = cfg.degree_correlation;

    Ok((0..cfg.n_rows)
        .map(|i| {
            let community = i % n_comm;
            let log_demand = rng.random_range(3.0..6.5);
            let log_supply = rng.random_range(1.5..5.0);
            let z: f64 = std.sample(&mut rng);
            let wpr_premium = cfg.complementarity_sd * z;
            let wpr_price = wpr_premium + 0.2 * cfg.complementarity_sd * std.sample(&mut rng);
            let degree_log = 3.0 + rho * z + (1.0 - rho * rho).sqrt() * std.sample(&mut rng);
            let base = cfg.intercept
                + cfg.supply * log_supply
                + cfg.demand * log_demand
                + cfg.community_offsets[community];
            let premium = base + cfg.complementarity * wpr_premium + noise.sample(&mut rng);
            let price_factor = 1.0 + base + cfg.complementarity * wpr_price + noise.sample(&mut rng);
            SkillFeatureRow {
                skill: format!("skill-{i:04}"),
                premium,
                price_factor,
                log_supply,
                log_demand,
                community,
                degree_log,
                wpr_premium,
                wpr_price,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_planted_rows_are_recovered_exactly() {
        let cfg = PlantedFeatures { noise_sigma: 0.0, ..Default::default() };
        let rows = generate_planted_features(&cfg).unwrap();
        let fits = fit_premium_models(&rows, 0).unwrap();
        let m5 = &fits[&PremiumModel::M5];
        assert!((m5.coefficient("log_supply").unwrap() + 0.1).abs() < 1e-8);
        assert!((m5.coefficient("log_demand").unwrap() - 0.1).abs() < 1e-8);
        assert!((m5.coefficient("wpr_premium").unwrap() - 2.0).abs() < 1e-8);
        assert!((m5.coefficient("community[3]").unwrap() - 0.3).abs() < 1e-8);
        let m6 = &fits[&PremiumModel::M6];
        assert!((m6.coefficient("wpr_price").unwrap() - 2.0).abs() < 1e-8);
        assert!((m6.coefficient("(intercept)").unwrap() - 1.2).abs() < 1e-8);
        let oos = out_of_sample_r2(&rows, PremiumModel::M5, 0, 5, 1).unwrap();
        assert!(oos > 1.0 - 1e-9);
    }

    #[test]
    fn nested_models_never_lose_in_sample_fit() {
        for seed in 0..5 {
            let rows = generate_planted_features(&PlantedFeatures { seed, ..Default::default() }).unwrap();
            let fits = fit_premium_models(&rows, 0).unwrap();
            let r2 = |m| fits[&m].r2;
            assert!(r2(PremiumModel::M2) >= r2(PremiumModel::M1));
            assert!(r2(PremiumModel::M3) >= r2(PremiumModel::M2));
            assert!(r2(PremiumModel::M4) >= r2(PremiumModel::M3));
        }
    }

    #[test]
    fn model_terms() {
        let rows = generate_planted_features(&PlantedFeatures { n_rows: 40, ..Default::default() }).unwrap();
        let (d, _) = model_design(&rows, PremiumModel::M3, 2).unwrap();
        assert_eq!(
            d.names,
            ["(intercept)", "log_supply", "log_demand", "community[0]", "community[1]", "community[3]"]
        );
        let (d, _) = model_design(&rows, PremiumModel::M5, 0).unwrap();
        assert_eq!(d.names.last().unwrap(), "wpr_premium");
        assert!(!d.names.contains(&"degree_log".to_string()));
    }

    #[test]
    fn too_few_rows() {
        let rows = generate_planted_features(&PlantedFeatures { n_rows: 8, ..Default::default() }).unwrap();
        assert!(matches!(fit_premium_models(&rows, 0), Err(Error::InsufficientData(_))));
        assert!(matches!(
            out_of_sample_r2(&rows, PremiumModel::M5, 0, 5, 0),
            Err(Error::FoldTooSmall { .. })
        ));
        assert!(out_of_sample_r2(&rows, PremiumModel::M1, 0, 1, 0).is_err());
    }

    #[test]
    fn pure_noise_has_no_predictive_power() {
        let cfg = PlantedFeatures {
            supply: 0.0,
            demand: 0.0,
            community_offsets: vec![0.0; 4],
            complementarity: 0.0,
            noise_sigma: 1.0,
            seed: 3,
            ..Default::default()
        };
        let rows = generate_planted_features(&cfg).unwrap();
        assert!(out_of_sample_r2(&rows, PremiumModel::M5, 0, 5, 9).unwrap() <= 0.05);
    }
}
