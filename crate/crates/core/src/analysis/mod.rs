//! Explaining skill values: the premium regressions, worker domains and the
//! domain × community premium matrix, automation risk, cohort tests.

mod automation;
mod cohort;
mod domains;
mod models;

pub use automation::{automation_all, automation_probability, AutomationFormula, AutomationTable};
pub use cohort::{cohort_compare, cohort_split, default_ai_skills, parse_skill_list, WelchTest, AI_SKILLS};
pub use domains::{
    assign_worker_domains, concentration_share, domain_premium_matrix, infer_domain, ComplementScope,
    DomainPremiumMatrix, WorkerDomain,
};
pub use models::{
    build_feature_rows, community_term, fit_premium_models, generate_planted_features, model_design,
    out_of_sample_r2, PlantedFeatures, PremiumModel, SkillFeatureRow,
};
