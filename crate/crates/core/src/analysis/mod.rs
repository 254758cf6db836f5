//! Pre-modeling analysis: data validation, driver ranking, outliers and
//! expert disagreement.

pub mod experts;
pub mod outliers;
pub mod quality;
pub mod ranking;
pub mod stats;

pub use experts::{assess_expert_disagreement, DisagreementCell, DisagreementReport};
pub use outliers::{
    detect_outliers, find_group_separators, GroupSeparation, GroupSeparator, OutlierDetection,
    OutlierReport, TukeyFences,
};
pub use quality::{
    harmonize_effort_scope, validate_data, DataQualityReport, Finding, FindingCategory,
    QualityConfig, ScopeDeviation, ScopeHarmonization, ScopePolicy,
};
pub use ranking::{
    detect_factor_associations, empirical_overhead, rank_cost_drivers, Association, Candidate,
    CandidateKind, FactorRanking, RankedCandidate, RankingConfig,
};
