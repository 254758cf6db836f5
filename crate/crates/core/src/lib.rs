//! Hybrid software cost estimation with a causal cost-overhead model.
//!
//! Experts describe how project characteristics (cost factors) inflate cost
//! above a nominal level; past-project data calibrates the nominal
//! productivity; simulation turns both into a cost distribution for a new
//! project. Around that core sit the quantitative checks that drive model
//! refinement: data validation, driver ranking, outlier and scope analysis,
//! leave-one-out evaluation and residual diagnosis.
//!
//! ```
//! use cobra::prelude::*;
//!
//! let model = CausalModel {
//!     factors: vec![CostFactor::new("volatility", "Requirements volatility")],
//!     direct: vec![DirectInfluence::new("volatility", TriangularParams::new(0.1, 0.3, 0.5))],
//!     interactions: vec![],
//! }
//! .validated()
//! .unwrap();
//! let ratings: RatingVector = [("volatility", 2)].into_iter().collect();
//! let plan = SamplePlan::latin_hypercube(1_000).unwrap();
//! let cost = estimate_cost(&model, &ratings, 40.0, 0.05, &plan, RandomSeed(7)).unwrap();
//! let budget = quantile(&cost, 0.7).unwrap();
//! assert!(exceedance_probability(&cost, budget).unwrap() <= 0.3);
//! ```

pub mod analysis;
pub mod calibration;
pub mod cli;
pub mod error;
pub mod estimation;
pub mod evaluation;
pub mod io;
pub mod model;
pub mod pipeline;
pub mod project;
pub mod sampling;
pub mod synthetic;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::analysis::{
        assess_expert_disagreement, detect_factor_associations, detect_outliers,
        empirical_overhead, find_group_separators, harmonize_effort_scope, rank_cost_drivers,
        validate_data, Candidate, FactorRanking, QualityConfig, RankingConfig, ScopePolicy,
    };
    pub use crate::calibration::{
        fit_nominal_productivity, mean_overhead, CalibrationPoint, CalibrationResult,
    };
    pub use crate::estimation::{
        estimate_cost, exceedance_probability, point_estimate, quantile, CostDistribution,
        EstimateConvention,
    };
    pub use crate::evaluation::{
        accuracy_metrics, compare_pre_post, loocv_evaluate, suggest_missing_drivers,
        EvaluationProject, EvaluationReport, RefinementSuggestion, SuggestionKind,
    };
    pub use crate::model::{
        evaluate_overhead, interpolation_weight, validate_model, CausalModel, CostFactor,
        DirectInfluence, Direction, InfluenceKey, InteractionInfluence, MultiplierDraw,
        OrdinalScale, RatingVector, Sign, TriangularParams,
    };
    pub use crate::pipeline::{
        apply_suggestions, check_stop_criterion, run_iteration, ApplyOutcome, IterationConfig,
        IterationReport, StopDecision,
    };
    pub use crate::project::{AttributeValue, ProjectRecord};
    pub use crate::sampling::{
        draw_uniforms, simulate_overhead, triangular_inverse_cdf, OverheadDistribution,
        RandomSeed, SampleMethod, SamplePlan,
    };
    pub use crate::synthetic::{
        generate_synthetic_dataset, reference_model, PlantedDefect, SyntheticDataset,
        SyntheticSpec,
    };
}
