//! Post-modeling analysis: leave-one-out evaluation, accuracy metrics,
//! residual diagnosis and the comparison of the model against the data-driven
//! driver ranking.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::analysis::{rank_cost_drivers, Candidate, FactorRanking, RankingConfig};
use crate::calibration::{fit_nominal_productivity, mean_overhead, CalibrationPoint};
use crate::error::{Error, Result};
use crate::estimation::{point_estimate_with, CostDistribution, EstimateConvention};
use crate::model::{CausalModel, RatingVector};
use crate::sampling::{simulate_overhead, OverheadDistribution, RandomSeed, SamplePlan};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracyMetrics {
    pub count: usize,
    pub mmre: f64,
    pub mdmre: f64,
    pub pred25: f64,
    /// Sample standard deviation of the signed relative errors.
    pub consistency: f64,
}

/// MMRE, MdMRE (lower median), Pred(0.25) and the spread of signed errors.
pub fn accuracy_metrics(actuals: &[f64], estimates: &[f64]) -> Result<AccuracyMetrics> {
    if actuals.len() != estimates.len() {
        return Err(Error::LengthMismatch(format!(
            "{} actuals, {} estimates",
            actuals.len(),
            estimates.len()
        )));
    }
    if actuals.is_empty() {
        return Err(Error::InsufficientProjects { needed: 1, got: 0 });
    }
    if let Some(bad) = actuals.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
        return Err(Error::InvalidConfig(format!(
            "actual effort must be positive, got {bad}"
        )));
    }
    let signed: Vec<f64> = actuals
        .iter()
        .zip(estimates)
        .map(|(a, e)| (e - a) / a)
        .collect();
    let mut mre: Vec<f64> = signed.iter().map(|s| s.abs()).collect();
    let n = mre.len();
    let mmre = mre.iter().sum::<f64>() / n as f64;
    let pred25 = mre.iter().filter(|&&m| m <= 0.25).count() as f64 / n as f64;
    mre.sort_by(f64::total_cmp);
    let mdmre = mre[(n - 1) / 2];
    let consistency = if n < 2 {
        0.0
    } else {
        let mean = signed.iter().sum::<f64>() / n as f64;
        (signed.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    };
    Ok(AccuracyMetrics {
        count: n,
        mmre,
        mdmre,
        pred25,
        consistency,
    })
}

/// A project ready for evaluation: harmonized effort and consensus ratings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationProject {
    pub id: String,
    pub size: f64,
    pub effort: f64,
    pub ratings: RatingVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub project_id: String,
    pub actual: f64,
    pub estimate: f64,
    pub mre: f64,
    pub signed_error: f64,
    /// Nominal productivity calibrated without this project.
    pub nominal_productivity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcludedProject {
    pub project_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub folds: Vec<FoldResult>,
    pub metrics: AccuracyMetrics,
    pub calibrations: usize,
    pub convention: EstimateConvention,
    pub excluded: Vec<ExcludedProject>,
}

/// Simulated overhead per project, each from its own sub-seed.
pub fn simulate_projects(
    model: &CausalModel,
    projects: &[EvaluationProject],
    plan: &SamplePlan,
    seed: RandomSeed,
) -> Vec<Result<OverheadDistribution>> {
    projects
        .iter()
        .map(|p| simulate_overhead(model, &p.ratings, plan, seed.derive(&p.id)))
        .collect()
}

/// Leave-one-out evaluation: every project is estimated by a model whose
/// nominal productivity was calibrated on all other projects.
pub fn loocv_evaluate(
    model: &CausalModel,
    projects: &[EvaluationProject],
    plan: &SamplePlan,
    seed: RandomSeed,
    convention: EstimateConvention,
) -> Result<EvaluationReport> {
    if projects.len() < 3 {
        return Err(Error::InsufficientProjects {
            needed: 3,
            got: projects.len(),
        });
    }

    let mut excluded = Vec::new();
    let mut usable: Vec<(&EvaluationProject, OverheadDistribution, f64)> = Vec::new();
    for (project, sim) in projects
        .iter()
        .zip(simulate_projects(model, projects, plan, seed))
    {
        let prepared = sim.and_then(|dist| {
            if !(project.size > 0.0 && project.effort > 0.0) {
                return Err(Error::InvalidProject {
                    id: project.id.clone(),
                    reason: "size and effort must be positive".into(),
                });
            }
            let mean = mean_overhead(&dist)?;
            Ok((dist, mean))
        });
        match prepared {
            Ok((dist, mean)) => usable.push((project, dist, mean)),
            Err(e) => excluded.push(ExcludedProject {
                project_id: project.id.clone(),
                reason: e.to_string(),
            }),
        }
    }
    if usable.len() < 3 {
        return Err(Error::InsufficientProjects {
            needed: 3,
            got: usable.len(),
        });
    }

    let points: Vec<CalibrationPoint> = usable
        .iter()
        .map(|(p, _, mean)| CalibrationPoint::new(&p.id, p.size, p.effort, *mean))
        .collect();

    let mut folds = Vec::with_capacity(usable.len());
    let mut calibrations = 0;
    for (k, (project, dist, _)) in usable.iter().enumerate() {
        let training: Vec<CalibrationPoint> = points
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != k)
            .map(|(_, p)| p.clone())
            .collect();
        calibrations += 1;
        let fold = fit_nominal_productivity(&training).and_then(|fit| {
            let cost = CostDistribution::from_overhead(dist, project.size, fit.nominal_productivity)?;
            let estimate = point_estimate_with(&cost, convention)?;
            Ok((fit.nominal_productivity, estimate))
        });
        match fold {
            Ok((nominal_productivity, estimate)) => {
                let signed_error = (estimate - project.effort) / project.effort;
                folds.push(FoldResult {
                    project_id: project.id.clone(),
                    actual: project.effort,
                    estimate,
                    mre: signed_error.abs(),
                    signed_error,
                    nominal_productivity,
                });
            }
            Err(e) => excluded.push(ExcludedProject {
                project_id: project.id.clone(),
                reason: e.to_string(),
            }),
        }
    }

    let actuals: Vec<f64> = folds.iter().map(|f| f.actual).collect();
    let estimates: Vec<f64> = folds.iter().map(|f| f.estimate).collect();
    let metrics = accuracy_metrics(&actuals, &estimates)?;
    Ok(EvaluationReport {
        folds,
        metrics,
        calibrations,
        convention,
        excluded,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuggestionKind {
    RemoveOutlier,
    FixEffortScope,
    ReElicitRatings,
    AddCandidateFactor,
    RefineSizeMetric,
}

impl fmt::Display for SuggestionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SuggestionKind::RemoveOutlier => "remove_outlier",
            SuggestionKind::FixEffortScope => "fix_effort_scope",
            SuggestionKind::ReElicitRatings => "re_elicit_ratings",
            SuggestionKind::AddCandidateFactor => "add_candidate_factor",
            SuggestionKind::RefineSizeMetric => "refine_size_metric",
        })
    }
}

impl std::str::FromStr for SuggestionKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "remove_outlier" => SuggestionKind::RemoveOutlier,
            "fix_effort_scope" => SuggestionKind::FixEffortScope,
            "re_elicit_ratings" => SuggestionKind::ReElicitRatings,
            "add_candidate_factor" => SuggestionKind::AddCandidateFactor,
            "refine_size_metric" => SuggestionKind::RefineSizeMetric,
            other => return Err(format!("unknown suggestion kind `{other}`")),
        })
    }
}

/// Where in an iteration report a suggestion's justification lives.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum Evidence {
    ScopeDeviation { project: String },
    Outlier { project: String },
    GroupSeparator { attribute: String, level: String },
    Disagreement { project: String, factor: String },
    ResidualRanking { candidate: String },
    Discrepancy { index: usize },
}

impl fmt::Display for Evidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Evidence::ScopeDeviation { project } => write!(f, "scope deviation of {project}"),
            Evidence::Outlier { project } => write!(f, "productivity outlier {project}"),
            Evidence::GroupSeparator { attribute, level } => {
                write!(f, "group separator {attribute}={level}")
            }
            Evidence::Disagreement { project, factor } => {
                write!(f, "expert disagreement on {factor} in {project}")
            }
            Evidence::ResidualRanking { candidate } => {
                write!(f, "residual ranking entry {candidate}")
            }
            Evidence::Discrepancy { index } => write!(f, "model/data discrepancy #{index}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementSuggestion {
    pub kind: SuggestionKind,
    pub subject: String,
    pub evidence: Evidence,
    pub rationale: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualAnalysis {
    pub ranking: Option<FactorRanking>,
    pub suggestions: Vec<RefinementSuggestion>,
}

/// Residuals this close to zero count as fully explained.
const RESIDUAL_EPS: f64 = 1e-9;

/// Ranks unused attributes against the overhead the model leaves
/// unexplained. Attributes listed in `size_components` describe parts of the
/// product not counted by the size measure, so they suggest refining the size
/// metric instead of adding a factor.
pub fn suggest_missing_drivers(
    residuals: &[f64],
    attributes: &[Candidate],
    modeled: &BTreeSet<String>,
    size_components: &BTreeSet<String>,
    config: &RankingConfig,
) -> Result<ResidualAnalysis> {
    if residuals.len() < 4 {
        return Err(Error::InsufficientProjects {
            needed: 4,
            got: residuals.len(),
        });
    }
    let unused: Vec<Candidate> = attributes
        .iter()
        .filter(|c| !modeled.contains(&c.id))
        .cloned()
        .collect();
    if unused.is_empty() {
        return Ok(ResidualAnalysis {
            ranking: None,
            suggestions: Vec::new(),
        });
    }
    // Rounding noise from a model that explains the data must not look like signal.
    let residuals: Vec<f64> = residuals
        .iter()
        .map(|&r| if r.abs() <= RESIDUAL_EPS { 0.0 } else { r })
        .collect();
    let ranking = rank_cost_drivers(&unused, &residuals, config)?;
    let suggestions = ranking
        .selected()
        .map(|entry| {
            let rho = entry.rho.unwrap_or_default();
            let p = entry.p_value.unwrap_or_default();
            let kind = if size_components.contains(&entry.id) {
                SuggestionKind::RefineSizeMetric
            } else {
                SuggestionKind::AddCandidateFactor
            };
            RefinementSuggestion {
                kind,
                subject: entry.id.clone(),
                evidence: Evidence::ResidualRanking {
                    candidate: entry.id.clone(),
                },
                rationale: format!(
                    "explains overhead left by the model (rho = {rho:.3}, p = {p:.4})"
                ),
            }
        })
        .collect();
    Ok(ResidualAnalysis {
        ranking: Some(ranking),
        suggestions,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscrepancyKind {
    /// Significant in the data, absent from the model.
    MissingFromModel,
    /// In the model without support from the data.
    Unsupported,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub kind: DiscrepancyKind,
    pub candidate: String,
    pub rho: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PrePostComparison {
    pub discrepancies: Vec<Discrepancy>,
    pub suggestions: Vec<RefinementSuggestion>,
}

/// Compares the driver ranking with the factors the model actually uses.
pub fn compare_pre_post(ranking: &FactorRanking, model: &CausalModel) -> PrePostComparison {
    let modeled = model.used_factor_ids();
    let mut out = PrePostComparison::default();

    for entry in ranking.selected() {
        if !modeled.contains(&entry.id) {
            out.discrepancies.push(Discrepancy {
                kind: DiscrepancyKind::MissingFromModel,
                candidate: entry.id.clone(),
                rho: entry.rho,
            });
        }
    }
    for factor in &modeled {
        let rho = ranking.get(factor).and_then(|e| e.rho);
        let supported = rho.is_some_and(|r| r.abs() >= ranking.theta);
        if !supported {
            out.discrepancies.push(Discrepancy {
                kind: DiscrepancyKind::Unsupported,
                candidate: factor.clone(),
                rho,
            });
        }
    }

    out.suggestions = out
        .discrepancies
        .iter()
        .enumerate()
        .map(|(index, d)| {
            let rho = d
                .rho
                .map_or_else(|| "undefined".to_string(), |r| format!("{r:.3}"));
            match d.kind {
                DiscrepancyKind::MissingFromModel => RefinementSuggestion {
                    kind: SuggestionKind::AddCandidateFactor,
                    subject: d.candidate.clone(),
                    evidence: Evidence::Discrepancy { index },
                    rationale: format!("significant in the data (rho = {rho}) but not modeled"),
                },
                DiscrepancyKind::Unsupported => RefinementSuggestion {
                    kind: SuggestionKind::ReElicitRatings,
                    subject: d.candidate.clone(),
                    evidence: Evidence::Discrepancy { index },
                    rationale: format!(
                        "modeled but not supported by the data (rho = {rho}); review its ratings and scale"
                    ),
                },
            }
        })
        .collect();
    out
}

/// Per-project residual overhead: empirical minus simulated mean.
pub fn residual_overheads(
    empirical: &BTreeMap<String, f64>,
    modeled: &BTreeMap<String, f64>,
) -> BTreeMap<String, f64> {
    empirical
        .iter()
        .filter_map(|(id, e)| modeled.get(id).map(|m| (id.clone(), e - m)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{CandidateKind, RankedCandidate};
    use crate::model::{CostFactor, DirectInfluence, TriangularParams};

    #[test]
    fn metrics_examples() {
        let m = accuracy_metrics(&[100.0, 200.0], &[110.0, 180.0]).unwrap();
        assert!((m.mmre - 0.10).abs() < 1e-12);
        assert!((m.mdmre - 0.10).abs() < 1e-12);
        assert_eq!(m.pred25, 1.0);

        let m = accuracy_metrics(&[3.0, 5.0, 8.0], &[3.0, 5.0, 8.0]).unwrap();
        assert_eq!((m.mmre, m.mdmre, m.consistency, m.pred25), (0.0, 0.0, 0.0, 1.0));

        let m = accuracy_metrics(&[3.0, 5.0, 8.0], &[6.0, 10.0, 16.0]).unwrap();
        assert_eq!(m.mmre, 1.0);
        assert_eq!(m.consistency, 0.0);
        assert_eq!(m.pred25, 0.0);

        assert!(accuracy_metrics(&[0.0], &[1.0]).is_err());
        assert!(accuracy_metrics(&[1.0, 2.0], &[1.0]).is_err());
    }

    fn model() -> CausalModel {
        CausalModel {
            factors: vec![CostFactor::new("f", "F"), CostFactor::new("g", "G")],
            direct: vec![
                DirectInfluence::new("f", TriangularParams::degenerate(0.4)),
                DirectInfluence::new("g", TriangularParams::degenerate(0.2)),
            ],
            interactions: vec![],
        }
    }

    fn noiseless(productivity: f64) -> Vec<EvaluationProject> {
        [(10.0, 0, 1), (25.0, 3, 0), (40.0, 1, 3), (18.0, 2, 2), (33.0, 3, 3)]
            .iter()
            .enumerate()
            .map(|(k, &(size, f, g))| {
                let co = 0.4 * f64::from(f) / 3.0 + 0.2 * f64::from(g) / 3.0;
                EvaluationProject {
                    id: format!("p{k}"),
                    size,
                    effort: size / productivity * (1.0 + co),
                    ratings: [("f", f), ("g", g)].into_iter().collect(),
                }
            })
            .collect()
    }

    #[test]
    fn loocv_on_noiseless_data_is_exact() {
        let plan = SamplePlan::latin_hypercube(50).unwrap();
        let report = loocv_evaluate(
            &model(),
            &noiseless(0.8),
            &plan,
            RandomSeed(1),
            EstimateConvention::Median,
        )
        .unwrap();
        assert_eq!(report.calibrations, 5);
        assert_eq!(report.folds.len(), 5);
        assert!(report.metrics.mmre < 1e-12, "{}", report.metrics.mmre);
    }

    #[test]
    fn one_corrupted_effort_mostly_hurts_its_own_fold() {
        let plan = SamplePlan::latin_hypercube(50).unwrap();
        let mut projects = noiseless(0.8);
        projects[0].effort *= 2.0;
        let report =
            loocv_evaluate(&model(), &projects, &plan, RandomSeed(1), Default::default()).unwrap();
        let worst = report
            .folds
            .iter()
            .max_by(|a, b| a.mre.total_cmp(&b.mre))
            .unwrap();
        assert_eq!(worst.project_id, "p0");
        assert!(worst.mre > 0.4);
        for fold in report.folds.iter().filter(|f| f.project_id != "p0") {
            // other folds only see the shifted slope
            let expected = 0.8 / fold.nominal_productivity - 1.0;
            assert!((fold.signed_error - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn loocv_needs_three_projects() {
        let plan = SamplePlan::latin_hypercube(10).unwrap();
        let projects = noiseless(1.0)[..2].to_vec();
        assert!(loocv_evaluate(&model(), &projects, &plan, RandomSeed(0), Default::default())
            .is_err());
    }

    #[test]
    fn missing_driver_suggestions() {
        let residuals = [0.0, 0.1, 0.2, 0.3];
        let attrs = [
            Candidate::attribute("gui_size", vec![1.0, 2.0, 3.0, 4.0]),
            Candidate::attribute("f", vec![1.0, 2.0, 3.0, 4.0]),
        ];
        let modeled: BTreeSet<String> = ["f".to_string()].into();
        let config = RankingConfig {
            alpha: 0.1,
            ..Default::default()
        };
        let out =
            suggest_missing_drivers(&residuals, &attrs, &modeled, &BTreeSet::new(), &config)
                .unwrap();
        let ranking = out.ranking.unwrap();
        assert_eq!(ranking.entries.len(), 1);
        assert_eq!(ranking.entries[0].rho, Some(1.0));
        assert_eq!(out.suggestions.len(), 1);
        assert_eq!(out.suggestions[0].kind, SuggestionKind::AddCandidateFactor);
        assert_eq!(out.suggestions[0].subject, "gui_size");

        let sizes: BTreeSet<String> = ["gui_size".to_string()].into();
        let out = suggest_missing_drivers(&residuals, &attrs, &modeled, &sizes, &config).unwrap();
        assert_eq!(out.suggestions[0].kind, SuggestionKind::RefineSizeMetric);

        let flat = suggest_missing_drivers(&[0.0; 4], &attrs, &modeled, &BTreeSet::new(), &config)
            .unwrap();
        assert!(flat.suggestions.is_empty());
    }

    fn entry(id: &str, rho: Option<f64>, selected: bool) -> RankedCandidate {
        RankedCandidate {
            id: id.into(),
            kind: CandidateKind::Factor,
            rho,
            p_value: rho.map(|_| 0.01),
            method: None,
            selected,
            diagnostic: None,
        }
    }

    #[test]
    fn pre_post_comparison() {
        let ranking = FactorRanking {
            entries: vec![
                entry("f", Some(0.8), true),
                entry("new", Some(0.7), true),
                entry("g", Some(0.05), false),
            ],
            theta: 0.3,
            alpha: 0.05,
        };
        let out = compare_pre_post(&ranking, &model());
        let kinds: Vec<_> = out
            .suggestions
            .iter()
            .map(|s| (s.kind, s.subject.as_str()))
            .collect();
        assert_eq!(
            kinds,
            vec![
                (SuggestionKind::AddCandidateFactor, "new"),
                (SuggestionKind::ReElicitRatings, "g"),
            ]
        );

        let agree = FactorRanking {
            entries: vec![entry("f", Some(0.8), true), entry("g", Some(0.6), true)],
            theta: 0.3,
            alpha: 0.05,
        };
        assert!(compare_pre_post(&agree, &model()).discrepancies.is_empty());
    }
}
