//! One refinement iteration: validate the data, analyze it, calibrate and
//! evaluate the model, and collect suggestions for the next revision.
//!
//! The pipeline never changes its inputs. Suggestions are applied explicitly
//! with [`apply_suggestions`], which returns a new dataset revision.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::analysis::{
    assess_expert_disagreement, detect_factor_associations, detect_outliers,
    empirical_overhead, find_group_separators, harmonize_effort_scope, rank_cost_drivers,
    validate_data, Association, Candidate, DataQualityReport, DisagreementReport, FactorRanking,
    OutlierReport, QualityConfig, RankingConfig, ScopeHarmonization, ScopePolicy,
};
use crate::calibration::{fit_nominal_productivity, mean_overhead, CalibrationPoint, CalibrationResult};
use crate::error::{Error, Result};
use crate::estimation::EstimateConvention;
use crate::evaluation::{
    compare_pre_post, loocv_evaluate, simulate_projects, suggest_missing_drivers,
    AccuracyMetrics, Discrepancy, EvaluationProject, EvaluationReport, Evidence,
    ExcludedProject, RefinementSuggestion, SuggestionKind,
};
use crate::model::{validate_model, CausalModel};
use crate::project::ProjectRecord;
use crate::sampling::{RandomSeed, SamplePlan};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationConfig {
    pub plan: SamplePlan,
    pub seed: RandomSeed,
    /// Minimum |ρ| for a driver to count as supported.
    pub theta: f64,
    /// Significance level for driver selection and group separation.
    pub alpha: f64,
    /// Expert rating ranges above this many levels are flagged.
    pub delta: u32,
    /// Minimum |ρ| between two selected drivers to flag the pair.
    pub association_threshold: f64,
    pub permutations: usize,
    pub scope_policy: ScopePolicy,
    /// Refinement stops once LOOCV MMRE is at or below this.
    pub target_mmre: f64,
    pub convention: EstimateConvention,
    /// Attributes that measure parts of the product the size metric misses.
    pub size_components: BTreeSet<String>,
}

impl Default for IterationConfig {
    fn default() -> Self {
        Self {
            plan: SamplePlan::default(),
            seed: RandomSeed::default(),
            theta: 0.3,
            alpha: 0.05,
            delta: 1,
            association_threshold: 0.7,
            permutations: 10_000,
            scope_policy: ScopePolicy::Modal,
            target_mmre: 0.25,
            convention: EstimateConvention::Median,
            size_components: BTreeSet::new(),
        }
    }
}

impl IterationConfig {
    pub fn check(&self) -> Result<()> {
        if !(self.target_mmre.is_finite() && self.target_mmre > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "target MMRE must be positive, got {}",
                self.target_mmre
            )));
        }
        if self.plan.count == 0 {
            return Err(Error::EmptyPlan);
        }
        if !(0.0..=1.0).contains(&self.alpha) || !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::InvalidConfig("theta and alpha must lie in [0, 1]".into()));
        }
        Ok(())
    }

    fn ranking(&self, stream: &str) -> RankingConfig {
        RankingConfig {
            theta: self.theta,
            alpha: self.alpha,
            exact_limit: 8,
            permutations: self.permutations,
            seed: self.seed.derive(stream),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StopDecision {
    pub stop: bool,
    pub mmre: f64,
    pub target: f64,
    pub rationale: String,
}

pub fn check_stop_criterion(metrics: &AccuracyMetrics, config: &IterationConfig) -> StopDecision {
    let stop = metrics.mmre <= config.target_mmre;
    let rationale = if stop {
        format!(
            "MMRE {:.4} meets the target {:.4}; stop refining",
            metrics.mmre, config.target_mmre
        )
    } else {
        format!(
            "MMRE {:.4} exceeds the target {:.4}; continue refining",
            metrics.mmre, config.target_mmre
        )
    };
    StopDecision {
        stop,
        mmre: metrics.mmre,
        target: config.target_mmre,
        rationale,
    }
}

/// Everything one iteration found, in pipeline order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub config: IterationConfig,
    pub data_quality: DataQualityReport,
    pub scope: ScopeHarmonization,
    pub disagreement: DisagreementReport,
    /// Projects left out of calibration and evaluation, with the reason.
    pub excluded: Vec<ExcludedProject>,
    pub calibration: CalibrationResult,
    pub simulated_overheads: BTreeMap<String, f64>,
    pub empirical_overheads: BTreeMap<String, f64>,
    pub ranking: Option<FactorRanking>,
    pub associations: Vec<Association>,
    pub outliers: OutlierReport,
    pub evaluation: EvaluationReport,
    pub residual_ranking: Option<FactorRanking>,
    pub discrepancies: Vec<Discrepancy>,
    pub suggestions: Vec<RefinementSuggestion>,
    pub stop: StopDecision,
    pub diagnostics: Vec<String>,
}

impl IterationReport {
    /// True when `evidence` points at a finding contained in this report.
    pub fn resolves(&self, evidence: &Evidence) -> bool {
        match evidence {
            Evidence::ScopeDeviation { project } => {
                self.scope.deviations.iter().any(|d| &d.project_id == project)
            }
            Evidence::Outlier { project } => self
                .outliers
                .outliers
                .flagged
                .iter()
                .any(|f| &f.project_id == project),
            Evidence::GroupSeparator { attribute, level } => self
                .outliers
                .groups
                .separators
                .iter()
                .any(|s| &s.attribute == attribute && &s.level == level),
            Evidence::Disagreement { project, factor } => self
                .disagreement
                .flagged
                .iter()
                .any(|c| &c.project_id == project && &c.factor_id == factor),
            Evidence::ResidualRanking { candidate } => self
                .residual_ranking
                .as_ref()
                .is_some_and(|r| r.get(candidate).is_some()),
            Evidence::Discrepancy { index } => *index < self.discrepancies.len(),
        }
    }

    pub fn suggestions_of(&self, kind: SuggestionKind) -> impl Iterator<Item = &RefinementSuggestion> {
        self.suggestions.iter().filter(move |s| s.kind == kind)
    }
}

/// Numeric attributes present on every project, in name order.
fn numeric_attribute_candidates(
    records: &[&ProjectRecord],
    exclude: &BTreeSet<String>,
    diagnostics: &mut Vec<String>,
) -> Vec<Candidate> {
    let names: BTreeSet<&str> = records
        .iter()
        .flat_map(|p| p.attributes.keys().map(String::as_str))
        .collect();
    let mut out = Vec::new();
    for name in names {
        if exclude.contains(name) {
            diagnostics.push(format!(
                "attribute `{name}` shares its name with a model factor; not ranked"
            ));
            continue;
        }
        let values: Option<Vec<f64>> = records.iter().map(|p| p.numeric_attribute(name)).collect();
        match values {
            Some(values) => out.push(Candidate::attribute(name, values)),
            None => {
                let categorical = records.iter().any(|p| {
                    p.attributes.get(name).is_some_and(|v| v.as_f64().is_none())
                });
                if !categorical {
                    diagnostics.push(format!(
                        "attribute `{name}` is missing on some projects; not ranked"
                    ));
                }
            }
        }
    }
    out
}

/// Runs one refinement iteration over `projects`.
pub fn run_iteration(
    model: &CausalModel,
    projects: &[ProjectRecord],
    config: &IterationConfig,
) -> Result<IterationReport> {
    config.check()?;
    let violations = validate_model(model);
    if !violations.is_empty() {
        return Err(Error::InvalidModel(violations));
    }
    let mut diagnostics = Vec::new();

    let quality = QualityConfig {
        scope_policy: config.scope_policy.clone(),
        disagreement_threshold: config.delta,
    };
    let data_quality = validate_data(projects, Some(model), &quality);
    let scope = harmonize_effort_scope(projects, &config.scope_policy)?;
    let disagreement = assess_expert_disagreement(projects, model, config.delta);

    let used = model.used_factor_ids();
    let mut excluded = Vec::new();
    let mut seen = BTreeSet::new();
    let mut records: Vec<&ProjectRecord> = Vec::new();
    let mut usable: Vec<EvaluationProject> = Vec::new();
    for project in projects {
        let reason = if !seen.insert(project.id.as_str()) {
            Some("duplicate project id".to_string())
        } else if !project.size.is_some_and(|s| s.is_finite() && s > 0.0) {
            Some("size is missing or not positive".to_string())
        } else if !scope.totals.get(&project.id).is_some_and(|&e| e > 0.0) {
            Some("no positive effort within the common scope".to_string())
        } else {
            let ratings = disagreement.aggregated.get(&project.id);
            let missing: Vec<&str> = used
                .iter()
                .filter(|f| ratings.and_then(|r| r.get(f)).is_none())
                .map(String::as_str)
                .collect();
            (!missing.is_empty()).then(|| format!("no rating for {}", missing.join(", ")))
        };
        match reason {
            Some(reason) => excluded.push(ExcludedProject {
                project_id: project.id.clone(),
                reason,
            }),
            None => {
                records.push(project);
                usable.push(EvaluationProject {
                    id: project.id.clone(),
                    size: project.size.unwrap_or_default(),
                    effort: scope.totals[&project.id],
                    ratings: disagreement.aggregated[&project.id].clone(),
                });
            }
        }
    }

    // Simulation can still fail, e.g. for ratings outside a factor's scale.
    let mut simulated_overheads = BTreeMap::new();
    let mut kept = Vec::new();
    let simulations = simulate_projects(model, &usable, &config.plan, config.seed);
    for ((project, record), simulation) in usable.into_iter().zip(records).zip(simulations) {
        match simulation.and_then(|d| mean_overhead(&d)) {
            Ok(mean) => {
                simulated_overheads.insert(project.id.clone(), mean);
                kept.push((project, record));
            }
            Err(e) => excluded.push(ExcludedProject {
                project_id: project.id.clone(),
                reason: e.to_string(),
            }),
        }
    }
    let (usable, records): (Vec<EvaluationProject>, Vec<&ProjectRecord>) = kept.into_iter().unzip();
    if usable.len() < 3 {
        return Err(Error::InsufficientProjects {
            needed: 3,
            got: usable.len(),
        });
    }

    let points: Vec<CalibrationPoint> = usable
        .iter()
        .map(|p| CalibrationPoint::new(&p.id, p.size, p.effort, simulated_overheads[&p.id]))
        .collect();
    let calibration = fit_nominal_productivity(&points)?;

    let empirical_overheads: BTreeMap<String, f64> = usable
        .iter()
        .map(|p| {
            empirical_overhead(p.effort, p.size, calibration.nominal_productivity)
                .map(|co| (p.id.clone(), co))
        })
        .collect::<Result<_>>()?;
    let target: Vec<f64> = usable.iter().map(|p| empirical_overheads[&p.id]).collect();

    let mut candidates: Vec<Candidate> = used
        .iter()
        .map(|factor| {
            Candidate::factor(
                factor,
                usable
                    .iter()
                    .map(|p| f64::from(p.ratings.get(factor).unwrap_or_default()))
                    .collect(),
            )
        })
        .collect();
    let attributes = numeric_attribute_candidates(&records, &used, &mut diagnostics);
    candidates.extend(attributes.iter().cloned());

    let ranking = if usable.len() >= 4 {
        Some(rank_cost_drivers(&candidates, &target, &config.ranking("pre-modeling"))?)
    } else {
        diagnostics.push("fewer than four projects; driver ranking skipped".into());
        None
    };
    let associations = match &ranking {
        Some(r) => {
            let selected: Vec<Candidate> = candidates
                .iter()
                .filter(|c| r.get(&c.id).is_some_and(|e| e.selected))
                .cloned()
                .collect();
            detect_factor_associations(&selected, config.association_threshold)
        }
        None => Vec::new(),
    };

    let productivity: Vec<(String, f64)> = usable
        .iter()
        .map(|p| (p.id.clone(), calibration.per_project_nominal[&p.id]))
        .collect();
    let outliers = OutlierReport {
        outliers: detect_outliers(&productivity),
        groups: find_group_separators(
            &records.iter().map(|r| (*r).clone()).collect::<Vec<_>>(),
            &calibration.per_project_nominal,
            config.alpha,
        ),
    };

    let evaluation = loocv_evaluate(model, &usable, &config.plan, config.seed, config.convention)?;

    let residuals: Vec<f64> = usable
        .iter()
        .map(|p| empirical_overheads[&p.id] - simulated_overheads[&p.id])
        .collect();
    let residual = if usable.len() >= 4 {
        Some(suggest_missing_drivers(
            &residuals,
            &attributes,
            &used,
            &config.size_components,
            &config.ranking("post-modeling"),
        )?)
    } else {
        None
    };

    let comparison = ranking
        .as_ref()
        .map(|r| compare_pre_post(r, model))
        .unwrap_or_default();

    let mut suggestions = Vec::new();
    for deviation in &scope.deviations {
        let missing: Vec<&str> = deviation.missing_phases.iter().map(String::as_str).collect();
        suggestions.push(RefinementSuggestion {
            kind: SuggestionKind::FixEffortScope,
            subject: deviation.project_id.clone(),
            evidence: Evidence::ScopeDeviation {
                project: deviation.project_id.clone(),
            },
            rationale: format!(
                "effort for {} was not measured; restrict all projects to consistently measured phases",
                missing.join(", ")
            ),
        });
    }
    // A project whose effort misses phases looks productive for that reason
    // alone; fixing the scope comes before judging it an outlier.
    let deviants: BTreeSet<&str> = scope.deviating_ids().into_iter().collect();
    for flagged in &outliers.outliers.flagged {
        if deviants.contains(flagged.project_id.as_str()) {
            diagnostics.push(format!(
                "{} is a productivity outlier but also lacks phases; fix the scope first",
                flagged.project_id
            ));
            continue;
        }
        suggestions.push(RefinementSuggestion {
            kind: SuggestionKind::RemoveOutlier,
            subject: flagged.project_id.clone(),
            evidence: Evidence::Outlier {
                project: flagged.project_id.clone(),
            },
            rationale: format!(
                "nominal productivity {:.6} lies outside the Tukey fences",
                flagged.value
            ),
        });
    }
    for cell in &disagreement.flagged {
        suggestions.push(RefinementSuggestion {
            kind: SuggestionKind::ReElicitRatings,
            subject: format!("{}/{}", cell.project_id, cell.factor_id),
            evidence: Evidence::Disagreement {
                project: cell.project_id.clone(),
                factor: cell.factor_id.clone(),
            },
            rationale: format!(
                "expert ratings span {} levels; agree on a common rating",
                cell.range
            ),
        });
    }
    for separator in &outliers.groups.separators {
        suggestions.push(RefinementSuggestion {
            kind: SuggestionKind::AddCandidateFactor,
            subject: separator.attribute.clone(),
            evidence: Evidence::GroupSeparator {
                attribute: separator.attribute.clone(),
                level: separator.level.clone(),
            },
            rationale: format!(
                "projects with {} = {} differ in productivity (p = {:.4})",
                separator.attribute, separator.level, separator.p_value
            ),
        });
    }
    if let Some(residual) = &residual {
        suggestions.extend(residual.suggestions.iter().cloned());
    }
    suggestions.extend(comparison.suggestions.iter().cloned());

    let mut seen = BTreeSet::new();
    suggestions.retain(|s| seen.insert((s.kind, s.subject.clone())));

    let stop = check_stop_criterion(&evaluation.metrics, config);

    Ok(IterationReport {
        config: config.clone(),
        data_quality,
        scope,
        disagreement,
        excluded,
        calibration,
        simulated_overheads,
        empirical_overheads,
        ranking,
        associations,
        outliers,
        evaluation,
        residual_ranking: residual.and_then(|r| r.ranking),
        discrepancies: comparison.discrepancies,
        suggestions,
        stop,
        diagnostics,
    })
}

/// A suggestion that was not turned into a data change, and why.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedSuggestion {
    pub suggestion: RefinementSuggestion,
    pub reason: String,
}

/// The dataset revision produced by [`apply_suggestions`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApplyOutcome {
    pub projects: Vec<ProjectRecord>,
    pub applied: Vec<RefinementSuggestion>,
    pub skipped: Vec<SkippedSuggestion>,
}

/// Expert name under which re-elicited consensus ratings are stored.
pub const CONSENSUS_EXPERT: &str = "consensus";

/// Applies the suggestions of the given kinds to a copy of `projects`.
///
/// * `remove_outlier` drops the project.
/// * `fix_effort_scope` keeps, in every project, only the phases that all
///   projects measured.
/// * `re_elicit_ratings` replaces the disputed cell with a single consensus
///   rating (the lower median of the experts).
///
/// Suggestions that change the model (`add_candidate_factor`,
/// `refine_size_metric`) are reported as skipped. So are suggestions whose
/// evidence is not in `report`.
pub fn apply_suggestions(
    projects: &[ProjectRecord],
    report: &IterationReport,
    kinds: &[SuggestionKind],
) -> ApplyOutcome {
    let mut revised = projects.to_vec();
    let mut applied = Vec::new();
    let mut skipped = Vec::new();
    let mut scope_fixed = false;

    for suggestion in &report.suggestions {
        if !kinds.contains(&suggestion.kind) {
            continue;
        }
        let skip = |reason: &str| SkippedSuggestion {
            suggestion: suggestion.clone(),
            reason: reason.to_string(),
        };
        if !report.resolves(&suggestion.evidence) {
            skipped.push(skip("evidence not found in the report"));
            continue;
        }
        match (&suggestion.kind, &suggestion.evidence) {
            (SuggestionKind::RemoveOutlier, Evidence::Outlier { project }) => {
                let before = revised.len();
                revised.retain(|p| &p.id != project);
                if revised.len() < before {
                    applied.push(suggestion.clone());
                } else {
                    skipped.push(skip("project not in the dataset"));
                }
            }
            (SuggestionKind::FixEffortScope, Evidence::ScopeDeviation { .. }) => {
                if !scope_fixed {
                    match harmonize_effort_scope(&revised, &ScopePolicy::Intersection) {
                        Ok(h) => {
                            for p in &mut revised {
                                p.phase_efforts.retain(|phase, _| h.common_scope.contains(phase));
                            }
                            scope_fixed = true;
                        }
                        Err(e) => {
                            skipped.push(skip(&e.to_string()));
                            continue;
                        }
                    }
                }
                applied.push(suggestion.clone());
            }
            (SuggestionKind::ReElicitRatings, Evidence::Disagreement { project, factor }) => {
                let cell = report
                    .disagreement
                    .flagged
                    .iter()
                    .find(|c| &c.project_id == project && &c.factor_id == factor);
                match (cell, revised.iter_mut().find(|p| &p.id == project)) {
                    (Some(cell), Some(record)) => {
                        for ratings in record.ratings.values_mut() {
                            ratings.remove(factor);
                        }
                        record.ratings.retain(|_, r| !r.is_empty());
                        record
                            .ratings
                            .entry(CONSENSUS_EXPERT.to_string())
                            .or_default()
                            .insert(factor.clone(), cell.aggregate);
                        applied.push(suggestion.clone());
                    }
                    _ => skipped.push(skip("project not in the dataset")),
                }
            }
            (SuggestionKind::AddCandidateFactor | SuggestionKind::RefineSizeMetric, _) => {
                skipped.push(skip("changes the model; revise the model document instead"))
            }
            _ => skipped.push(skip("no data change is defined for this evidence")),
        }
    }

    ApplyOutcome {
        projects: revised,
        applied,
        skipped,
    }
}
