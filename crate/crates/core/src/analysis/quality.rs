//! Input data validation and effort-scope harmonization.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::CausalModel;
use crate::project::ProjectRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FindingCategory {
    Completeness,
    Consistency,
    Correctness,
}

impl fmt::Display for FindingCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FindingCategory::Completeness => "completeness",
            FindingCategory::Consistency => "consistency",
            FindingCategory::Correctness => "correctness",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub project_id: String,
    pub field: String,
    pub category: FindingCategory,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DataQualityReport {
    pub findings: Vec<Finding>,
}

impl DataQualityReport {
    pub fn is_empty(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn for_project<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a Finding> + 'a {
        self.findings.iter().filter(move |f| f.project_id == id)
    }

    pub fn in_category(&self, category: FindingCategory) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(move |f| f.category == category)
    }
}

/// Which phases make up the common effort scope.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScopePolicy {
    /// Phases measured by a strict majority of projects. Projects lacking one
    /// of them are deviations and their totals stay short until the data is
    /// fixed.
    #[default]
    Modal,
    /// Phases measured by every project; the consistently measured scope.
    Intersection,
    /// A fixed phase set.
    Explicit(BTreeSet<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScopeDeviation {
    pub project_id: String,
    pub missing_phases: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScopeHarmonization {
    pub policy: ScopePolicy,
    pub common_scope: BTreeSet<String>,
    /// Effort over the common scope, for every project with measured phases.
    pub totals: BTreeMap<String, f64>,
    pub deviations: Vec<ScopeDeviation>,
}

impl ScopeHarmonization {
    pub fn deviating_ids(&self) -> Vec<&str> {
        self.deviations.iter().map(|d| d.project_id.as_str()).collect()
    }
}

pub fn harmonize_effort_scope(
    projects: &[ProjectRecord],
    policy: &ScopePolicy,
) -> Result<ScopeHarmonization> {
    if projects.is_empty() {
        return Err(Error::InsufficientProjects { needed: 1, got: 0 });
    }
    let measured: Vec<&ProjectRecord> = projects
        .iter()
        .filter(|p| !p.phase_efforts.is_empty())
        .collect();

    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for p in &measured {
        for phase in p.phases() {
            *counts.entry(phase).or_default() += 1;
        }
    }
    let modal: BTreeSet<String> = counts
        .iter()
        .filter(|(_, &c)| 2 * c > measured.len())
        .map(|(phase, _)| phase.to_string())
        .collect();

    let common_scope: BTreeSet<String> = match policy {
        ScopePolicy::Modal => modal.clone(),
        ScopePolicy::Intersection => counts
            .iter()
            .filter(|(_, &c)| c == measured.len())
            .map(|(phase, _)| phase.to_string())
            .collect(),
        ScopePolicy::Explicit(phases) => phases.clone(),
    };
    if common_scope.is_empty() {
        return Err(Error::EmptyScope);
    }

    // A deviation is a project that lacks a phase the organization usually
    // measures (or that the explicit policy asks for).
    let expected = match policy {
        ScopePolicy::Explicit(phases) => phases,
        _ => &modal,
    };
    let deviations = measured
        .iter()
        .filter_map(|p| {
            let missing: BTreeSet<String> = expected
                .iter()
                .filter(|phase| !p.phase_efforts.contains_key(*phase))
                .cloned()
                .collect();
            (!missing.is_empty()).then(|| ScopeDeviation {
                project_id: p.id.clone(),
                missing_phases: missing,
            })
        })
        .collect();

    let totals = measured
        .iter()
        .map(|p| (p.id.clone(), p.effort_in_scope(&common_scope)))
        .collect();

    Ok(ScopeHarmonization {
        policy: policy.clone(),
        common_scope,
        totals,
        deviations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityConfig {
    pub scope_policy: ScopePolicy,
    /// Expert rating ranges above this many levels are inconsistent.
    pub disagreement_threshold: u32,
}

impl Default for QualityConfig {
    fn default() -> Self {
        Self {
            scope_policy: ScopePolicy::Modal,
            disagreement_threshold: 1,
        }
    }
}

/// Completeness, correctness and consistency checks over the dataset.
/// Ratings are checked against `model` when one is given.
pub fn validate_data(
    projects: &[ProjectRecord],
    model: Option<&CausalModel>,
    config: &QualityConfig,
) -> DataQualityReport {
    use FindingCategory::*;

    let mut findings = Vec::new();
    let mut push = |project: &ProjectRecord, field: String, category, message: String| {
        findings.push(Finding {
            project_id: project.id.clone(),
            field,
            category,
            message,
        })
    };

    let mut seen = BTreeSet::new();
    let used = model.map(CausalModel::used_factor_ids).unwrap_or_default();

    let scope = harmonize_effort_scope(projects, &config.scope_policy).ok();

    for project in projects {
        if !seen.insert(project.id.as_str()) {
            push(project, "project_id".into(), Consistency, "duplicate project id".into());
        }

        match project.size {
            None => push(project, "size".into(), Completeness, "size is missing".into()),
            Some(size) if !(size.is_finite() && size > 0.0) => push(
                project,
                "size".into(),
                Correctness,
                format!("size must be positive, got {size}"),
            ),
            Some(_) => {}
        }

        if project.phase_efforts.is_empty() {
            push(project, "effort".into(), Completeness, "no phase effort is measured".into());
        }
        for (phase, &effort) in &project.phase_efforts {
            if !(effort.is_finite() && effort >= 0.0) {
                push(
                    project,
                    format!("effort_{phase}"),
                    Correctness,
                    format!("effort must be non-negative, got {effort}"),
                );
            }
        }

        if project.ratings.is_empty() {
            push(project, "ratings".into(), Completeness, "no expert ratings".into());
        }
        for factor in &used {
            if !project.ratings.is_empty() && project.expert_ratings(factor).is_empty() {
                push(
                    project,
                    format!("factor_{factor}"),
                    Completeness,
                    "no expert rated this factor".into(),
                );
            }
        }
        if let Some(model) = model {
            for (expert, ratings) in &project.ratings {
                for (factor, rating) in ratings.iter() {
                    let field = format!("factor_{factor}_expert_{expert}");
                    match model.factor(factor) {
                        None => push(
                            project,
                            field,
                            Correctness,
                            "rating for an undeclared factor".into(),
                        ),
                        Some(f) if rating > f.scale.level_count() => push(
                            project,
                            field,
                            Correctness,
                            format!(
                                "rating {rating} is outside the scale 0..={}",
                                f.scale.level_count()
                            ),
                        ),
                        Some(_) => {}
                    }
                }
            }
        }

        if let Some(deviation) = scope
            .as_ref()
            .and_then(|s| s.deviations.iter().find(|d| d.project_id == project.id))
        {
            let phases: Vec<&str> = deviation.missing_phases.iter().map(String::as_str).collect();
            push(
                project,
                "effort".into(),
                Consistency,
                format!(
                    "effort scope differs from other projects: missing {}",
                    phases.join(", ")
                ),
            );
        }

        let factors: BTreeSet<&str> = project
            .ratings
            .values()
            .flat_map(|r| r.iter().map(|(f, _)| f))
            .collect();
        for factor in factors {
            let ratings: Vec<u32> = project.expert_ratings(factor).iter().map(|r| r.1).collect();
            let (lo, hi) = ratings
                .iter()
                .fold((u32::MAX, 0), |(lo, hi), &r| (lo.min(r), hi.max(r)));
            if ratings.len() > 1 && hi - lo > config.disagreement_threshold {
                push(
                    project,
                    format!("factor_{factor}"),
                    Consistency,
                    format!("expert ratings range over {} levels ({lo}..{hi})", hi - lo),
                );
            }
        }
    }

    DataQualityReport { findings }
}
