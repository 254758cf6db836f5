//! Disagreement between experts rating the same project.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{CausalModel, RatingVector};
use crate::project::ProjectRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisagreementCell {
    pub project_id: String,
    pub factor_id: String,
    pub ratings: BTreeMap<String, u32>,
    pub range: u32,
    pub aggregate: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnratedCell {
    pub project_id: String,
    pub factor_id: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DisagreementReport {
    pub threshold: u32,
    /// Cells whose range exceeds the threshold; they need a joint review.
    pub flagged: Vec<DisagreementCell>,
    /// Fallback consensus per project (lower median per factor).
    pub aggregated: BTreeMap<String, RatingVector>,
    pub unrated: Vec<UnratedCell>,
}

/// `(max − min, lower median)` of one cell's ratings.
pub fn summarize_cell(ratings: &[u32]) -> Option<(u32, u32)> {
    let mut sorted = ratings.to_vec();
    sorted.sort_unstable();
    let (first, last) = (*sorted.first()?, *sorted.last()?);
    Some((last - first, sorted[(sorted.len() - 1) / 2]))
}

/// Checks every factor used by `model` in every project.
pub fn assess_expert_disagreement(
    projects: &[ProjectRecord],
    model: &CausalModel,
    threshold: u32,
) -> DisagreementReport {
    let factors = model.used_factor_ids();
    let mut report = DisagreementReport {
        threshold,
        ..Default::default()
    };
    for project in projects {
        let mut consensus = RatingVector::new();
        for factor in &factors {
            let given = project.expert_ratings(factor);
            let values: Vec<u32> = given.iter().map(|(_, r)| *r).collect();
            let Some((range, aggregate)) = summarize_cell(&values) else {
                report.unrated.push(UnratedCell {
                    project_id: project.id.clone(),
                    factor_id: factor.clone(),
                });
                continue;
            };
            consensus.insert(factor.clone(), aggregate);
            if range > threshold {
                report.flagged.push(DisagreementCell {
                    project_id: project.id.clone(),
                    factor_id: factor.clone(),
                    ratings: given.iter().map(|(e, r)| (e.to_string(), *r)).collect(),
                    range,
                    aggregate,
                });
            }
        }
        report.aggregated.insert(project.id.clone(), consensus);
    }
    report
}
