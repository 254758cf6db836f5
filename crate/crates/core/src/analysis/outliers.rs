//! Productivity outliers and attributes that separate groups of projects.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::stats::{binomial, rank_sum_exact_p, tukey_hinges};
use crate::project::{AttributeValue, ProjectRecord};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TukeyFences {
    pub lower_hinge: f64,
    pub upper_hinge: f64,
    pub lower_fence: f64,
    pub upper_fence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlaggedOutlier {
    pub project_id: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OutlierDetection {
    /// Absent when fewer than four values were given.
    pub fences: Option<TukeyFences>,
    pub flagged: Vec<FlaggedOutlier>,
}

impl OutlierDetection {
    pub fn flagged_ids(&self) -> Vec<&str> {
        self.flagged.iter().map(|f| f.project_id.as_str()).collect()
    }
}

/// Flags values outside `hinge ± 1.5 · (upper hinge − lower hinge)`.
pub fn detect_outliers(values: &[(String, f64)]) -> OutlierDetection {
    if values.len() < 4 {
        return OutlierDetection::default();
    }
    let raw: Vec<f64> = values.iter().map(|(_, v)| *v).collect();
    let Some((lower_hinge, upper_hinge)) = tukey_hinges(&raw) else {
        return OutlierDetection::default();
    };
    let spread = upper_hinge - lower_hinge;
    let fences = TukeyFences {
        lower_hinge,
        upper_hinge,
        lower_fence: lower_hinge - 1.5 * spread,
        upper_fence: upper_hinge + 1.5 * spread,
    };
    // Values derived from the same ratio can differ in the last bits; treat
    // those as equal to the fence.
    let slack = 1e-9 * lower_hinge.abs().max(upper_hinge.abs());
    let flagged = values
        .iter()
        .filter(|(_, v)| *v < fences.lower_fence - slack || *v > fences.upper_fence + slack)
        .map(|(id, v)| FlaggedOutlier {
            project_id: id.clone(),
            value: *v,
        })
        .collect();
    OutlierDetection {
        fences: Some(fences),
        flagged,
    }
}

/// One attribute level that splits the projects into two groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSeparator {
    pub attribute: String,
    pub level: String,
    /// Projects having `level`; the rest form the other group.
    pub group: Vec<String>,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GroupSeparation {
    /// Splits with `p <= alpha`, most significant first.
    pub separators: Vec<GroupSeparator>,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OutlierReport {
    pub outliers: OutlierDetection,
    pub groups: GroupSeparation,
}

/// Above this many rank assignments the exact test is skipped.
const MAX_ENUMERATION: f64 = 5.0e6;

/// Tests every categorical attribute (and every numeric attribute with just
/// two values) for a level whose projects differ in productivity.
pub fn find_group_separators(
    projects: &[ProjectRecord],
    productivities: &BTreeMap<String, f64>,
    alpha: f64,
) -> GroupSeparation {
    let mut names = BTreeSet::new();
    for p in projects {
        names.extend(p.attributes.keys().map(String::as_str));
    }

    let mut result = GroupSeparation::default();
    for name in names {
        let observed: Vec<(&str, &AttributeValue, f64)> = projects
            .iter()
            .filter_map(|p| {
                let value = p.attributes.get(name)?;
                let productivity = *productivities.get(&p.id)?;
                Some((p.id.as_str(), value, productivity))
            })
            .collect();
        let categorical = observed
            .iter()
            .any(|(_, v, _)| matches!(v, AttributeValue::Categorical(_)));
        let levels: BTreeSet<String> = observed.iter().map(|(_, v, _)| v.label()).collect();
        if !categorical && levels.len() != 2 {
            continue;
        }
        if levels.len() < 2 {
            result
                .diagnostics
                .push(format!("attribute `{name}` has a single level; skipped"));
            continue;
        }
        // With two levels both one-vs-rest splits are the same test.
        let tested: Vec<&String> = if levels.len() == 2 {
            levels.iter().take(1).collect()
        } else {
            levels.iter().collect()
        };
        for level in tested {
            let (inside, outside): (Vec<&(&str, &AttributeValue, f64)>, Vec<_>) =
                observed.iter().partition(|(_, v, _)| &v.label() == level);
            if inside.len() < 2 || outside.len() < 2 {
                result.diagnostics.push(format!(
                    "attribute `{name}` = `{level}`: fewer than two projects on one side; skipped"
                ));
                continue;
            }
            let n = inside.len() + outside.len();
            if binomial(n, inside.len()) > MAX_ENUMERATION {
                result.diagnostics.push(format!(
                    "attribute `{name}` = `{level}`: too many projects for exact enumeration; skipped"
                ));
                continue;
            }
            let a: Vec<f64> = inside.iter().map(|o| o.2).collect();
            let b: Vec<f64> = outside.iter().map(|o| o.2).collect();
            let p_value = rank_sum_exact_p(&a, &b);
            if p_value <= alpha {
                result.separators.push(GroupSeparator {
                    attribute: name.to_string(),
                    level: level.clone(),
                    group: inside.iter().map(|o| o.0.to_string()).collect(),
                    p_value,
                });
            }
        }
    }
    result.separators.sort_by(|x, y| {
        x.p_value
            .total_cmp(&y.p_value)
            .then_with(|| x.attribute.cmp(&y.attribute))
            .then_with(|| x.level.cmp(&y.level))
    });
    result
}
