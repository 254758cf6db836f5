//! Past-project records as loaded from a project table.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::model::RatingVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AttributeValue {
    Numeric(f64),
    Categorical(String),
}

impl AttributeValue {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            AttributeValue::Numeric(v) => Some(*v),
            AttributeValue::Categorical(_) => None,
        }
    }

    /// Text label used when the attribute partitions projects into groups.
    pub fn label(&self) -> String {
        match self {
            AttributeValue::Numeric(v) => v.to_string(),
            AttributeValue::Categorical(s) => s.clone(),
        }
    }
}

/// One past project.
///
/// Missing values are kept as absences rather than rejected, so that data
/// validation can report them; an unmeasured phase is not the same as a
/// phase with zero effort.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ProjectRecord {
    pub id: String,
    pub size: Option<f64>,
    pub phase_efforts: BTreeMap<String, f64>,
    pub ratings: BTreeMap<String, RatingVector>,
    pub attributes: BTreeMap<String, AttributeValue>,
}

impl ProjectRecord {
    pub fn new(id: impl Into<String>, size: f64) -> Self {
        Self {
            id: id.into(),
            size: Some(size),
            ..Self::default()
        }
    }

    pub fn with_phase(mut self, phase: impl Into<String>, effort: f64) -> Self {
        self.phase_efforts.insert(phase.into(), effort);
        self
    }

    pub fn with_ratings(mut self, expert: impl Into<String>, ratings: RatingVector) -> Self {
        self.ratings.insert(expert.into(), ratings);
        self
    }

    pub fn with_attribute(mut self, name: impl Into<String>, value: AttributeValue) -> Self {
        self.attributes.insert(name.into(), value);
        self
    }

    pub fn phases(&self) -> BTreeSet<&str> {
        self.phase_efforts.keys().map(String::as_str).collect()
    }

    /// Sum over every measured phase.
    pub fn raw_effort(&self) -> f64 {
        self.phase_efforts.values().sum()
    }

    /// Sum over the measured phases that belong to `scope`.
    pub fn effort_in_scope(&self, scope: &BTreeSet<String>) -> f64 {
        self.phase_efforts
            .iter()
            .filter(|(phase, _)| scope.contains(*phase))
            .map(|(_, effort)| effort)
            .sum()
    }

    /// All ratings given for `factor`, in expert-id order.
    pub fn expert_ratings(&self, factor: &str) -> Vec<(&str, u32)> {
        self.ratings
            .iter()
            .filter_map(|(expert, ratings)| ratings.get(factor).map(|r| (expert.as_str(), r)))
            .collect()
    }

    pub fn numeric_attribute(&self, name: &str) -> Option<f64> {
        self.attributes.get(name).and_then(AttributeValue::as_f64)
    }
}
