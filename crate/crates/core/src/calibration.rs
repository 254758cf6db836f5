//! Nominal productivity from past projects.
//!
//! Effort is modelled as `effort = (size / P) · (1 + CO)`, so effort is
//! proportional to the overhead-adjusted size `x = size · (1 + CO)`. The slope
//! of a least-squares line through the origin is `1 / P`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::OverheadDistribution;

/// Arithmetic mean of the simulated overheads.
pub fn mean_overhead(dist: &OverheadDistribution) -> Result<f64> {
    if dist.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    Ok(dist.samples().iter().sum::<f64>() / dist.len() as f64)
}

/// One project's input to the fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPoint {
    pub id: String,
    pub size: f64,
    pub effort: f64,
    pub mean_overhead: f64,
}

impl CalibrationPoint {
    pub fn new(id: impl Into<String>, size: f64, effort: f64, mean_overhead: f64) -> Self {
        Self {
            id: id.into(),
            size,
            effort,
            mean_overhead,
        }
    }

    pub fn adjusted_size(&self) -> f64 {
        self.size * (1.0 + self.mean_overhead)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    /// Size units per unit of effort for a project with no overhead.
    pub nominal_productivity: f64,
    /// Effort per overhead-adjusted size unit; `1 / nominal_productivity`.
    pub regression_slope: f64,
    pub per_project_nominal: BTreeMap<String, f64>,
    /// `effort - slope · adjusted_size`.
    pub residuals: BTreeMap<String, f64>,
}

pub fn fit_nominal_productivity(points: &[CalibrationPoint]) -> Result<CalibrationResult> {
    if points.len() < 2 {
        return Err(Error::InsufficientProjects {
            needed: 2,
            got: points.len(),
        });
    }
    for p in points {
        let reason = if !(p.size.is_finite() && p.size > 0.0) {
            Some(format!("size must be positive, got {}", p.size))
        } else if !(p.effort.is_finite() && p.effort > 0.0) {
            Some(format!("effort must be positive, got {}", p.effort))
        } else if !(p.mean_overhead.is_finite() && p.mean_overhead > -1.0) {
            Some(format!("mean overhead must exceed -1, got {}", p.mean_overhead))
        } else {
            None
        };
        if let Some(reason) = reason {
            return Err(Error::InvalidProject {
                id: p.id.clone(),
                reason,
            });
        }
    }

    let (sxe, sxx) = points.iter().fold((0.0, 0.0), |(sxe, sxx), p| {
        let x = p.adjusted_size();
        (sxe + x * p.effort, sxx + x * x)
    });
    if sxx == 0.0 {
        return Err(Error::DegenerateRegression);
    }
    let slope = sxe / sxx;

    let per_project_nominal = points
        .iter()
        .map(|p| (p.id.clone(), p.adjusted_size() / p.effort))
        .collect();
    let residuals = points
        .iter()
        .map(|p| (p.id.clone(), p.effort - slope * p.adjusted_size()))
        .collect();

    Ok(CalibrationResult {
        nominal_productivity: 1.0 / slope,
        regression_slope: slope,
        per_project_nominal,
        residuals,
    })
}
