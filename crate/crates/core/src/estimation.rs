//! Cost distributions and risk queries over them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CausalModel, RatingVector};
use crate::sampling::{simulate_overhead, OverheadDistribution, RandomSeed, SamplePlan};

/// How a cost distribution is reduced to one number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateConvention {
    #[default]
    Median,
    Mean,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostDistribution {
    samples: Vec<f64>,
    pub size: f64,
    pub nominal_productivity: f64,
    pub plan: SamplePlan,
    pub seed: RandomSeed,
}

impl CostDistribution {
    /// Turns simulated overheads into efforts `(size / P) · (1 + CO)`.
    pub fn from_overhead(
        overhead: &OverheadDistribution,
        size: f64,
        nominal_productivity: f64,
    ) -> Result<Self> {
        if !(nominal_productivity.is_finite() && nominal_productivity > 0.0) {
            return Err(Error::NonPositiveProductivity(nominal_productivity));
        }
        let nominal_cost = size / nominal_productivity;
        let samples = overhead
            .samples()
            .iter()
            .map(|&co| {
                if co > -1.0 {
                    Ok(nominal_cost * (1.0 + co))
                } else {
                    Err(Error::NonPositiveEffort(co))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        // Monotone in CO for positive nominal cost, so order is preserved.
        Ok(Self {
            samples,
            size,
            nominal_productivity,
            plan: overhead.plan,
            seed: overhead.seed,
        })
    }

    /// Wraps arbitrary effort samples (sorted on construction).
    pub fn from_samples(mut samples: Vec<f64>) -> Self {
        samples.sort_by(f64::total_cmp);
        let plan = SamplePlan {
            method: Default::default(),
            count: samples.len(),
        };
        Self {
            samples,
            size: f64::NAN,
            nominal_productivity: f64::NAN,
            plan,
            seed: RandomSeed::default(),
        }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

pub fn estimate_cost(
    model: &CausalModel,
    ratings: &RatingVector,
    size: f64,
    nominal_productivity: f64,
    plan: &SamplePlan,
    seed: RandomSeed,
) -> Result<CostDistribution> {
    if !(size.is_finite() && size > 0.0) {
        return Err(Error::InvalidConfig(format!("size must be positive, got {size}")));
    }
    let overhead = simulate_overhead(model, ratings, plan, seed)?;
    CostDistribution::from_overhead(&overhead, size, nominal_productivity)
}

/// Lower empirical quantile: the smallest sample `x` with `F(x) >= p`.
pub fn quantile(dist: &CostDistribution, p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::ProbabilityOutOfRange(p));
    }
    let samples = dist.samples();
    if samples.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    let n = samples.len();
    let total = n as f64;
    // Smallest count k with k / n >= p, located without trusting ceil(p·n).
    let mut k = ((p * total).ceil() as usize).clamp(1, n);
    while k > 1 && (k - 1) as f64 / total >= p {
        k -= 1;
    }
    while k < n && (k as f64) / total < p {
        k += 1;
    }
    Ok(samples[k - 1])
}

/// Fraction of samples strictly above `budget`.
pub fn exceedance_probability(dist: &CostDistribution, budget: f64) -> Result<f64> {
    let samples = dist.samples();
    if samples.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    let at_or_below = samples.partition_point(|&x| x <= budget);
    Ok((samples.len() - at_or_below) as f64 / samples.len() as f64)
}

/// Lower median of the samples.
pub fn point_estimate(dist: &CostDistribution) -> Result<f64> {
    let samples = dist.samples();
    if samples.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    Ok(samples[(samples.len() - 1) / 2])
}

pub fn point_estimate_with(dist: &CostDistribution, convention: EstimateConvention) -> Result<f64> {
    match convention {
        EstimateConvention::Median => point_estimate(dist),
        EstimateConvention::Mean => {
            if dist.is_empty() {
                return Err(Error::EmptyDistribution);
            }
            Ok(dist.samples().iter().sum::<f64>() / dist.len() as f64)
        }
    }
}
