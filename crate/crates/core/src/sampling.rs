//! Seeded Monte Carlo and Latin Hypercube sampling of triangular multipliers.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CausalModel, OverheadTerms, RatingVector, TriangularParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleMethod {
    MonteCarlo,
    #[default]
    LatinHypercube,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub method: SampleMethod,
    pub count: usize,
}

impl SamplePlan {
    pub fn new(method: SampleMethod, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::EmptyPlan);
        }
        Ok(Self { method, count })
    }

    pub fn monte_carlo(count: usize) -> Result<Self> {
        Self::new(SampleMethod::MonteCarlo, count)
    }

    pub fn latin_hypercube(count: usize) -> Result<Self> {
        Self::new(SampleMethod::LatinHypercube, count)
    }
}

impl Default for SamplePlan {
    fn default() -> Self {
        Self {
            method: SampleMethod::LatinHypercube,
            count: 10_000,
        }
    }
}

/// Master seed from which every random stream is derived.
///
/// The uniform stream for a variable is a pure function of the master seed
/// and the variable's stream number, so variables (and projects, via
/// [`RandomSeed::derive`]) can be sampled in any order or in parallel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RandomSeed(pub u64);

impl RandomSeed {
    pub fn new(master: u64) -> Self {
        Self(master)
    }

    pub fn master(self) -> u64 {
        self.0
    }

    /// Generator for stream `stream` of this seed.
    pub fn stream(self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(stream);
        rng
    }

    /// Child seed for a labelled sub-computation (a project, a fold, a trial).
    pub fn derive(self, label: &str) -> Self {
        // FNV-1a over the label, then a SplitMix64 finalizer over the mix.
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        for byte in label.bytes() {
            hash ^= u64::from(byte);
            hash = hash.wrapping_mul(0x0100_0000_01b3);
        }
        Self(splitmix64(self.0 ^ hash.rotate_left(17)))
    }

    pub fn derive_index(self, index: u64) -> Self {
        Self(splitmix64(self.0.wrapping_add(splitmix64(index))))
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Closed-form triangular quantile with `a = min`, `c = likely`, `b = max`.
pub fn triangular_inverse_cdf(params: &TriangularParams, u: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::UniformOutOfRange(u));
    }
    let TriangularParams {
        min: a,
        likely: c,
        max: b,
    } = *params;
    let width = b - a;
    if width <= 0.0 {
        return Ok(a);
    }
    let x = if u * width <= c - a {
        a + (u * width * (c - a)).sqrt()
    } else {
        b - ((1.0 - u) * width * (b - c)).sqrt()
    };
    Ok(x)
}

/// `plan.count` uniforms for one sampled variable.
///
/// Latin Hypercube places exactly one value in every stratum
/// `[k/N, (k+1)/N)`; the stratum order is a seeded permutation.
pub fn draw_uniforms(plan: &SamplePlan, variable_index: u64, seed: RandomSeed) -> Vec<f64> {
    let mut rng = seed.stream(variable_index);
    let n = plan.count;
    match plan.method {
        SampleMethod::MonteCarlo => (0..n).map(|_| rng.random::<f64>()).collect(),
        SampleMethod::LatinHypercube => {
            let mut strata: Vec<usize> = (0..n).collect();
            strata.shuffle(&mut rng);
            let scale = n as f64;
            strata
                .into_iter()
                .map(|k| {
                    let jitter: f64 = rng.random();
                    (k as f64 + jitter) / scale
                })
                .collect()
        }
    }
}

/// Sorted simulated cost-overhead fractions for one rating vector.
#[derive(Debug, Clone, PartialEq)]
pub struct OverheadDistribution {
    samples: Vec<f64>,
    pub plan: SamplePlan,
    pub seed: RandomSeed,
}

impl OverheadDistribution {
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

/// Simulates the overhead distribution: each influence is an independent
/// variable (stream = its canonical ordinal), pushed through the triangular
/// quantile and combined with the rating weights.
pub fn simulate_overhead(
    model: &CausalModel,
    ratings: &RatingVector,
    plan: &SamplePlan,
    seed: RandomSeed,
) -> Result<OverheadDistribution> {
    if plan.count == 0 {
        return Err(Error::EmptyPlan);
    }
    let terms = OverheadTerms::new(model, ratings)?;
    let columns = terms
        .params()
        .iter()
        .enumerate()
        .map(|(k, params)| {
            draw_uniforms(plan, k as u64, seed)
                .into_iter()
                .map(|u| triangular_inverse_cdf(params, u))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut row = vec![0.0; columns.len()];
    let mut samples: Vec<f64> = (0..plan.count)
        .map(|s| {
            for (slot, column) in row.iter_mut().zip(&columns) {
                *slot = column[s];
            }
            terms.evaluate(&row)
        })
        .collect();
    samples.sort_by(f64::total_cmp);

    Ok(OverheadDistribution {
        samples,
        plan: *plan,
        seed,
    })
}
