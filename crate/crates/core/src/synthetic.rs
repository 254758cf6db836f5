//! Seeded synthetic project datasets with known ground truth and planted
//! defects, for testing the analysis pipeline end to end.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    evaluate_overhead, validate_model, CausalModel, CostFactor, DirectInfluence, MultiplierDraw,
    RatingVector, TriangularParams,
};
use crate::project::{AttributeValue, ProjectRecord};
use crate::sampling::RandomSeed;

/// Expert whose ratings are the ground truth.
pub const PRIMARY_EXPERT: &str = "e1";
/// Second expert added by [`PlantedDefect::DisagreeingExpert`].
pub const SECOND_EXPERT: &str = "e2";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "defect", rename_all = "snake_case")]
pub enum PlantedDefect {
    /// Multiplies the effort of one project by `factor`.
    Outlier { project: usize, factor: f64 },
    /// The listed projects did not record effort for `phases`.
    MissingPhases { projects: Vec<usize>, phases: Vec<String> },
    /// An attribute outside the model that inflates effort by
    /// `1 + strength · value`, with value uniform in [0, 1].
    HiddenDriver { attribute: String, strength: f64 },
    /// A second expert who agrees everywhere except on the first used factor
    /// of the listed projects, where the rating is `shift` levels away.
    DisagreeingExpert { projects: Vec<usize>, shift: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub model: CausalModel,
    pub nominal_productivity: f64,
    pub project_count: usize,
    /// Sizes are uniform in `[min, max]`.
    pub size_range: (f64, f64),
    pub seed: RandomSeed,
    /// Effort is multiplied by `1 + ε` with `ε` uniform in `[-noise, noise]`.
    pub noise: f64,
    /// Phase names and the share of effort each one takes.
    pub phases: Vec<(String, f64)>,
    /// Number of numeric attributes unrelated to effort.
    pub decoy_attributes: usize,
    pub defects: Vec<PlantedDefect>,
}

impl SyntheticSpec {
    pub fn new(model: CausalModel, nominal_productivity: f64, project_count: usize) -> Self {
        Self {
            model,
            nominal_productivity,
            project_count,
            size_range: (20.0, 200.0),
            seed: RandomSeed::default(),
            noise: 0.0,
            phases: default_phases(),
            decoy_attributes: 0,
            defects: Vec::new(),
        }
    }

    pub fn with_seed(mut self, seed: RandomSeed) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_noise(mut self, noise: f64) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_decoys(mut self, count: usize) -> Self {
        self.decoy_attributes = count;
        self
    }

    pub fn with_defect(mut self, defect: PlantedDefect) -> Self {
        self.defects.push(defect);
        self
    }

    fn check(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        let violations = validate_model(&self.model);
        if !violations.is_empty() {
            return Err(Error::InvalidModel(violations));
        }
        if self.project_count < 4 {
            return fail(format!("need at least 4 projects, got {}", self.project_count));
        }
        if !(self.nominal_productivity > 0.0 && self.nominal_productivity.is_finite()) {
            return Err(Error::NonPositiveProductivity(self.nominal_productivity));
        }
        let (lo, hi) = self.size_range;
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return fail(format!("size range [{lo}, {hi}] is invalid"));
        }
        if !(0.0..1.0).contains(&self.noise) {
            return fail(format!("noise {} must lie in [0, 1)", self.noise));
        }
        if self.phases.is_empty() || self.phases.iter().any(|(_, share)| !(share.is_finite() && *share > 0.0)) {
            return fail("phases need positive shares".into());
        }
        let in_range = |i: &usize| *i < self.project_count;
        for defect in &self.defects {
            let ok = match defect {
                PlantedDefect::Outlier { project, factor } => in_range(project) && *factor > 0.0,
                PlantedDefect::MissingPhases { projects, phases } => {
                    projects.iter().all(in_range)
                        && phases.iter().all(|ph| self.phases.iter().any(|(p, _)| p == ph))
                }
                PlantedDefect::HiddenDriver { attribute, strength } => {
                    !attribute.is_empty() && *strength >= 0.0
                }
                PlantedDefect::DisagreeingExpert { projects, shift } => {
                    projects.iter().all(in_range) && *shift > 0
                }
            };
            if !ok {
                return fail(format!("defect {defect:?} does not fit the dataset"));
            }
        }
        Ok(())
    }
}

pub fn default_phases() -> Vec<(String, f64)> {
    [("requirements", 0.15), ("implementation", 0.60), ("test", 0.25)]
        .into_iter()
        .map(|(p, s)| (p.to_string(), s))
        .collect()
}

/// Five independent drivers on the default 0..=3 scale, with extreme
/// overheads between 5% and 50%.
pub fn reference_model() -> CausalModel {
    let drivers = [
        ("volatility", "Requirements volatility", (0.05, 0.10, 0.20)),
        ("experience", "Lack of domain experience", (0.10, 0.20, 0.30)),
        ("complexity", "Product complexity", (0.15, 0.25, 0.40)),
        ("pressure", "Schedule pressure", (0.20, 0.30, 0.45)),
        ("distribution", "Distributed team", (0.25, 0.35, 0.50)),
    ];
    CausalModel {
        factors: drivers.iter().map(|(id, name, _)| CostFactor::new(*id, *name)).collect(),
        direct: drivers
            .iter()
            .map(|(id, _, (a, c, b))| DirectInfluence::new(*id, TriangularParams::new(*a, *c, *b)))
            .collect(),
        interactions: Vec::new(),
    }
}

/// What the generator knows about the dataset it produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub nominal_productivity: f64,
    /// Overhead with every multiplier at its mean.
    pub overheads: BTreeMap<String, f64>,
    /// Total effort before noise and defects.
    pub clean_efforts: BTreeMap<String, f64>,
    pub outliers: Vec<String>,
    pub scope_deviants: Vec<String>,
    pub disagreements: Vec<String>,
    pub hidden_drivers: Vec<String>,
    pub decoys: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticDataset {
    pub projects: Vec<ProjectRecord>,
    pub truth: GroundTruth,
}

pub fn project_id(index: usize) -> String {
    format!("P{:02}", index + 1)
}

// Independent streams so adding, say, decoys does not reshuffle ratings.
const RATINGS: u64 = 1;
const SIZES: u64 = 2;
const NOISE: u64 = 3;
const DECOYS: u64 = 4;
const HIDDEN: u64 = 5;

/// Generates a dataset whose effort follows the model exactly, up to noise
/// and the planted defects.
pub fn generate_synthetic_dataset(spec: &SyntheticSpec) -> Result<SyntheticDataset> {
    spec.check()?;
    let model = &spec.model;
    let n = spec.project_count;
    let means = MultiplierDraw::from_model(model, TriangularParams::mean);

    let mut rating_rng = spec.seed.stream(RATINGS);
    let mut size_rng = spec.seed.stream(SIZES);
    let mut noise_rng = spec.seed.stream(NOISE);
    let mut decoy_rng = spec.seed.stream(DECOYS);
    let mut hidden_rng = spec.seed.stream(HIDDEN);

    let hidden: Vec<(&str, f64)> = spec
        .defects
        .iter()
        .filter_map(|d| match d {
            PlantedDefect::HiddenDriver { attribute, strength } => Some((attribute.as_str(), *strength)),
            _ => None,
        })
        .collect();
    let decoys: Vec<String> = (1..=spec.decoy_attributes).map(|k| format!("decoy_{k}")).collect();

    let mut truth = GroundTruth {
        nominal_productivity: spec.nominal_productivity,
        overheads: BTreeMap::new(),
        clean_efforts: BTreeMap::new(),
        outliers: Vec::new(),
        scope_deviants: Vec::new(),
        disagreements: Vec::new(),
        hidden_drivers: hidden.iter().map(|(a, _)| a.to_string()).collect(),
        decoys: decoys.clone(),
    };

    let mut projects = Vec::with_capacity(n);
    for index in 0..n {
        let id = project_id(index);
        let ratings: RatingVector = model
            .factors
            .iter()
            .map(|f| (f.id.clone(), rating_rng.random_range(0..=f.scale.level_count())))
            .collect();
        let (lo, hi) = spec.size_range;
        let size = if hi > lo { size_rng.random_range(lo..=hi) } else { lo };
        let overhead = evaluate_overhead(model, &ratings, &means)?;
        let clean = size / spec.nominal_productivity * (1.0 + overhead);
        let epsilon = if spec.noise > 0.0 {
            noise_rng.random_range(-spec.noise..=spec.noise)
        } else {
            0.0
        };
        let mut effort = clean * (1.0 + epsilon);

        let mut record = ProjectRecord::new(&id, size);
        for (name, strength) in &hidden {
            let value: f64 = hidden_rng.random();
            effort *= 1.0 + strength * value;
            record = record.with_attribute(*name, AttributeValue::Numeric(value));
        }
        for name in &decoys {
            let value: f64 = decoy_rng.random();
            record = record.with_attribute(name, AttributeValue::Numeric(value));
        }
        record = record.with_ratings(PRIMARY_EXPERT, ratings);

        truth.overheads.insert(id.clone(), overhead);
        truth.clean_efforts.insert(id.clone(), clean);
        projects.push((record, effort));
    }

    for defect in &spec.defects {
        match defect {
            PlantedDefect::Outlier { project, factor } => {
                projects[*project].1 *= factor;
                truth.outliers.push(project_id(*project));
            }
            PlantedDefect::DisagreeingExpert { projects: indices, shift } => {
                let Some(first) = model.used_factor_ids().into_iter().next() else {
                    continue;
                };
                let levels = model.factor(&first).map_or(3, |f| f.scale.level_count());
                for (index, (record, _)) in projects.iter_mut().enumerate() {
                    let mut second = record.ratings[PRIMARY_EXPERT].clone();
                    if indices.contains(&index) {
                        let own = second.get(&first).unwrap_or_default();
                        // move away from the primary rating, staying on the scale
                        let moved = if own + shift <= levels {
                            own + shift
                        } else {
                            own.saturating_sub(*shift)
                        };
                        second.insert(first.clone(), moved);
                        truth.disagreements.push(record.id.clone());
                    }
                    record.ratings.insert(SECOND_EXPERT.to_string(), second);
                }
            }
            PlantedDefect::MissingPhases { .. } | PlantedDefect::HiddenDriver { .. } => {}
        }
    }

    let total_share: f64 = spec.phases.iter().map(|(_, s)| s).sum();
    let mut out = Vec::with_capacity(n);
    for (index, (mut record, effort)) in projects.into_iter().enumerate() {
        let mut deviant = false;
        for (phase, share) in &spec.phases {
            let missing = spec.defects.iter().any(|d| match d {
                PlantedDefect::MissingPhases { projects, phases } => {
                    projects.contains(&index) && phases.contains(phase)
                }
                _ => false,
            });
            if missing {
                deviant = true;
            } else {
                record = record.with_phase(phase, effort * share / total_share);
            }
        }
        if deviant {
            truth.scope_deviants.push(record.id.clone());
        }
        out.push(record);
    }
    truth.disagreements.sort();
    truth.disagreements.dedup();
    truth.outliers.sort();
    truth.outliers.dedup();

    Ok(SyntheticDataset {
        projects: out,
        truth,
    })
}
