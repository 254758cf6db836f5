//! Causal cost-overhead model.
//!
//! A model is a set of cost factors, each rated on an ordinal scale where
//! level 0 is the nominal (best possible) situation and the top level is the
//! extreme (worst) one. Experts give a triangular estimate of the relative
//! cost overhead a factor causes at its extreme level; that estimate is a
//! [`DirectInfluence`]. An [`InteractionInfluence`] adds a bivariate term that
//! only becomes active when both the direct factor and an indirect factor
//! deviate from nominal.
//!
//! For a given rating vector and one sampled value per influence, the cost
//! overhead fraction is
//!
//! ```text
//! CO = Σ draw_i · w(r_i) + Σ sign_ij · draw_ij · w(r_i) · w(r_j)
//! ```
//!
//! with `w(r) = r / L` the linear position of the rating on its scale.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordinal rating scale with `L + 1` anchored levels, `0..=L`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrdinalScale {
    anchors: Vec<String>,
}

impl OrdinalScale {
    /// Builds a scale from its level descriptions (nominal first, extreme last).
    pub fn new(anchors: Vec<String>) -> Result<Self> {
        if anchors.len() < 2 {
            return Err(Error::InvalidConfig(format!(
                "an ordinal scale needs at least two levels, got {}",
                anchors.len()
            )));
        }
        Ok(Self { anchors })
    }

    /// A scale with `level_count + 1` generic anchors.
    pub fn with_levels(level_count: u32) -> Result<Self> {
        let anchors = (0..=level_count)
            .map(|level| match level {
                0 => "nominal".to_string(),
                l if l == level_count => "extreme".to_string(),
                l => format!("level {l}"),
            })
            .collect();
        Self::new(anchors)
    }

    /// The highest level `L`.
    pub fn level_count(&self) -> u32 {
        (self.anchors.len() - 1) as u32
    }

    pub fn anchors(&self) -> &[String] {
        &self.anchors
    }
}

impl Default for OrdinalScale {
    fn default() -> Self {
        Self::with_levels(3).expect("three-level scale is valid")
    }
}

/// Three-point estimate of a cost-overhead fraction (0.30 = 30 %).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriangularParams {
    pub min: f64,
    pub likely: f64,
    pub max: f64,
}

impl TriangularParams {
    pub fn new(min: f64, likely: f64, max: f64) -> Self {
        Self { min, likely, max }
    }

    pub fn degenerate(value: f64) -> Self {
        Self::new(value, value, value)
    }

    pub fn mean(&self) -> f64 {
        (self.min + self.likely + self.max) / 3.0
    }

    /// Reason the parameters are unusable, if any.
    pub fn check(&self) -> Option<String> {
        let Self { min, likely, max } = *self;
        if !(min.is_finite() && likely.is_finite() && max.is_finite()) {
            return Some("triangular parameters must be finite".into());
        }
        if !(min <= likely && likely <= max) {
            return Some(format!(
                "triangular parameters must satisfy min <= likely <= max, got {min}/{likely}/{max}"
            ));
        }
        if min < -1.0 {
            return Some(format!("minimum overhead {min} is below -1"));
        }
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Direction {
    /// Higher raw ratings mean more cost.
    #[default]
    Positive,
    /// Higher raw ratings mean less cost; ratings are reverse-coded on input.
    Negative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostFactor {
    pub id: String,
    pub name: String,
    pub direction: Direction,
    pub scale: OrdinalScale,
    pub description: String,
}

impl CostFactor {
    /// A positive-direction factor on the default four-level scale.
    pub fn new(id: impl Into<String>, name: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            name: name.into(),
            direction: Direction::Positive,
            scale: OrdinalScale::default(),
            description: String::new(),
        }
    }

    pub fn with_scale(mut self, scale: OrdinalScale) -> Self {
        self.scale = scale;
        self
    }

    pub fn with_direction(mut self, direction: Direction) -> Self {
        self.direction = direction;
        self
    }

    pub fn with_description(mut self, description: impl Into<String>) -> Self {
        self.description = description.into();
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectInfluence {
    pub factor_id: String,
    pub extreme_overhead: TriangularParams,
}

impl DirectInfluence {
    pub fn new(factor_id: impl Into<String>, extreme_overhead: TriangularParams) -> Self {
        Self {
            factor_id: factor_id.into(),
            extreme_overhead,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InteractionInfluence {
    pub direct_factor_id: String,
    pub indirect_factor_id: String,
    pub sign: Sign,
    pub extreme_overhead: TriangularParams,
}

impl InteractionInfluence {
    pub fn new(
        direct_factor_id: impl Into<String>,
        indirect_factor_id: impl Into<String>,
        sign: Sign,
        extreme_overhead: TriangularParams,
    ) -> Self {
        Self {
            direct_factor_id: direct_factor_id.into(),
            indirect_factor_id: indirect_factor_id.into(),
            sign,
            extreme_overhead,
        }
    }
}

/// Identity of one sampled variable. The derived ordering is the canonical
/// influence ordering: direct influences by factor id, then interactions by
/// `(direct, indirect)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum InfluenceKey {
    Direct { factor: String },
    Interaction { direct: String, indirect: String },
}

impl InfluenceKey {
    pub fn direct(factor: impl Into<String>) -> Self {
        InfluenceKey::Direct {
            factor: factor.into(),
        }
    }

    pub fn interaction(direct: impl Into<String>, indirect: impl Into<String>) -> Self {
        InfluenceKey::Interaction {
            direct: direct.into(),
            indirect: indirect.into(),
        }
    }
}

impl fmt::Display for InfluenceKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InfluenceKey::Direct { factor } => write!(f, "direct({factor})"),
            InfluenceKey::Interaction { direct, indirect } => {
                write!(f, "interaction({direct} x {indirect})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CausalModel {
    pub factors: Vec<CostFactor>,
    pub direct: Vec<DirectInfluence>,
    pub interactions: Vec<InteractionInfluence>,
}

impl CausalModel {
    pub fn factor(&self, id: &str) -> Option<&CostFactor> {
        self.factors.iter().find(|f| f.id == id)
    }

    /// Runs [`validate_model`] and turns any violation into an error.
    pub fn validated(self) -> Result<Self> {
        let violations = validate_model(&self);
        if violations.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidModel(violations))
        }
    }

    /// Every influence with its parameters, in canonical order.
    pub fn influences(&self) -> Vec<(InfluenceKey, TriangularParams)> {
        let mut all: Vec<_> = self
            .direct
            .iter()
            .map(|d| (InfluenceKey::direct(&d.factor_id), d.extreme_overhead))
            .chain(self.interactions.iter().map(|i| {
                (
                    InfluenceKey::interaction(&i.direct_factor_id, &i.indirect_factor_id),
                    i.extreme_overhead,
                )
            }))
            .collect();
        all.sort_by(|a, b| a.0.cmp(&b.0));
        all
    }

    /// Ids of factors that appear in at least one influence, sorted.
    pub fn used_factor_ids(&self) -> BTreeSet<String> {
        self.direct
            .iter()
            .map(|d| d.factor_id.clone())
            .chain(
                self.interactions
                    .iter()
                    .flat_map(|i| [i.direct_factor_id.clone(), i.indirect_factor_id.clone()]),
            )
            .collect()
    }
}

/// Factor ratings, reverse-coded so that 0 is always nominal.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RatingVector(BTreeMap<String, u32>);

impl RatingVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, factor: &str) -> Option<u32> {
        self.0.get(factor).copied()
    }

    pub fn insert(&mut self, factor: impl Into<String>, rating: u32) {
        self.0.insert(factor.into(), rating);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u32)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn remove(&mut self, factor: &str) -> Option<u32> {
        self.0.remove(factor)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Converts ratings given on each factor's natural scale. Factors whose
    /// direction is negative are flipped (`r -> L - r`).
    pub fn from_raw(model: &CausalModel, raw: &BTreeMap<String, u32>) -> Result<Self> {
        raw.iter()
            .map(|(id, &rating)| {
                let factor = model
                    .factor(id)
                    .ok_or_else(|| Error::UnknownFactor(id.clone()))?;
                let level_count = factor.scale.level_count();
                if rating > level_count {
                    return Err(Error::RatingOutOfScale {
                        rating,
                        level_count,
                    });
                }
                let coded = match factor.direction {
                    Direction::Positive => rating,
                    Direction::Negative => level_count - rating,
                };
                Ok((id.clone(), coded))
            })
            .collect::<Result<BTreeMap<_, _>>>()
            .map(Self)
    }
}

impl<K: Into<String>> FromIterator<(K, u32)> for RatingVector {
    fn from_iter<I: IntoIterator<Item = (K, u32)>>(iter: I) -> Self {
        Self(iter.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }
}

/// One sampled overhead value per influence.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MultiplierDraw(BTreeMap<InfluenceKey, f64>);

impl MultiplierDraw {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: InfluenceKey, value: f64) {
        self.0.insert(key, value);
    }

    pub fn get(&self, key: &InfluenceKey) -> Option<f64> {
        self.0.get(key).copied()
    }

    /// Draw that uses the same statistic of every influence's triangular.
    pub fn from_model(model: &CausalModel, pick: impl Fn(&TriangularParams) -> f64) -> Self {
        Self(
            model
                .influences()
                .into_iter()
                .map(|(key, params)| (key, pick(&params)))
                .collect(),
        )
    }
}

impl FromIterator<(InfluenceKey, f64)> for MultiplierDraw {
    fn from_iter<I: IntoIterator<Item = (InfluenceKey, f64)>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// A structural problem found by [`validate_model`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoDirectInfluence,
    EmptyFactorId,
    DuplicateFactor(String),
    UnknownFactor { context: String, factor: String },
    DuplicateDirectInfluence(String),
    DuplicateInteraction { direct: String, indirect: String },
    InteractionWithoutDirect { direct: String, indirect: String },
    SelfInteraction(String),
    /// Indirect influence chains longer than one level, listed from the
    /// outermost indirect factor to the direct one.
    DepthExceeded(Vec<String>),
    Cycle(Vec<String>),
    InvalidTriangular { influence: InfluenceKey, reason: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoDirectInfluence => write!(f, "model has no direct influence"),
            Violation::EmptyFactorId => write!(f, "factor with an empty id"),
            Violation::DuplicateFactor(id) => write!(f, "factor `{id}` is declared twice"),
            Violation::UnknownFactor { context, factor } => {
                write!(f, "{context} references undeclared factor `{factor}`")
            }
            Violation::DuplicateDirectInfluence(id) => {
                write!(f, "factor `{id}` has more than one direct influence")
            }
            Violation::DuplicateInteraction { direct, indirect } => {
                write!(f, "interaction `{direct}` x `{indirect}` is declared twice")
            }
            Violation::InteractionWithoutDirect { direct, indirect } => write!(
                f,
                "interaction `{direct}` x `{indirect}`: `{direct}` has no direct influence"
            ),
            Violation::SelfInteraction(id) => write!(f, "factor `{id}` interacts with itself"),
            Violation::DepthExceeded(chain) => write!(
                f,
                "indirect influence chain deeper than one level: {}",
                chain.join(" -> ")
            ),
            Violation::Cycle(chain) => {
                write!(f, "influence cycle: {}", chain.join(" -> "))
            }
            Violation::InvalidTriangular { influence, reason } => {
                write!(f, "{influence}: {reason}")
            }
        }
    }
}

/// Checks every structural rule; an empty list means the model is usable.
pub fn validate_model(model: &CausalModel) -> Vec<Violation> {
    let mut violations = Vec::new();

    let mut declared = BTreeSet::new();
    for factor in &model.factors {
        if factor.id.is_empty() {
            violations.push(Violation::EmptyFactorId);
        } else if !declared.insert(factor.id.as_str()) {
            violations.push(Violation::DuplicateFactor(factor.id.clone()));
        }
    }

    if model.direct.is_empty() {
        violations.push(Violation::NoDirectInfluence);
    }

    let mut with_direct = BTreeSet::new();
    for influence in &model.direct {
        let id = influence.factor_id.as_str();
        if !declared.contains(id) {
            violations.push(Violation::UnknownFactor {
                context: "direct influence".into(),
                factor: id.to_string(),
            });
        }
        if !with_direct.insert(id) {
            violations.push(Violation::DuplicateDirectInfluence(id.to_string()));
        }
        if let Some(reason) = influence.extreme_overhead.check() {
            violations.push(Violation::InvalidTriangular {
                influence: InfluenceKey::direct(id),
                reason,
            });
        }
    }

    let mut pairs = BTreeSet::new();
    for interaction in &model.interactions {
        let direct = interaction.direct_factor_id.as_str();
        let indirect = interaction.indirect_factor_id.as_str();
        let key = InfluenceKey::interaction(direct, indirect);
        if direct == indirect {
            violations.push(Violation::SelfInteraction(direct.to_string()));
        }
        if !with_direct.contains(direct) {
            violations.push(Violation::InteractionWithoutDirect {
                direct: direct.to_string(),
                indirect: indirect.to_string(),
            });
        }
        if !declared.contains(indirect) {
            violations.push(Violation::UnknownFactor {
                context: key.to_string(),
                factor: indirect.to_string(),
            });
        }
        if !pairs.insert((direct, indirect)) {
            violations.push(Violation::DuplicateInteraction {
                direct: direct.to_string(),
                indirect: indirect.to_string(),
            });
        }
        if let Some(reason) = interaction.extreme_overhead.check() {
            violations.push(Violation::InvalidTriangular {
                influence: key,
                reason,
            });
        }
    }

    violations.extend(graph_violations(model));
    violations
}

/// Depth and cycle checks on the graph with edges indirect -> direct.
fn graph_violations(model: &CausalModel) -> Vec<Violation> {
    let mut incoming: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for i in &model.interactions {
        if i.direct_factor_id != i.indirect_factor_id {
            incoming
                .entry(i.direct_factor_id.as_str())
                .or_default()
                .insert(i.indirect_factor_id.as_str());
        }
    }

    let mut violations = Vec::new();

    // Any indirect factor that is itself the target of an interaction makes a
    // chain of two edges.
    for (&direct, sources) in &incoming {
        for &middle in sources {
            if let Some(outer) = incoming.get(middle).and_then(|s| s.iter().next()) {
                violations.push(Violation::DepthExceeded(vec![
                    outer.to_string(),
                    middle.to_string(),
                    direct.to_string(),
                ]));
            }
        }
    }

    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Unseen,
        Active,
        Done,
    }

    fn visit<'a>(
        node: &'a str,
        incoming: &BTreeMap<&'a str, BTreeSet<&'a str>>,
        marks: &mut BTreeMap<&'a str, Mark>,
        stack: &mut Vec<&'a str>,
        cycles: &mut Vec<Violation>,
    ) {
        marks.insert(node, Mark::Active);
        stack.push(node);
        for &next in incoming.get(node).into_iter().flatten() {
            match marks.get(next).copied().unwrap_or(Mark::Unseen) {
                Mark::Unseen => visit(next, incoming, marks, stack, cycles),
                Mark::Active => {
                    let start = stack.iter().position(|&n| n == next).unwrap_or(0);
                    let mut chain: Vec<String> =
                        stack[start..].iter().rev().map(|s| s.to_string()).collect();
                    chain.push(chain[0].clone());
                    cycles.push(Violation::Cycle(chain));
                }
                Mark::Done => {}
            }
        }
        stack.pop();
        marks.insert(node, Mark::Done);
    }

    let mut marks = BTreeMap::new();
    for &node in incoming.keys() {
        if marks.get(node).copied().unwrap_or(Mark::Unseen) == Mark::Unseen {
            visit(node, &incoming, &mut marks, &mut Vec::new(), &mut violations);
        }
    }
    violations
}

/// Linear position of `rating` on `scale`: `rating / L`.
pub fn interpolation_weight(rating: u32, scale: &OrdinalScale) -> Result<f64> {
    let level_count = scale.level_count();
    if rating > level_count {
        return Err(Error::RatingOutOfScale {
            rating,
            level_count,
        });
    }
    Ok(f64::from(rating) / f64::from(level_count))
}

/// Per-influence coefficients for one rating vector, so that
/// `CO = Σ coefficient_k · draw_k` over the canonical influence order.
#[derive(Debug, Clone, PartialEq)]
pub struct OverheadTerms {
    keys: Vec<InfluenceKey>,
    params: Vec<TriangularParams>,
    coefficients: Vec<f64>,
}

impl OverheadTerms {
    pub fn new(model: &CausalModel, ratings: &RatingVector) -> Result<Self> {
        let weight = |id: &str| -> Result<f64> {
            let factor = model
                .factor(id)
                .ok_or_else(|| Error::UnknownFactor(id.to_string()))?;
            let rating = ratings
                .get(id)
                .ok_or_else(|| Error::MissingRating(id.to_string()))?;
            interpolation_weight(rating, &factor.scale)
        };
        let signs: BTreeMap<(&str, &str), Sign> = model
            .interactions
            .iter()
            .map(|i| {
                (
                    (i.direct_factor_id.as_str(), i.indirect_factor_id.as_str()),
                    i.sign,
                )
            })
            .collect();

        let mut keys = Vec::new();
        let mut params = Vec::new();
        let mut coefficients = Vec::new();
        for (key, p) in model.influences() {
            let coefficient = match &key {
                InfluenceKey::Direct { factor } => weight(factor)?,
                InfluenceKey::Interaction { direct, indirect } => {
                    let sign = signs[&(direct.as_str(), indirect.as_str())];
                    sign.as_f64() * (weight(direct)? * weight(indirect)?)
                }
            };
            keys.push(key);
            params.push(p);
            coefficients.push(coefficient);
        }
        Ok(Self {
            keys,
            params,
            coefficients,
        })
    }

    pub fn keys(&self) -> &[InfluenceKey] {
        &self.keys
    }

    pub fn params(&self) -> &[TriangularParams] {
        &self.params
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Overhead for values given in canonical order.
    pub fn evaluate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.coefficients.len());
        self.coefficients
            .iter()
            .zip(values)
            .map(|(c, v)| c * v)
            .sum()
    }

    /// Sign-aware `[lowest, highest]` overhead over all admissible draws.
    pub fn bounds(&self) -> (f64, f64) {
        self.coefficients
            .iter()
            .zip(&self.params)
            .fold((0.0, 0.0), |(lo, hi), (&c, p)| {
                let (a, b) = (c * p.min, c * p.max);
                (lo + a.min(b), hi + a.max(b))
            })
    }
}

/// Cost-overhead fraction for a fully specified draw.
pub fn evaluate_overhead(
    model: &CausalModel,
    ratings: &RatingVector,
    draw: &MultiplierDraw,
) -> Result<f64> {
    let terms = OverheadTerms::new(model, ratings)?;
    let values = terms
        .keys()
        .iter()
        .map(|key| draw.get(key).ok_or_else(|| Error::MissingDraw(key.to_string())))
        .collect::<Result<Vec<_>>>()?;
    Ok(terms.evaluate(&values))
}
