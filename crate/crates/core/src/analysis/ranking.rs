//! Correlation-based cost-driver ranking.

use serde::{Deserialize, Serialize};

use super::stats::{spearman, spearman_permutation_test, PermutationMethod};
use crate::error::{Error, Result};
use crate::sampling::RandomSeed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateKind {
    Factor,
    Attribute,
}

/// One candidate driver with a value per project (same order as the target).
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub id: String,
    pub kind: CandidateKind,
    pub values: Vec<f64>,
}

impl Candidate {
    pub fn factor(id: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            id: id.into(),
            kind: CandidateKind::Factor,
            values,
        }
    }

    pub fn attribute(id: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            id: id.into(),
            kind: CandidateKind::Attribute,
            values,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankingConfig {
    /// Minimum |ρ| for selection.
    pub theta: f64,
    /// Maximum p-value for selection.
    pub alpha: f64,
    /// Largest sample size tested by full enumeration.
    pub exact_limit: usize,
    /// Shuffles for the Monte Carlo test above `exact_limit`.
    pub permutations: usize,
    pub seed: RandomSeed,
}

impl Default for RankingConfig {
    fn default() -> Self {
        Self {
            theta: 0.3,
            alpha: 0.05,
            exact_limit: 8,
            permutations: 10_000,
            seed: RandomSeed::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedCandidate {
    pub id: String,
    pub kind: CandidateKind,
    pub rho: Option<f64>,
    pub p_value: Option<f64>,
    pub method: Option<PermutationMethod>,
    pub selected: bool,
    pub diagnostic: Option<String>,
}

/// Candidates ordered by |ρ| descending; undefined correlations last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorRanking {
    pub entries: Vec<RankedCandidate>,
    pub theta: f64,
    pub alpha: f64,
}

impl FactorRanking {
    pub fn selected(&self) -> impl Iterator<Item = &RankedCandidate> {
        self.entries.iter().filter(|e| e.selected)
    }

    pub fn get(&self, id: &str) -> Option<&RankedCandidate> {
        self.entries.iter().find(|e| e.id == id)
    }

    /// 0-based position of `id` in the ranking.
    pub fn position(&self, id: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.id == id)
    }
}

/// Ranks candidates by Spearman correlation with `target`.
pub fn rank_cost_drivers(
    candidates: &[Candidate],
    target: &[f64],
    config: &RankingConfig,
) -> Result<FactorRanking> {
    if target.len() < 4 {
        return Err(Error::InsufficientProjects {
            needed: 4,
            got: target.len(),
        });
    }
    if let Some(c) = candidates.iter().find(|c| c.values.len() != target.len()) {
        return Err(Error::LengthMismatch(format!(
            "candidate `{}` has {} values for {} projects",
            c.id,
            c.values.len(),
            target.len()
        )));
    }

    let mut entries: Vec<RankedCandidate> = candidates
        .iter()
        .map(|c| {
            let test = spearman_permutation_test(
                &c.values,
                target,
                config.exact_limit,
                config.permutations,
                config.seed.derive(&c.id),
            );
            match test {
                Some(t) => RankedCandidate {
                    id: c.id.clone(),
                    kind: c.kind,
                    rho: Some(t.rho),
                    p_value: Some(t.p_value),
                    method: Some(t.method),
                    selected: t.rho.abs() >= config.theta && t.p_value <= config.alpha,
                    diagnostic: None,
                },
                None => RankedCandidate {
                    id: c.id.clone(),
                    kind: c.kind,
                    rho: None,
                    p_value: None,
                    method: None,
                    selected: false,
                    diagnostic: Some(
                        "correlation undefined: candidate or target is constant".into(),
                    ),
                },
            }
        })
        .collect();

    entries.sort_by(|a, b| match (a.rho, b.rho) {
        (Some(x), Some(y)) => y.abs().total_cmp(&x.abs()).then_with(|| a.id.cmp(&b.id)),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => a.id.cmp(&b.id),
    });

    Ok(FactorRanking {
        entries,
        theta: config.theta,
        alpha: config.alpha,
    })
}

/// A pair of candidates that move together strongly enough to be either an
/// interaction or a redundancy; experts decide which.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Association {
    pub first: String,
    pub second: String,
    pub rho: f64,
}

pub fn detect_factor_associations(candidates: &[Candidate], threshold: f64) -> Vec<Association> {
    let mut pairs = Vec::new();
    for (i, a) in candidates.iter().enumerate() {
        for b in &candidates[i + 1..] {
            if a.values.len() != b.values.len() {
                continue;
            }
            if let Some(rho) = spearman(&a.values, &b.values) {
                if rho.abs() >= threshold {
                    pairs.push(Association {
                        first: a.id.clone(),
                        second: b.id.clone(),
                        rho,
                    });
                }
            }
        }
    }
    pairs
}

/// Overhead implied by the data: `effort · P / size − 1`.
pub fn empirical_overhead(effort: f64, size: f64, nominal_productivity: f64) -> Result<f64> {
    if !(size.is_finite() && size > 0.0) {
        return Err(Error::InvalidConfig(format!("size must be positive, got {size}")));
    }
    if !(nominal_productivity.is_finite() && nominal_productivity > 0.0) {
        return Err(Error::NonPositiveProductivity(nominal_productivity));
    }
    Ok(effort * nominal_productivity / size - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn empirical_overhead_examples() {
        assert_eq!(empirical_overhead(25.0, 10.0, 0.5).unwrap(), 0.25);
        assert_eq!(empirical_overhead(20.0, 10.0, 0.5).unwrap(), 0.0);
        assert_eq!(empirical_overhead(10.0, 10.0, 0.5).unwrap(), -0.5);
        assert!(empirical_overhead(10.0, 0.0, 0.5).is_err());
    }

    #[test]
    fn ranking_examples() {
        let target = [0.1, 0.2, 0.3, 0.4];
        let candidates = [
            Candidate::factor("mono", vec![0.0, 1.0, 2.0, 3.0]),
            Candidate::factor("flat", vec![2.0; 4]),
            Candidate::attribute("anti", vec![9.0, 7.0, 5.0, 1.0]),
        ];
        let config = RankingConfig {
            alpha: 0.1,
            ..Default::default()
        };
        let ranking = rank_cost_drivers(&candidates, &target, &config).unwrap();
        let mono = ranking.get("mono").unwrap();
        assert_eq!(mono.rho, Some(1.0));
        assert_eq!(mono.p_value, Some(2.0 / 24.0));
        assert!(mono.selected);
        let anti = ranking.get("anti").unwrap();
        assert_eq!(anti.rho, Some(-1.0));
        let flat = ranking.get("flat").unwrap();
        assert_eq!(flat.rho, None);
        assert!(!flat.selected);
        assert!(flat.diagnostic.is_some());
        assert_eq!(ranking.position("flat"), Some(2));
        // alpha 0.05 is below the smallest attainable p for n = 4
        let strict = rank_cost_drivers(&candidates, &target, &RankingConfig::default()).unwrap();
        assert_eq!(strict.selected().count(), 0);
    }

    #[test]
    fn ranking_needs_four_projects() {
        let c = [Candidate::factor("x", vec![1.0, 2.0, 3.0])];
        assert!(rank_cost_drivers(&c, &[1.0, 2.0, 3.0], &RankingConfig::default()).is_err());
        let c = [Candidate::factor("x", vec![1.0, 2.0, 3.0])];
        assert!(matches!(
            rank_cost_drivers(&c, &[1.0, 2.0, 3.0, 4.0], &RankingConfig::default()),
            Err(Error::LengthMismatch(_))
        ));
    }

    #[test]
    fn associations() {
        let col = vec![0.0, 1.0, 3.0, 2.0, 1.0];
        let same = [Candidate::factor("a", col.clone()), Candidate::factor("b", col.clone())];
        let found = detect_factor_associations(&same, 0.9);
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].rho, 1.0);

        let anti: Vec<f64> = col.iter().map(|v| -v).collect();
        let pair = [Candidate::factor("a", col), Candidate::factor("b", anti)];
        assert_eq!(detect_factor_associations(&pair, 0.5).len(), 1);

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let independent: Vec<Candidate> = (0..4)
            .map(|k| Candidate::attribute(format!("r{k}"), (0..200).map(|_| rng.random()).collect()))
            .collect();
        for pair in detect_factor_associations(&independent, 0.0) {
            assert!(pair.rho.abs() < 0.9);
        }
        assert!(detect_factor_associations(&independent, 0.9).is_empty());
    }
}
