//! Seeded generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use cobra::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    RandomSeed(seed).stream(0)
}

fn triangular(rng: &mut ChaCha8Rng, allow_negative: bool) -> TriangularParams {
    let lo = if allow_negative { -0.3 } else { 0.0 };
    let a = rng.random_range(lo..0.5);
    let c = a + rng.random_range(0.0..0.3);
    let b = c + rng.random_range(0.0..0.3);
    TriangularParams::new(a, c, b)
}

/// A valid model with 1-4 factors. Interactions only use factors without
/// a direct influence as the indirect side, which keeps the depth at two.
pub fn random_model(rng: &mut ChaCha8Rng, plus_only: bool) -> CausalModel {
    let k = rng.random_range(1..=4usize);
    let factors: Vec<CostFactor> = (0..k)
        .map(|i| {
            CostFactor::new(format!("f{i}"), format!("Factor {i}"))
                .with_scale(OrdinalScale::with_levels(rng.random_range(1..=5)).unwrap())
        })
        .collect();
    let direct_count = rng.random_range(1..=k);
    let direct: Vec<DirectInfluence> = (0..direct_count)
        .map(|i| DirectInfluence::new(format!("f{i}"), triangular(rng, !plus_only)))
        .collect();
    let mut interactions = Vec::new();
    for d in 0..direct_count {
        for i in direct_count..k {
            if rng.random_bool(0.5) {
                let sign = if plus_only || rng.random_bool(0.5) { Sign::Plus } else { Sign::Minus };
                interactions.push(InteractionInfluence::new(
                    format!("f{d}"),
                    format!("f{i}"),
                    sign,
                    triangular(rng, false),
                ));
            }
        }
    }
    let model = CausalModel {
        factors,
        direct,
        interactions,
    };
    assert!(validate_model(&model).is_empty(), "generator produced an invalid model");
    model
}

pub fn random_ratings(rng: &mut ChaCha8Rng, model: &CausalModel) -> RatingVector {
    model
        .factors
        .iter()
        .map(|f| (f.id.clone(), rng.random_range(0..=f.scale.level_count())))
        .collect()
}

pub fn random_draw(rng: &mut ChaCha8Rng, model: &CausalModel) -> MultiplierDraw {
    let mut draw = MultiplierDraw::new();
    for (key, p) in model.influences() {
        let u: f64 = rng.random();
        draw.insert(key, p.min + u * (p.max - p.min));
    }
    draw
}

/// Sample set with frequent ties: values are small integers.
pub fn random_samples(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = rng.random_range(1..=50usize);
    (0..n).map(|_| f64::from(rng.random_range(0..20u32))).collect()
}

/// Project records with arbitrary (but representable) content.
pub fn random_projects(rng: &mut ChaCha8Rng) -> Vec<ProjectRecord> {
    let n = rng.random_range(1..=6usize);
    let phases = ["design", "impl", "test"];
    (0..n)
        .map(|i| {
            let mut p = ProjectRecord {
                id: format!("proj-{i}"),
                size: rng.random_bool(0.9).then(|| rng.random_range(1.0..500.0)),
                ..ProjectRecord::default()
            };
            for phase in phases {
                if rng.random_bool(0.8) {
                    p.phase_efforts.insert(phase.into(), rng.random_range(0.0..1e4));
                }
            }
            let mut experts: BTreeMap<String, RatingVector> = BTreeMap::new();
            for expert in ["e1", "e2"] {
                for factor in ["vol", "team_size"] {
                    if rng.random_bool(0.7) {
                        experts
                            .entry(expert.into())
                            .or_default()
                            .insert(factor, rng.random_range(0..=4));
                    }
                }
            }
            p.ratings = experts;
            if rng.random_bool(0.7) {
                p.attributes.insert("team".into(), AttributeValue::Numeric(f64::from(rng.random_range(1..20u32))));
            }
            if rng.random_bool(0.7) {
                let lang = ["c", "java", "ada"][rng.random_range(0..3)];
                p.attributes.insert("lang".into(), AttributeValue::Categorical(lang.into()));
            }
            p
        })
        .collect()
}

/// Smallest sample `x` with `#{s <= x} / n >= k / 100`, by integer counting.
pub fn oracle_quantile(samples: &[f64], k: usize) -> f64 {
    let n = samples.len();
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    for &x in &sorted {
        let count = samples.iter().filter(|&&s| s <= x).count();
        if count * 100 >= k * n {
            return x;
        }
    }
    unreachable!("k <= 100")
}

pub fn oracle_exceedance(samples: &[f64], budget: f64) -> f64 {
    samples.iter().filter(|&&s| s > budget).count() as f64 / samples.len() as f64
}

/// Budgets below, between and above the distinct sample values.
pub fn probe_budgets(samples: &[f64]) -> Vec<f64> {
    let mut distinct = samples.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let mut out = vec![distinct[0] - 1.0];
    out.extend(distinct.windows(2).map(|w| (w[0] + w[1]) / 2.0));
    out.extend(distinct.iter().copied());
    out.push(distinct[distinct.len() - 1] + 1.0);
    out
}

/// Minimum and maximum of the overhead over every min/max corner.
pub fn brute_force_corners(model: &CausalModel, ratings: &RatingVector) -> (f64, f64) {
    let influences = model.influences();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for mask in 0..(1u32 << influences.len()) {
        let mut draw = MultiplierDraw::new();
        for (bit, (key, p)) in influences.iter().enumerate() {
            draw.insert(key.clone(), if mask & (1 << bit) == 0 { p.min } else { p.max });
        }
        let co = evaluate_overhead(model, ratings, &draw).unwrap();
        lo = lo.min(co);
        hi = hi.max(co);
    }
    (lo, hi)
}

/// Triangular quantile by bisection on the closed-form CDF.
pub fn bisect_triangular(a: f64, c: f64, b: f64, u: f64) -> f64 {
    let cdf = |x: f64| {
        if x <= a {
            0.0
        } else if x <= c {
            (x - a) * (x - a) / ((b - a) * (c - a))
        } else if x < b {
            1.0 - (b - x) * (b - x) / ((b - a) * (b - c))
        } else {
            1.0
        }
    };
    let (mut lo, mut hi) = (a, b);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
