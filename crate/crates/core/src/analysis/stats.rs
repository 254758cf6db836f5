//! Small-sample rank statistics with exact p-values.

use itertools::Itertools;
use rand::seq::SliceRandom;

use crate::sampling::RandomSeed;

/// Slack for "at least as extreme" comparisons between floating statistics.
const TIE_EPS: f64 = 1e-9;

/// 1-based ranks, ties share the average of the ranks they span.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let order: Vec<usize> = (0..values.len())
        .sorted_by(|&a, &b| values[a].total_cmp(&values[b]))
        .collect();
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Pearson correlation; `None` when either side has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len(), "pearson on unequal lengths");
    let n = x.len();
    if n < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman's rank correlation with midranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    pearson(&midranks(x), &midranks(y))
}

/// How a permutation p-value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PermutationMethod {
    Exhaustive,
    MonteCarlo { permutations: usize },
}

/// Spearman correlation plus its two-sided permutation p-value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpearmanTest {
    pub rho: f64,
    pub p_value: f64,
    pub method: PermutationMethod,
}

/// Two-sided permutation test of Spearman's ρ.
///
/// Up to `exact_limit` observations every permutation of the `y` ranks is
/// enumerated and `p = #{|ρ_π| >= |ρ|} / n!`. Beyond that, `permutations`
/// seeded shuffles give `p = (hits + 1) / (permutations + 1)`.
pub fn spearman_permutation_test(
    x: &[f64],
    y: &[f64],
    exact_limit: usize,
    permutations: usize,
    seed: RandomSeed,
) -> Option<SpearmanTest> {
    let rx = midranks(x);
    let ry = midranks(y);
    let rho = pearson(&rx, &ry)?;

    let n = rx.len();
    let mean = (n as f64 + 1.0) / 2.0;
    let cx: Vec<f64> = rx.iter().map(|r| r - mean).collect();
    let cy: Vec<f64> = ry.iter().map(|r| r - mean).collect();
    let norm = (cx.iter().map(|v| v * v).sum::<f64>() * cy.iter().map(|v| v * v).sum::<f64>())
        .sqrt();
    let observed = rho.abs() - TIE_EPS;
    let extreme = |perm: &[f64]| -> bool {
        let dot: f64 = cx.iter().zip(perm).map(|(a, b)| a * b).sum();
        (dot / norm).abs() >= observed
    };

    if n <= exact_limit {
        let mut hits = 0usize;
        let mut total = 0usize;
        for perm in cy.iter().copied().permutations(n) {
            total += 1;
            if extreme(&perm) {
                hits += 1;
            }
        }
        Some(SpearmanTest {
            rho,
            p_value: hits as f64 / total as f64,
            method: PermutationMethod::Exhaustive,
        })
    } else {
        let mut rng = seed.stream(0);
        let mut perm = cy.clone();
        let mut hits = 0usize;
        for _ in 0..permutations {
            perm.shuffle(&mut rng);
            if extreme(&perm) {
                hits += 1;
            }
        }
        Some(SpearmanTest {
            rho,
            p_value: (hits + 1) as f64 / (permutations + 1) as f64,
            method: PermutationMethod::MonteCarlo { permutations },
        })
    }
}

/// Exact two-sided Mann-Whitney rank-sum p-value.
///
/// Enumerates all `C(n, n_a)` ways to assign the pooled midranks to the first
/// group and counts sums at least as far from `n_a (n + 1) / 2` as observed.
pub fn rank_sum_exact_p(group_a: &[f64], group_b: &[f64]) -> f64 {
    let pooled: Vec<f64> = group_a.iter().chain(group_b).copied().collect();
    let ranks = midranks(&pooled);
    let n_a = group_a.len();
    let n = pooled.len();
    let expected = n_a as f64 * (n as f64 + 1.0) / 2.0;
    let observed = (ranks[..n_a].iter().sum::<f64>() - expected).abs() - TIE_EPS;

    let mut hits = 0usize;
    let mut total = 0usize;
    for subset in ranks.iter().combinations(n_a) {
        total += 1;
        let sum: f64 = subset.into_iter().sum();
        if (sum - expected).abs() >= observed {
            hits += 1;
        }
    }
    hits as f64 / total as f64
}

/// `C(n, k)` as a float, for feasibility checks.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Average-of-middle median of a sorted slice.
pub(crate) fn median_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Tukey hinges of unsorted data. For odd `n` both halves include the median.
pub fn tukey_hinges(values: &[f64]) -> Option<(f64, f64)> {
    if values.len() < 2 {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let half = n.div_ceil(2);
    Some((
        median_sorted(&sorted[..half]),
        median_sorted(&sorted[n - half..]),
    ))
}
