mod common;

use std::path::Path;

use cobra::io::{model_to_string, parse_model, parse_projects, projects_to_string, report_to_json};
use cobra::model::OverheadTerms;
use cobra::prelude::*;
use proptest::prelude::*;

fn nominal(model: &CausalModel) -> RatingVector {
    model.factors.iter().map(|f| (f.id.clone(), 0)).collect()
}

proptest! {
    #[test]
    fn nominal_ratings_cost_nothing(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let model = common::random_model(&mut rng, false);
        let draw = common::random_draw(&mut rng, &model);
        prop_assert_eq!(evaluate_overhead(&model, &nominal(&model), &draw).unwrap(), 0.0);
    }

    #[test]
    fn raising_a_rating_never_lowers_overhead(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let model = common::random_model(&mut rng, true);
        let ratings = common::random_ratings(&mut rng, &model);
        let draw = common::random_draw(&mut rng, &model);
        let base = evaluate_overhead(&model, &ratings, &draw).unwrap();
        for f in &model.factors {
            let r = ratings.get(&f.id).unwrap();
            if r < f.scale.level_count() {
                let mut up = ratings.clone();
                up.insert(f.id.clone(), r + 1);
                prop_assert!(evaluate_overhead(&model, &up, &draw).unwrap() >= base - 1e-15);
            }
        }
    }

    #[test]
    fn corner_bounds_match_brute_force_and_contain_draws(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let model = common::random_model(&mut rng, false);
        let ratings = common::random_ratings(&mut rng, &model);
        let (lo, hi) = OverheadTerms::new(&model, &ratings).unwrap().bounds();
        if model.influences().len() <= 3 {
            let (blo, bhi) = common::brute_force_corners(&model, &ratings);
            prop_assert!((lo - blo).abs() <= 1e-12 && (hi - bhi).abs() <= 1e-12);
        }
        let dist = simulate_overhead(&model, &ratings, &SamplePlan::monte_carlo(200).unwrap(), RandomSeed(seed)).unwrap();
        for &co in dist.samples() {
            prop_assert!(co >= lo - 1e-12 && co <= hi + 1e-12);
        }
    }

    #[test]
    fn simulation_is_deterministic(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let model = common::random_model(&mut rng, false);
        let ratings = common::random_ratings(&mut rng, &model);
        let plan = SamplePlan::latin_hypercube(300).unwrap();
        let a = simulate_overhead(&model, &ratings, &plan, RandomSeed(seed)).unwrap();
        let b = simulate_overhead(&model, &ratings, &plan, RandomSeed(seed)).unwrap();
        prop_assert_eq!(a.samples(), b.samples());
    }

    #[test]
    fn effort_is_affine_in_size(seed in any::<u64>(), scale in 1u32..50) {
        let mut rng = common::rng(seed);
        let model = common::random_model(&mut rng, true);
        let ratings = common::random_ratings(&mut rng, &model);
        let plan = SamplePlan::latin_hypercube(200).unwrap();
        let one = estimate_cost(&model, &ratings, 10.0, 0.5, &plan, RandomSeed(seed)).unwrap();
        let many = estimate_cost(&model, &ratings, 10.0 * f64::from(scale), 0.5, &plan, RandomSeed(seed)).unwrap();
        for (a, b) in one.samples().iter().zip(many.samples()) {
            prop_assert!((a * f64::from(scale) - b).abs() <= 1e-9 * b.abs().max(1.0));
        }
    }

    #[test]
    fn risk_queries_match_counting_oracles(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let samples = common::random_samples(&mut rng);
        let dist = CostDistribution::from_samples(samples.clone());
        for k in 1..=99 {
            prop_assert_eq!(quantile(&dist, k as f64 / 100.0).unwrap(), common::oracle_quantile(&samples, k));
        }
        for b in common::probe_budgets(&samples) {
            prop_assert_eq!(exceedance_probability(&dist, b).unwrap(), common::oracle_exceedance(&samples, b));
        }
    }

    #[test]
    fn model_documents_round_trip(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let model = common::random_model(&mut rng, false);
        let text = model_to_string(&model);
        let parsed = parse_model(&text, Path::new("m.json")).unwrap();
        prop_assert_eq!(&parsed, &model);
        prop_assert_eq!(model_to_string(&parsed), text);
    }

    #[test]
    fn project_tables_round_trip(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let projects = common::random_projects(&mut rng);
        let text = projects_to_string(&projects);
        let parsed = parse_projects(&text, Path::new("p.csv")).unwrap();
        prop_assert_eq!(&parsed, &projects);
        prop_assert_eq!(projects_to_string(&parsed), text);
    }
}

fn light_config(seed: u64) -> IterationConfig {
    IterationConfig {
        plan: SamplePlan::latin_hypercube(300).unwrap(),
        seed: RandomSeed(seed),
        permutations: 200,
        ..IterationConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn iteration_is_idempotent_and_leaves_input_alone(seed in 0u64..1_000) {
        let spec = SyntheticSpec::new(reference_model(), 0.1, 10)
            .with_seed(RandomSeed(seed))
            .with_noise(0.05)
            .with_decoys(2)
            .with_defect(PlantedDefect::Outlier { project: 3, factor: 3.0 });
        let data = generate_synthetic_dataset(&spec).unwrap();
        let before = data.projects.clone();
        let config = light_config(seed);
        let a = run_iteration(&spec.model, &data.projects, &config).unwrap();
        let b = run_iteration(&spec.model, &data.projects, &config).unwrap();
        prop_assert_eq!(report_to_json(&a), report_to_json(&b));
        prop_assert_eq!(&data.projects, &before);

        let kinds = [SuggestionKind::RemoveOutlier, SuggestionKind::FixEffortScope];
        let out = apply_suggestions(&data.projects, &a, &kinds);
        prop_assert_eq!(&data.projects, &before);
        prop_assert!(out.projects.len() <= before.len());
    }
}

#[test]
fn calibration_recovers_productivity_from_exact_data() {
    for seed in 0..20 {
        let p = 0.05 + 0.01 * seed as f64;
        let spec = SyntheticSpec::new(reference_model(), p, 12).with_seed(RandomSeed(seed));
        let data = generate_synthetic_dataset(&spec).unwrap();
        let points: Vec<CalibrationPoint> = data
            .projects
            .iter()
            .map(|r| CalibrationPoint::new(&r.id, r.size.unwrap(), r.raw_effort(), data.truth.overheads[&r.id]))
            .collect();
        let fit = fit_nominal_productivity(&points).unwrap();
        assert!((fit.nominal_productivity - p).abs() / p <= 1e-9, "seed {seed}");
    }
}
