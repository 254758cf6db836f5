//! Simulate the cost-overhead distribution of one project with plain Monte
//! Carlo and with Latin Hypercube sampling.
//!
//! ```bash
//! cargo run -p cobra --example overhead_simulation
//! ```

use cobra::prelude::*;

pub fn run_example() -> cobra::Result<()> {
    let model = cobra::synthetic::reference_model();
    let ratings: RatingVector = [
        ("volatility", 2),
        ("experience", 1),
        ("complexity", 3),
        ("pressure", 0),
        ("distribution", 2),
    ]
    .into_iter()
    .collect();

    let means = MultiplierDraw::from_model(&model, TriangularParams::mean);
    let expected = evaluate_overhead(&model, &ratings, &means)?;
    println!("expected overhead {expected:.5}");

    for plan in [SamplePlan::monte_carlo(1_000)?, SamplePlan::latin_hypercube(1_000)?] {
        let dist = simulate_overhead(&model, &ratings, &plan, RandomSeed(42))?;
        let s = dist.samples();
        println!(
            "{:?}: mean {:.5}  min {:.4}  median {:.4}  max {:.4}",
            plan.method,
            mean_overhead(&dist)?,
            s[0],
            s[s.len() / 2],
            s[s.len() - 1]
        );
    }

    // same seed, same samples
    let plan = SamplePlan::default();
    let a = simulate_overhead(&model, &ratings, &plan, RandomSeed(7))?;
    let b = simulate_overhead(&model, &ratings, &plan, RandomSeed(7))?;
    assert_eq!(a.samples(), b.samples());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("overhead simulation example");
}
