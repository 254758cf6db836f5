//! Build a causal model with an interaction, check it, and evaluate the
//! overhead of a few rating vectors at fixed multiplier values.
//!
//! ```bash
//! cargo run -p cobra --example causal_model
//! ```

use cobra::prelude::*;

pub fn run_example() -> cobra::Result<()> {
    let model = CausalModel {
        factors: vec![
            CostFactor::new("volatility", "Requirements volatility"),
            CostFactor::new("experience", "Domain experience").with_direction(Direction::Negative),
            CostFactor::new("complexity", "Product complexity")
                .with_scale(OrdinalScale::with_levels(4)?),
        ],
        direct: vec![
            DirectInfluence::new("volatility", TriangularParams::new(0.10, 0.20, 0.40)),
            DirectInfluence::new("complexity", TriangularParams::new(0.20, 0.30, 0.60)),
        ],
        // inexperienced teams suffer more from volatile requirements
        interactions: vec![InteractionInfluence::new(
            "volatility",
            "experience",
            Sign::Plus,
            TriangularParams::new(0.05, 0.10, 0.20),
        )],
    }
    .validated()?;

    let likely = MultiplierDraw::from_model(&model, |t| t.likely);
    for (label, vol, exp_raw, cplx) in [
        ("nominal", 0, 3, 0),
        ("volatile, experienced", 3, 3, 0),
        ("volatile, novice", 3, 0, 0),
        ("worst case", 3, 0, 4),
    ] {
        // experience is rated high-is-good; reverse-code it
        let raw = [("volatility", vol), ("experience", exp_raw), ("complexity", cplx)]
            .into_iter()
            .map(|(f, r)| (f.to_string(), r))
            .collect();
        let ratings = RatingVector::from_raw(&model, &raw)?;
        let co = evaluate_overhead(&model, &ratings, &likely)?;
        println!("{label:<24} overhead {:>6.1}%", 100.0 * co);
    }

    let mut broken = model.clone();
    broken.direct.clear();
    for violation in validate_model(&broken) {
        println!("rejected: {violation}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("causal model example");
}
