//! Answer the two classic risk questions on a cost distribution: how likely
//! is a budget to be overrun, and what budget keeps the overrun risk at a
//! given level. The distribution is also exported as CDF points.
//!
//! ```bash
//! cargo run -p cobra --example risk_queries
//! ```

use cobra::prelude::*;

pub fn run_example() -> cobra::Result<()> {
    let model = reference_model();
    let ratings: RatingVector = [
        ("volatility", 3),
        ("experience", 2),
        ("complexity", 2),
        ("pressure", 1),
        ("distribution", 0),
    ]
    .into_iter()
    .collect();
    let plan = SamplePlan::default();
    let cost = estimate_cost(&model, &ratings, 80.0, 0.1, &plan, RandomSeed(11))?;

    println!("point estimate {:.1}", point_estimate(&cost)?);
    for budget in [1_300.0, 1_400.0, 1_500.0] {
        let risk = exceedance_probability(&cost, budget)?;
        println!("budget {budget:>6.0}: overrun {:>5.1}%", 100.0 * risk);
    }
    for risk in [0.5, 0.3, 0.1] {
        let budget = quantile(&cost, 1.0 - risk)?;
        println!("accept {:>3.0}% overrun risk: budget {budget:.1}", 100.0 * risk);
    }

    let dir = tempfile::tempdir().map_err(|source| cobra::Error::Io {
        path: std::env::temp_dir(),
        source,
    })?;
    let path = dir.path().join("cdf.csv");
    cobra::io::emit_cdf(&cost, &path)?;
    println!("wrote {} CDF points", cost.samples().len());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("risk queries example");
}
