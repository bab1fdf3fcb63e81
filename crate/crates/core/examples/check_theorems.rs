// The four plan properties agree on finite spaces: an optimal plan passes
// all of them, a non-optimal vertex plan fails all of them.
//
// `cargo run --example check_theorems`

use std::error::Error;

use otcert::cli::{check_report, Options, CLAIM_MONOTONE, CLAIM_OPTIMAL, CLAIM_ROBUST, CLAIM_STRONG};
use otcert::prelude::*;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let inst = random_instance::<Rational>(&RandomSpec { x_size: 4, y_size: 4, uniform: true, inf_density: 0.0, seed: 3 })?;
    let opts = Options { trials: 10, ..Options::default() };

    let optimal = check_report(&inst, None, &opts)?;
    print!("{}", optimal.render_text());
    assert!(optimal.passed());

    let worse = (0..64)
        .map(|seed| random_vertex_plan(&inst, seed))
        .find(|p| !is_optimal(&inst, p).map(|c| c.optimal).unwrap_or(true))
        .ok_or("some vertex is not optimal")?;
    let report = check_report(&inst, Some(&worse), &opts)?;
    print!("{}", report.render_text());
    for claim in [CLAIM_OPTIMAL, CLAIM_MONOTONE, CLAIM_ROBUST, CLAIM_STRONG] {
        assert!(!report.verdict_for(claim).ok_or("claim reported")?.pass);
    }
    // the implications themselves still hold
    assert!(report.verdicts.iter().filter(|v| v.claim.contains("=")).all(|v| v.pass));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
