// Rerouting mass along negative exchange cycles until no cycle is left.
//
// `cargo run --example improve`

use std::error::Error;

use otcert::prelude::*;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let inst = random_instance::<Rational>(&RandomSpec { x_size: 5, y_size: 5, uniform: true, inf_density: 0.0, seed: 11 })?;
    let start = random_permutation_plan(&inst, 5);

    if let Monotonicity::Violated(cycle) = check_c_monotone(&inst, &start)? {
        let stepped = improve_plan(&inst, &start, &cycle)?;
        let alpha = cycle.pairs.iter().map(|&(x, y)| start.mass(x, y).clone()).reduce(Rational::min_of).ok_or("nonempty")?;
        let before = total_cost(&inst, &start)?;
        let after = total_cost(&inst, &stepped)?;
        println!("cycle {:?} gap {} alpha {alpha}: cost {before} -> {after}", cycle.pairs, cycle.gap);
        assert_eq!(
            after.finite().cloned(),
            before.finite().map(|b| b.clone() - alpha * cycle.gap.clone())
        );
    }

    let run = improve_to_monotone(&inst, &start, None)?;
    let trajectory: Vec<String> = run.trajectory.iter().map(|v| v.to_string()).collect();
    println!("trajectory: {}", trajectory.join(" -> "));
    assert!(run.converged);
    let optimum = solve_exact(&inst).value;
    println!("final {} vs optimum {optimum}", run.trajectory.last().ok_or("nonempty")?);
    assert_eq!(ExtendedCost::Finite(run.trajectory.last().cloned().ok_or("nonempty")?), optimum);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
