// Storage extensions: tolls built from the potentials keep the plan
// optimal, and randomly raised tolls never make it beatable.
//
// `cargo run --example robust_defense`

use std::error::Error;

use otcert::prelude::*;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let inst = random_instance::<Rational>(&RandomSpec { x_size: 4, y_size: 3, uniform: false, inf_density: 0.0, seed: 9 })?;
    let plan = solve_exact(&inst).plan;

    for lambda in [Rational::from_ratio(1, 2), Rational::from_ratio(1, 1)] {
        let report = check_robust_defense(&inst, &plan, &[lambda.clone(), lambda.clone()])?;
        let tolls_in: Vec<String> = (0..inst.x_size()).map(|x| report.extension.toll_in(x).to_string()).collect();
        let tolls_out: Vec<String> = (0..inst.y_size()).map(|y| report.extension.toll_out(y).to_string()).collect();
        println!("λ={lambda}: tolls in {tolls_in:?} out {tolls_out:?}, extended gap {}", report.gap);
        assert!(report.defended);
    }

    let adv = adversarial_search(&inst, &plan, &[Rational::from_ratio(1, 1)], 25, 42)?;
    println!("adversary: {}", adv.to_json());
    assert_eq!(adv.improving_trials, 0);

    // without defending tolls a suboptimal plan is beaten
    let bad = random_vertex_plan(&inst, 1);
    if !is_optimal(&inst, &bad)?.optimal {
        let adv = adversarial_search(&inst, &bad, &[Rational::from_ratio(1, 1)], 5, 42)?;
        println!("suboptimal plan: {}", adv.to_json());
        assert!(adv.max_improvement.is_some_and(|m| m > Rational::from_ratio(0, 1)));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
