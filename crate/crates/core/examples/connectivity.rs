// Splitting a support into connectivity classes and checking that no
// finite plan can move mass between them.
//
// `cargo run --example connectivity`

use std::error::Error;

use otcert::prelude::*;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let inst = block_instance::<Rational>(3, 4)?;
    let plan = solve_exact(&inst).plan;
    let sup = support(&plan, &default_threshold());
    let dec = decompose(&inst, &sup)?;
    println!("classes: {}", dec.to_json());
    println!("connecting: {}", is_connecting(&inst, &sup)?);

    let report = check_class_confinement(&inst, &dec)?;
    let masses: Vec<String> = report.class_mass.iter().map(|m| m.to_string()).collect();
    println!(
        "class masses {masses:?}, off-class mass {}, stochastic {}, invariant {}",
        report.max_off_class_mass, report.stochastic, report.invariant
    );
    assert!(report.confined() && report.stochastic && report.invariant);

    // several classes, yet the potentials glue into one certificate
    let cert = certify_strong(&inst, &plan)?;
    println!("offsets per class: {:?}", cert.offsets.iter().map(|o| o.to_string()).collect::<Vec<_>>());
    assert!(cert.report.passed);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
