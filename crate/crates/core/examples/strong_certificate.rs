// Dual potentials for the lower-triangular `1 − √(x−y)` cost. Every grid
// point is its own connectivity class, and the glued potential still has
// to fall by √N between the two ends of the grid.
//
// `cargo run --example strong_certificate`

use std::error::Error;

use otcert::prelude::*;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    for n in [4usize, 16] {
        let inst = zero_one::<Rational>(n)?;
        let plan = identity_plan(&inst);
        let cert = certify_strong(&inst, &plan)?;
        let phi: Vec<f64> = cert.pair.phi.iter().map(|v| v.finite().map_or(f64::NEG_INFINITY, |x| x.to_f64())).collect();
        let drop = phi[0] - phi[n];
        println!(
            "N={n}: {} classes, φ(0) − φ(N) = {drop:.6} (√N = {}), dual {} = primal {}",
            cert.decomposition.classes.len(),
            (n as f64).sqrt(),
            cert.dual_value,
            cert.primal_value
        );
        assert!(drop >= (n as f64).sqrt() - 1e-9);
        assert!(cert.report.passed);
        assert_eq!(cert.dual_value, cert.primal_value);
    }

    // a single connecting class: the chain potential and its c-transform
    let inst = random_instance::<Rational>(&RandomSpec { x_size: 3, y_size: 3, uniform: true, inf_density: 0.0, seed: 2 })?;
    let plan = solve_exact(&inst).plan;
    let sup = support(&plan, &default_threshold());
    let phi = ruschendorf_phi(&inst, &sup, sup.pairs()[0])?;
    let sources = sup.sources();
    let psi = c_transform(&inst, &phi, &sources)?;
    let pair = PotentialPair { phi, psi, anchor: sup.pairs()[0] };
    println!("{}", pair.to_json());
    assert!(verify_strong_monotonicity(&inst, &plan, &pair).passed);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
