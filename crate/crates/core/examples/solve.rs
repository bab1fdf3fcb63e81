// Exact minimum-cost plans for the three built-in families.
//
// `cargo run --example solve`

use std::error::Error;

use otcert::prelude::*;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let q = |n: i64| Rational::from_ratio(n, 1);

    // cyclic costs: diagonal a, next neighbour b, everything else infinite
    for (a, b) in [(2, 1), (1, 2)] {
        let inst = ambrosio_pratelli::<Rational>(3, q(a), q(b))?;
        let best = solve_exact(&inst);
        println!("ap N=3 a={a} b={b}: optimum {}", best.value);
        assert_eq!(best.value, ExtendedCost::Finite(q(a.min(b))));
    }

    // discretized shift: optimum just above 1
    for n in [4, 10] {
        let inst = shifted_interval::<Rational>(n)?;
        let value = solve_exact(&inst).value;
        let v = value.finite().ok_or("shift instance is feasible")?;
        println!("shift N={n}: optimum {v} ≈ {:.6}", v.to_f64());
        assert!(*v > q(1) && *v <= q(1) + Rational::from_ratio(3, n as i64));
    }

    // no finite plan at all
    let blocked = Instance::new(
        vec![q(1)],
        vec![Rational::from_ratio(1, 2); 2],
        vec![vec![ExtendedCost::Infinite, ExtendedCost::Infinite]],
    )?;
    let best = solve_exact(&blocked);
    println!("all-infinite row: feasible = {}", best.feasible);
    assert!(!best.feasible);

    // the enumeration oracle agrees with the solver
    let inst = random_instance::<Rational>(&RandomSpec { x_size: 3, y_size: 4, uniform: false, inf_density: 0.0, seed: 7 })?;
    let solver = solve_exact(&inst).value;
    let oracle = brute_force_optimal(&inst)?;
    println!("random 3x4: solver {solver}, vertex enumeration {oracle}");
    assert_eq!(solver, oracle);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
