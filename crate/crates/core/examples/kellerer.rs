// Coupling mass P(B) against the cheapest L-shaped cover L(B).
//
// `cargo run --example kellerer`

use std::error::Error;

use otcert::prelude::*;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let q = Rational::from_ratio;

    let cases: Vec<(&str, MultiMarginalInstance<Rational>)> = vec![
        ("single cell", MultiMarginalInstance::uniform(&[2, 2], vec![vec![0, 0]])?),
        ("diagonal", MultiMarginalInstance::uniform(&[2, 2], vec![vec![0, 0], vec![1, 1]])?),
        ("empty", MultiMarginalInstance::uniform(&[2, 2], vec![])?),
        ("three marginals", strict_three_marginal_example()),
    ];
    for (name, mmi) in &cases {
        let d = check_dichotomy(mmi)?;
        println!(
            "{name}: P = {}, L = {} (cover {:?}), fractional cover {}",
            d.p.value, d.l.value, d.l.cover, d.relaxation.value
        );
        assert!(d.passed());
    }
    let strict = check_dichotomy(&strict_three_marginal_example::<Rational>())?;
    assert_eq!((strict.p.value, strict.l.value), (q(3, 4), q(1, 1)));

    // a tuple through a weightless point is covered at no cost
    let null = MultiMarginalInstance::new(vec![vec![q(1, 1), q(0, 1)], vec![q(1, 2), q(1, 2)]], vec![vec![1, 1]])?;
    let d = check_dichotomy(&null)?;
    println!("null set: {}", d.to_json()["alternative"]);
    assert!(matches!(d.alternative, Alternative::LShapedNull { .. }));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
