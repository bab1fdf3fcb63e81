//! Instance generators: finite discretizations of the classical
//! counterexamples plus seeded random and block-structured instances.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{ExtendedCost, Instance, TransportPlan};
use crate::scalar::Scalar;

fn uniform<S: Scalar>(n: usize) -> Vec<S> {
    vec![S::from_ratio(1, n as i64); n]
}

/// Cyclic group of order `n`: cost `a` on the diagonal, `b` on `(i, i+1 mod n)`,
/// infinite elsewhere. Uniform weights.
pub fn ambrosio_pratelli<S: Scalar>(n: usize, a: S, b: S) -> Result<Instance<S>> {
    if n < 2 {
        return Err(Error::BadParameter(format!("ap needs N >= 2, got {n}")));
    }
    let cost = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if j == i {
                        ExtendedCost::Finite(a.clone())
                    } else if j == (i + 1) % n {
                        ExtendedCost::Finite(b.clone())
                    } else {
                        ExtendedCost::Infinite
                    }
                })
                .collect()
        })
        .collect();
    Instance::new(uniform(n), uniform(n), cost)
}

/// Grid version of moving `[0,1)` onto `[1,2)` with squared distance, where
/// moving by exactly 1 is repriced to 2. Sources `i/n`, targets `1 + j/n`.
pub fn shifted_interval<S: Scalar>(n: usize) -> Result<Instance<S>> {
    if n < 2 {
        return Err(Error::BadParameter(format!("shift needs N >= 2, got {n}")));
    }
    let nn = n as i64;
    let cost = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        ExtendedCost::Finite(S::from_ratio(2, 1))
                    } else {
                        // y - x = 1 + (j - i)/n
                        let d = S::from_ratio(nn + j as i64 - i as i64, nn);
                        ExtendedCost::Finite(d.clone() * d)
                    }
                })
                .collect()
        })
        .collect();
    Instance::new(uniform(n), uniform(n), cost)
}

/// `n + 1` grid points `k/n` on both sides; cost infinite above the diagonal
/// (target beyond source) and `1 − √(x − y)` on or below it. The square root is
/// evaluated in `f64` and converted exactly.
pub fn zero_one<S: Scalar>(n: usize) -> Result<Instance<S>> {
    if n < 1 {
        return Err(Error::BadParameter("zero-one needs N >= 1".into()));
    }
    let cost = (0..=n)
        .map(|j| (0..=n).map(|k| zero_one_cost(n, j, k)).collect())
        .collect();
    Instance::new(uniform(n + 1), uniform(n + 1), cost)
}

/// Cost between source `j/n` and target `k/n` in [`zero_one`].
pub fn zero_one_cost<S: Scalar>(n: usize, j: usize, k: usize) -> ExtendedCost<S> {
    if k > j {
        ExtendedCost::Infinite
    } else if k == j {
        ExtendedCost::Finite(S::one())
    } else {
        ExtendedCost::Finite(S::from_f64(1.0 - ((j - k) as f64 / n as f64).sqrt()))
    }
}

#[derive(Debug, Clone)]
pub struct RandomSpec {
    pub x_size: usize,
    pub y_size: usize,
    /// Uniform weights instead of random ones.
    pub uniform: bool,
    /// Probability that a cell gets infinite cost.
    pub inf_density: f64,
    pub seed: u64,
}

/// Random weights are integers in `1..=9` normalized; costs are multiples of
/// `1/4` in `[0, 10]`.
pub fn random_instance<S: Scalar>(spec: &RandomSpec) -> Result<Instance<S>> {
    if spec.x_size == 0 || spec.y_size == 0 {
        return Err(Error::BadParameter("random needs positive sizes".into()));
    }
    if !(0.0..=1.0).contains(&spec.inf_density) {
        return Err(Error::BadParameter(format!("inf density {} outside [0,1]", spec.inf_density)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let weights = |n: usize, rng: &mut ChaCha8Rng| -> Vec<S> {
        if spec.uniform {
            return uniform(n);
        }
        let raw: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=9)).collect();
        let total: i64 = raw.iter().sum();
        raw.into_iter().map(|w| S::from_ratio(w, total)).collect()
    };
    let mu = weights(spec.x_size, &mut rng);
    let nu = weights(spec.y_size, &mut rng);
    let cost = (0..spec.x_size)
        .map(|_| {
            (0..spec.y_size)
                .map(|_| {
                    if rng.gen_bool(spec.inf_density) {
                        ExtendedCost::Infinite
                    } else {
                        ExtendedCost::Finite(S::from_ratio(rng.gen_range(0..=40), 4))
                    }
                })
                .collect()
        })
        .collect();
    Instance::new(mu, nu, cost)
}

/// Block-structured instance: `blocks` groups with equal source and target
/// mass each; costs finite inside a block, infinite across blocks except for
/// random finite arcs from an earlier block's sources to a later block's
/// targets.
pub fn block_instance<S: Scalar>(blocks: usize, seed: u64) -> Result<Instance<S>> {
    if blocks == 0 {
        return Err(Error::BadParameter("need at least one block".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sizes: Vec<(usize, usize)> =
        (0..blocks).map(|_| (rng.gen_range(1..=3), rng.gen_range(1..=3))).collect();
    let block_mass: Vec<i64> = (0..blocks).map(|_| rng.gen_range(1..=5)).collect();
    let grand: i64 = block_mass.iter().sum();
    let split = |count: usize, mass: i64, rng: &mut ChaCha8Rng| -> Vec<S> {
        let raw: Vec<i64> = (0..count).map(|_| rng.gen_range(1..=4)).collect();
        let total: i64 = raw.iter().sum();
        raw.into_iter().map(|w| S::from_ratio(w * mass, total * grand)).collect()
    };
    let mut mu = Vec::new();
    let mut nu = Vec::new();
    let mut x_block = Vec::new();
    let mut y_block = Vec::new();
    for (b, &(m, n)) in sizes.iter().enumerate() {
        mu.extend(split(m, block_mass[b], &mut rng));
        nu.extend(split(n, block_mass[b], &mut rng));
        x_block.extend(std::iter::repeat_n(b, m));
        y_block.extend(std::iter::repeat_n(b, n));
    }
    let cost = x_block
        .iter()
        .map(|&bx| {
            y_block
                .iter()
                .map(|&by| {
                    let finite = bx == by || (bx < by && rng.gen_bool(0.5));
                    if finite {
                        ExtendedCost::Finite(S::from_ratio(rng.gen_range(0..=20), 2))
                    } else {
                        ExtendedCost::Infinite
                    }
                })
                .collect()
        })
        .collect();
    Instance::new(mu, nu, cost)
}

/// Diagonal plan `weights[i]` on `(i, i)`; requires `mu == nu`.
pub fn identity_plan<S: Scalar>(instance: &Instance<S>) -> TransportPlan<S> {
    let perm: Vec<usize> = (0..instance.x_size()).collect();
    TransportPlan::from_assignment(&perm, instance.y_size(), instance.mu())
}

/// Plan moving each source `i` to `(i + k) mod n` on a square uniform instance.
pub fn shift_plan<S: Scalar>(instance: &Instance<S>, k: usize) -> TransportPlan<S> {
    let n = instance.y_size();
    let perm: Vec<usize> = (0..instance.x_size()).map(|i| (i + k) % n).collect();
    TransportPlan::from_assignment(&perm, n, instance.mu())
}

/// Northwest-corner rule on the given row and column orders. Always a vertex
/// of `Π(μ, ν)`.
pub fn northwest_corner<S: Scalar>(
    instance: &Instance<S>,
    row_order: &[usize],
    col_order: &[usize],
) -> TransportPlan<S> {
    let mut row: Vec<S> = instance.mu().to_vec();
    let mut col: Vec<S> = instance.nu().to_vec();
    let mut plan = TransportPlan::zeros(instance.x_size(), instance.y_size());
    let (mut r, mut c) = (0, 0);
    while r < row_order.len() && c < col_order.len() {
        let (x, y) = (row_order[r], col_order[c]);
        let amount = S::min_of(row[x].clone(), col[y].clone());
        plan.set(x, y, amount.clone());
        row[x] = row[x].clone() - amount.clone();
        col[y] = col[y].clone() - amount;
        if row[x].approx_zero() {
            r += 1;
        } else {
            c += 1;
        }
    }
    plan
}

/// Northwest corner on seeded random row and column orders.
pub fn random_vertex_plan<S: Scalar>(instance: &Instance<S>, seed: u64) -> TransportPlan<S> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: Vec<usize> = (0..instance.x_size()).collect();
    let mut cols: Vec<usize> = (0..instance.y_size()).collect();
    rows.shuffle(&mut rng);
    cols.shuffle(&mut rng);
    northwest_corner(instance, &rows, &cols)
}

/// Random permutation plan on a square instance with uniform weights.
pub fn random_permutation_plan<S: Scalar>(instance: &Instance<S>, seed: u64) -> TransportPlan<S> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..instance.x_size()).collect();
    perm.shuffle(&mut rng);
    TransportPlan::from_assignment(&perm, instance.y_size(), instance.mu())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::marginals;
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    #[test]
    fn ambrosio_pratelli_matrix() {
        let inst = ambrosio_pratelli::<Rational>(3, q(1, 1), q(2, 1)).unwrap();
        let f = |v: i64| ExtendedCost::Finite(q(v, 1));
        let inf = ExtendedCost::Infinite;
        assert_eq!(
            inst.cost_rows(),
            vec![
                vec![f(1), f(2), inf.clone()],
                vec![inf.clone(), f(1), f(2)],
                vec![f(2), inf, f(1)],
            ]
        );
    }

    #[test]
    fn zero_one_entries() {
        let inst = zero_one::<Rational>(2).unwrap();
        assert_eq!(inst.x_size(), 3);
        let c10 = inst.finite_cost(1, 0).unwrap().to_f64();
        assert!((c10 - (1.0 - 0.5f64.sqrt())).abs() < 1e-15);
        assert_eq!(inst.cost(0, 1), &ExtendedCost::Infinite);
        assert_eq!(inst.finite_cost(2, 2), Some(&q(1, 1)));
    }

    #[test]
    fn shifted_interval_costs() {
        let inst = shifted_interval::<Rational>(4).unwrap();
        assert_eq!(inst.finite_cost(0, 0), Some(&q(2, 1)));
        assert_eq!(inst.finite_cost(0, 1), Some(&q(25, 16)));
        assert_eq!(inst.finite_cost(3, 0), Some(&q(1, 16)));
        assert!(!inst.has_infinite_cost());
    }

    #[test]
    fn random_generators_are_seeded() {
        let spec = RandomSpec { x_size: 3, y_size: 4, uniform: false, inf_density: 0.3, seed: 7 };
        let a = random_instance::<Rational>(&spec).unwrap();
        let b = random_instance::<Rational>(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(block_instance::<Rational>(3, 5).unwrap(), block_instance::<Rational>(3, 5).unwrap());
    }

    #[test]
    fn northwest_corner_has_right_marginals() {
        let spec = RandomSpec { x_size: 4, y_size: 3, uniform: false, inf_density: 0.0, seed: 1 };
        let inst = random_instance::<Rational>(&spec).unwrap();
        let plan = random_vertex_plan(&inst, 3);
        let (r, c) = marginals(&plan);
        assert_eq!(r, inst.mu());
        assert_eq!(c, inst.nu());
    }

    #[test]
    fn bad_parameters() {
        assert!(ambrosio_pratelli::<Rational>(1, q(1, 1), q(1, 1)).is_err());
        assert!(shifted_interval::<Rational>(1).is_err());
        assert!(zero_one::<Rational>(0).is_err());
        let spec = RandomSpec { x_size: 0, y_size: 1, uniform: true, inf_density: 0.0, seed: 0 };
        assert!(random_instance::<Rational>(&spec).is_err());
    }
}
