//! Exact minimum-cost transport restricted to finite-cost arcs, and an
//! enumeration oracle over the vertices of the transportation polytope.

use crate::error::{Error, Result};
use crate::flow::FlowNetwork;
use crate::model::{total_cost, ExtendedCost, Instance, TransportPlan};
use crate::scalar::Scalar;

/// Outcome of [`solve_exact`].
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalResult<S> {
    pub plan: TransportPlan<S>,
    pub value: ExtendedCost<S>,
    /// `false` when no plan with finite cost exists.
    pub feasible: bool,
}

struct TransportNetwork<S> {
    net: FlowNetwork<S>,
    source: usize,
    sink: usize,
    /// `(x, y, arc id)` for every finite-cost cell.
    cells: Vec<(usize, usize, usize)>,
}

/// Source, one node per x, one per y, sink. Arcs only on cells where
/// `arc_cost` returns a value.
fn build_network<S: Scalar>(
    instance: &Instance<S>,
    arc_cost: impl Fn(usize, usize) -> Option<S>,
) -> TransportNetwork<S> {
    let (m, n) = (instance.x_size(), instance.y_size());
    let source = m + n;
    let sink = m + n + 1;
    let mut net = FlowNetwork::new(m + n + 2);
    for (x, w) in instance.mu().iter().enumerate() {
        net.add_arc(source, x, Some(w.clone()), S::zero());
    }
    let mut cells = Vec::new();
    for x in 0..m {
        for y in 0..n {
            if let Some(c) = arc_cost(x, y) {
                let id = net.add_arc(x, m + y, None, c);
                cells.push((x, y, id));
            }
        }
    }
    for (y, w) in instance.nu().iter().enumerate() {
        net.add_arc(m + y, sink, Some(w.clone()), S::zero());
    }
    TransportNetwork { net, source, sink, cells }
}

impl<S: Scalar> TransportNetwork<S> {
    fn plan(&self, instance: &Instance<S>) -> TransportPlan<S> {
        let mut plan = TransportPlan::zeros(instance.x_size(), instance.y_size());
        for &(x, y, id) in &self.cells {
            plan.set(x, y, self.net.flow(id));
        }
        plan
    }
}

/// `true` iff some plan in `Π(μ, ν)` uses only finite-cost cells.
pub fn has_finite_plan<S: Scalar>(instance: &Instance<S>) -> bool {
    let mut tn = build_network(instance, |x, y| instance.finite_cost(x, y).map(|_| S::zero()));
    let total = instance.total_mass();
    let flow = tn.net.max_flow(tn.source, tn.sink, &total);
    flow.approx_eq(&total)
}

/// Cost-minimizing plan using finite-cost cells only.
pub fn solve_exact<S: Scalar>(instance: &Instance<S>) -> OptimalResult<S> {
    let infeasible = || OptimalResult {
        plan: TransportPlan::zeros(instance.x_size(), instance.y_size()),
        value: ExtendedCost::Infinite,
        feasible: false,
    };
    if !has_finite_plan(instance) {
        return infeasible();
    }
    let mut tn = build_network(instance, |x, y| instance.finite_cost(x, y).cloned());
    let total = instance.total_mass();
    let sent = tn.net.min_cost_flow(tn.source, tn.sink, &total);
    if !sent.approx_eq(&total) {
        return infeasible();
    }
    let plan = tn.plan(instance);
    let value = total_cost(instance, &plan).expect("dimensions agree");
    OptimalResult { plan, value, feasible: true }
}

/// Maximum mass a plan supported on finite-cost cells can place on cells
/// selected by `selected`. Errors when no finite plan exists.
pub fn max_mass_on<S: Scalar>(
    instance: &Instance<S>,
    selected: impl Fn(usize, usize) -> bool,
) -> Result<(S, TransportPlan<S>)> {
    if !has_finite_plan(instance) {
        return Err(Error::Infeasible);
    }
    let mut tn = build_network(instance, |x, y| {
        instance.finite_cost(x, y).map(|_| if selected(x, y) { -S::one() } else { S::zero() })
    });
    let total = instance.total_mass();
    let sent = tn.net.min_cost_flow(tn.source, tn.sink, &total);
    if !sent.approx_eq(&total) {
        return Err(Error::Infeasible);
    }
    let plan = tn.plan(instance);
    let mut mass = S::zero();
    for x in 0..instance.x_size() {
        for y in 0..instance.y_size() {
            if selected(x, y) {
                mass = mass + plan.mass(x, y).clone();
            }
        }
    }
    Ok((mass, plan))
}

/// Optimality verdict with `gap = cost(plan) − optimum ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalityCheck<S> {
    pub optimal: bool,
    pub gap: S,
    pub optimum: S,
}

pub fn is_optimal<S: Scalar>(
    instance: &Instance<S>,
    plan: &TransportPlan<S>,
) -> Result<OptimalityCheck<S>> {
    let cost = match total_cost(instance, plan)? {
        ExtendedCost::Finite(v) => v,
        ExtendedCost::Infinite => return Err(Error::InfinitePlanCost),
    };
    let best = solve_exact(instance);
    let optimum = best.value.finite().cloned().ok_or(Error::Infeasible)?;
    let gap = cost - optimum.clone();
    Ok(OptimalityCheck { optimal: !gap.is_pos(), gap, optimum })
}

/// Largest square size handled by permutation enumeration.
pub const MAX_PERMUTATION_SIZE: usize = 8;
/// Largest cell count handled by general vertex enumeration.
pub const MAX_VERTEX_CELLS: usize = 12;

/// Optimal value by exhaustive enumeration of the extreme points of
/// `Π(μ, ν)`. Square instances with uniform weights enumerate permutation
/// matrices; otherwise every basic feasible solution is enumerated.
pub fn brute_force_optimal<S: Scalar>(instance: &Instance<S>) -> Result<ExtendedCost<S>> {
    let (m, n) = (instance.x_size(), instance.y_size());
    if m == n && m <= MAX_PERMUTATION_SIZE && is_uniform(instance.mu()) && is_uniform(instance.nu()) {
        return Ok(best_permutation(instance));
    }
    if m * n <= MAX_VERTEX_CELLS {
        return Ok(vertices(instance)
            .iter()
            .map(|plan| total_cost(instance, plan).expect("dimensions agree"))
            .fold(ExtendedCost::Infinite, |a, b| if b < a { b } else { a }));
    }
    Err(Error::TooLarge(format!("{m}x{n} exceeds the enumeration bounds")))
}

fn is_uniform<S: Scalar>(w: &[S]) -> bool {
    w.windows(2).all(|p| p[0] == p[1])
}

fn best_permutation<S: Scalar>(instance: &Instance<S>) -> ExtendedCost<S> {
    let n = instance.x_size();
    let weight = instance.mu()[0].clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = ExtendedCost::Infinite;
    permute(&mut perm, 0, &mut |p| {
        let mut sum = ExtendedCost::zero();
        for (i, &j) in p.iter().enumerate() {
            sum = sum.add(instance.cost(i, j));
        }
        if let ExtendedCost::Finite(v) = sum {
            let v = v * weight.clone();
            if best.finite().is_none_or(|b| v < *b) {
                best = ExtendedCost::Finite(v);
            }
        }
    });
    best
}

fn permute(items: &mut [usize], k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}

/// All vertices of the transportation polytope: for every cell subset that
/// forms a forest, peel leaves to obtain the unique plan supported on it and
/// keep it when nonnegative with exact marginals.
pub fn vertices<S: Scalar>(instance: &Instance<S>) -> Vec<TransportPlan<S>> {
    let (m, n) = (instance.x_size(), instance.y_size());
    let cells = m * n;
    let mut out: Vec<TransportPlan<S>> = Vec::new();
    for subset in 1u32..(1u32 << cells) {
        if subset.count_ones() as usize > m + n - 1 {
            continue;
        }
        if let Some(plan) = peel(instance, subset) {
            if !out.contains(&plan) {
                out.push(plan);
            }
        }
    }
    out
}

fn peel<S: Scalar>(instance: &Instance<S>, subset: u32) -> Option<TransportPlan<S>> {
    let (m, n) = (instance.x_size(), instance.y_size());
    let mut open: Vec<(usize, usize)> =
        (0..m * n).filter(|k| subset & (1 << k) != 0).map(|k| (k / n, k % n)).collect();
    let mut row = instance.mu().to_vec();
    let mut col = instance.nu().to_vec();
    let mut plan = TransportPlan::zeros(m, n);
    while !open.is_empty() {
        let leaf = open.iter().position(|&(x, y)| {
            open.iter().filter(|c| c.0 == x).count() == 1 || open.iter().filter(|c| c.1 == y).count() == 1
        })?;
        let (x, y) = open.remove(leaf);
        let value = if open.iter().all(|c| c.0 != x) { row[x].clone() } else { col[y].clone() };
        if !value.is_pos() {
            return None;
        }
        row[x] = row[x].clone() - value.clone();
        col[y] = col[y].clone() - value.clone();
        plan.set(x, y, value);
    }
    if row.iter().chain(col.iter()).all(|r| r.approx_zero()) {
        Some(plan)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn fin(n: i64) -> ExtendedCost<Rational> {
        ExtendedCost::Finite(q(n, 1))
    }

    fn swap_instance() -> Instance<Rational> {
        Instance::new(
            vec![q(1, 2), q(1, 2)],
            vec![q(1, 2), q(1, 2)],
            vec![vec![fin(0), fin(1)], vec![fin(1), fin(0)]],
        )
        .unwrap()
    }

    #[test]
    fn solves_zero_diagonal() {
        let res = solve_exact(&swap_instance());
        assert!(res.feasible);
        assert_eq!(res.value, fin(0));
        assert_eq!(res.plan.rows(), vec![vec![q(1, 2), q(0, 1)], vec![q(0, 1), q(1, 2)]]);
    }

    #[test]
    fn ambrosio_pratelli_prefers_cheaper_cycle() {
        let inst = generators::ambrosio_pratelli::<Rational>(3, q(1, 1), q(2, 1)).unwrap();
        let res = solve_exact(&inst);
        assert_eq!(res.value, fin(1));
        assert_eq!(res.plan, generators::identity_plan(&inst));
    }

    #[test]
    fn infinite_singleton_is_infeasible() {
        let inst = Instance::new(vec![q(1, 1)], vec![q(1, 1)], vec![vec![ExtendedCost::Infinite]]).unwrap();
        let res = solve_exact(&inst);
        assert!(!res.feasible);
        assert_eq!(res.value, ExtendedCost::Infinite);
    }

    #[test]
    fn brute_force_small_cases() {
        let ones = Instance::new(vec![q(1, 3); 3], vec![q(1, 3); 3], vec![vec![fin(1); 3]; 3]).unwrap();
        assert_eq!(brute_force_optimal(&ones).unwrap(), fin(1));
        assert_eq!(brute_force_optimal(&swap_instance()).unwrap(), fin(0));
        let big = Instance::new(vec![q(1, 9); 9], vec![q(1, 9); 9], vec![vec![fin(1); 9]; 9]).unwrap();
        assert!(matches!(brute_force_optimal(&big), Err(Error::TooLarge(_))));
    }

    #[test]
    fn brute_force_matches_solver_on_random_uniform_4x4() {
        for seed in 0..10 {
            let inst = generators::random_instance::<Rational>(&generators::RandomSpec {
                x_size: 4,
                y_size: 4,
                uniform: true,
                inf_density: 0.0,
                seed,
            })
            .unwrap();
            assert_eq!(brute_force_optimal(&inst).unwrap(), solve_exact(&inst).value, "seed {seed}");
        }
    }

    #[test]
    fn vertex_enumeration_on_non_uniform_instance() {
        // 2x3 with unequal weights: vertex enumeration path
        let inst = Instance::new(
            vec![q(1, 3), q(2, 3)],
            vec![q(1, 2), q(1, 4), q(1, 4)],
            vec![vec![fin(3), fin(1), ExtendedCost::Infinite], vec![fin(1), fin(2), fin(5)]],
        )
        .unwrap();
        let verts = vertices(&inst);
        assert!(!verts.is_empty());
        for v in &verts {
            v.check_marginals(&inst).unwrap();
        }
        assert_eq!(brute_force_optimal(&inst).unwrap(), solve_exact(&inst).value);
    }

    #[test]
    fn is_optimal_cases() {
        let inst = swap_instance();
        let diag = TransportPlan::new(vec![vec![q(1, 2), q(0, 1)], vec![q(0, 1), q(1, 2)]]).unwrap();
        let anti = TransportPlan::new(vec![vec![q(0, 1), q(1, 2)], vec![q(1, 2), q(0, 1)]]).unwrap();
        let check = is_optimal(&inst, &diag).unwrap();
        assert!(check.optimal);
        assert_eq!(check.gap, q(0, 1));
        let check = is_optimal(&inst, &anti).unwrap();
        assert!(!check.optimal);
        assert_eq!(check.gap, q(1, 1));

        let ap = generators::ambrosio_pratelli::<Rational>(3, q(2, 1), q(1, 1)).unwrap();
        let shift = generators::shift_plan(&ap, 1);
        let check = is_optimal(&ap, &shift).unwrap();
        assert!(check.optimal);
        assert_eq!(check.gap, q(0, 1));
    }

    #[test]
    fn is_optimal_rejects_infinite_plan() {
        let inst = swap_instance()
            .with_costs(vec![vec![ExtendedCost::Infinite, fin(1)], vec![fin(1), fin(0)]])
            .unwrap();
        let diag = TransportPlan::new(vec![vec![q(1, 2), q(0, 1)], vec![q(0, 1), q(1, 2)]]).unwrap();
        assert_eq!(is_optimal(&inst, &diag).unwrap_err(), Error::InfinitePlanCost);
    }

    #[test]
    fn max_mass_on_lower_triangle_forces_diagonal() {
        let inst = generators::zero_one::<Rational>(4).unwrap();
        let (mass, _) = max_mass_on(&inst, |x, y| x != y).unwrap();
        assert_eq!(mass, q(0, 1));
    }
}
