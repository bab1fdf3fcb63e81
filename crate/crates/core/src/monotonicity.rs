//! Cyclical monotonicity: exchange graph, negative-cycle witnesses and the
//! rerouting step that strictly lowers the cost of a non-monotone plan.

use serde_json::json;

use crate::error::{Error, Result};
use crate::model::{default_threshold, support, total_cost, ExtendedCost, Instance, Pair, SupportSet, TransportPlan};
use crate::scalar::Scalar;

/// Digraph on support pairs. The edge `p → p'` has weight
/// `c(x_p, y_p') − c(x_p, y_p)` and exists only when `c(x_p, y_p')` is finite,
/// so the weight of a directed cycle is the change in cost from rerouting
/// every source on it to the target of its successor.
#[derive(Debug, Clone)]
pub struct ExchangeGraph<S> {
    nodes: Vec<Pair>,
    edges: Vec<Vec<(usize, S)>>,
}

impl<S: Scalar> ExchangeGraph<S> {
    pub fn nodes(&self) -> &[Pair] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Outgoing `(target node, weight)`, including the zero self-loop.
    pub fn edges(&self, node: usize) -> &[(usize, S)] {
        &self.edges[node]
    }

    pub fn weight(&self, from: usize, to: usize) -> Option<&S> {
        self.edges[from].iter().find(|(t, _)| *t == to).map(|(_, w)| w)
    }
}

pub fn build_exchange_graph<S: Scalar>(
    instance: &Instance<S>,
    support: &SupportSet,
) -> Result<ExchangeGraph<S>> {
    support.check_finite(instance)?;
    let nodes = support.pairs().to_vec();
    let edges = nodes
        .iter()
        .map(|&(x, y)| {
            let base = instance.finite_cost(x, y).expect("checked finite").clone();
            nodes
                .iter()
                .enumerate()
                .filter_map(|(j, &(_, y2))| {
                    instance.finite_cost(x, y2).map(|c| (j, c.clone() - base.clone()))
                })
                .collect()
        })
        .collect();
    Ok(ExchangeGraph { nodes, edges })
}

/// Support pairs `(x_i, y_i)` such that rerouting `x_i → y_{i+1}` (cyclically)
/// saves `gap > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ViolatingCycle<S> {
    pub pairs: Vec<Pair>,
    pub gap: S,
}

impl<S: Scalar> ViolatingCycle<S> {
    /// Recomputes `Σ c(x_i, y_i) − Σ c(x_i, y_{i+1})`; `None` if a reroute
    /// cost is infinite.
    pub fn recompute_gap(pairs: &[Pair], instance: &Instance<S>) -> Option<S> {
        let n = pairs.len();
        let mut gap = S::zero();
        for i in 0..n {
            let (x, y) = pairs[i];
            let next_y = pairs[(i + 1) % n].1;
            gap = gap + instance.finite_cost(x, y)?.clone() - instance.finite_cost(x, next_y)?.clone();
        }
        Some(gap)
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "pairs": self.pairs.iter().map(|&(x, y)| json!([x, y])).collect::<Vec<_>>(),
            "gap": self.gap.render(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Monotonicity<S> {
    Monotone,
    Violated(ViolatingCycle<S>),
}

impl<S> Monotonicity<S> {
    pub fn is_monotone(&self) -> bool {
        matches!(self, Monotonicity::Monotone)
    }
}

/// Finds a negative cycle in the exchange graph, if any, by label-correcting
/// passes from a virtual source joined to every node.
pub fn find_negative_cycle<S: Scalar>(graph: &ExchangeGraph<S>) -> Option<Vec<usize>> {
    let n = graph.len();
    let mut dist = vec![S::zero(); n];
    let mut pred: Vec<Option<usize>> = vec![None; n];
    let mut last = None;
    for _ in 0..n {
        last = None;
        for u in 0..n {
            for (v, w) in graph.edges(u) {
                if *v == u {
                    continue;
                }
                let cand = dist[u].clone() + w.clone();
                if (dist[*v].clone() - cand.clone()).is_pos() {
                    dist[*v] = cand;
                    pred[*v] = Some(u);
                    last = Some(*v);
                }
            }
        }
        last?;
    }
    // still relaxing after n passes: walk back onto the cycle
    let mut v = last?;
    for _ in 0..n {
        v = pred[v].expect("relaxed node has a predecessor");
    }
    let mut cycle = vec![v];
    let mut u = pred[v].expect("cycle node has a predecessor");
    while u != v {
        cycle.push(u);
        u = pred[u].expect("cycle node has a predecessor");
    }
    cycle.reverse();
    let start = cycle.iter().enumerate().min_by_key(|(_, &n)| n).map(|(i, _)| i).unwrap_or(0);
    cycle.rotate_left(start);
    Some(cycle)
}

/// Decides cyclical monotonicity of a support set.
pub fn check_support_monotone<S: Scalar>(
    instance: &Instance<S>,
    support: &SupportSet,
) -> Result<Monotonicity<S>> {
    let graph = build_exchange_graph(instance, support)?;
    let Some(cycle) = find_negative_cycle(&graph) else {
        return Ok(Monotonicity::Monotone);
    };
    let pairs: Vec<Pair> = cycle.iter().map(|&i| graph.nodes()[i]).collect();
    let gap = ViolatingCycle::recompute_gap(&pairs, instance).expect("cycle edges are finite");
    if gap.is_pos() {
        Ok(Monotonicity::Violated(ViolatingCycle { pairs, gap }))
    } else {
        Ok(Monotonicity::Monotone)
    }
}

/// Decides cyclical monotonicity of a plan's support.
pub fn check_c_monotone<S: Scalar>(
    instance: &Instance<S>,
    plan: &TransportPlan<S>,
) -> Result<Monotonicity<S>> {
    plan.check_dims(instance)?;
    check_support_monotone(instance, &support(plan, &default_threshold()))
}

/// Moves `α = min_i mass(x_i, y_i)` from each `(x_i, y_i)` to `(x_i, y_{i+1})`.
/// Marginals are unchanged and the cost drops by exactly `α · gap`.
pub fn improve_plan<S: Scalar>(
    instance: &Instance<S>,
    plan: &TransportPlan<S>,
    cycle: &ViolatingCycle<S>,
) -> Result<TransportPlan<S>> {
    plan.check_dims(instance)?;
    let n = cycle.pairs.len();
    if n == 0 {
        return Err(Error::InvalidCycle("empty cycle".into()));
    }
    for (i, &(x, y)) in cycle.pairs.iter().enumerate() {
        if x >= plan.x_size() || y >= plan.y_size() {
            return Err(Error::InvalidCycle(format!("pair ({x},{y}) out of range")));
        }
        if cycle.pairs[..i].contains(&(x, y)) {
            return Err(Error::InvalidCycle(format!("pair ({x},{y}) repeated")));
        }
        if !plan.mass(x, y).is_pos() {
            return Err(Error::ZeroMassCycle { x, y });
        }
    }
    if ViolatingCycle::recompute_gap(&cycle.pairs, instance).is_none() {
        return Err(Error::InvalidCycle("reroute through an infinite cost".into()));
    }
    let alpha = cycle
        .pairs
        .iter()
        .map(|&(x, y)| plan.mass(x, y).clone())
        .reduce(S::min_of)
        .expect("nonempty");
    let mut out = plan.clone();
    for i in 0..n {
        let (x, y) = cycle.pairs[i];
        let next_y = cycle.pairs[(i + 1) % n].1;
        out.add_mass(x, y, -alpha.clone());
        out.add_mass(x, next_y, alpha.clone());
    }
    Ok(out)
}

/// Result of iterated rerouting.
#[derive(Debug, Clone, PartialEq)]
pub struct ImprovementRun<S> {
    pub plan: TransportPlan<S>,
    pub iterations: usize,
    /// Plan cost before the first step and after every step.
    pub trajectory: Vec<S>,
    /// Every step's witness, in order.
    pub cycles: Vec<ViolatingCycle<S>>,
    /// `false` when the budget ran out before reaching a monotone plan.
    pub converged: bool,
}

/// Reroutes along violating cycles until the plan is cyclically monotone or
/// `max_iters` steps were taken (default `|support|³`).
pub fn improve_to_monotone<S: Scalar>(
    instance: &Instance<S>,
    plan: &TransportPlan<S>,
    max_iters: Option<usize>,
) -> Result<ImprovementRun<S>> {
    let finite_cost = |p: &TransportPlan<S>| match total_cost(instance, p)? {
        ExtendedCost::Finite(v) => Ok(v),
        ExtendedCost::Infinite => Err(Error::InfinitePlanCost),
    };
    let budget = max_iters.unwrap_or_else(|| support(plan, &default_threshold()).len().pow(3));
    let mut current = plan.clone();
    let mut trajectory = vec![finite_cost(&current)?];
    let mut cycles = Vec::new();
    loop {
        match check_c_monotone(instance, &current)? {
            Monotonicity::Monotone => {
                return Ok(ImprovementRun {
                    plan: current,
                    iterations: cycles.len(),
                    trajectory,
                    cycles,
                    converged: true,
                });
            }
            Monotonicity::Violated(cycle) => {
                if cycles.len() >= budget {
                    return Ok(ImprovementRun {
                        plan: current,
                        iterations: cycles.len(),
                        trajectory,
                        cycles,
                        converged: false,
                    });
                }
                current = improve_plan(instance, &current, &cycle)?;
                trajectory.push(finite_cost(&current)?);
                cycles.push(cycle);
            }
        }
    }
}
