//! Reachability between support pairs through finite-cost crossings, its
//! strongly connected classes, and the confinement of finite plans to the
//! diagonal blocks `C_i × D_i`.

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde_json::json;

use crate::error::Result;
use crate::model::{Instance, Pair, SupportSet, TransportPlan};
use crate::scalar::Scalar;
use crate::solver::max_mass_on;

/// One-step reachability: `p → p'` iff `c(x_p', y_p) < ∞`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachGraph {
    pub nodes: Vec<Pair>,
    pub edges: Vec<(usize, usize)>,
}

impl ReachGraph {
    /// Reflexive-transitive closure as a boolean matrix.
    pub fn closure(&self) -> Vec<Vec<bool>> {
        let n = self.nodes.len();
        let mut reach = vec![vec![false; n]; n];
        for (i, row) in reach.iter_mut().enumerate() {
            row[i] = true;
        }
        for &(a, b) in &self.edges {
            reach[a][b] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if reach[i][k] {
                    for j in 0..n {
                        if reach[k][j] {
                            reach[i][j] = true;
                        }
                    }
                }
            }
        }
        reach
    }
}

pub fn reach_graph<S: Scalar>(instance: &Instance<S>, support: &SupportSet) -> Result<ReachGraph> {
    support.check_finite(instance)?;
    let nodes = support.pairs().to_vec();
    let mut edges = Vec::new();
    for (i, &(_, y)) in nodes.iter().enumerate() {
        for (j, &(x2, _)) in nodes.iter().enumerate() {
            if i != j && instance.cost(x2, y).is_finite() {
                edges.push((i, j));
            }
        }
    }
    Ok(ReachGraph { nodes, edges })
}

/// One equivalence class: `pairs = (sources × targets) ∩ support`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectivityClass {
    pub sources: Vec<usize>,
    pub targets: Vec<usize>,
    pub pairs: Vec<Pair>,
}

impl ConnectivityClass {
    pub fn contains_cell(&self, x: usize, y: usize) -> bool {
        self.sources.binary_search(&x).is_ok() && self.targets.binary_search(&y).is_ok()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectivityDecomposition {
    /// Ordered by smallest contained source index.
    pub classes: Vec<ConnectivityClass>,
    /// One-step reachability edges between support pairs.
    pub reach_edges: Vec<(Pair, Pair)>,
}

impl ConnectivityDecomposition {
    pub fn class_of_pair(&self, pair: Pair) -> Option<usize> {
        self.classes.iter().position(|c| c.pairs.contains(&pair))
    }

    pub fn class_of_source(&self, x: usize) -> Option<usize> {
        self.classes.iter().position(|c| c.sources.binary_search(&x).is_ok())
    }

    pub fn class_of_target(&self, y: usize) -> Option<usize> {
        self.classes.iter().position(|c| c.targets.binary_search(&y).is_ok())
    }

    /// `true` iff `(x, y)` lies in some diagonal block `C_i × D_i`.
    pub fn in_diagonal_block(&self, x: usize, y: usize) -> bool {
        self.classes.iter().any(|c| c.contains_cell(x, y))
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!(self
            .classes
            .iter()
            .map(|c| json!({
                "C": c.sources,
                "D": c.targets,
                "pairs": c.pairs.iter().map(|&(x, y)| json!([x, y])).collect::<Vec<_>>(),
            }))
            .collect::<Vec<_>>())
    }
}

/// Strongly connected components of the reach graph.
///
/// Classes of pairs sharing a source (or a target) always coincide, since
/// the shared point gives finite crossings both ways; the projections are
/// therefore disjoint without further shrinking.
pub fn decompose<S: Scalar>(
    instance: &Instance<S>,
    support: &SupportSet,
) -> Result<ConnectivityDecomposition> {
    let graph = reach_graph(instance, support)?;
    let mut g = DiGraph::<Pair, ()>::new();
    let idx: Vec<_> = graph.nodes.iter().map(|&p| g.add_node(p)).collect();
    for &(a, b) in &graph.edges {
        g.add_edge(idx[a], idx[b], ());
    }
    let mut classes: Vec<ConnectivityClass> = tarjan_scc(&g)
        .into_iter()
        .map(|component| {
            let mut pairs: Vec<Pair> = component.iter().map(|&n| g[n]).collect();
            pairs.sort_unstable();
            let mut sources: Vec<usize> = pairs.iter().map(|p| p.0).collect();
            let mut targets: Vec<usize> = pairs.iter().map(|p| p.1).collect();
            sources.sort_unstable();
            sources.dedup();
            targets.sort_unstable();
            targets.dedup();
            ConnectivityClass { sources, targets, pairs }
        })
        .collect();
    classes.sort_by_key(|c| c.sources[0]);
    let mut reach_edges: Vec<(Pair, Pair)> =
        graph.edges.iter().map(|&(a, b)| (graph.nodes[a], graph.nodes[b])).collect();
    reach_edges.sort_unstable();
    Ok(ConnectivityDecomposition { classes, reach_edges })
}

/// `true` iff all support pairs are mutually reachable.
pub fn is_connecting<S: Scalar>(instance: &Instance<S>, support: &SupportSet) -> Result<bool> {
    support.check_finite(instance)?;
    if support.is_empty() {
        return Ok(false);
    }
    if !instance.has_infinite_cost() {
        // complete reach graph
        return Ok(true);
    }
    Ok(decompose(instance, support)?.classes.len() == 1)
}

/// How much mass a finite plan can put outside the diagonal blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfinementReport<S> {
    /// Maximum mass outside `∪ C_i × D_i` over plans on finite-cost cells.
    pub max_off_class_mass: S,
    /// Class masses `μ(C_i)` of the classes kept (zero-mass classes dropped).
    pub class_mass: Vec<S>,
    /// `p_ij = π₀(C_i × D_j) / μ(C_i)` for the maximizing plan `π₀`.
    pub transition: Vec<Vec<S>>,
    /// Rows of `transition` sum to one.
    pub stochastic: bool,
    /// `class_mass · transition = class_mass`.
    pub invariant: bool,
    pub plan: TransportPlan<S>,
}

impl<S: Scalar> ConfinementReport<S> {
    pub fn confined(&self) -> bool {
        self.max_off_class_mass.approx_zero()
    }
}

pub fn check_class_confinement<S: Scalar>(
    instance: &Instance<S>,
    decomposition: &ConnectivityDecomposition,
) -> Result<ConfinementReport<S>> {
    let mass_of = |xs: &[usize]| xs.iter().fold(S::zero(), |a, &x| a + instance.mu()[x].clone());
    let kept: Vec<&ConnectivityClass> =
        decomposition.classes.iter().filter(|c| mass_of(&c.sources).is_pos()).collect();
    let inside = |x: usize, y: usize| kept.iter().any(|c| c.contains_cell(x, y));
    let (max_off, plan) = max_mass_on(instance, |x, y| !inside(x, y))?;

    let class_mass: Vec<S> = kept.iter().map(|c| mass_of(&c.sources)).collect();
    let transition: Vec<Vec<S>> = kept
        .iter()
        .zip(&class_mass)
        .map(|(ci, mi)| {
            kept.iter()
                .map(|cj| {
                    let mut m = S::zero();
                    for &x in &ci.sources {
                        for &y in &cj.targets {
                            m = m + plan.mass(x, y).clone();
                        }
                    }
                    m / mi.clone()
                })
                .collect()
        })
        .collect();
    let stochastic = transition
        .iter()
        .all(|row| row.iter().fold(S::zero(), |a, v| a + v.clone()).approx_eq(&S::one()));
    let invariant = (0..kept.len()).all(|j| {
        let v = (0..kept.len())
            .fold(S::zero(), |a, i| a + class_mass[i].clone() * transition[i][j].clone());
        v.approx_eq(&class_mass[j])
    });
    Ok(ConfinementReport {
        max_off_class_mass: max_off,
        class_mass,
        transition,
        stochastic,
        invariant,
        plan,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use crate::model::ExtendedCost;
    use crate::scalar::Rational;
    use crate::solver::solve_exact;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn diagonal_support(n: usize) -> SupportSet {
        SupportSet::from_pairs((0..n).map(|i| (i, i)).collect())
    }

    fn block_diagonal() -> Instance<Rational> {
        let f = |v: i64| ExtendedCost::Finite(q(v, 1));
        let inf = ExtendedCost::Infinite;
        Instance::new(
            vec![q(1, 4); 4],
            vec![q(1, 4); 4],
            vec![
                vec![f(1), f(2), inf.clone(), inf.clone()],
                vec![f(3), f(1), inf.clone(), inf.clone()],
                vec![inf.clone(), inf.clone(), f(2), f(5)],
                vec![inf.clone(), inf, f(1), f(4)],
            ],
        )
        .unwrap()
    }

    #[test]
    fn finite_costs_give_complete_graph() {
        let inst = generators::shifted_interval::<Rational>(3).unwrap();
        let g = reach_graph(&inst, &diagonal_support(3)).unwrap();
        assert_eq!(g.edges.len(), 6);
        assert_eq!(decompose(&inst, &diagonal_support(3)).unwrap().classes.len(), 1);
        assert!(is_connecting(&inst, &diagonal_support(3)).unwrap());
    }

    #[test]
    fn zero_one_reachability_is_one_directional() {
        let inst = generators::zero_one::<Rational>(4).unwrap();
        let sup = diagonal_support(5);
        let g = reach_graph(&inst, &sup).unwrap();
        for &(k, j) in &g.edges {
            assert!(j > k, "edge {k}->{j}");
        }
        assert_eq!(g.edges.len(), 10);
        let d = decompose(&inst, &sup).unwrap();
        assert_eq!(d.classes.len(), 5);
        assert!(d.classes.iter().all(|c| c.pairs.len() == 1));
        assert!(!is_connecting(&inst, &sup).unwrap());
    }

    #[test]
    fn ambrosio_pratelli_shift_support_is_a_cycle() {
        let inst = generators::ambrosio_pratelli::<Rational>(3, q(1, 1), q(2, 1)).unwrap();
        let sup = SupportSet::from_pairs(vec![(0, 1), (1, 2), (2, 0)]);
        let g = reach_graph(&inst, &sup).unwrap();
        assert_eq!(g.edges, vec![(0, 1), (1, 2), (2, 0)]);
        assert!(is_connecting(&inst, &sup).unwrap());
    }

    #[test]
    fn block_diagonal_splits_into_blocks() {
        let inst = block_diagonal();
        let plan = solve_exact(&inst).plan;
        let sup = crate::model::support(&plan, &q(0, 1));
        let d = decompose(&inst, &sup).unwrap();
        assert_eq!(d.classes.len(), 2);
        assert_eq!(d.classes[0].sources, vec![0, 1]);
        assert_eq!(d.classes[1].sources, vec![2, 3]);
        let report = check_class_confinement(&inst, &d).unwrap();
        assert_eq!(report.max_off_class_mass, q(0, 1));
        assert!(report.stochastic && report.invariant);
    }

    #[test]
    fn confinement_holds_despite_cross_arcs() {
        let inst = generators::zero_one::<Rational>(4).unwrap();
        let d = decompose(&inst, &diagonal_support(5)).unwrap();
        assert!(!d.reach_edges.is_empty());
        let report = check_class_confinement(&inst, &d).unwrap();
        assert!(report.confined());
        for (i, row) in report.transition.iter().enumerate() {
            assert_eq!(row[i], q(1, 1));
        }
    }

    #[test]
    fn single_class_is_trivially_confined() {
        let inst = generators::shifted_interval::<Rational>(3).unwrap();
        let d = decompose(&inst, &diagonal_support(3)).unwrap();
        assert_eq!(check_class_confinement(&inst, &d).unwrap().max_off_class_mass, q(0, 1));
    }

    #[test]
    fn closure_is_a_preorder() {
        let inst = generators::zero_one::<Rational>(3).unwrap();
        let c = reach_graph(&inst, &diagonal_support(4)).unwrap().closure();
        for i in 0..4 {
            assert!(c[i][i]);
            for j in 0..4 {
                for k in 0..4 {
                    if c[i][j] && c[j][k] {
                        assert!(c[i][k]);
                    }
                }
            }
        }
    }

    #[test]
    fn decomposition_ignores_pair_order() {
        let inst = block_diagonal();
        let a = SupportSet::from_pairs(vec![(0, 0), (1, 1), (2, 2), (3, 2), (2, 3)]);
        let b = SupportSet::from_pairs(vec![(2, 3), (3, 2), (1, 1), (2, 2), (0, 0)]);
        assert_eq!(decompose(&inst, &a).unwrap().classes, decompose(&inst, &b).unwrap().classes);
    }
}
