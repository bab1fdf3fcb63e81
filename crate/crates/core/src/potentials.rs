//! Dual potentials from chain infima and c-transforms, and verification of
//! strong c-monotonicity.
//!
//! For a support `Γ` with anchor `(x₀, y₀)`, the chain potential is
//!
//! ```text
//! φ(x) = inf over chains (x₁,y₁),…,(xₙ,yₙ) in Γ of
//!        [c(x, yₙ) − c(xₙ, yₙ)] + Σ_{i<n} [c(x_{i+1}, y_i) − c(x_i, y_i)]
//! ```
//!
//! which is a shortest-path problem on the chain graph: node per support
//! pair, arc `p → p'` of weight `c(x_p', y_p) − c(x_p, y_p)` whenever the
//! crossing cost is finite. The partner `ψ` is the c-transform of `φ`.

use serde_json::json;

use crate::connectivity::{decompose, ConnectivityDecomposition};
use crate::error::{Error, Result};
use crate::model::{
    default_threshold, support, total_cost, ExtReal, ExtendedCost, Instance, Pair, SupportSet, TransportPlan,
};
use crate::monotonicity::{check_support_monotone, Monotonicity, ViolatingCycle};
use crate::scalar::Scalar;

/// Dual functions with `φ ⊕ ψ ≤ c` and equality on the certified support.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialPair<S> {
    pub phi: Vec<ExtReal<S>>,
    pub psi: Vec<ExtReal<S>>,
    /// Gauge pair: `φ(anchor.0) = 0`.
    pub anchor: Pair,
}

impl<S: Scalar> PotentialPair<S> {
    pub fn to_json(&self) -> serde_json::Value {
        let render = |v: &ExtReal<S>| match v {
            ExtReal::NegInf => json!("-inf"),
            ExtReal::Finite(s) => json!(s.render()),
            ExtReal::PosInf => json!("inf"),
        };
        json!({
            "phi": self.phi.iter().map(render).collect::<Vec<_>>(),
            "psi": self.psi.iter().map(render).collect::<Vec<_>>(),
            "anchor": [self.anchor.0, self.anchor.1],
        })
    }
}

/// Shortest distances from `start` over the chain graph of `pairs`;
/// `NegInf` where a negative cycle is reachable, `PosInf` where unreachable.
fn chain_distances<S: Scalar>(instance: &Instance<S>, pairs: &[Pair], start: usize) -> Vec<ExtReal<S>> {
    let n = pairs.len();
    let arcs: Vec<(usize, usize, S)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j)
        .filter_map(|(i, j)| {
            let cross = instance.finite_cost(pairs[j].0, pairs[i].1)?;
            let here = instance.finite_cost(pairs[i].0, pairs[i].1)?;
            Some((i, j, cross.clone() - here.clone()))
        })
        .collect();
    let mut dist: Vec<Option<S>> = vec![None; n];
    dist[start] = Some(S::zero());
    let relax = |dist: &mut Vec<Option<S>>| -> Vec<usize> {
        let mut changed = Vec::new();
        for (i, j, w) in &arcs {
            let Some(di) = dist[*i].clone() else { continue };
            let cand = di + w.clone();
            let better = match &dist[*j] {
                None => true,
                Some(dj) => (dj.clone() - cand.clone()).is_pos(),
            };
            if better {
                dist[*j] = Some(cand);
                changed.push(*j);
            }
        }
        changed
    };
    for _ in 1..n.max(1) {
        if relax(&mut dist).is_empty() {
            break;
        }
    }
    // anything still improving sits on or behind a negative cycle
    let mut unbounded = vec![false; n];
    for _ in 0..n {
        let changed = relax(&mut dist);
        if changed.is_empty() {
            break;
        }
        for j in changed {
            unbounded[j] = true;
        }
    }
    let mut stack: Vec<usize> = (0..n).filter(|&i| unbounded[i]).collect();
    while let Some(i) = stack.pop() {
        for (a, b, _) in &arcs {
            if *a == i && !unbounded[*b] {
                unbounded[*b] = true;
                stack.push(*b);
            }
        }
    }
    (0..n)
        .map(|i| {
            if unbounded[i] {
                ExtReal::NegInf
            } else {
                match &dist[i] {
                    Some(d) => ExtReal::Finite(d.clone()),
                    None => ExtReal::PosInf,
                }
            }
        })
        .collect()
}

/// Chain infimum over `support` anchored at `anchor`, evaluated at every
/// source. `NegInf` where a negative cycle feeds the chain, `PosInf` where no
/// chain ends at a target reachable from `x` at finite cost.
pub fn ruschendorf_phi<S: Scalar>(
    instance: &Instance<S>,
    support: &SupportSet,
    anchor: Pair,
) -> Result<Vec<ExtReal<S>>> {
    support.check_finite(instance)?;
    let start = support
        .position(anchor)
        .ok_or(Error::AnchorNotInSupport { x: anchor.0, y: anchor.1 })?;
    let pairs = support.pairs();
    let dist = chain_distances(instance, pairs, start);
    Ok((0..instance.x_size())
        .map(|x| {
            let mut best = ExtReal::PosInf;
            for (q, &(xq, yq)) in pairs.iter().enumerate() {
                let Some(end) = instance.finite_cost(x, yq) else { continue };
                match &dist[q] {
                    ExtReal::NegInf => return ExtReal::NegInf,
                    ExtReal::PosInf => {}
                    ExtReal::Finite(d) => {
                        let here = instance.finite_cost(xq, yq).expect("finite support").clone();
                        let v = d.clone() + end.clone() - here;
                        if best.finite().is_none_or(|b| v < *b) {
                            best = ExtReal::Finite(v);
                        }
                    }
                }
            }
            best
        })
        .collect())
}

/// `ψ(y) = min_{x ∈ domain} [c(x, y) − φ(x)]` over finite costs. Targets with
/// no finite cost from the domain get `NegInf`, which keeps `φ ⊕ ψ ≤ c`.
pub fn c_transform<S: Scalar>(
    instance: &Instance<S>,
    phi: &[ExtReal<S>],
    domain: &[usize],
) -> Result<Vec<ExtReal<S>>> {
    if domain.is_empty() {
        return Err(Error::EmptyDomain);
    }
    if phi.len() != instance.x_size() {
        return Err(Error::DimensionMismatch(format!(
            "phi has {} entries, instance has {} sources",
            phi.len(),
            instance.x_size()
        )));
    }
    let finite_phi: Vec<(usize, &S)> = domain
        .iter()
        .map(|&x| {
            phi[x]
                .finite()
                .map(|v| (x, v))
                .ok_or_else(|| Error::BadParameter(format!("phi({x}) is not finite on the domain")))
        })
        .collect::<Result<_>>()?;
    Ok((0..instance.y_size())
        .map(|y| {
            finite_phi
                .iter()
                .filter_map(|&(x, p)| instance.finite_cost(x, y).map(|c| c.clone() - p.clone()))
                .reduce(S::min_of)
                .map_or(ExtReal::NegInf, ExtReal::Finite)
        })
        .collect())
}

/// Outcome of checking `φ ⊕ ψ ≤ c` everywhere and `= c` on the support.
#[derive(Debug, Clone, PartialEq)]
pub struct StrongReport<S> {
    pub passed: bool,
    /// Smallest `c − φ − ψ` over cells where all three are finite.
    pub min_slack: Option<(S, Pair)>,
    /// Largest `|c − φ − ψ|` on the support; `None` when some support pair
    /// has an infinite potential.
    pub max_equality_residual: Option<S>,
    pub inequality_violations: Vec<Pair>,
    pub equality_failures: Vec<Pair>,
}

pub fn verify_strong_monotonicity<S: Scalar>(
    instance: &Instance<S>,
    plan: &TransportPlan<S>,
    pair: &PotentialPair<S>,
) -> StrongReport<S> {
    let sup = support(plan, &default_threshold());
    let mut min_slack: Option<(S, Pair)> = None;
    let mut inequality_violations = Vec::new();
    for x in 0..instance.x_size() {
        for y in 0..instance.y_size() {
            let (Some(c), Some(p), Some(q)) =
                (instance.finite_cost(x, y), pair.phi.get(x), pair.psi.get(y))
            else {
                continue;
            };
            if matches!(p, ExtReal::PosInf) || matches!(q, ExtReal::PosInf) {
                inequality_violations.push((x, y));
                continue;
            }
            let (Some(p), Some(q)) = (p.finite(), q.finite()) else { continue };
            let slack = c.clone() - p.clone() - q.clone();
            if slack.is_neg() {
                inequality_violations.push((x, y));
            }
            if min_slack.as_ref().is_none_or(|(m, _)| slack < *m) {
                min_slack = Some((slack, (x, y)));
            }
        }
    }
    let mut max_residual = Some(S::zero());
    let mut equality_failures = Vec::new();
    for &(x, y) in sup.pairs() {
        let phi = pair.phi.get(x).and_then(ExtReal::finite);
        let psi = pair.psi.get(y).and_then(ExtReal::finite);
        match (instance.finite_cost(x, y), phi, psi) {
            (Some(c), Some(p), Some(q)) => {
                let r = (c.clone() - p.clone() - q.clone()).abs_val();
                if r.is_pos() {
                    equality_failures.push((x, y));
                }
                max_residual = max_residual.map(|m| S::max_of(m, r));
            }
            _ => {
                equality_failures.push((x, y));
                max_residual = None;
            }
        }
    }
    StrongReport {
        passed: inequality_violations.is_empty() && equality_failures.is_empty(),
        min_slack,
        max_equality_residual: max_residual,
        inequality_violations,
        equality_failures,
    }
}

/// Successful strong c-monotonicity certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct StrongCertificate<S> {
    pub pair: PotentialPair<S>,
    pub decomposition: ConnectivityDecomposition,
    /// Gauge pair of each class.
    pub anchors: Vec<Pair>,
    /// Offset added to `φ` (and subtracted from `ψ`) in each class.
    pub offsets: Vec<S>,
    pub report: StrongReport<S>,
    /// `Σ φ dμ + Σ ψ dν` over points of positive mass.
    pub dual_value: S,
    pub primal_value: S,
}

impl<S: Scalar> StrongCertificate<S> {
    /// More than one class had to be glued together.
    pub fn multi_class(&self) -> bool {
        self.decomposition.classes.len() > 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CertifyError<S> {
    Input(Error),
    NotMonotone(ViolatingCycle<S>),
    /// The class offsets admit no solution; `cell` is a finite crossing on a
    /// negative cycle of the offset constraints.
    CrossClass { cell: Pair, from_class: usize, to_class: usize },
    /// The assembled potentials failed verification.
    Verification(StrongReport<S>),
}

impl<S: Scalar> std::fmt::Display for CertifyError<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CertifyError::Input(e) => write!(f, "{e}"),
            CertifyError::NotMonotone(c) => write!(f, "not c-monotone (cycle gap {})", c.gap),
            CertifyError::CrossClass { cell, from_class, to_class } => write!(
                f,
                "per-class certificate only: crossing ({},{}) between classes {from_class} and {to_class} blocks gluing",
                cell.0, cell.1
            ),
            CertifyError::Verification(_) => write!(f, "potentials failed verification"),
        }
    }
}

impl<S: Scalar> std::error::Error for CertifyError<S> {}

impl<S> From<Error> for CertifyError<S> {
    fn from(e: Error) -> Self {
        CertifyError::Input(e)
    }
}

/// Builds potentials witnessing strong c-monotonicity of `plan`.
///
/// Each connectivity class gets a chain potential anchored at its lowest
/// support pair and the c-transform over its own sources. Classes are then
/// shifted by offsets `o_i` (φ += o_i on `C_i`, ψ −= o_j on `D_j`) solving
/// `o_i − o_j ≤ c(x, y) − φ_i(x) − ψ_j(y)` for every finite crossing with
/// `x ∈ C_i`, `y ∈ D_j`. Points outside the support projections get `−∞`.
pub fn certify_strong<S: Scalar>(
    instance: &Instance<S>,
    plan: &TransportPlan<S>,
) -> std::result::Result<StrongCertificate<S>, CertifyError<S>> {
    plan.check_dims(instance)?;
    let primal_value = match total_cost(instance, plan)? {
        ExtendedCost::Finite(v) => v,
        ExtendedCost::Infinite => return Err(Error::InfinitePlanCost.into()),
    };
    let sup = support(plan, &default_threshold());
    if let Monotonicity::Violated(cycle) = check_support_monotone(instance, &sup)? {
        return Err(CertifyError::NotMonotone(cycle));
    }
    let decomposition = decompose(instance, &sup)?;
    let k = decomposition.classes.len();

    let mut phi = vec![ExtReal::NegInf; instance.x_size()];
    let mut psi = vec![ExtReal::NegInf; instance.y_size()];
    let mut anchors = Vec::with_capacity(k);
    for class in &decomposition.classes {
        let class_support = SupportSet::from_pairs(class.pairs.clone());
        let anchor = class.pairs[0];
        anchors.push(anchor);
        let local = ruschendorf_phi(instance, &class_support, anchor)?;
        let mut restricted = vec![ExtReal::NegInf; instance.x_size()];
        for &x in &class.sources {
            restricted[x] = local[x].clone();
        }
        let local_psi = c_transform(instance, &restricted, &class.sources)?;
        for &x in &class.sources {
            phi[x] = restricted[x].clone();
        }
        for &y in &class.targets {
            psi[y] = local_psi[y].clone();
        }
    }

    let offsets = class_offsets(instance, &decomposition, &phi, &psi)?;
    for (i, class) in decomposition.classes.iter().enumerate() {
        for &x in &class.sources {
            if let ExtReal::Finite(v) = &phi[x] {
                phi[x] = ExtReal::Finite(v.clone() + offsets[i].clone());
            }
        }
        for &y in &class.targets {
            if let ExtReal::Finite(v) = &psi[y] {
                psi[y] = ExtReal::Finite(v.clone() - offsets[i].clone());
            }
        }
    }

    let pair = PotentialPair { phi, psi, anchor: anchors.first().copied().unwrap_or((0, 0)) };
    let report = verify_strong_monotonicity(instance, plan, &pair);
    if !report.passed {
        return Err(CertifyError::Verification(report));
    }
    let dual_value = dual_objective(instance, &pair);
    Ok(StrongCertificate { pair, decomposition, anchors, offsets, report, dual_value, primal_value })
}

/// `Σ φ dμ + Σ ψ dν` restricted to points of positive mass (where the
/// certified potentials are finite).
pub fn dual_objective<S: Scalar>(instance: &Instance<S>, pair: &PotentialPair<S>) -> S {
    let side = |weights: &[S], values: &[ExtReal<S>]| {
        weights.iter().zip(values).fold(S::zero(), |acc, (w, v)| match v.finite() {
            Some(v) if w.is_pos() => acc + w.clone() * v.clone(),
            _ => acc,
        })
    };
    side(instance.mu(), &pair.phi) + side(instance.nu(), &pair.psi)
}

/// Solves the difference constraints between class offsets by
/// label-correcting passes; offsets are normalized so the first class has
/// offset zero.
fn class_offsets<S: Scalar>(
    instance: &Instance<S>,
    decomposition: &ConnectivityDecomposition,
    phi: &[ExtReal<S>],
    psi: &[ExtReal<S>],
) -> std::result::Result<Vec<S>, CertifyError<S>> {
    let k = decomposition.classes.len();
    // o_i <= o_j + w: arc j -> i
    let mut arcs: Vec<(usize, usize, S, Pair)> = Vec::new();
    for (i, ci) in decomposition.classes.iter().enumerate() {
        for (j, cj) in decomposition.classes.iter().enumerate() {
            if i == j {
                continue;
            }
            let mut tightest: Option<(S, Pair)> = None;
            for &x in &ci.sources {
                for &y in &cj.targets {
                    let (Some(c), Some(p), Some(q)) =
                        (instance.finite_cost(x, y), phi[x].finite(), psi[y].finite())
                    else {
                        continue;
                    };
                    let w = c.clone() - p.clone() - q.clone();
                    if tightest.as_ref().is_none_or(|(t, _)| w < *t) {
                        tightest = Some((w, (x, y)));
                    }
                }
            }
            if let Some((w, cell)) = tightest {
                arcs.push((j, i, w, cell));
            }
        }
    }
    let mut offsets = vec![S::zero(); k];
    let mut last_arc = None;
    for _ in 0..=k {
        last_arc = None;
        for (idx, (from, to, w, _)) in arcs.iter().enumerate() {
            let cand = offsets[*from].clone() + w.clone();
            if (offsets[*to].clone() - cand.clone()).is_pos() {
                offsets[*to] = cand;
                last_arc = Some(idx);
            }
        }
        if last_arc.is_none() {
            break;
        }
    }
    if let Some(idx) = last_arc {
        let (from, to, _, cell) = &arcs[idx];
        return Err(CertifyError::CrossClass { cell: *cell, from_class: *to, to_class: *from });
    }
    if let Some(base) = offsets.first().cloned() {
        for o in &mut offsets {
            *o = o.clone() - base.clone();
        }
    }
    Ok(offsets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use crate::scalar::Rational;
    use crate::solver::solve_exact;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn fin(n: i64) -> ExtendedCost<Rational> {
        ExtendedCost::Finite(q(n, 1))
    }

    fn ef(n: i64) -> ExtReal<Rational> {
        ExtReal::Finite(q(n, 1))
    }

    fn swap_instance() -> Instance<Rational> {
        Instance::new(
            vec![q(1, 2), q(1, 2)],
            vec![q(1, 2), q(1, 2)],
            vec![vec![fin(0), fin(1)], vec![fin(1), fin(0)]],
        )
        .unwrap()
    }

    fn diag() -> TransportPlan<Rational> {
        TransportPlan::new(vec![vec![q(1, 2), q(0, 1)], vec![q(0, 1), q(1, 2)]]).unwrap()
    }

    #[test]
    fn chain_potential_on_diagonal() {
        let sup = SupportSet::from_pairs(vec![(0, 0), (1, 1)]);
        let phi = ruschendorf_phi(&swap_instance(), &sup, (0, 0)).unwrap();
        assert_eq!(phi, vec![ef(0), ef(1)]);
    }

    #[test]
    fn chain_potential_diverges_on_negative_cycle() {
        let sup = SupportSet::from_pairs(vec![(0, 1), (1, 0)]);
        let phi = ruschendorf_phi(&swap_instance(), &sup, (0, 1)).unwrap();
        assert_eq!(phi, vec![ExtReal::NegInf, ExtReal::NegInf]);
    }

    #[test]
    fn chain_potential_rejects_foreign_anchor() {
        let sup = SupportSet::from_pairs(vec![(0, 0)]);
        let err = ruschendorf_phi(&swap_instance(), &sup, (1, 1)).unwrap_err();
        assert_eq!(err, Error::AnchorNotInSupport { x: 1, y: 1 });
    }

    #[test]
    fn c_transform_cases() {
        let psi = c_transform(&swap_instance(), &[ef(0), ef(1)], &[0, 1]).unwrap();
        assert_eq!(psi, vec![ef(0), ef(-1)]);

        let ones = Instance::new(vec![q(1, 2); 2], vec![q(1, 2); 2], vec![vec![fin(1); 2]; 2]).unwrap();
        assert_eq!(c_transform(&ones, &[ef(0), ef(0)], &[0, 1]).unwrap(), vec![ef(1), ef(1)]);

        let single = Instance::new(vec![q(1, 1)], vec![q(1, 1)], vec![vec![fin(5)]]).unwrap();
        assert_eq!(c_transform(&single, &[ef(0)], &[0]).unwrap(), vec![ef(5)]);

        assert_eq!(c_transform(&single, &[ef(0)], &[]).unwrap_err(), Error::EmptyDomain);
    }

    #[test]
    fn verification_cases() {
        let inst = swap_instance();
        let good = PotentialPair { phi: vec![ef(0), ef(1)], psi: vec![ef(0), ef(-1)], anchor: (0, 0) };
        let r = verify_strong_monotonicity(&inst, &diag(), &good);
        assert!(r.passed);
        assert_eq!(r.max_equality_residual, Some(q(0, 1)));
        assert_eq!(r.min_slack.as_ref().map(|s| s.0.clone()), Some(q(0, 1)));

        let mut bad = good.clone();
        bad.psi[1] = ExtReal::Finite(q(-9, 10));
        let r = verify_strong_monotonicity(&inst, &diag(), &bad);
        assert!(!r.passed);
        assert!(r.inequality_violations.contains(&(1, 1)));

        // uniform plan puts mass on (0,1), where φ+ψ = -1 < 1; (1,0) is tight
        let uniform = TransportPlan::new(vec![vec![q(1, 4); 2]; 2]).unwrap();
        let r = verify_strong_monotonicity(&inst, &uniform, &good);
        assert_eq!(r.equality_failures, vec![(0, 1)]);
    }

    #[test]
    fn certify_rejects_non_monotone() {
        let anti = TransportPlan::new(vec![vec![q(0, 1), q(1, 2)], vec![q(1, 2), q(0, 1)]]).unwrap();
        match certify_strong(&swap_instance(), &anti) {
            Err(CertifyError::NotMonotone(c)) => assert_eq!(c.gap, q(2, 1)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn certify_optimal_plan_on_random_instance() {
        let inst = generators::random_instance::<Rational>(&generators::RandomSpec {
            x_size: 4,
            y_size: 4,
            uniform: false,
            inf_density: 0.0,
            seed: 11,
        })
        .unwrap();
        let plan = solve_exact(&inst).plan;
        let cert = certify_strong(&inst, &plan).unwrap();
        assert!(cert.report.passed);
        assert_eq!(cert.dual_value, cert.primal_value);
        assert_eq!(cert.pair.phi[cert.pair.anchor.0], ef(0));
    }

    #[test]
    fn zero_one_certificate_telescopes() {
        let n = 16;
        let inst = generators::zero_one::<Rational>(n).unwrap();
        let plan = generators::identity_plan(&inst);
        let cert = certify_strong(&inst, &plan).unwrap();
        assert_eq!(cert.decomposition.classes.len(), n + 1);
        let phi: Vec<f64> = cert.pair.phi.iter().map(|v| v.finite().unwrap().to_f64()).collect();
        assert!(phi[0] - phi[n] >= 4.0 - 1e-9);
    }
}
