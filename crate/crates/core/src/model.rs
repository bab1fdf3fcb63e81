//! Domain types shared by every module: extended costs, instances,
//! transport plans and their supports.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Tolerance for the marginal-sum check in [`validate_instance`]. Applies in
/// both arithmetic modes; sums within it are normalized exactly.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// A cost value in `[0, ∞]`.
///
/// Infinity is its own variant so that `∞ − ∞` cannot be formed: differences
/// are only available through [`ExtendedCost::finite`].
#[derive(Debug, Clone, PartialEq)]
pub enum ExtendedCost<S> {
    Finite(S),
    Infinite,
}

impl<S: Scalar> ExtendedCost<S> {
    pub fn zero() -> Self {
        ExtendedCost::Finite(S::zero())
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtendedCost::Finite(_))
    }

    pub fn finite(&self) -> Option<&S> {
        match self {
            ExtendedCost::Finite(v) => Some(v),
            ExtendedCost::Infinite => None,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        match (self, other) {
            (ExtendedCost::Finite(a), ExtendedCost::Finite(b)) => {
                ExtendedCost::Finite(a.clone() + b.clone())
            }
            _ => ExtendedCost::Infinite,
        }
    }
}

impl<S: Scalar> PartialOrd for ExtendedCost<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (ExtendedCost::Finite(a), ExtendedCost::Finite(b)) => a.partial_cmp(b),
            (ExtendedCost::Finite(_), ExtendedCost::Infinite) => Some(Ordering::Less),
            (ExtendedCost::Infinite, ExtendedCost::Finite(_)) => Some(Ordering::Greater),
            (ExtendedCost::Infinite, ExtendedCost::Infinite) => Some(Ordering::Equal),
        }
    }
}

impl<S: Scalar> fmt::Display for ExtendedCost<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedCost::Finite(v) => write!(f, "{v}"),
            ExtendedCost::Infinite => write!(f, "inf"),
        }
    }
}

/// A value in `[−∞, ∞]`, used for dual potentials and chain infima.
#[derive(Debug, Clone, PartialEq)]
pub enum ExtReal<S> {
    NegInf,
    Finite(S),
    PosInf,
}

impl<S: Scalar> ExtReal<S> {
    pub fn finite(&self) -> Option<&S> {
        match self {
            ExtReal::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    /// `max(self, 0)`, with `max(−∞, 0) = 0`.
    pub fn positive_part(&self) -> Option<S> {
        match self {
            ExtReal::NegInf => Some(S::zero()),
            ExtReal::Finite(v) => Some(S::max_of(v.clone(), S::zero())),
            ExtReal::PosInf => None,
        }
    }
}

impl<S: Scalar> fmt::Display for ExtReal<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::NegInf => write!(f, "-inf"),
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::PosInf => write!(f, "inf"),
        }
    }
}

/// Two finite spaces with weights and a cost matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance<S> {
    mu: Vec<S>,
    nu: Vec<S>,
    cost: Vec<ExtendedCost<S>>,
}

impl<S: Scalar> Instance<S> {
    /// Builds and validates a probability instance.
    pub fn new(mu: Vec<S>, nu: Vec<S>, cost: Vec<Vec<ExtendedCost<S>>>) -> Result<Self> {
        validate_instance(Self::from_parts(mu, nu, cost)?)
    }

    /// Builds an instance whose marginals both sum to `total` (used for
    /// extended problems with storage mass). Weights are checked for
    /// nonnegativity and costs for sign, but sums are not normalized.
    pub fn with_total_mass(
        mu: Vec<S>,
        nu: Vec<S>,
        cost: Vec<Vec<ExtendedCost<S>>>,
        total: &S,
    ) -> Result<Self> {
        let inst = Self::from_parts(mu, nu, cost)?;
        inst.check_entries()?;
        for (side, weights) in [("mu", &inst.mu), ("nu", &inst.nu)] {
            let sum = sum_of(weights);
            if !sum.approx_eq(total) {
                return Err(Error::MarginalSum {
                    side,
                    sum: sum.render(),
                    expected: total.render(),
                });
            }
        }
        Ok(inst)
    }

    /// Assembles an instance, checking only that dimensions agree.
    pub fn from_parts(mu: Vec<S>, nu: Vec<S>, cost: Vec<Vec<ExtendedCost<S>>>) -> Result<Self> {
        if cost.len() != mu.len() {
            return Err(Error::DimensionMismatch(format!(
                "cost has {} rows but mu has {} entries",
                cost.len(),
                mu.len()
            )));
        }
        if let Some((i, row)) = cost.iter().enumerate().find(|(_, r)| r.len() != nu.len()) {
            return Err(Error::DimensionMismatch(format!(
                "cost row {i} has {} entries but nu has {}",
                row.len(),
                nu.len()
            )));
        }
        Ok(Instance { mu, nu, cost: cost.into_iter().flatten().collect() })
    }

    fn check_entries(&self) -> Result<()> {
        for (side, weights) in [("mu", &self.mu), ("nu", &self.nu)] {
            if let Some((index, w)) = weights.iter().enumerate().find(|(_, w)| **w < S::zero()) {
                return Err(Error::NegativeWeight { side, index, value: w.render() });
            }
        }
        for x in 0..self.x_size() {
            for y in 0..self.y_size() {
                if let ExtendedCost::Finite(v) = self.cost(x, y) {
                    if *v < S::zero() {
                        return Err(Error::NegativeCost { row: x, col: y, value: v.render() });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn x_size(&self) -> usize {
        self.mu.len()
    }

    pub fn y_size(&self) -> usize {
        self.nu.len()
    }

    pub fn mu(&self) -> &[S] {
        &self.mu
    }

    pub fn nu(&self) -> &[S] {
        &self.nu
    }

    pub fn cost(&self, x: usize, y: usize) -> &ExtendedCost<S> {
        &self.cost[x * self.nu.len() + y]
    }

    pub fn finite_cost(&self, x: usize, y: usize) -> Option<&S> {
        self.cost(x, y).finite()
    }

    pub fn cost_rows(&self) -> Vec<Vec<ExtendedCost<S>>> {
        self.cost.chunks(self.nu.len().max(1)).map(|r| r.to_vec()).collect()
    }

    pub fn total_mass(&self) -> S {
        sum_of(&self.mu)
    }

    pub fn has_infinite_cost(&self) -> bool {
        self.cost.iter().any(|c| !c.is_finite())
    }

    /// Copy with a different cost matrix of the same shape.
    pub fn with_costs(&self, cost: Vec<Vec<ExtendedCost<S>>>) -> Result<Self> {
        let inst = Self::from_parts(self.mu.clone(), self.nu.clone(), cost)?;
        inst.check_entries()?;
        Ok(inst)
    }
}

/// Checks every invariant of a probability instance and renormalizes weights
/// whose sums are within [`SUM_TOLERANCE`] of one.
pub fn validate_instance<S: Scalar>(raw: Instance<S>) -> Result<Instance<S>> {
    raw.check_entries()?;
    let tol = S::from_f64(SUM_TOLERANCE);
    let mut inst = raw;
    for side in ["mu", "nu"] {
        let weights = if side == "mu" { &mut inst.mu } else { &mut inst.nu };
        let sum = sum_of(weights);
        if (sum.clone() - S::one()).abs_val() > tol {
            return Err(Error::MarginalSum {
                side,
                sum: sum.render(),
                expected: "1".into(),
            });
        }
        if sum != S::one() {
            for w in weights.iter_mut() {
                *w = w.clone() / sum.clone();
            }
        }
    }
    Ok(inst)
}

fn sum_of<S: Scalar>(values: &[S]) -> S {
    values.iter().fold(S::zero(), |acc, v| acc + v.clone())
}

/// A nonnegative mass matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan<S> {
    x_size: usize,
    y_size: usize,
    mass: Vec<S>,
}

impl<S: Scalar> TransportPlan<S> {
    pub fn new(rows: Vec<Vec<S>>) -> Result<Self> {
        let x_size = rows.len();
        let y_size = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != y_size) {
            return Err(Error::DimensionMismatch("ragged plan matrix".into()));
        }
        let mass: Vec<S> = rows.into_iter().flatten().collect();
        if let Some(k) = mass.iter().position(|m| m.is_neg()) {
            return Err(Error::NegativeMass {
                row: k / y_size,
                col: k % y_size,
                value: mass[k].render(),
            });
        }
        Ok(TransportPlan { x_size, y_size, mass })
    }

    /// Builds a plan and checks that it belongs to `Π(μ, ν)` for `instance`.
    pub fn for_instance(instance: &Instance<S>, rows: Vec<Vec<S>>) -> Result<Self> {
        let plan = Self::new(rows)?;
        plan.check_marginals(instance)?;
        Ok(plan)
    }

    pub fn zeros(x_size: usize, y_size: usize) -> Self {
        TransportPlan { x_size, y_size, mass: vec![S::zero(); x_size * y_size] }
    }

    /// Places `weights[i]` on `(i, perm[i])`.
    pub fn from_assignment(perm: &[usize], y_size: usize, weights: &[S]) -> Self {
        let mut plan = Self::zeros(perm.len(), y_size);
        for (i, &j) in perm.iter().enumerate() {
            plan.set(i, j, weights[i].clone());
        }
        plan
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    pub fn y_size(&self) -> usize {
        self.y_size
    }

    pub fn mass(&self, x: usize, y: usize) -> &S {
        &self.mass[x * self.y_size + y]
    }

    pub(crate) fn set(&mut self, x: usize, y: usize, value: S) {
        self.mass[x * self.y_size + y] = value;
    }

    pub(crate) fn add_mass(&mut self, x: usize, y: usize, delta: S) {
        let k = x * self.y_size + y;
        self.mass[k] = self.mass[k].clone() + delta;
    }

    pub fn rows(&self) -> Vec<Vec<S>> {
        self.mass.chunks(self.y_size.max(1)).map(|r| r.to_vec()).collect()
    }

    pub fn total_mass(&self) -> S {
        sum_of(&self.mass)
    }

    pub fn check_dims(&self, instance: &Instance<S>) -> Result<()> {
        if self.x_size != instance.x_size() || self.y_size != instance.y_size() {
            return Err(Error::DimensionMismatch(format!(
                "plan is {}x{} but instance is {}x{}",
                self.x_size,
                self.y_size,
                instance.x_size(),
                instance.y_size()
            )));
        }
        Ok(())
    }

    pub fn check_marginals(&self, instance: &Instance<S>) -> Result<()> {
        self.check_dims(instance)?;
        let (rows, cols) = marginals(self);
        for (side, got, want) in [("mu", &rows, instance.mu()), ("nu", &cols, instance.nu())] {
            if let Some(index) = got.iter().zip(want).position(|(g, w)| !g.approx_eq(w)) {
                return Err(Error::PlanMarginals { side, index });
            }
        }
        Ok(())
    }

    /// Direct sum with a diagonal block carrying `lambda` (storage mass).
    pub fn with_diagonal_block(&self, lambda: &[S]) -> Self {
        let z = lambda.len();
        let mut out = Self::zeros(self.x_size + z, self.y_size + z);
        for x in 0..self.x_size {
            for y in 0..self.y_size {
                out.set(x, y, self.mass(x, y).clone());
            }
        }
        for (k, l) in lambda.iter().enumerate() {
            out.set(self.x_size + k, self.y_size + k, l.clone());
        }
        out
    }
}

/// Row and column sums.
pub fn marginals<S: Scalar>(plan: &TransportPlan<S>) -> (Vec<S>, Vec<S>) {
    let mut rows = vec![S::zero(); plan.x_size()];
    let mut cols = vec![S::zero(); plan.y_size()];
    for x in 0..plan.x_size() {
        for y in 0..plan.y_size() {
            let m = plan.mass(x, y);
            rows[x] = rows[x].clone() + m.clone();
            cols[y] = cols[y].clone() + m.clone();
        }
    }
    (rows, cols)
}

/// `Σ cost·mass` over cells with positive mass; infinite iff such a cell has
/// infinite cost.
pub fn total_cost<S: Scalar>(
    instance: &Instance<S>,
    plan: &TransportPlan<S>,
) -> Result<ExtendedCost<S>> {
    plan.check_dims(instance)?;
    let mut acc = S::zero();
    for x in 0..plan.x_size() {
        for y in 0..plan.y_size() {
            let m = plan.mass(x, y);
            if *m <= S::zero() {
                continue;
            }
            match instance.cost(x, y) {
                ExtendedCost::Finite(c) => acc = acc + c.clone() * m.clone(),
                ExtendedCost::Infinite => return Ok(ExtendedCost::Infinite),
            }
        }
    }
    Ok(ExtendedCost::Finite(acc))
}

/// A support pair `(x, y)`.
pub type Pair = (usize, usize);

/// Cells of a plan whose mass exceeds a threshold, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportSet {
    pairs: Vec<Pair>,
}

impl SupportSet {
    pub fn from_pairs(pairs: Vec<Pair>) -> Self {
        SupportSet { pairs }
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, pair: Pair) -> bool {
        self.pairs.contains(&pair)
    }

    pub fn position(&self, pair: Pair) -> Option<usize> {
        self.pairs.iter().position(|&p| p == pair)
    }

    /// Sorted distinct source indices (the projection onto X).
    pub fn sources(&self) -> Vec<usize> {
        let mut xs: Vec<usize> = self.pairs.iter().map(|p| p.0).collect();
        xs.sort_unstable();
        xs.dedup();
        xs
    }

    /// Sorted distinct target indices (the projection onto Y).
    pub fn targets(&self) -> Vec<usize> {
        let mut ys: Vec<usize> = self.pairs.iter().map(|p| p.1).collect();
        ys.sort_unstable();
        ys.dedup();
        ys
    }

    /// Fails on the first pair carrying infinite cost.
    pub fn check_finite<S: Scalar>(&self, instance: &Instance<S>) -> Result<()> {
        match self.pairs.iter().find(|&&(x, y)| !instance.cost(x, y).is_finite()) {
            Some(&(x, y)) => Err(Error::InfiniteCostOnSupport { x, y }),
            None => Ok(()),
        }
    }
}

/// Default support threshold: 0 in exact mode, the float tolerance otherwise.
pub fn default_threshold<S: Scalar>() -> S {
    S::tolerance()
}

/// All pairs with mass strictly above `threshold`, row-major.
pub fn support<S: Scalar>(plan: &TransportPlan<S>, threshold: &S) -> SupportSet {
    let mut pairs = Vec::new();
    for x in 0..plan.x_size() {
        for y in 0..plan.y_size() {
            if plan.mass(x, y) > threshold {
                pairs.push((x, y));
            }
        }
    }
    SupportSet { pairs }
}

#[cfg(test)]
mod tests {
    use super::*;
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
    fn accepts_well_formed_instance() {
        let inst = swap_instance();
        assert_eq!(inst.x_size(), 2);
        assert_eq!(inst.total_mass(), q(1, 1));
    }

    #[test]
    fn rejects_bad_marginal_sum() {
        let err = Instance::new(
            vec![q(7, 10), q(2, 10)],
            vec![q(1, 2), q(1, 2)],
            vec![vec![fin(0), fin(1)], vec![fin(1), fin(0)]],
        )
        .unwrap_err();
        assert_eq!(err.to_string(), "marginal sum 9/10 ≠ 1 (mu)");

        let err = Instance::<f64>::new(
            vec![0.75, 0.125],
            vec![0.5, 0.5],
            vec![vec![ExtendedCost::Finite(0.0); 2]; 2],
        )
        .unwrap_err();
        assert!(err.to_string().starts_with("marginal sum 0.875"));
    }

    #[test]
    fn rejects_negative_cost_and_weight() {
        let err = Instance::new(
            vec![q(1, 2), q(1, 2)],
            vec![q(1, 2), q(1, 2)],
            vec![vec![fin(0), fin(-1)], vec![fin(1), fin(0)]],
        )
        .unwrap_err();
        assert!(matches!(err, Error::NegativeCost { row: 0, col: 1, .. }));
        let err = Instance::new(
            vec![q(3, 2), q(-1, 2)],
            vec![q(1, 2), q(1, 2)],
            vec![vec![fin(0), fin(1)], vec![fin(1), fin(0)]],
        )
        .unwrap_err();
        assert!(matches!(err, Error::NegativeWeight { side: "mu", index: 1, .. }));
    }

    #[test]
    fn rejects_dimension_mismatch() {
        let err = Instance::new(vec![q(1, 1)], vec![q(1, 1)], vec![vec![fin(0), fin(1)]]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
    }

    #[test]
    fn normalizes_sums_within_tolerance() {
        let inst = Instance::<f64>::new(
            vec![0.5 + 4e-10, 0.5],
            vec![0.5, 0.5],
            vec![vec![ExtendedCost::Finite(0.0); 2]; 2],
        )
        .unwrap();
        assert!((inst.mu().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn total_cost_cases() {
        let inst = swap_instance();
        let diag = TransportPlan::new(vec![vec![q(1, 2), q(0, 1)], vec![q(0, 1), q(1, 2)]]).unwrap();
        let anti = TransportPlan::new(vec![vec![q(0, 1), q(1, 2)], vec![q(1, 2), q(0, 1)]]).unwrap();
        assert_eq!(total_cost(&inst, &diag).unwrap(), fin(0));
        assert_eq!(total_cost(&inst, &anti).unwrap(), fin(1));

        let inf = inst
            .with_costs(vec![vec![fin(0), fin(1)], vec![fin(1), ExtendedCost::Infinite]])
            .unwrap();
        assert_eq!(total_cost(&inf, &diag).unwrap(), ExtendedCost::Infinite);
        // zero mass on an infinite cell does not count
        assert_eq!(total_cost(&inf, &anti).unwrap(), fin(1));
    }

    #[test]
    fn support_cases() {
        let diag = TransportPlan::new(vec![vec![q(1, 2), q(0, 1)], vec![q(0, 1), q(1, 2)]]).unwrap();
        assert_eq!(support(&diag, &q(0, 1)).pairs(), &[(0, 0), (1, 1)]);
        let uniform = TransportPlan::new(vec![vec![q(1, 4); 2]; 2]).unwrap();
        assert_eq!(support(&uniform, &q(0, 1)).len(), 4);
        let tiny = TransportPlan::new(vec![vec![1.0 - 1e-12, 1e-12]]).unwrap();
        assert_eq!(support(&tiny, &1e-9).pairs(), &[(0, 0)]);
    }

    #[test]
    fn marginals_cases() {
        let diag = TransportPlan::new(vec![vec![q(1, 2), q(0, 1)], vec![q(0, 1), q(1, 2)]]).unwrap();
        let anti = TransportPlan::new(vec![vec![q(0, 1), q(1, 2)], vec![q(1, 2), q(0, 1)]]).unwrap();
        let half = vec![q(1, 2), q(1, 2)];
        assert_eq!(marginals(&diag), (half.clone(), half.clone()));
        assert_eq!(marginals(&anti), (half.clone(), half));
        let one = TransportPlan::new(vec![vec![q(1, 1)]]).unwrap();
        assert_eq!(marginals(&one), (vec![q(1, 1)], vec![q(1, 1)]));
    }

    #[test]
    fn plan_marginal_check() {
        let inst = swap_instance();
        assert!(TransportPlan::for_instance(&inst, vec![vec![q(1, 2), q(0, 1)], vec![q(1, 2), q(0, 1)]]).is_err());
        assert!(TransportPlan::new(vec![vec![q(-1, 2)]]).is_err());
    }

    #[test]
    fn extended_cost_order_and_absorption() {
        assert!(fin(1_000_000) < ExtendedCost::Infinite);
        assert_eq!(fin(2).add(&ExtendedCost::Infinite), ExtendedCost::Infinite);
        assert_eq!(fin(2).add(&fin(3)), fin(5));
    }
}
