//! Extensions by a storage space `Z` with zero internal cost and finite
//! access tolls, the toll construction that defends a strongly c-monotone
//! plan, and a seeded toll sampler.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::error::{Error, Result};
use crate::model::{total_cost, ExtReal, ExtendedCost, Instance, TransportPlan};
use crate::potentials::{certify_strong, CertifyError, PotentialPair, StrongCertificate};
use crate::scalar::Scalar;
use crate::solver::solve_exact;

/// Base problem plus `z_size` storage points carrying mass `lambda` on both
/// sides. Sources are `X ∪ Z`, targets `Y ∪ Z` (storage indices after the
/// original ones).
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedInstance<S> {
    pub base: Instance<S>,
    pub lambda: Vec<S>,
    pub extended: Instance<S>,
}

impl<S: Scalar> ExtendedInstance<S> {
    pub fn z_size(&self) -> usize {
        self.lambda.len()
    }

    /// Toll charged for shipping from source `x` into storage.
    pub fn toll_in(&self, x: usize) -> &ExtendedCost<S> {
        self.extended.cost(x, self.base.y_size())
    }

    /// Toll charged for shipping from storage to target `y`.
    pub fn toll_out(&self, y: usize) -> &ExtendedCost<S> {
        self.extended.cost(self.base.x_size(), y)
    }

    /// Assembles `c̃` from per-point tolls: `toll_in[x][z]`, `toll_out[z][y]`.
    pub fn from_tolls(
        base: &Instance<S>,
        lambda: &[S],
        toll_in: &[Vec<S>],
        toll_out: &[Vec<S>],
    ) -> Result<Self> {
        let (m, n, z) = (base.x_size(), base.y_size(), lambda.len());
        if toll_in.len() != m || toll_in.iter().any(|r| r.len() != z) {
            return Err(Error::DimensionMismatch("toll_in must be |X| x |Z|".into()));
        }
        if toll_out.len() != z || toll_out.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch("toll_out must be |Z| x |Y|".into()));
        }
        if let Some(l) = lambda.iter().find(|l| l.is_neg()) {
            return Err(Error::BadParameter(format!("negative storage weight {l}")));
        }
        let mut cost = Vec::with_capacity(m + z);
        for x in 0..m {
            let mut row: Vec<ExtendedCost<S>> = (0..n).map(|y| base.cost(x, y).clone()).collect();
            row.extend(toll_in[x].iter().map(|t| ExtendedCost::Finite(t.clone())));
            cost.push(row);
        }
        for out in toll_out {
            let mut row: Vec<ExtendedCost<S>> = out.iter().map(|t| ExtendedCost::Finite(t.clone())).collect();
            row.extend((0..z).map(|_| ExtendedCost::zero()));
            cost.push(row);
        }
        let mut mu = base.mu().to_vec();
        mu.extend(lambda.iter().cloned());
        let mut nu = base.nu().to_vec();
        nu.extend(lambda.iter().cloned());
        let total = lambda.iter().fold(base.total_mass(), |a, l| a + l.clone());
        let extended = Instance::with_total_mass(mu, nu, cost, &total)?;
        Ok(ExtendedInstance { base: base.clone(), lambda: lambda.to_vec(), extended })
    }
}

/// Defending tolls `c̃(x, z) = max(φ(x), 0)` and `c̃(z, y) = max(ψ(y), 0)`.
pub fn build_extension<S: Scalar>(
    instance: &Instance<S>,
    pair: &PotentialPair<S>,
    z_size: usize,
    lambda: &[S],
) -> Result<ExtendedInstance<S>> {
    if lambda.len() != z_size {
        return Err(Error::DimensionMismatch(format!(
            "lambda has {} entries for z_size {z_size}",
            lambda.len()
        )));
    }
    let toll = |v: &ExtReal<S>| {
        v.positive_part()
            .ok_or_else(|| Error::BadParameter("potential is +inf".into()))
    };
    let toll_in = pair
        .phi
        .iter()
        .map(|p| toll(p).map(|t| vec![t; z_size]))
        .collect::<Result<Vec<_>>>()?;
    let out_row = pair.psi.iter().map(toll).collect::<Result<Vec<_>>>()?;
    ExtendedInstance::from_tolls(instance, lambda, &toll_in, &vec![out_row; z_size])
}

/// Result of defending `plan` against storage of mass `lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct DefenseReport<S> {
    /// `cost(π̃) − optimum` in the extended problem; zero when defended.
    pub gap: S,
    pub defended: bool,
    pub extension: ExtendedInstance<S>,
    pub certificate: StrongCertificate<S>,
}

/// Certifies strong c-monotonicity, builds the defending tolls and checks
/// with the exact solver that `plan ⊕ diag(λ)` is optimal for them.
pub fn check_robust_defense<S: Scalar>(
    instance: &Instance<S>,
    plan: &TransportPlan<S>,
    lambda: &[S],
) -> std::result::Result<DefenseReport<S>, CertifyError<S>> {
    let certificate = certify_strong(instance, plan)?;
    let extension = build_extension(instance, &certificate.pair, lambda.len(), lambda)?;
    let gap = extended_gap(&extension, plan)?;
    Ok(DefenseReport { defended: !gap.is_pos(), gap, extension, certificate })
}

/// `cost(plan ⊕ diag(λ)) − min` over the extended problem.
pub fn extended_gap<S: Scalar>(extension: &ExtendedInstance<S>, plan: &TransportPlan<S>) -> Result<S> {
    let lifted = plan.with_diagonal_block(&extension.lambda);
    let cost = total_cost(&extension.extended, &lifted)?
        .finite()
        .cloned()
        .ok_or(Error::InfinitePlanCost)?;
    let best = solve_exact(&extension.extended);
    let optimum = best.value.finite().cloned().ok_or(Error::Infeasible)?;
    Ok(cost - optimum)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdversaryReport<S> {
    pub seed: u64,
    pub trials: usize,
    pub z_size: usize,
    /// Tolls were drawn above the defending tolls of a strong certificate.
    pub defended: bool,
    /// Largest `cost(π̃) − optimum` seen; `None` for zero trials.
    pub max_improvement: Option<S>,
    pub improving_trials: usize,
}

impl<S: Scalar> AdversaryReport<S> {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "seed": self.seed,
            "trials": self.trials,
            "z_size": self.z_size,
            "defended": self.defended,
            "max_improvement": self.max_improvement.as_ref().map(|v| v.render()),
            "improving_trials": self.improving_trials,
        })
    }
}

/// Samples toll matrices and reports how much cheaper than `plan ⊕ diag(λ)`
/// each extended problem can be.
///
/// Tolls are `base + spread · r` with `r ∈ {0, 1/8, …, 2}` drawn per entry,
/// where `spread` is the range of the finite base costs. When the plan has a
/// strong certificate the base is its defending toll (any toll at least that
/// high keeps the potentials dual-feasible); otherwise the base is zero.
pub fn adversarial_search<S: Scalar>(
    instance: &Instance<S>,
    plan: &TransportPlan<S>,
    lambda: &[S],
    trials: usize,
    seed: u64,
) -> Result<AdversaryReport<S>> {
    let z = lambda.len();
    let (m, n) = (instance.x_size(), instance.y_size());
    let certificate = certify_strong(instance, plan).ok();
    let (base_in, base_out): (Vec<S>, Vec<S>) = match &certificate {
        Some(cert) => (
            cert.pair.phi.iter().map(|v| v.positive_part().unwrap_or_else(S::zero)).collect(),
            cert.pair.psi.iter().map(|v| v.positive_part().unwrap_or_else(S::zero)).collect(),
        ),
        None => (vec![S::zero(); m], vec![S::zero(); n]),
    };
    let finite: Vec<S> = (0..m)
        .flat_map(|x| (0..n).map(move |y| (x, y)))
        .filter_map(|(x, y)| instance.finite_cost(x, y).cloned())
        .collect();
    let spread = match (finite.iter().cloned().reduce(S::min_of), finite.iter().cloned().reduce(S::max_of)) {
        (Some(lo), Some(hi)) if (hi.clone() - lo.clone()).is_pos() => hi - lo,
        _ => S::one(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |base: &S| base.clone() + spread.clone() * S::from_ratio(rng.gen_range(0..=16), 8);
    let mut max_improvement: Option<S> = None;
    let mut improving_trials = 0;
    for _ in 0..trials {
        let toll_in: Vec<Vec<S>> = base_in.iter().map(|b| (0..z).map(|_| draw(b)).collect()).collect();
        let toll_out: Vec<Vec<S>> = (0..z).map(|_| base_out.iter().map(&mut draw).collect()).collect();
        let ext = ExtendedInstance::from_tolls(instance, lambda, &toll_in, &toll_out)?;
        let improvement = extended_gap(&ext, plan)?;
        if improvement.is_pos() {
            improving_trials += 1;
        }
        if max_improvement.as_ref().is_none_or(|m| improvement > *m) {
            max_improvement = Some(improvement);
        }
    }
    Ok(AdversaryReport {
        seed,
        trials,
        z_size: z,
        defended: certificate.is_some(),
        max_improvement,
        improving_trials,
    })
}
