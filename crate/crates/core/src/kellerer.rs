//! Multi-marginal coupling mass `P(B)` against L-shaped covers `L(B)`.

use std::collections::BTreeSet;

use serde_json::json;

use crate::error::{Error, Result};
use crate::model::SUM_TOLERANCE;
use crate::scalar::Scalar;
use crate::simplex::{LinearProgram, LpOutcome, Relation};

/// Largest product space handed to the coupling LP.
pub const MAX_PRODUCT_SIZE: usize = 10_000;
/// Largest `Σ|X_i|` for the exhaustive cover search.
pub const MAX_COVER_POINTS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct MultiMarginalInstance<S> {
    weights: Vec<Vec<S>>,
    set: Vec<Vec<usize>>,
}

impl<S: Scalar> MultiMarginalInstance<S> {
    /// Validates the marginals and deduplicates `set` (kept sorted).
    pub fn new(weights: Vec<Vec<S>>, set: Vec<Vec<usize>>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::BadParameter(format!("need at least 2 spaces, got {}", weights.len())));
        }
        let tol = S::from_f64(SUM_TOLERANCE);
        for (i, w) in weights.iter().enumerate() {
            if w.is_empty() {
                return Err(Error::EmptyDomain);
            }
            if let Some((index, v)) = w.iter().enumerate().find(|(_, v)| v.is_neg()) {
                return Err(Error::NegativeWeight { side: "weights", index, value: v.render() });
            }
            let sum = w.iter().fold(S::zero(), |a, v| a + v.clone());
            if (sum.clone() - S::one()).abs_val() > tol {
                return Err(Error::MarginalSum {
                    side: if i == 0 { "weights[0]" } else { "weights[i]" },
                    sum: sum.render(),
                    expected: "1".into(),
                });
            }
        }
        for t in &set {
            if t.len() != weights.len() {
                return Err(Error::DimensionMismatch(format!(
                    "tuple {t:?} has {} entries, expected {}",
                    t.len(),
                    weights.len()
                )));
            }
            if let Some((i, _)) = t.iter().enumerate().find(|(i, &x)| x >= weights[*i].len()) {
                return Err(Error::DimensionMismatch(format!("tuple {t:?} out of range in space {i}")));
            }
        }
        let set: BTreeSet<Vec<usize>> = set.into_iter().collect();
        Ok(MultiMarginalInstance { weights, set: set.into_iter().collect() })
    }

    pub fn arity(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[Vec<S>] {
        &self.weights
    }

    pub fn set(&self) -> &[Vec<usize>] {
        &self.set
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.weights.iter().map(Vec::len).collect()
    }

    pub fn product_size(&self) -> Option<usize> {
        self.weights.iter().try_fold(1usize, |a, w| a.checked_mul(w.len()))
    }

    /// Uniform weights on `sizes`.
    pub fn uniform(sizes: &[usize], set: Vec<Vec<usize>>) -> Result<Self> {
        let weights = sizes
            .iter()
            .map(|&k| vec![S::from_ratio(1, k.max(1) as i64); k])
            .collect();
        Self::new(weights, set)
    }
}

/// Decodes a mixed-radix index into a tuple.
fn tuple_at(mut index: usize, sizes: &[usize]) -> Vec<usize> {
    let mut t = vec![0; sizes.len()];
    for i in (0..sizes.len()).rev() {
        t[i] = index % sizes[i];
        index /= sizes[i];
    }
    t
}

fn index_of(t: &[usize], sizes: &[usize]) -> usize {
    t.iter().zip(sizes).fold(0, |a, (&x, &k)| a * k + x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PValue<S> {
    pub value: S,
    /// Support of a maximizing coupling as `(tuple, mass)`.
    pub coupling: Vec<(Vec<usize>, S)>,
}

/// `P(B) = max π(B)` over couplings of the marginals.
pub fn p_value<S: Scalar>(mmi: &MultiMarginalInstance<S>) -> Result<PValue<S>> {
    let sizes = mmi.sizes();
    let total = mmi
        .product_size()
        .filter(|&p| p <= MAX_PRODUCT_SIZE)
        .ok_or_else(|| Error::TooLarge(format!("product space of {sizes:?} exceeds {MAX_PRODUCT_SIZE} tuples")))?;
    let mut objective = vec![S::zero(); total];
    for t in mmi.set() {
        objective[index_of(t, &sizes)] = -S::one();
    }
    let mut rows = Vec::new();
    for (i, w) in mmi.weights().iter().enumerate() {
        for (x, wx) in w.iter().enumerate() {
            let coef = (0..total)
                .map(|k| if tuple_at(k, &sizes)[i] == x { S::one() } else { S::zero() })
                .collect();
            rows.push((coef, Relation::Eq, wx.clone()));
        }
    }
    match (LinearProgram { objective, rows }).solve() {
        LpOutcome::Optimal { value, x } => {
            let coupling = x
                .into_iter()
                .enumerate()
                .filter(|(_, m)| m.is_pos())
                .map(|(k, m)| (tuple_at(k, &sizes), m))
                .collect();
            Ok(PValue { value: -value, coupling })
        }
        // the product coupling is always feasible and π(B) ≤ 1
        other => unreachable!("coupling LP returned {other:?}"),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LValue<S> {
    pub value: S,
    /// Minimizing cover `B_1, …, B_n`.
    pub cover: Vec<Vec<usize>>,
}

fn cover_weight<S: Scalar>(mmi: &MultiMarginalInstance<S>, cover: &[Vec<usize>]) -> S {
    cover
        .iter()
        .zip(mmi.weights())
        .flat_map(|(c, w)| c.iter().map(move |&x| w[x].clone()))
        .fold(S::zero(), |a, v| a + v)
}

/// `L(B) = min Σ μ_i(B_i)` over covers `B ⊆ ∪ p_i⁻¹[B_i]`, by exhaustive
/// search over `B_1, …, B_{n-1}`; `B_n` is then forced.
pub fn l_value<S: Scalar>(mmi: &MultiMarginalInstance<S>) -> Result<LValue<S>> {
    let sizes = mmi.sizes();
    let points: usize = sizes.iter().sum();
    if points > MAX_COVER_POINTS {
        return Err(Error::TooLarge(format!(
            "exact cover search needs Σ|X_i| ≤ {MAX_COVER_POINTS}, got {points}"
        )));
    }
    let n = mmi.arity();
    let offsets: Vec<usize> = sizes.iter().scan(0, |acc, &k| {
        let o = *acc;
        *acc += k;
        Some(o)
    }).collect();
    let free_bits = offsets[n - 1];
    let mut best: Option<LValue<S>> = None;
    for mask in 0u32..(1u32 << free_bits) {
        let in_cover = |i: usize, x: usize| mask >> (offsets[i] + x) & 1 == 1;
        let mut last: BTreeSet<usize> = BTreeSet::new();
        for t in mmi.set() {
            if !(0..n - 1).any(|i| in_cover(i, t[i])) {
                last.insert(t[n - 1]);
            }
        }
        let mut cover: Vec<Vec<usize>> =
            (0..n - 1).map(|i| (0..sizes[i]).filter(|&x| in_cover(i, x)).collect()).collect();
        cover.push(last.into_iter().collect());
        let value = cover_weight(mmi, &cover);
        if best.as_ref().is_none_or(|b| value < b.value) {
            best = Some(LValue { value, cover });
        }
    }
    Ok(best.expect("at least the empty mask is enumerated"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverRelaxation<S> {
    /// Optimal value of the fractional cover LP.
    pub value: S,
    /// Optimal `χ_i(x) ∈ [0, 1]`.
    pub chi: Vec<Vec<S>>,
    /// `{x : χ_i(x) ≥ 1/n}` for each `i`; always a cover of `B`.
    pub rounded_cover: Vec<Vec<usize>>,
    pub rounded_weight: S,
}

/// Fractional covers: minimize `Σ μ_i χ_i` subject to `Σ_i χ_i(t_i) ≥ 1`
/// for `t ∈ B` and `0 ≤ χ ≤ 1`. Its value is the LP dual of `P(B)`.
pub fn cover_relaxation<S: Scalar>(mmi: &MultiMarginalInstance<S>) -> Result<CoverRelaxation<S>> {
    let sizes = mmi.sizes();
    let n = mmi.arity();
    let offsets: Vec<usize> = sizes.iter().scan(0, |acc, &k| {
        let o = *acc;
        *acc += k;
        Some(o)
    }).collect();
    let vars: usize = sizes.iter().sum();
    let objective: Vec<S> = mmi.weights().iter().flatten().cloned().collect();
    let mut rows = Vec::new();
    for t in mmi.set() {
        let mut coef = vec![S::zero(); vars];
        for (i, &x) in t.iter().enumerate() {
            coef[offsets[i] + x] = S::one();
        }
        rows.push((coef, Relation::Ge, S::one()));
    }
    for v in 0..vars {
        let mut coef = vec![S::zero(); vars];
        coef[v] = S::one();
        rows.push((coef, Relation::Le, S::one()));
    }
    let LpOutcome::Optimal { value, x } = (LinearProgram { objective, rows }).solve() else {
        unreachable!("χ ≡ 1 is feasible and the objective is bounded below by 0");
    };
    let chi: Vec<Vec<S>> = (0..n).map(|i| x[offsets[i]..offsets[i] + sizes[i]].to_vec()).collect();
    let threshold = S::from_ratio(1, n as i64);
    let rounded_cover: Vec<Vec<usize>> = chi
        .iter()
        .map(|c| (0..c.len()).filter(|&k| threshold.approx_le(&c[k])).collect())
        .collect();
    let rounded_weight = cover_weight(mmi, &rounded_cover);
    Ok(CoverRelaxation { value, chi, rounded_cover, rounded_weight })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Alternative<S> {
    /// `L(B) = 0`; the cover consists of null sets.
    LShapedNull { cover: Vec<Vec<usize>> },
    /// A coupling with `π(B) > 0`.
    PositiveCoupling { mass: S, coupling: Vec<(Vec<usize>, S)> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DichotomyReport<S> {
    pub arity: usize,
    pub p: PValue<S>,
    pub l: LValue<S>,
    pub relaxation: CoverRelaxation<S>,
    /// `P ≥ L/n`.
    pub lower_bound: bool,
    /// `P ≤ L`.
    pub upper_bound: bool,
    /// `P = L`, checked only when `n = 2`.
    pub equality: Option<bool>,
    /// Fractional cover value equals `P`.
    pub duality: bool,
    /// The rounded cover is a cover of weight at most `n` times the relaxation.
    pub rounding: bool,
    pub alternative: Alternative<S>,
}

impl<S: Scalar> DichotomyReport<S> {
    pub fn passed(&self) -> bool {
        let alt_ok = match &self.alternative {
            Alternative::LShapedNull { .. } => self.p.value.approx_zero(),
            Alternative::PositiveCoupling { mass, .. } => mass.is_pos(),
        };
        self.lower_bound
            && self.upper_bound
            && self.equality.unwrap_or(true)
            && self.duality
            && self.rounding
            && alt_ok
    }

    pub fn to_json(&self) -> serde_json::Value {
        let alternative = match &self.alternative {
            Alternative::LShapedNull { cover } => json!({"kind": "l_shaped_null", "cover": cover}),
            Alternative::PositiveCoupling { mass, coupling } => json!({
                "kind": "positive_coupling",
                "mass": mass.render(),
                "coupling": coupling.iter().map(|(t, m)| json!({"tuple": t, "mass": m.render()})).collect::<Vec<_>>(),
            }),
        };
        json!({
            "n": self.arity,
            "P": self.p.value.render(),
            "L": self.l.value.render(),
            "L_cover": self.l.cover,
            "relaxed_L": self.relaxation.value.render(),
            "rounded_cover": self.relaxation.rounded_cover,
            "rounded_weight": self.relaxation.rounded_weight.render(),
            "P_ge_L_over_n": self.lower_bound,
            "P_le_L": self.upper_bound,
            "P_eq_L": self.equality,
            "duality": self.duality,
            "rounding": self.rounding,
            "alternative": alternative,
        })
    }
}

fn covers<S: Scalar>(mmi: &MultiMarginalInstance<S>, cover: &[Vec<usize>]) -> bool {
    mmi.set().iter().all(|t| t.iter().enumerate().any(|(i, x)| cover[i].contains(x)))
}

pub fn check_dichotomy<S: Scalar>(mmi: &MultiMarginalInstance<S>) -> Result<DichotomyReport<S>> {
    let p = p_value(mmi)?;
    let l = l_value(mmi)?;
    let relaxation = cover_relaxation(mmi)?;
    let n = mmi.arity();
    let nq = S::from_usize(n);
    let lower_bound = (l.value.clone() / nq.clone()).approx_le(&p.value);
    let upper_bound = p.value.approx_le(&l.value);
    let equality = (n == 2).then(|| p.value.approx_eq(&l.value));
    let duality = relaxation.value.approx_eq(&p.value);
    let rounding = covers(mmi, &relaxation.rounded_cover)
        && relaxation.rounded_weight.approx_le(&(nq * relaxation.value.clone()));
    let alternative = if l.value.approx_zero() {
        Alternative::LShapedNull { cover: l.cover.clone() }
    } else {
        Alternative::PositiveCoupling { mass: p.value.clone(), coupling: p.coupling.clone() }
    };
    Ok(DichotomyReport { arity: n, p, l, relaxation, lower_bound, upper_bound, equality, duality, rounding, alternative })
}

/// Three uniform two-point spaces with `B = {(0,0,1), (0,1,0), (1,0,0)}`:
/// `P(B) = 3/4 < L(B) = 1`.
pub fn strict_three_marginal_example<S: Scalar>() -> MultiMarginalInstance<S> {
    MultiMarginalInstance::uniform(&[2, 2, 2], vec![vec![0, 0, 1], vec![0, 1, 0], vec![1, 0, 0]])
        .expect("valid by construction")
}
