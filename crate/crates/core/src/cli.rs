//! Command implementations behind the `otcert` binary. Every command has an
//! in-memory form (`*_report`) and a file form (`cmd_*`).

use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::connectivity::decompose;
use crate::error::{Error, Result};
use crate::generators::{self, RandomSpec};
use crate::io::{self, plan_json, scalar_json};
use crate::kellerer::{check_dichotomy, Alternative, MultiMarginalInstance};
use crate::model::{default_threshold, support, total_cost, ExtendedCost, Instance, TransportPlan};
use crate::monotonicity::{check_c_monotone, improve_to_monotone, Monotonicity};
use crate::potentials::{certify_strong, CertifyError};
use crate::report::Report;
use crate::robustness::{adversarial_search, check_robust_defense};
use crate::scalar::Scalar;
use crate::solver::{is_optimal, solve_exact};

pub const CLAIM_OPTIMAL: &str = "(1) optimal";
pub const CLAIM_MONOTONE: &str = "(2) c-monotone";
pub const CLAIM_ROBUST: &str = "(3) robustly optimal";
pub const CLAIM_STRONG: &str = "(4) strongly c-monotone";

/// Settings shared by all commands.
#[derive(Debug, Clone)]
pub struct Options {
    /// Gaps up to this value count as zero; `None` uses the arithmetic's own
    /// tolerance (0 exact, 1e-9 float).
    pub tolerance: Option<f64>,
    pub seed: u64,
    pub max_iters: Option<usize>,
    pub z_size: usize,
    pub lambda: f64,
    pub trials: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options { tolerance: None, seed: 0, max_iters: None, z_size: 1, lambda: 1.0, trials: 20 }
    }
}

impl Options {
    fn within<S: Scalar>(&self, gap: &S) -> bool {
        match self.tolerance {
            Some(t) => *gap <= S::from_f64(t),
            None => !gap.is_pos(),
        }
    }

    fn lambda_vec<S: Scalar>(&self) -> Vec<S> {
        vec![S::from_f64(self.lambda); self.z_size]
    }
}

/// Loads an instance and its plan: the inline `"plan"`, else `plan_path`
/// (a bare matrix or a document with a `"plan"` field), else `None`.
pub fn load<S: Scalar>(path: &Path, plan_path: Option<&Path>) -> Result<(Instance<S>, Option<TransportPlan<S>>)> {
    let (instance, inline) = io::read_instance::<S>(path)?;
    let plan = match (inline, plan_path) {
        (Some(p), _) => Some(p),
        (None, Some(pp)) => {
            let doc: Value = serde_json::from_str(&std::fs::read_to_string(pp)?)?;
            let plan = io::plan_from_json::<S>(doc.get("plan").unwrap_or(&doc))?;
            plan.check_dims(&instance)?;
            Some(plan)
        }
        (None, None) => None,
    };
    if let Some(p) = &plan {
        p.check_marginals(&instance)?;
    }
    Ok((instance, plan))
}

fn cost_value<S: Scalar>(c: &ExtendedCost<S>) -> Value {
    io::cost_json(c)
}

pub fn solve_report<S: Scalar>(instance: &Instance<S>) -> Report {
    let mut r = Report::new("solve");
    let best = r.time("solve", || solve_exact(instance));
    if best.feasible {
        r.detail("value", cost_value(&best.value));
        r.detail("plan", plan_json(&best.plan));
        r.verdict("finite plan exists", true, Value::Null);
    } else {
        r.detail("value", json!("inf"));
        r.verdict("finite plan exists", false, json!({"reason": "no finite plan"}));
    }
    r
}

pub fn cmd_solve<S: Scalar>(path: &Path) -> Result<Report> {
    let (instance, _) = load::<S>(path, None)?;
    Ok(solve_report(&instance))
}

/// Runs the four predicates on `plan` (the solver's plan when `None`) and
/// checks the implications between them.
pub fn check_report<S: Scalar>(
    instance: &Instance<S>,
    plan: Option<&TransportPlan<S>>,
    opts: &Options,
) -> Result<Report> {
    let mut r = Report::new("check");
    let solved;
    let plan = match plan {
        Some(p) => p,
        None => {
            solved = r.time("solve", || solve_exact(instance));
            if !solved.feasible {
                r.verdict("finite plan exists", false, json!({"reason": "no finite plan"}));
                return Ok(r);
            }
            r.detail("plan_source", json!("solver"));
            &solved.plan
        }
    };
    plan.check_marginals(instance)?;
    r.detail("plan", plan_json(plan));
    let cost = total_cost(instance, plan)?;
    r.detail("cost", cost_value(&cost));

    let p1 = match cost {
        ExtendedCost::Infinite => r.verdict(CLAIM_OPTIMAL, false, json!({"reason": "plan cost is infinite"})),
        ExtendedCost::Finite(_) => {
            let chk = r.time("optimality", || is_optimal(instance, plan))?;
            let pass = opts.within(&chk.gap);
            r.verdict(CLAIM_OPTIMAL, pass, json!({"gap": scalar_json(&chk.gap), "optimum": scalar_json(&chk.optimum)}))
        }
    };

    let p2 = match r.time("monotonicity", || check_c_monotone(instance, plan)) {
        Ok(Monotonicity::Monotone) => r.verdict(CLAIM_MONOTONE, true, Value::Null),
        Ok(Monotonicity::Violated(c)) => {
            let pass = opts.within(&c.gap);
            r.verdict(CLAIM_MONOTONE, pass, c.to_json())
        }
        Err(e) => r.verdict(CLAIM_MONOTONE, false, json!({"error": e.to_string()})),
    };

    let p4 = match r.time("strong", || certify_strong(instance, plan)) {
        Ok(cert) => {
            let witness = json!({
                "classes": cert.decomposition.classes.len(),
                "decomposition": cert.decomposition.to_json(),
                "offsets": cert.offsets.iter().map(scalar_json).collect::<Vec<_>>(),
                "potentials": cert.pair.to_json(),
                "dual_value": scalar_json(&cert.dual_value),
                "primal_value": scalar_json(&cert.primal_value),
            });
            r.verdict(CLAIM_STRONG, true, witness)
        }
        Err(e) => {
            let witness = certify_witness(&e);
            r.verdict(CLAIM_STRONG, false, witness)
        }
    };

    let lambda = opts.lambda_vec::<S>();
    let p3 = match r.time("defense", || check_robust_defense(instance, plan, &lambda)) {
        Ok(def) => {
            let adv = r.time("adversary", || adversarial_search(instance, plan, &lambda, opts.trials, opts.seed))?;
            let adv_ok = adv.max_improvement.as_ref().is_none_or(|m| opts.within(m));
            let pass = opts.within(&def.gap) && adv_ok;
            r.verdict(
                CLAIM_ROBUST,
                pass,
                json!({
                    "z_size": opts.z_size,
                    "lambda": opts.lambda,
                    "extended_gap": scalar_json(&def.gap),
                    "toll_in": (0..instance.x_size()).map(|x| cost_value(def.extension.toll_in(x))).collect::<Vec<_>>(),
                    "toll_out": (0..instance.y_size()).map(|y| cost_value(def.extension.toll_out(y))).collect::<Vec<_>>(),
                    "adversary": adv.to_json(),
                }),
            )
        }
        Err(e) => r.verdict(CLAIM_ROBUST, false, certify_witness(&e)),
    };

    let decomposition = decompose(instance, &support(plan, &default_threshold()))?;
    r.detail("classes", json!(decomposition.classes.len()));
    let implies = |a: bool, b: bool| !a || b;
    r.verdict("(1) <=> (2)", p1 == p2, json!({"1": p1, "2": p2}));
    r.verdict("(3) <=> (4)", p3 == p4, json!({"3": p3, "4": p4}));
    r.verdict("(3) => (1)", implies(p3, p1), json!({"3": p3, "1": p1}));
    r.verdict("(4) => (2)", implies(p4, p2), json!({"4": p4, "2": p2}));
    Ok(r)
}

fn certify_witness<S: Scalar>(e: &CertifyError<S>) -> Value {
    match e {
        CertifyError::NotMonotone(c) => json!({"reason": "not c-monotone", "cycle": c.to_json()}),
        CertifyError::CrossClass { cell, from_class, to_class } => json!({
            "reason": "per-class certificate only",
            "cell": [cell.0, cell.1],
            "from_class": from_class,
            "to_class": to_class,
        }),
        CertifyError::Verification(rep) => json!({
            "reason": "verification failed",
            "inequality_violations": rep.inequality_violations,
            "equality_failures": rep.equality_failures,
        }),
        CertifyError::Input(err) => json!({"reason": err.to_string()}),
    }
}

pub fn cmd_check<S: Scalar>(path: &Path, plan_path: Option<&Path>, opts: &Options) -> Result<Report> {
    let (instance, plan) = load::<S>(path, plan_path)?;
    check_report(&instance, plan.as_ref(), opts)
}

pub fn improve_report<S: Scalar>(
    instance: &Instance<S>,
    plan: &TransportPlan<S>,
    opts: &Options,
) -> Result<Report> {
    let mut r = Report::new("improve");
    plan.check_marginals(instance)?;
    let run = r.time("improve", || improve_to_monotone(instance, plan, opts.max_iters))?;
    r.detail("trajectory", Value::Array(run.trajectory.iter().map(scalar_json).collect()));
    r.detail("iterations", json!(run.iterations));
    r.detail("plan", plan_json(&run.plan));
    let decreasing = run.trajectory.windows(2).all(|w| w[1] < w[0]);
    r.verdict("cost strictly decreases at every step", decreasing, Value::Null);
    let witness = match check_c_monotone(instance, &run.plan)? {
        Monotonicity::Violated(c) if !run.converged => json!({"budget_exhausted": true, "pending_cycle": c.to_json()}),
        _ => Value::Null,
    };
    r.verdict("reached a c-monotone plan", run.converged, witness);
    Ok(r)
}

pub fn cmd_improve<S: Scalar>(path: &Path, plan_path: Option<&Path>, opts: &Options) -> Result<Report> {
    let (instance, plan) = load::<S>(path, plan_path)?;
    let plan = plan.ok_or_else(|| Error::BadParameter("improve needs a plan (inline or --plan)".into()))?;
    improve_report(&instance, &plan, opts)
}

/// Parameters of `gen`.
#[derive(Debug, Clone)]
pub struct GenParams {
    pub n: usize,
    pub a: String,
    pub b: String,
    pub seed: u64,
    pub inf_density: f64,
    /// Embed a plan: `identity`, `shift` or `optimal`.
    pub plan: Option<String>,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams { n: 3, a: "1".into(), b: "2".into(), seed: 0, inf_density: 0.0, plan: None }
    }
}

pub fn generate<S: Scalar>(example: &str, p: &GenParams) -> Result<(Instance<S>, Option<TransportPlan<S>>)> {
    let num = |s: &str| S::parse(s).ok_or_else(|| Error::BadParameter(format!("not a number: {s}")));
    let instance = match example {
        "ap" => generators::ambrosio_pratelli(p.n, num(&p.a)?, num(&p.b)?)?,
        "shift" => generators::shifted_interval(p.n)?,
        "zero-one" => generators::zero_one(p.n)?,
        "random" => {
            if !(0.0..=1.0).contains(&p.inf_density) {
                return Err(Error::BadParameter(format!("inf density {} outside [0,1]", p.inf_density)));
            }
            generators::random_instance(&RandomSpec {
                x_size: p.n,
                y_size: p.n,
                uniform: false,
                inf_density: p.inf_density,
                seed: p.seed,
            })?
        }
        other => return Err(Error::BadParameter(format!("unknown example {other:?} (ap, shift, zero-one, random)"))),
    };
    let plan = match p.plan.as_deref() {
        None => None,
        Some("identity") if instance.mu() == instance.nu() => Some(generators::identity_plan(&instance)),
        Some("shift") if instance.x_size() == instance.y_size() && instance.mu() == instance.nu() => {
            Some(generators::shift_plan(&instance, 1))
        }
        Some("optimal") => {
            let best = solve_exact(&instance);
            if !best.feasible {
                return Err(Error::Infeasible);
            }
            Some(best.plan)
        }
        Some(other) => return Err(Error::BadParameter(format!("plan {other:?} not available for {example}"))),
    };
    Ok((instance, plan))
}

pub fn cmd_gen<S: Scalar>(example: &str, p: &GenParams) -> Result<Value> {
    let (instance, plan) = generate::<S>(example, p)?;
    Ok(io::instance_json(&instance, plan.as_ref()))
}

pub fn kellerer_report<S: Scalar>(mmi: &MultiMarginalInstance<S>) -> Result<Report> {
    let mut r = Report::new("kellerer");
    let d = r.time("dichotomy", || check_dichotomy(mmi))?;
    let (p, l, n) = (scalar_json(&d.p.value), scalar_json(&d.l.value), d.arity);
    r.detail("n", json!(n));
    r.detail("P", p.clone());
    r.detail("L", l.clone());
    r.detail("L_cover", json!(d.l.cover));
    r.detail("relaxed_L", scalar_json(&d.relaxation.value));
    r.verdict("P >= L/n", d.lower_bound, json!({"P": p, "L": l, "n": n}));
    r.verdict("P <= L", d.upper_bound, json!({"P": p, "L": l}));
    if let Some(eq) = d.equality {
        r.verdict("P = L (n = 2)", eq, json!({"P": p, "L": l}));
    }
    r.verdict("fractional cover value = P", d.duality, json!({"relaxed_L": scalar_json(&d.relaxation.value)}));
    r.verdict(
        "rounding at 1/n gives a cover within n times the relaxation",
        d.rounding,
        json!({"cover": d.relaxation.rounded_cover, "weight": scalar_json(&d.relaxation.rounded_weight)}),
    );
    match &d.alternative {
        Alternative::LShapedNull { cover } => {
            r.verdict("alternative (a): B is L-shaped null", d.p.value.approx_zero(), json!({"cover": cover}))
        }
        Alternative::PositiveCoupling { mass, coupling } => r.verdict(
            "alternative (b): coupling with positive mass on B",
            mass.is_pos(),
            json!({
                "mass": scalar_json(mass),
                "coupling": coupling.iter().map(|(t, m)| json!({"tuple": t, "mass": scalar_json(m)})).collect::<Vec<_>>(),
            }),
        ),
    };
    Ok(r)
}

pub fn cmd_kellerer<S: Scalar>(path: &Path) -> Result<Report> {
    let mmi = io::parse_multi_marginal::<S>(&std::fs::read_to_string(path)?)?;
    kellerer_report(&mmi)
}

/// `*.json` files of a directory, sorted.
pub fn batch_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    files.sort();
    Ok(files)
}

/// Runs `run` on every file in parallel; results come back in file order.
pub fn run_batch<F>(files: &[PathBuf], run: F) -> Vec<(PathBuf, Result<Report>)>
where
    F: Fn(&Path) -> Result<Report> + Sync,
{
    std::thread::scope(|scope| {
        let handles: Vec<_> = files.iter().map(|f| scope.spawn(|| run(f))).collect();
        files
            .iter()
            .cloned()
            .zip(handles.into_iter().map(|h| h.join().expect("batch worker panicked")))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kellerer::strict_three_marginal_example;
    use crate::scalar::Rational;

    fn q(n: i64) -> Rational {
        Rational::from_ratio(n, 1)
    }

    fn zero_diagonal() -> Instance<Rational> {
        let f = |v: i64| ExtendedCost::Finite(q(v));
        Instance::new(
            vec![Rational::from_ratio(1, 2); 2],
            vec![Rational::from_ratio(1, 2); 2],
            vec![vec![f(0), f(1)], vec![f(1), f(0)]],
        )
        .unwrap()
    }

    #[test]
    fn solve_values() {
        let r = solve_report(&zero_diagonal());
        assert_eq!(r.details["value"], json!("0"));
        let (ap, _) = generate::<Rational>("ap", &GenParams { a: "2".into(), b: "1".into(), ..Default::default() }).unwrap();
        assert_eq!(solve_report(&ap).details["value"], json!("1"));
        let inf = Instance::new(
            vec![q(1)],
            vec![q(1)],
            vec![vec![ExtendedCost::<Rational>::Infinite]],
        )
        .unwrap();
        let r = solve_report(&inf);
        assert_eq!(r.exit_code(), 1);
        assert_eq!(r.verdicts[0].witness["reason"], json!("no finite plan"));
    }

    #[test]
    fn check_optimal_and_anti_diagonal() {
        let inst = zero_diagonal();
        let r = check_report(&inst, None, &Options::default()).unwrap();
        assert!(r.passed(), "{}", r.render_text());

        let half = Rational::from_ratio(1, 2);
        let anti = TransportPlan::new(vec![vec![q(0), half.clone()], vec![half, q(0)]]).unwrap();
        let r = check_report(&inst, Some(&anti), &Options::default()).unwrap();
        for claim in [CLAIM_OPTIMAL, CLAIM_MONOTONE, CLAIM_ROBUST, CLAIM_STRONG] {
            assert!(!r.verdict_for(claim).unwrap().pass, "{claim}");
        }
        assert_eq!(r.verdict_for(CLAIM_MONOTONE).unwrap().witness["gap"], json!("2"));
        assert!(r.verdict_for("(3) <=> (4)").unwrap().pass);
        assert!(r.verdict_for("(1) <=> (2)").unwrap().pass);
    }

    #[test]
    fn improve_trajectories() {
        let inst = zero_diagonal();
        let half = Rational::from_ratio(1, 2);
        let anti = TransportPlan::new(vec![vec![q(0), half.clone()], vec![half, q(0)]]).unwrap();
        let r = improve_report(&inst, &anti, &Options::default()).unwrap();
        assert_eq!(r.details["trajectory"], json!(["1", "0"]));
        assert!(r.passed());

        let p = GenParams { a: "1".into(), b: "2".into(), plan: Some("shift".into()), ..Default::default() };
        let (ap, plan) = generate::<Rational>("ap", &p).unwrap();
        let r = improve_report(&ap, &plan.unwrap(), &Options::default()).unwrap();
        assert_eq!(r.details["trajectory"], json!(["2", "1"]));

        let ident = generators::identity_plan(&ap);
        let r = improve_report(&ap, &ident, &Options::default()).unwrap();
        assert_eq!(r.details["trajectory"], json!(["1"]));
    }

    #[test]
    fn gen_examples() {
        let v = cmd_gen::<Rational>("ap", &GenParams::default()).unwrap();
        assert_eq!(v["cost"], json!([["1", "2", "inf"], ["inf", "1", "2"], ["2", "inf", "1"]]));
        let v = cmd_gen::<f64>("zero-one", &GenParams { n: 2, ..Default::default() }).unwrap();
        let c10 = v["cost"][1][0].as_f64().unwrap();
        assert!((c10 - (1.0 - 0.5f64.sqrt())).abs() < 1e-12);
        assert_eq!(v["cost"][0][1], json!("inf"));
        assert!(cmd_gen::<Rational>("nope", &GenParams::default()).is_err());
        assert!(cmd_gen::<Rational>("ap", &GenParams { n: 0, ..Default::default() }).is_err());
    }

    #[test]
    fn kellerer_verdicts() {
        let r = kellerer_report(&strict_three_marginal_example::<Rational>()).unwrap();
        assert!(r.passed(), "{}", r.render_text());
        assert_eq!(r.details["P"], json!("3/4"));
        assert_eq!(r.details["L"], json!("1"));
    }
}
