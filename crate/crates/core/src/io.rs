//! JSON formats.
//!
//! Instance: `{"mu": [...], "nu": [...], "cost": [[...]], "plan": [[...]]?}`
//! with `"inf"` for an infinite cost. Multi-marginal instance:
//! `{"weights": [[...], ...], "B": [[i, j, ...], ...]}`. Numbers may be JSON
//! numbers or strings (`"p/q"`, decimals); output uses `"p/q"` strings in
//! rational mode and plain numbers in float mode.

use std::path::Path;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::kellerer::MultiMarginalInstance;
use crate::model::{ExtendedCost, Instance, TransportPlan};
use crate::scalar::Scalar;

fn number<S: Scalar>(v: &Value, at: &str) -> Result<S> {
    let parsed = match v {
        Value::String(s) => S::parse(s.trim()),
        Value::Number(n) => S::parse(&n.to_string()),
        _ => None,
    };
    parsed.ok_or_else(|| Error::Parse(format!("{at}: expected a number, got {v}")))
}

fn cost_entry<S: Scalar>(v: &Value, at: &str) -> Result<ExtendedCost<S>> {
    match v {
        Value::String(s) if matches!(s.trim(), "inf" | "+inf" | "Infinity" | "∞") => {
            Ok(ExtendedCost::Infinite)
        }
        _ => number(v, at).map(ExtendedCost::Finite),
    }
}

fn array<'a>(v: &'a Value, at: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| Error::Parse(format!("{at}: expected an array")))
}

fn field<'a>(doc: &'a Value, key: &str) -> Result<&'a Value> {
    doc.get(key).ok_or_else(|| Error::Parse(format!("missing field \"{key}\"")))
}

fn vector<S: Scalar>(v: &Value, at: &str) -> Result<Vec<S>> {
    array(v, at)?
        .iter()
        .enumerate()
        .map(|(i, e)| number(e, &format!("{at}[{i}]")))
        .collect()
}

fn matrix<S: Scalar>(v: &Value, at: &str) -> Result<Vec<Vec<S>>> {
    array(v, at)?
        .iter()
        .enumerate()
        .map(|(i, r)| vector(r, &format!("{at}[{i}]")))
        .collect()
}

/// Parses and validates an instance with its optional plan. Plan
/// marginals are not checked here.
pub fn parse_instance<S: Scalar>(text: &str) -> Result<(Instance<S>, Option<TransportPlan<S>>)> {
    let doc: Value = serde_json::from_str(text)?;
    let mu = vector(field(&doc, "mu")?, "mu")?;
    let nu = vector(field(&doc, "nu")?, "nu")?;
    let cost = array(field(&doc, "cost")?, "cost")?
        .iter()
        .enumerate()
        .map(|(i, row)| {
            array(row, &format!("cost[{i}]"))?
                .iter()
                .enumerate()
                .map(|(j, e)| cost_entry(e, &format!("cost[{i}][{j}]")))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let instance = Instance::new(mu, nu, cost)?;
    let plan = match doc.get("plan") {
        None | Some(Value::Null) => None,
        Some(p) => {
            let plan = plan_from_json(p)?;
            plan.check_dims(&instance)?;
            Some(plan)
        }
    };
    Ok((instance, plan))
}

/// A plan given as a bare matrix.
pub fn plan_from_json<S: Scalar>(v: &Value) -> Result<TransportPlan<S>> {
    TransportPlan::new(matrix(v, "plan")?)
}

pub fn read_instance<S: Scalar>(path: &Path) -> Result<(Instance<S>, Option<TransportPlan<S>>)> {
    parse_instance(&std::fs::read_to_string(path)?)
}

pub fn scalar_json<S: Scalar>(v: &S) -> Value {
    if S::EXACT {
        Value::String(v.render())
    } else {
        json!(v.to_f64())
    }
}

pub fn cost_json<S: Scalar>(c: &ExtendedCost<S>) -> Value {
    match c {
        ExtendedCost::Finite(v) => scalar_json(v),
        ExtendedCost::Infinite => Value::String("inf".into()),
    }
}

pub fn plan_json<S: Scalar>(plan: &TransportPlan<S>) -> Value {
    Value::Array(
        plan.rows()
            .iter()
            .map(|r| Value::Array(r.iter().map(scalar_json).collect()))
            .collect(),
    )
}

pub fn instance_json<S: Scalar>(instance: &Instance<S>, plan: Option<&TransportPlan<S>>) -> Value {
    let mut doc = json!({
        "mu": instance.mu().iter().map(scalar_json).collect::<Vec<_>>(),
        "nu": instance.nu().iter().map(scalar_json).collect::<Vec<_>>(),
        "cost": instance
            .cost_rows()
            .iter()
            .map(|r| r.iter().map(cost_json).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
    });
    if let Some(p) = plan {
        doc["plan"] = plan_json(p);
    }
    doc
}

pub fn parse_multi_marginal<S: Scalar>(text: &str) -> Result<MultiMarginalInstance<S>> {
    let doc: Value = serde_json::from_str(text)?;
    let weights = matrix(field(&doc, "weights")?, "weights")?;
    let set = array(field(&doc, "B")?, "B")?
        .iter()
        .enumerate()
        .map(|(k, t)| {
            array(t, &format!("B[{k}]"))?
                .iter()
                .map(|e| {
                    e.as_u64()
                        .map(|v| v as usize)
                        .ok_or_else(|| Error::Parse(format!("B[{k}]: expected indices, got {e}")))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    MultiMarginalInstance::new(weights, set)
}

pub fn multi_marginal_json<S: Scalar>(mmi: &MultiMarginalInstance<S>) -> Value {
    json!({
        "weights": mmi
            .weights()
            .iter()
            .map(|w| w.iter().map(scalar_json).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
        "B": mmi.set(),
    })
}
