//! JSON encoding of engine values. Every top-level result is wrapped in an
//! envelope carrying [`SCHEMA`]; keys are emitted in sorted order, so output
//! is byte-for-byte stable for fixed inputs.

use serde_json::{json, Map, Value};

use crate::cat::{CatObject, Morphism};
use crate::expr::Expr;
use crate::footprint::{Footprint, Structure};
use crate::rules::{Match, Saturation, SketchRule};
use crate::sketch::{Constraint, Interpretation, Sketch, Verdict, Witness};

pub const SCHEMA: &str = "lfoc/1";

pub fn envelope(command: &str, result: Value) -> Value {
    json!({ "schema": SCHEMA, "command": command, "result": result })
}

pub fn object(o: &CatObject) -> Value {
    let edges: Vec<Value> = o
        .edges()
        .iter()
        .map(|e| {
            json!({
                "name": e.name,
                "source": o.vertices()[e.source],
                "target": o.vertices()[e.target],
            })
        })
        .collect();
    json!({ "kind": o.kind().to_string(), "vertices": o.vertices(), "edges": edges })
}

/// `[[from, to], ...]` over vertices then edges, in domain order.
pub fn morphism(m: &Morphism) -> Value {
    Value::Array(
        m.pairs()
            .into_iter()
            .map(|(a, b)| json!([a, b]))
            .collect(),
    )
}

pub fn expr(e: &Expr) -> Value {
    json!({ "arity": object(e.arity()), "text": e.to_string() })
}

pub fn constraint(c: &Constraint) -> Value {
    json!({ "expr": c.expr().to_string(), "arity": object(c.expr().arity()), "binding": morphism(c.binding()) })
}

pub fn sketch(s: &Sketch) -> Value {
    json!({
        "name": s.name(),
        "context": object(s.context()),
        "constraints": s.constraints().iter().map(constraint).collect::<Vec<_>>(),
    })
}

pub fn footprint(f: &Footprint) -> Value {
    let features: Map<String, Value> = f
        .features()
        .iter()
        .map(|(n, a)| (n.clone(), object(a)))
        .collect();
    json!({ "name": f.name(), "kind": f.kind().to_string(), "features": features })
}

pub fn structure(s: &Structure) -> Value {
    let interpretation: Map<String, Value> = s
        .footprint()
        .features()
        .iter()
        .enumerate()
        .map(|(p, (n, _))| {
            let facts: Vec<Value> = s.interpretations(p).iter().map(morphism).collect();
            (n.clone(), Value::Array(facts))
        })
        .collect();
    json!({
        "name": s.name(),
        "footprint": s.footprint().name(),
        "carrier": object(s.carrier()),
        "interpretation": interpretation,
    })
}

pub fn interpretation(i: &Interpretation<'_>) -> Value {
    json!({ "structure": i.structure.name(), "map": morphism(&i.map) })
}

pub fn witness(w: &Witness) -> Value {
    json!({ "structure": w.structure, "assignment": morphism(&w.assignment), "reason": w.reason })
}

pub fn verdict(v: &Verdict) -> Value {
    json!({
        "holds": v.holds,
        "scope": v.scope,
        "witness": v.witness.as_ref().map(witness),
    })
}

pub fn rule(r: &SketchRule) -> Value {
    json!({
        "name": r.name(),
        "lhs": sketch(r.lhs()),
        "rhs": sketch(r.rhs()),
        "via": morphism(r.r()),
    })
}

pub fn matched(m: &Match) -> Value {
    morphism(&m.phi)
}

pub fn saturation(s: &Saturation) -> Value {
    let steps: Vec<Value> = s
        .steps
        .iter()
        .map(|st| json!({ "rule": st.rule, "match": matched(&st.at) }))
        .collect();
    json!({ "status": s.status.to_string(), "steps": steps, "sketch": sketch(&s.sketch) })
}
