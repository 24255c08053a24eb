//! Sketch rules: matching, conservativity and soundness, closedness,
//! pushout-based application, bounded saturation, and the universal rules.

use std::fmt;
use std::ops::ControlFlow;
use std::sync::Arc;

use indexmap::IndexSet;
use rayon::prelude::*;

use crate::cat::{self, CatObject, Morphism, Pins};
use crate::error::{Error, Result};
use crate::expr::{Evaluator, Expr, Node, Quantifier};
use crate::footprint::{Registry, Structure};
use crate::sketch::{self, Constraint, Sketch, Verdict, Witness};

/// `lhs ⇒^r rhs` with `r: context(lhs) -> context(rhs)`.
#[derive(Clone, Debug)]
pub struct SketchRule {
    name: String,
    lhs: Sketch,
    rhs: Sketch,
    r: Morphism,
}

impl SketchRule {
    pub fn new(name: impl Into<String>, lhs: Sketch, rhs: Sketch, r: Morphism) -> Result<Self> {
        let name = name.into();
        if r.dom() != lhs.context() || r.cod() != rhs.context() {
            return Err(Error::Boundary(format!(
                "rule `{name}`: {} -> {} does not connect the contexts {} and {}",
                r.dom(),
                r.cod(),
                lhs.context(),
                rhs.context()
            )));
        }
        Ok(SketchRule { name, lhs, rhs, r })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn lhs(&self) -> &Sketch {
        &self.lhs
    }

    pub fn rhs(&self) -> &Sketch {
        &self.rhs
    }

    pub fn r(&self) -> &Morphism {
        &self.r
    }

    /// Distinct constraint expressions of both sides, left first.
    pub fn expressions(&self) -> Vec<Expr> {
        let set: IndexSet<Expr> = self
            .lhs
            .constraints()
            .iter()
            .chain(self.rhs.constraints())
            .map(|c| c.expr().clone())
            .collect();
        set.into_iter().collect()
    }
}

impl PartialEq for SketchRule {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.lhs == other.lhs && self.rhs == other.rhs && self.r == other.r
    }
}

impl Eq for SketchRule {}

/// A context morphism carrying every constraint of a pattern into a sketch.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Match {
    pub phi: Morphism,
}

impl fmt::Display for Match {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.phi.fmt(f)
    }
}

fn translated_in(pattern: &Sketch, target: &Sketch, phi: &Morphism) -> bool {
    pattern.constraints().iter().all(|c| {
        sketch::translate_constraint(phi, c)
            .map(|t| target.contains(&t))
            .unwrap_or(false)
    })
}

pub fn is_match(phi: &Morphism, pattern: &Sketch, target: &Sketch) -> bool {
    phi.dom() == pattern.context()
        && phi.cod() == target.context()
        && translated_in(pattern, target, phi)
}

fn same_kind(a: &CatObject, b: &CatObject) -> Result<()> {
    if a.kind() != b.kind() {
        return Err(Error::KindMismatch {
            expected: a.kind(),
            found: b.kind(),
        });
    }
    Ok(())
}

/// All matches of `pattern` in `target`, in canonical order.
pub fn find_matches(pattern: &Sketch, target: &Sketch) -> Result<Vec<Match>> {
    same_kind(pattern.context(), target.context())?;
    let (dom, cod) = (pattern.context(), target.context());
    let mut out = Vec::new();
    let _ = cat::search_homs(dom, cod, None, &mut |v, e| {
        let phi = Morphism::from_raw(dom.clone(), cod.clone(), v.to_vec(), e.to_vec());
        if translated_in(pattern, target, &phi) {
            out.push(Match { phi });
        }
        ControlFlow::Continue(())
    });
    Ok(out)
}

fn conservativity_witness(u: &Structure, rule: &SketchRule) -> Result<Option<Witness>> {
    let lhs_models = sketch::models(&rule.lhs, u)?;
    rule.rhs.wf_check(u.footprint())?;
    let mut ev = Evaluator::new(u);
    let carrier = u.carrier();
    let rhs = rule.rhs.constraints();
    let mut scratch = (Vec::new(), Vec::new());
    for model in lhs_models {
        let a = &model.map;
        let extended = match Pins::along(&rule.r, a.vmap(), a.emap()) {
            None => false,
            Some(pins) => cat::search_homs(rule.rhs.context(), carrier, Some(&pins), &mut |bv, be| {
                let ok = rhs.iter().all(|c| {
                    let d = c.binding();
                    scratch.0.clear();
                    scratch.0.extend(d.vmap().iter().map(|&v| bv[v]));
                    scratch.1.clear();
                    scratch.1.extend(d.emap().iter().map(|&e| be[e]));
                    ev.eval(c.expr(), &scratch.0, &scratch.1)
                });
                if ok {
                    ControlFlow::Break(())
                } else {
                    ControlFlow::Continue(())
                }
            })
            .is_break(),
        };
        if !extended {
            return Ok(Some(Witness {
                structure: u.name().to_string(),
                assignment: model.map,
                reason: format!(
                    "model of the left side of `{}` with no extension to a model of its right side",
                    rule.name
                ),
            }));
        }
    }
    Ok(None)
}

/// Whether every model of the rule's left side in `u` extends along `r` to a
/// model of its right side. A failure carries the unextendable interpretation.
pub fn is_conservative(u: &Structure, rule: &SketchRule) -> Result<Verdict> {
    let witness = conservativity_witness(u, rule)?;
    Ok(Verdict {
        holds: witness.is_none(),
        scope: format!("structure `{}`", u.name()),
        witness,
    })
}

/// Conservativity in every structure of the registry.
pub fn is_sound(rule: &SketchRule, registry: &Registry) -> Result<Verdict> {
    rule.lhs.wf_check(registry.footprint())?;
    rule.rhs.wf_check(registry.footprint())?;
    let found: Result<Option<Witness>> = registry
        .structures()
        .par_iter()
        .map(|u| conservativity_witness(u, rule))
        .find_map_first(|r| match r {
            Ok(None) => None,
            other => Some(other),
        })
        .unwrap_or(Ok(None));
    Ok(Verdict::from_witness(registry.describe(), found?))
}

/// Structures of the registry in which every rule is conservative.
pub fn axiom_models<'r>(registry: &'r Registry, axioms: &[SketchRule]) -> Result<Vec<&'r Structure>> {
    let mut out = Vec::new();
    for u in registry.structures() {
        let mut ok = true;
        for rule in axioms {
            if conservativity_witness(u, rule)?.is_some() {
                ok = false;
                break;
            }
        }
        if ok {
            out.push(u);
        }
    }
    Ok(out)
}

fn closes_at(k: &Sketch, rule: &SketchRule, a: &Morphism) -> bool {
    let Some(pins) = Pins::along(&rule.r, a.vmap(), a.emap()) else {
        return false;
    };
    let (dom, cod) = (rule.rhs.context(), k.context());
    cat::search_homs(dom, cod, Some(&pins), &mut |v, e| {
        let b = Morphism::from_raw(dom.clone(), cod.clone(), v.to_vec(), e.to_vec());
        if translated_in(&rule.rhs, k, &b) {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })
    .is_break()
}

/// The first match of the rule's left side in `k` that does not factor
/// through a match of its right side, if any.
pub fn closedness_witness(k: &Sketch, rule: &SketchRule) -> Result<Option<Match>> {
    Ok(find_matches(&rule.lhs, k)?
        .into_iter()
        .find(|m| !closes_at(k, rule, &m.phi)))
}

pub fn is_closed(k: &Sketch, rule: &SketchRule) -> Result<bool> {
    Ok(closedness_witness(k, rule)?.is_none())
}

/// Applies the rule at a match by pushing out `m` against `r`.
///
/// The existing context stays on the left of the pushout, so an identity `r`
/// leaves the context untouched and only adds constraints.
pub fn apply_rule(k: &Sketch, rule: &SketchRule, m: &Match) -> Result<Sketch> {
    if !is_match(&m.phi, &rule.lhs, k) {
        return Err(Error::NotAMatch(format!(
            "{} does not carry the left side of `{}` into `{}`",
            m.phi,
            rule.name,
            k.name()
        )));
    }
    let po = cat::pushout(&m.phi, &rule.r)?;
    let mut constraints = sketch::translate_all(&po.inj_left, k.constraints())?;
    constraints.extend(sketch::translate_all(&po.inj_right, rule.rhs.constraints())?);
    Sketch::new(k.name(), po.apex, constraints)
}

/// Budgets for [`saturate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_steps: usize,
    pub max_vertices: usize,
    pub max_edges: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_steps: 100,
            max_vertices: 64,
            max_edges: 64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Closed,
    BudgetExhausted,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Closed => "closed",
            Status::BudgetExhausted => "budget-exhausted",
        })
    }
}

#[derive(Clone, Debug)]
pub struct Step {
    pub rule: String,
    pub at: Match,
}

#[derive(Clone, Debug)]
pub struct Saturation {
    pub sketch: Sketch,
    pub status: Status,
    pub steps: Vec<Step>,
}

/// Applies rules at unclosed matches until every rule is closed or a budget
/// trips. Each round takes the first rule, in the given order, with an
/// unclosed match and applies it at its first such match in canonical order;
/// a step that would exceed the context budget is not taken.
pub fn saturate(k: &Sketch, rules: &[SketchRule], limits: Limits) -> Result<Saturation> {
    let mut current = k.clone();
    let mut steps = Vec::new();
    loop {
        let mut next = None;
        for rule in rules {
            if let Some(m) = closedness_witness(&current, rule)? {
                next = Some((rule, m));
                break;
            }
        }
        let Some((rule, m)) = next else {
            return Ok(Saturation {
                sketch: current,
                status: Status::Closed,
                steps,
            });
        };
        if steps.len() >= limits.max_steps {
            break;
        }
        let applied = apply_rule(&current, rule, &m)?;
        let ctx = applied.context();
        if ctx.vertex_count() > limits.max_vertices || ctx.edge_count() > limits.max_edges {
            break;
        }
        steps.push(Step {
            rule: rule.name.clone(),
            at: m,
        });
        current = applied;
    }
    Ok(Saturation {
        sketch: current,
        status: Status::BudgetExhausted,
        steps,
    })
}

fn at_identity(e: &Expr) -> Constraint {
    Constraint::new(e.clone(), cat::identity(e.arity())).expect("identity binding")
}

fn same_arity(e: &Expr, f: &Expr) -> Result<()> {
    if e.arity() != f.arity() {
        return Err(Error::MalformedPattern(format!(
            "operands over {} and {} differ in arity",
            e.arity(),
            f.arity()
        )));
    }
    Ok(())
}

fn identity_rule(name: &str, x: &Arc<CatObject>, lhs: Vec<Constraint>, rhs: Vec<Constraint>) -> SketchRule {
    let lhs = Sketch::new(format!("{name}_lhs"), x.clone(), lhs).expect("bindings into x");
    let rhs = Sketch::new(format!("{name}_rhs"), x.clone(), rhs).expect("bindings into x");
    SketchRule::new(name, lhs, rhs, cat::identity(x)).expect("identity on x")
}

/// `(X, {e and f}) ⇒ (X, {e, f})`.
pub fn unfold(e: &Expr, f: &Expr) -> Result<SketchRule> {
    same_arity(e, f)?;
    let both = Expr::and(e.clone(), f.clone());
    Ok(identity_rule(
        "unfold",
        e.arity(),
        vec![at_identity(&both)],
        vec![at_identity(e), at_identity(f)],
    ))
}

/// `(X, {e, f}) ⇒ (X, {e and f})`.
pub fn fold(e: &Expr, f: &Expr) -> Result<SketchRule> {
    same_arity(e, f)?;
    let both = Expr::and(e.clone(), f.clone());
    Ok(identity_rule(
        "fold",
        e.arity(),
        vec![at_identity(e), at_identity(f)],
        vec![at_identity(&both)],
    ))
}

/// For `cond = given e exists t into Y . f`:
/// `(X, {e, cond}) ⇒^t (Y, {f})`. A `top` premise is left out of the left side.
pub fn modus_ponens(cond: &Expr) -> Result<SketchRule> {
    let Node::Quant {
        q: Quantifier::Exists,
        premise,
        along,
        body,
    } = cond.node()
    else {
        return Err(Error::MalformedPattern(format!(
            "modus ponens needs a conditional existential, got `{cond}`"
        )));
    };
    let mut lhs = vec![at_identity(cond)];
    if !matches!(premise.node(), Node::Top) {
        lhs.insert(0, at_identity(premise));
    }
    let lhs = Sketch::new("modus_ponens_lhs", cond.arity().clone(), lhs)?;
    let rhs = Sketch::new("modus_ponens_rhs", along.cod().clone(), [at_identity(body)])?;
    SketchRule::new("modus_ponens", lhs, rhs, along.clone())
}

/// `(X, ∅) ⇒ (X, {e})`.
pub fn intro(e: &Expr) -> SketchRule {
    identity_rule("intro", e.arity(), vec![], vec![at_identity(e)])
}

/// Conservativity of a rule in `u` next to closedness of the maximal
/// semantical sketch of `u` over the rule's own expressions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Equivalence {
    pub conservative: Verdict,
    pub closed: bool,
    pub failing_match: Option<Match>,
}

impl Equivalence {
    pub fn agree(&self) -> bool {
        self.conservative.holds == self.closed
    }
}

pub fn check_equivalence(u: &Structure, rule: &SketchRule) -> Result<Equivalence> {
    let conservative = is_conservative(u, rule)?;
    let max = sketch::structure_to_sketch_max(u, &rule.expressions())?;
    let failing_match = closedness_witness(&max, rule)?;
    Ok(Equivalence {
        conservative,
        closed: failing_match.is_none(),
        failing_match,
    })
}
