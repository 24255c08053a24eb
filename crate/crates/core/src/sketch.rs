//! Constraints, sketches, and their models: satisfaction, registry-relative
//! entailment, sketch morphisms, sketch pushouts, and the semantical sketches
//! of a structure.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::ControlFlow;
use std::sync::Arc;

use indexmap::IndexSet;
use rayon::prelude::*;

use crate::cat::{self, CatObject, Morphism};
use crate::error::{Error, Result};
use crate::expr::{self, Evaluator, Expr};
use crate::footprint::{self, Footprint, Registry, Structure};

/// An expression bound into a context: `(X ⊳ e, δ: X -> K)`.
#[derive(Clone, Debug)]
pub struct Constraint {
    expr: Expr,
    binding: Morphism,
}

impl Constraint {
    pub fn new(expr: Expr, binding: Morphism) -> Result<Self> {
        if binding.dom() != expr.arity() {
            return Err(Error::Boundary(format!(
                "binding out of {} for an expression over {}",
                binding.dom(),
                expr.arity()
            )));
        }
        Ok(Constraint { expr, binding })
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn binding(&self) -> &Morphism {
        &self.binding
    }

    /// The context this constraint lives in.
    pub fn context(&self) -> &Arc<CatObject> {
        self.binding.cod()
    }
}

/// Same expression up to bound names, same binding into the same context.
impl PartialEq for Constraint {
    fn eq(&self, other: &Self) -> bool {
        self.binding.cod() == other.binding.cod()
            && self.binding.vmap() == other.binding.vmap()
            && self.binding.emap() == other.binding.emap()
            && self.expr == other.expr
    }
}

impl Eq for Constraint {}

impl Hash for Constraint {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.expr.hash(state);
        self.binding.vmap().hash(state);
        self.binding.emap().hash(state);
        self.binding.cod().hash(state);
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) @ {}", self.expr, self.binding)
    }
}

/// A context together with a finite set of constraints on it.
#[derive(Clone, Debug)]
pub struct Sketch {
    name: String,
    context: Arc<CatObject>,
    constraints: IndexSet<Constraint>,
}

impl Sketch {
    pub fn new(
        name: impl Into<String>,
        context: Arc<CatObject>,
        constraints: impl IntoIterator<Item = Constraint>,
    ) -> Result<Self> {
        let name = name.into();
        let constraints: IndexSet<Constraint> = constraints.into_iter().collect();
        for c in &constraints {
            if c.binding.cod() != &context {
                return Err(Error::Boundary(format!(
                    "constraint of sketch `{name}` is bound into {} instead of {context}",
                    c.binding.cod()
                )));
            }
        }
        Ok(Sketch {
            name,
            context,
            constraints,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn context(&self) -> &Arc<CatObject> {
        &self.context
    }

    pub fn constraints(&self) -> &IndexSet<Constraint> {
        &self.constraints
    }

    pub fn contains(&self, c: &Constraint) -> bool {
        self.constraints.contains(c)
    }

    /// Checks every constraint expression against the footprint.
    pub fn wf_check(&self, footprint: &Footprint) -> Result<()> {
        if self.context.kind() != footprint.kind() {
            return Err(Error::KindMismatch {
                expected: footprint.kind(),
                found: self.context.kind(),
            });
        }
        self.constraints
            .iter()
            .try_for_each(|c| expr::wf_check(&c.expr, footprint))
    }
}

/// Equality ignores the name and the order of constraints.
impl PartialEq for Sketch {
    fn eq(&self, other: &Self) -> bool {
        self.context == other.context
            && self.constraints.len() == other.constraints.len()
            && self.constraints.iter().all(|c| other.constraints.contains(c))
    }
}

impl Eq for Sketch {}

/// An interpretation `a: K -> U` of a context in a structure.
#[derive(Clone, Debug)]
pub struct Interpretation<'a> {
    pub map: Morphism,
    pub structure: &'a Structure,
}

impl<'a> Interpretation<'a> {
    pub fn new(map: Morphism, structure: &'a Structure) -> Result<Self> {
        if map.cod() != structure.carrier() {
            return Err(Error::Boundary(format!(
                "interpretation lands in {} rather than the carrier of `{}`",
                map.cod(),
                structure.name()
            )));
        }
        Ok(Interpretation { map, structure })
    }
}

/// Result of a check that quantifies over a registry or over interpretations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub holds: bool,
    /// What the check ranged over.
    pub scope: String,
    pub witness: Option<Witness>,
}

/// A counterexample: an interpretation in a named structure, with the reason
/// it refutes the property.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub structure: String,
    pub assignment: Morphism,
    pub reason: String,
}

impl Verdict {
    pub(crate) fn from_witness(scope: String, witness: Option<Witness>) -> Self {
        Verdict {
            holds: witness.is_none(),
            scope,
            witness,
        }
    }
}

/// Sentence translation: post-composes the binding with `phi`.
pub fn translate_constraint(phi: &Morphism, c: &Constraint) -> Result<Constraint> {
    if phi.dom() != c.binding.cod() {
        return Err(Error::Boundary(format!(
            "translation out of {} applied to a constraint in {}",
            phi.dom(),
            c.binding.cod()
        )));
    }
    Ok(Constraint {
        expr: c.expr.clone(),
        binding: c.binding.then(phi)?,
    })
}

pub fn translate_all<'c>(
    phi: &Morphism,
    cs: impl IntoIterator<Item = &'c Constraint>,
) -> Result<IndexSet<Constraint>> {
    cs.into_iter().map(|c| translate_constraint(phi, c)).collect()
}

/// Model reduct: pre-composes the interpretation with `phi`.
pub fn reduct<'a>(phi: &Morphism, i: &Interpretation<'a>) -> Result<Interpretation<'a>> {
    if phi.cod() != i.map.dom() {
        return Err(Error::Boundary(format!(
            "reduct along a map into {} of an interpretation of {}",
            phi.cod(),
            i.map.dom()
        )));
    }
    Ok(Interpretation {
        map: phi.then(&i.map)?,
        structure: i.structure,
    })
}

pub fn satisfies(i: &Interpretation<'_>, c: &Constraint) -> Result<bool> {
    if i.map.dom() != c.binding.cod() {
        return Err(Error::Boundary(format!(
            "interpretation of {} checked against a constraint in {}",
            i.map.dom(),
            c.binding.cod()
        )));
    }
    expr::holds(&c.binding.then(&i.map)?, &c.expr, i.structure)
}

/// Compares both sides of the satisfaction condition for one triple.
pub fn check_satisfaction_condition(
    phi: &Morphism,
    c: &Constraint,
    i: &Interpretation<'_>,
) -> Result<bool> {
    let left = satisfies(&reduct(phi, i)?, c)?;
    let right = satisfies(i, &translate_constraint(phi, c)?)?;
    Ok(left == right)
}

/// First constraint violated by `a`, if any.
fn first_violation<'c>(
    ev: &mut Evaluator<'_>,
    constraints: impl IntoIterator<Item = &'c Constraint>,
    vimg: &[usize],
    eimg: &[usize],
    scratch: &mut (Vec<usize>, Vec<usize>),
) -> Option<&'c Constraint> {
    constraints.into_iter().find(|c| {
        let b = &c.binding;
        scratch.0.clear();
        scratch.0.extend(b.vmap().iter().map(|&v| vimg[v]));
        scratch.1.clear();
        scratch.1.extend(b.emap().iter().map(|&e| eimg[e]));
        !ev.eval(&c.expr, &scratch.0, &scratch.1)
    })
}

fn check_constraints_against(
    context: &CatObject,
    constraints: &IndexSet<Constraint>,
    structure: &Structure,
) -> Result<()> {
    if context.kind() != structure.carrier().kind() {
        return Err(Error::KindMismatch {
            expected: context.kind(),
            found: structure.carrier().kind(),
        });
    }
    for c in constraints {
        expr::wf_check(&c.expr, structure.footprint())?;
    }
    Ok(())
}

/// All interpretations of the sketch's context in `u` that satisfy every
/// constraint, in canonical order.
pub fn models<'a>(sketch: &Sketch, u: &'a Structure) -> Result<Vec<Interpretation<'a>>> {
    check_constraints_against(&sketch.context, &sketch.constraints, u)?;
    let mut ev = Evaluator::new(u);
    let mut scratch = Default::default();
    let mut out = Vec::new();
    let carrier = u.carrier();
    let _ = cat::search_homs(&sketch.context, carrier, None, &mut |v, e| {
        if first_violation(&mut ev, &sketch.constraints, v, e, &mut scratch).is_none() {
            out.push(Interpretation {
                map: Morphism::from_raw(sketch.context.clone(), carrier.clone(), v.to_vec(), e.to_vec()),
                structure: u,
            });
        }
        ControlFlow::Continue(())
    });
    Ok(out)
}

fn entailment_witness(
    context: &Arc<CatObject>,
    premises: &IndexSet<Constraint>,
    conclusions: &IndexSet<Constraint>,
    u: &Structure,
) -> Option<Witness> {
    let mut ev = Evaluator::new(u);
    let mut scratch = Default::default();
    let mut found = None;
    let carrier = u.carrier();
    let _ = cat::search_homs(context, carrier, None, &mut |v, e| {
        if first_violation(&mut ev, premises, v, e, &mut scratch).is_some() {
            return ControlFlow::Continue(());
        }
        match first_violation(&mut ev, conclusions, v, e, &mut scratch) {
            None => ControlFlow::Continue(()),
            Some(c) => {
                found = Some(Witness {
                    structure: u.name().to_string(),
                    assignment: Morphism::from_raw(context.clone(), carrier.clone(), v.to_vec(), e.to_vec()),
                    reason: format!("satisfies the premises but not {c}"),
                });
                ControlFlow::Break(())
            }
        }
    });
    found
}

/// `premises ⊩ conclusions` over every interpretation of `context` in every
/// structure of the registry. Structures are checked in parallel; the
/// reported witness is the first in registry order.
pub fn entails(
    context: &Arc<CatObject>,
    premises: &IndexSet<Constraint>,
    conclusions: &IndexSet<Constraint>,
    registry: &Registry,
) -> Result<Verdict> {
    for c in premises.iter().chain(conclusions) {
        if c.binding.cod() != context {
            return Err(Error::Boundary(format!(
                "constraint bound into {} rather than {context}",
                c.binding.cod()
            )));
        }
        expr::wf_check(&c.expr, registry.footprint())?;
    }
    if context.kind() != registry.footprint().kind() {
        return Err(Error::KindMismatch {
            expected: registry.footprint().kind(),
            found: context.kind(),
        });
    }
    let witness = registry
        .structures()
        .par_iter()
        .find_map_first(|u| entailment_witness(context, premises, conclusions, u));
    Ok(Verdict::from_witness(registry.describe(), witness))
}

/// Whether `phi` is a sketch morphism `from -> to` relative to the registry.
pub fn check_sketch_morphism(
    phi: &Morphism,
    from: &Sketch,
    to: &Sketch,
    registry: &Registry,
) -> Result<Verdict> {
    if phi.dom() != &from.context || phi.cod() != &to.context {
        return Err(Error::Boundary(format!(
            "{} -> {} is not a map from the context of `{}` to that of `{}`",
            phi.dom(),
            phi.cod(),
            from.name,
            to.name
        )));
    }
    let translated = translate_all(phi, &from.constraints)?;
    entails(&to.context, &to.constraints, &translated, registry)
}

#[derive(Clone, Debug)]
pub struct SketchPushout {
    pub sketch: Sketch,
    pub inj_left: Morphism,
    pub inj_right: Morphism,
}

/// Pushout of the span of contexts `f: C -> left`, `g: C -> right`, carrying
/// both sketches' constraints along the injections.
pub fn sketch_pushout(
    f: &Morphism,
    g: &Morphism,
    left: &Sketch,
    right: &Sketch,
) -> Result<SketchPushout> {
    if f.cod() != &left.context || g.cod() != &right.context {
        return Err(Error::NotASpan(format!(
            "legs end in {} and {}, not in the contexts of `{}` and `{}`",
            f.cod(),
            g.cod(),
            left.name,
            right.name
        )));
    }
    let po = cat::pushout(f, g)?;
    let mut constraints = translate_all(&po.inj_left, &left.constraints)?;
    constraints.extend(translate_all(&po.inj_right, &right.constraints)?);
    let sketch = Sketch {
        name: format!("{}_{}", left.name, right.name),
        context: po.apex,
        constraints,
    };
    Ok(SketchPushout {
        sketch,
        inj_left: po.inj_left,
        inj_right: po.inj_right,
    })
}

/// Sketch with one atomic constraint `P(id) @ a` per valid interpretation.
pub fn structure_to_sketch_min(u: &Structure) -> Sketch {
    let mut constraints = IndexSet::new();
    for (p, (feature, arity)) in u.footprint().features().iter().enumerate() {
        let e = Expr::atomic(feature.clone(), cat::identity(arity));
        for a in u.interpretations(p) {
            constraints.insert(Constraint {
                expr: e.clone(),
                binding: a.clone(),
            });
        }
    }
    Sketch {
        name: format!("{}_min", u.name()),
        context: u.carrier().clone(),
        constraints,
    }
}

/// Sketch of every `(e, a)` with `e` in `universe` and `a` a solution of `e`.
pub fn structure_to_sketch_max(u: &Structure, universe: &[Expr]) -> Result<Sketch> {
    let mut constraints = IndexSet::new();
    for e in universe {
        for a in expr::solutions(e, u)? {
            constraints.insert(Constraint {
                expr: e.clone(),
                binding: a,
            });
        }
    }
    Ok(Sketch {
        name: format!("{}_max", u.name()),
        context: u.carrier().clone(),
        constraints,
    })
}

/// Checks that `(id, u)` is initial among the models of the minimal sketch of
/// `u` in the registry: every model `(a, v)` has exactly one structure
/// homomorphism `s: u -> v` with `id ; s = a`.
pub fn check_initial_model(u: &Structure, registry: &Registry) -> Result<Verdict> {
    let min = structure_to_sketch_min(u);
    let id = cat::identity(u.carrier());
    let mut witness = None;
    'outer: for v in registry.structures() {
        if !Arc::ptr_eq(v.footprint(), u.footprint()) && v.footprint() != u.footprint() {
            return Err(Error::Boundary(format!(
                "`{}` and `{}` have different footprints",
                u.name(),
                v.name()
            )));
        }
        for model in models(&min, v)? {
            let mediators = cat::extensions(&id, &model.map)?
                .into_iter()
                .filter(|s| footprint::preserves(s, u, v))
                .count();
            if mediators != 1 {
                witness = Some(Witness {
                    structure: v.name().to_string(),
                    assignment: model.map,
                    reason: format!("{mediators} mediating homomorphisms"),
                });
                break 'outer;
            }
        }
    }
    Ok(Verdict::from_witness(registry.describe(), witness))
}
