//! First-order feature expressions, their solution-set semantics, and
//! substitution along variable morphisms.

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::ControlFlow;
use std::sync::Arc;

use crate::cat::{self, CatObject, Morphism, Pins};
use crate::error::{Error, Result};
use crate::footprint::{Footprint, Structure};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Exists,
    Forall,
}

impl fmt::Display for Quantifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quantifier::Exists => "exists",
            Quantifier::Forall => "forall",
        })
    }
}

#[derive(Clone, Debug)]
pub enum Node {
    Atomic {
        feature: String,
        delta: Morphism,
    },
    Top,
    Bot,
    And(Expr, Expr),
    Or(Expr, Expr),
    Not(Expr),
    /// `given premise, q b. t;b = a and body(b)`, with `along: X -> Y` and
    /// the body over `Y`.
    Quant {
        q: Quantifier,
        premise: Expr,
        along: Morphism,
        body: Expr,
    },
}

/// A feature expression `X ⊳ e`.
///
/// Equality and hashing identify expressions that differ only in the names
/// of their arity objects (bound variable names).
#[derive(Clone, Debug)]
pub struct Expr {
    arity: Arc<CatObject>,
    node: Arc<Node>,
}

impl Expr {
    fn make(arity: Arc<CatObject>, node: Node) -> Self {
        Expr {
            arity,
            node: Arc::new(node),
        }
    }

    pub fn top(arity: Arc<CatObject>) -> Self {
        Self::make(arity, Node::Top)
    }

    pub fn bot(arity: Arc<CatObject>) -> Self {
        Self::make(arity, Node::Bot)
    }

    /// `P(delta)`; the arity is the codomain of `delta`.
    pub fn atomic(feature: impl Into<String>, delta: Morphism) -> Self {
        Self::make(
            delta.cod().clone(),
            Node::Atomic {
                feature: feature.into(),
                delta,
            },
        )
    }

    pub fn and(left: Expr, right: Expr) -> Self {
        Self::make(left.arity.clone(), Node::And(left, right))
    }

    pub fn or(left: Expr, right: Expr) -> Self {
        Self::make(left.arity.clone(), Node::Or(left, right))
    }

    pub fn negate(inner: Expr) -> Self {
        Self::make(inner.arity.clone(), Node::Not(inner))
    }

    pub fn quant(q: Quantifier, premise: Expr, along: Morphism, body: Expr) -> Self {
        Self::make(
            along.dom().clone(),
            Node::Quant {
                q,
                premise,
                along,
                body,
            },
        )
    }

    /// Unconditional `exists` (premise `top`).
    pub fn exists(along: Morphism, body: Expr) -> Self {
        let premise = Expr::top(along.dom().clone());
        Self::quant(Quantifier::Exists, premise, along, body)
    }

    /// Unconditional `forall` (premise `top`).
    pub fn forall(along: Morphism, body: Expr) -> Self {
        let premise = Expr::top(along.dom().clone());
        Self::quant(Quantifier::Forall, premise, along, body)
    }

    pub fn arity(&self) -> &Arc<CatObject> {
        &self.arity
    }

    pub fn node(&self) -> &Node {
        &self.node
    }

    /// Quantifier nesting depth plus connective nesting, leaves at depth 0.
    pub fn depth(&self) -> usize {
        match &*self.node {
            Node::Atomic { .. } | Node::Top | Node::Bot => 0,
            Node::And(l, r) | Node::Or(l, r) => 1 + l.depth().max(r.depth()),
            Node::Not(e) => 1 + e.depth(),
            Node::Quant { premise, body, .. } => 1 + premise.depth().max(body.depth()),
        }
    }

    /// Feature names in order of first occurrence.
    pub fn features(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_features(&mut out);
        out
    }

    fn collect_features<'a>(&'a self, out: &mut Vec<&'a str>) {
        match &*self.node {
            Node::Atomic { feature, .. } => {
                if !out.contains(&feature.as_str()) {
                    out.push(feature);
                }
            }
            Node::Top | Node::Bot => {}
            Node::And(l, r) | Node::Or(l, r) => {
                l.collect_features(out);
                r.collect_features(out);
            }
            Node::Not(e) => e.collect_features(out),
            Node::Quant { premise, body, .. } => {
                premise.collect_features(out);
                body.collect_features(out);
            }
        }
    }

    fn key(&self) -> usize {
        Arc::as_ptr(&self.node) as usize
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        if !self.arity.same_shape(&other.arity) {
            return false;
        }
        if Arc::ptr_eq(&self.node, &other.node) {
            return true;
        }
        match (&*self.node, &*other.node) {
            (
                Node::Atomic { feature: f, delta: d },
                Node::Atomic {
                    feature: g,
                    delta: e,
                },
            ) => f == g && d.dom().same_shape(e.dom()) && d.vmap() == e.vmap() && d.emap() == e.emap(),
            (Node::Top, Node::Top) | (Node::Bot, Node::Bot) => true,
            (Node::And(a, b), Node::And(c, d)) | (Node::Or(a, b), Node::Or(c, d)) => {
                a == c && b == d
            }
            (Node::Not(a), Node::Not(b)) => a == b,
            (
                Node::Quant {
                    q,
                    premise,
                    along,
                    body,
                },
                Node::Quant {
                    q: q2,
                    premise: p2,
                    along: t2,
                    body: b2,
                },
            ) => {
                q == q2
                    && along.cod().same_shape(t2.cod())
                    && along.vmap() == t2.vmap()
                    && along.emap() == t2.emap()
                    && premise == p2
                    && body == b2
            }
            _ => false,
        }
    }
}

impl Eq for Expr {}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.arity.hash_shape(state);
        std::mem::discriminant(&*self.node).hash(state);
        match &*self.node {
            Node::Atomic { feature, delta } => {
                feature.hash(state);
                delta.vmap().hash(state);
                delta.emap().hash(state);
            }
            Node::Top | Node::Bot => {}
            Node::And(l, r) | Node::Or(l, r) => {
                l.hash(state);
                r.hash(state);
            }
            Node::Not(e) => e.hash(state),
            Node::Quant {
                q,
                premise,
                along,
                body,
            } => {
                q.hash(state);
                along.vmap().hash(state);
                along.emap().hash(state);
                premise.hash(state);
                body.hash(state);
            }
        }
    }
}

/// Checks every formation rule recursively against the footprint.
pub fn wf_check(e: &Expr, footprint: &Footprint) -> Result<()> {
    let ill = |msg: String| Err(Error::IllFormed(msg));
    if e.arity.kind() != footprint.kind() {
        return ill(format!(
            "arity {} is not a {} object",
            e.arity,
            footprint.kind()
        ));
    }
    match &*e.node {
        Node::Top | Node::Bot => Ok(()),
        Node::Atomic { feature, delta } => {
            let Some(arity) = footprint.arity(feature) else {
                return ill(format!(
                    "`{feature}` is not a feature of `{}`",
                    footprint.name()
                ));
            };
            if delta.dom() != arity {
                return ill(format!(
                    "`{feature}` is applied along a map out of {} instead of its arity {arity}",
                    delta.dom()
                ));
            }
            if delta.cod() != &e.arity {
                return ill(format!(
                    "`{feature}` lands in {} but the expression has arity {}",
                    delta.cod(),
                    e.arity
                ));
            }
            Ok(())
        }
        Node::And(l, r) | Node::Or(l, r) => {
            for child in [l, r] {
                if child.arity != e.arity {
                    return ill(format!(
                        "operand arity {} differs from {}",
                        child.arity, e.arity
                    ));
                }
                wf_check(child, footprint)?;
            }
            Ok(())
        }
        Node::Not(inner) => {
            if inner.arity != e.arity {
                return ill(format!(
                    "negated arity {} differs from {}",
                    inner.arity, e.arity
                ));
            }
            wf_check(inner, footprint)
        }
        Node::Quant {
            premise,
            along,
            body,
            ..
        } => {
            if along.dom() != &e.arity || premise.arity != e.arity {
                return ill(format!(
                    "quantifier over {} does not start at {}",
                    along.dom(),
                    e.arity
                ));
            }
            if body.arity != *along.cod() {
                return ill(format!(
                    "quantified body has arity {} but the variable map ends in {}",
                    body.arity,
                    along.cod()
                ));
            }
            wf_check(premise, footprint)?;
            wf_check(body, footprint)
        }
    }
}

/// Solution-set evaluation over one structure. The memo lives for a single
/// query and is keyed by node identity, so an evaluator must not outlive the
/// expressions it was used with.
pub(crate) struct Evaluator<'s> {
    structure: &'s Structure,
    memo: HashMap<(usize, Vec<usize>), bool>,
    key: Vec<usize>,
}

impl<'s> Evaluator<'s> {
    pub(crate) fn new(structure: &'s Structure) -> Self {
        Evaluator {
            structure,
            memo: HashMap::new(),
            key: Vec::new(),
        }
    }

    /// Evaluates `e` at the interpretation with the given component images.
    pub(crate) fn eval(&mut self, e: &Expr, vimg: &[usize], eimg: &[usize]) -> bool {
        match &*e.node {
            Node::Top => true,
            Node::Bot => false,
            Node::Atomic { feature, delta } => {
                let p = self
                    .structure
                    .footprint()
                    .feature_index(feature)
                    .expect("well-formed expression");
                self.key.clear();
                self.key.extend(delta.vmap().iter().map(|&v| vimg[v]));
                self.key.extend(delta.emap().iter().map(|&x| eimg[x]));
                self.structure.contains_key(p, &self.key)
            }
            Node::And(l, r) => self.eval(l, vimg, eimg) && self.eval(r, vimg, eimg),
            Node::Or(l, r) => self.eval(l, vimg, eimg) || self.eval(r, vimg, eimg),
            Node::Not(inner) => !self.eval(inner, vimg, eimg),
            Node::Quant {
                q,
                premise,
                along,
                body,
            } => {
                let memo_key = (e.key(), [vimg, eimg].concat());
                if let Some(&v) = self.memo.get(&memo_key) {
                    return v;
                }
                let value = !self.eval(premise, vimg, eimg) || self.quantify(*q, along, body, vimg, eimg);
                self.memo.insert(memo_key, value);
                value
            }
        }
    }

    fn quantify(
        &mut self,
        q: Quantifier,
        along: &Morphism,
        body: &Expr,
        vimg: &[usize],
        eimg: &[usize],
    ) -> bool {
        let Some(pins) = Pins::along(along, vimg, eimg) else {
            return q == Quantifier::Forall;
        };
        let carrier = self.structure.carrier().clone();
        let flow = cat::search_homs(along.cod(), &carrier, Some(&pins), &mut |bv, be| {
            let v = self.eval(body, bv, be);
            match (q, v) {
                (Quantifier::Exists, true) | (Quantifier::Forall, false) => ControlFlow::Break(()),
                _ => ControlFlow::Continue(()),
            }
        });
        match q {
            Quantifier::Exists => flow.is_break(),
            Quantifier::Forall => flow.is_continue(),
        }
    }
}

fn check_against(e: &Expr, s: &Structure) -> Result<()> {
    wf_check(e, s.footprint())?;
    if s.carrier().kind() != e.arity.kind() {
        return Err(Error::KindMismatch {
            expected: e.arity.kind(),
            found: s.carrier().kind(),
        });
    }
    Ok(())
}

/// Whether the interpretation `a: X -> U` solves `e` in `s`.
pub fn holds(a: &Morphism, e: &Expr, s: &Structure) -> Result<bool> {
    check_against(e, s)?;
    if a.dom() != &e.arity || a.cod() != s.carrier() {
        return Err(Error::Boundary(format!(
            "interpretation {} -> {} does not go from the arity {} to the carrier of `{}`",
            a.dom(),
            a.cod(),
            e.arity,
            s.name()
        )));
    }
    Ok(Evaluator::new(s).eval(e, a.vmap(), a.emap()))
}

/// All solutions of `e` in `s`, in canonical hom-set order.
pub fn solutions(e: &Expr, s: &Structure) -> Result<Vec<Morphism>> {
    check_against(e, s)?;
    let mut ev = Evaluator::new(s);
    let mut out = Vec::new();
    let carrier = s.carrier();
    let _ = cat::search_homs(&e.arity, carrier, None, &mut |v, x| {
        if ev.eval(e, v, x) {
            out.push(Morphism::from_raw(
                e.arity.clone(),
                carrier.clone(),
                v.to_vec(),
                x.to_vec(),
            ));
        }
        ControlFlow::Continue(())
    });
    Ok(out)
}

/// Rewrites `e` along `t: X -> Z` into an expression over `Z`. Quantifiers
/// are pushed through the chosen pushout of their variable map and `t`.
pub fn substitute(e: &Expr, t: &Morphism) -> Result<Expr> {
    if t.dom() != &e.arity {
        return Err(Error::Boundary(format!(
            "substitution out of {} applied to an expression over {}",
            t.dom(),
            e.arity
        )));
    }
    Ok(match &*e.node {
        Node::Top => Expr::top(t.cod().clone()),
        Node::Bot => Expr::bot(t.cod().clone()),
        Node::Atomic { feature, delta } => Expr::atomic(feature.clone(), delta.then(t)?),
        Node::And(l, r) => Expr::and(substitute(l, t)?, substitute(r, t)?),
        Node::Or(l, r) => Expr::or(substitute(l, t)?, substitute(r, t)?),
        Node::Not(inner) => Expr::negate(substitute(inner, t)?),
        Node::Quant {
            q,
            premise,
            along,
            body,
        } => {
            let po = cat::pushout(along, t)?;
            Expr::quant(
                *q,
                substitute(premise, t)?,
                po.inj_right,
                substitute(body, &po.inj_left)?,
            )
        }
    })
}

/// No negation and no universal quantifier.
pub fn is_constructive(e: &Expr) -> bool {
    match &*e.node {
        Node::Atomic { .. } | Node::Top | Node::Bot => true,
        Node::And(l, r) | Node::Or(l, r) => is_constructive(l) && is_constructive(r),
        Node::Not(_) => false,
        Node::Quant {
            q,
            premise,
            body,
            ..
        } => *q == Quantifier::Exists && is_constructive(premise) && is_constructive(body),
    }
}

/// Constructive, and every existential is unconditional (premise `top`).
pub fn is_strictly_constructive(e: &Expr) -> bool {
    match &*e.node {
        Node::Atomic { .. } | Node::Top | Node::Bot => true,
        Node::And(l, r) | Node::Or(l, r) => {
            is_strictly_constructive(l) && is_strictly_constructive(r)
        }
        Node::Not(_) => false,
        Node::Quant {
            q,
            premise,
            body,
            ..
        } => {
            *q == Quantifier::Exists
                && matches!(&*premise.node, Node::Top)
                && is_strictly_constructive(body)
        }
    }
}

const PREC_OR: u8 = 0;
const PREC_AND: u8 = 1;
const PREC_UNARY: u8 = 2;

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr, prec: u8, tail: bool) -> fmt::Result {
    let own = match &*e.node {
        Node::Or(..) => PREC_OR,
        Node::And(..) => PREC_AND,
        _ => PREC_UNARY,
    };
    let quant = matches!(&*e.node, Node::Quant { .. });
    if own < prec || (quant && !tail) {
        f.write_str("(")?;
        write_expr(f, e, PREC_OR, true)?;
        return f.write_str(")");
    }
    match &*e.node {
        Node::Top => f.write_str("top"),
        Node::Bot => f.write_str("bot"),
        Node::Atomic { feature, delta } => write!(f, "{feature} {delta}"),
        Node::Or(l, r) => {
            write_expr(f, l, PREC_OR, false)?;
            f.write_str(" or ")?;
            write_expr(f, r, PREC_AND, tail)
        }
        Node::And(l, r) => {
            write_expr(f, l, PREC_AND, false)?;
            f.write_str(" and ")?;
            write_expr(f, r, PREC_UNARY, tail)
        }
        Node::Not(inner) => {
            f.write_str("not ")?;
            write_expr(f, inner, PREC_UNARY, tail)
        }
        Node::Quant {
            q,
            premise,
            along,
            body,
        } => {
            if !matches!(&*premise.node, Node::Top) {
                f.write_str("given ")?;
                write_expr(f, premise, PREC_UNARY, false)?;
                f.write_str(" ")?;
            }
            write!(f, "{q} ")?;
            if !along.is_name_inclusion() {
                write!(f, "{along} ")?;
            }
            write!(f, "into {} . ", along.cod())?;
            write_expr(f, body, PREC_OR, true)
        }
    }
}

/// Prints the expression in the `.lfoc` expression syntax.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self, PREC_OR, true)
    }
}
