#![allow(dead_code)]

use std::path::Path;
use std::sync::Arc;

use lfoc::cat::{self, CatObject, Kind, Morphism};
use lfoc::expr::{Expr, Quantifier};
use lfoc::footprint::{Footprint, Structure};
use lfoc::surface::{parse_file, Document};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Rng8 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng8 {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn fixture(name: &str) -> Document {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name);
    parse_file(&path).unwrap_or_else(|e| panic!("{e}"))
}

pub fn set(names: &[&str]) -> Arc<CatObject> {
    Arc::new(CatObject::set(names.iter().copied()).unwrap())
}

pub fn graph(vertices: &[&str], edges: &[(&str, &str, &str)]) -> Arc<CatObject> {
    Arc::new(CatObject::graph(vertices.iter().copied(), edges).unwrap())
}

/// `A : {p}`, `R : {p1, p2}`.
pub fn unary_binary() -> Arc<Footprint> {
    Arc::new(
        Footprint::new(
            "AR",
            Kind::Set,
            vec![("A".into(), set(&["p"])), ("R".into(), set(&["p1", "p2"]))],
        )
        .unwrap(),
    )
}

/// `arrow : s -x-> t`, `point : {p}`, `loop : p -l-> p`.
pub fn graph_footprint() -> Arc<Footprint> {
    Arc::new(
        Footprint::new(
            "G",
            Kind::Graph,
            vec![
                ("arrow".into(), graph(&["s", "t"], &[("x", "s", "t")])),
                ("point".into(), graph(&["p"], &[])),
                ("loop".into(), graph(&["p"], &[("l", "p", "p")])),
            ],
        )
        .unwrap(),
    )
}

/// An object with fresh names drawn from `prefix`, within the bounds.
pub fn random_object(rng: &mut Rng8, kind: Kind, max_v: usize, max_e: usize, prefix: &str) -> Arc<CatObject> {
    let nv = rng.gen_range(0..=max_v);
    let vs: Vec<String> = (0..nv).map(|i| format!("{prefix}{i}")).collect();
    if kind == Kind::Set {
        return Arc::new(CatObject::set(vs).unwrap());
    }
    let ne = if nv == 0 { 0 } else { rng.gen_range(0..=max_e) };
    let names: Vec<String> = (0..ne).map(|i| format!("{prefix}e{i}")).collect();
    let ends: Vec<(String, String)> = (0..ne)
        .map(|_| (vs.choose(rng).unwrap().clone(), vs.choose(rng).unwrap().clone()))
        .collect();
    let edges: Vec<(&str, &str, &str)> = names
        .iter()
        .zip(&ends)
        .map(|(n, (s, t))| (n.as_str(), s.as_str(), t.as_str()))
        .collect();
    Arc::new(CatObject::graph(vs.iter().map(String::as_str), &edges).unwrap())
}

pub fn random_hom(rng: &mut Rng8, dom: &Arc<CatObject>, cod: &Arc<CatObject>) -> Option<Morphism> {
    cat::hom_set(dom, cod).unwrap().choose(rng).cloned()
}

/// `x` extended by at most one vertex and at most one edge, with the inclusion.
pub fn random_extension(rng: &mut Rng8, x: &Arc<CatObject>, tag: &str) -> Morphism {
    let mut vs: Vec<String> = x.vertices().to_vec();
    let mut es: Vec<(String, String, String)> = x
        .edges()
        .iter()
        .map(|e| (e.name.clone(), vs[e.source].clone(), vs[e.target].clone()))
        .collect();
    if vs.is_empty() || rng.gen_bool(0.6) {
        vs.push(format!("{tag}v"));
    }
    if x.kind() == Kind::Graph && rng.gen_bool(0.5) {
        let s = vs.choose(rng).unwrap().clone();
        let t = vs.choose(rng).unwrap().clone();
        es.push((format!("{tag}e"), s, t));
    }
    let y = if x.kind() == Kind::Set {
        CatObject::set(vs).unwrap()
    } else {
        let edges: Vec<(&str, &str, &str)> =
            es.iter().map(|(n, s, t)| (n.as_str(), s.as_str(), t.as_str())).collect();
        CatObject::graph(vs.iter().map(String::as_str), &edges).unwrap()
    };
    Morphism::inclusion(x.clone(), Arc::new(y)).unwrap()
}

#[derive(Clone, Copy, Debug)]
pub struct ExprShape {
    pub depth: usize,
    pub negation: bool,
    pub forall: bool,
    pub premises: bool,
}

fn random_atom(rng: &mut Rng8, fp: &Footprint, x: &Arc<CatObject>) -> Expr {
    let (feature, arity) = fp.features().choose(rng).unwrap();
    match random_hom(rng, arity, x) {
        Some(delta) => Expr::atomic(feature.clone(), delta),
        None => {
            if rng.gen_bool(0.5) {
                Expr::top(x.clone())
            } else {
                Expr::bot(x.clone())
            }
        }
    }
}

/// A random well-formed expression over `x` whose quantifier depth is at most
/// `shape.depth`.
pub fn random_expr(rng: &mut Rng8, fp: &Footprint, x: &Arc<CatObject>, shape: ExprShape, tag: &mut usize) -> Expr {
    let roll = rng.gen_range(0..10);
    match roll {
        0..=3 => random_atom(rng, fp, x),
        4 | 5 => {
            let sub = ExprShape { depth: shape.depth, ..shape };
            let l = random_expr(rng, fp, x, sub, tag);
            let r = random_expr(rng, fp, x, sub, tag);
            if rng.gen_bool(0.5) {
                Expr::and(l, r)
            } else {
                Expr::or(l, r)
            }
        }
        6 if shape.negation => Expr::negate(random_expr(rng, fp, x, shape, tag)),
        _ if shape.depth > 0 => {
            *tag += 1;
            let along = if rng.gen_bool(0.8) {
                random_extension(rng, x, &format!("q{tag}"))
            } else {
                let y = random_object(rng, x.kind(), 3, 3, &format!("q{tag}_"));
                random_hom(rng, x, &y).unwrap_or_else(|| random_extension(rng, x, &format!("q{tag}")))
            };
            let inner = ExprShape {
                depth: shape.depth - 1,
                ..shape
            };
            let body = random_expr(rng, fp, along.cod(), inner, tag);
            let premise = if shape.premises && rng.gen_bool(0.4) {
                random_expr(rng, fp, x, ExprShape { depth: 0, ..inner }, tag)
            } else {
                Expr::top(x.clone())
            };
            let q = if shape.forall && rng.gen_bool(0.5) {
                Quantifier::Forall
            } else {
                Quantifier::Exists
            };
            Expr::quant(q, premise, along, body)
        }
        _ => random_atom(rng, fp, x),
    }
}

/// A structure on `carrier` holding each possible fact with probability `p`.
pub fn random_structure(rng: &mut Rng8, fp: &Arc<Footprint>, carrier: &Arc<CatObject>, p: f64, name: &str) -> Structure {
    let interp = fp
        .features()
        .iter()
        .map(|(f, arity)| {
            let facts = cat::hom_set(arity, carrier)
                .unwrap()
                .into_iter()
                .filter(|_| rng.gen_bool(p))
                .collect();
            (f.clone(), facts)
        })
        .collect();
    Structure::new(name, fp.clone(), carrier.clone(), interp).unwrap()
}
