//! Acceptance gate: runs every criterion at its stated bound, prints one line
//! per criterion, and exits nonzero if any fails.

mod common;

use std::collections::{HashMap, HashSet};
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::*;
use lfoc::cat::{self, CatObject, Kind, Morphism};
use lfoc::expr::{self, Expr};
use lfoc::footprint::{self, Bounds, Footprint, Registry, Structure};
use lfoc::rules::{self, SketchRule};
use lfoc::sketch::{self, Constraint, Interpretation, Sketch};
use lfoc::surface::{self, Document};
use rand::seq::SliceRandom;
use rand::Rng;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let spent = start.elapsed();
    ensure(spent < limit, || format!("took {:.1}s, limit {}s", spent.as_secs_f64(), limit.as_secs()))
}

fn fixture_dir() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

// C1 ----------------------------------------------------------------------

fn satisfaction_condition() -> Check {
    let start = Instant::now();
    let fp = graph_footprint();
    let mut r = rng(0x5a7);
    let shape = ExprShape {
        depth: 2,
        negation: true,
        forall: true,
        premises: true,
    };
    let (mut triples, mut max_depth) = (0, 0);
    while triples < 1000 {
        let k1 = random_object(&mut r, Kind::Graph, 2, 2, "k");
        let k2 = random_object(&mut r, Kind::Graph, 3, 3, "l");
        let Some(phi) = random_hom(&mut r, &k1, &k2) else { continue };
        let x = random_object(&mut r, Kind::Graph, 2, 2, "x");
        let Some(binding) = random_hom(&mut r, &x, &k1) else { continue };
        let e = random_expr(&mut r, &fp, &x, shape, &mut 0);
        let carrier = random_object(&mut r, Kind::Graph, 3, 3, "u");
        let u = random_structure(&mut r, &fp, &carrier, 0.5, "U");
        let Some(a) = random_hom(&mut r, &k2, u.carrier()) else { continue };
        max_depth = max_depth.max(quantifier_depth(&e));
        let c = Constraint::new(e, binding).map_err(|e| e.to_string())?;
        let i = Interpretation::new(a, &u).map_err(|e| e.to_string())?;
        let ok = sketch::check_satisfaction_condition(&phi, &c, &i).map_err(|e| e.to_string())?;
        ensure(ok, || format!("triple {triples}: {phi} / {c} / {}", i.map))?;
        triples += 1;
    }
    ensure(max_depth <= 2, || format!("generated quantifier depth {max_depth}"))?;
    within(start, Duration::from_secs(60))?;
    Ok(format!(
        "{triples} triples agree, max quantifier depth {max_depth}, {:.1}s",
        start.elapsed().as_secs_f64()
    ))
}

fn quantifier_depth(e: &Expr) -> usize {
    use lfoc::expr::Node;
    match e.node() {
        Node::Top | Node::Bot | Node::Atomic { .. } => 0,
        Node::And(l, r) | Node::Or(l, r) => quantifier_depth(l).max(quantifier_depth(r)),
        Node::Not(x) => quantifier_depth(x),
        Node::Quant { premise, body, .. } => quantifier_depth(premise).max(1 + quantifier_depth(body)),
    }
}

// C2 ----------------------------------------------------------------------

/// Index of a map into `q` given by its vertex and edge images.
fn code(vimg: impl Iterator<Item = usize>, eimg: impl Iterator<Item = usize>, q: &CatObject) -> u64 {
    let (bv, be) = (q.vertex_count().max(1) as u64, q.edge_count().max(1) as u64);
    let mut c = 0u64;
    for v in vimg {
        c = c * bv + v as u64;
    }
    for e in eimg {
        c = c * be + e as u64;
    }
    c
}

const MAX_PARTS: usize = 16;

/// A small target object with its edges grouped by endpoints.
struct TestObject {
    q: Arc<CatObject>,
    between: Vec<Vec<usize>>,
}

impl TestObject {
    fn new(q: Arc<CatObject>) -> Self {
        let n = q.vertex_count();
        let mut between = vec![Vec::new(); n * n];
        for (j, e) in q.edges().iter().enumerate() {
            between[e.source * n + e.target].push(j);
        }
        TestObject { q, between }
    }

    /// Every map `p -> q` as a pair of index arrays, by brute force over
    /// vertex assignments and then edges with matching endpoints.
    fn maps_from(&self, p: &CatObject, mut visit: impl FnMut(&[usize], &[usize])) {
        let (nv, ne, qv) = (p.vertex_count(), p.edge_count(), self.q.vertex_count());
        assert!(nv <= MAX_PARTS && ne <= MAX_PARTS);
        if nv > 0 && qv == 0 {
            return;
        }
        let mut v = [0usize; MAX_PARTS];
        loop {
            let mut options: [&[usize]; MAX_PARTS] = [&[]; MAX_PARTS];
            for (o, e) in options.iter_mut().zip(p.edges()) {
                *o = &self.between[v[e.source] * qv + v[e.target]];
            }
            if options[..ne].iter().all(|o| !o.is_empty()) {
                let mut pick = [0usize; MAX_PARTS];
                let mut e = [0usize; MAX_PARTS];
                loop {
                    for i in 0..ne {
                        e[i] = options[i][pick[i]];
                    }
                    visit(&v[..nv], &e[..ne]);
                    if !advance(&mut pick[..ne], |i| options[i].len()) {
                        break;
                    }
                }
            }
            if !advance(&mut v[..nv], |_| qv) {
                return;
            }
        }
    }

    /// For `f: A -> B`, how many cocone legs `h: B -> Q` restrict to each map `A -> Q`.
    fn histogram(&self, f: &Morphism) -> Vec<(u64, u64)> {
        let mut codes = Vec::new();
        self.maps_from(f.cod(), |hv, he| codes.push(composite_code(f, hv, he, &self.q)));
        codes.sort_unstable();
        let mut out: Vec<(u64, u64)> = Vec::new();
        for c in codes {
            match out.last_mut() {
                Some((last, n)) if *last == c => *n += 1,
                _ => out.push((c, 1)),
            }
        }
        out
    }
}

/// Odometer step; false once every digit has wrapped.
fn advance(digits: &mut [usize], base: impl Fn(usize) -> usize) -> bool {
    for i in 0..digits.len() {
        digits[i] += 1;
        if digits[i] < base(i) {
            return true;
        }
        digits[i] = 0;
    }
    false
}

fn composite_code(f: &Morphism, hv: &[usize], he: &[usize], q: &CatObject) -> u64 {
    code(f.vmap().iter().map(|&v| hv[v]), f.emap().iter().map(|&e| he[e]), q)
}

/// Number of pairs agreeing on the shared code, from two sorted histograms.
fn matching_pairs(a: &[(u64, u64)], b: &[(u64, u64)]) -> u64 {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Counts mediators for every cocone out of the span into each test object.
/// Fails unless each cocone has exactly one.
fn universal_against(
    f: &Morphism,
    g: &Morphism,
    hf: &[Vec<(u64, u64)>],
    hg: &[Vec<(u64, u64)>],
    tests: &[TestObject],
    legs: &mut Vec<(u64, u64)>,
) -> Result<(), String> {
    let po = cat::pushout(f, g).map_err(|e| e.to_string())?;
    if f.then(&po.inj_left).unwrap() != g.then(&po.inj_right).unwrap() {
        return Err(format!("square does not commute for {f} and {g}"));
    }
    for (t, test) in tests.iter().enumerate() {
        let cocones = matching_pairs(&hf[t], &hg[t]);
        legs.clear();
        test.maps_from(&po.apex, |uv, ue| {
            legs.push((
                composite_code(&po.inj_left, uv, ue, &test.q),
                composite_code(&po.inj_right, uv, ue, &test.q),
            ));
        });
        let mediators = legs.len();
        legs.sort_unstable();
        legs.dedup();
        if legs.len() != mediators {
            return Err(format!("span {f}, {g}: two mediators into {} share a cocone", test.q));
        }
        if mediators as u64 != cocones {
            return Err(format!("span {f}, {g}: {mediators} mediators for {cocones} cocones into {}", test.q));
        }
    }
    Ok(())
}

fn all_spans(objects: &[Arc<CatObject>], tests: &[TestObject]) -> Result<usize, String> {
    let mut spans = 0;
    let mut scratch = Vec::new();
    for a in objects {
        // Every leg out of `a`, with its histograms per test object.
        let mut legs: Vec<(Morphism, Vec<Vec<(u64, u64)>>)> = Vec::new();
        for b in objects {
            for f in cat::hom_set(a, b).unwrap() {
                let h = tests.iter().map(|t| t.histogram(&f)).collect();
                legs.push((f, h));
            }
        }
        for (f, hf) in &legs {
            for (g, hg) in &legs {
                universal_against(f, g, hf, hg, tests, &mut scratch)?;
                spans += 1;
            }
        }
    }
    Ok(spans)
}

fn iso_representatives(objects: Vec<Arc<CatObject>>) -> Vec<Arc<CatObject>> {
    let mut reps: Vec<Arc<CatObject>> = Vec::new();
    for o in objects {
        if !reps.iter().any(|r| cat::find_isomorphism(r, &o).is_some()) {
            reps.push(o);
        }
    }
    reps
}

fn pushout_universal_property() -> Check {
    let start = Instant::now();
    // Sets: maps into a two-element set separate subsets, so they detect any
    // failure of existence or uniqueness.
    let sets = footprint::carriers(Bounds::Set { max_elements: 4 });
    let set_tests = vec![TestObject::new(set(&["0", "1"]))];
    let set_spans = all_spans(&sets, &set_tests)?;
    let set_secs = start.elapsed().as_secs_f64();

    // Graphs: the two-vertex graph with one edge per ordered pair sees vertex
    // sets, the one-vertex graph with two loops sees edge sets.
    let graphs = iso_representatives(footprint::carriers(Bounds::Graph {
        max_vertices: 3,
        max_edges: 3,
    }));
    let seer_v = graph(
        &["0", "1"],
        &[("00", "0", "0"), ("01", "0", "1"), ("10", "1", "0"), ("11", "1", "1")],
    );
    let seer_e = graph(&["0"], &[("a", "0", "0"), ("b", "0", "0")]);
    let graph_tests = vec![TestObject::new(seer_v), TestObject::new(seer_e)];
    let graph_spans = all_spans(&graphs, &graph_tests)?;
    within(start, Duration::from_secs(60))?;
    Ok(format!(
        "{set_spans} set spans ({set_secs:.1}s), {graph_spans} graph spans over {} graph classes, {:.1}s",
        graphs.len(),
        start.elapsed().as_secs_f64()
    ))
}

// C3 ----------------------------------------------------------------------

fn random_sketch(r: &mut Rng8, fp: &Footprint, k: &Arc<CatObject>, name: &str) -> Sketch {
    let shape = ExprShape {
        depth: 1,
        negation: true,
        forall: true,
        premises: true,
    };
    let mut cs = Vec::new();
    for _ in 0..r.gen_range(1..=3) {
        let x = random_object(r, fp.kind(), 2, 1, "x");
        if let Some(b) = random_hom(r, &x, k) {
            cs.push(Constraint::new(random_expr(r, fp, &x, shape, &mut 0), b).unwrap());
        }
    }
    Sketch::new(name, k.clone(), cs).unwrap()
}

fn amalgamation() -> Check {
    let set_reg = Registry::bounded(&unary_binary(), Bounds::Set { max_elements: 3 }, true).unwrap();
    let graph_reg = Registry::bounded(
        &graph_footprint(),
        Bounds::Graph {
            max_vertices: 2,
            max_edges: 2,
        },
        true,
    )
    .unwrap();
    let mut r = rng(0xa3a1);
    let (mut instances, mut checked_models) = (0, 0usize);
    while instances < 60 {
        let reg = if instances % 2 == 0 { &set_reg } else { &graph_reg };
        let fp = reg.footprint();
        let kind = fp.kind();
        let c = random_object(&mut r, kind, 2, 1, "c");
        let k1 = random_object(&mut r, kind, 3, 2, "k");
        let k2 = random_object(&mut r, kind, 3, 2, "l");
        let (Some(f), Some(g)) = (random_hom(&mut r, &c, &k1), random_hom(&mut r, &c, &k2)) else {
            continue;
        };
        let s1 = random_sketch(&mut r, fp, &k1, "L");
        let s2 = random_sketch(&mut r, fp, &k2, "R");
        let po = sketch::sketch_pushout(&f, &g, &s1, &s2).map_err(|e| e.to_string())?;
        for u in reg.structures() {
            let m = sketch::models(&po.sketch, u).unwrap();
            let mut from_apex: Vec<(Morphism, Morphism)> = m
                .iter()
                .map(|i| (po.inj_left.then(&i.map).unwrap(), po.inj_right.then(&i.map).unwrap()))
                .collect();
            from_apex.sort();
            from_apex.dedup();
            ensure(from_apex.len() == m.len(), || {
                format!("instance {instances}: two models of the pushout restrict alike in {}", u.name())
            })?;
            let m1 = sketch::models(&s1, u).unwrap();
            let m2 = sketch::models(&s2, u).unwrap();
            let mut compatible = Vec::new();
            for a in &m1 {
                for b in &m2 {
                    if f.then(&a.map).unwrap() == g.then(&b.map).unwrap() {
                        compatible.push((a.map.clone(), b.map.clone()));
                    }
                }
            }
            compatible.sort();
            ensure(compatible == from_apex, || {
                format!(
                    "instance {instances}: {} pushout models vs {} compatible pairs in {}",
                    from_apex.len(),
                    compatible.len(),
                    u.name()
                )
            })?;
            checked_models += m.len();
        }
        instances += 1;
    }
    Ok(format!(
        "{instances} instances over {} and {} structures, {checked_models} amalgamated models",
        set_reg.len(),
        graph_reg.len()
    ))
}

// C4 ----------------------------------------------------------------------

fn equivalence_matrix() -> Check {
    let mut pairs = 0;
    let mut both = [0usize; 2];
    let mut seen_rules = HashSet::new();
    for file in ["fol.lfoc", "alc.lfoc", "cat.lfoc", "ua.lfoc"] {
        let doc = surface::parse_file(&fixture_dir().join(file)).map_err(|e| e.to_string())?;
        for (rname, (rfp, rule)) in &doc.env.rules {
            let mut structures: Vec<Structure> = doc
                .env
                .structures
                .values()
                .filter(|(sfp, _)| sfp == rfp)
                .map(|(_, s)| (**s).clone())
                .collect();
            for (gname, (gfp, def)) in &doc.env.registries {
                if gfp == rfp && matches!(def, surface::RegistryDef::Bounded { .. }) {
                    let reg = doc.registry(gname).unwrap().map_err(|e| e.to_string())?;
                    structures.extend(reg.structures().iter().filter(|s| s.carrier().name_count() <= 3).cloned());
                }
            }
            for u in &structures {
                let eq = rules::check_equivalence(u, rule).map_err(|e| e.to_string())?;
                ensure(eq.agree(), || {
                    format!(
                        "{file}: `{rname}` on `{}`: conservative {} but closed {}",
                        u.name(),
                        eq.conservative.holds,
                        eq.closed
                    )
                })?;
                both[eq.closed as usize] += 1;
                pairs += 1;
                seen_rules.insert(format!("{file}:{rname}"));
            }
        }
    }
    ensure(pairs >= 20, || format!("only {pairs} pairs"))?;
    for needed in ["cat.lfoc:id_exists", "cat.lfoc:id_unique"] {
        ensure(seen_rules.contains(needed), || format!("{needed} not exercised"))?;
    }
    Ok(format!(
        "{pairs} pairs agree ({} conservative, {} not)",
        both[1], both[0]
    ))
}

// C5 ----------------------------------------------------------------------

fn universal_rules_sound() -> Check {
    let fp = unary_binary();
    let reg = Registry::bounded(&fp, Bounds::Set { max_elements: 2 }, false).unwrap();
    ensure(reg.len() == 69, || format!("registry has {} structures", reg.len()))?;
    let text = "base set;
        footprint AR { A : obj { p }; R : obj { p1 p2 }; }
        object X = obj { p };
        expr a over AR : X = A;
        expr not_a over AR : X = not A;
        expr succ over AR : X = exists into obj { p y } . R [p1->p; p2->y];
        expr all_a over AR : X = forall into obj { p y } . given R [p1->p; p2->y] forall into obj { p y } . A [p->y];
        expr top over AR : X = top;
        expr mp_edge over AR : X = given A exists into obj { p y } . R [p1->p; p2->y] and A [p->y];
        expr mp_plain over AR : X = exists into obj { p y } . R [p1->p; p2->y];
        expr mp_neg over AR : X = given not A exists into obj { p y } . R [p1->y; p2->p] and not A [p->y];
        expr mp_glue over AR : obj { p1 p2 } = given R exists [p1->q; p2->q] into obj { q } . A [p->q];
        expr mp_loop over AR : obj { p1 p2 } = given R exists [p1->q; p2->q] into obj { q } . top;";
    let doc = surface::parse(text, None).map_err(|e| e.to_string())?;
    let unary: Vec<&Expr> = ["a", "not_a", "succ", "all_a", "top"].iter().map(|n| doc.expr(n).unwrap()).collect();
    let mut checked: Vec<SketchRule> = Vec::new();
    for e in &unary {
        for f in &unary {
            checked.push(rules::fold(e, f).unwrap());
            checked.push(rules::unfold(e, f).unwrap());
        }
    }
    for cond in ["mp_edge", "mp_plain", "mp_neg", "mp_glue", "mp_loop"] {
        checked.push(rules::modus_ponens(doc.expr(cond).unwrap()).map_err(|e| e.to_string())?);
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for rule in &checked {
        let v = rules::is_sound(rule, &reg).map_err(|e| e.to_string())?;
        ensure(v.holds, || format!("`{}` fails: {:?}", rule.name(), v.witness))?;
        *counts.entry(rule.name()).or_insert(0) += 1;
    }
    Ok(format!(
        "{} fold, {} unfold, {} modus ponens rules sound over {} structures",
        counts["fold"],
        counts["unfold"],
        counts["modus_ponens"],
        reg.len()
    ))
}

// C6 ----------------------------------------------------------------------

fn sibling_oracle() -> Check {
    let doc = surface::parse_file(&fixture_dir().join("fol.lfoc")).map_err(|e| e.to_string())?;
    let fam = doc.structure("Fam").unwrap();
    let people = fam.carrier().vertices();
    ensure(people.len() == 4, || "family is not four people".into())?;
    let parent: HashSet<(usize, usize, usize)> = fam
        .interpretations_of("parent")
        .unwrap()
        .iter()
        .map(|m| (m.vmap()[0], m.vmap()[1], m.vmap()[2]))
        .collect();
    let mut oracle: Vec<usize> = Vec::new();
    let mut assignments = 0;
    for p in 0..4 {
        for x1 in 0..4 {
            for x2 in 0..4 {
                for x3 in 0..4 {
                    assignments += 1;
                    if parent.contains(&(p, x2, x3)) && parent.contains(&(x1, x2, x3)) && !oracle.contains(&p) {
                        oracle.push(p);
                    }
                }
            }
        }
    }
    oracle.sort_unstable();
    let sibling = doc.expr("sibling").unwrap();
    let engine: Vec<usize> = expr::solutions(sibling, fam).unwrap().iter().map(|a| a.vmap()[0]).collect();
    ensure(engine == oracle, || format!("engine {engine:?}, oracle {oracle:?}"))?;
    let names: Vec<&str> = engine.iter().map(|&i| people[i].as_str()).collect();
    Ok(format!("{assignments} assignments, solutions {names:?}"))
}

// C7 ----------------------------------------------------------------------

#[derive(Clone, Debug)]
enum Concept {
    A,
    B,
    Not(Box<Concept>),
    And(Box<Concept>, Box<Concept>),
    Or(Box<Concept>, Box<Concept>),
    All(Box<Concept>),
    Some(Box<Concept>),
}

struct AlcWorld {
    size: usize,
    a: HashSet<usize>,
    b: HashSet<usize>,
    r: HashSet<(usize, usize)>,
}

impl AlcWorld {
    fn ext(&self, c: &Concept) -> HashSet<usize> {
        let dom = 0..self.size;
        match c {
            Concept::A => self.a.clone(),
            Concept::B => self.b.clone(),
            Concept::Not(x) => {
                let inner = self.ext(x);
                dom.filter(|d| !inner.contains(d)).collect()
            }
            Concept::And(x, y) => self.ext(x).intersection(&self.ext(y)).copied().collect(),
            Concept::Or(x, y) => self.ext(x).union(&self.ext(y)).copied().collect(),
            Concept::All(x) => {
                let inner = self.ext(x);
                dom.filter(|d| (0..self.size).all(|e| !self.r.contains(&(*d, e)) || inner.contains(&e)))
                    .collect()
            }
            Concept::Some(x) => {
                let inner = self.ext(x);
                dom.filter(|d| (0..self.size).any(|e| self.r.contains(&(*d, e)) && inner.contains(&e)))
                    .collect()
            }
        }
    }
}

fn random_concept(r: &mut Rng8, depth: usize) -> Concept {
    let leaf = depth == 0 || r.gen_bool(0.3);
    if leaf {
        return if r.gen_bool(0.5) { Concept::A } else { Concept::B };
    }
    let sub = |r: &mut Rng8| Box::new(random_concept(r, depth - 1));
    match r.gen_range(0..5) {
        0 => Concept::Not(sub(r)),
        1 => Concept::And(sub(r), sub(r)),
        2 => Concept::Or(sub(r), sub(r)),
        3 => Concept::All(sub(r)),
        _ => Concept::Some(sub(r)),
    }
}

/// The concept as an expression over `{p1}`, quantifying over `{p1, x}` and
/// substituting the concept's variable by the fresh `x`.
fn translate(c: &Concept, fp: &Footprint, fresh: &mut usize) -> Expr {
    let x1 = set(&["p1"]);
    let feature = |f: &str| Expr::atomic(f, Morphism::from_pairs(fp.arity(f).unwrap().clone(), x1.clone(), &[("p", "p1")]).unwrap());
    match c {
        Concept::A => feature("A"),
        Concept::B => feature("B"),
        Concept::Not(x) => Expr::negate(translate(x, fp, fresh)),
        Concept::And(x, y) => Expr::and(translate(x, fp, fresh), translate(y, fp, fresh)),
        Concept::Or(x, y) => Expr::or(translate(x, fp, fresh), translate(y, fp, fresh)),
        Concept::All(inner) | Concept::Some(inner) => {
            *fresh += 1;
            let x = format!("x{fresh}");
            let y = set(&["p1", &x]);
            let body = translate(inner, fp, fresh);
            let sigma = Morphism::from_pairs(x1.clone(), y.clone(), &[("p1", x.as_str())]).unwrap();
            let moved = expr::substitute(&body, &sigma).unwrap();
            let role = Expr::atomic(
                "R",
                Morphism::from_pairs(fp.arity("R").unwrap().clone(), y.clone(), &[("p1", "p1"), ("p2", x.as_str())]).unwrap(),
            );
            let along = Morphism::inclusion(x1.clone(), y.clone()).unwrap();
            match c {
                Concept::All(_) => Expr::forall(
                    along,
                    Expr::quant(lfoc::expr::Quantifier::Forall, role, cat::identity(&y), moved),
                ),
                _ => Expr::exists(along, Expr::and(role, moved)),
            }
        }
    }
}

fn alc_agreement() -> Check {
    let doc = surface::parse_file(&fixture_dir().join("alc.lfoc")).map_err(|e| e.to_string())?;
    let fp = doc.footprint("ALC").unwrap().clone();
    let abox = doc.sketch("ABox").unwrap();
    let fixture_concepts = [
        ("all_r_a", Concept::All(Box::new(Concept::A))),
        ("some_r_b", Concept::Some(Box::new(Concept::B))),
        (
            "a_only_b",
            Concept::And(
                Box::new(Concept::A),
                Box::new(Concept::Not(Box::new(Concept::Some(Box::new(Concept::Not(Box::new(Concept::B))))))),
            ),
        ),
    ];
    let mut r = rng(0xa1c);
    let (mut worlds, mut concepts, mut abox_checks) = (0, 0, 0);
    for round in 0..200 {
        let size = r.gen_range(1..=4);
        let names: Vec<String> = (0..size).map(|i| format!("d{i}")).collect();
        let carrier = Arc::new(CatObject::set(names).unwrap());
        let world = AlcWorld {
            size,
            a: (0..size).filter(|_| r.gen_bool(0.5)).collect(),
            b: (0..size).filter(|_| r.gen_bool(0.5)).collect(),
            r: (0..size)
                .flat_map(|d| (0..size).map(move |e| (d, e)))
                .filter(|_| r.gen_bool(0.4))
                .collect(),
        };
        let unary = |s: &HashSet<usize>| -> Vec<Morphism> {
            let mut v: Vec<usize> = s.iter().copied().collect();
            v.sort_unstable();
            v.into_iter()
                .map(|d| Morphism::new(fp.arity("A").unwrap().clone(), carrier.clone(), vec![d], vec![]).unwrap())
                .collect()
        };
        let mut pairs: Vec<&(usize, usize)> = world.r.iter().collect();
        pairs.sort_unstable();
        let role: Vec<Morphism> = pairs
            .into_iter()
            .map(|&(d, e)| Morphism::new(fp.arity("R").unwrap().clone(), carrier.clone(), vec![d, e], vec![]).unwrap())
            .collect();
        let u = Structure::new(
            format!("W{round}"),
            fp.clone(),
            carrier.clone(),
            vec![("A".into(), unary(&world.a)), ("B".into(), unary(&world.b)), ("R".into(), role)],
        )
        .map_err(|e| e.to_string())?;

        let mut tests: Vec<(String, Concept, Expr)> = fixture_concepts
            .iter()
            .map(|(n, c)| (n.to_string(), c.clone(), doc.expr(n).unwrap().clone()))
            .collect();
        for i in 0..5 {
            let c = random_concept(&mut r, 3);
            let e = translate(&c, &fp, &mut 0);
            tests.push((format!("random {i}"), c, e));
        }
        for (name, c, e) in &tests {
            let engine: HashSet<usize> = expr::solutions(e, &u).unwrap().iter().map(|a| a.vmap()[0]).collect();
            let direct = world.ext(c);
            ensure(engine == direct, || {
                format!("world {round}, {name} = {c:?}: engine {engine:?}, direct {direct:?}")
            })?;
            concepts += 1;
        }
        // Concept translations from the fixture agree with the builder above.
        for (name, c) in &fixture_concepts {
            let built = translate(c, &fp, &mut 0);
            let same = expr::solutions(&built, &u).unwrap() == expr::solutions(doc.expr(name).unwrap(), &u).unwrap();
            ensure(same, || format!("fixture `{name}` differs from its translation"))?;
        }

        // ABox: ann : A, (ann, bo) : R, (bo, cy) : R, bo : some R.B, ann : all R.A.
        let all_a = world.ext(&fixture_concepts[0].1);
        let some_b = world.ext(&fixture_concepts[1].1);
        for a in cat::hom_set(abox.context(), u.carrier()).unwrap() {
            let (ann, bo, cy) = (a.vmap()[0], a.vmap()[1], a.vmap()[2]);
            let direct = world.a.contains(&ann)
                && world.r.contains(&(ann, bo))
                && world.r.contains(&(bo, cy))
                && some_b.contains(&bo)
                && all_a.contains(&ann);
            let i = Interpretation::new(a.clone(), &u).unwrap();
            let engine = abox.constraints().iter().all(|c| sketch::satisfies(&i, c).unwrap());
            ensure(engine == direct, || format!("world {round}: ABox under {a}: engine {engine}, direct {direct}"))?;
            abox_checks += 1;
        }
        worlds += 1;
    }
    ensure(worlds >= 10, || "too few worlds".into())?;
    Ok(format!(
        "{worlds} interpretations, {concepts} concept extensions, {abox_checks} ABox assignments agree"
    ))
}

// C8 ----------------------------------------------------------------------

fn initiality() -> Check {
    let regs = [
        Registry::bounded(&unary_binary(), Bounds::Set { max_elements: 2 }, false).unwrap(),
        Registry::bounded(
            &graph_footprint(),
            Bounds::Graph {
                max_vertices: 2,
                max_edges: 2,
            },
            false,
        )
        .unwrap(),
    ];
    let mut checked = 0;
    for reg in &regs {
        for u in reg.structures() {
            let v = sketch::check_initial_model(u, reg).map_err(|e| e.to_string())?;
            ensure(v.holds, || format!("`{}` is not initial: {:?}", u.name(), v.witness))?;
            checked += 1;
        }
    }
    Ok(format!(
        "{checked} structures initial for their minimal sketch ({} + {})",
        regs[0].len(),
        regs[1].len()
    ))
}

// C9 ----------------------------------------------------------------------

fn constructive_preservation() -> Check {
    let start = Instant::now();
    let fp = unary_binary();
    let reg = Registry::bounded(&fp, Bounds::Set { max_elements: 3 }, true).unwrap();
    let mut r = rng(0xc9);
    let shape = ExprShape {
        depth: 2,
        negation: false,
        forall: false,
        premises: false,
    };
    let arities = [set(&[]), set(&["p"]), set(&["p", "q"])];
    let mut exprs: Vec<Expr> = Vec::new();
    while exprs.len() < 40 {
        let x = arities.choose(&mut r).unwrap();
        let e = random_expr(&mut r, &fp, x, shape, &mut 0);
        if quantifier_depth(&e) >= 1 && !exprs.contains(&e) {
            ensure(expr::is_strictly_constructive(&e), || format!("generator produced `{e}`"))?;
            exprs.push(e);
        }
    }
    // Solution sets keyed by the images of the arity.
    let sols: Vec<Vec<HashSet<Vec<usize>>>> = reg
        .structures()
        .iter()
        .map(|u| {
            exprs
                .iter()
                .map(|e| expr::solutions(e, u).unwrap().iter().map(|a| a.vmap().to_vec()).collect())
                .collect()
        })
        .collect();
    let (mut homs, mut images) = (0usize, 0usize);
    for (i, u) in reg.structures().iter().enumerate() {
        for (j, v) in reg.structures().iter().enumerate() {
            for s in cat::hom_set(u.carrier(), v.carrier()).unwrap() {
                if !footprint::is_structure_hom(&s, u, v).unwrap() {
                    continue;
                }
                homs += 1;
                for (k, e) in exprs.iter().enumerate() {
                    for a in &sols[i][k] {
                        let image: Vec<usize> = a.iter().map(|&x| s.vmap()[x]).collect();
                        ensure(sols[j][k].contains(&image), || {
                            format!("`{e}` at {a:?} in `{}` is lost along {s} into `{}`", u.name(), v.name())
                        })?;
                        images += 1;
                    }
                }
            }
        }
    }
    Ok(format!(
        "{} expressions, {homs} homomorphisms among {} structures, {images} solutions carried, {:.1}s",
        exprs.len(),
        reg.len(),
        start.elapsed().as_secs_f64()
    ))
}

// C10 ---------------------------------------------------------------------

fn round_trip() -> Check {
    let mut files: Vec<_> = std::fs::read_dir(fixture_dir())
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "lfoc"))
        .collect();
    files.sort();
    let mut footprints = Vec::new();
    for f in &files {
        let doc: Document = surface::parse_file(f).map_err(|e| e.to_string())?;
        let text = surface::print(&doc);
        let again = surface::parse(&text, f.parent()).map_err(|e| format!("{}: reparse: {e}", f.display()))?;
        ensure(again == doc, || format!("{} changed on reparse", f.display()))?;
        ensure(surface::print(&again) == text, || format!("{} prints differently", f.display()))?;
        footprints.extend(doc.items.iter().filter_map(|i| match i {
            surface::Item::Footprint { name, .. } => Some(name.clone()),
            _ => None,
        }));
    }
    footprints.sort();
    for needed in ["ALC", "CAT", "FOL", "UA"] {
        ensure(footprints.iter().any(|f| f == needed), || format!("no {needed} footprint in the corpus"))?;
    }
    Ok(format!("{} files, footprints {footprints:?}", files.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("satisfaction condition", satisfaction_condition),
        ("pushout universal property", pushout_universal_property),
        ("amalgamation", amalgamation),
        ("sketch/structure equivalence", equivalence_matrix),
        ("universal rules sound", universal_rules_sound),
        ("sibling fixture", sibling_oracle),
        ("ALC fixture", alc_agreement),
        ("minimal sketch initiality", initiality),
        ("strict-constructive preservation", constructive_preservation),
        ("DSL round-trip", round_trip),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS C{} {name}: {detail} [{secs:.1}s]", n + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL C{} {name}: {why} [{secs:.1}s]", n + 1);
            }
        }
    }
    if failed == 0 {
        println!("acceptance: all 10 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of 10 criteria fail");
        ExitCode::FAILURE
    }
}
