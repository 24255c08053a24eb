//! Finite base categories: finite sets and finite directed multigraphs.
//!
//! Objects carry ordered name lists. The order fixes the canonical
//! enumeration order of hom-sets and the naming of pushout apexes, so every
//! operation here is deterministic. A set is stored as a graph without edges
//! whose kind is [`Kind::Set`]; vertices play the role of elements.

use std::collections::HashSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::ControlFlow;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Upper bound on the number of candidates `hom_set` is willing to materialize.
pub const HOM_SET_CAP: u128 = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Set,
    Graph,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Set => f.write_str("set"),
            Kind::Graph => f.write_str("graph"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub name: String,
    pub source: usize,
    pub target: usize,
}

/// A finite set or finite directed multigraph with named parts.
///
/// Vertex and edge names share one namespace. Equality is structural and
/// order-sensitive; use [`find_isomorphism`] for equality up to renaming.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CatObject {
    kind: Kind,
    vertices: Vec<String>,
    edges: Vec<Edge>,
}

impl CatObject {
    pub fn empty(kind: Kind) -> Self {
        CatObject {
            kind,
            vertices: Vec::new(),
            edges: Vec::new(),
        }
    }

    pub fn set<I, S>(elements: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let vertices: Vec<String> = elements.into_iter().map(Into::into).collect();
        Self::from_parts(Kind::Set, vertices, Vec::new())
    }

    /// Builds a graph from vertex names and `(edge, source, target)` triples.
    pub fn graph<V, S>(vertices: V, edges: &[(&str, &str, &str)]) -> Result<Self>
    where
        V: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let vertices: Vec<String> = vertices.into_iter().map(Into::into).collect();
        let position = |name: &str| {
            vertices.iter().position(|v| v == name).ok_or_else(|| {
                Error::InvalidObject(format!("edge endpoint `{name}` is not a vertex"))
            })
        };
        let mut built = Vec::with_capacity(edges.len());
        for (name, source, target) in edges {
            built.push(Edge {
                name: (*name).to_string(),
                source: position(source)?,
                target: position(target)?,
            });
        }
        Self::from_parts(Kind::Graph, vertices, built)
    }

    /// Builds an object from index-based parts, checking every invariant.
    pub fn from_parts(kind: Kind, vertices: Vec<String>, edges: Vec<Edge>) -> Result<Self> {
        if kind == Kind::Set && !edges.is_empty() {
            return Err(Error::InvalidObject("a set has no edges".into()));
        }
        let mut seen = HashSet::new();
        for name in vertices.iter().chain(edges.iter().map(|e| &e.name)) {
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidObject(format!("duplicate name `{name}`")));
            }
        }
        for e in &edges {
            if e.source >= vertices.len() || e.target >= vertices.len() {
                return Err(Error::InvalidObject(format!(
                    "edge `{}` has an endpoint outside the vertex list",
                    e.name
                )));
            }
        }
        Ok(CatObject {
            kind,
            vertices,
            edges,
        })
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    /// Vertex names; for sets these are the elements.
    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn name_count(&self) -> usize {
        self.vertices.len() + self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.name_count() == 0
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == name)
    }

    pub fn edge_index(&self, name: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.name == name)
    }

    pub fn contains_name(&self, name: &str) -> bool {
        self.vertex_index(name).is_some() || self.edge_index(name).is_some()
    }

    /// True if both objects agree up to a position-preserving renaming.
    pub fn same_shape(&self, other: &CatObject) -> bool {
        self.kind == other.kind
            && self.vertices.len() == other.vertices.len()
            && self.edges.len() == other.edges.len()
            && self
                .edges
                .iter()
                .zip(&other.edges)
                .all(|(a, b)| a.source == b.source && a.target == b.target)
    }

    pub(crate) fn hash_shape<H: Hasher>(&self, state: &mut H) {
        self.kind.hash(state);
        self.vertices.len().hash(state);
        for e in &self.edges {
            (e.source, e.target).hash(state);
        }
    }

    /// Same shape, positional names `prefix0, prefix1, ...`.
    pub fn renamed_canonically(&self, vertex_prefix: &str, edge_prefix: &str) -> CatObject {
        CatObject {
            kind: self.kind,
            vertices: (0..self.vertices.len())
                .map(|i| format!("{vertex_prefix}{i}"))
                .collect(),
            edges: self
                .edges
                .iter()
                .enumerate()
                .map(|(i, e)| Edge {
                    name: format!("{edge_prefix}{i}"),
                    source: e.source,
                    target: e.target,
                })
                .collect(),
        }
    }

    fn ensure_kind(&self, other: &CatObject) -> Result<()> {
        if self.kind != other.kind {
            return Err(Error::KindMismatch {
                expected: self.kind,
                found: other.kind,
            });
        }
        Ok(())
    }
}

impl fmt::Display for CatObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("obj {")?;
        match self.kind {
            Kind::Set => {
                for v in &self.vertices {
                    write!(f, " {v}")?;
                }
            }
            Kind::Graph => {
                if !self.vertices.is_empty() {
                    f.write_str(" v")?;
                    for v in &self.vertices {
                        write!(f, " {v}")?;
                    }
                    f.write_str(";")?;
                }
                for e in &self.edges {
                    write!(
                        f,
                        " e {}: {}->{};",
                        e.name, self.vertices[e.source], self.vertices[e.target]
                    )?;
                }
            }
        }
        f.write_str(" }")
    }
}

/// A structure-preserving map between two objects of the same kind.
///
/// Component maps are stored by index into the domain's and codomain's name
/// lists. Every constructed morphism satisfies the homomorphism law.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Morphism {
    dom: Arc<CatObject>,
    cod: Arc<CatObject>,
    vmap: Vec<usize>,
    emap: Vec<usize>,
}

impl Morphism {
    pub fn new(
        dom: Arc<CatObject>,
        cod: Arc<CatObject>,
        vmap: Vec<usize>,
        emap: Vec<usize>,
    ) -> Result<Self> {
        dom.ensure_kind(&cod)?;
        if vmap.len() != dom.vertex_count() || emap.len() != dom.edge_count() {
            return Err(Error::InvalidMorphism(format!(
                "component maps are not total on {dom}"
            )));
        }
        if vmap.iter().any(|&v| v >= cod.vertex_count())
            || emap.iter().any(|&e| e >= cod.edge_count())
        {
            return Err(Error::InvalidMorphism(format!(
                "component maps leave the codomain {cod}"
            )));
        }
        for (i, e) in dom.edges.iter().enumerate() {
            let image = &cod.edges[emap[i]];
            if vmap[e.source] != image.source || vmap[e.target] != image.target {
                return Err(Error::InvalidMorphism(format!(
                    "edge `{}` is sent to `{}` but its endpoints are not",
                    e.name, image.name
                )));
            }
        }
        Ok(Morphism {
            dom,
            cod,
            vmap,
            emap,
        })
    }

    /// Caller guarantees totality and the homomorphism law.
    pub(crate) fn from_raw(
        dom: Arc<CatObject>,
        cod: Arc<CatObject>,
        vmap: Vec<usize>,
        emap: Vec<usize>,
    ) -> Self {
        debug_assert_eq!(vmap.len(), dom.vertex_count());
        debug_assert_eq!(emap.len(), dom.edge_count());
        Morphism {
            dom,
            cod,
            vmap,
            emap,
        }
    }

    /// Builds a morphism from `(domain name, codomain name)` pairs.
    ///
    /// Vertex images that are not listed are inferred from the listed edge
    /// images when that determines them.
    pub fn from_pairs(
        dom: Arc<CatObject>,
        cod: Arc<CatObject>,
        pairs: &[(&str, &str)],
    ) -> Result<Self> {
        dom.ensure_kind(&cod)?;
        let mut vmap: Vec<Option<usize>> = vec![None; dom.vertex_count()];
        let mut emap: Vec<Option<usize>> = vec![None; dom.edge_count()];
        for &(from, to) in pairs {
            if let Some(v) = dom.vertex_index(from) {
                let image = cod.vertex_index(to).ok_or_else(|| {
                    Error::InvalidMorphism(format!("`{to}` is not a vertex of {cod}"))
                })?;
                if vmap[v].replace(image).is_some_and(|old| old != image) {
                    return Err(Error::InvalidMorphism(format!("`{from}` is mapped twice")));
                }
            } else if let Some(e) = dom.edge_index(from) {
                let image = cod.edge_index(to).ok_or_else(|| {
                    Error::InvalidMorphism(format!("`{to}` is not an edge of {cod}"))
                })?;
                if emap[e].replace(image).is_some_and(|old| old != image) {
                    return Err(Error::InvalidMorphism(format!("`{from}` is mapped twice")));
                }
            } else {
                return Err(Error::InvalidMorphism(format!("`{from}` is not a name of {dom}")));
            }
        }
        for (e, image) in emap.iter().enumerate() {
            if let Some(image) = *image {
                let (de, ce) = (&dom.edges[e], &cod.edges[image]);
                vmap[de.source].get_or_insert(ce.source);
                vmap[de.target].get_or_insert(ce.target);
            }
        }
        let missing = |names: Vec<&str>| {
            Error::InvalidMorphism(format!("no image given for {}", names.join(", ")))
        };
        let unset: Vec<&str> = dom
            .vertices
            .iter()
            .zip(&vmap)
            .filter(|(_, m)| m.is_none())
            .map(|(n, _)| n.as_str())
            .chain(
                dom.edges
                    .iter()
                    .zip(&emap)
                    .filter(|(_, m)| m.is_none())
                    .map(|(e, _)| e.name.as_str()),
            )
            .collect();
        if !unset.is_empty() {
            return Err(missing(unset));
        }
        let vmap = vmap.into_iter().map(Option::unwrap).collect();
        let emap = emap.into_iter().map(Option::unwrap).collect();
        Morphism::new(dom, cod, vmap, emap)
    }

    /// The name-preserving inclusion of `dom` into `cod`.
    pub fn inclusion(dom: Arc<CatObject>, cod: Arc<CatObject>) -> Result<Self> {
        let names: Vec<&str> = dom
            .vertices
            .iter()
            .map(String::as_str)
            .chain(dom.edges.iter().map(|e| e.name.as_str()))
            .collect();
        let pairs: Vec<(&str, &str)> = names.iter().map(|n| (*n, *n)).collect();
        Morphism::from_pairs(dom.clone(), cod.clone(), &pairs).map_err(|_| {
            Error::InvalidMorphism(format!("{dom} is not included in {cod}"))
        })
    }

    pub fn identity(obj: Arc<CatObject>) -> Self {
        let vmap = (0..obj.vertex_count()).collect();
        let emap = (0..obj.edge_count()).collect();
        Morphism::from_raw(obj.clone(), obj, vmap, emap)
    }

    pub fn dom(&self) -> &Arc<CatObject> {
        &self.dom
    }

    pub fn cod(&self) -> &Arc<CatObject> {
        &self.cod
    }

    pub fn vmap(&self) -> &[usize] {
        &self.vmap
    }

    pub fn emap(&self) -> &[usize] {
        &self.emap
    }

    /// `self ; g`, diagrammatic order.
    pub fn then(&self, g: &Morphism) -> Result<Morphism> {
        compose(self, g)
    }

    pub fn is_identity(&self) -> bool {
        self.dom == self.cod
            && self.vmap.iter().enumerate().all(|(i, &v)| i == v)
            && self.emap.iter().enumerate().all(|(i, &e)| i == e)
    }

    /// True if every domain name is sent to the codomain name of the same spelling.
    pub fn is_name_inclusion(&self) -> bool {
        self.vmap
            .iter()
            .enumerate()
            .all(|(i, &v)| self.dom.vertices[i] == self.cod.vertices[v])
            && self
                .emap
                .iter()
                .enumerate()
                .all(|(i, &e)| self.dom.edges[i].name == self.cod.edges[e].name)
    }

    pub fn is_injective(&self) -> bool {
        let distinct = |m: &[usize]| m.iter().collect::<HashSet<_>>().len() == m.len();
        distinct(&self.vmap) && distinct(&self.emap)
    }

    pub fn is_surjective(&self) -> bool {
        let hits = |m: &[usize], n: usize| m.iter().collect::<HashSet<_>>().len() == n;
        hits(&self.vmap, self.cod.vertex_count()) && hits(&self.emap, self.cod.edge_count())
    }

    /// `(domain name, image name)` pairs, vertices first.
    pub fn pairs(&self) -> Vec<(&str, &str)> {
        let vs = self
            .vmap
            .iter()
            .enumerate()
            .map(|(i, &v)| (self.dom.vertices[i].as_str(), self.cod.vertices[v].as_str()));
        let es = self.emap.iter().enumerate().map(|(i, &e)| {
            (
                self.dom.edges[i].name.as_str(),
                self.cod.edges[e].name.as_str(),
            )
        });
        vs.chain(es).collect()
    }

    /// Image of the domain under the map, as one flat index vector.
    pub(crate) fn key(&self) -> Vec<usize> {
        let mut key = Vec::with_capacity(self.vmap.len() + self.emap.len());
        key.extend_from_slice(&self.vmap);
        key.extend_from_slice(&self.emap);
        key
    }
}

impl fmt::Display for Morphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, (from, to)) in self.pairs().into_iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{from}->{to}")?;
        }
        f.write_str("]")
    }
}

/// Diagrammatic composition `f ; g`.
pub fn compose(f: &Morphism, g: &Morphism) -> Result<Morphism> {
    if f.cod != g.dom {
        return Err(Error::CompositionMismatch {
            left: f.cod.to_string(),
            right: g.dom.to_string(),
        });
    }
    Ok(Morphism::from_raw(
        f.dom.clone(),
        g.cod.clone(),
        f.vmap.iter().map(|&v| g.vmap[v]).collect(),
        f.emap.iter().map(|&e| g.emap[e]).collect(),
    ))
}

pub fn identity(obj: &Arc<CatObject>) -> Morphism {
    Morphism::identity(obj.clone())
}

pub fn initial_object(kind: Kind) -> CatObject {
    CatObject::empty(kind)
}

/// The unique morphism from the initial object of `obj`'s kind.
pub fn initial_morphism(obj: &Arc<CatObject>) -> Morphism {
    Morphism::from_raw(
        Arc::new(CatObject::empty(obj.kind)),
        obj.clone(),
        Vec::new(),
        Vec::new(),
    )
}

/// True iff `t ; b = a`, i.e. `b` extends `a` along `t`.
pub fn is_extension(b: &Morphism, t: &Morphism, a: &Morphism) -> Result<bool> {
    if t.dom != a.dom || t.cod != b.dom || b.cod != a.cod {
        return Err(Error::Boundary(format!(
            "expected t: X -> Y, b: Y -> U, a: X -> U; got t: {} -> {}, b: {} -> {}, a: {} -> {}",
            t.dom, t.cod, b.dom, b.cod, a.dom, a.cod
        )));
    }
    Ok(t.vmap.iter().zip(&a.vmap).all(|(&y, &u)| b.vmap[y] == u)
        && t.emap.iter().zip(&a.emap).all(|(&y, &u)| b.emap[y] == u))
}

/// Partial assignment fixing some images in a hom search.
#[derive(Clone, Debug)]
pub(crate) struct Pins {
    pub(crate) vertices: Vec<Option<usize>>,
    pub(crate) edges: Vec<Option<usize>>,
}

impl Pins {
    pub(crate) fn none(dom: &CatObject) -> Self {
        Pins {
            vertices: vec![None; dom.vertex_count()],
            edges: vec![None; dom.edge_count()],
        }
    }

    /// Pins forcing `t ; b = a` on candidates `b`; `None` if the equation is
    /// contradictory (two names identified by `t` but not by `a`).
    pub(crate) fn along(t: &Morphism, a_vmap: &[usize], a_emap: &[usize]) -> Option<Self> {
        let mut pins = Pins::none(&t.cod);
        for (x, &y) in t.vmap.iter().enumerate() {
            if pins.vertices[y].replace(a_vmap[x]).is_some_and(|old| old != a_vmap[x]) {
                return None;
            }
        }
        for (x, &y) in t.emap.iter().enumerate() {
            if pins.edges[y].replace(a_emap[x]).is_some_and(|old| old != a_emap[x]) {
                return None;
            }
        }
        Some(pins)
    }
}

/// Backtracking enumeration of all homomorphisms `dom -> cod` compatible with
/// `pins`, in lexicographic order of (vertex images, edge images).
///
/// Vertices are assigned in domain order; an edge is checked as soon as both
/// of its endpoints have images, then edges are chosen among the parallel
/// edges between the assigned endpoints.
pub(crate) fn search_homs(
    dom: &CatObject,
    cod: &CatObject,
    pins: Option<&Pins>,
    visit: &mut dyn FnMut(&[usize], &[usize]) -> ControlFlow<()>,
) -> ControlFlow<()> {
    debug_assert_eq!(dom.kind, cod.kind);
    let nv = cod.vertex_count();
    let mut vpins: Vec<Option<usize>> = match pins {
        Some(p) => p.vertices.clone(),
        None => vec![None; dom.vertex_count()],
    };
    let epins: Vec<Option<usize>> = match pins {
        Some(p) => p.edges.clone(),
        None => vec![None; dom.edge_count()],
    };
    // Edge pins force their endpoints.
    for (e, pin) in epins.iter().enumerate() {
        if let Some(c) = *pin {
            let (de, ce) = (&dom.edges[e], &cod.edges[c]);
            for (v, w) in [(de.source, ce.source), (de.target, ce.target)] {
                if vpins[v].replace(w).is_some_and(|old| old != w) {
                    return ControlFlow::Continue(());
                }
            }
        }
    }
    let mut parallel: Vec<Vec<usize>> = Vec::new();
    let mut checks: Vec<Vec<usize>> = vec![Vec::new(); dom.vertex_count()];
    if !dom.edges.is_empty() {
        parallel = vec![Vec::new(); nv * nv];
        for (i, e) in cod.edges.iter().enumerate() {
            parallel[e.source * nv + e.target].push(i);
        }
        for (i, e) in dom.edges.iter().enumerate() {
            checks[e.source.max(e.target)].push(i);
        }
    }
    let mut search = Search {
        dom,
        nv,
        vpins: &vpins,
        epins: &epins,
        parallel: &parallel,
        checks: &checks,
        vimg: vec![0; dom.vertex_count()],
        eimg: vec![0; dom.edge_count()],
    };
    search.vertex(0, visit)
}

struct Search<'a> {
    dom: &'a CatObject,
    nv: usize,
    vpins: &'a [Option<usize>],
    epins: &'a [Option<usize>],
    parallel: &'a [Vec<usize>],
    checks: &'a [Vec<usize>],
    vimg: Vec<usize>,
    eimg: Vec<usize>,
}

impl Search<'_> {
    fn vertex(
        &mut self,
        i: usize,
        visit: &mut dyn FnMut(&[usize], &[usize]) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        if i == self.vimg.len() {
            return self.edge(0, visit);
        }
        let (lo, hi) = match self.vpins[i] {
            Some(p) => (p, p + 1),
            None => (0, self.nv),
        };
        for c in lo..hi {
            self.vimg[i] = c;
            let ok = self.checks[i].iter().all(|&e| {
                let de = &self.dom.edges[e];
                !self.parallel[self.vimg[de.source] * self.nv + self.vimg[de.target]].is_empty()
            });
            if ok {
                self.vertex(i + 1, visit)?;
            }
        }
        ControlFlow::Continue(())
    }

    fn edge(
        &mut self,
        j: usize,
        visit: &mut dyn FnMut(&[usize], &[usize]) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        if j == self.eimg.len() {
            return visit(&self.vimg, &self.eimg);
        }
        let de = &self.dom.edges[j];
        let slot = self.vimg[de.source] * self.nv + self.vimg[de.target];
        let parallel = self.parallel;
        match self.epins[j] {
            Some(p) => {
                if parallel[slot].contains(&p) {
                    self.eimg[j] = p;
                    self.edge(j + 1, visit)?;
                }
            }
            None => {
                for &c in &parallel[slot] {
                    self.eimg[j] = c;
                    self.edge(j + 1, visit)?;
                }
            }
        }
        ControlFlow::Continue(())
    }
}

/// Upper bound on the number of candidates a hom search may visit.
pub fn hom_estimate(dom: &CatObject, cod: &CatObject) -> u128 {
    let nv = cod.vertex_count() as u128;
    let mut widest = 0u128;
    let mut counts = std::collections::HashMap::new();
    for e in &cod.edges {
        let c = counts.entry((e.source, e.target)).or_insert(0u128);
        *c += 1;
        widest = widest.max(*c);
    }
    let mut estimate = 1u128;
    for _ in 0..dom.vertex_count() {
        estimate = estimate.saturating_mul(nv);
    }
    for _ in 0..dom.edge_count() {
        estimate = estimate.saturating_mul(widest);
    }
    estimate
}

/// All morphisms `dom -> cod` in canonical order.
pub fn hom_set(dom: &Arc<CatObject>, cod: &Arc<CatObject>) -> Result<Vec<Morphism>> {
    dom.ensure_kind(cod)?;
    let estimate = hom_estimate(dom, cod);
    if estimate > HOM_SET_CAP {
        return Err(Error::TooLarge {
            estimate,
            cap: HOM_SET_CAP,
        });
    }
    let mut out = Vec::new();
    let _ = search_homs(dom, cod, None, &mut |v, e| {
        out.push(Morphism::from_raw(
            dom.clone(),
            cod.clone(),
            v.to_vec(),
            e.to_vec(),
        ));
        ControlFlow::Continue(())
    });
    Ok(out)
}

pub fn hom_count(dom: &CatObject, cod: &CatObject) -> Result<usize> {
    dom.ensure_kind(cod)?;
    let mut n = 0usize;
    let _ = search_homs(dom, cod, None, &mut |_, _| {
        n += 1;
        ControlFlow::Continue(())
    });
    Ok(n)
}

/// All `b` with `t ; b = a`, in canonical order.
pub fn extensions(t: &Morphism, a: &Morphism) -> Result<Vec<Morphism>> {
    if t.dom != a.dom {
        return Err(Error::Boundary(format!(
            "extension along a morphism out of {} of an interpretation of {}",
            t.dom, a.dom
        )));
    }
    t.cod.ensure_kind(&a.cod)?;
    let mut out = Vec::new();
    if let Some(pins) = Pins::along(t, &a.vmap, &a.emap) {
        let _ = search_homs(&t.cod, &a.cod, Some(&pins), &mut |v, e| {
            out.push(Morphism::from_raw(
                t.cod.clone(),
                a.cod.clone(),
                v.to_vec(),
                e.to_vec(),
            ));
            ControlFlow::Continue(())
        });
    }
    Ok(out)
}

/// A bijective morphism `x -> y`, if one exists.
pub fn find_isomorphism(x: &Arc<CatObject>, y: &Arc<CatObject>) -> Option<Morphism> {
    if x.kind != y.kind
        || x.vertex_count() != y.vertex_count()
        || x.edge_count() != y.edge_count()
    {
        return None;
    }
    let mut found = None;
    let _ = search_homs(x, y, None, &mut |v, e| {
        let candidate = Morphism::from_raw(x.clone(), y.clone(), v.to_vec(), e.to_vec());
        if candidate.is_injective() {
            found = Some(candidate);
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    found
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PushoutResult {
    pub apex: Arc<CatObject>,
    pub inj_left: Morphism,
    pub inj_right: Morphism,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.0[hi] = lo;
        }
    }
}

/// Classes of a quotient of `left ⊔ right`, ordered by first occurrence with
/// the left side first. Returns the class of every member and, per class,
/// its first member.
fn classes(uf: &mut UnionFind, n: usize) -> (Vec<usize>, Vec<usize>) {
    let mut class_of_root = vec![usize::MAX; n];
    let mut class = vec![0; n];
    let mut first = Vec::new();
    for i in 0..n {
        let r = uf.find(i);
        if class_of_root[r] == usize::MAX {
            class_of_root[r] = first.len();
            first.push(i);
        }
        class[i] = class_of_root[r];
    }
    (class, first)
}

/// Chosen pushout of the span `f: A -> B`, `g: A -> C`.
///
/// The apex is `(B ⊔ C)/~` for the least equivalence with `f(x) ~ g(x)`,
/// computed separately on vertices and edges. Each class is named after its
/// first member, left before right and in list order; a right-only class
/// whose name is already taken gets the first free suffix `_1`, `_2`, ...
/// Pushing out along an identity therefore returns the other object unchanged.
pub fn pushout(f: &Morphism, g: &Morphism) -> Result<PushoutResult> {
    if f.dom != g.dom {
        return Err(Error::NotASpan(format!(
            "domains {} and {} differ",
            f.dom, g.dom
        )));
    }
    f.cod.ensure_kind(&g.cod)?;
    let (b, c) = (&f.cod, &g.cod);
    let (nbv, nbe) = (b.vertex_count(), b.edge_count());

    let mut vuf = UnionFind::new(nbv + c.vertex_count());
    for (x, _) in f.dom.vertices.iter().enumerate() {
        vuf.union(f.vmap[x], nbv + g.vmap[x]);
    }
    let mut euf = UnionFind::new(nbe + c.edge_count());
    for (x, _) in f.dom.edges.iter().enumerate() {
        euf.union(f.emap[x], nbe + g.emap[x]);
    }
    let (mut vclass, vfirst) = classes(&mut vuf, nbv + c.vertex_count());
    let (mut eclass, efirst) = classes(&mut euf, nbe + c.edge_count());

    // One namespace: vertex classes first, then edge classes.
    let members: Vec<(bool, usize)> = vfirst
        .iter()
        .map(|&m| (m < nbv, m))
        .chain(efirst.iter().map(|&m| (m < nbe, m)))
        .collect();
    let name_of = |k: usize| -> &str {
        let (left, m) = members[k];
        match (k < vfirst.len(), left) {
            (true, true) => &b.vertices[m],
            (true, false) => &c.vertices[m - nbv],
            (false, true) => &b.edges[m].name,
            (false, false) => &c.edges[m - nbe].name,
        }
    };
    let mut names: Vec<Option<String>> = (0..members.len())
        .map(|k| members[k].0.then(|| name_of(k).to_string()))
        .collect();
    for k in 0..names.len() {
        if names[k].is_some() {
            continue;
        }
        let base = name_of(k);
        let taken = |c: &str| names.iter().flatten().any(|n| n == c);
        let mut candidate = base.to_string();
        let mut n = 1;
        while taken(&candidate) {
            candidate = format!("{base}_{n}");
            n += 1;
        }
        names[k] = Some(candidate);
    }
    let mut names = names.into_iter().map(Option::unwrap);

    let vertices: Vec<String> = names.by_ref().take(vfirst.len()).collect();
    let edges = efirst
        .iter()
        .zip(names)
        .map(|(&m, name)| {
            let (source, target) = if m < nbe {
                let e = &b.edges[m];
                (vclass[e.source], vclass[e.target])
            } else {
                let e = &c.edges[m - nbe];
                (vclass[nbv + e.source], vclass[nbv + e.target])
            };
            Edge { name, source, target }
        })
        .collect();
    let apex = Arc::new(CatObject {
        kind: b.kind,
        vertices,
        edges,
    });
    let (vright, eright) = (vclass.split_off(nbv), eclass.split_off(nbe));
    let inj_left = Morphism::from_raw(b.clone(), apex.clone(), vclass, eclass);
    let inj_right = Morphism::from_raw(c.clone(), apex.clone(), vright, eright);
    Ok(PushoutResult {
        apex,
        inj_left,
        inj_right,
    })
}
