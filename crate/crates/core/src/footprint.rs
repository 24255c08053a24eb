//! Footprints, structures over them, structure homomorphisms, and registries
//! of structures that bounded semantic questions quantify over.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use crate::cat::{self, CatObject, Edge, Kind, Morphism};
use crate::error::{Error, Result};

/// Default refusal threshold for [`enumerate_structures`].
pub const STRUCTURE_CAP: u128 = 1 << 22;

/// Feature symbols with their arity objects.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Footprint {
    name: String,
    kind: Kind,
    features: Vec<(String, Arc<CatObject>)>,
}

impl Footprint {
    pub fn new(
        name: impl Into<String>,
        kind: Kind,
        features: Vec<(String, Arc<CatObject>)>,
    ) -> Result<Self> {
        let mut seen = HashSet::new();
        for (feature, arity) in &features {
            if !seen.insert(feature.as_str()) {
                return Err(Error::InvalidFootprint(format!("duplicate feature `{feature}`")));
            }
            if arity.kind() != kind {
                return Err(Error::InvalidFootprint(format!(
                    "feature `{feature}` has a {} arity in a {kind} footprint",
                    arity.kind()
                )));
            }
        }
        Ok(Footprint {
            name: name.into(),
            kind,
            features,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn features(&self) -> &[(String, Arc<CatObject>)] {
        &self.features
    }

    pub fn feature_index(&self, feature: &str) -> Option<usize> {
        self.features.iter().position(|(f, _)| f == feature)
    }

    pub fn arity(&self, feature: &str) -> Option<&Arc<CatObject>> {
        self.feature_index(feature).map(|i| &self.features[i].1)
    }
}

/// A carrier object with, per feature, a finite set of valid interpretations.
///
/// Construction through [`Structure::unchecked`] keeps whatever morphisms it
/// is given so that [`Structure::validate`] can report on them; evaluation
/// assumes a valid structure.
#[derive(Debug)]
pub struct Structure {
    name: String,
    footprint: Arc<Footprint>,
    carrier: Arc<CatObject>,
    interpretation: Vec<Vec<Morphism>>,
    index: OnceLock<Vec<HashSet<Vec<usize>>>>,
}

impl Clone for Structure {
    fn clone(&self) -> Self {
        Structure {
            name: self.name.clone(),
            footprint: self.footprint.clone(),
            carrier: self.carrier.clone(),
            interpretation: self.interpretation.clone(),
            index: OnceLock::new(),
        }
    }
}

/// Why a structure fails its invariants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureViolation {
    pub feature: String,
    pub morphism: Option<String>,
    pub reason: String,
}

impl fmt::Display for StructureViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.morphism {
            Some(m) => write!(f, "feature `{}`, interpretation {m}: {}", self.feature, self.reason),
            None => write!(f, "feature `{}`: {}", self.feature, self.reason),
        }
    }
}

impl Structure {
    /// Builds a structure without validating it. Features not listed get an
    /// empty interpretation; listing an unknown feature is an error.
    pub fn unchecked(
        name: impl Into<String>,
        footprint: Arc<Footprint>,
        carrier: Arc<CatObject>,
        interpretation: Vec<(String, Vec<Morphism>)>,
    ) -> Result<Self> {
        let mut slots = vec![Vec::new(); footprint.features.len()];
        for (feature, morphisms) in interpretation {
            let i = footprint
                .feature_index(&feature)
                .ok_or_else(|| Error::UnknownFeature(feature.clone()))?;
            slots[i].extend(morphisms);
        }
        Ok(Structure {
            name: name.into(),
            footprint,
            carrier,
            interpretation: slots,
            index: OnceLock::new(),
        })
    }

    /// Builds and validates a structure.
    pub fn new(
        name: impl Into<String>,
        footprint: Arc<Footprint>,
        carrier: Arc<CatObject>,
        interpretation: Vec<(String, Vec<Morphism>)>,
    ) -> Result<Self> {
        let s = Self::unchecked(name, footprint, carrier, interpretation)?;
        s.validate()
            .map_err(|v| Error::InvalidStructure(format!("`{}`: {v}", s.name)))?;
        Ok(s)
    }

    pub(crate) fn from_valid(
        name: String,
        footprint: Arc<Footprint>,
        carrier: Arc<CatObject>,
        interpretation: Vec<Vec<Morphism>>,
    ) -> Self {
        Structure {
            name,
            footprint,
            carrier,
            interpretation,
            index: OnceLock::new(),
        }
    }

    pub fn validate(&self) -> Result<(), StructureViolation> {
        if self.carrier.kind() != self.footprint.kind {
            return Err(StructureViolation {
                feature: String::new(),
                morphism: None,
                reason: format!(
                    "a {} carrier for a {} footprint",
                    self.carrier.kind(),
                    self.footprint.kind
                ),
            });
        }
        for ((feature, arity), morphisms) in self.footprint.features.iter().zip(&self.interpretation)
        {
            let mut seen = HashSet::new();
            for m in morphisms {
                let violation = |reason: String| StructureViolation {
                    feature: feature.clone(),
                    morphism: Some(m.to_string()),
                    reason,
                };
                if m.dom() != arity {
                    return Err(violation(format!("domain is not the arity {arity}")));
                }
                if m.cod() != &self.carrier {
                    return Err(violation("codomain is not the carrier".into()));
                }
                if !seen.insert(m.key()) {
                    return Err(violation("listed twice".into()));
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn footprint(&self) -> &Arc<Footprint> {
        &self.footprint
    }

    pub fn carrier(&self) -> &Arc<CatObject> {
        &self.carrier
    }

    /// Valid interpretations of the feature at `index` in footprint order.
    pub fn interpretations(&self, index: usize) -> &[Morphism] {
        &self.interpretation[index]
    }

    pub fn interpretations_of(&self, feature: &str) -> Option<&[Morphism]> {
        self.footprint
            .feature_index(feature)
            .map(|i| self.interpretation[i].as_slice())
    }

    fn index(&self) -> &[HashSet<Vec<usize>>] {
        self.index.get_or_init(|| {
            self.interpretation
                .iter()
                .map(|ms| ms.iter().map(Morphism::key).collect())
                .collect()
        })
    }

    /// Membership of the map with the given component images, keyed as
    /// vertex images followed by edge images.
    pub(crate) fn contains_key(&self, feature: usize, key: &[usize]) -> bool {
        self.index()[feature].contains(key)
    }

    pub fn contains(&self, feature: usize, m: &Morphism) -> bool {
        m.cod() == &self.carrier && self.contains_key(feature, &m.key())
    }

    pub fn fact_count(&self) -> usize {
        self.interpretation.iter().map(Vec::len).sum()
    }

    fn fact_keys(&self) -> Vec<Vec<Vec<usize>>> {
        self.interpretation
            .iter()
            .map(|ms| {
                let mut keys: Vec<_> = ms.iter().map(Morphism::key).collect();
                keys.sort();
                keys.dedup();
                keys
            })
            .collect()
    }
}

/// Equality ignores the structure's name and the listing order of facts.
impl PartialEq for Structure {
    fn eq(&self, other: &Self) -> bool {
        self.footprint == other.footprint
            && self.carrier == other.carrier
            && self.fact_keys() == other.fact_keys()
    }
}

impl Eq for Structure {}

fn same_footprint(a: &Arc<Footprint>, b: &Arc<Footprint>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// True iff `s` carries every valid interpretation of `from` to one of `to`.
pub fn is_structure_hom(s: &Morphism, from: &Structure, to: &Structure) -> Result<bool> {
    if !same_footprint(&from.footprint, &to.footprint) {
        return Err(Error::Boundary(format!(
            "structures over different footprints `{}` and `{}`",
            from.footprint.name, to.footprint.name
        )));
    }
    if s.dom() != &from.carrier || s.cod() != &to.carrier {
        return Err(Error::Boundary(format!(
            "{} -> {} is not a map between the carriers of `{}` and `{}`",
            s.dom(),
            s.cod(),
            from.name,
            to.name
        )));
    }
    Ok(preserves(s, from, to))
}

pub(crate) fn preserves(s: &Morphism, from: &Structure, to: &Structure) -> bool {
    let mut key = Vec::new();
    from.interpretation.iter().enumerate().all(|(p, ms)| {
        ms.iter().all(|a| {
            key.clear();
            key.extend(a.vmap().iter().map(|&v| s.vmap()[v]));
            key.extend(a.emap().iter().map(|&e| s.emap()[e]));
            to.contains_key(p, &key)
        })
    })
}

/// Size bounds for exhaustive structure enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Bounds {
    Set { max_elements: usize },
    Graph { max_vertices: usize, max_edges: usize },
}

impl Bounds {
    pub fn kind(&self) -> Kind {
        match self {
            Bounds::Set { .. } => Kind::Set,
            Bounds::Graph { .. } => Kind::Graph,
        }
    }

    /// Reads `N` (sets) or `N,M` (graphs: vertices, edges) for the given kind.
    /// A single number for graphs bounds vertices and edges alike.
    pub fn parse_for(text: &str, kind: Kind) -> Result<Self> {
        let parsed: Bounds = text.parse()?;
        match (parsed, kind) {
            (Bounds::Set { max_elements }, Kind::Graph) => Ok(Bounds::Graph {
                max_vertices: max_elements,
                max_edges: max_elements,
            }),
            (Bounds::Graph { .. }, Kind::Set) => Err(Error::InvalidObject(format!(
                "bounds `{text}` name edges but the footprint is over sets"
            ))),
            (b, _) => Ok(b),
        }
    }
}

impl FromStr for Bounds {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let number = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidObject(format!("bad carrier bound `{s}`")))
        };
        match s.split_once(',') {
            None => Ok(Bounds::Set {
                max_elements: number(s)?,
            }),
            Some((v, e)) => Ok(Bounds::Graph {
                max_vertices: number(v)?,
                max_edges: number(e)?,
            }),
        }
    }
}

impl fmt::Display for Bounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bounds::Set { max_elements } => write!(f, "{max_elements}"),
            Bounds::Graph {
                max_vertices,
                max_edges,
            } => write!(f, "{max_vertices},{max_edges}"),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EnumOptions {
    pub iso_dedup: bool,
    pub cap: u128,
}

impl Default for EnumOptions {
    fn default() -> Self {
        EnumOptions {
            iso_dedup: false,
            cap: STRUCTURE_CAP,
        }
    }
}

/// All carriers within the bounds, in canonical order: sets `u0..`, graphs
/// with vertices `v0..` and edges `e0..` whose endpoint pairs are
/// non-decreasing.
pub fn carriers(bounds: Bounds) -> Vec<Arc<CatObject>> {
    let mut out = Vec::new();
    match bounds {
        Bounds::Set { max_elements } => {
            for n in 0..=max_elements {
                let obj = CatObject::set((0..n).map(|i| format!("u{i}"))).unwrap();
                out.push(Arc::new(obj));
            }
        }
        Bounds::Graph {
            max_vertices,
            max_edges,
        } => {
            for nv in 0..=max_vertices {
                let pairs: Vec<(usize, usize)> = (0..nv)
                    .flat_map(|s| (0..nv).map(move |t| (s, t)))
                    .collect();
                let max_e = if nv == 0 { 0 } else { max_edges };
                for ne in 0..=max_e {
                    let mut choice = vec![0usize; ne];
                    loop {
                        let vertices = (0..nv).map(|i| format!("v{i}")).collect();
                        let edges = choice
                            .iter()
                            .enumerate()
                            .map(|(i, &p)| Edge {
                                name: format!("e{i}"),
                                source: pairs[p].0,
                                target: pairs[p].1,
                            })
                            .collect();
                        let obj = CatObject::from_parts(Kind::Graph, vertices, edges).unwrap();
                        out.push(Arc::new(obj));
                        // Next non-decreasing sequence over `pairs`.
                        let mut i = ne;
                        loop {
                            if i == 0 {
                                break;
                            }
                            i -= 1;
                            if choice[i] + 1 < pairs.len() {
                                choice[i] += 1;
                                for j in i + 1..ne {
                                    choice[j] = choice[i];
                                }
                                i = usize::MAX;
                                break;
                            }
                        }
                        if i != usize::MAX {
                            break;
                        }
                    }
                }
            }
        }
    }
    out
}

struct CarrierPlan {
    carrier: Arc<CatObject>,
    homs: Vec<Vec<Morphism>>,
    slots: Vec<(usize, usize)>,
    automorphisms: Vec<Morphism>,
}

/// Deterministic stream of all structures within some bounds.
pub struct StructureEnumeration {
    footprint: Arc<Footprint>,
    plans: Vec<CarrierPlan>,
    plan: usize,
    next_mask: u64,
    iso_dedup: bool,
    seen: HashSet<Vec<Vec<Vec<usize>>>>,
    produced: usize,
}

/// Number of structures [`enumerate_structures`] would visit without
/// isomorphism reduction.
pub fn structure_estimate(footprint: &Footprint, bounds: Bounds) -> Result<u128> {
    let mut total = 0u128;
    for carrier in carriers(bounds) {
        let mut bits = 0u32;
        for (_, arity) in &footprint.features {
            bits += cat::hom_count(arity, &carrier)? as u32;
        }
        total = total.saturating_add(if bits >= 127 { u128::MAX } else { 1u128 << bits });
    }
    Ok(total)
}

pub fn enumerate_structures(
    footprint: &Arc<Footprint>,
    bounds: Bounds,
    options: EnumOptions,
) -> Result<StructureEnumeration> {
    if bounds.kind() != footprint.kind {
        return Err(Error::KindMismatch {
            expected: footprint.kind,
            found: bounds.kind(),
        });
    }
    let estimate = structure_estimate(footprint, bounds)?;
    if estimate > options.cap {
        return Err(Error::TooLarge {
            estimate,
            cap: options.cap,
        });
    }
    let mut plans: Vec<CarrierPlan> = Vec::new();
    for carrier in carriers(bounds) {
        if options.iso_dedup
            && plans
                .iter()
                .any(|p| cat::find_isomorphism(&p.carrier, &carrier).is_some())
        {
            continue;
        }
        let mut homs = Vec::new();
        let mut slots = Vec::new();
        for (p, (_, arity)) in footprint.features.iter().enumerate() {
            let hs = cat::hom_set(arity, &carrier)?;
            slots.extend((0..hs.len()).map(|i| (p, i)));
            homs.push(hs);
        }
        let automorphisms = if options.iso_dedup {
            cat::hom_set(&carrier, &carrier)?
                .into_iter()
                .filter(Morphism::is_injective)
                .collect()
        } else {
            Vec::new()
        };
        plans.push(CarrierPlan {
            carrier,
            homs,
            slots,
            automorphisms,
        });
    }
    Ok(StructureEnumeration {
        footprint: footprint.clone(),
        plans,
        plan: 0,
        next_mask: 0,
        iso_dedup: options.iso_dedup,
        seen: HashSet::new(),
        produced: 0,
    })
}

fn canonical_facts(plan: &CarrierPlan, facts: &[Vec<Morphism>]) -> Vec<Vec<Vec<usize>>> {
    let mut best: Option<Vec<Vec<Vec<usize>>>> = None;
    for sigma in &plan.automorphisms {
        let image: Vec<Vec<Vec<usize>>> = facts
            .iter()
            .map(|ms| {
                let mut keys: Vec<Vec<usize>> = ms
                    .iter()
                    .map(|m| {
                        m.vmap()
                            .iter()
                            .map(|&v| sigma.vmap()[v])
                            .chain(m.emap().iter().map(|&e| sigma.emap()[e]))
                            .collect()
                    })
                    .collect();
                keys.sort();
                keys
            })
            .collect();
        if best.as_ref().is_none_or(|b| image < *b) {
            best = Some(image);
        }
    }
    best.unwrap_or_default()
}

impl Iterator for StructureEnumeration {
    type Item = Structure;

    fn next(&mut self) -> Option<Structure> {
        loop {
            let plan = self.plans.get(self.plan)?;
            let bits = plan.slots.len();
            if bits < 64 && self.next_mask >> bits != 0 {
                self.plan += 1;
                self.next_mask = 0;
                self.seen.clear();
                continue;
            }
            let mask = self.next_mask;
            self.next_mask += 1;
            let mut facts: Vec<Vec<Morphism>> = vec![Vec::new(); plan.homs.len()];
            for (bit, &(p, i)) in plan.slots.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    facts[p].push(plan.homs[p][i].clone());
                }
            }
            if self.iso_dedup && !self.seen.insert(canonical_facts(plan, &facts)) {
                continue;
            }
            let name = format!("{}_{}", self.footprint.name, self.produced);
            self.produced += 1;
            return Some(Structure::from_valid(
                name,
                self.footprint.clone(),
                plan.carrier.clone(),
                facts,
            ));
        }
    }
}

/// Which structures a bounded semantic question ranges over.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Scope {
    Explicit { name: String },
    Bounded {
        footprint: String,
        bounds: Bounds,
        iso_dedup: bool,
    },
}

/// A finite collection of structures over one footprint.
#[derive(Clone, Debug)]
pub struct Registry {
    scope: Scope,
    footprint: Arc<Footprint>,
    structures: Vec<Structure>,
}

impl Registry {
    pub fn explicit(
        name: impl Into<String>,
        footprint: Arc<Footprint>,
        structures: Vec<Structure>,
    ) -> Result<Self> {
        let name = name.into();
        for s in &structures {
            if !same_footprint(&s.footprint, &footprint) {
                return Err(Error::InvalidStructure(format!(
                    "`{}` in registry `{name}` is not over `{}`",
                    s.name, footprint.name
                )));
            }
        }
        Ok(Registry {
            scope: Scope::Explicit { name },
            footprint,
            structures,
        })
    }

    pub fn bounded(footprint: &Arc<Footprint>, bounds: Bounds, iso_dedup: bool) -> Result<Self> {
        let structures = enumerate_structures(
            footprint,
            bounds,
            EnumOptions {
                iso_dedup,
                ..EnumOptions::default()
            },
        )?
        .collect();
        Ok(Registry {
            scope: Scope::Bounded {
                footprint: footprint.name.clone(),
                bounds,
                iso_dedup,
            },
            footprint: footprint.clone(),
            structures,
        })
    }

    pub fn scope(&self) -> &Scope {
        &self.scope
    }

    pub fn footprint(&self) -> &Arc<Footprint> {
        &self.footprint
    }

    pub fn structures(&self) -> &[Structure] {
        &self.structures
    }

    pub fn len(&self) -> usize {
        self.structures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.structures.is_empty()
    }

    /// Human-readable statement of what the registry ranges over.
    pub fn describe(&self) -> String {
        let n = self.structures.len();
        match &self.scope {
            Scope::Explicit { name } => format!("registry `{name}` ({n} structures)"),
            Scope::Bounded {
                footprint,
                bounds,
                iso_dedup,
            } => {
                let size = match bounds {
                    Bounds::Set { max_elements } => format!("at most {max_elements} elements"),
                    Bounds::Graph {
                        max_vertices,
                        max_edges,
                    } => format!("at most {max_vertices} vertices and {max_edges} edges"),
                };
                let iso = if *iso_dedup { ", up to isomorphism" } else { "" };
                format!("all `{footprint}` structures with {size}{iso} ({n} structures)")
            }
        }
    }
}
