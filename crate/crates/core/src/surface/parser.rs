use std::path::{Path, PathBuf};
use std::sync::Arc;

use indexmap::IndexMap;

use super::lexer::{tokenize, Tok, Token};
use super::{Document, Env, ErrorKind, Item, ObjRef, RegistryDef, RuleDef, SurfaceError};
use crate::cat::{CatObject, Edge, Kind, Morphism};
use crate::expr::{self, Expr, Quantifier};
use crate::footprint::{Bounds, Footprint, Structure};
use crate::rules::{self, SketchRule};
use crate::sketch::{Constraint, Sketch};

const RESERVED: &[&str] = &[
    "top", "bot", "not", "and", "or", "given", "exists", "forall", "into",
];

/// Parses a document. Imports are resolved against `base_dir`, or the
/// current directory when it is `None`.
pub fn parse(text: &str, base_dir: Option<&Path>) -> Result<Document, SurfaceError> {
    parse_with(text, base_dir.map(Path::to_path_buf), &mut Vec::new())
}

pub fn parse_file(path: &Path) -> Result<Document, SurfaceError> {
    let mut stack = Vec::new();
    load(path, &mut stack)
}

fn load(path: &Path, stack: &mut Vec<PathBuf>) -> Result<Document, SurfaceError> {
    let shown = path.display().to_string();
    let io = |e: std::io::Error| SurfaceError {
        kind: ErrorKind::Io,
        file: Some(shown.clone()),
        line: 0,
        column: 0,
        token: String::new(),
        message: e.to_string(),
    };
    let canonical = path.canonicalize().map_err(io)?;
    let text = std::fs::read_to_string(&canonical).map_err(io)?;
    stack.push(canonical.clone());
    let result = parse_with(&text, canonical.parent().map(Path::to_path_buf), stack);
    stack.pop();
    result.map_err(|mut e| {
        e.file.get_or_insert(shown);
        e
    })
}

/// Reads a morphism literal such as `[a->x; f->g]` between two objects.
pub fn parse_morphism(
    text: &str,
    dom: &Arc<CatObject>,
    cod: &Arc<CatObject>,
) -> Result<Morphism, SurfaceError> {
    let mut stack = Vec::new();
    let mut p = Parser {
        toks: tokenize(text)?,
        pos: 0,
        base: dom.kind(),
        env: Env::default(),
        base_dir: None,
        stack: &mut stack,
    };
    let start = p.pos;
    let pairs = p.pairs()?;
    p.expect(&Tok::Eof)?;
    p.morphism(start, dom, cod, &pairs)
}

fn parse_with(
    text: &str,
    base_dir: Option<PathBuf>,
    stack: &mut Vec<PathBuf>,
) -> Result<Document, SurfaceError> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        base: Kind::Set,
        env: Env::default(),
        base_dir,
        stack,
    };
    p.document()
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    base: Kind,
    env: Env,
    base_dir: Option<PathBuf>,
    stack: &'a mut Vec<PathBuf>,
}

type PResult<T> = Result<T, SurfaceError>;

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn advance(&mut self) -> &Token {
        let t = &self.toks[self.pos];
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, index: usize, kind: ErrorKind, message: impl Into<String>) -> SurfaceError {
        let t = &self.toks[index];
        SurfaceError {
            kind,
            file: None,
            line: t.line,
            column: t.column,
            token: t.tok.to_string(),
            message: message.into(),
        }
    }

    fn syntax(&self, message: impl Into<String>) -> SurfaceError {
        self.error_at(self.pos, ErrorKind::Syntax, message)
    }

    fn resolve(&self, index: usize, message: impl Into<String>) -> SurfaceError {
        self.error_at(index, ErrorKind::Resolve, message)
    }

    fn expect(&mut self, tok: &Tok) -> PResult<()> {
        if self.peek() == tok {
            self.advance();
            Ok(())
        } else {
            Err(self.syntax(format!("expected `{tok}`")))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.at_kw(kw) {
            self.advance();
            Ok(())
        } else {
            Err(self.syntax(format!("expected `{kw}`")))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.advance();
            true
        } else {
            false
        }
    }

    fn name(&mut self) -> PResult<(String, usize)> {
        let at = self.pos;
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.advance();
                Ok((s, at))
            }
            _ => Err(self.syntax("expected a name")),
        }
    }

    fn document(&mut self) -> PResult<Document> {
        self.expect_kw("base")?;
        let (kind, at) = self.name()?;
        self.base = match kind.as_str() {
            "set" => Kind::Set,
            "graph" => Kind::Graph,
            _ => return Err(self.resolve(at, "the base must be `set` or `graph`")),
        };
        self.expect(&Tok::Semi)?;
        let mut imports = Vec::new();
        let mut items = Vec::new();
        while self.peek() != &Tok::Eof {
            let (kw, at) = self.name()?;
            match kw.as_str() {
                "import" => imports.push(self.import()?),
                "object" => items.push(self.object_decl()?),
                "morphism" => items.push(self.morphism_decl()?),
                "footprint" => items.push(self.footprint_decl()?),
                "expr" => items.push(self.expr_decl()?),
                "structure" => items.push(self.structure_decl()?),
                "sketch" => items.push(self.sketch_decl()?),
                "rule" => items.push(self.rule_decl()?),
                "registry" => items.push(self.registry_decl()?),
                _ => return Err(self.error_at(at, ErrorKind::Syntax, "expected a declaration")),
            }
        }
        Ok(Document {
            base: self.base,
            imports,
            items,
            env: std::mem::take(&mut self.env),
        })
    }

    fn import(&mut self) -> PResult<String> {
        let at = self.pos;
        let Tok::Str(path) = self.peek().clone() else {
            return Err(self.syntax("expected a quoted path"));
        };
        self.advance();
        self.expect(&Tok::Semi)?;
        let full = match &self.base_dir {
            Some(dir) => dir.join(&path),
            None => PathBuf::from(&path),
        };
        if let Ok(canonical) = full.canonicalize() {
            if self.stack.contains(&canonical) {
                return Err(self.resolve(at, "import cycle"));
            }
        }
        let doc = load(&full, self.stack)?;
        if doc.base != self.base {
            return Err(self.resolve(at, format!("imported document has base {}", doc.base)));
        }
        let env = doc.env;
        merge(&mut self.env.objects, env.objects).map_err(|n| self.clash(at, &n))?;
        merge(&mut self.env.morphisms, env.morphisms).map_err(|n| self.clash(at, &n))?;
        merge(&mut self.env.footprints, env.footprints).map_err(|n| self.clash(at, &n))?;
        merge(&mut self.env.exprs, env.exprs).map_err(|n| self.clash(at, &n))?;
        merge(&mut self.env.structures, env.structures).map_err(|n| self.clash(at, &n))?;
        merge(&mut self.env.sketches, env.sketches).map_err(|n| self.clash(at, &n))?;
        merge(&mut self.env.rules, env.rules).map_err(|n| self.clash(at, &n))?;
        merge(&mut self.env.registries, env.registries).map_err(|n| self.clash(at, &n))?;
        Ok(path)
    }

    fn clash(&self, at: usize, name: &str) -> SurfaceError {
        self.resolve(at, format!("`{name}` is already defined"))
    }

    fn fresh<V>(&self, map: &IndexMap<String, V>, name: &str, at: usize) -> PResult<()> {
        if map.contains_key(name) {
            Err(self.clash(at, name))
        } else {
            Ok(())
        }
    }

    // Objects and morphisms.

    fn obj_ref(&mut self) -> PResult<ObjRef> {
        if self.at_kw("obj") {
            return Ok(ObjRef {
                name: None,
                object: Arc::new(self.obj_literal()?),
            });
        }
        let (name, at) = self.name()?;
        let object = self
            .env
            .objects
            .get(&name)
            .cloned()
            .ok_or_else(|| self.resolve(at, format!("unknown object `{name}`")))?;
        Ok(ObjRef {
            name: Some(name),
            object,
        })
    }

    fn obj_literal(&mut self) -> PResult<CatObject> {
        let start = self.pos;
        self.expect_kw("obj")?;
        self.expect(&Tok::LBrace)?;
        let mut vertices: Vec<String> = Vec::new();
        let mut edges: Vec<(String, String, String, usize)> = Vec::new();
        match self.base {
            Kind::Set => {
                while self.peek() != &Tok::RBrace {
                    vertices.push(self.name()?.0);
                }
            }
            Kind::Graph => loop {
                if self.at_kw("v") {
                    self.advance();
                    while self.peek() != &Tok::Semi {
                        vertices.push(self.name()?.0);
                    }
                    self.advance();
                } else if self.at_kw("e") {
                    self.advance();
                    let (name, at) = self.name()?;
                    self.expect(&Tok::Colon)?;
                    let (s, _) = self.name()?;
                    self.expect(&Tok::Arrow)?;
                    let (t, _) = self.name()?;
                    self.expect(&Tok::Semi)?;
                    edges.push((name, s, t, at));
                } else if self.peek() == &Tok::RBrace {
                    break;
                } else {
                    return Err(self.syntax("expected `v`, `e`, or `}`"));
                }
            },
        }
        self.expect(&Tok::RBrace)?;
        let mut built = Vec::with_capacity(edges.len());
        for (name, s, t, at) in edges {
            let pos = |n: &str| vertices.iter().position(|v| v == n);
            let (Some(source), Some(target)) = (pos(&s), pos(&t)) else {
                return Err(self.resolve(at, format!("edge `{name}` has an undeclared endpoint")));
            };
            built.push(Edge {
                name,
                source,
                target,
            });
        }
        CatObject::from_parts(self.base, vertices, built).map_err(|e| self.resolve(start, e.to_string()))
    }

    fn pairs(&mut self) -> PResult<Vec<(String, String)>> {
        self.expect(&Tok::LBracket)?;
        let mut out = Vec::new();
        while self.peek() != &Tok::RBracket {
            let (from, _) = self.name()?;
            self.expect(&Tok::Arrow)?;
            let (to, _) = self.name()?;
            out.push((from, to));
            if !self.eat(&Tok::Semi) && !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(&Tok::RBracket)?;
        Ok(out)
    }

    fn morphism(
        &self,
        at: usize,
        dom: &Arc<CatObject>,
        cod: &Arc<CatObject>,
        pairs: &[(String, String)],
    ) -> PResult<Morphism> {
        let refs: Vec<(&str, &str)> = pairs.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        Morphism::from_pairs(dom.clone(), cod.clone(), &refs).map_err(|e| self.resolve(at, e.to_string()))
    }

    fn object_decl(&mut self) -> PResult<Item> {
        let (name, at) = self.name()?;
        self.fresh(&self.env.objects, &name, at)?;
        self.expect(&Tok::Eq)?;
        let object = self.obj_ref()?.object;
        self.expect(&Tok::Semi)?;
        self.env.objects.insert(name.clone(), object.clone());
        Ok(Item::Object { name, object })
    }

    fn morphism_decl(&mut self) -> PResult<Item> {
        let (name, at) = self.name()?;
        self.fresh(&self.env.morphisms, &name, at)?;
        self.expect(&Tok::Colon)?;
        let dom = self.obj_ref()?;
        self.expect(&Tok::Arrow)?;
        let cod = self.obj_ref()?;
        self.expect(&Tok::Eq)?;
        let lit = self.pos;
        let pairs = self.pairs()?;
        self.expect(&Tok::Semi)?;
        let morphism = self.morphism(lit, &dom.object, &cod.object, &pairs)?;
        self.env.morphisms.insert(name.clone(), morphism.clone());
        Ok(Item::Morphism {
            name,
            dom,
            cod,
            morphism,
        })
    }

    // Footprints and expressions.

    fn footprint_decl(&mut self) -> PResult<Item> {
        let (name, at) = self.name()?;
        self.fresh(&self.env.footprints, &name, at)?;
        self.expect(&Tok::LBrace)?;
        let mut features = Vec::new();
        while self.peek() != &Tok::RBrace {
            let (feature, fat) = self.name()?;
            if RESERVED.contains(&feature.as_str()) {
                return Err(self.resolve(fat, format!("`{feature}` is reserved")));
            }
            self.expect(&Tok::Colon)?;
            let arity = self.obj_ref()?;
            self.expect(&Tok::Semi)?;
            features.push((feature, arity));
        }
        self.expect(&Tok::RBrace)?;
        let footprint = Footprint::new(
            name.clone(),
            self.base,
            features.iter().map(|(f, a)| (f.clone(), a.object.clone())).collect(),
        )
        .map_err(|e| self.resolve(at, e.to_string()))?;
        let footprint = Arc::new(footprint);
        self.env.footprints.insert(name.clone(), footprint.clone());
        Ok(Item::Footprint {
            name,
            features,
            footprint,
        })
    }

    fn over(&mut self) -> PResult<(String, Arc<Footprint>)> {
        self.expect_kw("over")?;
        let (name, at) = self.name()?;
        let fp = self
            .env
            .footprints
            .get(&name)
            .cloned()
            .ok_or_else(|| self.resolve(at, format!("unknown footprint `{name}`")))?;
        Ok((name, fp))
    }

    fn expr_decl(&mut self) -> PResult<Item> {
        let (name, at) = self.name()?;
        self.fresh(&self.env.exprs, &name, at)?;
        let (fp_name, fp) = self.over()?;
        self.expect(&Tok::Colon)?;
        let arity = self.obj_ref()?;
        self.expect(&Tok::Eq)?;
        let start = self.pos;
        let expr = self.expr(&fp, &arity.object)?;
        self.expect(&Tok::Semi)?;
        expr::wf_check(&expr, &fp).map_err(|e| self.resolve(start, e.to_string()))?;
        self.env.exprs.insert(name.clone(), (fp_name.clone(), expr.clone()));
        Ok(Item::Expr {
            name,
            footprint: fp_name,
            arity,
            expr,
        })
    }

    fn expr(&mut self, fp: &Footprint, arity: &Arc<CatObject>) -> PResult<Expr> {
        let mut left = self.conjunction(fp, arity)?;
        while self.at_kw("or") {
            self.advance();
            let right = self.conjunction(fp, arity)?;
            left = Expr::or(left, right);
        }
        Ok(left)
    }

    fn conjunction(&mut self, fp: &Footprint, arity: &Arc<CatObject>) -> PResult<Expr> {
        let mut left = self.unary(fp, arity)?;
        while self.at_kw("and") {
            self.advance();
            let right = self.unary(fp, arity)?;
            left = Expr::and(left, right);
        }
        Ok(left)
    }

    fn unary(&mut self, fp: &Footprint, arity: &Arc<CatObject>) -> PResult<Expr> {
        if self.at_kw("not") {
            self.advance();
            return Ok(Expr::negate(self.unary(fp, arity)?));
        }
        if self.at_kw("given") {
            self.advance();
            let premise = self.unary(fp, arity)?;
            return self.quantifier(fp, arity, premise);
        }
        if self.at_kw("exists") || self.at_kw("forall") {
            return self.quantifier(fp, arity, Expr::top(arity.clone()));
        }
        self.atom(fp, arity)
    }

    fn quantifier(&mut self, fp: &Footprint, arity: &Arc<CatObject>, premise: Expr) -> PResult<Expr> {
        let q = if self.at_kw("exists") {
            Quantifier::Exists
        } else if self.at_kw("forall") {
            Quantifier::Forall
        } else {
            return Err(self.syntax("expected `exists` or `forall`"));
        };
        self.advance();
        let lit = self.pos;
        let pairs = if self.peek() == &Tok::LBracket {
            Some(self.pairs()?)
        } else {
            None
        };
        self.expect_kw("into")?;
        let into = self.pos;
        let target = Arc::new(self.obj_literal_or_named()?);
        self.expect(&Tok::Dot)?;
        let along = match pairs {
            Some(pairs) => self.morphism(lit, arity, &target, &pairs)?,
            None => Morphism::inclusion(arity.clone(), target.clone())
                .map_err(|e| self.resolve(into, e.to_string()))?,
        };
        let body = self.expr(fp, &target)?;
        Ok(Expr::quant(q, premise, along, body))
    }

    fn obj_literal_or_named(&mut self) -> PResult<CatObject> {
        Ok((*self.obj_ref()?.object).clone())
    }

    fn atom(&mut self, fp: &Footprint, arity: &Arc<CatObject>) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::LParen => {
                self.advance();
                let e = self.expr(fp, arity)?;
                self.expect(&Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(s) if s == "top" => {
                self.advance();
                Ok(Expr::top(arity.clone()))
            }
            Tok::Ident(s) if s == "bot" => {
                self.advance();
                Ok(Expr::bot(arity.clone()))
            }
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                let at = self.pos;
                self.advance();
                let feature_arity = fp
                    .arity(&s)
                    .cloned()
                    .ok_or_else(|| self.resolve(at, format!("`{s}` is not a feature of `{}`", fp.name())))?;
                let delta = if self.peek() == &Tok::LBracket {
                    let lit = self.pos;
                    let pairs = self.pairs()?;
                    self.morphism(lit, &feature_arity, arity, &pairs)?
                } else {
                    Morphism::inclusion(feature_arity, arity.clone())
                        .map_err(|e| self.resolve(at, e.to_string()))?
                };
                Ok(Expr::atomic(s, delta))
            }
            _ => Err(self.syntax("expected an expression")),
        }
    }

    // Structures, sketches, rules, registries.

    fn structure_decl(&mut self) -> PResult<Item> {
        let (name, at) = self.name()?;
        self.fresh(&self.env.structures, &name, at)?;
        let (fp_name, fp) = self.over()?;
        self.expect_kw("on")?;
        let carrier = self.obj_ref()?;
        self.expect(&Tok::LBrace)?;
        let mut facts: Vec<(String, Vec<Morphism>)> = Vec::new();
        while self.peek() != &Tok::RBrace {
            let (feature, fat) = self.name()?;
            let arity = fp
                .arity(&feature)
                .cloned()
                .ok_or_else(|| self.resolve(fat, format!("`{feature}` is not a feature of `{fp_name}`")))?;
            self.expect(&Tok::Colon)?;
            let mut ms = Vec::new();
            while self.peek() == &Tok::LBracket {
                let lit = self.pos;
                let pairs = self.pairs()?;
                ms.push(self.morphism(lit, &arity, &carrier.object, &pairs)?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(&Tok::Semi)?;
            facts.push((feature, ms));
        }
        self.expect(&Tok::RBrace)?;
        let structure = Structure::new(name.clone(), fp, carrier.object.clone(), facts)
            .map_err(|e| self.resolve(at, e.to_string()))?;
        let structure = Arc::new(structure);
        self.env
            .structures
            .insert(name.clone(), (fp_name.clone(), structure.clone()));
        Ok(Item::Structure {
            name,
            footprint: fp_name,
            carrier,
            structure,
        })
    }

    fn sketch_decl(&mut self) -> PResult<Item> {
        let (name, at) = self.name()?;
        self.fresh(&self.env.sketches, &name, at)?;
        let (fp_name, _) = self.over()?;
        self.expect_kw("on")?;
        let context = self.obj_ref()?;
        self.expect(&Tok::LBrace)?;
        let mut written = Vec::new();
        let mut constraints = Vec::new();
        while self.peek() != &Tok::RBrace {
            self.expect_kw("constraint")?;
            let (ename, eat) = self.name()?;
            let (efp, e) = self
                .env
                .exprs
                .get(&ename)
                .cloned()
                .ok_or_else(|| self.resolve(eat, format!("unknown expression `{ename}`")))?;
            if efp != fp_name {
                return Err(self.resolve(eat, format!("`{ename}` is over `{efp}`, not `{fp_name}`")));
            }
            self.expect(&Tok::At)?;
            let lit = self.pos;
            let pairs = self.pairs()?;
            self.expect(&Tok::Semi)?;
            let binding = self.morphism(lit, e.arity(), &context.object, &pairs)?;
            constraints.push(Constraint::new(e, binding.clone()).map_err(|err| self.resolve(lit, err.to_string()))?);
            written.push((ename, binding));
        }
        self.expect(&Tok::RBrace)?;
        let sketch = Sketch::new(name.clone(), context.object.clone(), constraints)
            .map_err(|e| self.resolve(at, e.to_string()))?;
        self.env
            .sketches
            .insert(name.clone(), (fp_name.clone(), sketch.clone()));
        Ok(Item::Sketch {
            name,
            footprint: fp_name,
            context,
            constraints: written,
            sketch,
        })
    }

    fn named_sketch(&mut self) -> PResult<(String, String, Sketch)> {
        let (name, at) = self.name()?;
        let (fp, s) = self
            .env
            .sketches
            .get(&name)
            .cloned()
            .ok_or_else(|| self.resolve(at, format!("unknown sketch `{name}`")))?;
        Ok((name, fp, s))
    }

    fn named_expr(&mut self) -> PResult<(String, String, Expr)> {
        let (name, at) = self.name()?;
        let (fp, e) = self
            .env
            .exprs
            .get(&name)
            .cloned()
            .ok_or_else(|| self.resolve(at, format!("unknown expression `{name}`")))?;
        Ok((name, fp, e))
    }

    fn rule_decl(&mut self) -> PResult<Item> {
        let (name, at) = self.name()?;
        self.fresh(&self.env.rules, &name, at)?;
        let (footprint, def, rule) = if self.eat(&Tok::Colon) {
            let (lname, lfp, lhs) = self.named_sketch()?;
            self.expect(&Tok::FatArrow)?;
            let rat = self.pos;
            let (rname, rfp, rhs) = self.named_sketch()?;
            if lfp != rfp {
                return Err(self.resolve(rat, "both sides of a rule must share a footprint"));
            }
            let via = if self.at_kw("via") {
                self.advance();
                let lit = self.pos;
                let pairs = self.pairs()?;
                Some(self.morphism(lit, lhs.context(), rhs.context(), &pairs)?)
            } else {
                None
            };
            self.expect(&Tok::Semi)?;
            let r = match &via {
                Some(r) => r.clone(),
                None => Morphism::inclusion(lhs.context().clone(), rhs.context().clone())
                    .map_err(|e| self.resolve(rat, e.to_string()))?,
            };
            let rule = SketchRule::new(name.clone(), lhs, rhs, r).map_err(|e| self.resolve(at, e.to_string()))?;
            let def = RuleDef::Explicit {
                lhs: lname,
                rhs: rname,
                via,
            };
            (lfp, def, rule)
        } else {
            self.expect(&Tok::Eq)?;
            let (builder, bat) = self.name()?;
            self.expect(&Tok::LParen)?;
            let (e1, fp1, x1) = self.named_expr()?;
            let second = if self.eat(&Tok::Comma) {
                Some(self.named_expr()?)
            } else {
                None
            };
            self.expect(&Tok::RParen)?;
            self.expect(&Tok::Semi)?;
            if let Some((_, fp2, _)) = &second {
                if *fp2 != fp1 {
                    return Err(self.resolve(bat, "operands over different footprints"));
                }
            }
            let built = match (builder.as_str(), second) {
                ("unfold", Some((e2, _, x2))) => {
                    rules::unfold(&x1, &x2).map(|r| (RuleDef::Unfold(e1, e2), r))
                }
                ("fold", Some((e2, _, x2))) => rules::fold(&x1, &x2).map(|r| (RuleDef::Fold(e1, e2), r)),
                ("modus_ponens", None) => rules::modus_ponens(&x1).map(|r| (RuleDef::ModusPonens(e1), r)),
                ("intro", None) => Ok((RuleDef::Intro(e1), rules::intro(&x1))),
                _ => {
                    return Err(self.resolve(
                        bat,
                        "expected unfold(e, f), fold(e, f), modus_ponens(e), or intro(e)",
                    ))
                }
            };
            let (def, rule) = built.map_err(|e| self.resolve(bat, e.to_string()))?;
            (fp1, def, rule.with_name(name.clone()))
        };
        self.env
            .rules
            .insert(name.clone(), (footprint.clone(), rule.clone()));
        Ok(Item::Rule {
            name,
            footprint,
            def,
            rule,
        })
    }

    fn registry_decl(&mut self) -> PResult<Item> {
        let (name, at) = self.name()?;
        self.fresh(&self.env.registries, &name, at)?;
        let (fp_name, fp) = self.over()?;
        self.expect(&Tok::Eq)?;
        let def = if self.eat(&Tok::LBrace) {
            let mut names = Vec::new();
            while self.peek() != &Tok::RBrace {
                let (s, sat) = self.name()?;
                match self.env.structures.get(&s) {
                    None => return Err(self.resolve(sat, format!("unknown structure `{s}`"))),
                    Some((sfp, _)) if *sfp != fp_name => {
                        return Err(self.resolve(sat, format!("`{s}` is over `{sfp}`, not `{fp_name}`")))
                    }
                    Some(_) => names.push(s),
                }
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(&Tok::RBrace)?;
            RegistryDef::Explicit(names)
        } else {
            self.expect_kw("bounds")?;
            let bat = self.pos;
            let (mut text, _) = self.name()?;
            if self.eat(&Tok::Comma) {
                text.push(',');
                text.push_str(&self.name()?.0);
            }
            let bounds = Bounds::parse_for(&text, fp.kind()).map_err(|e| self.resolve(bat, e.to_string()))?;
            let iso = if self.at_kw("iso") {
                self.advance();
                true
            } else {
                false
            };
            // Refuse oversized bounds here rather than at first use.
            let estimate =
                crate::footprint::structure_estimate(&fp, bounds).map_err(|e| self.resolve(bat, e.to_string()))?;
            if estimate > crate::footprint::STRUCTURE_CAP {
                let err = crate::Error::TooLarge {
                    estimate,
                    cap: crate::footprint::STRUCTURE_CAP,
                };
                return Err(self.resolve(bat, err.to_string()));
            }
            RegistryDef::Bounded { bounds, iso }
        };
        self.expect(&Tok::Semi)?;
        self.env
            .registries
            .insert(name.clone(), (fp_name.clone(), def.clone()));
        Ok(Item::Registry {
            name,
            footprint: fp_name,
            def,
        })
    }
}

fn merge<V>(into: &mut IndexMap<String, V>, from: IndexMap<String, V>) -> Result<(), String> {
    for (k, v) in from {
        if into.contains_key(&k) {
            return Err(k);
        }
        into.insert(k, v);
    }
    Ok(())
}
