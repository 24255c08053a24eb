use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lfoc::cat::{self, Morphism};
use lfoc::expr;
use lfoc::footprint::{Bounds, Registry};
use lfoc::rules::{self, Limits, Match, SketchRule, Status};
use lfoc::sketch::{self, Interpretation, Sketch, Verdict, Witness};
use lfoc::surface::{self, json, Document};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "lfoc", version, about = "Check first-order constraints, sketches, and sketch rules")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Scope {
    /// Registry declared in the document, or a `.lfoc` file whose structures form the registry.
    #[arg(long, value_name = "NAME|FILE")]
    registry: Option<String>,
    /// Enumerate every structure on carriers up to N elements (sets) or N vertices and M edges (graphs).
    #[arg(long, value_name = "N[,M]", conflicts_with = "registry")]
    max_carrier: Option<String>,
    /// Keep one structure per isomorphism class when enumerating.
    #[arg(long, requires = "max_carrier")]
    iso: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solutions of an expression in a structure.
    Solve { file: PathBuf, expr: String, structure: String },
    /// Whether an interpretation of a sketch's context satisfies every constraint.
    Check {
        file: PathBuf,
        sketch: String,
        structure: String,
        /// Map from the sketch context into the carrier, e.g. `[x->a; y->b]`.
        #[arg(long)]
        map: String,
    },
    /// Every model of a sketch in a structure.
    Models { file: PathBuf, sketch: String, structure: String },
    /// Whether the first sketch's constraints entail the second's over a registry.
    Entail {
        file: PathBuf,
        premises: String,
        conclusions: String,
        #[command(flatten)]
        scope: Scope,
    },
    /// Whether a context map is a sketch morphism over a registry.
    Morphism {
        file: PathBuf,
        from: String,
        to: String,
        /// Context map; defaults to the identity when the contexts coincide.
        #[arg(long)]
        map: Option<String>,
        #[command(flatten)]
        scope: Scope,
    },
    /// Pushout of two named morphisms, or of two sketches along them.
    Pushout {
        file: PathBuf,
        left: String,
        right: String,
        #[arg(long, requires = "right_sketch")]
        left_sketch: Option<String>,
        #[arg(long, requires = "left_sketch")]
        right_sketch: Option<String>,
    },
    /// Matches of a rule's left side in a sketch.
    Match { file: PathBuf, rule: String, sketch: String },
    /// Whether a sketch is closed under a rule.
    Closed { file: PathBuf, sketch: String, rule: String },
    /// Whether a rule is conservative for a structure.
    Conservative { file: PathBuf, rule: String, structure: String },
    /// Whether a rule is sound over a registry.
    Sound {
        file: PathBuf,
        rule: String,
        #[command(flatten)]
        scope: Scope,
    },
    /// Applies a rule at a match (the first unclosed one by default).
    Apply {
        file: PathBuf,
        rule: String,
        sketch: String,
        #[arg(long)]
        map: Option<String>,
    },
    /// Applies rules until closed or a budget runs out.
    Saturate {
        file: PathBuf,
        sketch: String,
        #[arg(required = true)]
        rules: Vec<String>,
        #[arg(long, default_value_t = Limits::default().max_steps)]
        max_steps: usize,
        #[arg(long, default_value_t = Limits::default().max_vertices)]
        max_vertices: usize,
        #[arg(long, default_value_t = Limits::default().max_edges)]
        max_edges: usize,
    },
    /// Minimal sketch of a structure, or the maximal one over given expressions.
    Elemdiag {
        file: PathBuf,
        structure: String,
        /// Build the maximal sketch over these expressions instead.
        #[arg(long, num_args = 1..)]
        max: Option<Vec<String>>,
    },
    /// Compares conservativity with closedness of the maximal sketch.
    Equiv { file: PathBuf, rule: String, structure: String },
}

/// A failure that ends the run with exit code 2.
struct Usage(String);

impl<E: std::fmt::Display> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.to_string())
    }
}

type Run = Result<(Value, bool), Usage>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = command_name(&cli.command);
    match run(cli.command) {
        Ok((result, holds)) => {
            println!("{}", json::envelope(name, result));
            if holds {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Usage(msg)) => {
            println!("{}", json::envelope(name, json!({ "error": msg })));
            eprintln!("lfoc {name}: {msg}");
            ExitCode::from(2)
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Solve { .. } => "solve",
        Command::Check { .. } => "check",
        Command::Models { .. } => "models",
        Command::Entail { .. } => "entail",
        Command::Morphism { .. } => "morphism",
        Command::Pushout { .. } => "pushout",
        Command::Match { .. } => "match",
        Command::Closed { .. } => "closed",
        Command::Conservative { .. } => "conservative",
        Command::Sound { .. } => "sound",
        Command::Apply { .. } => "apply",
        Command::Saturate { .. } => "saturate",
        Command::Elemdiag { .. } => "elemdiag",
        Command::Equiv { .. } => "equiv",
    }
}

fn load(path: &Path) -> Result<Document, Usage> {
    surface::parse_file(path).map_err(|e| Usage(e.to_string()))
}

fn lookup<'a, T>(found: Option<&'a T>, what: &str, name: &str) -> Result<&'a T, Usage> {
    found.ok_or_else(|| Usage(format!("no {what} named `{name}`")))
}

fn verdict(v: Verdict) -> Run {
    let holds = v.holds;
    Ok((json::verdict(&v), holds))
}

fn scope_registry(doc: &Document, footprint: &str, scope: &Scope) -> Result<Registry, Usage> {
    let fp = lookup(doc.footprint(footprint), "footprint", footprint)?;
    if let Some(spec) = &scope.max_carrier {
        let bounds = Bounds::parse_for(spec, fp.kind())?;
        return Ok(Registry::bounded(fp, bounds, scope.iso)?);
    }
    let Some(name) = &scope.registry else {
        return Err(Usage("this command needs --registry or --max-carrier".into()));
    };
    if let Some(reg) = doc.registry(name) {
        return Ok(reg?);
    }
    let path = Path::new(name);
    if !path.exists() {
        return Err(Usage(format!("no registry or file named `{name}`")));
    }
    let other = load(path)?;
    let structures = other
        .env
        .structures
        .values()
        .filter(|(f, s)| f == footprint || s.footprint() == fp)
        .map(|(_, s)| (**s).clone())
        .collect();
    Ok(Registry::explicit(name.as_str(), fp.clone(), structures)?)
}

fn footprint_of<'a>(doc: &'a Document, name: &str) -> Result<&'a str, Usage> {
    doc.footprint_of(name)
        .ok_or_else(|| Usage(format!("`{name}` declares no footprint")))
}

fn maps(ms: impl IntoIterator<Item = Morphism>) -> Value {
    Value::Array(ms.into_iter().map(|m| json::morphism(&m)).collect())
}

fn first_unclosed(k: &Sketch, rule: &SketchRule) -> Result<Option<Match>, Usage> {
    Ok(rules::closedness_witness(k, rule)?)
}

fn run(command: Command) -> Run {
    match command {
        Command::Solve { file, expr: e, structure } => {
            let doc = load(&file)?;
            let ex = lookup(doc.expr(&e), "expression", &e)?;
            let u = lookup(doc.structure(&structure), "structure", &structure)?;
            let sols = expr::solutions(ex, u)?;
            Ok((json!({ "expr": e, "structure": structure, "solutions": maps(sols) }), true))
        }
        Command::Check { file, sketch: s, structure, map } => {
            let doc = load(&file)?;
            let k = lookup(doc.sketch(&s), "sketch", &s)?;
            let u = lookup(doc.structure(&structure), "structure", &structure)?;
            let a = surface::parse_morphism(&map, k.context(), u.carrier())?;
            let i = Interpretation::new(a.clone(), u)?;
            let mut failing = None;
            for c in k.constraints() {
                if !sketch::satisfies(&i, c)? {
                    failing = Some(c);
                    break;
                }
            }
            let witness = failing.map(|c| {
                json::witness(&Witness {
                    structure: u.name().to_string(),
                    assignment: a.clone(),
                    reason: format!("violates `{}` at {}", c.expr(), c.binding()),
                })
            });
            let holds = failing.is_none();
            Ok((
                json!({
                    "holds": holds,
                    "scope": format!("interpretation into structure `{}`", u.name()),
                    "witness": witness,
                }),
                holds,
            ))
        }
        Command::Models { file, sketch: s, structure } => {
            let doc = load(&file)?;
            let k = lookup(doc.sketch(&s), "sketch", &s)?;
            let u = lookup(doc.structure(&structure), "structure", &structure)?;
            let ms = sketch::models(k, u)?;
            Ok((
                json!({
                    "sketch": s,
                    "structure": structure,
                    "models": maps(ms.into_iter().map(|i| i.map)),
                }),
                true,
            ))
        }
        Command::Entail {
            file,
            premises,
            conclusions,
            scope,
        } => {
            let doc = load(&file)?;
            let p = lookup(doc.sketch(&premises), "sketch", &premises)?;
            let c = lookup(doc.sketch(&conclusions), "sketch", &conclusions)?;
            if p.context() != c.context() {
                return Err(Usage(format!("`{premises}` and `{conclusions}` have different contexts")));
            }
            let reg = scope_registry(&doc, footprint_of(&doc, &premises)?, &scope)?;
            verdict(sketch::entails(p.context(), p.constraints(), c.constraints(), &reg)?)
        }
        Command::Morphism {
            file,
            from,
            to,
            map,
            scope,
        } => {
            let doc = load(&file)?;
            let s = lookup(doc.sketch(&from), "sketch", &from)?;
            let t = lookup(doc.sketch(&to), "sketch", &to)?;
            let phi = match map {
                Some(m) => surface::parse_morphism(&m, s.context(), t.context())?,
                None if s.context() == t.context() => cat::identity(s.context()),
                None => return Err(Usage("contexts differ; give --map".into())),
            };
            let reg = scope_registry(&doc, footprint_of(&doc, &from)?, &scope)?;
            verdict(sketch::check_sketch_morphism(&phi, s, t, &reg)?)
        }
        Command::Pushout {
            file,
            left,
            right,
            left_sketch,
            right_sketch,
        } => {
            let doc = load(&file)?;
            let f = lookup(doc.morphism(&left), "morphism", &left)?;
            let g = lookup(doc.morphism(&right), "morphism", &right)?;
            if let (Some(ls), Some(rs)) = (left_sketch, right_sketch) {
                let l = lookup(doc.sketch(&ls), "sketch", &ls)?;
                let r = lookup(doc.sketch(&rs), "sketch", &rs)?;
                let po = sketch::sketch_pushout(f, g, l, r)?;
                return Ok((
                    json!({
                        "sketch": json::sketch(&po.sketch),
                        "inj_left": json::morphism(&po.inj_left),
                        "inj_right": json::morphism(&po.inj_right),
                    }),
                    true,
                ));
            }
            let po = cat::pushout(f, g)?;
            Ok((
                json!({
                    "apex": json::object(&po.apex),
                    "inj_left": json::morphism(&po.inj_left),
                    "inj_right": json::morphism(&po.inj_right),
                }),
                true,
            ))
        }
        Command::Match { file, rule, sketch: s } => {
            let doc = load(&file)?;
            let r = lookup(doc.rule(&rule), "rule", &rule)?;
            let k = lookup(doc.sketch(&s), "sketch", &s)?;
            let found = rules::find_matches(r.lhs(), k)?;
            Ok((
                json!({ "rule": rule, "sketch": s, "matches": maps(found.into_iter().map(|m| m.phi)) }),
                true,
            ))
        }
        Command::Closed { file, sketch: s, rule } => {
            let doc = load(&file)?;
            let r = lookup(doc.rule(&rule), "rule", &rule)?;
            let k = lookup(doc.sketch(&s), "sketch", &s)?;
            let failing = first_unclosed(k, r)?;
            let holds = failing.is_none();
            Ok((
                json!({
                    "holds": holds,
                    "scope": format!("sketch `{s}`"),
                    "witness": failing.as_ref().map(json::matched),
                }),
                holds,
            ))
        }
        Command::Conservative { file, rule, structure } => {
            let doc = load(&file)?;
            let r = lookup(doc.rule(&rule), "rule", &rule)?;
            let u = lookup(doc.structure(&structure), "structure", &structure)?;
            verdict(rules::is_conservative(u, r)?)
        }
        Command::Sound { file, rule, scope } => {
            let doc = load(&file)?;
            let r = lookup(doc.rule(&rule), "rule", &rule)?;
            let reg = scope_registry(&doc, footprint_of(&doc, &rule)?, &scope)?;
            verdict(rules::is_sound(r, &reg)?)
        }
        Command::Apply {
            file,
            rule,
            sketch: s,
            map,
        } => {
            let doc = load(&file)?;
            let r = lookup(doc.rule(&rule), "rule", &rule)?;
            let k = lookup(doc.sketch(&s), "sketch", &s)?;
            let at = match map {
                Some(m) => Match {
                    phi: surface::parse_morphism(&m, r.lhs().context(), k.context())?,
                },
                None => match first_unclosed(k, r)? {
                    Some(m) => m,
                    None => return Err(Usage(format!("`{s}` is already closed under `{rule}`; give --map"))),
                },
            };
            let out = rules::apply_rule(k, r, &at)?;
            Ok((json!({ "match": json::matched(&at), "sketch": json::sketch(&out) }), true))
        }
        Command::Saturate {
            file,
            sketch: s,
            rules: names,
            max_steps,
            max_vertices,
            max_edges,
        } => {
            let doc = load(&file)?;
            let k = lookup(doc.sketch(&s), "sketch", &s)?;
            let rs: Vec<SketchRule> = names
                .iter()
                .map(|n| lookup(doc.rule(n), "rule", n).cloned())
                .collect::<Result<_, _>>()?;
            let limits = Limits {
                max_steps,
                max_vertices,
                max_edges,
            };
            let sat = rules::saturate(k, &rs, limits)?;
            let closed = sat.status == Status::Closed;
            Ok((json::saturation(&sat), closed))
        }
        Command::Elemdiag { file, structure, max } => {
            let doc = load(&file)?;
            let u = lookup(doc.structure(&structure), "structure", &structure)?;
            let k = match max {
                None => sketch::structure_to_sketch_min(u),
                Some(names) => {
                    let universe: Vec<_> = names
                        .iter()
                        .map(|n| lookup(doc.expr(n), "expression", n).cloned())
                        .collect::<Result<_, _>>()?;
                    sketch::structure_to_sketch_max(u, &universe)?
                }
            };
            Ok((json::sketch(&k), true))
        }
        Command::Equiv { file, rule, structure } => {
            let doc = load(&file)?;
            let r = lookup(doc.rule(&rule), "rule", &rule)?;
            let u = lookup(doc.structure(&structure), "structure", &structure)?;
            let eq = rules::check_equivalence(u, r)?;
            let agree = eq.agree();
            Ok((
                json!({
                    "agree": agree,
                    "conservative": json::verdict(&eq.conservative),
                    "closed": eq.closed,
                    "failing_match": eq.failing_match.as_ref().map(json::matched),
                    "scope": format!("structure `{}`", u.name()),
                }),
                agree,
            ))
        }
    }
}
