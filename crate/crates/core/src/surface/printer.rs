use std::fmt::Write;

use super::{Document, Item, ObjRef, RegistryDef, RuleDef};

fn obj(r: &ObjRef) -> String {
    match &r.name {
        Some(n) => n.clone(),
        None => r.object.to_string(),
    }
}

/// Canonical text of a document; parsing it back yields an equal document.
pub fn print(doc: &Document) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "base {};", doc.base);
    for import in &doc.imports {
        let _ = writeln!(out, "import \"{import}\";");
    }
    for item in &doc.items {
        out.push('\n');
        write_item(&mut out, item);
    }
    out
}

fn write_item(out: &mut String, item: &Item) {
    let _ = match item {
        Item::Object { name, object } => writeln!(out, "object {name} = {object};"),
        Item::Morphism {
            name,
            dom,
            cod,
            morphism,
        } => writeln!(out, "morphism {name} : {} -> {} = {morphism};", obj(dom), obj(cod)),
        Item::Footprint { name, features, .. } => {
            let _ = writeln!(out, "footprint {name} {{");
            for (f, arity) in features {
                let _ = writeln!(out, "  {f} : {};", obj(arity));
            }
            writeln!(out, "}}")
        }
        Item::Expr {
            name,
            footprint,
            arity,
            expr,
        } => writeln!(out, "expr {name} over {footprint} : {} =\n  {expr};", obj(arity)),
        Item::Structure {
            name,
            footprint,
            carrier,
            structure,
        } => {
            let _ = writeln!(out, "structure {name} over {footprint} on {} {{", obj(carrier));
            for (p, (feature, _)) in structure.footprint().features().iter().enumerate() {
                let facts = structure.interpretations(p);
                if facts.is_empty() {
                    continue;
                }
                let list: Vec<String> = facts.iter().map(ToString::to_string).collect();
                let _ = writeln!(out, "  {feature} : {};", list.join(", "));
            }
            writeln!(out, "}}")
        }
        Item::Sketch {
            name,
            footprint,
            context,
            constraints,
            ..
        } => {
            let _ = writeln!(out, "sketch {name} over {footprint} on {} {{", obj(context));
            for (e, binding) in constraints {
                let _ = writeln!(out, "  constraint {e} @ {binding};");
            }
            writeln!(out, "}}")
        }
        Item::Rule { name, def, .. } => match def {
            RuleDef::Explicit { lhs, rhs, via } => match via {
                Some(r) => writeln!(out, "rule {name} : {lhs} => {rhs} via {r};"),
                None => writeln!(out, "rule {name} : {lhs} => {rhs};"),
            },
            RuleDef::Unfold(e, f) => writeln!(out, "rule {name} = unfold({e}, {f});"),
            RuleDef::Fold(e, f) => writeln!(out, "rule {name} = fold({e}, {f});"),
            RuleDef::ModusPonens(e) => writeln!(out, "rule {name} = modus_ponens({e});"),
            RuleDef::Intro(e) => writeln!(out, "rule {name} = intro({e});"),
        },
        Item::Registry {
            name,
            footprint,
            def,
        } => match def {
            RegistryDef::Explicit(names) => {
                writeln!(out, "registry {name} over {footprint} = {{ {} }};", names.join(", "))
            }
            RegistryDef::Bounded { bounds, iso } => {
                let iso = if *iso { " iso" } else { "" };
                writeln!(out, "registry {name} over {footprint} = bounds {bounds}{iso};")
            }
        },
    };
}
