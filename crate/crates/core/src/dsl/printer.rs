use std::fmt::Write;

use super::parser::{axiom_order, normalize};
use super::{BlendDecl, MatchDecl, ScenarioDecl, Workspace};
use crate::dynamics::{ratio_str, FStep, Ratio};
use crate::morphism::SemioticMorphism;
use crate::system::{Axiom, RelKind, SignSystem};

/// Canonical text: systems, morphisms, scenarios, blends, each sorted by
/// name, with declarations sorted by category then name.
pub fn print(ws: &Workspace) -> String {
    let mut blocks = Vec::new();
    blocks.extend(ws.systems.values().map(print_system));
    blocks.extend(ws.morphisms.values().map(print_morphism));
    blocks.extend(ws.scenarios.values().map(print_scenario));
    blocks.extend(ws.blends.values().map(print_blend));
    blocks.join("\n")
}

fn number(r: &Ratio) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        ratio_str(r)
    }
}

fn axiom_line(out: &mut String, indent: &str, a: &Axiom) {
    writeln!(out, "{indent}{a};").unwrap();
}

pub fn print_system(sys: &SignSystem) -> String {
    let mut out = format!("system {} {{\n", sys.name);
    let i = "  ";
    for s in sys.sorts.values() {
        writeln!(out, "{i}sort {} level {};", s.name, s.level).unwrap();
    }
    for d in sys.data_sorts.keys() {
        writeln!(out, "{i}data {d};").unwrap();
    }
    for (a, b) in &sys.subsorts {
        writeln!(out, "{i}subsort {a} < {b};").unwrap();
    }
    for c in sys.ctors.values() {
        ctor_line(&mut out, i, c);
    }
    for r in sys.rels.values() {
        rel_line(&mut out, i, r);
    }
    let mut axioms: Vec<&Axiom> = sys.axioms.values().collect();
    axioms.sort_by_key(|a| (axiom_order(a), &a.name));
    for a in axioms {
        axiom_line(&mut out, i, a);
    }
    out.push_str("}\n");
    out
}

fn ctor_line(out: &mut String, indent: &str, c: &crate::system::Constructor) {
    let args: String = c.args.iter().map(|a| format!("{a} ")).collect();
    writeln!(out, "{indent}ctor {} : {args}-> {} prio {};", c.name, c.result, c.priority).unwrap();
}

fn rel_line(out: &mut String, indent: &str, r: &crate::system::Relation) {
    let env = if r.kind == RelKind::Environmental { " env" } else { "" };
    writeln!(out, "{indent}rel {}({}){env};", r.name, r.args.join(", ")).unwrap();
}

pub fn print_morphism(m: &SemioticMorphism) -> String {
    let mut out = format!("morphism {} : {} -> {} {{\n", m.name, m.from, m.to);
    for (kind, map) in [("sort", &m.sorts), ("data", &m.data), ("ctor", &m.ctors), ("rel", &m.rels)] {
        for (a, b) in map {
            writeln!(out, "  {kind} {a} -> {b};").unwrap();
        }
    }
    out.push_str("}\n");
    out
}

fn print_fstep(out: &mut String, indent: &str, f: &FStep) {
    let mut f = f.clone();
    normalize(&mut f);
    let inner = format!("{indent}  ");
    let d = &f.div;
    if !(d.sorts.is_empty() && d.data.is_empty() && d.subsorts.is_empty() && d.ctors.is_empty()) {
        writeln!(out, "{indent}diverge {{").unwrap();
        for s in &d.sorts {
            writeln!(out, "{inner}sort {} level {};", s.name, s.level).unwrap();
        }
        for s in &d.data {
            writeln!(out, "{inner}data {};", s.name).unwrap();
        }
        for (a, b) in &d.subsorts {
            writeln!(out, "{inner}subsort {a} < {b};").unwrap();
        }
        for c in &d.ctors {
            ctor_line(out, &inner, c);
        }
        writeln!(out, "{indent}}}").unwrap();
    }
    let c = &f.conv;
    if !(c.rels.is_empty() && c.axioms.is_empty()) {
        writeln!(out, "{indent}converge {{").unwrap();
        for r in &c.rels {
            rel_line(out, &inner, r);
        }
        for a in &c.axioms {
            axiom_line(out, &inner, a);
        }
        writeln!(out, "{indent}}}").unwrap();
    }
}

pub fn print_scenario(sc: &ScenarioDecl) -> String {
    let mut out = format!("scenario {} {{\n  init {};\n  seed {};\n", sc.name, sc.init, sc.seed);
    if let Some((up, down)) = &sc.gamma {
        writeln!(out, "  gamma {} {};", number(up), number(down)).unwrap();
    }
    for c in &sc.components {
        out.push_str("  component {\n");
        print_fstep(&mut out, "    ", &c.fstep);
        for cand in &c.candidates {
            writeln!(
                out,
                "    candidate {} weight {} target {} morphism {};",
                cand.label,
                number(&cand.weight),
                cand.target,
                cand.morphism
            )
            .unwrap();
        }
        out.push_str("  }\n");
    }
    out.push_str("}\n");
    out
}

pub fn print_blend(b: &BlendDecl) -> String {
    let mut out = format!("blend {} {{\n  init {};\n", b.name, b.init);
    let block = |out: &mut String, name: &str, f: &Option<FStep>| {
        if let Some(f) = f {
            writeln!(out, "  {name} {{").unwrap();
            print_fstep(out, "    ", f);
            out.push_str("  }\n");
        }
    };
    block(&mut out, "f0", &b.f0);
    writeln!(out, "  target {} via {};", b.target, b.target_via).unwrap();
    writeln!(out, "  source {} via {};", b.source, b.source_via).unwrap();
    block(&mut out, "f1target", &b.f1_target);
    block(&mut out, "f1source", &b.f1_source);
    let via = b.association.as_ref().map(|a| format!(" via {a}")).unwrap_or_default();
    match &b.match_decl {
        MatchDecl::Auto => writeln!(out, "  match auto{via};").unwrap(),
        MatchDecl::Explicit(c) => {
            out.push_str("  match {\n");
            for line in c.lines() {
                writeln!(out, "    {line};").unwrap();
            }
            writeln!(out, "  }}{via};").unwrap();
        }
    }
    block(&mut out, "f2", &b.f2);
    writeln!(out, "  threshold {};", b.threshold).unwrap();
    out.push_str("}\n");
    out
}
