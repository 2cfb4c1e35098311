use std::fmt::Write;

use crate::base::{Bound, Linearity};
use crate::calculus::Entry;
use crate::types::TypeExpr;

use super::ast::*;

fn join<T>(xs: &[T], f: impl Fn(&T) -> String) -> String {
    xs.iter().map(f).collect::<Vec<_>>().join(", ")
}

fn entries(es: &[Entry]) -> String {
    join(es, |e| e.to_string())
}

fn types(ts: &[TypeExpr]) -> String {
    join(ts, |t| t.to_string())
}

fn args(ts: &[TypeExpr]) -> String {
    ts.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(",")
}

fn zone(ts: &[TypeExpr]) -> String {
    if ts.is_empty() {
        ".".into()
    } else {
        types(ts)
    }
}

pub fn print_sequent(s: &SeqAst) -> String {
    match s {
        SeqAst::Entries(es) if es.is_empty() => "|-".into(),
        SeqAst::Entries(es) => format!("|- {}", entries(es)),
        SeqAst::Split(sp) => {
            let mut out = format!("{} | {} |- {}", zone(&sp.theta), zone(&sp.gamma), zone(&sp.delta));
            if let Some(u) = &sp.upsilon {
                write!(out, " | {}", zone(u)).unwrap();
            }
            out
        }
    }
}

pub fn print_term(t: &TermAst) -> String {
    match t {
        TermAst::Id(ty) => format!("id {ty}"),
        TermAst::Gen(g) => format!("gen {g}"),
        TermAst::Ref(r) => format!("ref {r}"),
        TermAst::Cut { i, j, left, right } => {
            format!("cut[{i},{j}]({}; {})", print_term(left), print_term(right))
        }
        TermAst::Map { index, target, premise } => {
            let idx = index.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(",");
            let tgt = match target {
                None => String::new(),
                Some(es) if es.is_empty() => " :".into(),
                Some(es) => format!(" : {}", entries(es)),
            };
            format!("map{{{idx}{tgt}}}({})", print_term(premise))
        }
        TermAst::Coerce { k, premise } => format!("coerce[{k}]({})", print_term(premise)),
        TermAst::Proj {
            cone,
            args: cone_args,
            proj,
        } => format!("proj {cone}[{}].{proj}", args(cone_args)),
        TermAst::Factor {
            cone,
            args: cone_args,
            sides,
            premises,
        } => {
            let ps = join(premises, |(p, d)| format!("{p} => {}", print_term(d)));
            let body = if ps.is_empty() {
                "{}".to_string()
            } else {
                format!("{{ {ps} }}")
            };
            format!("factor {cone}[{}] ({}) {body}", args(cone_args), entries(sides))
        }
    }
}

fn signed(xs: &[(String, crate::base::Sign)]) -> String {
    join(xs, |(o, s)| format!("{o}{s}"))
}

fn bound(b: Bound) -> &'static str {
    match b {
        Bound::Zero => "zero",
        Bound::ExactlyOne => "one",
        Bound::AtMostOne => "opt",
        Bound::Unbounded => "many",
    }
}

fn base(out: &mut String, b: &BaseDecl) {
    writeln!(out, "base {} {{", b.name).unwrap();
    for (s, lin) in &b.sorts {
        let l = match lin {
            Linearity::Linear => "lin",
            Linearity::Nonlinear => "nonlin",
        };
        writeln!(out, "  sort {s} : {l};").unwrap();
    }
    for c in &b.clauses {
        let (kind, sorts) = match &c.pos {
            PosAst::Exact(v) => ("exact", v),
            PosAst::OneOf(v) => ("one_of", v),
            PosAst::Any(v) => ("any", v),
        };
        let neg = join(&c.neg, |(s, b)| format!("{s}: {}", bound(*b)));
        writeln!(out, "  hom {{ pos = {kind}({}); neg = {{ {neg} }} }}", sorts.join(", ")).unwrap();
    }
    out.push_str("}\n");
}

fn doctrine(out: &mut String, d: &DoctrineDecl) {
    let kind = match &d.kind {
        DoctrineKind::On(b) => format!("on {b}"),
        DoctrineKind::Extends(p) => format!("extends {p}"),
        DoctrineKind::Restricts(p) => format!("restricts {p}"),
    };
    writeln!(out, "doctrine {} {kind} {{", d.name).unwrap();
    if !d.keep.is_empty() {
        writeln!(out, "  keep {};", d.keep.join(", ")).unwrap();
    }
    for c in &d.cones {
        writeln!(out, "  cone {} {{", c.name).unwrap();
        for (o, s) in &c.objects {
            writeln!(out, "    obj {o} : {s};").unwrap();
        }
        writeln!(out, "    vertex {} {};", c.vertex.0, c.vertex.1).unwrap();
        for (p, es) in &c.projections {
            writeln!(out, "    proj {p} ({});", signed(es)).unwrap();
        }
        out.push_str("  }\n");
    }
    if let Some(derived) = &d.sorting {
        out.push_str("  sorting {");
        for (s, c) in derived {
            write!(out, " derived {s} via {c};").unwrap();
        }
        out.push_str(" }\n");
    }
    out.push_str("}\n");
}

fn sketch(out: &mut String, s: &SketchDecl) {
    writeln!(out, "sketch {} over {} {{", s.name, s.doctrine).unwrap();
    for (_, e) in &s.entries {
        match e {
            SketchEntry::Object { name, sort } => writeln!(out, "  obj {name} : {sort};").unwrap(),
            SketchEntry::Generator { name, signature } => {
                writeln!(out, "  gen {name} : ({});", signed(signature)).unwrap()
            }
            SketchEntry::Extremal { cone, assign } => {
                let a: Vec<String> = assign.iter().map(|(k, v)| format!("{k} := {v}")).collect();
                writeln!(out, "  extremal {cone} {{ {} }}", a.join("; ")).unwrap()
            }
            SketchEntry::Equation { name, lhs, rhs } => {
                writeln!(out, "  eq {name} : {} = {};", print_term(lhs), print_term(rhs)).unwrap()
            }
        }
    }
    out.push_str("}\n");
}

fn map(out: &mut String, m: &MapDecl) {
    writeln!(out, "map {} : {} -> {} {{", m.name, m.source, m.target).unwrap();
    for (a, b) in &m.sorts {
        writeln!(out, "  sort {a} -> {b};").unwrap();
    }
    for c in &m.cones {
        let objs = join(&c.objects, |(a, b)| format!("{a} -> {b}"));
        let projs = join(&c.projections, |(a, b)| format!("{a} -> {b}"));
        writeln!(out, "  cone {} -> {} {{ {objs}; {projs} }}", c.source, c.target).unwrap();
    }
    out.push_str("}\n");
}

/// Canonical text: parsing the output yields the same file.
pub fn print_file(f: &File) -> String {
    let mut out = String::new();
    let mut prev_block = false;
    for (n, item) in f.items.iter().enumerate() {
        let block = matches!(
            item.kind,
            ItemKind::Base(_) | ItemKind::Doctrine(_) | ItemKind::Sketch(_) | ItemKind::Map(_)
        );
        if n > 0 && (block || prev_block) {
            out.push('\n');
        }
        prev_block = block;
        match &item.kind {
            ItemKind::UseDoctrine(d) => writeln!(out, "use doctrine {d};").unwrap(),
            ItemKind::UseBase(b) => writeln!(out, "use base {b};").unwrap(),
            ItemKind::Include(p) => writeln!(out, "use \"{p}\";").unwrap(),
            ItemKind::Base(b) => base(&mut out, b),
            ItemKind::Doctrine(d) => doctrine(&mut out, d),
            ItemKind::Sketch(s) => sketch(&mut out, s),
            ItemKind::Map(m) => map(&mut out, m),
            ItemKind::Goal { name, sketch, sequent } => {
                writeln!(out, "goal {name} in {sketch} : {};", print_sequent(sequent)).unwrap()
            }
            ItemKind::Proof {
                name,
                sketch,
                sequent,
                term,
            } => writeln!(
                out,
                "proof {name} in {sketch} : {} =\n  {};",
                print_sequent(sequent),
                print_term(term)
            )
            .unwrap(),
            ItemKind::Expect(Expectation::Rejects { proof, code }) => {
                writeln!(out, "expect {proof} rejects {code};").unwrap()
            }
            ItemKind::Expect(Expectation::Verdict { lhs, verdict, rhs }) => {
                writeln!(out, "expect {lhs} {verdict} {rhs};").unwrap()
            }
            ItemKind::Budget(kv) => {
                let body: Vec<String> = kv.iter().map(|(k, v)| format!("{k} = {v};")).collect();
                writeln!(out, "budget {{ {} }}", body.join(" ")).unwrap()
            }
        }
    }
    out
}
