//! Command dispatch over a workspace, producing a [`Report`] whose status
//! alone determines the process exit code.

use std::fmt::Write;
use std::path::Path;

use serde::Serialize;

use crate::calculus::{search, split_view, Derivation, ErrorCode, Sequent};
use crate::completion::{enumerate_homset, stage_objects, CompletionError};
use crate::doctrine::{builtin_doctrine, BUILTIN_DOCTRINES};
use crate::rewrite::{equal_with, normalize_with, EqVerdict, RewriteError};
use crate::sketch::{is_well_sorted, Sketch};
use crate::syntax::ast::{Expectation, SeqAst};
use crate::syntax::{print_sequent, print_term, Span};
use crate::translate::{push_sketch, translate_derivation, validate_map};
use crate::workspace::{load_workspace, term_of, Workspace, WorkspaceError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    UnknownVerdict,
    ResourceLimit,
    ProofError,
    ValidationError,
    ParseError,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::ProofError | Status::ValidationError => 1,
            Status::ParseError => 2,
            Status::UnknownVerdict => 3,
            Status::ResourceLimit => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::UnknownVerdict => "unknown-verdict",
            Status::ResourceLimit => "resource-limit",
            Status::ProofError => "proof-error",
            Status::ValidationError => "validation-error",
            Status::ParseError => "parse-error",
        }
    }
}

/// One record per checked item.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReportItem {
    pub name: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conclusion: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub code: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub span: Option<Span>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub detail: Vec<String>,
}

impl ReportItem {
    fn new(name: impl Into<String>, status: Status) -> Self {
        ReportItem {
            name: name.into(),
            status,
            conclusion: None,
            code: None,
            span: None,
            detail: Vec::new(),
        }
    }

    fn at(mut self, span: Span) -> Self {
        self.span = Some(span);
        self
    }

    fn concluding(mut self, c: String) -> Self {
        self.conclusion = Some(c);
        self
    }

    fn coded(mut self, code: impl Into<String>) -> Self {
        self.code = Some(code.into());
        self
    }

    fn with(mut self, line: impl Into<String>) -> Self {
        self.detail.push(line.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Report {
    pub command: String,
    pub status: Status,
    pub items: Vec<ReportItem>,
}

impl Report {
    fn new(command: &str, items: Vec<ReportItem>) -> Self {
        let status = items.iter().map(|i| i.status).max().unwrap_or(Status::Ok);
        Report {
            command: command.into(),
            status,
            items,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for item in &self.items {
            write!(out, "{} {}", item.status.as_str(), item.name).unwrap();
            if let Some(span) = item.span {
                write!(out, " @{span}").unwrap();
            }
            if let Some(c) = &item.conclusion {
                write!(out, " : {c}").unwrap();
            }
            if let Some(code) = &item.code {
                write!(out, " [{code}]").unwrap();
            }
            out.push('\n');
            for d in &item.detail {
                writeln!(out, "    {d}").unwrap();
            }
        }
        writeln!(out, "{}: {}", self.command, self.status.as_str()).unwrap();
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Command {
    Validate,
    Check {
        proof: Option<String>,
    },
    Search {
        goal: Option<String>,
        depth: Option<usize>,
        cut_depth: Option<usize>,
    },
    Normalize {
        proof: String,
    },
    Eq {
        lhs: String,
        rhs: String,
    },
    EnumerateTypes {
        sketch: Option<String>,
        height: usize,
    },
    EnumerateHom {
        goal: String,
        size: usize,
    },
    Translate {
        map: String,
    },
    Builtins,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Check { .. } => "check",
            Command::Search { .. } => "search",
            Command::Normalize { .. } => "normalize",
            Command::Eq { .. } => "eq",
            Command::EnumerateTypes { .. } | Command::EnumerateHom { .. } => "enumerate",
            Command::Translate { .. } => "translate",
            Command::Builtins => "builtins",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Flags {
    pub entries_only: bool,
}

/// Loads `file` (when the command needs one) and runs the command.
pub fn run(cmd: &Command, file: Option<&Path>, flags: Flags) -> Report {
    if *cmd == Command::Builtins {
        return builtins();
    }
    let Some(file) = file else {
        return Report::new(
            cmd.name(),
            vec![ReportItem::new("workspace", Status::ParseError).with("no input file")],
        );
    };
    match load_workspace(file) {
        Ok(ws) => run_on(cmd, &ws, flags),
        Err(e) => Report::new(cmd.name(), vec![load_error(&e)]),
    }
}

/// Runs the command on each file in turn; item names are prefixed with the
/// file when there is more than one.
pub fn run_files(cmd: &Command, files: &[std::path::PathBuf], flags: Flags) -> Report {
    if files.len() <= 1 {
        return run(cmd, files.first().map(|f| f.as_path()), flags);
    }
    let mut items = Vec::new();
    for f in files {
        for mut item in run(cmd, Some(f), flags).items {
            item.name = format!("{}: {}", f.display(), item.name);
            items.push(item);
        }
    }
    Report::new(cmd.name(), items)
}

pub fn load_error(e: &WorkspaceError) -> ReportItem {
    match e {
        WorkspaceError::Parse { error, .. } => ReportItem::new("workspace", Status::ParseError)
            .at(error.span)
            .with(e.to_string()),
        WorkspaceError::Io { .. } => ReportItem::new("workspace", Status::ParseError).with(e.to_string()),
        WorkspaceError::Invalid { span, code, .. } => ReportItem::new("workspace", Status::ValidationError)
            .at(*span)
            .coded(code.clone())
            .with(e.to_string()),
    }
}

/// Displays a sequent in split-context notation when it reads faithfully
/// that way, otherwise entries-only.
pub fn show_sequent(s: &Sketch, seq: &Sequent, flags: Flags) -> String {
    if !flags.entries_only {
        if let Some(view) = split_view(s, seq) {
            return print_sequent(&SeqAst::Split(view));
        }
    }
    seq.to_string()
}

fn show_term(d: &Derivation) -> String {
    print_term(&term_of(d))
}

pub fn run_on(cmd: &Command, ws: &Workspace, flags: Flags) -> Report {
    let items = match cmd {
        Command::Validate => validate(ws),
        Command::Check { proof } => check(ws, proof.as_deref(), flags),
        Command::Search { goal, depth, cut_depth } => search_goals(ws, goal.as_deref(), *depth, *cut_depth, flags),
        Command::Normalize { proof } => normalize_proof(ws, proof, flags),
        Command::Eq { lhs, rhs } => vec![compare(ws, lhs, rhs, None)],
        Command::EnumerateTypes { sketch, height } => enumerate_types(ws, sketch.as_deref(), *height),
        Command::EnumerateHom { goal, size } => enumerate_hom(ws, goal, *size, flags),
        Command::Translate { map } => translate(ws, map, flags),
        Command::Builtins => return builtins(),
    };
    Report::new(cmd.name(), items)
}

fn builtins() -> Report {
    let items = BUILTIN_DOCTRINES
        .iter()
        .map(|name| {
            let d = builtin_doctrine(name).expect("builtin");
            let mut item = ReportItem::new(*name, Status::Ok).with(format!("base {}", d.base.name));
            for c in &d.cones {
                item = item.with(d.cone_signature(c));
            }
            if let Some(s) = &d.sorting {
                for (sort, cone) in &s.sorting_cone {
                    item = item.with(format!("sorting {} via {cone}", d.base.sort_name(*sort)));
                }
            }
            item
        })
        .collect();
    Report::new("builtins", items)
}

fn validate(ws: &Workspace) -> Vec<ReportItem> {
    let mut items = Vec::new();
    let span = |kind: &str, n: &str| ws.spans.get(&format!("{kind} {n}")).copied();
    for (n, d) in &ws.doctrines {
        let mut item = ReportItem::new(format!("doctrine {n}"), Status::Ok).with(format!(
            "{} cones over {}",
            d.cones.len(),
            d.base.name
        ));
        item.span = span("doctrine", n);
        items.push(item);
    }
    for (n, s) in &ws.sketches {
        let mut item = ReportItem::new(format!("sketch {n}"), Status::Ok).with(format!(
            "{} objects, {} generators, {} equations, {} extremal",
            s.objects.len(),
            s.generators.len(),
            s.equations.len(),
            s.extremal.len()
        ));
        if let Ok(w) = is_well_sorted(s) {
            item = item.with(if w.well_sorted {
                "well-sorted".to_string()
            } else {
                format!("not well-sorted: {}", w.unwitnessed.join(", "))
            });
        }
        item.span = span("sketch", n);
        items.push(item);
    }
    for (n, m) in &ws.maps {
        let (_, flag) = validate_map(m);
        let mut item =
            ReportItem::new(format!("map {n}"), Status::Ok).with(if flag.sorted { "sorted" } else { "unsorted" });
        for d in flag.diagnostics {
            item = item.with(d);
        }
        item.span = span("map", n);
        items.push(item);
    }
    items
}

fn expected_rejection<'a>(ws: &'a Workspace, proof: &str) -> Option<&'a str> {
    ws.expectations.iter().find_map(|(_, e)| match e {
        Expectation::Rejects { proof: p, code } if p == proof => Some(code.as_str()),
        _ => None,
    })
}

fn check(ws: &Workspace, only: Option<&str>, flags: Flags) -> Vec<ReportItem> {
    if let Some(name) = only {
        if ws.proof(name).is_none() {
            return vec![ReportItem::new(name, Status::ValidationError).with("no such proof")];
        }
    }
    let mut items = Vec::new();
    for p in ws.proofs.iter().filter(|p| only.is_none_or(|n| n == p.name)) {
        let s = &ws.sketches[&p.sketch];
        let expected = expected_rejection(ws, &p.name);
        let item = match (&p.outcome, expected) {
            (Ok(c), None) => ReportItem::new(&p.name, Status::Ok).concluding(show_sequent(s, c, flags)),
            (Ok(c), Some(code)) => ReportItem::new(&p.name, Status::ProofError)
                .concluding(show_sequent(s, c, flags))
                .with(format!("expected rejection with {code}, but the proof checks")),
            (Err(e), None) => ReportItem::new(&p.name, Status::ProofError)
                .coded(e.code.to_string())
                .with(e.to_string()),
            (Err(e), Some(code)) if e.code.to_string() == code => ReportItem::new(&p.name, Status::Ok)
                .coded(code)
                .with("rejected as expected"),
            (Err(e), Some(code)) => ReportItem::new(&p.name, Status::ProofError)
                .coded(e.code.to_string())
                .with(format!("expected {code}: {e}")),
        };
        items.push(item.at(p.span));
    }
    if only.is_none() {
        for (span, e) in &ws.expectations {
            if let Expectation::Verdict { lhs, verdict, rhs } = e {
                items.push(compare(ws, lhs, rhs, Some(verdict)).at(*span));
            }
        }
    }
    items
}

fn rewrite_failure(name: &str, e: &RewriteError) -> ReportItem {
    match e {
        RewriteError::FuelExhausted => ReportItem::new(name, Status::ResourceLimit).with(e.to_string()),
        RewriteError::Unchecked(c) => ReportItem::new(name, Status::ProofError)
            .coded(c.code.to_string())
            .with(e.to_string()),
        RewriteError::ConclusionMismatch(..) => ReportItem::new(name, Status::ProofError)
            .coded(ErrorCode::ConclusionMismatch.to_string())
            .with(e.to_string()),
    }
}

fn compare(ws: &Workspace, lhs: &str, rhs: &str, expected: Option<&str>) -> ReportItem {
    let name = format!("{lhs} ~ {rhs}");
    let (Some(p), Some(q)) = (ws.proof(lhs), ws.proof(rhs)) else {
        return ReportItem::new(name, Status::ValidationError).with("unknown proof name");
    };
    if p.sketch != q.sketch {
        return ReportItem::new(name, Status::ValidationError).with("proofs live in different sketches");
    }
    let (Some((d1, _)), Some((d2, _))) = (p.checked(), q.checked()) else {
        return ReportItem::new(name, Status::ProofError).with("both proofs must check");
    };
    let s = &ws.sketches[&p.sketch];
    match equal_with(s, d1, d2, ws.budget.eq) {
        Err(e) => rewrite_failure(&name, &e),
        Ok(v) => {
            let item = |st| ReportItem::new(&name, st).coded(v.to_string());
            match expected {
                None if v == EqVerdict::Unknown => item(Status::UnknownVerdict),
                None => item(Status::Ok),
                Some(want) if want == v.to_string() => item(Status::Ok),
                Some(want) if v == EqVerdict::Unknown => item(Status::UnknownVerdict).with(format!("expected {want}")),
                Some(want) => item(Status::ProofError).with(format!("expected {want}")),
            }
        }
    }
}

fn search_goals(
    ws: &Workspace,
    only: Option<&str>,
    depth: Option<usize>,
    cut_depth: Option<usize>,
    flags: Flags,
) -> Vec<ReportItem> {
    if let Some(name) = only {
        if ws.goal(name).is_none() {
            return vec![ReportItem::new(name, Status::ValidationError).with("no such goal")];
        }
    }
    let mut budget = ws.budget.search;
    if let Some(d) = depth {
        budget.max_depth = d;
    }
    if let Some(c) = cut_depth {
        budget.max_cut_depth = c;
    }
    ws.goals
        .iter()
        .filter(|g| only.is_none_or(|n| n == g.name))
        .map(|g| {
            let s = &ws.sketches[&g.sketch];
            let shown = show_sequent(s, &g.sequent, flags);
            match search(s, &g.sequent, budget) {
                Some(d) => ReportItem::new(&g.name, Status::Ok)
                    .concluding(shown)
                    .with(show_term(&d)),
                None => ReportItem::new(&g.name, Status::ResourceLimit)
                    .concluding(shown)
                    .with(format!(
                        "not found within depth {} and cut depth {}",
                        budget.max_depth, budget.max_cut_depth
                    )),
            }
            .at(g.span)
        })
        .collect()
}

fn normalize_proof(ws: &Workspace, name: &str, flags: Flags) -> Vec<ReportItem> {
    let Some(p) = ws.proof(name) else {
        return vec![ReportItem::new(name, Status::ValidationError).with("no such proof")];
    };
    let Some((d, c)) = p.checked() else {
        let e = p.outcome.as_ref().err();
        return vec![ReportItem::new(name, Status::ProofError)
            .coded(e.map_or("ElaborationError".into(), |e| e.code.to_string()))];
    };
    let s = &ws.sketches[&p.sketch];
    vec![match normalize_with(s, d, ws.budget.fuel) {
        Ok(n) => ReportItem::new(name, Status::Ok)
            .concluding(show_sequent(s, c, flags))
            .with(show_term(&n)),
        Err(e) => rewrite_failure(name, &e),
    }
    .at(p.span)]
}

fn enumerate_types(ws: &Workspace, sketch: Option<&str>, height: usize) -> Vec<ReportItem> {
    let chosen: Vec<(&String, &std::sync::Arc<Sketch>)> = ws
        .sketches
        .iter()
        .filter(|(n, _)| sketch.is_none_or(|k| k == *n))
        .collect();
    if chosen.is_empty() {
        return vec![ReportItem::new(sketch.unwrap_or("workspace"), Status::ValidationError).with("no such sketch")];
    }
    chosen
        .into_iter()
        .map(|(n, s)| match stage_objects(s, height) {
            Ok(t) => {
                let counts: Vec<String> = t.counts().iter().map(|c| c.to_string()).collect();
                ReportItem::new(n, Status::Ok).with(format!("types by height: {}", counts.join(", ")))
            }
            Err(e) => ReportItem::new(n, Status::ResourceLimit).with(e.to_string()),
        })
        .collect()
}

fn enumerate_hom(ws: &Workspace, goal: &str, size: usize, flags: Flags) -> Vec<ReportItem> {
    let Some(g) = ws.goal(goal) else {
        return vec![ReportItem::new(goal, Status::ValidationError).with("no such goal")];
    };
    let s = &ws.sketches[&g.sketch];
    let shown = show_sequent(s, &g.sequent, flags);
    vec![match enumerate_homset(s, &g.sequent, size) {
        Ok(h) => {
            let mut item = ReportItem::new(goal, Status::Ok)
                .concluding(shown)
                .with(format!("classes: {}", h.classes.len()))
                .with(format!("exhaustive: {}", if h.exhaustive { "yes" } else { "no" }))
                .with(format!("enumerated: {}", h.enumerated));
            for c in &h.classes {
                item = item.with(format!("class {}", show_term(c)));
            }
            if !h.unknown_pairs.is_empty() {
                item.status = Status::UnknownVerdict;
                item = item.with(format!("unresolved pairs: {}", h.unknown_pairs.len()));
            }
            item
        }
        Err(CompletionError::ResourceLimit(m)) => {
            ReportItem::new(goal, Status::ResourceLimit).concluding(shown).with(m)
        }
        Err(e) => ReportItem::new(goal, Status::ProofError)
            .concluding(shown)
            .with(e.to_string()),
    }
    .at(g.span)]
}

fn translate(ws: &Workspace, map: &str, flags: Flags) -> Vec<ReportItem> {
    let Some(m) = ws.maps.get(map) else {
        return vec![ReportItem::new(map, Status::ValidationError).with("no such map")];
    };
    let mut items = Vec::new();
    for p in &ws.proofs {
        let s = &ws.sketches[&p.sketch];
        if s.doctrine.name != m.source.name {
            continue;
        }
        let Some((d, _)) = p.checked() else {
            items.push(
                ReportItem::new(&p.name, Status::ProofError)
                    .with("source proof does not check")
                    .at(p.span),
            );
            continue;
        };
        let item = push_sketch(m, s).and_then(|t| {
            let td = translate_derivation(m, s, d)?;
            let c = crate::calculus::check_derivation(&t, &td)?;
            Ok(ReportItem::new(&p.name, Status::Ok)
                .concluding(show_sequent(&t, &c, flags))
                .with(show_term(&td)))
        });
        items.push(
            item.unwrap_or_else(|e| ReportItem::new(&p.name, Status::ProofError).with(e.to_string()))
                .at(p.span),
        );
    }
    items
}
