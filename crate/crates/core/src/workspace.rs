//! Resolving a parsed `.dtr` file into bases, doctrines, sketches, maps,
//! goals and proofs. Items are resolved in file order, so every name must be
//! declared (or be a builtin) before it is used.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use thiserror::Error;

use crate::base::{builtin_base, BaseSort, BaseTheory, InhabitClause, Linearity, Positives, SortId, StructuralMap};
use crate::calculus::{
    check_derivation, coerce, elaborate_sequent, CheckError, Derivation, ErrorCode, SearchBudget, Sequent,
};
use crate::doctrine::{builtin_doctrine, validate_doctrine, ConeObject, DiscreteCone, Doctrine, Projection, Sorting};
use crate::rewrite::{EqBudget, DEFAULT_FUEL};
use crate::sketch::{validate_sketch, ConeInstance, Equation, Generator, Sketch, SketchObject};
use crate::syntax::ast::{self, DoctrineKind, Expectation, ItemKind, PosAst, SeqAst, SketchEntry, TermAst};
use crate::syntax::{parse, ParseError, Span};
use crate::translate::{validate_map, ConeCorrespondence, DoctrineMap};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WorkspaceError {
    #[error("{file}{error}")]
    Parse { file: String, error: ParseError },
    #[error("{file}{span}: {code}: {message}")]
    Invalid {
        file: String,
        span: Span,
        code: String,
        message: String,
    },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

impl WorkspaceError {
    pub fn is_parse(&self) -> bool {
        matches!(self, WorkspaceError::Parse { .. } | WorkspaceError::Io { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Goal {
    pub name: String,
    pub sketch: String,
    pub sequent: Sequent,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Proof {
    pub name: String,
    pub sketch: String,
    pub span: Span,
    /// The elaborated derivation, when the term resolved.
    pub derivation: Option<Derivation>,
    /// The checked conclusion, or the first rejection.
    pub outcome: Result<Sequent, CheckError>,
}

impl Proof {
    pub fn checked(&self) -> Option<(&Derivation, &Sequent)> {
        match (&self.derivation, &self.outcome) {
            (Some(d), Ok(c)) => Some((d, c)),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub search: SearchBudget,
    pub fuel: usize,
    pub eq: EqBudget,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            search: SearchBudget::default(),
            fuel: DEFAULT_FUEL,
            eq: EqBudget::default(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Workspace {
    pub bases: BTreeMap<String, Arc<BaseTheory>>,
    pub doctrines: BTreeMap<String, Arc<Doctrine>>,
    pub sketches: BTreeMap<String, Arc<Sketch>>,
    pub maps: BTreeMap<String, DoctrineMap>,
    pub goals: Vec<Goal>,
    pub proofs: Vec<Proof>,
    pub expectations: Vec<(Span, Expectation)>,
    pub budget: Budget,
    /// Declaration site of every named item.
    pub spans: BTreeMap<String, Span>,
}

impl Workspace {
    pub fn proof(&self, name: &str) -> Option<&Proof> {
        self.proofs.iter().find(|p| p.name == name)
    }

    pub fn goal(&self, name: &str) -> Option<&Goal> {
        self.goals.iter().find(|g| g.name == name)
    }
}

/// Parses and resolves a single self-contained text; `use "file"` is an error.
pub fn parse_workspace(text: &str) -> Result<Workspace, WorkspaceError> {
    let mut r = Resolver::new(None);
    r.source("", text)?;
    Ok(r.ws)
}

/// Loads a file, following `use "path"` includes relative to it.
pub fn load_workspace(path: &Path) -> Result<Workspace, WorkspaceError> {
    let mut r = Resolver::new(Some(path.to_path_buf()));
    r.file(path)?;
    Ok(r.ws)
}

struct Resolver {
    ws: Workspace,
    root: Option<PathBuf>,
    stack: Vec<PathBuf>,
    loaded: BTreeSet<PathBuf>,
    file: String,
}

type Res<T> = Result<T, WorkspaceError>;

/// Resolves a sort by name, or by `lin`/`nonlin` when exactly one sort of that
/// linearity exists.
pub fn resolve_sort(base: &BaseTheory, name: &str) -> Option<SortId> {
    if let Some(s) = base.sort_by_name(name) {
        return Some(s);
    }
    let lin = match name {
        "lin" => Linearity::Linear,
        "nonlin" => Linearity::Nonlinear,
        _ => return None,
    };
    let found: Vec<SortId> = base.sort_ids().filter(|&s| base.linearity(s) == lin).collect();
    (found.len() == 1).then(|| found[0])
}

fn elab_err(msg: impl Into<String>) -> CheckError {
    CheckError::new(ErrorCode::ElaborationError, msg)
}

/// Elaborates a sequent against a sketch.
pub fn elaborate_seq(s: &Sketch, seq: &SeqAst) -> Result<Sequent, CheckError> {
    match seq {
        SeqAst::Entries(es) => Ok(Sequent::new(es.clone())),
        SeqAst::Split(sp) => elaborate_sequent(s, sp).map_err(|e| elab_err(e.to_string())),
    }
}

/// Elaborates a proof term; `refs` holds earlier proofs of the same sketch.
pub fn elaborate_term(s: &Sketch, t: &TermAst, refs: &BTreeMap<String, Derivation>) -> Result<Derivation, CheckError> {
    Ok(match t {
        TermAst::Id(ty) => Derivation::Id(ty.clone()),
        TermAst::Gen(g) => Derivation::Gen(g.clone()),
        TermAst::Ref(r) => refs
            .get(r)
            .cloned()
            .ok_or_else(|| elab_err(format!("`ref {r}` names no accepted earlier proof in this sketch")))?,
        TermAst::Cut { i, j, left, right } => {
            Derivation::cut(elaborate_term(s, left, refs)?, *i, elaborate_term(s, right, refs)?, *j)
        }
        TermAst::Map { index, target, premise } => {
            let premise = elaborate_term(s, premise, refs)?;
            let target = match target {
                Some(t) => t.clone(),
                None => {
                    let concl = check_derivation(s, &premise)?;
                    let n = concl.len();
                    let mut seen = vec![false; n];
                    if index.len() != n || index.iter().any(|&k| k >= n || std::mem::replace(&mut seen[k], true)) {
                        return Err(elab_err(format!(
                            "map{{{index:?}}} is not a permutation of the {n} premise entries; give the target explicitly"
                        )));
                    }
                    let mut target = concl.entries.clone();
                    for (k, &to) in index.iter().enumerate() {
                        target[to] = concl.entries[k].clone();
                    }
                    target
                }
            };
            Derivation::structural(target.clone(), StructuralMap::new(target.len(), index.clone()), premise)
        }
        TermAst::Coerce { k, premise } => coerce(s, elaborate_term(s, premise, refs)?, *k)?,
        TermAst::Proj { cone, args, proj } => Derivation::non_inv(cone, args.clone(), proj),
        TermAst::Factor {
            cone,
            args,
            sides,
            premises,
        } => Derivation::Inv {
            cone: cone.clone(),
            args: args.clone(),
            sides: sides.clone(),
            premises: premises
                .iter()
                .map(|(p, d)| Ok((p.clone(), elaborate_term(s, d, refs)?)))
                .collect::<Result<_, CheckError>>()?,
        },
    })
}

impl Resolver {
    fn new(root: Option<PathBuf>) -> Self {
        Resolver {
            ws: Workspace::default(),
            root,
            stack: Vec::new(),
            loaded: BTreeSet::new(),
            file: String::new(),
        }
    }

    fn invalid<T>(&self, span: Span, code: &str, message: impl Into<String>) -> Res<T> {
        Err(WorkspaceError::Invalid {
            file: self.file.clone(),
            span,
            code: code.into(),
            message: message.into(),
        })
    }

    fn file(&mut self, path: &Path) -> Res<()> {
        let canon = path.canonicalize().map_err(|e| WorkspaceError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        if self.stack.contains(&canon) {
            return self.invalid(
                Span::default(),
                "IncludeCycle",
                format!("{} includes itself", path.display()),
            );
        }
        if !self.loaded.insert(canon.clone()) {
            return Ok(());
        }
        let text = std::fs::read_to_string(&canon).map_err(|e| WorkspaceError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        self.stack.push(canon);
        let saved = std::mem::replace(&mut self.file, format!("{}:", path.display()));
        let out = self.source(&self.file.clone(), &text);
        self.file = saved;
        self.stack.pop();
        out
    }

    fn source(&mut self, label: &str, text: &str) -> Res<()> {
        let parsed = parse(text).map_err(|error| WorkspaceError::Parse {
            file: label.into(),
            error,
        })?;
        for item in &parsed.items {
            self.item(item)?;
        }
        Ok(())
    }

    fn declare(&mut self, span: Span, kind: &str, name: &str) -> Res<()> {
        let key = format!("{kind} {name}");
        if self.ws.spans.contains_key(&key) {
            return self.invalid(span, "DuplicateName", format!("{kind} `{name}` is declared twice"));
        }
        self.ws.spans.insert(key, span);
        Ok(())
    }

    fn base(&mut self, span: Span, name: &str) -> Res<Arc<BaseTheory>> {
        if let Some(b) = self.ws.bases.get(name) {
            return Ok(b.clone());
        }
        match builtin_base(name) {
            Some(b) => {
                let b = Arc::new(b);
                self.ws.bases.insert(name.into(), b.clone());
                Ok(b)
            }
            None => self.invalid(span, "UnknownBase", format!("no base named `{name}`")),
        }
    }

    fn doctrine(&mut self, span: Span, name: &str) -> Res<Arc<Doctrine>> {
        if let Some(d) = self.ws.doctrines.get(name) {
            return Ok(d.clone());
        }
        match builtin_doctrine(name) {
            Ok(d) => {
                let d = Arc::new(d);
                self.ws.doctrines.insert(name.into(), d.clone());
                Ok(d)
            }
            Err(_) => self.invalid(span, "UnknownDoctrine", format!("no doctrine named `{name}`")),
        }
    }

    fn sketch(&self, span: Span, name: &str) -> Res<Arc<Sketch>> {
        match self.ws.sketches.get(name) {
            Some(s) => Ok(s.clone()),
            None => self.invalid(span, "UnknownSketch", format!("no sketch named `{name}`")),
        }
    }

    fn item(&mut self, item: &ast::Item) -> Res<()> {
        let span = item.span;
        match &item.kind {
            ItemKind::UseDoctrine(n) => {
                self.doctrine(span, n)?;
            }
            ItemKind::UseBase(n) => {
                self.base(span, n)?;
            }
            ItemKind::Include(p) => {
                let Some(root) = &self.root else {
                    return self.invalid(span, "Include", "includes need a file on disk");
                };
                let dir = self.stack.last().and_then(|f| f.parent()).or_else(|| root.parent());
                let path = dir.map_or_else(|| PathBuf::from(p), |d| d.join(p));
                self.file(&path)?;
            }
            ItemKind::Base(b) => {
                self.declare(span, "base", &b.name)?;
                let theory = self.base_decl(span, b)?;
                self.ws.bases.insert(b.name.clone(), Arc::new(theory));
            }
            ItemKind::Doctrine(d) => {
                self.declare(span, "doctrine", &d.name)?;
                let doc = self.doctrine_decl(span, d)?;
                let report = validate_doctrine(&doc);
                if !report.is_valid() {
                    return self.invalid(span, "InvalidDoctrine", format!("doctrine {}:\n{report}", d.name));
                }
                self.ws.doctrines.insert(d.name.clone(), Arc::new(doc));
            }
            ItemKind::Sketch(s) => {
                self.declare(span, "sketch", &s.name)?;
                let sk = self.sketch_decl(span, s)?;
                self.ws.sketches.insert(s.name.clone(), Arc::new(sk));
            }
            ItemKind::Map(m) => {
                self.declare(span, "map", &m.name)?;
                let map = self.map_decl(span, m)?;
                let (report, _) = validate_map(&map);
                if !report.is_valid() {
                    return self.invalid(span, "InvalidMap", format!("map {}:\n{report}", m.name));
                }
                self.ws.maps.insert(m.name.clone(), map);
            }
            ItemKind::Goal { name, sketch, sequent } => {
                self.declare(span, "goal", name)?;
                let s = self.sketch(span, sketch)?;
                let seq = match elaborate_seq(&s, sequent) {
                    Ok(seq) => seq,
                    Err(e) => return self.invalid(span, "InvalidGoal", format!("goal {name}: {e}")),
                };
                if let Err(e) = crate::calculus::validate_sequent(&s, &seq) {
                    return self.invalid(span, "InvalidGoal", format!("goal {name}: {e}"));
                }
                self.ws.goals.push(Goal {
                    name: name.clone(),
                    sketch: sketch.clone(),
                    sequent: seq,
                    span,
                });
            }
            ItemKind::Proof {
                name,
                sketch,
                sequent,
                term,
            } => {
                self.declare(span, "proof", name)?;
                let s = self.sketch(span, sketch)?;
                let refs: BTreeMap<String, Derivation> = self
                    .ws
                    .proofs
                    .iter()
                    .filter(|p| p.sketch == *sketch)
                    .filter_map(|p| p.checked().map(|(d, _)| (p.name.clone(), d.clone())))
                    .collect();
                let derivation = elaborate_term(&s, term, &refs);
                let outcome = match (&derivation, elaborate_seq(&s, sequent)) {
                    (Err(e), _) => Err(e.clone()),
                    (Ok(_), Err(e)) => Err(e),
                    (Ok(d), Ok(declared)) => check_derivation(&s, d).and_then(|c| {
                        if c == declared {
                            Ok(c)
                        } else {
                            Err(CheckError::new(
                                ErrorCode::ConclusionMismatch,
                                format!("declared {declared}, derived {c}"),
                            ))
                        }
                    }),
                };
                self.ws.proofs.push(Proof {
                    name: name.clone(),
                    sketch: sketch.clone(),
                    span,
                    derivation: derivation.ok(),
                    outcome,
                });
            }
            ItemKind::Expect(e) => {
                let names: Vec<&String> = match e {
                    Expectation::Rejects { proof, code } => {
                        if ErrorCode::parse(code).is_none() {
                            return self.invalid(span, "UnknownErrorCode", format!("`{code}` is not an error code"));
                        }
                        vec![proof]
                    }
                    Expectation::Verdict { lhs, rhs, .. } => vec![lhs, rhs],
                };
                for n in names {
                    if self.ws.proof(n).is_none() {
                        return self.invalid(span, "UnknownProof", format!("no proof named `{n}`"));
                    }
                }
                self.ws.expectations.push((span, e.clone()));
            }
            ItemKind::Budget(kv) => {
                for (k, v) in kv {
                    let b = &mut self.ws.budget;
                    match k.as_str() {
                        "depth" => b.search.max_depth = *v,
                        "cut_depth" => b.search.max_cut_depth = *v,
                        "nodes" => b.search.max_nodes = *v,
                        "fuel" => b.fuel = *v,
                        "eq_depth" => b.eq.depth = *v,
                        "eq_nodes" => b.eq.nodes = *v,
                        _ => return self.invalid(span, "UnknownBudget", format!("unknown budget key `{k}`")),
                    }
                }
            }
        }
        Ok(())
    }

    fn base_decl(&self, span: Span, b: &ast::BaseDecl) -> Res<BaseTheory> {
        let sorts: Vec<BaseSort> = b
            .sorts
            .iter()
            .map(|(n, l)| BaseSort {
                name: n.clone(),
                linearity: *l,
            })
            .collect();
        let index: BTreeMap<&str, SortId> = b
            .sorts
            .iter()
            .enumerate()
            .map(|(i, (n, _))| (n.as_str(), SortId(i)))
            .collect();
        let lookup = |n: &String| {
            index.get(n.as_str()).copied().ok_or_else(|| WorkspaceError::Invalid {
                file: self.file.clone(),
                span,
                code: "UnknownSort".into(),
                message: format!("base {}: no sort `{n}`", b.name),
            })
        };
        let mut clauses = Vec::new();
        for c in &b.clauses {
            let positives = match &c.pos {
                PosAst::Exact(v) => Positives::Exact(v.iter().map(lookup).collect::<Res<_>>()?),
                PosAst::OneOf(v) => Positives::ExactlyOneOf(v.iter().map(lookup).collect::<Res<_>>()?),
                PosAst::Any(v) => Positives::AnyOver(v.iter().map(lookup).collect::<Res<_>>()?),
            };
            let mut negatives = BTreeMap::new();
            for (s, bound) in &c.neg {
                negatives.insert(lookup(s)?, *bound);
            }
            clauses.push(InhabitClause { positives, negatives });
        }
        BaseTheory::new(b.name.clone(), sorts, clauses).or_else(|e| self.invalid(span, "InvalidBase", e.to_string()))
    }

    fn cone_decl(&self, span: Span, base: &BaseTheory, c: &ast::ConeAst) -> Res<DiscreteCone> {
        let sort = |n: &str| match resolve_sort(base, n) {
            Some(s) => Ok(s),
            None => self.invalid(
                span,
                "UnknownSort",
                format!("cone {}: no sort `{n}` in {}", c.name, base.name),
            ),
        };
        let reduct = c
            .objects
            .iter()
            .map(|(id, s)| {
                Ok(ConeObject {
                    id: id.clone(),
                    sort: sort(s)?,
                })
            })
            .collect::<Res<Vec<_>>>()?;
        let mut projections = Vec::new();
        for (id, es) in &c.projections {
            let mut entries = Vec::new();
            for (o, sign) in es {
                let Some(i) = reduct.iter().position(|r| r.id == *o) else {
                    return self.invalid(
                        span,
                        "UnknownObject",
                        format!("cone {}: projection {id} names no object `{o}`", c.name),
                    );
                };
                entries.push((i, *sign));
            }
            projections.push(Projection {
                id: id.clone(),
                entries,
            });
        }
        Ok(DiscreteCone {
            name: c.name.clone(),
            reduct,
            vertex_sort: sort(&c.vertex.0)?,
            vertex_sign: c.vertex.1,
            projections,
        })
    }

    fn doctrine_decl(&mut self, span: Span, d: &ast::DoctrineDecl) -> Res<Doctrine> {
        let (base, mut cones, mut sorting) = match &d.kind {
            DoctrineKind::On(b) => (self.base(span, b)?, Vec::new(), None),
            DoctrineKind::Extends(p) => {
                let parent = self.doctrine(span, p)?;
                (parent.base.clone(), parent.cones.clone(), parent.sorting.clone())
            }
            DoctrineKind::Restricts(p) => {
                let parent = self.doctrine(span, p)?;
                let keep: Vec<&str> = d.keep.iter().map(String::as_str).collect();
                let r = match parent.restrict(&d.name, &keep) {
                    Ok(r) => r,
                    Err(e) => return self.invalid(span, "UnknownCone", e.to_string()),
                };
                (r.base, r.cones, r.sorting)
            }
        };
        if !d.keep.is_empty() && !matches!(d.kind, DoctrineKind::Restricts(_)) {
            return self.invalid(span, "Keep", "`keep` is only meaningful in a restriction");
        }
        for c in &d.cones {
            if cones.iter().any(|x: &DiscreteCone| x.name == c.name) {
                return self.invalid(span, "DuplicateCone", format!("cone `{}` declared twice", c.name));
            }
            cones.push(self.cone_decl(span, &base, c)?);
        }
        if let Some(derived) = &d.sorting {
            let mut s = Sorting {
                primitive: BTreeSet::new(),
                derived: BTreeSet::new(),
                sorting_cone: BTreeMap::new(),
            };
            for (sort, cone) in derived {
                let Some(id) = resolve_sort(&base, sort) else {
                    return self.invalid(span, "UnknownSort", format!("sorting names no sort `{sort}`"));
                };
                s.derived.insert(id);
                s.sorting_cone.insert(id, cone.clone());
            }
            s.primitive = base.sort_ids().filter(|x| !s.derived.contains(x)).collect();
            sorting = Some(s);
        }
        Ok(Doctrine {
            name: d.name.clone(),
            base,
            cones,
            sorting,
        })
    }

    fn sketch_decl(&mut self, span: Span, decl: &ast::SketchDecl) -> Res<Sketch> {
        let doctrine = self.doctrine(span, &decl.doctrine)?;
        let mut s = Sketch::new(&decl.name, doctrine.clone());
        for (espan, e) in &decl.entries {
            match e {
                SketchEntry::Object { name, sort } => {
                    let Some(id) = resolve_sort(&doctrine.base, sort) else {
                        return self.invalid(
                            *espan,
                            "UnknownSort",
                            format!("object {name}: no sort `{sort}` in {}", doctrine.base.name),
                        );
                    };
                    s.objects.push(SketchObject {
                        name: name.clone(),
                        sort: id,
                    });
                }
                SketchEntry::Generator { name, signature } => s.generators.push(Generator {
                    name: name.clone(),
                    signature: signature.clone(),
                }),
                SketchEntry::Extremal { cone, assign } => {
                    let c = doctrine.cone(cone);
                    let mut inst = ConeInstance {
                        cone: cone.clone(),
                        objects: BTreeMap::new(),
                        vertex: String::new(),
                        witnesses: BTreeMap::new(),
                    };
                    for (k, v) in assign {
                        if k == "vertex" {
                            inst.vertex = v.clone();
                        } else if c.is_some_and(|c| c.projection(k).is_some()) {
                            inst.witnesses.insert(k.clone(), v.clone());
                        } else {
                            inst.objects.insert(k.clone(), v.clone());
                        }
                    }
                    s.extremal.push(inst);
                }
                SketchEntry::Equation { name, lhs, rhs } => {
                    let none = BTreeMap::new();
                    let sides = elaborate_term(&s, lhs, &none)
                        .and_then(|l| Ok((l, elaborate_term(&s, rhs, &none)?)))
                        .and_then(|(l, r)| {
                            let (cl, cr) = (check_derivation(&s, &l)?, check_derivation(&s, &r)?);
                            if cl != cr {
                                return Err(CheckError::new(ErrorCode::ConclusionMismatch, format!("{cl} vs {cr}")));
                            }
                            Ok((l, r))
                        });
                    match sides {
                        Ok((l, r)) => s.equations.push(Equation {
                            name: name.clone(),
                            lhs: l,
                            rhs: r,
                        }),
                        Err(e) => return self.invalid(*espan, "InvalidEquation", format!("equation {name}: {e}")),
                    }
                }
            }
        }
        let report = validate_sketch(&s);
        if !report.is_valid() {
            return self.invalid(span, "InvalidSketch", format!("sketch {}:\n{report}", decl.name));
        }
        Ok(s)
    }

    fn map_decl(&mut self, span: Span, m: &ast::MapDecl) -> Res<DoctrineMap> {
        let source = self.doctrine(span, &m.source)?;
        let target = self.doctrine(span, &m.target)?;
        let mut sorts = BTreeMap::new();
        for (a, b) in &m.sorts {
            match (resolve_sort(&source.base, a), resolve_sort(&target.base, b)) {
                (Some(x), Some(y)) => {
                    sorts.insert(x, y);
                }
                _ => {
                    return self.invalid(
                        span,
                        "UnknownSort",
                        format!("map {}: cannot resolve `{a} -> {b}`", m.name),
                    )
                }
            }
        }
        let mut cones = BTreeMap::new();
        for c in &m.cones {
            cones.insert(
                c.source.clone(),
                ConeCorrespondence {
                    target: c.target.clone(),
                    objects: c.objects.iter().cloned().collect(),
                    projections: c.projections.iter().cloned().collect(),
                },
            );
        }
        // unlisted cones default to the same-named target cone
        for c in &source.cones {
            if cones.contains_key(&c.name) {
                continue;
            }
            if let Some(t) = target.cone(&c.name) {
                let same_objects = c.reduct.iter().all(|o| t.reduct_index(&o.id).is_some());
                let same_projs = c.projections.iter().all(|p| t.projection(&p.id).is_some());
                if same_objects && same_projs {
                    cones.insert(
                        c.name.clone(),
                        ConeCorrespondence {
                            target: t.name.clone(),
                            objects: c.reduct.iter().map(|o| (o.id.clone(), o.id.clone())).collect(),
                            projections: c.projections.iter().map(|p| (p.id.clone(), p.id.clone())).collect(),
                        },
                    );
                }
            }
        }
        Ok(DoctrineMap {
            name: m.name.clone(),
            source,
            target,
            sorts,
            cones,
        })
    }
}

/// The surface term of a derivation; elaborating it gives the derivation back.
pub fn term_of(d: &Derivation) -> TermAst {
    match d {
        Derivation::Id(t) => TermAst::Id(t.clone()),
        Derivation::Gen(g) => TermAst::Gen(g.clone()),
        Derivation::Cut { left, i, right, j } => TermAst::Cut {
            i: *i,
            j: *j,
            left: Box::new(term_of(left)),
            right: Box::new(term_of(right)),
        },
        Derivation::Struct { target, map, premise } => TermAst::Map {
            index: map.index.clone(),
            target: Some(target.clone()),
            premise: Box::new(term_of(premise)),
        },
        Derivation::NonInv { cone, args, proj } => TermAst::Proj {
            cone: cone.clone(),
            args: args.clone(),
            proj: proj.clone(),
        },
        Derivation::Inv {
            cone,
            args,
            sides,
            premises,
        } => TermAst::Factor {
            cone: cone.clone(),
            args: args.clone(),
            sides: sides.clone(),
            premises: premises.iter().map(|(p, d)| (p.clone(), term_of(d))).collect(),
        },
    }
}
