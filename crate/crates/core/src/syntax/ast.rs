//! The surface syntax as parsed, before names are resolved.

use crate::base::{Bound, Linearity, Sign};
use crate::calculus::elaborate::SplitSequent;
use crate::calculus::Entry;
use crate::types::TypeExpr;

use super::Span;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct File {
    pub items: Vec<Item>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Item {
    pub span: Span,
    pub kind: ItemKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ItemKind {
    UseDoctrine(String),
    UseBase(String),
    Include(String),
    Base(BaseDecl),
    Doctrine(DoctrineDecl),
    Sketch(SketchDecl),
    Map(MapDecl),
    Goal {
        name: String,
        sketch: String,
        sequent: SeqAst,
    },
    Proof {
        name: String,
        sketch: String,
        sequent: SeqAst,
        term: TermAst,
    },
    Expect(Expectation),
    Budget(Vec<(String, usize)>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseDecl {
    pub name: String,
    pub sorts: Vec<(String, Linearity)>,
    pub clauses: Vec<ClauseAst>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PosAst {
    Exact(Vec<String>),
    OneOf(Vec<String>),
    Any(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClauseAst {
    pub pos: PosAst,
    pub neg: Vec<(String, Bound)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DoctrineKind {
    On(String),
    Extends(String),
    Restricts(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeAst {
    pub name: String,
    pub objects: Vec<(String, String)>,
    pub vertex: (String, Sign),
    pub projections: Vec<(String, Vec<(String, Sign)>)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DoctrineDecl {
    pub name: String,
    pub kind: DoctrineKind,
    pub cones: Vec<ConeAst>,
    /// Cones kept by a restriction.
    pub keep: Vec<String>,
    /// Derived sort and its sorting cone.
    pub sorting: Option<Vec<(String, String)>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SketchEntry {
    Object {
        name: String,
        sort: String,
    },
    Generator {
        name: String,
        signature: Vec<(String, Sign)>,
    },
    Extremal {
        cone: String,
        assign: Vec<(String, String)>,
    },
    Equation {
        name: String,
        lhs: TermAst,
        rhs: TermAst,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SketchDecl {
    pub name: String,
    pub doctrine: String,
    pub entries: Vec<(Span, SketchEntry)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeMapAst {
    pub source: String,
    pub target: String,
    pub objects: Vec<(String, String)>,
    pub projections: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MapDecl {
    pub name: String,
    pub source: String,
    pub target: String,
    pub sorts: Vec<(String, String)>,
    pub cones: Vec<ConeMapAst>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expectation {
    Rejects { proof: String, code: String },
    Verdict { lhs: String, verdict: String, rhs: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SeqAst {
    Entries(Vec<Entry>),
    Split(SplitSequent),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TermAst {
    Id(TypeExpr),
    Gen(String),
    Cut {
        i: usize,
        j: usize,
        left: Box<TermAst>,
        right: Box<TermAst>,
    },
    /// `index[k]` is the target position of premise entry `k`; a missing
    /// target means a permutation whose target is inferred.
    Map {
        index: Vec<usize>,
        target: Option<Vec<Entry>>,
        premise: Box<TermAst>,
    },
    Proj {
        cone: String,
        args: Vec<TypeExpr>,
        proj: String,
    },
    Factor {
        cone: String,
        args: Vec<TypeExpr>,
        sides: Vec<Entry>,
        premises: Vec<(String, TermAst)>,
    },
    Ref(String),
    Coerce {
        k: usize,
        premise: Box<TermAst>,
    },
}
