use std::collections::BTreeSet;
use std::fmt;

use crate::base::{Sign, StructuralMap};
use crate::types::TypeExpr;

/// A signed type: one entry of an entries-only sequent.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Entry {
    pub ty: TypeExpr,
    pub sign: Sign,
}

impl Entry {
    pub fn new(ty: TypeExpr, sign: Sign) -> Self {
        Entry { ty, sign }
    }

    pub fn neg(ty: TypeExpr) -> Self {
        Entry::new(ty, Sign::Neg)
    }

    pub fn pos(ty: TypeExpr) -> Self {
        Entry::new(ty, Sign::Pos)
    }

    pub fn flipped(&self) -> Self {
        Entry::new(self.ty.clone(), self.sign.flip())
    }
}

impl fmt::Display for Entry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.ty, self.sign)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sequent {
    pub entries: Vec<Entry>,
}

impl Sequent {
    pub fn new(entries: Vec<Entry>) -> Self {
        Sequent { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|-")?;
        for (i, e) in self.entries.iter().enumerate() {
            write!(f, "{}{e}", if i == 0 { " " } else { ", " })?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Derivation {
    Id(TypeExpr),
    /// Conclusion: left without entry `i`, then right without entry `j`.
    Cut {
        left: Box<Derivation>,
        i: usize,
        right: Box<Derivation>,
        j: usize,
    },
    /// Concludes `target`; the premise concludes `target[map.index[k]]` at each `k`.
    Struct {
        target: Vec<Entry>,
        map: StructuralMap,
        premise: Box<Derivation>,
    },
    Gen(String),
    NonInv {
        cone: String,
        args: Vec<TypeExpr>,
        proj: String,
    },
    /// Concludes the flipped vertex type followed by `sides`.
    Inv {
        cone: String,
        args: Vec<TypeExpr>,
        sides: Vec<Entry>,
        premises: Vec<(String, Derivation)>,
    },
}

impl Derivation {
    pub fn cut(left: Derivation, i: usize, right: Derivation, j: usize) -> Self {
        Derivation::Cut {
            left: Box::new(left),
            i,
            right: Box::new(right),
            j,
        }
    }

    pub fn structural(target: Vec<Entry>, map: StructuralMap, premise: Derivation) -> Self {
        Derivation::Struct {
            target,
            map,
            premise: Box::new(premise),
        }
    }

    pub fn non_inv(cone: &str, args: Vec<TypeExpr>, proj: &str) -> Self {
        Derivation::NonInv {
            cone: cone.into(),
            args,
            proj: proj.into(),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Derivation::Id(_) | Derivation::Gen(_) | Derivation::NonInv { .. } => 1,
            Derivation::Cut { left, right, .. } => 1 + left.node_count() + right.node_count(),
            Derivation::Struct { premise, .. } => 1 + premise.node_count(),
            Derivation::Inv { premises, .. } => 1 + premises.iter().map(|(_, d)| d.node_count()).sum::<usize>(),
        }
    }

    pub fn children(&self) -> Vec<&Derivation> {
        match self {
            Derivation::Cut { left, right, .. } => vec![left, right],
            Derivation::Struct { premise, .. } => vec![premise],
            Derivation::Inv { premises, .. } => premises.iter().map(|(_, d)| d).collect(),
            _ => Vec::new(),
        }
    }

    pub fn is_inv_free(&self) -> bool {
        !matches!(self, Derivation::Inv { .. }) && self.children().iter().all(|c| c.is_inv_free())
    }

    /// Collects the sketch objects and generators referenced anywhere.
    pub fn mentions(&self, objects: &mut BTreeSet<String>, generators: &mut BTreeSet<String>) {
        match self {
            Derivation::Id(t) => t.objects(objects),
            Derivation::Gen(g) => {
                generators.insert(g.clone());
            }
            Derivation::NonInv { args, .. } => args.iter().for_each(|a| a.objects(objects)),
            Derivation::Inv { args, sides, .. } => {
                args.iter().for_each(|a| a.objects(objects));
                sides.iter().for_each(|e| e.ty.objects(objects));
            }
            Derivation::Struct { target, .. } => target.iter().for_each(|e| e.ty.objects(objects)),
            Derivation::Cut { .. } => {}
        }
        for c in self.children() {
            c.mentions(objects, generators);
        }
    }
}
