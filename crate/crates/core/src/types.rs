//! Type formation over a sketch and stratified type enumeration.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::base::SortId;
use crate::sketch::Sketch;

/// `Gen(A)` is a sketch object; `Comp(C, args)` applies the type former of cone `C`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TypeExpr {
    Gen(String),
    Comp(String, Vec<TypeExpr>),
}

impl TypeExpr {
    pub fn gen(name: &str) -> Self {
        TypeExpr::Gen(name.into())
    }

    pub fn comp(cone: &str, args: Vec<TypeExpr>) -> Self {
        TypeExpr::Comp(cone.into(), args)
    }

    pub fn height(&self) -> usize {
        match self {
            TypeExpr::Gen(_) => 0,
            TypeExpr::Comp(_, args) => 1 + args.iter().map(|a| a.height()).max().unwrap_or(0),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            TypeExpr::Gen(_) => 1,
            TypeExpr::Comp(_, args) => 1 + args.iter().map(|a| a.size()).sum::<usize>(),
        }
    }

    /// Every subterm, including `self`, in pre-order.
    pub fn subterms(&self) -> Vec<&TypeExpr> {
        let mut out = vec![self];
        if let TypeExpr::Comp(_, args) = self {
            for a in args {
                out.extend(a.subterms());
            }
        }
        out
    }

    pub fn objects(&self, out: &mut BTreeSet<String>) {
        match self {
            TypeExpr::Gen(n) => {
                out.insert(n.clone());
            }
            TypeExpr::Comp(_, args) => args.iter().for_each(|a| a.objects(out)),
        }
    }

    pub fn mentions_cone(&self, cone: &str) -> bool {
        match self {
            TypeExpr::Gen(_) => false,
            TypeExpr::Comp(c, args) => c == cone || args.iter().any(|a| a.mentions_cone(cone)),
        }
    }
}

impl fmt::Display for TypeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeExpr::Gen(n) => write!(f, "{n}"),
            TypeExpr::Comp(c, args) => {
                write!(f, "{c}[")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, "]")
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TypeError {
    #[error("cone `{cone}` expects {expected} arguments, found {found}")]
    ArityMismatch {
        cone: String,
        expected: usize,
        found: usize,
    },
    #[error("argument {index} of `{cone}` has sort `{found}`, expected `{expected}`")]
    SortMismatch {
        cone: String,
        index: usize,
        expected: String,
        found: String,
    },
    #[error("unknown cone `{0}`")]
    UnknownCone(String),
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("type enumeration exceeded the ceiling of {0} types")]
    ResourceLimit(usize),
}

/// Returns the base sort of a well-formed type.
pub fn check_type(s: &Sketch, t: &TypeExpr) -> Result<SortId, TypeError> {
    match t {
        TypeExpr::Gen(name) => s
            .object(name)
            .map(|o| o.sort)
            .ok_or_else(|| TypeError::UnknownObject(name.clone())),
        TypeExpr::Comp(cone_name, args) => {
            let cone = s
                .doctrine
                .cone(cone_name)
                .ok_or_else(|| TypeError::UnknownCone(cone_name.clone()))?;
            if cone.reduct.len() != args.len() {
                return Err(TypeError::ArityMismatch {
                    cone: cone_name.clone(),
                    expected: cone.reduct.len(),
                    found: args.len(),
                });
            }
            for (index, (arg, obj)) in args.iter().zip(&cone.reduct).enumerate() {
                let found = check_type(s, arg)?;
                if found != obj.sort {
                    let base = &s.doctrine.base;
                    return Err(TypeError::SortMismatch {
                        cone: cone_name.clone(),
                        index,
                        expected: base.sort_name(obj.sort).into(),
                        found: base.sort_name(found).into(),
                    });
                }
            }
            Ok(cone.vertex_sort)
        }
    }
}

pub const DEFAULT_TYPE_CEILING: usize = 1_000_000;

/// `strata[n]` holds every type of height at most `n`, sorted by printed form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeStrata {
    pub strata: Vec<Vec<TypeExpr>>,
}

impl TypeStrata {
    pub fn counts(&self) -> Vec<usize> {
        self.strata.iter().map(|s| s.len()).collect()
    }
}

pub fn enumerate_types(s: &Sketch, height: usize, ceiling: usize) -> Result<TypeStrata, TypeError> {
    let gens: Vec<(TypeExpr, SortId)> = s
        .objects
        .iter()
        .map(|o| (TypeExpr::Gen(o.name.clone()), o.sort))
        .collect();
    let mut current = gens.clone();
    let mut strata = vec![sorted(&current)];
    for _ in 0..height {
        let mut next = gens.clone();
        for cone in &s.doctrine.cones {
            let pools: Vec<Vec<&TypeExpr>> = cone
                .reduct
                .iter()
                .map(|o| current.iter().filter(|(_, s)| *s == o.sort).map(|(t, _)| t).collect())
                .collect();
            let total = pools.iter().try_fold(1usize, |acc, p| acc.checked_mul(p.len()));
            match total {
                Some(n) if next.len() + n <= ceiling => {}
                _ => return Err(TypeError::ResourceLimit(ceiling)),
            }
            for combo in product(&pools) {
                next.push((TypeExpr::Comp(cone.name.clone(), combo), cone.vertex_sort));
            }
        }
        if next.len() > ceiling {
            return Err(TypeError::ResourceLimit(ceiling));
        }
        strata.push(sorted(&next));
        current = next;
    }
    Ok(TypeStrata { strata })
}

fn sorted(ts: &[(TypeExpr, SortId)]) -> Vec<TypeExpr> {
    let mut keyed: Vec<(String, TypeExpr)> = ts.iter().map(|(t, _)| (t.to_string(), t.clone())).collect();
    keyed.sort();
    keyed.into_iter().map(|(_, t)| t).collect()
}

fn product(pools: &[Vec<&TypeExpr>]) -> Vec<Vec<TypeExpr>> {
    let mut out: Vec<Vec<TypeExpr>> = vec![Vec::new()];
    for pool in pools {
        let mut grown = Vec::with_capacity(out.len() * pool.len());
        for prefix in &out {
            for t in pool {
                let mut v = prefix.clone();
                v.push((*t).clone());
                grown.push(v);
            }
        }
        out = grown;
    }
    out
}
