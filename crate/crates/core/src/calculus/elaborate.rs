//! Split-context notation: `Θ | Γ ⊢ Δ` (and `Θ | Γ ⊢ Δ | Υ` for doubly sorted
//! doctrines) elaborated to entries-only sequents, and the reverse view.

use thiserror::Error;

use crate::base::{Sign, SortId, StructuralMap};
use crate::doctrine::DiscreteCone;
use crate::sketch::Sketch;
use crate::types::{check_type, TypeExpr};

use super::check::{check_derivation, CheckError, ErrorCode};
use super::derivation::{Derivation, Entry, Sequent};

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SplitSequent {
    pub theta: Vec<TypeExpr>,
    pub gamma: Vec<TypeExpr>,
    pub delta: Vec<TypeExpr>,
    pub upsilon: Option<Vec<TypeExpr>>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ElabError {
    #[error("`{0}` needs an implicit coercion but the doctrine has no suitable sorting")]
    NotSorted(String),
    #[error("`{0}` could be coerced by more than one sorting cone")]
    AmbiguousZone(String),
    #[error("{0}")]
    Type(String),
}

/// Which nonlinear zone a sorting cone feeds: `Θ` when its single projection
/// entry is positive, `Υ` when negative.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SortingSide {
    Left,
    Right,
}

/// Sorting cones with a nonlinear vertex, keyed by the side they feed.
fn sorting_cones(s: &Sketch) -> Vec<(SortingSide, &DiscreteCone)> {
    let Some(sorting) = &s.doctrine.sorting else {
        return Vec::new();
    };
    sorting
        .sorting_cone
        .values()
        .filter_map(|name| s.doctrine.cone(name))
        .filter(|c| s.doctrine.base.is_nonlinear(c.vertex_sort) && c.is_arrow_type())
        .map(|c| {
            let side = if c.projections[0].entries[0].1 == Sign::Pos {
                SortingSide::Left
            } else {
                SortingSide::Right
            };
            (side, c)
        })
        .collect()
}

pub fn has_right_zone(s: &Sketch) -> bool {
    sorting_cones(s).iter().any(|(side, _)| *side == SortingSide::Right)
}

fn coercion_for<'a>(
    s: &'a Sketch,
    side: SortingSide,
    sort: SortId,
    shown: &str,
) -> Result<&'a DiscreteCone, ElabError> {
    let found: Vec<&DiscreteCone> = sorting_cones(s)
        .into_iter()
        .filter(|(sd, c)| *sd == side && c.reduct[0].sort == sort)
        .map(|(_, c)| c)
        .collect();
    match found.len() {
        0 => Err(ElabError::NotSorted(shown.into())),
        1 => Ok(found[0]),
        _ => Err(ElabError::AmbiguousZone(shown.into())),
    }
}

fn nonlinear_zone(s: &Sketch, t: &TypeExpr, side: SortingSide) -> Result<Entry, ElabError> {
    let sort = check_type(s, t).map_err(|e| ElabError::Type(e.to_string()))?;
    if s.doctrine.base.is_nonlinear(sort) {
        if side == SortingSide::Right && !s.doctrine.is_derived(sort) {
            return Err(ElabError::NotSorted(t.to_string()));
        }
        return Ok(Entry::neg(t.clone()));
    }
    let cone = coercion_for(s, side, sort, &t.to_string())?;
    Ok(Entry::neg(TypeExpr::Comp(cone.name.clone(), vec![t.clone()])))
}

pub fn elaborate_sequent(s: &Sketch, split: &SplitSequent) -> Result<Sequent, ElabError> {
    let mut out = Vec::new();
    for t in &split.theta {
        out.push(nonlinear_zone(s, t, SortingSide::Left)?);
    }
    out.extend(split.gamma.iter().map(|t| Entry::neg(t.clone())));
    out.extend(split.delta.iter().map(|t| Entry::pos(t.clone())));
    if let Some(ups) = &split.upsilon {
        if !has_right_zone(s) && !ups.is_empty() {
            return Err(ElabError::NotSorted(ups[0].to_string()));
        }
        for t in ups {
            out.push(nonlinear_zone(s, t, SortingSide::Right)?);
        }
    }
    Ok(Sequent::new(out))
}

/// The split-context reading of an entries-only sequent, or `None` when the
/// entries are not in zone order or a coercion cannot be displayed faithfully.
pub fn split_view(s: &Sketch, seq: &Sequent) -> Option<SplitSequent> {
    let right = has_right_zone(s);
    let mut view = SplitSequent {
        upsilon: right.then(Vec::new),
        ..Default::default()
    };
    let mut zone = 0;
    for e in &seq.entries {
        let sort = check_type(s, &e.ty).ok()?;
        let (z, shown) = if e.sign == Sign::Pos {
            (2, e.ty.clone())
        } else if !s.doctrine.base.is_nonlinear(sort) {
            (1, e.ty.clone())
        } else {
            let (side, shown) = match &e.ty {
                TypeExpr::Comp(c, args) if args.len() == 1 && s.doctrine.is_sorting_cone(c) => {
                    let cone = s.doctrine.cone(c)?;
                    let side = if cone.projections[0].entries[0].1 == Sign::Pos {
                        SortingSide::Left
                    } else {
                        SortingSide::Right
                    };
                    let inner_sort = check_type(s, &args[0]).ok()?;
                    if s.doctrine.base.is_nonlinear(inner_sort) {
                        (side, e.ty.clone())
                    } else {
                        let unique = coercion_for(s, side, inner_sort, "").ok()?;
                        if unique.name != *c {
                            return None;
                        }
                        (side, args[0].clone())
                    }
                }
                _ => {
                    let side = match sorting_cones(s).iter().find(|(_, c)| c.vertex_sort == sort) {
                        Some((side, _)) => *side,
                        None => SortingSide::Left,
                    };
                    (side, e.ty.clone())
                }
            };
            match side {
                SortingSide::Left => (0, shown),
                SortingSide::Right => (3, shown),
            }
        };
        if z < zone {
            return None;
        }
        zone = z;
        match z {
            0 => view.theta.push(shown),
            1 => view.gamma.push(shown),
            2 => view.delta.push(shown),
            _ => view.upsilon.as_mut()?.push(shown),
        }
    }
    Some(view)
}

/// Moves entry `k` of the premise's conclusion into the nonlinear zone by
/// cutting with the unique matching sorting projection.
pub fn coerce(s: &Sketch, d: Derivation, k: usize) -> Result<Derivation, CheckError> {
    let concl = check_derivation(s, &d)?;
    let err = |m: String| CheckError::new(ErrorCode::ElaborationError, m);
    let entry = concl
        .entries
        .get(k)
        .ok_or_else(|| err(format!("coerce index {k} out of range for {concl}")))?
        .clone();
    let sort = check_type(s, &entry.ty).map_err(|e| err(e.to_string()))?;
    let side = if entry.sign == Sign::Neg {
        SortingSide::Left
    } else {
        SortingSide::Right
    };
    let cone = coercion_for(s, side, sort, &entry.ty.to_string()).map_err(|e| err(e.to_string()))?;
    let proj = cone.projections[0].id.clone();
    let cut = Derivation::cut(Derivation::non_inv(&cone.name, vec![entry.ty.clone()], &proj), 0, d, k);
    if side == SortingSide::Left {
        return Ok(cut);
    }
    let cut_concl = check_derivation(s, &cut)?;
    let n = cut_concl.len();
    let mut target = cut_concl.entries[1..].to_vec();
    target.push(cut_concl.entries[0].clone());
    let mut index = vec![n - 1];
    index.extend(0..n - 1);
    Ok(Derivation::structural(target, StructuralMap::new(n, index), cut))
}
