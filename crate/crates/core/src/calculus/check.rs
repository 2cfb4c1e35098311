use std::fmt;

use serde::Serialize;

use crate::base::{SignedSort, StructuralMap};
use crate::sketch::Sketch;
use crate::types::check_type;

use super::derivation::{Derivation, Entry, Sequent};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ErrorCode {
    CutTypeMismatch,
    CutSignMismatch,
    BadCutIndex,
    BadStructuralMap,
    PremiseShapeMismatch,
    MissingProjectionPremise,
    SideConditionFailed,
    UnknownGenerator,
    UnknownCone,
    UnknownProjection,
    InadmissibleConclusion,
    TypeError,
    ConclusionMismatch,
    ElaborationError,
}

impl ErrorCode {
    pub const ALL: &'static [ErrorCode] = &[
        ErrorCode::CutTypeMismatch,
        ErrorCode::CutSignMismatch,
        ErrorCode::BadCutIndex,
        ErrorCode::BadStructuralMap,
        ErrorCode::PremiseShapeMismatch,
        ErrorCode::MissingProjectionPremise,
        ErrorCode::SideConditionFailed,
        ErrorCode::UnknownGenerator,
        ErrorCode::UnknownCone,
        ErrorCode::UnknownProjection,
        ErrorCode::InadmissibleConclusion,
        ErrorCode::TypeError,
        ErrorCode::ConclusionMismatch,
        ErrorCode::ElaborationError,
    ];

    pub fn parse(name: &str) -> Option<ErrorCode> {
        Self::ALL.iter().copied().find(|c| c.to_string() == name)
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// A rejection with the path of child indices leading to the offending node.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{code} at {}: {message}", show_path(.path))]
pub struct CheckError {
    pub code: ErrorCode,
    pub path: Vec<usize>,
    pub message: String,
}

pub fn show_path(path: &[usize]) -> String {
    if path.is_empty() {
        return "root".into();
    }
    let parts: Vec<String> = path.iter().map(|p| p.to_string()).collect();
    format!("root.{}", parts.join("."))
}

impl CheckError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        CheckError {
            code,
            path: Vec::new(),
            message: message.into(),
        }
    }

    fn under(mut self, child: usize) -> Self {
        self.path.insert(0, child);
        self
    }
}

/// A checked derivation with each node's conclusion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Annotated {
    pub conclusion: Sequent,
    pub children: Vec<Annotated>,
}

pub fn shape(s: &Sketch, entries: &[Entry]) -> Result<Vec<SignedSort>, CheckError> {
    entries
        .iter()
        .map(|e| {
            check_type(s, &e.ty)
                .map(|sort| SignedSort::new(sort, e.sign))
                .map_err(|err| CheckError::new(ErrorCode::TypeError, err.to_string()))
        })
        .collect()
}

/// Types well formed, signed sorts admissible and base-inhabited.
pub fn validate_sequent(s: &Sketch, seq: &Sequent) -> Result<(), CheckError> {
    let sh = shape(s, &seq.entries)?;
    if s.doctrine.base.allows(&sh) {
        Ok(())
    } else {
        Err(CheckError::new(
            ErrorCode::InadmissibleConclusion,
            format!("{seq} is not admissible and inhabited in {}", s.doctrine.base.name),
        ))
    }
}

pub fn check_derivation(s: &Sketch, d: &Derivation) -> Result<Sequent, CheckError> {
    annotate(s, d).map(|a| a.conclusion)
}

pub fn annotate(s: &Sketch, d: &Derivation) -> Result<Annotated, CheckError> {
    let (conclusion, children) = match d {
        Derivation::Id(t) => {
            check_ty(s, t)?;
            (
                Sequent::new(vec![Entry::neg(t.clone()), Entry::pos(t.clone())]),
                Vec::new(),
            )
        }
        Derivation::Gen(name) => {
            let g = s
                .generator(name)
                .ok_or_else(|| CheckError::new(ErrorCode::UnknownGenerator, format!("no generator `{name}`")))?;
            let entries = g
                .signature
                .iter()
                .map(|(o, sign)| Entry::new(crate::types::TypeExpr::Gen(o.clone()), *sign))
                .collect();
            (Sequent::new(entries), Vec::new())
        }
        Derivation::Cut { left, i, right, j } => {
            let l = annotate(s, left).map_err(|e| e.under(0))?;
            let r = annotate(s, right).map_err(|e| e.under(1))?;
            let (le, re) = (&l.conclusion.entries, &r.conclusion.entries);
            if *i >= le.len() || *j >= re.len() {
                return Err(CheckError::new(
                    ErrorCode::BadCutIndex,
                    format!(
                        "cut at [{i},{j}] on conclusions of length {} and {}",
                        le.len(),
                        re.len()
                    ),
                ));
            }
            if le[*i].ty != re[*j].ty {
                return Err(CheckError::new(
                    ErrorCode::CutTypeMismatch,
                    format!("cannot cut {} against {}", le[*i], re[*j]),
                ));
            }
            if le[*i].sign == re[*j].sign {
                return Err(CheckError::new(
                    ErrorCode::CutSignMismatch,
                    format!("cut entries {} and {} have the same sign", le[*i], re[*j]),
                ));
            }
            let mut out: Vec<Entry> = Vec::with_capacity(le.len() + re.len() - 2);
            out.extend(le.iter().enumerate().filter(|(k, _)| k != i).map(|(_, e)| e.clone()));
            out.extend(re.iter().enumerate().filter(|(k, _)| k != j).map(|(_, e)| e.clone()));
            (Sequent::new(out), vec![l, r])
        }
        Derivation::Struct { target, map, premise } => {
            let p = annotate(s, premise).map_err(|e| e.under(0))?;
            check_struct(s, target, map, &p.conclusion)?;
            (Sequent::new(target.clone()), vec![p])
        }
        Derivation::NonInv { cone, args, proj } => {
            let c = lookup_cone(s, cone, args)?;
            let p = c.projection(proj).ok_or_else(|| {
                CheckError::new(
                    ErrorCode::UnknownProjection,
                    format!("cone `{cone}` has no projection `{proj}`"),
                )
            })?;
            let mut out: Vec<Entry> = p
                .entries
                .iter()
                .map(|&(k, sign)| Entry::new(args[k].clone(), sign))
                .collect();
            out.push(Entry::new(
                crate::types::TypeExpr::Comp(cone.clone(), args.clone()),
                c.vertex_sign,
            ));
            (Sequent::new(out), Vec::new())
        }
        Derivation::Inv {
            cone,
            args,
            sides,
            premises,
        } => {
            let c = lookup_cone(s, cone, args)?;
            let side_shape = shape(s, sides)?;
            let mut cond = vec![SignedSort::new(c.vertex_sort, c.vertex_sign.flip())];
            cond.extend(side_shape);
            if !s.doctrine.base.allows(&cond) {
                return Err(CheckError::new(
                    ErrorCode::SideConditionFailed,
                    format!(
                        "{} is not allowed by {}",
                        s.doctrine.base.show(&cond),
                        s.doctrine.base.name
                    ),
                ));
            }
            for (pid, _) in premises {
                if c.projection(pid).is_none() {
                    return Err(CheckError::new(
                        ErrorCode::UnknownProjection,
                        format!("cone `{cone}` has no projection `{pid}`"),
                    ));
                }
            }
            let mut children = Vec::new();
            for p in &c.projections {
                let found: Vec<usize> = premises
                    .iter()
                    .enumerate()
                    .filter(|(_, (pid, _))| *pid == p.id)
                    .map(|(k, _)| k)
                    .collect();
                if found.is_empty() {
                    return Err(CheckError::new(
                        ErrorCode::MissingProjectionPremise,
                        format!("no premise for projection `{}` of `{cone}`", p.id),
                    ));
                }
                if found.len() > 1 {
                    return Err(CheckError::new(
                        ErrorCode::PremiseShapeMismatch,
                        format!("projection `{}` has {} premises", p.id, found.len()),
                    ));
                }
            }
            for (k, (pid, prem)) in premises.iter().enumerate() {
                let a = annotate(s, prem).map_err(|e| e.under(k))?;
                let p = c.projection(pid).expect("checked above");
                let mut want: Vec<Entry> = p
                    .entries
                    .iter()
                    .map(|&(r, sign)| Entry::new(args[r].clone(), sign))
                    .collect();
                want.extend(sides.iter().cloned());
                if a.conclusion.entries != want {
                    return Err(CheckError::new(
                        ErrorCode::PremiseShapeMismatch,
                        format!(
                            "premise `{pid}` concludes {}, expected {}",
                            a.conclusion,
                            Sequent::new(want)
                        ),
                    )
                    .under(k));
                }
                children.push(a);
            }
            let mut out = vec![Entry::new(
                crate::types::TypeExpr::Comp(cone.clone(), args.clone()),
                c.vertex_sign.flip(),
            )];
            out.extend(sides.iter().cloned());
            (Sequent::new(out), children)
        }
    };
    validate_sequent(s, &conclusion)?;
    Ok(Annotated { conclusion, children })
}

fn check_ty(s: &Sketch, t: &crate::types::TypeExpr) -> Result<(), CheckError> {
    check_type(s, t)
        .map(|_| ())
        .map_err(|e| CheckError::new(ErrorCode::TypeError, e.to_string()))
}

fn lookup_cone<'a>(
    s: &'a Sketch,
    cone: &str,
    args: &[crate::types::TypeExpr],
) -> Result<&'a crate::doctrine::DiscreteCone, CheckError> {
    let c = s.doctrine.cone(cone).ok_or_else(|| {
        CheckError::new(
            ErrorCode::UnknownCone,
            format!("no cone `{cone}` in {}", s.doctrine.name),
        )
    })?;
    check_ty(s, &crate::types::TypeExpr::Comp(cone.into(), args.to_vec()))?;
    Ok(c)
}

pub fn check_struct(s: &Sketch, target: &[Entry], map: &StructuralMap, premise: &Sequent) -> Result<(), CheckError> {
    let bad = |msg: String| CheckError::new(ErrorCode::BadStructuralMap, msg);
    let target_shape = shape(s, target)?;
    if map.source_len != target.len() {
        return Err(bad(format!(
            "map expects {} entries, conclusion has {}",
            map.source_len,
            target.len()
        )));
    }
    if map.index.len() != premise.len() {
        return Err(bad(format!(
            "map has {} positions, premise has {}",
            map.index.len(),
            premise.len()
        )));
    }
    let check = s
        .doctrine
        .base
        .validate_structural_map(&target_shape, map)
        .map_err(|e| bad(e.to_string()))?;
    if !check.valid {
        return Err(bad(
            "an entry that is not negative and nonlinear is duplicated or dropped".into(),
        ));
    }
    for (k, &i) in map.index.iter().enumerate() {
        if premise.entries[k] != target[i] {
            return Err(bad(format!(
                "premise entry {k} is {}, but the map sends it to {}",
                premise.entries[k], target[i]
            )));
        }
    }
    Ok(())
}
