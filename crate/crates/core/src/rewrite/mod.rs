//! Derivation equality: cut elimination to a canonical normal form, with
//! eta expansion for the comparisons that normalization alone cannot settle.

mod axioms;
mod canon;
pub mod term;

use std::collections::HashMap;

use thiserror::Error;

use crate::calculus::{check_derivation, CheckError, Derivation, Entry, Sequent};
use crate::sketch::Sketch;
use crate::types::TypeExpr;

use axioms::Axioms;
use canon::Canon;
use term::{to_term, Engine, Term, Var};

pub const DEFAULT_FUEL: usize = 200_000;

#[derive(Debug, Error)]
pub enum RewriteError {
    #[error("rewrite fuel exhausted")]
    FuelExhausted,
    #[error("derivation does not check: {0}")]
    Unchecked(#[from] CheckError),
    #[error("conclusions differ: {0} vs {1}")]
    ConclusionMismatch(Sequent, Sequent),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum EqVerdict {
    Equal,
    NotEqual,
    Unknown,
}

impl std::fmt::Display for EqVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            EqVerdict::Equal => "equal",
            EqVerdict::NotEqual => "notequal",
            EqVerdict::Unknown => "unknown",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EqBudget {
    /// Nested eta expansions.
    pub depth: usize,
    /// Total term nodes examined before giving up.
    pub nodes: usize,
}

impl Default for EqBudget {
    fn default() -> Self {
        EqBudget {
            depth: 4,
            nodes: 10_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    LeftmostOutermost,
    Innermost,
}

/// A normal form of `d` with the same conclusion.
pub fn normalize(s: &Sketch, d: &Derivation) -> Result<Derivation, RewriteError> {
    normalize_with(s, d, DEFAULT_FUEL)
}

pub fn normalize_with(s: &Sketch, d: &Derivation, fuel: usize) -> Result<Derivation, RewriteError> {
    check_derivation(s, d)?;
    let mut eng = Engine::new(s, fuel);
    let axioms = Axioms::new(s, &mut eng);
    let (t, iface) = to_term(s, &mut eng.ctx, d);
    let t = axioms.normal_form(&mut eng, t)?;
    let canon = Canon::new(s, &eng.ctx);
    Ok(canon.derivation(&t, &iface))
}

/// A string identifying the normal form of `d`; equal strings mean equal
/// derivations.
pub fn canonical_key(s: &Sketch, d: &Derivation) -> Result<String, RewriteError> {
    let concl = check_derivation(s, d)?;
    let mut eng = Engine::new(s, DEFAULT_FUEL);
    let axioms = Axioms::new(s, &mut eng);
    let (t, iface) = to_term(s, &mut eng.ctx, d);
    let t = axioms.normal_form(&mut eng, t)?;
    let vars: Vec<Var> = iface.iter().map(|(v, _)| *v).collect();
    Ok(format!("{concl} :: {}", Canon::new(s, &eng.ctx).key(&t, &vars)))
}

/// Contracts one projection-against-invertible cut whose operands are the
/// rule nodes themselves.
pub fn beta_step(s: &Sketch, d: &Derivation) -> Option<Derivation> {
    step(s, d, Strategy::LeftmostOutermost)
}

pub fn step(s: &Sketch, d: &Derivation, strategy: Strategy) -> Option<Derivation> {
    let inner = |d: &Derivation| -> Option<Derivation> {
        match d {
            Derivation::Cut { left, i, right, j } => {
                if let Some(l) = step(s, left, strategy) {
                    return Some(Derivation::cut(l, *i, (**right).clone(), *j));
                }
                step(s, right, strategy).map(|r| Derivation::cut((**left).clone(), *i, r, *j))
            }
            Derivation::Struct { target, map, premise } => {
                step(s, premise, strategy).map(|p| Derivation::structural(target.clone(), map.clone(), p))
            }
            Derivation::Inv {
                cone,
                args,
                sides,
                premises,
            } => {
                for (k, (_, pd)) in premises.iter().enumerate() {
                    if let Some(n) = step(s, pd, strategy) {
                        let mut ps = premises.clone();
                        ps[k].1 = n;
                        return Some(Derivation::Inv {
                            cone: cone.clone(),
                            args: args.clone(),
                            sides: sides.clone(),
                            premises: ps,
                        });
                    }
                }
                None
            }
            _ => None,
        }
    };
    match strategy {
        Strategy::LeftmostOutermost => contract(s, d).or_else(|| inner(d)),
        Strategy::Innermost => inner(d).or_else(|| contract(s, d)),
    }
}

fn contract(s: &Sketch, d: &Derivation) -> Option<Derivation> {
    let Derivation::Cut { left, i, right, j } = d else {
        return None;
    };
    let (ni, ni_pos, inv, inv_pos, ni_first) = match (&**left, &**right) {
        (n @ Derivation::NonInv { .. }, v @ Derivation::Inv { .. }) => (n, *i, v, *j, true),
        (v @ Derivation::Inv { .. }, n @ Derivation::NonInv { .. }) => (n, *j, v, *i, false),
        _ => return None,
    };
    let Derivation::NonInv { cone, args, proj } = ni else {
        unreachable!()
    };
    let Derivation::Inv {
        cone: c2,
        args: a2,
        sides,
        premises,
    } = inv
    else {
        unreachable!()
    };
    let c = s.doctrine.cone(cone)?;
    let p = c.projection(proj)?;
    if cone != c2 || args != a2 || ni_pos != p.entries.len() || inv_pos != 0 {
        return None;
    }
    let (_, body) = premises.iter().find(|(id, _)| id == proj)?;
    if ni_first {
        return Some(body.clone());
    }
    let l = p.entries.len();
    let mut target = sides.clone();
    target.extend(p.entries.iter().map(|&(r, sg)| Entry::new(args[r].clone(), sg)));
    let index = (0..l + sides.len())
        .map(|k| if k < l { sides.len() + k } else { k - l })
        .collect();
    Some(Derivation::structural(
        target,
        crate::base::StructuralMap::new(l + sides.len(), index),
        body.clone(),
    ))
}

/// Runs up to `max_steps` single contractions with `strategy`, then
/// normalizes what remains.
pub fn reduce(s: &Sketch, d: &Derivation, strategy: Strategy, max_steps: usize) -> Result<Derivation, RewriteError> {
    let mut cur = d.clone();
    for _ in 0..max_steps {
        match step(s, &cur, strategy) {
            Some(n) => cur = n,
            None => break,
        }
    }
    normalize(s, &cur)
}

pub fn equal(s: &Sketch, d1: &Derivation, d2: &Derivation) -> Result<EqVerdict, RewriteError> {
    equal_with(s, d1, d2, EqBudget::default())
}

pub fn equal_with(s: &Sketch, d1: &Derivation, d2: &Derivation, budget: EqBudget) -> Result<EqVerdict, RewriteError> {
    let c1 = check_derivation(s, d1)?;
    let c2 = check_derivation(s, d2)?;
    if c1 != c2 {
        return Err(RewriteError::ConclusionMismatch(c1, c2));
    }
    let mut eng = Engine::new(s, DEFAULT_FUEL);
    let axioms = Axioms::new(s, &mut eng);
    let (t1, iface) = to_term(s, &mut eng.ctx, d1);
    let (mut t2, iface2) = to_term(s, &mut eng.ctx, d2);
    let ren: HashMap<Var, Var> = iface2.iter().zip(&iface).map(|((b, _), (a, _))| (*b, *a)).collect();
    t2.rename(&ren);
    let mut cmp = Comparer {
        axioms,
        nodes: budget.nodes,
    };
    let verdict = match cmp.compare(&mut eng, t1, t2, iface, budget.depth) {
        Ok(v) => v,
        Err(RewriteError::FuelExhausted) => EqVerdict::Unknown,
        Err(e) => return Err(e),
    };
    Ok(verdict)
}

struct Comparer {
    axioms: Axioms,
    nodes: usize,
}

impl Comparer {
    fn compare(
        &mut self,
        eng: &mut Engine,
        t1: Term,
        t2: Term,
        iface: Vec<(Var, Entry)>,
        depth: usize,
    ) -> Result<EqVerdict, RewriteError> {
        let t1 = self.axioms.normal_form(eng, t1)?;
        let t2 = self.axioms.normal_form(eng, t2)?;
        let cost = t1.node_count() + t2.node_count();
        if cost > self.nodes {
            return Ok(EqVerdict::Unknown);
        }
        self.nodes -= cost;
        let vars: Vec<Var> = iface.iter().map(|(v, _)| *v).collect();
        {
            let canon = Canon::new(eng.s, &eng.ctx);
            if canon.key(&t1, &vars) == canon.key(&t2, &vars) {
                return Ok(EqVerdict::Equal);
            }
        }
        let s = eng.s;
        let expandable = iface.iter().position(|(_, e)| match &e.ty {
            TypeExpr::Comp(c, _) => s.doctrine.cone(c).is_some_and(|c| e.sign == c.vertex_sign.flip()),
            _ => false,
        });
        let Some(k) = expandable else {
            let inert = !t1.has_inv() && !t2.has_inv() && self.axioms.is_empty();
            return Ok(if inert { EqVerdict::NotEqual } else { EqVerdict::Unknown });
        };
        if depth == 0 {
            return Ok(EqVerdict::Unknown);
        }
        let (wire, entry) = iface[k].clone();
        let TypeExpr::Comp(cname, args) = &entry.ty else {
            unreachable!()
        };
        let cone = s.doctrine.cone(cname).expect("checked cone").clone();
        let mut verdict = EqVerdict::Equal;
        for p in &cone.projections {
            let proj_entries: Vec<Entry> = p
                .entries
                .iter()
                .map(|&(r, sg)| Entry::new(args[r].clone(), sg))
                .collect();
            let mut new_iface: Vec<(Var, Entry)> = proj_entries
                .iter()
                .map(|e| (eng.ctx.fresh(e.ty.clone()), e.clone()))
                .collect();
            let mut ports: Vec<Var> = new_iface.iter().map(|(v, _)| *v).collect();
            ports.push(wire);
            new_iface.extend(
                iface
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != k)
                    .map(|(_, x)| x.clone()),
            );
            let ni = Term::NonInv {
                cone: cname.clone(),
                args: args.clone(),
                proj: p.id.clone(),
                ports,
            };
            let e1 = eng.cut(wire, ni.clone(), t1.clone())?;
            let e2 = eng.cut(wire, ni, t2.clone())?;
            match self.compare(eng, e1, e2, new_iface, depth - 1)? {
                EqVerdict::Equal => {}
                EqVerdict::NotEqual => return Ok(EqVerdict::NotEqual),
                EqVerdict::Unknown => verdict = EqVerdict::Unknown,
            }
        }
        Ok(verdict)
    }
}
