//! Bounded backward proof search by iterative deepening.

use std::collections::BTreeSet;

use crate::base::{Sign, StructuralMap};
use crate::sketch::Sketch;
use crate::types::{check_type, TypeExpr};

use super::check::validate_sequent;
use super::derivation::{Derivation, Entry, Sequent};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    pub max_depth: usize,
    pub max_cut_depth: usize,
    pub max_nodes: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_depth: 6,
            max_cut_depth: 1,
            max_nodes: 200_000,
        }
    }
}

struct Searcher<'a> {
    s: &'a Sketch,
    cut_types: Vec<TypeExpr>,
    visited: usize,
    max_nodes: usize,
}

/// Returns a derivation concluding exactly `goal`, or `None` when the budget
/// runs out; `None` does not mean the goal is underivable.
pub fn search(s: &Sketch, goal: &Sequent, budget: SearchBudget) -> Option<Derivation> {
    validate_sequent(s, goal).ok()?;
    let mut me = Searcher {
        s,
        cut_types: cut_candidates(s, goal),
        visited: 0,
        max_nodes: budget.max_nodes,
    };
    for depth in 1..=budget.max_depth {
        if let Some(d) = me.prove(&goal.entries, depth, budget.max_cut_depth) {
            debug_assert_eq!(super::check::check_derivation(s, &d).ok().as_ref(), Some(goal));
            return Some(d);
        }
        if me.visited >= me.max_nodes {
            return None;
        }
    }
    None
}

/// Subformulas of the goal and of generator signature types.
fn cut_candidates(s: &Sketch, goal: &Sequent) -> Vec<TypeExpr> {
    let mut set: BTreeSet<TypeExpr> = BTreeSet::new();
    for e in &goal.entries {
        for t in e.ty.subterms() {
            set.insert(t.clone());
        }
    }
    for g in &s.generators {
        for (o, _) in &g.signature {
            set.insert(TypeExpr::Gen(o.clone()));
        }
    }
    let mut v: Vec<TypeExpr> = set.into_iter().collect();
    v.sort_by_key(|t| (t.size(), t.to_string()));
    v
}

/// Moves entry `k` of `phi` to the front: returns the rotated list and the map
/// from rotated positions back to `phi`.
pub fn rotate_to_front(phi: &[Entry], k: usize) -> (Vec<Entry>, StructuralMap) {
    let mut order = vec![k];
    order.extend((0..phi.len()).filter(|&i| i != k));
    let rotated = order.iter().map(|&i| phi[i].clone()).collect();
    (rotated, StructuralMap::new(phi.len(), order))
}

fn wrap(target: &[Entry], map: StructuralMap, d: Derivation) -> Derivation {
    if map.is_identity() {
        d
    } else {
        Derivation::structural(target.to_vec(), map, d)
    }
}

impl Searcher<'_> {
    fn neg_nonlinear(&self, e: &Entry) -> bool {
        e.sign == Sign::Neg
            && check_type(self.s, &e.ty)
                .map(|sort| self.s.doctrine.base.is_nonlinear(sort))
                .unwrap_or(false)
    }

    /// A valid structural map from `goal` onto `leaf` with `leaf[k] = goal[σ(k)]`.
    fn match_into(&self, leaf: &[Entry], goal: &[Entry]) -> Option<StructuralMap> {
        let shareable: Vec<bool> = goal.iter().map(|e| self.neg_nonlinear(e)).collect();
        let mut used = vec![0usize; goal.len()];
        let mut index = Vec::with_capacity(leaf.len());
        if self.assign(leaf, goal, &shareable, &mut used, &mut index) {
            Some(StructuralMap::new(goal.len(), index))
        } else {
            None
        }
    }

    fn assign(
        &self,
        leaf: &[Entry],
        goal: &[Entry],
        shareable: &[bool],
        used: &mut [usize],
        index: &mut Vec<usize>,
    ) -> bool {
        let k = index.len();
        if k == leaf.len() {
            return used.iter().zip(shareable).all(|(&u, &sh)| u == 1 || sh);
        }
        for g in 0..goal.len() {
            if goal[g] != leaf[k] || (used[g] > 0 && !shareable[g]) {
                continue;
            }
            used[g] += 1;
            index.push(g);
            if self.assign(leaf, goal, shareable, used, index) {
                return true;
            }
            index.pop();
            used[g] -= 1;
        }
        false
    }

    fn prove(&mut self, phi: &[Entry], depth: usize, cuts: usize) -> Option<Derivation> {
        if depth == 0 || self.visited >= self.max_nodes {
            return None;
        }
        self.visited += 1;
        let doctrine = self.s.doctrine.clone();

        for (k, e) in phi.iter().enumerate() {
            let TypeExpr::Comp(cname, args) = &e.ty else { continue };
            let Some(cone) = doctrine.cone(cname) else { continue };
            if e.sign != cone.vertex_sign.flip() {
                continue;
            }
            let (rotated, map) = rotate_to_front(phi, k);
            let sides = rotated[1..].to_vec();
            if !side_condition_holds(self.s, cone, &sides) {
                continue;
            }
            let mut premises = Vec::new();
            for p in &cone.projections {
                let mut sub: Vec<Entry> = p
                    .entries
                    .iter()
                    .map(|&(r, sg)| Entry::new(args[r].clone(), sg))
                    .collect();
                sub.extend(sides.iter().cloned());
                premises.push((p.id.clone(), self.prove(&sub, depth - 1, cuts)?));
            }
            let inv = Derivation::Inv {
                cone: cname.clone(),
                args: args.clone(),
                sides,
                premises,
            };
            return Some(wrap(phi, map, inv));
        }

        for e in phi {
            if e.sign != Sign::Pos {
                continue;
            }
            let leaf = vec![e.flipped(), e.clone()];
            if let Some(map) = self.match_into(&leaf, phi) {
                return Some(wrap(phi, map, Derivation::Id(e.ty.clone())));
            }
        }
        for g in &self.s.generators {
            let leaf: Vec<Entry> = g
                .signature
                .iter()
                .map(|(o, sg)| Entry::new(TypeExpr::Gen(o.clone()), *sg))
                .collect();
            if let Some(map) = self.match_into(&leaf, phi) {
                return Some(wrap(phi, map, Derivation::Gen(g.name.clone())));
            }
        }
        for e in phi {
            let TypeExpr::Comp(cname, args) = &e.ty else { continue };
            let Some(cone) = doctrine.cone(cname) else { continue };
            if e.sign != cone.vertex_sign {
                continue;
            }
            for p in &cone.projections {
                let mut leaf: Vec<Entry> = p
                    .entries
                    .iter()
                    .map(|&(r, sg)| Entry::new(args[r].clone(), sg))
                    .collect();
                leaf.push(e.clone());
                if let Some(map) = self.match_into(&leaf, phi) {
                    return Some(wrap(phi, map, Derivation::non_inv(cname, args.clone(), &p.id)));
                }
            }
        }

        if cuts == 0 || depth < 2 {
            return None;
        }
        let cut_types = self.cut_types.clone();
        let n = phi.len();
        let shared: Vec<usize> = (0..n).filter(|&i| self.neg_nonlinear(&phi[i])).collect();
        let owned: Vec<usize> = (0..n).filter(|i| !shared.contains(i)).collect();
        for t in &cut_types {
            for sign in [Sign::Pos, Sign::Neg] {
                for mask in 0..(1u64 << owned.len()) {
                    let mut left_idx: Vec<usize> = Vec::new();
                    let mut right_idx: Vec<usize> = Vec::new();
                    for (b, &i) in owned.iter().enumerate() {
                        if mask >> b & 1 == 1 {
                            left_idx.push(i);
                        } else {
                            right_idx.push(i);
                        }
                    }
                    left_idx.extend(&shared);
                    right_idx.extend(&shared);
                    left_idx.sort_unstable();
                    right_idx.sort_unstable();
                    let mut left: Vec<Entry> = left_idx.iter().map(|&i| phi[i].clone()).collect();
                    left.push(Entry::new(t.clone(), sign));
                    let mut right = vec![Entry::new(t.clone(), sign.flip())];
                    right.extend(right_idx.iter().map(|&i| phi[i].clone()));
                    if validate_sequent(self.s, &Sequent::new(left.clone())).is_err()
                        || validate_sequent(self.s, &Sequent::new(right.clone())).is_err()
                    {
                        continue;
                    }
                    let Some(dl) = self.prove(&left, depth - 1, cuts - 1) else {
                        continue;
                    };
                    let Some(dr) = self.prove(&right, depth - 1, cuts - 1) else {
                        continue;
                    };
                    let li = left.len() - 1;
                    let cut = Derivation::cut(dl, li, dr, 0);
                    let mut index = left_idx.clone();
                    index.extend(&right_idx);
                    return Some(wrap(phi, StructuralMap::new(n, index), cut));
                }
            }
        }
        None
    }
}

fn side_condition_holds(s: &Sketch, cone: &crate::doctrine::DiscreteCone, sides: &[Entry]) -> bool {
    let Ok(sh) = super::check::shape(s, sides) else {
        return false;
    };
    let mut cond = vec![crate::base::SignedSort::new(cone.vertex_sort, cone.vertex_sign.flip())];
    cond.extend(sh);
    s.doctrine.base.allows(&cond)
}
