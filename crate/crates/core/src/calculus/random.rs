//! Random generation of checked derivations, for property tests.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::base::{Sign, StructuralMap};
use crate::sketch::Sketch;
use crate::types::{check_type, enumerate_types, TypeExpr};

use super::check::check_derivation;
use super::derivation::{Derivation, Entry, Sequent};

pub struct Sampler<'a> {
    s: &'a Sketch,
    types: Vec<TypeExpr>,
}

impl<'a> Sampler<'a> {
    /// Leaf types are drawn from the types of height at most `type_height`.
    pub fn new(s: &'a Sketch, type_height: usize) -> Self {
        let types = enumerate_types(s, type_height, 10_000)
            .map(|st| st.strata.last().cloned().unwrap_or_default())
            .unwrap_or_default();
        Sampler { s, types }
    }

    /// A checked derivation with at most `max_nodes` nodes.
    pub fn sample<R: Rng>(&self, rng: &mut R, max_nodes: usize) -> (Derivation, Sequent) {
        let mut tries = 0usize;
        loop {
            tries += 1;
            let budget = rng.gen_range(1..=max_nodes);
            if let Some(out) = self.gen(rng, budget) {
                let n = out.0.node_count();
                // small samples are cheap to hit; insist on some size first
                if n <= max_nodes && (2 * n >= budget || tries > 50) {
                    return out;
                }
            }
        }
    }

    /// A checked derivation containing at least one cut of a projection
    /// against the matching invertible rule.
    pub fn sample_redex<R: Rng>(&self, rng: &mut R, max_nodes: usize) -> (Derivation, Sequent) {
        loop {
            let budget = rng.gen_range(3..=max_nodes.max(3));
            let Some(base) = self.gen(rng, budget - 2) else {
                continue;
            };
            if 2 * base.0.node_count() < budget - 2 && rng.gen_bool(0.8) {
                continue;
            }
            let Some(inv) = self.inv_over(rng, base) else { continue };
            let Some(redex) = self.redex(rng, inv) else { continue };
            let out = if rng.gen_bool(0.3) {
                let spare = max_nodes.saturating_sub(redex.0.node_count() + 1);
                let joined = (0..8).find_map(|_| {
                    let other = self.gen(rng, spare.max(1))?;
                    self.cut_pair(rng, redex.clone(), other)
                });
                match joined {
                    Some(c) => c,
                    None => redex,
                }
            } else {
                redex
            };
            if out.0.node_count() <= max_nodes {
                return out;
            }
        }
    }

    fn checked(&self, d: Derivation) -> Option<(Derivation, Sequent)> {
        let c = check_derivation(self.s, &d).ok()?;
        Some((d, c))
    }

    fn random_type<R: Rng>(&self, rng: &mut R, sort: crate::base::SortId) -> Option<TypeExpr> {
        let pool: Vec<&TypeExpr> = self
            .types
            .iter()
            .filter(|t| check_type(self.s, t).ok() == Some(sort))
            .collect();
        pool.choose(rng).map(|t| (*t).clone())
    }

    fn gen<R: Rng>(&self, rng: &mut R, budget: usize) -> Option<(Derivation, Sequent)> {
        if budget <= 1 || rng.gen_bool(0.1) {
            return self.leaf(rng);
        }
        match rng.gen_range(0..10) {
            0..=3 => {
                let b1 = rng.gen_range(1..budget.max(2));
                let b2 = (budget - 1).saturating_sub(b1).max(1);
                let l = self.gen(rng, b1)?;
                (0..8).find_map(|_| {
                    let r = self.gen(rng, b2)?;
                    self.cut_pair(rng, l.clone(), r)
                })
            }
            4..=5 => {
                let d = self.gen(rng, budget - 1)?;
                self.shuffle(rng, d)
            }
            6..=8 => {
                let d = self.gen(rng, budget - 1)?;
                self.inv_over(rng, d)
            }
            _ => {
                if budget < 3 {
                    return self.leaf(rng);
                }
                let d = self.gen(rng, budget - 2)?;
                let inv = self.inv_over(rng, d)?;
                self.redex(rng, inv)
            }
        }
    }

    fn leaf<R: Rng>(&self, rng: &mut R) -> Option<(Derivation, Sequent)> {
        match rng.gen_range(0..3) {
            0 => {
                let t = self.types.choose(rng)?.clone();
                self.checked(Derivation::Id(t))
            }
            1 if !self.s.generators.is_empty() => {
                let g = self.s.generators.choose(rng)?;
                self.checked(Derivation::Gen(g.name.clone()))
            }
            _ => {
                let cone = self.s.doctrine.cones.choose(rng)?;
                let p = cone.projections.choose(rng)?;
                let args: Option<Vec<TypeExpr>> = cone.reduct.iter().map(|o| self.random_type(rng, o.sort)).collect();
                self.checked(Derivation::non_inv(&cone.name, args?, &p.id))
            }
        }
    }

    pub fn cut_pair<R: Rng>(
        &self,
        rng: &mut R,
        l: (Derivation, Sequent),
        r: (Derivation, Sequent),
    ) -> Option<(Derivation, Sequent)> {
        let mut pairs = Vec::new();
        for (i, a) in l.1.entries.iter().enumerate() {
            for (j, b) in r.1.entries.iter().enumerate() {
                if a.ty == b.ty && a.sign != b.sign {
                    pairs.push((i, j));
                }
            }
        }
        let &(i, j) = pairs.choose(rng)?;
        self.checked(Derivation::cut(l.0, i, r.0, j))
    }

    fn shuffle<R: Rng>(&self, rng: &mut R, d: (Derivation, Sequent)) -> Option<(Derivation, Sequent)> {
        let premise = d.1.entries.clone();
        let n = premise.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let mut target: Vec<Entry> = order.iter().map(|&k| premise[k].clone()).collect();
        let mut index = vec![0; n];
        for (pos, &k) in order.iter().enumerate() {
            index[k] = pos;
        }
        let base = &self.s.doctrine.base;
        let nonlinear_neg =
            |e: &Entry| e.sign == Sign::Neg && check_type(self.s, &e.ty).map(|s| base.is_nonlinear(s)).unwrap_or(false);
        if rng.gen_bool(0.3) {
            // contract two equal negative nonlinear entries
            let cands: Vec<(usize, usize)> = (0..n)
                .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
                .filter(|&(a, b)| premise[a] == premise[b] && nonlinear_neg(&premise[a]))
                .collect();
            if let Some(&(a, b)) = cands.choose(rng) {
                let drop = index[b];
                target.remove(drop);
                for v in index.iter_mut() {
                    if *v > drop {
                        *v -= 1;
                    }
                }
                index[b] = index[a];
            }
        }
        if rng.gen_bool(0.3) {
            let extra: Vec<&TypeExpr> = self
                .types
                .iter()
                .filter(|t| check_type(self.s, t).map(|s| base.is_nonlinear(s)).unwrap_or(false))
                .collect();
            if let Some(t) = extra.choose(rng) {
                let at = rng.gen_range(0..=target.len());
                target.insert(at, Entry::neg((*t).clone()));
                for v in index.iter_mut() {
                    if *v >= at {
                        *v += 1;
                    }
                }
            }
        }
        let map = StructuralMap::new(target.len(), index);
        if map.is_identity() {
            return Some(d);
        }
        self.checked(Derivation::structural(target, map, d.0))
    }

    /// Applies an invertible rule whose premise is `d` (rearranged).
    fn inv_over<R: Rng>(&self, rng: &mut R, d: (Derivation, Sequent)) -> Option<(Derivation, Sequent)> {
        let mut cones: Vec<&crate::doctrine::DiscreteCone> = self.s.doctrine.cones.iter().collect();
        cones.shuffle(rng);
        let phi = &d.1.entries;
        for cone in cones {
            if cone.projections.is_empty() {
                let args: Option<Vec<TypeExpr>> = cone.reduct.iter().map(|o| self.random_type(rng, o.sort)).collect();
                let inv = Derivation::Inv {
                    cone: cone.name.clone(),
                    args: args?,
                    sides: phi.clone(),
                    premises: Vec::new(),
                };
                if let Some(out) = self.checked(inv) {
                    return Some(out);
                }
                continue;
            }
            let p = &cone.projections[0];
            // choose distinct positions of phi for the projection entries
            let mut positions: Vec<usize> = Vec::new();
            let mut args: Vec<Option<TypeExpr>> = vec![None; cone.reduct.len()];
            let mut ok = true;
            for &(r, sign) in &p.entries {
                let cands: Vec<usize> = (0..phi.len())
                    .filter(|k| !positions.contains(k))
                    .filter(|&k| phi[k].sign == sign)
                    .filter(|&k| check_type(self.s, &phi[k].ty).ok() == Some(cone.reduct[r].sort))
                    .filter(|&k| args[r].as_ref().is_none_or(|t| *t == phi[k].ty))
                    .collect();
                match cands.choose(rng) {
                    Some(&k) => {
                        positions.push(k);
                        args[r] = Some(phi[k].ty.clone());
                    }
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                continue;
            }
            let mut full_args = Vec::new();
            for (r, a) in args.into_iter().enumerate() {
                match a {
                    Some(t) => full_args.push(t),
                    None => full_args.push(self.random_type(rng, cone.reduct[r].sort)?),
                }
            }
            let mut order = positions.clone();
            order.extend((0..phi.len()).filter(|k| !positions.contains(k)));
            let reordered: Vec<Entry> = order.iter().map(|&k| phi[k].clone()).collect();
            let mut index = vec![0; phi.len()];
            for (pos, &k) in order.iter().enumerate() {
                index[k] = pos;
            }
            let map = StructuralMap::new(phi.len(), index);
            let premise = if map.is_identity() {
                d.0.clone()
            } else {
                Derivation::structural(reordered.clone(), map, d.0.clone())
            };
            let sides = reordered[positions.len()..].to_vec();
            let want: Vec<Entry> = p
                .entries
                .iter()
                .map(|&(r, s)| Entry::new(full_args[r].clone(), s))
                .collect();
            let mut premises = vec![(p.id.clone(), premise.clone())];
            let mut all = true;
            for q in &cone.projections[1..] {
                let other: Vec<Entry> = q
                    .entries
                    .iter()
                    .map(|&(r, s)| Entry::new(full_args[r].clone(), s))
                    .collect();
                if other == want {
                    premises.push((q.id.clone(), premise.clone()));
                } else {
                    all = false;
                    break;
                }
            }
            if !all {
                continue;
            }
            let inv = Derivation::Inv {
                cone: cone.name.clone(),
                args: full_args,
                sides,
                premises,
            };
            if let Some(out) = self.checked(inv) {
                return Some(out);
            }
        }
        None
    }

    /// Cuts the principal entry of an invertible conclusion against a projection.
    fn redex<R: Rng>(&self, rng: &mut R, inv: (Derivation, Sequent)) -> Option<(Derivation, Sequent)> {
        let Derivation::Inv { cone, args, .. } = &inv.0 else {
            return None;
        };
        let c = self.s.doctrine.cone(cone)?;
        let p = c.projections.choose(rng)?;
        let ni = Derivation::non_inv(cone, args.clone(), &p.id);
        let last = p.entries.len();
        if rng.gen_bool(0.5) {
            self.checked(Derivation::cut(ni, last, inv.0, 0))
        } else {
            self.checked(Derivation::cut(inv.0, 0, ni, last))
        }
    }
}
