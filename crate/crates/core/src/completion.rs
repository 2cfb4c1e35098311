//! The free completion at desk scale: object stages, bounded enumeration of
//! hom-sets up to derivation equality, and a bounded extremality probe for
//! cone instances.
//!
//! Hom-set enumeration walks a restricted grammar of derivations: cuts join
//! the last entry of the left operand to the first entry of the right, cut
//! types come from a finite universe, no structural node sits directly on
//! another one, and no cut has an identity operand. Every derivation is
//! equal to one of this shape with no more nodes, as long as its cut types
//! lie in the universe.

use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;

use serde::Serialize;
use thiserror::Error;

use crate::base::{Sign, SignedSort, StructuralMap};
use crate::calculus::{check_derivation, shape, validate_sequent, CheckError, Derivation, Entry, Sequent};
use crate::rewrite::{canonical_key, equal, EqVerdict, RewriteError};
use crate::sketch::{ConeInstance, Sketch};
use crate::types::{check_type, enumerate_types, TypeError, TypeExpr, TypeStrata, DEFAULT_TYPE_CEILING};

#[derive(Debug, Error)]
pub enum CompletionError {
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    #[error("invalid sequent: {0}")]
    InvalidSequent(#[from] CheckError),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("bad cone instance: {0}")]
    Instance(String),
}

/// Objects of the n-th stage: the types of height at most n.
pub fn stage_objects(s: &Sketch, n: usize) -> Result<TypeStrata, TypeError> {
    enumerate_types(s, n, DEFAULT_TYPE_CEILING)
}

#[derive(Clone, Debug)]
pub struct EnumConfig {
    /// Longest intermediate sequent, counted beyond the goal length.
    pub extra_len: usize,
    /// Derivations built before giving up.
    pub max_derivations: usize,
}

impl Default for EnumConfig {
    fn default() -> Self {
        EnumConfig {
            extra_len: 2,
            max_derivations: 2_000_000,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HomEnumeration {
    #[serde(serialize_with = "show")]
    pub sequent: Sequent,
    pub bound: usize,
    #[serde(skip)]
    pub classes: Vec<Derivation>,
    /// Pairs of classes that equality could not separate or merge.
    pub unknown_pairs: Vec<(usize, usize)>,
    /// Derivations examined before deduplication.
    pub enumerated: usize,
    pub exhaustive: bool,
}

fn show<T: std::fmt::Display, S: serde::Serializer>(v: &T, ser: S) -> Result<S::Ok, S::Error> {
    ser.serialize_str(&v.to_string())
}

pub fn enumerate_homset(s: &Sketch, goal: &Sequent, bound: usize) -> Result<HomEnumeration, CompletionError> {
    enumerate_homset_with(s, goal, bound, &EnumConfig::default())
}

pub fn enumerate_homset_with(
    s: &Sketch,
    goal: &Sequent,
    bound: usize,
    cfg: &EnumConfig,
) -> Result<HomEnumeration, CompletionError> {
    validate_sequent(s, goal)?;
    let mut en = Enumerator::new(s, goal, cfg);
    let mut all = Vec::new();
    for n in 1..=bound {
        all.extend(en.exact(&goal.entries, n)?.iter().cloned());
    }
    let enumerated = all.len();
    let (classes, unknown_pairs) = classify(s, all)?;
    Ok(HomEnumeration {
        sequent: goal.clone(),
        bound,
        classes,
        unknown_pairs,
        enumerated,
        exhaustive: true,
    })
}

type Classes = (Vec<Derivation>, Vec<(usize, usize)>);

/// Groups derivations by normal form, then merges groups that equality
/// proves equal. Representatives are the smallest members.
fn classify(s: &Sketch, mut all: Vec<Derivation>) -> Result<Classes, CompletionError> {
    all.sort_by_key(|d| d.node_count());
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut reps: Vec<Derivation> = Vec::new();
    for d in all {
        if seen.insert(canonical_key(s, &d)?) {
            reps.push(d);
        }
    }
    let mut classes: Vec<Derivation> = Vec::new();
    let mut unknown = Vec::new();
    for d in reps {
        let mut merged = false;
        let mut pending = Vec::new();
        for (k, c) in classes.iter().enumerate() {
            match equal(s, c, &d)? {
                EqVerdict::Equal => {
                    merged = true;
                    break;
                }
                EqVerdict::Unknown => pending.push(k),
                EqVerdict::NotEqual => {}
            }
        }
        if !merged {
            let idx = classes.len();
            unknown.extend(pending.into_iter().map(|k| (k, idx)));
            classes.push(d);
        }
    }
    Ok((classes, unknown))
}

type Key = (Vec<Entry>, usize);

struct Enumerator<'a> {
    s: &'a Sketch,
    universe: Vec<TypeExpr>,
    max_len: usize,
    limit: usize,
    produced: usize,
    exact: HashMap<Key, Rc<Vec<Derivation>>>,
    bare: HashMap<Key, Rc<Vec<Derivation>>>,
}

impl<'a> Enumerator<'a> {
    fn new(s: &'a Sketch, goal: &Sequent, cfg: &EnumConfig) -> Self {
        Enumerator {
            s,
            universe: cut_universe(s, goal),
            max_len: goal.len() + cfg.extra_len,
            limit: cfg.max_derivations,
            produced: 0,
            exact: HashMap::new(),
            bare: HashMap::new(),
        }
    }

    fn charge(&mut self, n: usize) -> Result<(), CompletionError> {
        self.produced += n;
        if self.produced > self.limit {
            return Err(CompletionError::ResourceLimit(format!(
                "more than {} derivations",
                self.limit
            )));
        }
        Ok(())
    }

    /// Derivations of exactly `n` nodes concluding `seq`.
    fn exact(&mut self, seq: &[Entry], n: usize) -> Result<Rc<Vec<Derivation>>, CompletionError> {
        let key = (seq.to_vec(), n);
        if let Some(v) = self.exact.get(&key) {
            return Ok(v.clone());
        }
        let mut out: Vec<Derivation> = self.bare(seq, n)?.as_ref().clone();
        if n >= 2 {
            for (premise, map) in self.struct_premises(seq) {
                for d in self.bare(&premise, n - 1)?.iter() {
                    out.push(Derivation::structural(seq.to_vec(), map.clone(), d.clone()));
                }
            }
        }
        self.charge(out.len())?;
        let out = Rc::new(out);
        self.exact.insert(key, out.clone());
        Ok(out)
    }

    /// As `exact`, without a structural node at the root.
    fn bare(&mut self, seq: &[Entry], n: usize) -> Result<Rc<Vec<Derivation>>, CompletionError> {
        let key = (seq.to_vec(), n);
        if let Some(v) = self.bare.get(&key) {
            return Ok(v.clone());
        }
        let mut out = Vec::new();
        if n == 1 {
            out.extend(self.leaves(seq));
        }
        if n >= 2 {
            self.invertible(seq, n, &mut out)?;
        }
        if n >= 3 {
            self.cuts(seq, n, &mut out)?;
        }
        let out = Rc::new(out);
        self.bare.insert(key, out.clone());
        Ok(out)
    }

    fn leaves(&self, seq: &[Entry]) -> Vec<Derivation> {
        let mut out = Vec::new();
        if seq.len() == 2 && seq[0].sign == Sign::Neg && seq[1] == seq[0].flipped() {
            out.push(Derivation::Id(seq[0].ty.clone()));
        }
        for g in &self.s.generators {
            let sig: Vec<Entry> = g
                .signature
                .iter()
                .map(|(o, sg)| Entry::new(TypeExpr::gen(o), *sg))
                .collect();
            if sig == seq {
                out.push(Derivation::Gen(g.name.clone()));
            }
        }
        if let Some(TypeExpr::Comp(c, args)) = seq.last().map(|e| &e.ty) {
            if let Some(cone) = self.s.doctrine.cone(c) {
                for p in &cone.projections {
                    let d = Derivation::non_inv(c, args.clone(), &p.id);
                    if check_derivation(self.s, &d).is_ok_and(|got| got.entries == seq) {
                        out.push(d);
                    }
                }
            }
        }
        if let Some(inv) = self.inv_head(seq) {
            let (cone, args, sides) = inv;
            if self.s.doctrine.cone(&cone).is_some_and(|c| c.projections.is_empty()) {
                let d = Derivation::Inv {
                    cone,
                    args,
                    sides,
                    premises: Vec::new(),
                };
                if check_derivation(self.s, &d).is_ok() {
                    out.push(d);
                }
            }
        }
        out
    }

    fn inv_head(&self, seq: &[Entry]) -> Option<(String, Vec<TypeExpr>, Vec<Entry>)> {
        let first = seq.first()?;
        let TypeExpr::Comp(c, args) = &first.ty else {
            return None;
        };
        let cone = self.s.doctrine.cone(c)?;
        if first.sign != cone.vertex_sign.flip() {
            return None;
        }
        let sides = seq[1..].to_vec();
        let mut cond = vec![SignedSort::new(cone.vertex_sort, cone.vertex_sign.flip())];
        cond.extend(shape(self.s, &sides).ok()?);
        self.s
            .doctrine
            .base
            .allows(&cond)
            .then(|| (c.clone(), args.clone(), sides))
    }

    fn invertible(&mut self, seq: &[Entry], n: usize, out: &mut Vec<Derivation>) -> Result<(), CompletionError> {
        let Some((cname, args, sides)) = self.inv_head(seq) else {
            return Ok(());
        };
        let cone = self.s.doctrine.cone(&cname).expect("cone").clone();
        if cone.projections.is_empty() {
            return Ok(());
        }
        let premise_seqs: Vec<(String, Vec<Entry>)> = cone
            .projections
            .iter()
            .map(|p| {
                let mut v: Vec<Entry> = p
                    .entries
                    .iter()
                    .map(|&(r, sg)| Entry::new(args[r].clone(), sg))
                    .collect();
                v.extend(sides.iter().cloned());
                (p.id.clone(), v)
            })
            .collect();
        if premise_seqs.iter().any(|(_, v)| v.len() > self.max_len) {
            return Ok(());
        }
        for sizes in compositions(n - 1, premise_seqs.len()) {
            let mut families: Vec<Vec<(String, Derivation)>> = vec![Vec::new()];
            for ((id, ps), &size) in premise_seqs.iter().zip(&sizes) {
                let options = self.exact(ps, size)?;
                let mut next = Vec::new();
                for fam in &families {
                    for d in options.iter() {
                        let mut f = fam.clone();
                        f.push((id.clone(), d.clone()));
                        next.push(f);
                    }
                }
                families = next;
                if families.is_empty() {
                    break;
                }
            }
            self.charge(families.len())?;
            for premises in families {
                out.push(Derivation::Inv {
                    cone: cname.clone(),
                    args: args.clone(),
                    sides: sides.clone(),
                    premises,
                });
            }
        }
        Ok(())
    }

    fn cuts(&mut self, seq: &[Entry], n: usize, out: &mut Vec<Derivation>) -> Result<(), CompletionError> {
        let universe = self.universe.clone();
        for m in 0..=seq.len() {
            for t in &universe {
                for sign in [Sign::Pos, Sign::Neg] {
                    let mut left = seq[..m].to_vec();
                    left.push(Entry::new(t.clone(), sign));
                    let mut right = vec![Entry::new(t.clone(), sign.flip())];
                    right.extend(seq[m..].iter().cloned());
                    if left.len() > self.max_len || right.len() > self.max_len {
                        continue;
                    }
                    if validate_sequent(self.s, &Sequent::new(left.clone())).is_err()
                        || validate_sequent(self.s, &Sequent::new(right.clone())).is_err()
                    {
                        continue;
                    }
                    for n1 in 1..=n - 2 {
                        let ls = self.exact(&left, n1)?;
                        if ls.is_empty() {
                            continue;
                        }
                        let rs = self.exact(&right, n - 1 - n1)?;
                        self.charge(ls.len() * rs.len())?;
                        for l in ls.iter().filter(|d| !matches!(d, Derivation::Id(_))) {
                            for r in rs.iter().filter(|d| !matches!(d, Derivation::Id(_))) {
                                out.push(Derivation::cut(l.clone(), left.len() - 1, r.clone(), 0));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Premise sequents and non-identity structural maps onto `seq`.
    fn struct_premises(&self, seq: &[Entry]) -> Vec<(Vec<Entry>, StructuralMap)> {
        let shareable: Vec<bool> = seq
            .iter()
            .map(|e| {
                e.sign == Sign::Neg && check_type(self.s, &e.ty).is_ok_and(|so| self.s.doctrine.base.is_nonlinear(so))
            })
            .collect();
        let mut out = Vec::new();
        let mut index = Vec::new();
        let mut used = vec![0usize; seq.len()];
        self.maps(seq, &shareable, &mut used, &mut index, &mut out);
        out
    }

    fn maps(
        &self,
        seq: &[Entry],
        shareable: &[bool],
        used: &mut [usize],
        index: &mut Vec<usize>,
        out: &mut Vec<(Vec<Entry>, StructuralMap)>,
    ) {
        let missing = (0..seq.len()).filter(|&i| !shareable[i] && used[i] == 0).count();
        if missing == 0 {
            let map = StructuralMap::new(seq.len(), index.clone());
            if !map.is_identity() {
                out.push((index.iter().map(|&i| seq[i].clone()).collect(), map));
            }
        }
        if index.len() + missing >= self.max_len {
            return;
        }
        for i in 0..seq.len() {
            if used[i] > 0 && !shareable[i] {
                continue;
            }
            used[i] += 1;
            index.push(i);
            self.maps(seq, shareable, used, index, out);
            index.pop();
            used[i] -= 1;
        }
    }
}

/// Ways to write `total` as an ordered sum of `parts` positive terms.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in 1..=total.saturating_sub(parts - 1) {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Objects, the types of height one over them, goal subterms and the
/// subterms of generator signatures.
fn cut_universe(s: &Sketch, goal: &Sequent) -> Vec<TypeExpr> {
    let mut set: BTreeSet<TypeExpr> = BTreeSet::new();
    if let Ok(st) = enumerate_types(s, 1, DEFAULT_TYPE_CEILING) {
        if let Some(last) = st.strata.last() {
            set.extend(last.iter().cloned());
        }
    }
    for e in &goal.entries {
        set.extend(e.ty.subterms().into_iter().cloned());
    }
    let mut v: Vec<TypeExpr> = set.into_iter().collect();
    v.sort_by_key(|t| (t.size(), t.to_string()));
    v
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ProbeVerdict {
    /// No counterexample within the bounds; not a proof of extremality.
    BoundedPass,
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeCase {
    pub omega: Vec<String>,
    /// Expander families examined for this list.
    pub families: usize,
    /// Families with no factorization, then with several.
    pub missing: usize,
    pub ambiguous: usize,
    pub unknown: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    pub cone: String,
    pub vertex: String,
    pub omega_bound: usize,
    pub node_bound: usize,
    pub cases: Vec<ProbeCase>,
    pub verdict: ProbeVerdict,
}

pub const DEFAULT_PROBE_NODES: usize = 4;

pub fn extremality_probe(s: &Sketch, inst: &ConeInstance, omega_bound: usize) -> Result<ProbeReport, CompletionError> {
    extremality_probe_with(s, inst, omega_bound, DEFAULT_PROBE_NODES)
}

/// For every list of signed objects up to `omega_bound` long, checks that
/// each family of expanders factors through the witnesses in exactly one
/// way, among derivations of at most `node_bound` nodes.
pub fn extremality_probe_with(
    s: &Sketch,
    inst: &ConeInstance,
    omega_bound: usize,
    node_bound: usize,
) -> Result<ProbeReport, CompletionError> {
    let cone = s
        .doctrine
        .cone(&inst.cone)
        .ok_or_else(|| CompletionError::Instance(format!("unknown cone {}", inst.cone)))?
        .clone();
    let vertex_ty = TypeExpr::gen(&inst.vertex);
    let object = |id: &str| -> Result<TypeExpr, CompletionError> {
        inst.objects
            .get(id)
            .map(|o| TypeExpr::gen(o))
            .ok_or_else(|| CompletionError::Instance(format!("reduct object {id} unassigned")))
    };
    // each witness, with the position of the vertex and the order that
    // puts its other entries in projection order
    let mut witnesses = Vec::new();
    for p in &cone.projections {
        let g = inst
            .witnesses
            .get(&p.id)
            .and_then(|w| s.generator(w))
            .ok_or_else(|| CompletionError::Instance(format!("projection {} has no witness", p.id)))?;
        let sig: Vec<Entry> = g
            .signature
            .iter()
            .map(|(o, sg)| Entry::new(TypeExpr::gen(o), *sg))
            .collect();
        let mut want: Vec<Entry> = Vec::new();
        for &(r, sg) in &p.entries {
            want.push(Entry::new(object(&cone.reduct[r].id)?, sg));
        }
        let vertex_entry = Entry::new(vertex_ty.clone(), cone.vertex_sign);
        let Some(order) = match_order(&sig, &want, &vertex_entry) else {
            return Err(CompletionError::Instance(format!(
                "witness {} does not fit projection {}",
                g.name, p.id
            )));
        };
        witnesses.push((p.id.clone(), g.name.clone(), want, order));
    }
    let head = Entry::new(vertex_ty.clone(), cone.vertex_sign.flip());
    let base = &s.doctrine.base;
    let mut signed: Vec<Entry> = Vec::new();
    for o in &s.objects {
        for sg in [Sign::Neg, Sign::Pos] {
            signed.push(Entry::new(TypeExpr::gen(&o.name), sg));
        }
    }
    let mut cases = Vec::new();
    let mut verdict = ProbeVerdict::BoundedPass;
    for omega in lists_up_to(&signed, omega_bound) {
        let mut with_head = vec![head.clone()];
        with_head.extend(omega.iter().cloned());
        let Ok(sh) = shape(s, &with_head) else { continue };
        if !base.allows(&sh) {
            continue;
        }
        let chis = enumerate_homset(s, &Sequent::new(with_head.clone()), node_bound)?.classes;
        let mut expander_classes = Vec::new();
        for (_, _, want, _) in &witnesses {
            let mut seq = want.clone();
            seq.extend(omega.iter().cloned());
            if validate_sequent(s, &Sequent::new(seq.clone())).is_err() {
                expander_classes.push(Vec::new());
                continue;
            }
            expander_classes.push(enumerate_homset(s, &Sequent::new(seq), node_bound)?.classes);
        }
        let mut case = ProbeCase {
            omega: omega.iter().map(|e| e.to_string()).collect(),
            families: 0,
            missing: 0,
            ambiguous: 0,
            unknown: 0,
        };
        for family in product(&expander_classes) {
            case.families += 1;
            let mut matches = 0;
            let mut unsure = false;
            for chi in &chis {
                let mut all = true;
                for ((_, wname, want, order), expander) in witnesses.iter().zip(&family) {
                    let composite = factor_through(wname, want, order, chi, &omega);
                    match equal(s, &composite, expander)? {
                        EqVerdict::Equal => {}
                        EqVerdict::NotEqual => {
                            all = false;
                            break;
                        }
                        EqVerdict::Unknown => {
                            unsure = true;
                            all = false;
                            break;
                        }
                    }
                }
                if all {
                    matches += 1;
                }
            }
            if unsure {
                case.unknown += 1;
            }
            if matches == 0 && !unsure {
                case.missing += 1;
            }
            if matches > 1 {
                case.ambiguous += 1;
            }
        }
        if case.missing > 0 || case.ambiguous > 0 {
            verdict = ProbeVerdict::Fail;
        }
        cases.push(case);
    }
    Ok(ProbeReport {
        cone: inst.cone.clone(),
        vertex: inst.vertex.clone(),
        omega_bound,
        node_bound,
        cases,
        verdict,
    })
}

/// Positions in `sig` of the entries of `want` followed by the vertex.
fn match_order(sig: &[Entry], want: &[Entry], vertex: &Entry) -> Option<Vec<usize>> {
    let mut order = Vec::new();
    let mut used = vec![false; sig.len()];
    for e in want.iter().chain(std::iter::once(vertex)) {
        let k = (0..sig.len()).find(|&k| !used[k] && sig[k] == *e)?;
        used[k] = true;
        order.push(k);
    }
    (order.len() == sig.len()).then_some(order)
}

/// The witness cut against `chi` at the vertex, rearranged to conclude
/// the projection entries followed by `omega`.
fn factor_through(wname: &str, want: &[Entry], order: &[usize], chi: &Derivation, omega: &[Entry]) -> Derivation {
    let vpos = *order.last().expect("vertex position");
    let cut = Derivation::cut(Derivation::Gen(wname.into()), vpos, chi.clone(), 0);
    // the cut concludes sig without vpos, then omega
    let sig_len = order.len();
    let mut target: Vec<Entry> = want.to_vec();
    target.extend(omega.iter().cloned());
    let mut index = Vec::with_capacity(sig_len - 1 + omega.len());
    for k in (0..sig_len).filter(|&k| k != vpos) {
        index.push(order.iter().position(|&o| o == k).expect("matched"));
    }
    index.extend((0..omega.len()).map(|k| want.len() + k));
    let map = StructuralMap::new(target.len(), index);
    if map.is_identity() {
        cut
    } else {
        Derivation::structural(target, map, cut)
    }
}

fn lists_up_to(items: &[Entry], bound: usize) -> Vec<Vec<Entry>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..bound {
        let mut next = Vec::new();
        for l in &layer {
            for it in items {
                let mut m: Vec<Entry> = l.clone();
                m.push(it.clone());
                next.push(m);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

fn product<T: Clone>(sets: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = vec![Vec::new()];
    for set in sets {
        let mut next = Vec::new();
        for prefix in &out {
            for x in set {
                let mut p = prefix.clone();
                p.push(x.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out
}
