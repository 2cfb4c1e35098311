//! Sketch equations used as rewrite rules on normal terms.
//!
//! Each equation is normalized on both sides and oriented from the larger
//! serialization to the smaller. A rule fires on any connected group of
//! leaves whose canonical string, read against some matching order of its
//! boundary, equals the rule's source.

use std::collections::{BTreeSet, HashMap};

use crate::calculus::{check_derivation, Entry};
use crate::sketch::Sketch;

use super::canon::Canon;
use super::term::{flatten, leaf_entries, to_term, Engine, Term, Var};
use super::RewriteError;

struct Rule {
    key: String,
    leaves: usize,
    iface: Vec<Entry>,
    target: Term,
    target_iface: Vec<Var>,
}

pub struct Axioms {
    rules: Vec<Rule>,
}

const MAX_MATCHINGS: usize = 720;

impl Axioms {
    pub fn new(s: &Sketch, eng: &mut Engine) -> Self {
        let mut rules = Vec::new();
        for eq in &s.equations {
            let (Ok(cl), Ok(cr)) = (check_derivation(s, &eq.lhs), check_derivation(s, &eq.rhs)) else {
                continue;
            };
            if cl != cr {
                continue;
            }
            let (tl, il) = to_term(s, &mut eng.ctx, &eq.lhs);
            let (mut tr, ir) = to_term(s, &mut eng.ctx, &eq.rhs);
            let ren: HashMap<Var, Var> = ir.iter().zip(&il).map(|((b, _), (a, _))| (*b, *a)).collect();
            tr.rename(&ren);
            let (Ok(tl), Ok(tr)) = (eng.normalize(tl), eng.normalize(tr)) else {
                continue;
            };
            let vars: Vec<Var> = il.iter().map(|(v, _)| *v).collect();
            let (kl, kr) = {
                let c = Canon::new(s, &eng.ctx);
                (c.key(&tl, &vars), c.key(&tr, &vars))
            };
            if kl == kr {
                continue;
            }
            let (from, from_key, to) = if (kl.len(), &kl) > (kr.len(), &kr) {
                (tl, kl, tr)
            } else {
                (tr, kr, tl)
            };
            rules.push(Rule {
                key: from_key,
                leaves: flatten(&from).0.len(),
                iface: il.iter().map(|(_, e)| e.clone()).collect(),
                target: to,
                target_iface: vars,
            });
        }
        Axioms { rules }
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Cut elimination interleaved with rule applications until neither fires.
    pub fn normal_form(&self, eng: &mut Engine, t: Term) -> Result<Term, RewriteError> {
        let mut t = eng.normalize(t)?;
        if self.rules.is_empty() {
            return Ok(t);
        }
        while let Some(n) = self.rewrite_once(eng, &t)? {
            t = eng.normalize(n)?;
        }
        Ok(t)
    }

    fn rewrite_once(&self, eng: &mut Engine, t: &Term) -> Result<Option<Term>, RewriteError> {
        if let Some(n) = self.match_scope(eng, t)? {
            return Ok(Some(n));
        }
        self.descend(eng, t)
    }

    fn descend(&self, eng: &mut Engine, t: &Term) -> Result<Option<Term>, RewriteError> {
        match t {
            Term::Cut { wire, left, right } => {
                if let Some(l) = self.descend(eng, left)? {
                    return Ok(Some(Term::Cut {
                        wire: *wire,
                        left: Box::new(l),
                        right: right.clone(),
                    }));
                }
                Ok(self.descend(eng, right)?.map(|r| Term::Cut {
                    wire: *wire,
                    left: left.clone(),
                    right: Box::new(r),
                }))
            }
            Term::Inv {
                cone,
                args,
                principal,
                sides,
                premises,
            } => {
                for (k, p) in premises.iter().enumerate() {
                    if let Some(b) = self.rewrite_once(eng, &p.body)? {
                        let mut ps = premises.clone();
                        *ps[k].body = b;
                        return Ok(Some(Term::Inv {
                            cone: cone.clone(),
                            args: args.clone(),
                            principal: *principal,
                            sides: sides.clone(),
                            premises: ps,
                        }));
                    }
                }
                Ok(None)
            }
            _ => Ok(None),
        }
    }

    fn match_scope(&self, eng: &mut Engine, t: &Term) -> Result<Option<Term>, RewriteError> {
        let (leaves, wires) = flatten(t);
        let ports: Vec<Vec<Var>> = leaves
            .iter()
            .map(|l| {
                let mut v = Vec::new();
                l.occurrences(&mut v);
                v
            })
            .collect();
        for rule in &self.rules {
            if rule.leaves > leaves.len() {
                continue;
            }
            for subset in connected_subsets(&ports, &wires, rule.leaves) {
                let pieces: Vec<Term> = subset.iter().map(|&k| leaves[k].clone()).collect();
                let sub = join(pieces, &wires);
                let boundary = sub.free_vars();
                if boundary.len() != rule.iface.len() {
                    continue;
                }
                let entries: Vec<Entry> = boundary
                    .iter()
                    .map(|&v| {
                        let leaf = subset
                            .iter()
                            .map(|&k| leaves[k])
                            .find(|l| l.contains(v))
                            .expect("boundary var");
                        leaf_entries(leaf, &eng.ctx, eng.s)
                            .into_iter()
                            .find(|(x, _)| *x == v)
                            .map(|(_, e)| e)
                            .expect("port")
                    })
                    .collect();
                let found = {
                    let canon = Canon::new(eng.s, &eng.ctx);
                    matchings(&entries, &rule.iface)
                        .into_iter()
                        .map(|order| order.iter().map(|&b| boundary[b]).collect::<Vec<Var>>())
                        .find(|vars| canon.key(&sub, vars) == rule.key)
                };
                let Some(vars) = found else { continue };
                let mut rhs = eng.ctx.freshen(&rule.target);
                let ren: HashMap<Var, Var> = rule.target_iface.iter().copied().zip(vars).collect();
                rhs.rename(&ren);
                let mut rest: Vec<Term> = (0..leaves.len())
                    .filter(|k| !subset.contains(k))
                    .map(|k| leaves[k].clone())
                    .collect();
                rest.push(rhs);
                return Ok(Some(join(rest, &wires)));
            }
        }
        Ok(None)
    }
}

/// Connected sets of exactly `size` leaves, as sorted index lists.
fn connected_subsets(ports: &[Vec<Var>], wires: &std::collections::BTreeMap<Var, ()>, size: usize) -> Vec<Vec<usize>> {
    let adjacent = |a: usize, b: usize| ports[a].iter().any(|v| wires.contains_key(v) && ports[b].contains(v));
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut frontier: Vec<Vec<usize>> = (0..ports.len()).map(|k| vec![k]).collect();
    for _ in 1..size {
        let mut next = Vec::new();
        for set in frontier {
            for cand in 0..ports.len() {
                if set.contains(&cand) || !set.iter().any(|&k| adjacent(k, cand)) {
                    continue;
                }
                let mut grown = set.clone();
                grown.push(cand);
                grown.sort_unstable();
                if seen.insert(grown.clone()) {
                    next.push(grown);
                }
            }
        }
        frontier = next;
    }
    frontier
}

/// Bijections from rule positions to boundary positions respecting entries.
fn matchings(boundary: &[Entry], rule: &[Entry]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut used = vec![false; boundary.len()];
    let mut cur = Vec::new();
    fn go(b: &[Entry], r: &[Entry], used: &mut [bool], cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if out.len() >= MAX_MATCHINGS {
            return;
        }
        if cur.len() == r.len() {
            out.push(cur.clone());
            return;
        }
        for k in 0..b.len() {
            if !used[k] && b[k] == r[cur.len()] {
                used[k] = true;
                cur.push(k);
                go(b, r, used, cur, out);
                cur.pop();
                used[k] = false;
            }
        }
    }
    go(boundary, rule, &mut used, &mut cur, &mut out);
    out
}

/// Reassembles pieces into one cut tree along the given wires.
fn join(mut pieces: Vec<Term>, wires: &std::collections::BTreeMap<Var, ()>) -> Term {
    while pieces.len() > 1 {
        let mut joined = false;
        'outer: for a in 0..pieces.len() {
            for b in a + 1..pieces.len() {
                let fa = pieces[a].free_vars();
                if let Some(w) = fa.into_iter().find(|v| wires.contains_key(v) && pieces[b].contains(*v)) {
                    let pb = pieces.remove(b);
                    let pa = pieces.remove(a);
                    pieces.push(Term::Cut {
                        wire: w,
                        left: Box::new(pa),
                        right: Box::new(pb),
                    });
                    joined = true;
                    break 'outer;
                }
            }
        }
        if !joined {
            break;
        }
    }
    pieces.pop().expect("at least one piece")
}
