//! Derivations as nets of named wires: structural maps disappear into
//! variable sharing and cuts become wires between subterms.

use std::collections::{BTreeMap, HashMap};

use crate::base::Sign;
use crate::calculus::{Derivation, Entry};
use crate::sketch::Sketch;
use crate::types::TypeExpr;

use super::RewriteError;

pub type Var = u32;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Premise {
    pub proj: String,
    /// Projection entries first, then one parameter per side.
    pub params: Vec<Var>,
    pub body: Box<Term>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    Id {
        ty: TypeExpr,
        neg: Var,
        pos: Var,
    },
    Gen {
        name: String,
        ports: Vec<Var>,
    },
    /// Ports follow the projection entries, then the principal.
    NonInv {
        cone: String,
        args: Vec<TypeExpr>,
        proj: String,
        ports: Vec<Var>,
    },
    Inv {
        cone: String,
        args: Vec<TypeExpr>,
        principal: Var,
        sides: Vec<(Var, Sign)>,
        premises: Vec<Premise>,
    },
    Cut {
        wire: Var,
        left: Box<Term>,
        right: Box<Term>,
    },
}

impl Term {
    pub fn is_leaf(&self) -> bool {
        !matches!(self, Term::Cut { .. })
    }

    /// Free variable occurrences in port order (premises are closed).
    pub fn occurrences(&self, out: &mut Vec<Var>) {
        match self {
            Term::Id { neg, pos, .. } => out.extend([*neg, *pos]),
            Term::Gen { ports, .. } | Term::NonInv { ports, .. } => out.extend(ports.iter().copied()),
            Term::Inv { principal, sides, .. } => {
                out.push(*principal);
                out.extend(sides.iter().map(|(v, _)| *v));
            }
            Term::Cut { wire, left, right } => {
                let mut inner = Vec::new();
                left.occurrences(&mut inner);
                right.occurrences(&mut inner);
                out.extend(inner.into_iter().filter(|v| v != wire));
            }
        }
    }

    pub fn count(&self, v: Var) -> usize {
        let mut occ = Vec::new();
        self.occurrences(&mut occ);
        occ.iter().filter(|&&x| x == v).count()
    }

    pub fn contains(&self, v: Var) -> bool {
        self.count(v) > 0
    }

    /// Distinct free variables in order of first occurrence.
    pub fn free_vars(&self) -> Vec<Var> {
        let mut occ = Vec::new();
        self.occurrences(&mut occ);
        let mut seen = Vec::new();
        for v in occ {
            if !seen.contains(&v) {
                seen.push(v);
            }
        }
        seen
    }

    pub fn has_inv(&self) -> bool {
        match self {
            Term::Inv { .. } => true,
            Term::Cut { left, right, .. } => left.has_inv() || right.has_inv(),
            _ => false,
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Term::Cut { left, right, .. } => 1 + left.node_count() + right.node_count(),
            Term::Inv { premises, .. } => 1 + premises.iter().map(|p| p.body.node_count()).sum::<usize>(),
            _ => 1,
        }
    }

    /// Renames variables everywhere, including binders; callers only map
    /// free variables or freshen whole subterms, so no capture occurs.
    pub fn rename(&mut self, map: &HashMap<Var, Var>) {
        let r = |v: &mut Var| {
            if let Some(n) = map.get(v) {
                *v = *n;
            }
        };
        match self {
            Term::Id { neg, pos, .. } => {
                r(neg);
                r(pos);
            }
            Term::Gen { ports, .. } | Term::NonInv { ports, .. } => ports.iter_mut().for_each(r),
            Term::Inv {
                principal,
                sides,
                premises,
                ..
            } => {
                r(principal);
                sides.iter_mut().for_each(|(v, _)| r(v));
                for p in premises {
                    p.params.iter_mut().for_each(r);
                    p.body.rename(map);
                }
            }
            Term::Cut { wire, left, right } => {
                r(wire);
                left.rename(map);
                right.rename(map);
            }
        }
    }

    pub fn bound_vars(&self, out: &mut Vec<Var>) {
        match self {
            Term::Inv { premises, .. } => {
                for p in premises {
                    out.extend(p.params.iter().copied());
                    p.body.bound_vars(out);
                }
            }
            Term::Cut { wire, left, right } => {
                out.push(*wire);
                left.bound_vars(out);
                right.bound_vars(out);
            }
            _ => {}
        }
    }

    /// The leaf holding `v` and its sign there.
    pub fn sign_of(&self, v: Var, ctx: &Ctx, s: &Sketch) -> Option<Sign> {
        match self {
            Term::Cut { wire, left, right } => {
                if *wire == v {
                    return None;
                }
                left.sign_of(v, ctx, s).or_else(|| right.sign_of(v, ctx, s))
            }
            leaf => leaf_entries(leaf, ctx, s)
                .into_iter()
                .find(|(x, _)| *x == v)
                .map(|(_, e)| e.sign),
        }
    }
}

/// Variable types; variables are indices.
#[derive(Clone, Debug, Default)]
pub struct Ctx {
    pub types: Vec<TypeExpr>,
}

impl Ctx {
    pub fn fresh(&mut self, ty: TypeExpr) -> Var {
        self.types.push(ty);
        (self.types.len() - 1) as Var
    }

    pub fn ty(&self, v: Var) -> &TypeExpr {
        &self.types[v as usize]
    }

    /// A copy of `t` with every bound variable replaced by a fresh one.
    pub fn freshen(&mut self, t: &Term) -> Term {
        let mut bound = Vec::new();
        t.bound_vars(&mut bound);
        let map: HashMap<Var, Var> = bound.into_iter().map(|v| (v, self.fresh(self.ty(v).clone()))).collect();
        let mut out = t.clone();
        out.rename(&map);
        out
    }
}

/// The signed entries of a leaf, paired with their variables, in port order.
pub fn leaf_entries(t: &Term, ctx: &Ctx, s: &Sketch) -> Vec<(Var, Entry)> {
    match t {
        Term::Id { ty, neg, pos } => vec![(*neg, Entry::neg(ty.clone())), (*pos, Entry::pos(ty.clone()))],
        Term::Gen { ports, .. } => ports
            .iter()
            .map(|&v| (v, Entry::new(ctx.ty(v).clone(), gen_sign(t, v, s))))
            .collect(),
        Term::NonInv { cone, proj, ports, .. } => {
            let c = s.doctrine.cone(cone).expect("checked cone");
            let p = c.projection(proj).expect("checked projection");
            let mut signs: Vec<Sign> = p.entries.iter().map(|&(_, sg)| sg).collect();
            signs.push(c.vertex_sign);
            ports
                .iter()
                .zip(signs)
                .map(|(&v, sg)| (v, Entry::new(ctx.ty(v).clone(), sg)))
                .collect()
        }
        Term::Inv {
            cone, principal, sides, ..
        } => {
            let c = s.doctrine.cone(cone).expect("checked cone");
            let mut out = vec![(*principal, Entry::new(ctx.ty(*principal).clone(), c.vertex_sign.flip()))];
            out.extend(sides.iter().map(|&(v, sg)| (v, Entry::new(ctx.ty(v).clone(), sg))));
            out
        }
        Term::Cut { .. } => panic!("leaf_entries on a cut"),
    }
}

fn gen_sign(t: &Term, v: Var, s: &Sketch) -> Sign {
    let Term::Gen { name, ports } = t else { unreachable!() };
    let g = s.generator(name).expect("checked generator");
    let k = ports.iter().position(|&p| p == v).expect("port");
    g.signature[k].1
}

/// Converts a checked derivation; returns the term and one variable per
/// conclusion entry.
pub fn to_term(s: &Sketch, ctx: &mut Ctx, d: &Derivation) -> (Term, Vec<(Var, Entry)>) {
    match d {
        Derivation::Id(t) => {
            let neg = ctx.fresh(t.clone());
            let pos = ctx.fresh(t.clone());
            (
                Term::Id {
                    ty: t.clone(),
                    neg,
                    pos,
                },
                vec![(neg, Entry::neg(t.clone())), (pos, Entry::pos(t.clone()))],
            )
        }
        Derivation::Gen(name) => {
            let g = s.generator(name).expect("checked generator");
            let mut ports = Vec::new();
            let mut iface = Vec::new();
            for (o, sg) in &g.signature {
                let ty = TypeExpr::Gen(o.clone());
                let v = ctx.fresh(ty.clone());
                ports.push(v);
                iface.push((v, Entry::new(ty, *sg)));
            }
            (
                Term::Gen {
                    name: name.clone(),
                    ports,
                },
                iface,
            )
        }
        Derivation::NonInv { cone, args, proj } => {
            let c = s.doctrine.cone(cone).expect("checked cone");
            let p = c.projection(proj).expect("checked projection");
            let mut entries: Vec<Entry> = p
                .entries
                .iter()
                .map(|&(r, sg)| Entry::new(args[r].clone(), sg))
                .collect();
            entries.push(Entry::new(TypeExpr::Comp(cone.clone(), args.clone()), c.vertex_sign));
            let iface: Vec<(Var, Entry)> = entries.into_iter().map(|e| (ctx.fresh(e.ty.clone()), e)).collect();
            (
                Term::NonInv {
                    cone: cone.clone(),
                    args: args.clone(),
                    proj: proj.clone(),
                    ports: iface.iter().map(|(v, _)| *v).collect(),
                },
                iface,
            )
        }
        Derivation::Inv {
            cone,
            args,
            sides,
            premises,
        } => {
            let c = s.doctrine.cone(cone).expect("checked cone");
            let pty = TypeExpr::Comp(cone.clone(), args.clone());
            let principal = ctx.fresh(pty.clone());
            let side_vars: Vec<(Var, Sign)> = sides.iter().map(|e| (ctx.fresh(e.ty.clone()), e.sign)).collect();
            let mut prems = Vec::new();
            for p in &c.projections {
                let (_, pd) = premises.iter().find(|(id, _)| *id == p.id).expect("checked premises");
                let (body, iface) = to_term(s, ctx, pd);
                prems.push(Premise {
                    proj: p.id.clone(),
                    params: iface.into_iter().map(|(v, _)| v).collect(),
                    body: Box::new(body),
                });
            }
            let mut iface = vec![(principal, Entry::new(pty, c.vertex_sign.flip()))];
            iface.extend(side_vars.iter().zip(sides).map(|(&(v, _), e)| (v, e.clone())));
            (
                Term::Inv {
                    cone: cone.clone(),
                    args: args.clone(),
                    principal,
                    sides: side_vars,
                    premises: prems,
                },
                iface,
            )
        }
        Derivation::Cut { left, i, right, j } => {
            let (mut tl, il) = to_term(s, ctx, left);
            let (mut tr, ir) = to_term(s, ctx, right);
            let wire = ctx.fresh(il[*i].1.ty.clone());
            tl.rename(&HashMap::from([(il[*i].0, wire)]));
            tr.rename(&HashMap::from([(ir[*j].0, wire)]));
            let mut iface: Vec<(Var, Entry)> = il
                .into_iter()
                .enumerate()
                .filter(|(k, _)| k != i)
                .map(|(_, x)| x)
                .collect();
            iface.extend(ir.into_iter().enumerate().filter(|(k, _)| k != j).map(|(_, x)| x));
            (
                Term::Cut {
                    wire,
                    left: Box::new(tl),
                    right: Box::new(tr),
                },
                iface,
            )
        }
        Derivation::Struct { target, map, premise } => {
            let (mut t, ip) = to_term(s, ctx, premise);
            let iv: Vec<(Var, Entry)> = target.iter().map(|e| (ctx.fresh(e.ty.clone()), e.clone())).collect();
            let ren: HashMap<Var, Var> = ip
                .iter()
                .enumerate()
                .map(|(k, (v, _))| (*v, iv[map.index[k]].0))
                .collect();
            t.rename(&ren);
            (t, iv)
        }
    }
}

/// Cut elimination on terms, bounded by fuel.
pub struct Engine<'a> {
    pub s: &'a Sketch,
    pub ctx: Ctx,
    pub fuel: usize,
}

impl<'a> Engine<'a> {
    pub fn new(s: &'a Sketch, fuel: usize) -> Self {
        Engine {
            s,
            ctx: Ctx::default(),
            fuel,
        }
    }

    fn tick(&mut self) -> Result<(), RewriteError> {
        if self.fuel == 0 {
            return Err(RewriteError::FuelExhausted);
        }
        self.fuel -= 1;
        Ok(())
    }

    pub fn normalize(&mut self, t: Term) -> Result<Term, RewriteError> {
        self.tick()?;
        match t {
            Term::Cut { wire, left, right } => {
                let l = self.normalize(*left)?;
                let r = self.normalize(*right)?;
                self.cut(wire, l, r)
            }
            Term::Inv {
                cone,
                args,
                principal,
                sides,
                premises,
            } => {
                let mut out = Vec::with_capacity(premises.len());
                for p in premises {
                    out.push(Premise {
                        proj: p.proj,
                        params: p.params,
                        body: Box::new(self.normalize(*p.body)?),
                    });
                }
                Ok(Term::Inv {
                    cone,
                    args,
                    principal,
                    sides,
                    premises: out,
                })
            }
            leaf => Ok(leaf),
        }
    }

    /// Normal form of `Cut(w, a, b)` for normal `a` and `b`.
    pub fn cut(&mut self, w: Var, a: Term, b: Term) -> Result<Term, RewriteError> {
        self.tick()?;
        let (ca, cb) = (a.count(w), b.count(w));
        if ca != 1 || cb != 1 {
            let (producer, consumer) = if ca == 1 && cb != 1 { (a, b) } else { (b, a) };
            return self.replicate(w, producer, consumer);
        }
        let (la, a_ctx) = unzip(a, w);
        let (lb, b_ctx) = unzip(b, w);
        match self.local(w, la, lb)? {
            Ok(mut t) => {
                for (wire, sib) in b_ctx.into_iter().rev() {
                    t = self.cut(wire, t, sib)?;
                }
                for (wire, sib) in a_ctx.into_iter().rev() {
                    t = self.cut(wire, t, sib)?;
                }
                Ok(t)
            }
            Err((la, lb)) => Ok(Term::Cut {
                wire: w,
                left: Box::new(zip(la, a_ctx)),
                right: Box::new(zip(lb, b_ctx)),
            }),
        }
    }

    fn replicate(&mut self, w: Var, producer: Term, consumer: Term) -> Result<Term, RewriteError> {
        let n = consumer.count(w);
        if n == 0 {
            return Ok(consumer);
        }
        let ty = self.ctx.ty(w).clone();
        let mut consumer = consumer;
        let mut copies = Vec::with_capacity(n);
        for _ in 0..n {
            copies.push(self.ctx.fresh(ty.clone()));
        }
        let mut it = copies.iter();
        rename_each(&mut consumer, w, &mut || *it.next().expect("counted"));
        let mut t = consumer;
        for &wk in &copies {
            let mut p = self.ctx.freshen(&producer);
            p.rename(&HashMap::from([(w, wk)]));
            t = self.cut(wk, p, t)?;
        }
        Ok(t)
    }

    /// One reduction between the two leaves sharing `w`; gives the leaves
    /// back when the cut is stuck.
    #[allow(clippy::type_complexity)]
    fn local(&mut self, w: Var, la: Term, lb: Term) -> Result<Result<Term, (Term, Term)>, RewriteError> {
        if let Term::Id { neg, pos, .. } = &la {
            let other = if *neg == w { *pos } else { *neg };
            let mut t = lb;
            t.rename(&HashMap::from([(w, other)]));
            return Ok(Ok(t));
        }
        if let Term::Id { neg, pos, .. } = &lb {
            let other = if *neg == w { *pos } else { *neg };
            let mut t = la;
            t.rename(&HashMap::from([(w, other)]));
            return Ok(Ok(t));
        }
        if let Some(t) = self.beta(w, &la, &lb) {
            return Ok(Ok(t));
        }
        if let Some(t) = self.beta(w, &lb, &la) {
            return Ok(Ok(t));
        }
        let a_side = inv_side(&la, w);
        let b_side = inv_side(&lb, w);
        let push_into_a = match (a_side, b_side) {
            (true, true) => inv_key(&la, &self.ctx) <= inv_key(&lb, &self.ctx),
            (true, false) => true,
            (false, true) => false,
            (false, false) => return Ok(Err((la, lb))),
        };
        let t = if push_into_a {
            self.commute(w, la, lb)?
        } else {
            self.commute(w, lb, la)?
        };
        Ok(Ok(t))
    }

    fn beta(&mut self, w: Var, ni: &Term, inv: &Term) -> Option<Term> {
        let Term::NonInv {
            cone: c1,
            args: a1,
            proj,
            ports,
        } = ni
        else {
            return None;
        };
        let Term::Inv {
            cone: c2,
            args: a2,
            principal,
            sides,
            premises,
        } = inv
        else {
            return None;
        };
        if c1 != c2 || a1 != a2 || *ports.last()? != w || *principal != w {
            return None;
        }
        let prem = premises.iter().find(|p| p.proj == *proj)?;
        let mut actual: Vec<Var> = ports[..ports.len() - 1].to_vec();
        actual.extend(sides.iter().map(|(v, _)| *v));
        let map: HashMap<Var, Var> = prem.params.iter().copied().zip(actual).collect();
        let mut body = (*prem.body).clone();
        body.rename(&map);
        Some(body)
    }

    /// Pushes `other` into every premise of `inv`, across the side `w`.
    fn commute(&mut self, w: Var, inv: Term, other: Term) -> Result<Term, RewriteError> {
        let Term::Inv {
            cone,
            args,
            principal,
            sides,
            premises,
        } = inv
        else {
            unreachable!()
        };
        let m = sides.iter().position(|(v, _)| *v == w).expect("side");
        let extra: Vec<Var> = other.free_vars().into_iter().filter(|&v| v != w).collect();
        let extra_signs: Vec<(Var, Sign)> = extra
            .iter()
            .map(|&v| (v, other.sign_of(v, &self.ctx, self.s).expect("free var has a sign")))
            .collect();
        let mut new_sides: Vec<(Var, Sign)> = sides
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != m)
            .map(|(_, x)| *x)
            .collect();
        new_sides.extend(extra_signs);
        let n_proj = premises.first().map(|p| p.params.len() - sides.len()).unwrap_or(0);
        let mut out = Vec::with_capacity(premises.len());
        for p in premises {
            let q = p.params[n_proj + m];
            let fresh: Vec<Var> = extra.iter().map(|&v| self.ctx.fresh(self.ctx.ty(v).clone())).collect();
            let mut o = self.ctx.freshen(&other);
            let mut ren: HashMap<Var, Var> = extra.iter().copied().zip(fresh.iter().copied()).collect();
            ren.insert(w, q);
            o.rename(&ren);
            let body = self.cut(q, *p.body, o)?;
            let mut params: Vec<Var> = p
                .params
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != n_proj + m)
                .map(|(_, v)| *v)
                .collect();
            params.extend(fresh);
            out.push(Premise {
                proj: p.proj,
                params,
                body: Box::new(body),
            });
        }
        Ok(Term::Inv {
            cone,
            args,
            principal,
            sides: new_sides,
            premises: out,
        })
    }
}

fn inv_side(t: &Term, w: Var) -> bool {
    matches!(t, Term::Inv { sides, principal, .. } if *principal != w && sides.iter().any(|(v, _)| *v == w))
}

fn inv_key(t: &Term, ctx: &Ctx) -> String {
    match t {
        Term::Inv { principal, .. } => ctx.ty(*principal).to_string(),
        _ => String::new(),
    }
}

/// Splits a cut tree into the leaf holding `w` and the path of
/// `(wire, sibling)` pairs from the root down to it.
fn unzip(t: Term, w: Var) -> (Term, Vec<(Var, Term)>) {
    let mut path = Vec::new();
    let mut cur = t;
    loop {
        match cur {
            Term::Cut { wire, left, right } => {
                if left.contains(w) {
                    path.push((wire, *right));
                    cur = *left;
                } else {
                    path.push((wire, *left));
                    cur = *right;
                }
            }
            leaf => return (leaf, path),
        }
    }
}

fn zip(leaf: Term, path: Vec<(Var, Term)>) -> Term {
    let mut t = leaf;
    for (wire, sib) in path.into_iter().rev() {
        t = Term::Cut {
            wire,
            left: Box::new(t),
            right: Box::new(sib),
        };
    }
    t
}

/// Replaces each free occurrence of `v` by a new variable from `next`.
fn rename_each(t: &mut Term, v: Var, next: &mut dyn FnMut() -> Var) {
    let mut r = |x: &mut Var| {
        if *x == v {
            *x = next();
        }
    };
    match t {
        Term::Id { neg, pos, .. } => {
            r(neg);
            r(pos);
        }
        Term::Gen { ports, .. } | Term::NonInv { ports, .. } => ports.iter_mut().for_each(r),
        Term::Inv { principal, sides, .. } => {
            r(principal);
            sides.iter_mut().for_each(|(x, _)| r(x));
        }
        Term::Cut { wire, left, right } => {
            if *wire != v {
                rename_each(left, v, next);
                rename_each(right, v, next);
            }
        }
    }
}

/// Leaves of a cut tree with the wires joining them.
pub fn flatten(t: &Term) -> (Vec<&Term>, BTreeMap<Var, ()>) {
    let mut leaves = Vec::new();
    let mut wires = BTreeMap::new();
    fn go<'t>(t: &'t Term, leaves: &mut Vec<&'t Term>, wires: &mut BTreeMap<Var, ()>) {
        match t {
            Term::Cut { wire, left, right } => {
                wires.insert(*wire, ());
                go(left, leaves, wires);
                go(right, leaves, wires);
            }
            leaf => leaves.push(leaf),
        }
    }
    go(t, &mut leaves, &mut wires);
    (leaves, wires)
}
