//! Canonical serialization of normal terms and read-back into derivations.
//!
//! A cut tree is serialized from each possible root leaf; the least string
//! wins. Interface variables print as `#k`, the edge back to the parent as
//! `^`, and child subtrees nest in angle brackets. Sides of an invertible
//! leaf are sorted by their rendering, which fixes the parameter order of
//! every premise.

use std::cell::RefCell;
use std::collections::HashMap;

use crate::base::StructuralMap;
use crate::calculus::{Derivation, Entry};
use crate::sketch::Sketch;

use super::term::{flatten, Ctx, Term, Var};

pub struct Canon<'a> {
    s: &'a Sketch,
    ctx: &'a Ctx,
    cache: RefCell<HashMap<(usize, Vec<Var>), String>>,
}

struct Net<'t> {
    leaves: Vec<&'t Term>,
    /// Wire -> the two (leaf, port) ends.
    ends: HashMap<Var, Vec<usize>>,
    iface: HashMap<Var, usize>,
}

fn ports(t: &Term) -> Vec<Var> {
    let mut v = Vec::new();
    t.occurrences(&mut v);
    v
}

impl<'t> Net<'t> {
    fn new(t: &'t Term, iface: &[Var]) -> Self {
        let (leaves, wires) = flatten(t);
        let mut ends: HashMap<Var, Vec<usize>> = HashMap::new();
        for (k, l) in leaves.iter().enumerate() {
            for v in ports(l) {
                if wires.contains_key(&v) {
                    ends.entry(v).or_default().push(k);
                }
            }
        }
        let iface = iface.iter().enumerate().map(|(k, v)| (*v, k)).collect();
        Net { leaves, ends, iface }
    }

    fn other_end(&self, wire: Var, from: usize) -> Option<usize> {
        let e = self.ends.get(&wire)?;
        e.iter()
            .copied()
            .find(|&l| l != from)
            .or_else(|| (e.len() > 1).then_some(from))
    }
}

impl<'a> Canon<'a> {
    pub fn new(s: &'a Sketch, ctx: &'a Ctx) -> Self {
        Canon {
            s,
            ctx,
            cache: RefCell::new(HashMap::new()),
        }
    }

    /// The canonical string of `t` whose interface is `iface` in order.
    pub fn key(&self, t: &Term, iface: &[Var]) -> String {
        let ck = (t as *const Term as usize, iface.to_vec());
        if let Some(k) = self.cache.borrow().get(&ck) {
            return k.clone();
        }
        let net = Net::new(t, iface);
        let k = (0..net.leaves.len())
            .map(|r| self.ser(&net, r, None))
            .min()
            .unwrap_or_default();
        self.cache.borrow_mut().insert(ck, k.clone());
        k
    }

    fn best_root(&self, net: &Net) -> usize {
        (0..net.leaves.len())
            .min_by_key(|&r| self.ser(net, r, None))
            .unwrap_or(0)
    }

    fn port_repr(&self, net: &Net, leaf: usize, v: Var, parent: Option<Var>) -> String {
        if Some(v) == parent {
            return "^".into();
        }
        if let Some(child) = net.other_end(v, leaf) {
            return format!("<{}>", self.ser(net, child, Some(v)));
        }
        match net.iface.get(&v) {
            Some(k) => format!("#{k}"),
            None => "?".into(),
        }
    }

    /// Side positions of an invertible leaf in canonical order.
    fn side_order(&self, net: &Net, leaf: usize, parent: Option<Var>) -> (Vec<usize>, Vec<String>) {
        let Term::Inv { sides, .. } = net.leaves[leaf] else {
            unreachable!()
        };
        let mut keyed: Vec<(String, usize)> = sides
            .iter()
            .enumerate()
            .map(|(k, &(v, sg))| {
                (
                    format!("{}{}{}", self.ctx.ty(v), sg, self.port_repr(net, leaf, v, parent)),
                    k,
                )
            })
            .collect();
        keyed.sort();
        (
            keyed.iter().map(|(_, k)| *k).collect(),
            keyed.into_iter().map(|(s, _)| s).collect(),
        )
    }

    fn ser(&self, net: &Net, leaf: usize, parent: Option<Var>) -> String {
        let t = net.leaves[leaf];
        match t {
            Term::Id { ty, neg, pos } => format!(
                "id:{ty}({},{})",
                self.port_repr(net, leaf, *neg, parent),
                self.port_repr(net, leaf, *pos, parent)
            ),
            Term::Gen { name, ports } => {
                let ps: Vec<String> = ports.iter().map(|&v| self.port_repr(net, leaf, v, parent)).collect();
                format!("g:{name}({})", ps.join(","))
            }
            Term::NonInv {
                cone,
                args,
                proj,
                ports,
            } => {
                let ps: Vec<String> = ports.iter().map(|&v| self.port_repr(net, leaf, v, parent)).collect();
                format!("p:{cone}[{}].{proj}({})", join(args), ps.join(","))
            }
            Term::Inv {
                cone,
                args,
                principal,
                sides,
                premises,
            } => {
                let (order, reprs) = self.side_order(net, leaf, parent);
                let mut out = format!(
                    "i:{cone}[{}]({};{})",
                    join(args),
                    self.port_repr(net, leaf, *principal, parent),
                    reprs.join(",")
                );
                out.push('{');
                for p in premises {
                    let params = reorder_params(&p.params, sides.len(), &order);
                    out.push_str(&format!("{}:{};", p.proj, self.key(&p.body, &params)));
                }
                out.push('}');
                out
            }
            Term::Cut { .. } => unreachable!(),
        }
    }

    /// Reads a normal term back as a derivation concluding `iface` in order.
    pub fn derivation(&self, t: &Term, iface: &[(Var, Entry)]) -> Derivation {
        let vars: Vec<Var> = iface.iter().map(|(v, _)| *v).collect();
        let net = Net::new(t, &vars);
        let root = self.best_root(&net);
        let (d, got) = self.build(&net, root, None);
        let index: Vec<usize> = got.iter().map(|v| net.iface[v]).collect();
        let map = StructuralMap::new(iface.len(), index);
        let target: Vec<Entry> = iface.iter().map(|(_, e)| e.clone()).collect();
        if map.is_identity() && got.len() == iface.len() {
            d
        } else {
            Derivation::structural(target, map, d)
        }
    }

    fn build(&self, net: &Net, leaf: usize, parent: Option<Var>) -> (Derivation, Vec<Var>) {
        let t = net.leaves[leaf];
        let (mut d, mut vars) = match t {
            Term::Id { ty, neg, pos } => (Derivation::Id(ty.clone()), vec![*neg, *pos]),
            Term::Gen { name, ports } => (Derivation::Gen(name.clone()), ports.clone()),
            Term::NonInv {
                cone,
                args,
                proj,
                ports,
            } => (Derivation::non_inv(cone, args.clone(), proj), ports.clone()),
            Term::Inv {
                cone,
                args,
                principal,
                sides,
                premises,
            } => {
                let (order, _) = self.side_order(net, leaf, parent);
                let sorted: Vec<(Var, crate::base::Sign)> = order.iter().map(|&k| sides[k]).collect();
                let mut prems = Vec::new();
                for p in premises {
                    let params = reorder_params(&p.params, sides.len(), &order);
                    let entries: Vec<(Var, Entry)> = params
                        .iter()
                        .map(|&v| {
                            (
                                v,
                                Entry::new(
                                    self.ctx.ty(v).clone(),
                                    self.param_sign(&p.params, &params, v, sides, cone, &p.proj),
                                ),
                            )
                        })
                        .collect();
                    prems.push((p.proj.clone(), self.derivation(&p.body, &entries)));
                }
                let side_entries = sorted
                    .iter()
                    .map(|&(v, sg)| Entry::new(self.ctx.ty(v).clone(), sg))
                    .collect();
                let mut vars = vec![*principal];
                vars.extend(sorted.iter().map(|(v, _)| *v));
                (
                    Derivation::Inv {
                        cone: cone.clone(),
                        args: args.clone(),
                        sides: side_entries,
                        premises: prems,
                    },
                    vars,
                )
            }
            Term::Cut { .. } => unreachable!(),
        };
        let own = vars.clone();
        for v in own {
            if Some(v) == parent {
                continue;
            }
            let Some(child) = net.other_end(v, leaf) else { continue };
            let (dc, vc) = self.build(net, child, Some(v));
            let i = vars.iter().position(|&x| x == v).expect("port");
            let j = vc.iter().position(|&x| x == v).expect("port");
            d = Derivation::cut(d, i, dc, j);
            vars.remove(i);
            vars.extend(vc.into_iter().enumerate().filter(|(k, _)| *k != j).map(|(_, x)| x));
        }
        (d, vars)
    }

    fn param_sign(
        &self,
        original: &[Var],
        _reordered: &[Var],
        v: Var,
        sides: &[(Var, crate::base::Sign)],
        cone: &str,
        proj: &str,
    ) -> crate::base::Sign {
        let k = original.iter().position(|&x| x == v).expect("param");
        let c = self.s.doctrine.cone(cone).expect("checked cone");
        let p = c.projection(proj).expect("checked projection");
        if k < p.entries.len() {
            p.entries[k].1
        } else {
            sides[k - p.entries.len()].1
        }
    }
}

fn join(args: &[crate::types::TypeExpr]) -> String {
    args.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",")
}

/// Projection parameters stay first; side parameters follow `order`.
fn reorder_params(params: &[Var], n_sides: usize, order: &[usize]) -> Vec<Var> {
    let n_proj = params.len() - n_sides;
    let mut out = params[..n_proj].to_vec();
    out.extend(order.iter().map(|&k| params[n_proj + k]));
    out
}
