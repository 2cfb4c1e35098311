//! Doctrine maps: validation, sortedness, moving sketches along a map in
//! both directions, and rule-by-rule translation of derivations.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::base::{Sign, SignedSort, SortId};
use crate::calculus::{check_derivation, CheckError, Derivation, Entry};
use crate::doctrine::Doctrine;
use crate::sketch::{ConeInstance, Equation, Generator, Sketch, SketchObject};
use crate::types::TypeExpr;
use crate::validation::ValidationReport;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeCorrespondence {
    pub target: String,
    /// Source reduct object id to target reduct object id.
    pub objects: BTreeMap<String, String>,
    /// Source projection id to target projection id.
    pub projections: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DoctrineMap {
    pub name: String,
    pub source: Arc<Doctrine>,
    pub target: Arc<Doctrine>,
    pub sorts: BTreeMap<SortId, SortId>,
    pub cones: BTreeMap<String, ConeCorrespondence>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SortedFlag {
    pub sorted: bool,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Error)]
pub enum TranslateError {
    #[error("invalid map `{0}`")]
    InvalidMap(String),
    #[error("derivation does not check: {0}")]
    Unchecked(#[from] CheckError),
    #[error("cannot translate: {0}")]
    Untranslatable(String),
}

/// Lists up to this length are checked exhaustively for base functoriality.
const EXHAUSTIVE_LEN: usize = 5;
const RANDOM_TRIALS: usize = 300;

impl DoctrineMap {
    pub fn sort(&self, s: SortId) -> Option<SortId> {
        self.sorts.get(&s).copied()
    }

    pub fn map_type(&self, t: &TypeExpr) -> Result<TypeExpr, TranslateError> {
        match t {
            TypeExpr::Gen(o) => Ok(TypeExpr::Gen(o.clone())),
            TypeExpr::Comp(c, args) => {
                let corr = self
                    .cones
                    .get(c)
                    .ok_or_else(|| TranslateError::Untranslatable(format!("cone {c} is not mapped")))?;
                let src = self
                    .source
                    .cone(c)
                    .ok_or_else(|| TranslateError::Untranslatable(format!("unknown cone {c}")))?;
                let tgt = self
                    .target
                    .cone(&corr.target)
                    .ok_or_else(|| TranslateError::Untranslatable(format!("unknown target cone {}", corr.target)))?;
                let mut out: Vec<Option<TypeExpr>> = vec![None; tgt.reduct.len()];
                for (k, obj) in src.reduct.iter().enumerate() {
                    let to = corr
                        .objects
                        .get(&obj.id)
                        .and_then(|id| tgt.reduct_index(id))
                        .ok_or_else(|| {
                            TranslateError::Untranslatable(format!("object {} of {c} is not mapped", obj.id))
                        })?;
                    out[to] = Some(self.map_type(&args[k])?);
                }
                let args = out
                    .into_iter()
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| TranslateError::Untranslatable(format!("cone {c} maps onto a larger reduct")))?;
                Ok(TypeExpr::Comp(corr.target.clone(), args))
            }
        }
    }

    pub fn map_entry(&self, e: &Entry) -> Result<Entry, TranslateError> {
        Ok(Entry::new(self.map_type(&e.ty)?, e.sign))
    }

    fn map_projection(&self, cone: &str, proj: &str) -> Result<String, TranslateError> {
        self.cones
            .get(cone)
            .and_then(|c| c.projections.get(proj))
            .cloned()
            .ok_or_else(|| TranslateError::Untranslatable(format!("projection {cone}.{proj} is not mapped")))
    }
}

/// Checks the sort map, base functoriality and every cone correspondence,
/// then reports whether the map is sorted.
pub fn validate_map(m: &DoctrineMap) -> (ValidationReport, SortedFlag) {
    let mut report = ValidationReport::new();
    let (sb, tb) = (&m.source.base, &m.target.base);
    let subject = m.name.clone();
    for s in sb.sort_ids() {
        match m.sort(s) {
            None => report.push(
                "UnmappedSort",
                &subject,
                format!("sort {} has no image", sb.sort_name(s)),
            ),
            Some(t) if t.0 >= tb.sorts.len() => report.push(
                "UnknownSort",
                &subject,
                format!("sort {} maps outside the target base", sb.sort_name(s)),
            ),
            Some(t) if sb.linearity(s) != tb.linearity(t) => report.push(
                "SortLinearity",
                &subject,
                format!("{} and {} differ in linearity", sb.sort_name(s), tb.sort_name(t)),
            ),
            Some(_) => {}
        }
    }
    if report.is_valid() {
        check_functoriality(m, &mut report);
    }
    for c in &m.source.cones {
        let Some(corr) = m.cones.get(&c.name) else {
            report.push("UnmappedCone", &subject, format!("cone {} has no image", c.name));
            continue;
        };
        check_cone(m, c, corr, &mut report);
    }
    for name in m.cones.keys() {
        if m.source.cone(name).is_none() {
            report.push("UnknownCone", &subject, format!("source has no cone {name}"));
        }
    }
    let flag = sorted_flag(m);
    (report, flag)
}

fn image(m: &DoctrineMap, list: &[SignedSort]) -> Option<Vec<SignedSort>> {
    list.iter()
        .map(|ss| m.sort(ss.sort).map(|t| SignedSort::new(t, ss.sign)))
        .collect()
}

fn check_functoriality(m: &DoctrineMap, report: &mut ValidationReport) {
    let sb = &m.source.base;
    let letters: Vec<SignedSort> = sb
        .sort_ids()
        .flat_map(|s| [SignedSort::new(s, Sign::Neg), SignedSort::new(s, Sign::Pos)])
        .collect();
    let mut failures = 0usize;
    let mut check = |list: &[SignedSort], report: &mut ValidationReport| {
        if failures > 0 || !sb.allows(list) {
            return;
        }
        let ok = image(m, list).is_some_and(|img| m.target.base.allows(&img));
        if !ok {
            failures += 1;
            report.push(
                "BaseFunctoriality",
                &m.name,
                format!("image of allowed list {} is not allowed", sb.show(list)),
            );
        }
    };
    let mut layer: Vec<Vec<SignedSort>> = vec![Vec::new()];
    for _ in 0..=EXHAUSTIVE_LEN {
        for l in &layer {
            check(l, report);
        }
        layer = layer
            .iter()
            .flat_map(|l| {
                letters.iter().map(move |x| {
                    let mut n = l.clone();
                    n.push(*x);
                    n
                })
            })
            .collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..RANDOM_TRIALS {
        if let Some(l) = sb.sample_inhabited(&mut rng, 8) {
            check(&l, report);
        }
    }
}

fn check_cone(
    m: &DoctrineMap,
    c: &crate::doctrine::DiscreteCone,
    corr: &ConeCorrespondence,
    report: &mut ValidationReport,
) {
    let subject = format!("{}:{}", m.name, c.name);
    let Some(t) = m.target.cone(&corr.target) else {
        report.push("UnknownCone", &subject, format!("target has no cone {}", corr.target));
        return;
    };
    let mut fail = |detail: String| report.push("ConeIsomorphism", &subject, &detail);
    if c.reduct.len() != t.reduct.len() {
        fail(format!("reduct sizes {} and {} differ", c.reduct.len(), t.reduct.len()));
        return;
    }
    let mut seen = BTreeSet::new();
    for o in &c.reduct {
        let Some(to) = corr
            .objects
            .get(&o.id)
            .and_then(|id| t.reduct.iter().find(|x| x.id == *id))
        else {
            fail(format!("object {} has no image", o.id));
            continue;
        };
        if !seen.insert(to.id.clone()) {
            fail(format!("object {} is hit twice", to.id));
        }
        if m.sort(o.sort) != Some(to.sort) {
            fail(format!("object {} changes sort", o.id));
        }
    }
    if m.sort(c.vertex_sort) != Some(t.vertex_sort) || c.vertex_sign != t.vertex_sign {
        fail("vertex sort or sign differs".into());
    }
    if c.projections.len() != t.projections.len() {
        fail("projection counts differ".into());
        return;
    }
    let mut hit = BTreeSet::new();
    for p in &c.projections {
        let Some(q) = corr.projections.get(&p.id).and_then(|id| t.projection(id)) else {
            fail(format!("projection {} has no image", p.id));
            continue;
        };
        if !hit.insert(q.id.clone()) {
            fail(format!("projection {} is hit twice", q.id));
        }
        let mapped: Option<Vec<(usize, Sign)>> = p
            .entries
            .iter()
            .map(|&(r, sg)| {
                corr.objects
                    .get(&c.reduct[r].id)
                    .and_then(|id| t.reduct_index(id))
                    .map(|k| (k, sg))
            })
            .collect();
        if mapped.as_ref() != Some(&q.entries) {
            fail(format!("projection {} does not match {}", p.id, q.id));
        }
    }
}

fn sorted_flag(m: &DoctrineMap) -> SortedFlag {
    let mut diagnostics = Vec::new();
    let (Some(ss), Some(ts)) = (&m.source.sorting, &m.target.sorting) else {
        return SortedFlag {
            sorted: false,
            diagnostics: vec!["both doctrines must be sorted".into()],
        };
    };
    let name = |d: &Doctrine, s: SortId| d.base.sort_name(s).to_string();
    for &s in &ss.primitive {
        if !m.sort(s).is_some_and(|t| ts.primitive.contains(&t)) {
            diagnostics.push(format!(
                "primitive sort {} does not map to a primitive sort",
                name(&m.source, s)
            ));
        }
    }
    for &s in &ss.derived {
        let Some(t) = m.sort(s) else { continue };
        if !ts.derived.contains(&t) {
            diagnostics.push(format!(
                "derived sort {} does not map to a derived sort",
                name(&m.source, s)
            ));
            continue;
        }
        let image = ss
            .sorting_cone
            .get(&s)
            .and_then(|c| m.cones.get(c))
            .map(|c| c.target.clone());
        if image.as_ref() != ts.sorting_cone.get(&t) {
            diagnostics.push(format!(
                "sorting cone of {} does not map to the sorting cone of {}",
                name(&m.source, s),
                name(&m.target, t)
            ));
        }
    }
    let images: BTreeSet<SortId> = ss.derived.iter().filter_map(|&s| m.sort(s)).collect();
    for (t, cone) in &ts.sorting_cone {
        if !images.contains(t) && m.sorts.values().any(|x| x == t) {
            diagnostics.push(format!("sorting cone {cone} is not the image of a sorting cone"));
        }
    }
    SortedFlag {
        sorted: diagnostics.is_empty(),
        diagnostics,
    }
}

fn ensure_valid(m: &DoctrineMap) -> Result<(), TranslateError> {
    if validate_map(m).0.is_valid() {
        Ok(())
    } else {
        Err(TranslateError::InvalidMap(m.name.clone()))
    }
}

/// Relabels the sketch along the map.
pub fn push_sketch(m: &DoctrineMap, s: &Sketch) -> Result<Sketch, TranslateError> {
    ensure_valid(m)?;
    let mut out = Sketch::new(&s.name, m.target.clone());
    for o in &s.objects {
        let sort = m
            .sort(o.sort)
            .ok_or_else(|| TranslateError::Untranslatable(format!("object {} has an unmapped sort", o.name)))?;
        out.objects.push(SketchObject {
            name: o.name.clone(),
            sort,
        });
    }
    out.generators = s.generators.clone();
    for inst in &s.extremal {
        let corr = m
            .cones
            .get(&inst.cone)
            .ok_or_else(|| TranslateError::Untranslatable(format!("cone {} is not mapped", inst.cone)))?;
        let objects = inst
            .objects
            .iter()
            .map(|(k, v)| (corr.objects.get(k).cloned().unwrap_or_else(|| k.clone()), v.clone()))
            .collect();
        let witnesses = inst
            .witnesses
            .iter()
            .map(|(k, v)| (corr.projections.get(k).cloned().unwrap_or_else(|| k.clone()), v.clone()))
            .collect();
        out.extremal.push(ConeInstance {
            cone: corr.target.clone(),
            objects,
            vertex: inst.vertex.clone(),
            witnesses,
        });
    }
    for eq in &s.equations {
        out.equations.push(Equation {
            name: eq.name.clone(),
            lhs: map_derivation(m, &eq.lhs)?,
            rhs: map_derivation(m, &eq.rhs)?,
        });
    }
    Ok(out)
}

/// Pulls a target sketch back: one object per target object and source
/// sort over its sort, and every lift of every generator and instance.
/// Equations are not pulled back.
pub fn pull_sketch(m: &DoctrineMap, t: &Sketch) -> Result<Sketch, TranslateError> {
    ensure_valid(m)?;
    let sb = &m.source.base;
    let mut out = Sketch::new(&t.name, m.source.clone());
    // target object -> [(source sort, lifted name)]
    let mut lifts: BTreeMap<String, Vec<(SortId, String)>> = BTreeMap::new();
    for o in &t.objects {
        let over: Vec<SortId> = sb.sort_ids().filter(|&r| m.sort(r) == Some(o.sort)).collect();
        for &r in &over {
            let name = if over.len() == 1 {
                o.name.clone()
            } else {
                format!("{}@{}", o.name, sb.sort_name(r))
            };
            out.objects.push(SketchObject {
                name: name.clone(),
                sort: r,
            });
            lifts.entry(o.name.clone()).or_default().push((r, name));
        }
    }
    let lift_of = |obj: &str, sort: SortId| -> Option<String> {
        lifts.get(obj)?.iter().find(|(r, _)| *r == sort).map(|(_, n)| n.clone())
    };
    // generator -> its lifts, each as the chosen source sorts
    let mut gen_lifts: BTreeMap<String, Vec<(Vec<SortId>, String)>> = BTreeMap::new();
    for g in &t.generators {
        let choices: Vec<Vec<(SortId, String)>> = g
            .signature
            .iter()
            .map(|(o, _)| lifts.get(o).cloned().unwrap_or_default())
            .collect();
        let combos = cartesian(&choices);
        let allowed: Vec<Vec<(SortId, String)>> = combos
            .into_iter()
            .filter(|combo| {
                let shape: Vec<SignedSort> = combo
                    .iter()
                    .zip(&g.signature)
                    .map(|((r, _), (_, sg))| SignedSort::new(*r, *sg))
                    .collect();
                sb.allows(&shape)
            })
            .collect();
        for (k, combo) in allowed.iter().enumerate() {
            let name = if allowed.len() == 1 {
                g.name.clone()
            } else {
                format!("{}@{k}", g.name)
            };
            out.generators.push(Generator {
                name: name.clone(),
                signature: combo
                    .iter()
                    .zip(&g.signature)
                    .map(|((_, n), (_, sg))| (n.clone(), *sg))
                    .collect(),
            });
            gen_lifts
                .entry(g.name.clone())
                .or_default()
                .push((combo.iter().map(|(r, _)| *r).collect(), name));
        }
    }
    for inst in &t.extremal {
        for (src_cone, corr) in m.cones.iter().filter(|(_, c)| c.target == inst.cone) {
            let Some(c) = m.source.cone(src_cone) else { continue };
            let mut objects = BTreeMap::new();
            let mut ok = true;
            for o in &c.reduct {
                let lifted = corr
                    .objects
                    .get(&o.id)
                    .and_then(|tid| inst.objects.get(tid))
                    .and_then(|obj| lift_of(obj, o.sort));
                match lifted {
                    Some(n) => {
                        objects.insert(o.id.clone(), n);
                    }
                    None => ok = false,
                }
            }
            let vertex = lift_of(&inst.vertex, c.vertex_sort);
            let (true, Some(vertex)) = (ok, vertex) else { continue };
            let mut witnesses = BTreeMap::new();
            for p in &c.projections {
                let Some(tw) = corr.projections.get(&p.id).and_then(|q| inst.witnesses.get(q)) else {
                    ok = false;
                    break;
                };
                let want: BTreeSet<String> = objects.values().cloned().chain([vertex.clone()]).collect();
                let found = gen_lifts.get(tw).and_then(|ls| {
                    ls.iter().find(|(_, n)| {
                        out.generator(n)
                            .is_some_and(|g| g.signature.iter().all(|(o, _)| want.contains(o)))
                    })
                });
                match found {
                    Some((_, n)) => {
                        witnesses.insert(p.id.clone(), n.clone());
                    }
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                out.extremal.push(ConeInstance {
                    cone: src_cone.clone(),
                    objects,
                    vertex,
                    witnesses,
                });
            }
        }
    }
    Ok(out)
}

fn cartesian<T: Clone>(choices: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = vec![Vec::new()];
    for c in choices {
        out = out
            .iter()
            .flat_map(|p| {
                c.iter().map(move |x| {
                    let mut n = p.clone();
                    n.push(x.clone());
                    n
                })
            })
            .collect();
    }
    out
}

/// Translates a derivation over `s` into one over `push_sketch(m, s)`.
pub fn translate_derivation(m: &DoctrineMap, s: &Sketch, d: &Derivation) -> Result<Derivation, TranslateError> {
    ensure_valid(m)?;
    check_derivation(s, d)?;
    map_derivation(m, d)
}

fn map_derivation(m: &DoctrineMap, d: &Derivation) -> Result<Derivation, TranslateError> {
    Ok(match d {
        Derivation::Id(t) => Derivation::Id(m.map_type(t)?),
        Derivation::Gen(g) => Derivation::Gen(g.clone()),
        Derivation::Cut { left, i, right, j } => {
            Derivation::cut(map_derivation(m, left)?, *i, map_derivation(m, right)?, *j)
        }
        Derivation::Struct { target, map, premise } => Derivation::structural(
            target.iter().map(|e| m.map_entry(e)).collect::<Result<_, _>>()?,
            map.clone(),
            map_derivation(m, premise)?,
        ),
        Derivation::NonInv { cone, args, proj } => {
            let TypeExpr::Comp(tc, targs) = m.map_type(&TypeExpr::Comp(cone.clone(), args.clone()))? else {
                unreachable!()
            };
            Derivation::NonInv {
                cone: tc,
                args: targs,
                proj: m.map_projection(cone, proj)?,
            }
        }
        Derivation::Inv {
            cone,
            args,
            sides,
            premises,
        } => {
            let TypeExpr::Comp(tc, targs) = m.map_type(&TypeExpr::Comp(cone.clone(), args.clone()))? else {
                unreachable!()
            };
            let mut mapped = Vec::new();
            for (p, pd) in premises {
                mapped.push((m.map_projection(cone, p)?, map_derivation(m, pd)?));
            }
            if let Some(tcone) = m.target.cone(&tc) {
                mapped.sort_by_key(|(p, _)| tcone.projection_index(p));
            }
            Derivation::Inv {
                cone: tc,
                args: targs,
                sides: sides.iter().map(|e| m.map_entry(e)).collect::<Result<_, _>>()?,
                premises: mapped,
            }
        }
    })
}

/// The identity-on-names map between doctrines that share cone names,
/// sending each source sort to the target sort of the same linearity and
/// name when there is one.
pub fn inclusion(
    name: &str,
    source: Arc<Doctrine>,
    target: Arc<Doctrine>,
    sorts: &[(&str, &str)],
) -> Result<DoctrineMap, TranslateError> {
    let mut sort_map = BTreeMap::new();
    for (a, b) in sorts {
        let s = source
            .base
            .sort_by_name(a)
            .ok_or_else(|| TranslateError::InvalidMap(format!("{name}: no sort {a}")))?;
        let t = target
            .base
            .sort_by_name(b)
            .ok_or_else(|| TranslateError::InvalidMap(format!("{name}: no sort {b}")))?;
        sort_map.insert(s, t);
    }
    let mut cones = BTreeMap::new();
    for c in &source.cones {
        let Some(t) = target.cone(&c.name) else { continue };
        cones.insert(
            c.name.clone(),
            ConeCorrespondence {
                target: t.name.clone(),
                objects: c.reduct.iter().map(|o| (o.id.clone(), o.id.clone())).collect(),
                projections: c.projections.iter().map(|p| (p.id.clone(), p.id.clone())).collect(),
            },
        );
    }
    Ok(DoctrineMap {
        name: name.into(),
        source,
        target,
        sorts: sort_map,
        cones,
    })
}
