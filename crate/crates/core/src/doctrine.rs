//! Finite discrete abstract cones, doctrines and the builtin doctrine catalog.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::base::{builtin_base, BaseTheory, Sign, SignedSort, SortId};
use crate::validation::ValidationReport;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConeObject {
    pub id: String,
    pub sort: SortId,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Projection {
    pub id: String,
    /// Reduct indices with signs, in declared order.
    pub entries: Vec<(usize, Sign)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiscreteCone {
    pub name: String,
    pub reduct: Vec<ConeObject>,
    pub vertex_sort: SortId,
    pub vertex_sign: Sign,
    pub projections: Vec<Projection>,
}

impl DiscreteCone {
    pub fn arity(&self) -> usize {
        self.reduct.len()
    }

    pub fn projection(&self, id: &str) -> Option<&Projection> {
        self.projections.iter().find(|p| p.id == id)
    }

    pub fn projection_index(&self, id: &str) -> Option<usize> {
        self.projections.iter().position(|p| p.id == id)
    }

    pub fn reduct_index(&self, id: &str) -> Option<usize> {
        self.reduct.iter().position(|o| o.id == id)
    }

    /// Signed sorts of a projection followed by the vertex.
    pub fn projection_shape(&self, p: &Projection) -> Vec<SignedSort> {
        let mut out: Vec<SignedSort> = p
            .entries
            .iter()
            .map(|&(i, s)| SignedSort::new(self.reduct[i].sort, s))
            .collect();
        out.push(SignedSort::new(self.vertex_sort, self.vertex_sign));
        out
    }

    pub fn is_arrow_type(&self) -> bool {
        self.reduct.len() == 1 && self.projections.len() == 1 && self.projections[0].entries.len() == 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Sorting {
    pub primitive: BTreeSet<SortId>,
    pub derived: BTreeSet<SortId>,
    pub sorting_cone: BTreeMap<SortId, String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Doctrine {
    pub name: String,
    pub base: Arc<BaseTheory>,
    pub cones: Vec<DiscreteCone>,
    pub sorting: Option<Sorting>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DoctrineError {
    #[error("unknown builtin doctrine `{0}`")]
    UnknownBuiltin(String),
    #[error("unknown cone `{0}`")]
    UnknownCone(String),
}

impl Doctrine {
    pub fn cone(&self, name: &str) -> Option<&DiscreteCone> {
        self.cones.iter().find(|c| c.name == name)
    }

    pub fn is_sorted(&self) -> bool {
        self.sorting.is_some()
    }

    pub fn sorting_cone_for(&self, sort: SortId) -> Option<&DiscreteCone> {
        let name = self.sorting.as_ref()?.sorting_cone.get(&sort)?;
        self.cone(name)
    }

    pub fn is_derived(&self, sort: SortId) -> bool {
        self.sorting.as_ref().is_some_and(|s| s.derived.contains(&sort))
    }

    pub fn is_sorting_cone(&self, name: &str) -> bool {
        self.sorting
            .as_ref()
            .is_some_and(|s| s.sorting_cone.values().any(|c| c == name))
    }

    /// The sub-doctrine keeping only the named cones; sorting is kept when its
    /// cones survive.
    pub fn restrict(&self, name: &str, keep: &[&str]) -> Result<Doctrine, DoctrineError> {
        for k in keep {
            if self.cone(k).is_none() {
                return Err(DoctrineError::UnknownCone(k.to_string()));
            }
        }
        let cones: Vec<DiscreteCone> = self
            .cones
            .iter()
            .filter(|c| keep.contains(&c.name.as_str()))
            .cloned()
            .collect();
        let sorting = self
            .sorting
            .clone()
            .filter(|s| s.sorting_cone.values().all(|c| keep.contains(&c.as_str())));
        Ok(Doctrine {
            name: name.into(),
            base: self.base.clone(),
            cones,
            sorting,
        })
    }

    /// A one-line signature for a cone, e.g. `Tensor[a:a, b:a] vertex a+ { p0(a-, b-) }`.
    pub fn cone_signature(&self, cone: &DiscreteCone) -> String {
        let objs: Vec<String> = cone
            .reduct
            .iter()
            .map(|o| format!("{}:{}", o.id, self.base.sort_name(o.sort)))
            .collect();
        let projs: Vec<String> = cone
            .projections
            .iter()
            .map(|p| {
                let es: Vec<String> = p
                    .entries
                    .iter()
                    .map(|&(i, s)| format!("{}{}", cone.reduct[i].id, s))
                    .collect();
                format!("{}({})", p.id, es.join(", "))
            })
            .collect();
        format!(
            "{}[{}] vertex {}{} {{ {} }}",
            cone.name,
            objs.join(", "),
            self.base.sort_name(cone.vertex_sort),
            cone.vertex_sign,
            projs.join("; ")
        )
    }
}

pub fn validate_cone(base: &BaseTheory, cone: &DiscreteCone) -> ValidationReport {
    let mut report = ValidationReport::new();
    let subject = format!("cone {}", cone.name);
    let n_sorts = base.sorts.len();
    let mut ids = BTreeSet::new();
    for o in &cone.reduct {
        if !ids.insert(o.id.clone()) {
            report.push("DuplicateObject", &subject, format!("object `{}` declared twice", o.id));
        }
        if o.sort.0 >= n_sorts {
            report.push("UnknownSort", &subject, format!("object `{}` has no valid sort", o.id));
        }
    }
    if cone.vertex_sort.0 >= n_sorts {
        report.push("UnknownSort", &subject, "vertex sort is not in the base");
        return report;
    }
    let mut pids = BTreeSet::new();
    for p in &cone.projections {
        if !pids.insert(p.id.clone()) {
            report.push(
                "DuplicateProjection",
                &subject,
                format!("projection `{}` declared twice", p.id),
            );
        }
        if p.entries.iter().any(|&(i, _)| i >= cone.reduct.len()) {
            report.push(
                "BadProjectionEntry",
                &subject,
                format!("projection `{}` refers to a missing reduct object", p.id),
            );
            continue;
        }
        if cone.reduct.iter().any(|o| o.sort.0 >= n_sorts) {
            continue;
        }
        let shape = cone.projection_shape(p);
        if !base.allows(&shape) {
            report.push(
                "ProjectionNotAllowed",
                &subject,
                format!(
                    "projection `{}` has shape {} which is not admissible and inhabited in {}",
                    p.id,
                    base.show(&shape),
                    base.name
                ),
            );
        }
    }
    for (a, p) in cone.projections.iter().enumerate() {
        for q in cone.projections.iter().skip(a + 1) {
            for &(i, s) in &p.entries {
                if q.entries.iter().any(|&(j, t)| i == j && s != t) {
                    report.push(
                        "Composable",
                        &subject,
                        format!(
                            "projections `{}` and `{}` use `{}` with opposite signs",
                            p.id, q.id, cone.reduct[i].id
                        ),
                    );
                }
            }
        }
    }
    report
}

pub fn validate_doctrine(d: &Doctrine) -> ValidationReport {
    let mut report = ValidationReport::new();
    let mut names = BTreeSet::new();
    for c in &d.cones {
        if !names.insert(c.name.clone()) {
            report.push(
                "DuplicateCone",
                format!("doctrine {}", d.name),
                format!("cone `{}` declared twice", c.name),
            );
        }
        report.extend(validate_cone(&d.base, c));
    }
    let Some(sorting) = &d.sorting else {
        return report;
    };
    let subject = format!("sorting of {}", d.name);
    let all: BTreeSet<SortId> = d.base.sort_ids().collect();
    let union: BTreeSet<SortId> = sorting.primitive.union(&sorting.derived).copied().collect();
    if union != all || sorting.primitive.intersection(&sorting.derived).next().is_some() {
        report.push(
            "SortingPartition",
            &subject,
            "primitive and derived sorts must partition the sorts",
        );
    }
    for &r in &sorting.derived {
        let with_vertex: Vec<&DiscreteCone> = d.cones.iter().filter(|c| c.vertex_sort == r).collect();
        let name = d.base.sorts.get(r.0).map(|s| s.name.clone()).unwrap_or_default();
        if with_vertex.len() != 1 {
            report.push(
                "SortingUniqueness",
                &subject,
                format!(
                    "derived sort `{}` is the vertex sort of {} cones, expected exactly one",
                    name,
                    with_vertex.len()
                ),
            );
        }
        match sorting.sorting_cone.get(&r).and_then(|c| d.cone(c)) {
            None => report.push(
                "SortingCone",
                &subject,
                format!("derived sort `{}` has no sorting cone", name),
            ),
            Some(c) => {
                if c.vertex_sort != r {
                    report.push(
                        "SortingCone",
                        &subject,
                        format!("sorting cone `{}` does not have vertex sort `{}`", c.name, name),
                    );
                }
                if !c.is_arrow_type() {
                    report.push(
                        "SortingArrowType",
                        &subject,
                        format!("sorting cone `{}` is not arrow-type", c.name),
                    );
                } else if !sorting.primitive.contains(&c.reduct[0].sort) {
                    report.push(
                        "SortingPrimitive",
                        &subject,
                        format!("sorting cone `{}` has a non-primitive reduct sort", c.name),
                    );
                }
            }
        }
    }
    for r in sorting.sorting_cone.keys() {
        if !sorting.derived.contains(r) {
            report.push("SortingCone", &subject, "sorting cone declared for a non-derived sort");
        }
    }
    report
}

pub const BUILTIN_DOCTRINES: &[&str] = &[
    "MILL",
    "MALL",
    "IL",
    "DILL",
    "DILL-Kleisli",
    "CLLX",
    "STORAGE",
    "CBPV",
    "ECBV",
    "SKEW",
];

struct ConeSpec<'a> {
    name: &'a str,
    objs: &'a [(&'a str, usize)],
    vertex: (usize, Sign),
    projs: &'a [(&'a str, &'a [(usize, Sign)])],
}

fn build(spec: &ConeSpec<'_>) -> DiscreteCone {
    DiscreteCone {
        name: spec.name.into(),
        reduct: spec
            .objs
            .iter()
            .map(|&(id, s)| ConeObject {
                id: id.into(),
                sort: SortId(s),
            })
            .collect(),
        vertex_sort: SortId(spec.vertex.0),
        vertex_sign: spec.vertex.1,
        projections: spec
            .projs
            .iter()
            .map(|&(id, es)| Projection {
                id: id.into(),
                entries: es.to_vec(),
            })
            .collect(),
    }
}

use Sign::{Neg as N, Pos as P};

/// Binary cone on one sort with a single two-entry projection.
fn binary(name: &str, s: usize, vertex: Sign, signs: (Sign, Sign)) -> DiscreteCone {
    build(&ConeSpec {
        name,
        objs: &[("a", s), ("b", s)],
        vertex: (s, vertex),
        projs: &[("p0", &[(0, signs.0), (1, signs.1)])],
    })
}

fn nullary(name: &str, s: usize, vertex: Sign, with_projection: bool) -> DiscreteCone {
    let projs: &[(&str, &[(usize, Sign)])] = if with_projection { &[("p0", &[])] } else { &[] };
    build(&ConeSpec {
        name,
        objs: &[],
        vertex: (s, vertex),
        projs,
    })
}

fn additive(name: &str, s: usize, vertex: Sign, entry: Sign) -> DiscreteCone {
    build(&ConeSpec {
        name,
        objs: &[("a", s), ("b", s)],
        vertex: (s, vertex),
        projs: &[("p0", &[(0, entry)]), ("p1", &[(1, entry)])],
    })
}

fn arrow(name: &str, from: usize, vertex_sort: usize, vertex: Sign, entry: Sign) -> DiscreteCone {
    build(&ConeSpec {
        name,
        objs: &[("a", from)],
        vertex: (vertex_sort, vertex),
        projs: &[("p0", &[(0, entry)])],
    })
}

/// The multiplicative and additive connectives on a single linear sort.
fn linear_connectives(a: usize, names: &[&str]) -> Vec<DiscreteCone> {
    names
        .iter()
        .map(|&n| match n {
            "Tensor" => binary("Tensor", a, P, (N, N)),
            "One" => nullary("One", a, P, true),
            "Par" => binary("Par", a, N, (P, P)),
            "Bot" => nullary("Bot", a, N, true),
            "Lolli" => binary("Lolli", a, N, (N, P)),
            "Dual" => arrow("Dual", a, a, N, N),
            "With" => additive("With", a, N, P),
            "Plus" => additive("Plus", a, P, N),
            "Top" => nullary("Top", a, N, false),
            "Zero" => nullary("Zero", a, P, false),
            other => unreachable!("no linear connective {other}"),
        })
        .collect()
}

/// Product, terminal, function space and coproducts on a nonlinear sort.
fn cartesian_connectives(x: usize, names: &[&str]) -> Vec<DiscreteCone> {
    names
        .iter()
        .map(|&n| match n {
            "Prod" => binary("Prod", x, P, (N, N)),
            "Terminal" => nullary("Terminal", x, P, true),
            "Arrow" => binary("Arrow", x, N, (N, P)),
            "Sum" => additive("Sum", x, P, N),
            "Empty" => nullary("Empty", x, P, false),
            other => unreachable!("no cartesian connective {other}"),
        })
        .collect()
}

/// F, U and their contravariant partners between a nonlinear sort `x` and a linear sort `a`.
fn modalities(x: usize, a: usize, names: &[&str]) -> Vec<DiscreteCone> {
    names
        .iter()
        .map(|&n| match n {
            "F" => arrow("F", x, a, P, N),
            "U" => arrow("U", a, x, N, P),
            "Ft" => arrow("Ft", x, a, N, N),
            "Ut" => arrow("Ut", a, x, N, N),
            other => unreachable!("no modality {other}"),
        })
        .collect()
}

fn doctrine(name: &str, base: &str, cones: Vec<DiscreteCone>, sorting: Option<Sorting>) -> Doctrine {
    Doctrine {
        name: name.into(),
        base: Arc::new(builtin_base(base).expect("builtin base")),
        cones,
        sorting,
    }
}

fn sorting(primitive: &[usize], derived: &[(usize, &str)]) -> Option<Sorting> {
    Some(Sorting {
        primitive: primitive.iter().map(|&s| SortId(s)).collect(),
        derived: derived.iter().map(|&(s, _)| SortId(s)).collect(),
        sorting_cone: derived.iter().map(|&(s, c)| (SortId(s), c.to_string())).collect(),
    })
}

pub fn builtin_doctrine(name: &str) -> Result<Doctrine, DoctrineError> {
    let d = match name {
        "MILL" => doctrine(
            "MILL",
            "symmulti",
            linear_connectives(0, &["Tensor", "One", "Lolli"]),
            None,
        ),
        "MALL" => doctrine(
            "MALL",
            "sympoly",
            linear_connectives(
                0,
                &["Tensor", "One", "Par", "Bot", "Dual", "With", "Plus", "Top", "Zero"],
            ),
            None,
        ),
        "IL" => doctrine(
            "IL",
            "cartmulti",
            cartesian_connectives(0, &["Prod", "Terminal", "Arrow", "Sum", "Empty"]),
            None,
        ),
        // lnlmulti: 0 = x, 1 = a
        "DILL" => {
            let mut cones = cartesian_connectives(0, &["Prod", "Terminal", "Arrow"]);
            cones.extend(linear_connectives(1, &["Tensor", "One", "Lolli"]));
            cones.extend(modalities(0, 1, &["F", "U"]));
            doctrine("DILL", "lnlmulti", cones, None)
        }
        "DILL-Kleisli" => {
            let mut cones = linear_connectives(1, &["Tensor", "One", "Lolli"]);
            cones.extend(modalities(0, 1, &["F", "U"]));
            doctrine("DILL-Kleisli", "lnlmulti", cones, sorting(&[1], &[(0, "U")]))
        }
        // lnlpoly: 0 = a, 1 = x
        "CLLX" => {
            let mut cones = linear_connectives(
                0,
                &[
                    "Tensor", "One", "Par", "Bot", "Dual", "Lolli", "With", "Plus", "Top", "Zero",
                ],
            );
            cones.extend(modalities(1, 0, &["F", "U", "Ft", "Ut"]));
            doctrine("CLLX", "lnlpoly", cones, None)
        }
        // dblsplit: 0 = a, 1 = xl, 2 = xr
        "STORAGE" => {
            let mut cones = linear_connectives(0, &["Tensor", "One", "Par", "Bot"]);
            cones.extend(modalities(1, 0, &["F", "U"]));
            cones.extend(modalities(2, 0, &["Ft", "Ut"]));
            doctrine("STORAGE", "dblsplit", cones, sorting(&[0], &[(1, "U"), (2, "Ut")]))
        }
        // cbpv and ecbv: 0 = x, 1 = a
        "CBPV" => {
            let mut cones = cartesian_connectives(0, &["Prod", "Terminal", "Arrow"]);
            cones.push(build(&ConeSpec {
                name: "MixedHom",
                objs: &[("a", 0), ("b", 1)],
                vertex: (1, N),
                projs: &[("p0", &[(0, N), (1, P)])],
            }));
            cones.extend(modalities(0, 1, &["F", "U"]));
            doctrine("CBPV", "cbpv", cones, None)
        }
        "ECBV" => {
            let mut cones = cartesian_connectives(0, &["Prod", "Terminal"]);
            cones.push(build(&ConeSpec {
                name: "StateHom",
                objs: &[("a", 1), ("b", 1)],
                vertex: (0, N),
                projs: &[("p0", &[(0, N), (1, P)])],
            }));
            cones.push(build(&ConeSpec {
                name: "Semi",
                objs: &[("a", 0), ("b", 1)],
                vertex: (1, P),
                projs: &[("p0", &[(0, N), (1, N)])],
            }));
            doctrine("ECBV", "ecbv", cones, None)
        }
        // symskew: 0 = l (derived), 1 = t (primitive)
        "SKEW" => {
            let cones = vec![
                arrow("Loose", 1, 0, N, P),
                nullary("TightOne", 1, P, true),
                build(&ConeSpec {
                    name: "SkewTensor",
                    objs: &[("a", 0), ("b", 1)],
                    vertex: (1, P),
                    projs: &[("p0", &[(0, N), (1, N)])],
                }),
                build(&ConeSpec {
                    name: "SkewHom",
                    objs: &[("a", 0), ("b", 1)],
                    vertex: (1, N),
                    projs: &[("p0", &[(0, N), (1, P)])],
                }),
            ];
            doctrine("SKEW", "symskew", cones, sorting(&[1], &[(0, "Loose")]))
        }
        other => return Err(DoctrineError::UnknownBuiltin(other.into())),
    };
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_builtin_validates() {
        for name in BUILTIN_DOCTRINES {
            let d = builtin_doctrine(name).unwrap();
            let r = validate_doctrine(&d);
            assert!(r.is_valid(), "{name}: {r}");
        }
    }

    #[test]
    fn tensor_and_with_cones_validate() {
        let mill = builtin_doctrine("MILL").unwrap();
        assert!(validate_cone(&mill.base, mill.cone("Tensor").unwrap()).is_valid());
        let mall = builtin_doctrine("MALL").unwrap();
        let with = mall.cone("With").unwrap();
        assert_eq!(with.vertex_sign, Sign::Neg);
        assert!(validate_cone(&mall.base, with).is_valid());
    }

    #[test]
    fn composable_projections_rejected() {
        let mall = builtin_doctrine("MALL").unwrap();
        let bad = build(&ConeSpec {
            name: "Bad",
            objs: &[("r", 0)],
            vertex: (0, N),
            projs: &[("p0", &[(0, P)]), ("p1", &[(0, N)])],
        });
        let r = validate_cone(&mall.base, &bad);
        assert!(r.has("Composable"), "{r}");
    }

    #[test]
    fn shared_derived_vertex_rejected() {
        let mut d = builtin_doctrine("DILL-Kleisli").unwrap();
        let mut extra = d.cone("U").unwrap().clone();
        extra.name = "U2".into();
        d.cones.push(extra);
        assert!(validate_doctrine(&d).has("SortingUniqueness"));
    }

    #[test]
    fn catalog_shapes() {
        let mall = builtin_doctrine("MALL").unwrap();
        let dual = mall.cone("Dual").unwrap();
        assert_eq!(dual.vertex_sign, Sign::Neg);
        assert_eq!(dual.projections[0].entries, vec![(0, Sign::Neg)]);
        let dill = builtin_doctrine("DILL").unwrap();
        let f = dill.cone("F").unwrap();
        assert!(dill.base.is_nonlinear(f.reduct[0].sort));
        assert_eq!(
            (f.vertex_sign, f.projections[0].entries.clone()),
            (Sign::Pos, vec![(0, Sign::Neg)])
        );
        let storage = builtin_doctrine("STORAGE").unwrap();
        let xr = storage.base.sort_by_name("xr").unwrap();
        assert_eq!(storage.sorting_cone_for(xr).unwrap().name, "Ut");
        assert!(builtin_doctrine("NOPE").is_err());
    }

    #[test]
    fn arrow_type_recognition() {
        let clx = builtin_doctrine("CLLX").unwrap();
        for c in &clx.cones {
            let expect = c.reduct.len() == 1 && c.projections.len() == 1 && c.projections[0].entries.len() == 1;
            assert_eq!(c.is_arrow_type(), expect, "{}", c.name);
        }
        assert!(clx.cone("U").unwrap().is_arrow_type());
        assert!(!clx.cone("Tensor").unwrap().is_arrow_type());
    }
}
