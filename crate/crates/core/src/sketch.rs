//! Sketches over a doctrine: objects, generators, equations and proto-extremal
//! cone instances, with well-sortedness and the well-sorted coreflection.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use thiserror::Error;

use crate::base::{Sign, SignedSort, SortId};
use crate::calculus::Derivation;
use crate::doctrine::Doctrine;
use crate::validation::ValidationReport;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SketchObject {
    pub name: String,
    pub sort: SortId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    pub name: String,
    pub signature: Vec<(String, Sign)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeInstance {
    pub cone: String,
    /// Reduct object id to sketch object name.
    pub objects: BTreeMap<String, String>,
    pub vertex: String,
    /// Projection id to generator name.
    pub witnesses: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Equation {
    pub name: String,
    pub lhs: Derivation,
    pub rhs: Derivation,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sketch {
    pub name: String,
    pub doctrine: Arc<Doctrine>,
    pub objects: Vec<SketchObject>,
    pub generators: Vec<Generator>,
    pub equations: Vec<Equation>,
    pub extremal: Vec<ConeInstance>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SketchError {
    #[error("doctrine `{0}` has no sorting")]
    UnsortedDoctrine(String),
}

impl Sketch {
    pub fn new(name: &str, doctrine: Arc<Doctrine>) -> Self {
        Sketch {
            name: name.into(),
            doctrine,
            objects: Vec::new(),
            generators: Vec::new(),
            equations: Vec::new(),
            extremal: Vec::new(),
        }
    }

    /// Adds an object by sort name; panics if the sort is unknown.
    pub fn with_object(mut self, name: &str, sort: &str) -> Self {
        let sort = self
            .doctrine
            .base
            .sort_by_name(sort)
            .unwrap_or_else(|| panic!("unknown sort {sort}"));
        self.objects.push(SketchObject {
            name: name.into(),
            sort,
        });
        self
    }

    pub fn with_generator(mut self, name: &str, signature: &[(&str, Sign)]) -> Self {
        self.generators.push(Generator {
            name: name.into(),
            signature: signature.iter().map(|&(o, s)| (o.to_string(), s)).collect(),
        });
        self
    }

    pub fn object(&self, name: &str) -> Option<&SketchObject> {
        self.objects.iter().find(|o| o.name == name)
    }

    pub fn generator(&self, name: &str) -> Option<&Generator> {
        self.generators.iter().find(|g| g.name == name)
    }

    pub fn generator_shape(&self, g: &Generator) -> Option<Vec<SignedSort>> {
        g.signature
            .iter()
            .map(|(o, s)| self.object(o).map(|o| SignedSort::new(o.sort, *s)))
            .collect()
    }

    /// The signed object list a witness of projection `proj` must have,
    /// projection entries first and the vertex last.
    pub fn instance_shape(&self, inst: &ConeInstance, proj: &str) -> Option<Vec<(String, Sign)>> {
        let cone = self.doctrine.cone(&inst.cone)?;
        let p = cone.projection(proj)?;
        let mut out = Vec::new();
        for &(i, sign) in &p.entries {
            out.push((inst.objects.get(&cone.reduct[i].id)?.clone(), sign));
        }
        out.push((inst.vertex.clone(), cone.vertex_sign));
        Some(out)
    }

    fn is_sorting_instance(&self, inst: &ConeInstance) -> bool {
        let Some(v) = self.object(&inst.vertex) else {
            return false;
        };
        self.doctrine
            .sorting_cone_for(v.sort)
            .is_some_and(|c| c.name == inst.cone)
    }
}

pub fn validate_sketch(s: &Sketch) -> ValidationReport {
    let mut report = ValidationReport::new();
    let base = &s.doctrine.base;
    let mut names = BTreeSet::new();
    for o in &s.objects {
        if !names.insert(o.name.clone()) {
            report.push(
                "DuplicateObject",
                format!("sketch {}", s.name),
                format!("object `{}` declared twice", o.name),
            );
        }
        if o.sort.0 >= base.sorts.len() {
            report.push("UnknownSort", format!("object {}", o.name), "sort is not in the base");
        }
    }
    let mut gens = BTreeSet::new();
    for g in &s.generators {
        let subject = format!("generator {}", g.name);
        if !gens.insert(g.name.clone()) {
            report.push("DuplicateGenerator", &subject, "declared twice");
        }
        match s.generator_shape(g) {
            None => report.push("UnknownObject", &subject, "signature mentions an undeclared object"),
            Some(shape) => {
                if !base.allows(&shape) {
                    report.push(
                        "GeneratorNotAllowed",
                        &subject,
                        format!(
                            "signature {} is not admissible and inhabited in {}",
                            base.show(&shape),
                            base.name
                        ),
                    );
                }
            }
        }
    }
    for inst in &s.extremal {
        report.extend(validate_instance(s, inst));
    }
    report
}

fn validate_instance(s: &Sketch, inst: &ConeInstance) -> ValidationReport {
    let mut report = ValidationReport::new();
    let subject = format!("extremal {} on {}", inst.cone, inst.vertex);
    let Some(cone) = s.doctrine.cone(&inst.cone) else {
        report.push(
            "UnknownCone",
            &subject,
            format!("no cone `{}` in {}", inst.cone, s.doctrine.name),
        );
        return report;
    };
    for obj in &cone.reduct {
        match inst.objects.get(&obj.id).and_then(|n| s.object(n)) {
            None => report.push(
                "InstanceObject",
                &subject,
                format!("reduct object `{}` is not assigned a sketch object", obj.id),
            ),
            Some(o) if o.sort != obj.sort => report.push(
                "InstanceSort",
                &subject,
                format!("`{}` is assigned `{}` of the wrong sort", obj.id, o.name),
            ),
            Some(_) => {}
        }
    }
    for key in inst.objects.keys() {
        if cone.reduct_index(key).is_none() {
            report.push(
                "InstanceObject",
                &subject,
                format!("`{key}` is not a reduct object of {}", cone.name),
            );
        }
    }
    match s.object(&inst.vertex) {
        None => report.push("InstanceObject", &subject, "vertex is not a sketch object"),
        Some(v) if v.sort != cone.vertex_sort => {
            report.push("InstanceSort", &subject, "vertex object has the wrong sort")
        }
        Some(_) => {}
    }
    for p in &cone.projections {
        let Some(gname) = inst.witnesses.get(&p.id) else {
            report.push(
                "InstanceWitness",
                &subject,
                format!("projection `{}` has no witness", p.id),
            );
            continue;
        };
        let Some(g) = s.generator(gname) else {
            report.push(
                "InstanceWitness",
                &subject,
                format!("witness `{gname}` is not a generator"),
            );
            continue;
        };
        let Some(want) = s.instance_shape(inst, &p.id) else {
            continue;
        };
        let mut have = g.signature.clone();
        let mut want_sorted = want.clone();
        have.sort();
        want_sorted.sort();
        if have != want_sorted {
            report.push(
                "InstanceWitness",
                &subject,
                format!("witness `{gname}` does not have the shape of projection `{}`", p.id),
            );
        }
    }
    for key in inst.witnesses.keys() {
        if cone.projection(key).is_none() {
            report.push(
                "InstanceWitness",
                &subject,
                format!("`{key}` is not a projection of {}", cone.name),
            );
        }
    }
    report
}

/// One witnessing sorting instance (by index) per derived-sort object.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SortingWitness {
    pub well_sorted: bool,
    pub witnesses: BTreeMap<String, usize>,
    pub unwitnessed: Vec<String>,
}

pub fn is_well_sorted(s: &Sketch) -> Result<SortingWitness, SketchError> {
    if !s.doctrine.is_sorted() {
        return Err(SketchError::UnsortedDoctrine(s.doctrine.name.clone()));
    }
    let mut witnesses = BTreeMap::new();
    let mut unwitnessed = Vec::new();
    for o in &s.objects {
        if !s.doctrine.is_derived(o.sort) {
            continue;
        }
        let found = s.extremal.iter().position(|inst| {
            inst.vertex == o.name && s.is_sorting_instance(inst) && validate_instance(s, inst).is_valid()
        });
        match found {
            Some(i) => {
                witnesses.insert(o.name.clone(), i);
            }
            None => unwitnessed.push(o.name.clone()),
        }
    }
    Ok(SortingWitness {
        well_sorted: unwitnessed.is_empty(),
        witnesses,
        unwitnessed,
    })
}

/// Drops derived-sort objects without sorting witnesses, together with every
/// generator, instance and equation that mentions something dropped.
pub fn coreflect(s: &Sketch) -> Result<Sketch, SketchError> {
    let mut out = s.clone();
    loop {
        let w = is_well_sorted(&out)?;
        if w.well_sorted {
            return Ok(out);
        }
        let dropped: BTreeSet<String> = w.unwitnessed.into_iter().collect();
        out = restrict_to(&out, |o| !dropped.contains(o));
    }
}

/// The full sub-sketch on the objects satisfying `keep`.
pub fn restrict_to(s: &Sketch, keep: impl Fn(&str) -> bool) -> Sketch {
    let objects: Vec<SketchObject> = s.objects.iter().filter(|o| keep(&o.name)).cloned().collect();
    let generators: Vec<Generator> = s
        .generators
        .iter()
        .filter(|g| g.signature.iter().all(|(o, _)| keep(o)))
        .cloned()
        .collect();
    let gen_names: BTreeSet<&str> = generators.iter().map(|g| g.name.as_str()).collect();
    let extremal = s
        .extremal
        .iter()
        .filter(|i| {
            keep(&i.vertex)
                && i.objects.values().all(|o| keep(o))
                && i.witnesses.values().all(|g| gen_names.contains(g.as_str()))
        })
        .cloned()
        .collect();
    let equations = s
        .equations
        .iter()
        .filter(|e| {
            let mut objs = BTreeSet::new();
            let mut gens = BTreeSet::new();
            e.lhs.mentions(&mut objs, &mut gens);
            e.rhs.mentions(&mut objs, &mut gens);
            objs.iter().all(|o| keep(o)) && gens.iter().all(|g| gen_names.contains(g.as_str()))
        })
        .cloned()
        .collect();
    Sketch {
        name: s.name.clone(),
        doctrine: s.doctrine.clone(),
        objects,
        generators,
        equations,
        extremal,
    }
}
