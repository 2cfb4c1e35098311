use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use anyhow::Result;
use doctrina::base::Sign::{Neg, Pos};
use doctrina::doctrine::builtin_doctrine;
use doctrina::sketch::{coreflect, is_well_sorted, restrict_to, validate_sketch, ConeInstance, Sketch};
use proptest::prelude::*;

fn kleisli() -> Sketch {
    Sketch::new("K", Arc::new(builtin_doctrine("DILL-Kleisli").unwrap()))
}

fn u_instance(a: &str, vertex: &str, witness: &str) -> ConeInstance {
    ConeInstance {
        cone: "U".into(),
        objects: BTreeMap::from([("a".to_string(), a.to_string())]),
        vertex: vertex.into(),
        witnesses: BTreeMap::from([("p0".to_string(), witness.to_string())]),
    }
}

fn names(s: &Sketch) -> BTreeSet<String> {
    s.objects.iter().map(|o| o.name.clone()).collect()
}

fn one_witnessed_one_not() -> Sketch {
    let mut s = kleisli()
        .with_object("A", "a")
        .with_object("UA", "x")
        .with_object("Stray", "x")
        .with_generator("u", &[("A", Pos), ("UA", Neg)])
        .with_generator("f", &[("Stray", Neg), ("A", Pos)]);
    s.extremal.push(u_instance("A", "UA", "u"));
    s
}

#[test]
fn coreflection_drops_exactly_the_unwitnessed_object() -> Result<()> {
    let s = one_witnessed_one_not();
    assert!(validate_sketch(&s).is_valid());
    let before = is_well_sorted(&s)?;
    assert!(!before.well_sorted);
    assert_eq!(before.unwitnessed, vec!["Stray".to_string()]);

    let c = coreflect(&s)?;
    let dropped: Vec<String> = names(&s).difference(&names(&c)).cloned().collect();
    assert_eq!(dropped, vec!["Stray".to_string()]);
    assert!(c.generator("f").is_none());
    assert!(c.generator("u").is_some());
    assert!(is_well_sorted(&c)?.well_sorted);
    assert_eq!(coreflect(&c)?, c);
    Ok(())
}

#[test]
fn unsorted_doctrines_have_no_coreflection() {
    let s = Sketch::new("M", Arc::new(builtin_doctrine("MILL").unwrap())).with_object("A", "a");
    assert!(is_well_sorted(&s).is_err());
    assert!(coreflect(&s).is_err());
}

#[test]
fn malformed_witness_does_not_count() -> Result<()> {
    let mut s = kleisli()
        .with_object("A", "a")
        .with_object("UA", "x")
        .with_generator("wrong", &[("A", Neg), ("UA", Neg)]);
    s.extremal.push(u_instance("A", "UA", "wrong"));
    assert!(validate_sketch(&s).has("InstanceWitness"));
    assert_eq!(is_well_sorted(&s)?.unwitnessed, vec!["UA".to_string()]);
    Ok(())
}

#[test]
fn validation_codes() {
    let s = Sketch::new("M", Arc::new(builtin_doctrine("MILL").unwrap()))
        .with_object("A", "a")
        .with_object("A", "a")
        .with_generator("g", &[("A", Pos), ("A", Pos)])
        .with_generator("h", &[("Q", Pos)])
        .with_generator("h", &[("A", Pos)]);
    let r = validate_sketch(&s);
    for code in [
        "DuplicateObject",
        "GeneratorNotAllowed",
        "UnknownObject",
        "DuplicateGenerator",
    ] {
        assert!(r.has(code), "{code}: {r}");
    }
}

#[test]
fn restriction_is_full_on_kept_objects() {
    let s = one_witnessed_one_not();
    let r = restrict_to(&s, |o| o != "UA");
    assert_eq!(names(&r), BTreeSet::from(["A".to_string(), "Stray".to_string()]));
    assert!(r.extremal.is_empty());
    assert_eq!(r.generators.len(), 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coreflection_keeps_primitive_and_witnessed(
        witnessed in prop::collection::vec(any::<bool>(), 1..5),
        uses in prop::collection::vec((0usize..5, 0usize..5), 0..6),
    ) {
        let mut s = kleisli().with_object("A", "a").with_object("B", "a");
        let derived: Vec<String> = (0..witnessed.len()).map(|k| format!("D{k}")).collect();
        for (k, d) in derived.iter().enumerate() {
            s = s.with_object(d, "x");
            if witnessed[k] {
                let w = format!("w{k}");
                s = s.with_generator(&w, &[("A", Pos), (d, Neg)]);
                s.extremal.push(u_instance("A", d, &w));
            }
        }
        for (n, (d1, d2)) in uses.iter().enumerate() {
            let a = &derived[d1 % derived.len()];
            let b = &derived[d2 % derived.len()];
            s = s.with_generator(&format!("g{n}"), &[(a, Neg), (b, Neg), ("B", Pos)]);
        }
        prop_assert!(validate_sketch(&s).is_valid());

        let expected: BTreeSet<String> = ["A".to_string(), "B".to_string()]
            .into_iter()
            .chain(derived.iter().enumerate().filter(|(k, _)| witnessed[*k]).map(|(_, d)| d.clone()))
            .collect();
        let c = coreflect(&s).unwrap();
        prop_assert_eq!(names(&c), expected.clone());
        for g in &s.generators {
            let survives = g.signature.iter().all(|(o, _)| expected.contains(o));
            prop_assert_eq!(c.generator(&g.name).is_some(), survives);
        }
        prop_assert!(is_well_sorted(&c).unwrap().well_sorted);
        prop_assert_eq!(coreflect(&c).unwrap(), c);
    }
}
