use std::collections::BTreeSet;
use std::sync::Arc;

use anyhow::Result;
use doctrina::base::SortId;
use doctrina::doctrine::builtin_doctrine;
use doctrina::sketch::Sketch;
use doctrina::types::{check_type, enumerate_types, TypeError, TypeExpr, DEFAULT_TYPE_CEILING};
use proptest::prelude::*;

fn sketch(doctrine: &str, objects: &[(&str, &str)]) -> Sketch {
    let mut s = Sketch::new("S", Arc::new(builtin_doctrine(doctrine).unwrap()));
    for (o, sort) in objects {
        s = s.with_object(o, sort);
    }
    s
}

// Counts per sort by the recurrence: generators plus, per cone, the product
// of the argument pools of the previous height.
fn recurrence(s: &Sketch, height: usize) -> Vec<usize> {
    let sorts = s.doctrine.base.sort_ids().count();
    let gens: Vec<usize> = (0..sorts)
        .map(|k| s.objects.iter().filter(|o| o.sort == SortId(k)).count())
        .collect();
    let mut current = gens.clone();
    let mut totals = vec![current.iter().sum()];
    for _ in 0..height {
        let mut next = gens.clone();
        for c in &s.doctrine.cones {
            next[c.vertex_sort.0] += c.reduct.iter().map(|o| current[o.sort.0]).product::<usize>();
        }
        totals.push(next.iter().sum());
        current = next;
    }
    totals
}

// Builds the type strings themselves, independently of the engine.
fn brute_force(s: &Sketch, height: usize) -> BTreeSet<String> {
    let mut layer: Vec<(String, SortId)> = s.objects.iter().map(|o| (o.name.clone(), o.sort)).collect();
    for _ in 0..height {
        let mut next: Vec<(String, SortId)> = s.objects.iter().map(|o| (o.name.clone(), o.sort)).collect();
        for c in &s.doctrine.cones {
            let mut partial: Vec<Vec<String>> = vec![Vec::new()];
            for o in &c.reduct {
                let pool: Vec<&String> = layer.iter().filter(|(_, k)| *k == o.sort).map(|(t, _)| t).collect();
                partial = partial
                    .iter()
                    .flat_map(|p| pool.iter().map(move |t| [p.clone(), vec![(*t).clone()]].concat()))
                    .collect();
            }
            for args in partial {
                next.push((format!("{}[{}]", c.name, args.join(",")), c.vertex_sort));
            }
        }
        layer = next;
    }
    layer.into_iter().map(|(t, _)| t).collect()
}

#[test]
fn mill_over_one_generator_counts_1_4_34() -> Result<()> {
    let s = sketch("MILL", &[("A", "a")]);
    let st = enumerate_types(&s, 2, DEFAULT_TYPE_CEILING)?;
    assert_eq!(st.counts(), vec![1, 4, 34]);
    assert_eq!(recurrence(&s, 2), vec![1, 4, 34]);
    Ok(())
}

#[test]
fn strata_match_the_recurrence_across_doctrines() -> Result<()> {
    let cases: &[(&str, &[(&str, &str)])] = &[
        ("MILL", &[("A", "a"), ("B", "a")]),
        ("MALL", &[("A", "a")]),
        ("DILL", &[("A", "a"), ("X", "x")]),
        ("CBPV", &[("A", "a"), ("X", "x")]),
        ("STORAGE", &[("A", "a")]),
    ];
    for (d, objs) in cases {
        let s = sketch(d, objs);
        let st = enumerate_types(&s, 2, DEFAULT_TYPE_CEILING)?;
        assert_eq!(st.counts(), recurrence(&s, 2), "{d}");
        let printed: BTreeSet<String> = st.strata[2].iter().map(|t| t.to_string()).collect();
        assert_eq!(printed, brute_force(&s, 2), "{d}");
    }
    Ok(())
}

#[test]
fn ceiling_is_a_resource_limit() {
    let s = sketch("MALL", &[("A", "a"), ("B", "a")]);
    assert!(matches!(
        enumerate_types(&s, 3, 1_000),
        Err(TypeError::ResourceLimit(1_000))
    ));
}

#[test]
fn ill_formed_types_are_rejected() {
    let s = sketch("DILL", &[("A", "a"), ("X", "x")]);
    let a = TypeExpr::gen("A");
    let x = TypeExpr::gen("X");
    assert_eq!(check_type(&s, &TypeExpr::comp("F", vec![x.clone()])), Ok(SortId(1)));
    assert!(matches!(
        check_type(&s, &TypeExpr::comp("F", vec![a.clone()])),
        Err(TypeError::SortMismatch { .. })
    ));
    assert!(matches!(
        check_type(&s, &TypeExpr::comp("Tensor", vec![a.clone()])),
        Err(TypeError::ArityMismatch { .. })
    ));
    assert!(matches!(
        check_type(&s, &TypeExpr::comp("Par", vec![a.clone(), a])),
        Err(TypeError::UnknownCone(_))
    ));
    assert!(matches!(
        check_type(&s, &TypeExpr::gen("Q")),
        Err(TypeError::UnknownObject(_))
    ));
}

#[test]
fn display_is_compact() {
    let t = TypeExpr::comp("Tensor", vec![TypeExpr::gen("A"), TypeExpr::comp("One", vec![])]);
    assert_eq!(t.to_string(), "Tensor[A,One[]]");
    assert_eq!(t.height(), 2);
    assert_eq!(t.size(), 3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn strata_are_nested_well_formed_and_height_bounded(
        which in 0usize..4,
        extra in any::<bool>(),
    ) {
        let d = ["MILL", "IL", "DILL", "ECBV"][which];
        let mut objs: Vec<(&str, &str)> = vec![("A", if d == "IL" { "x" } else { "a" })];
        if extra && d != "IL" && d != "MILL" {
            objs.push(("X", "x"));
        }
        let s = sketch(d, &objs);
        let st = enumerate_types(&s, 2, DEFAULT_TYPE_CEILING).unwrap();
        for n in 0..st.strata.len() {
            for t in &st.strata[n] {
                prop_assert!(t.height() <= n);
                prop_assert!(check_type(&s, t).is_ok());
            }
            if n > 0 {
                let below: BTreeSet<&TypeExpr> = st.strata[n - 1].iter().collect();
                let here: BTreeSet<&TypeExpr> = st.strata[n].iter().collect();
                prop_assert!(below.is_subset(&here));
            }
        }
    }
}
