use std::sync::Arc;

use anyhow::Result;
use doctrina::base::Sign::{Neg, Pos};
use doctrina::calculus::check_derivation;
use doctrina::calculus::random::Sampler;
use doctrina::doctrine::{builtin_doctrine, Doctrine};
use doctrina::rewrite::{beta_step, equal, EqVerdict};
use doctrina::sketch::{validate_sketch, Sketch};
use doctrina::translate::{inclusion, pull_sketch, push_sketch, translate_derivation, validate_map, DoctrineMap};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn doctrine(name: &str) -> Arc<Doctrine> {
    Arc::new(builtin_doctrine(name).unwrap())
}

fn mill_to_cllx() -> DoctrineMap {
    inclusion("Into", doctrine("MILL"), doctrine("CLLX"), &[("a", "a")]).unwrap()
}

fn mill_sketch() -> Sketch {
    Sketch::new("M", doctrine("MILL"))
        .with_object("A", "a")
        .with_object("B", "a")
        .with_generator("f", &[("A", Neg), ("B", Pos)])
        .with_generator("m", &[("A", Neg), ("A", Neg), ("B", Pos)])
}

#[test]
fn builtin_inclusions_validate() -> Result<()> {
    let (r, _) = validate_map(&mill_to_cllx());
    assert!(r.is_valid(), "{r}");

    let il = Arc::new(builtin_doctrine("IL")?.restrict("IL-frag", &["Prod", "Terminal", "Arrow"])?);
    let (r, _) = validate_map(&inclusion("IL-DILL", il, doctrine("DILL"), &[("x", "x")])?);
    assert!(r.is_valid(), "{r}");

    let dk = Arc::new(builtin_doctrine("DILL-Kleisli")?.restrict("DK-frag", &["Tensor", "One", "F", "U"])?);
    let (r, sorted) = validate_map(&inclusion(
        "DK-LU",
        dk,
        doctrine("STORAGE"),
        &[("a", "a"), ("x", "xl")],
    )?);
    assert!(r.is_valid(), "{r}");
    assert!(sorted.sorted, "{:?}", sorted.diagnostics);
    Ok(())
}

#[test]
fn mismatched_maps_are_rejected() -> Result<()> {
    // linear onto nonlinear breaks base functoriality
    let bad_sort = inclusion("Bad", doctrine("MILL"), doctrine("CLLX"), &[("a", "x")])?;
    assert!(!validate_map(&bad_sort).0.is_valid());

    // tensor onto par flips the projection signs
    let mut bad_cone = mill_to_cllx();
    bad_cone.cones.get_mut("Tensor").unwrap().target = "Par".into();
    assert!(!validate_map(&bad_cone).0.is_valid());

    // a vertex-changing map is not a doctrine map, so nothing translates
    assert!(push_sketch(&bad_cone, &mill_sketch()).is_err());
    Ok(())
}

#[test]
fn push_then_pull_recovers_the_sketch() -> Result<()> {
    let m = mill_to_cllx();
    let s = mill_sketch();
    let pushed = push_sketch(&m, &s)?;
    assert!(validate_sketch(&pushed).is_valid());
    assert_eq!(pushed.doctrine.name, "CLLX");
    let pulled = pull_sketch(&m, &pushed)?;
    assert_eq!(pulled.objects, s.objects);
    assert_eq!(pulled.generators, s.generators);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn translation_maps_conclusions_entrywise(seed in any::<u64>()) {
        let m = mill_to_cllx();
        let s = mill_sketch();
        let t = push_sketch(&m, &s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (d, concl) = Sampler::new(&s, 1).sample(&mut rng, 12);
        let image = translate_derivation(&m, &s, &d).unwrap();
        let expected: Vec<_> = concl.entries.iter().map(|e| m.map_entry(e).unwrap()).collect();
        prop_assert_eq!(check_derivation(&t, &image).unwrap().entries, expected);
    }

    #[test]
    fn translation_commutes_with_beta(seed in any::<u64>()) {
        let m = mill_to_cllx();
        let s = mill_sketch();
        let t = push_sketch(&m, &s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (d, _) = Sampler::new(&s, 1).sample_redex(&mut rng, 12);
        let stepped = beta_step(&s, &d).expect("sample has a redex");
        let down = translate_derivation(&m, &s, &stepped).unwrap();
        let image = translate_derivation(&m, &s, &d).unwrap();
        let across = beta_step(&t, &image).expect("image keeps the redex");
        prop_assert_eq!(equal(&t, &down, &across).unwrap(), EqVerdict::Equal);
    }
}
