use std::sync::Arc;

use anyhow::Result;
use doctrina::base::{Sign, StructuralMap};
use doctrina::calculus::random::Sampler;
use doctrina::calculus::{check_derivation, Derivation, Entry};
use doctrina::doctrine::builtin_doctrine;
use doctrina::rewrite::{beta_step, canonical_key, equal, normalize, reduce, EqVerdict, Strategy};
use doctrina::sketch::{Equation, Sketch};
use doctrina::types::TypeExpr;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn g(n: &str) -> TypeExpr {
    TypeExpr::gen(n)
}

fn il() -> Sketch {
    Sketch::new("S", Arc::new(builtin_doctrine("IL").unwrap()))
        .with_object("X", "x")
        .with_object("Y", "x")
}

fn mill() -> Sketch {
    Sketch::new("M", Arc::new(builtin_doctrine("MILL").unwrap()))
        .with_object("A", "a")
        .with_object("B", "a")
        .with_generator("f", &[("A", Sign::Neg), ("B", Sign::Pos)])
        .with_generator("h", &[("A", Sign::Neg), ("B", Sign::Pos)])
}

fn prod() -> TypeExpr {
    TypeExpr::comp("Prod", vec![g("X"), g("Y")])
}

/// `|- X-, Y-, X+` from the identity on X.
fn weakened_id() -> Derivation {
    Derivation::structural(
        vec![Entry::neg(g("X")), Entry::neg(g("Y")), Entry::pos(g("X"))],
        StructuralMap::new(3, vec![0, 2]),
        Derivation::Id(g("X")),
    )
}

#[test]
fn identity_cut_disappears() -> Result<()> {
    let s = mill();
    let d = Derivation::cut(Derivation::Id(g("A")), 1, Derivation::Gen("f".into()), 0);
    assert_eq!(normalize(&s, &d)?, Derivation::Gen("f".into()));
    assert_eq!(equal(&s, &d, &Derivation::Gen("f".into()))?, EqVerdict::Equal);
    Ok(())
}

#[test]
fn distinct_generators_differ() -> Result<()> {
    let s = mill();
    let verdict = equal(&s, &Derivation::Gen("f".into()), &Derivation::Gen("h".into()))?;
    assert_eq!(verdict, EqVerdict::NotEqual);
    Ok(())
}

#[test]
fn projection_after_pairing_is_weakening() -> Result<()> {
    let s = il();
    // Inv Prod over the weakened identity: |- (X*Y)-, X+
    let pi1 = Derivation::Inv {
        cone: "Prod".into(),
        args: vec![g("X"), g("Y")],
        sides: vec![Entry::pos(g("X"))],
        premises: vec![("p0".into(), weakened_id())],
    };
    let pair = Derivation::non_inv("Prod", vec![g("X"), g("Y")], "p0");
    let composite = Derivation::cut(pair, 2, pi1, 0);
    assert_eq!(
        check_derivation(&s, &composite)?.entries,
        vec![Entry::neg(g("X")), Entry::neg(g("Y")), Entry::pos(g("X"))]
    );
    assert_eq!(equal(&s, &composite, &weakened_id())?, EqVerdict::Equal);
    assert_eq!(normalize(&s, &composite)?, weakened_id());
    Ok(())
}

#[test]
fn identity_on_product_is_eta_expansion() -> Result<()> {
    let s = il();
    let expanded = Derivation::Inv {
        cone: "Prod".into(),
        args: vec![g("X"), g("Y")],
        sides: vec![Entry::pos(prod())],
        premises: vec![("p0".into(), Derivation::non_inv("Prod", vec![g("X"), g("Y")], "p0"))],
    };
    assert_eq!(equal(&s, &Derivation::Id(prod()), &expanded)?, EqVerdict::Equal);
    Ok(())
}

#[test]
fn sketch_equation_identifies_generators() -> Result<()> {
    let mut s = mill();
    s.equations.push(Equation {
        name: "fh".into(),
        lhs: Derivation::Gen("f".into()),
        rhs: Derivation::Gen("h".into()),
    });
    let ctx = Derivation::cut(Derivation::Gen("f".into()), 1, Derivation::Id(g("B")), 0);
    assert_eq!(equal(&s, &ctx, &Derivation::Gen("h".into()))?, EqVerdict::Equal);
    Ok(())
}

fn sampled(doctrine: &str, seed: u64) -> (Sketch, Derivation) {
    let s = match doctrine {
        "IL" => il().with_generator("k", &[("X", Sign::Neg), ("Y", Sign::Pos)]),
        _ => mill(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = Sampler::new(&s, 1).sample_redex(&mut rng, 12).0;
    (s, d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalize_keeps_conclusion_and_is_idempotent(seed in any::<u64>(), il_side in any::<bool>()) {
        let (s, d) = sampled(if il_side { "IL" } else { "MILL" }, seed);
        let c = check_derivation(&s, &d).unwrap();
        let n = normalize(&s, &d).unwrap();
        prop_assert_eq!(check_derivation(&s, &n).unwrap(), c);
        prop_assert_eq!(normalize(&s, &n).unwrap(), n.clone());
        prop_assert_eq!(canonical_key(&s, &d).unwrap(), canonical_key(&s, &n).unwrap());
    }

    #[test]
    fn beta_step_preserves_equality(seed in any::<u64>(), il_side in any::<bool>()) {
        let (s, d) = sampled(if il_side { "IL" } else { "MILL" }, seed);
        if let Some(n) = beta_step(&s, &d) {
            prop_assert_eq!(check_derivation(&s, &n).unwrap(), check_derivation(&s, &d).unwrap());
            prop_assert_eq!(equal(&s, &d, &n).unwrap(), EqVerdict::Equal);
        }
    }

    #[test]
    fn strategies_agree(seed in any::<u64>(), il_side in any::<bool>()) {
        let (s, d) = sampled(if il_side { "IL" } else { "MILL" }, seed);
        let lo = reduce(&s, &d, Strategy::LeftmostOutermost, 64).unwrap();
        let inner = reduce(&s, &d, Strategy::Innermost, 64).unwrap();
        prop_assert_eq!(equal(&s, &lo, &inner).unwrap(), EqVerdict::Equal);
    }
}
