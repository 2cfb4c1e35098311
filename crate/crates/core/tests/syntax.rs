use std::collections::BTreeMap;
use std::sync::Arc;

use anyhow::Result;
use doctrina::base::Sign::{Neg, Pos};
use doctrina::calculus::random::Sampler;
use doctrina::doctrine::builtin_doctrine;
use doctrina::sketch::Sketch;
use doctrina::syntax::ast::{ItemKind, SeqAst};
use doctrina::syntax::{parse, parse_sequent, parse_term, parse_type, print_file, print_sequent, print_term, Span};
use doctrina::types::TypeExpr;
use doctrina::workspace::{elaborate_term, term_of};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn type_expr() -> impl Strategy<Value = TypeExpr> {
    let leaf = prop_oneof![Just("A"), Just("B"), Just("X")].prop_map(TypeExpr::gen);
    leaf.prop_recursive(3, 16, 3, |inner| {
        (
            prop_oneof![Just("Tensor"), Just("F"), Just("One"), Just("Lolli")],
            prop::collection::vec(inner, 0..3),
        )
            .prop_map(|(c, args)| TypeExpr::comp(c, args))
    })
}

#[test]
fn unclosed_brace_points_at_the_opener() {
    let src = "use doctrine MILL;\nsketch S over MILL {\n  obj A : a;\n";
    let e = parse(src).unwrap_err();
    assert_eq!(e.span, Span { line: 2, col: 20 });
    assert!(e.message.contains("unclosed"), "{e}");
}

#[test]
fn stray_closer_points_at_itself() {
    let e = parse("sketch S over MILL {\n}\n}\n").unwrap_err();
    assert_eq!(e.span, Span { line: 3, col: 1 });
    let e = parse("proof p in S : |- A+ = cut[0,0](id A; id A];").unwrap_err();
    assert_eq!(e.span, Span { line: 1, col: 43 });
}

#[test]
fn lexer_details() -> Result<()> {
    let f = parse("use doctrine DILL-Kleisli; // trailing\n")?;
    assert!(matches!(&f.items[0].kind, ItemKind::UseDoctrine(d) if d == "DILL-Kleisli"));
    assert_eq!(parse_sequent("|- A-, B+")?, parse_sequent("⊢ A-, B+")?);
    assert!(parse("sketch S over MILL { obj A : a; } @").is_err());
    Ok(())
}

#[test]
fn sequent_forms() -> Result<()> {
    let split = parse_sequent("X | A, B |- C")?;
    let SeqAst::Split(sp) = &split else {
        panic!("expected split form")
    };
    assert_eq!((sp.theta.len(), sp.gamma.len(), sp.delta.len()), (1, 2, 1));
    assert!(sp.upsilon.is_none());
    assert_eq!(print_sequent(&split), "X | A, B |- C");
    let double = parse_sequent(". | A |- . | B")?;
    assert_eq!(print_sequent(&double), ". | A |- . | B");
    assert_eq!(print_sequent(&parse_sequent("|-")?), "|-");
    Ok(())
}

#[test]
fn file_printing_is_a_fixed_point() -> Result<()> {
    let src = "base b { sort a : lin; hom { pos = exact(a); neg = { a: many } } }\n\
               doctrine D on b { cone T { obj l : a; obj r : a; vertex a +; proj p0 (l-, r-); } }\n\
               doctrine E restricts D { keep T; }\n\
               sketch S over D { obj A : a; gen f : (A-, A+); eq e : gen f = gen f; }\n\
               map M : D -> E { sort a -> a; cone T -> T { l -> l, r -> r; p0 -> p0 } }\n\
               goal g in S : . | A |- A;\n\
               proof p in S : |- A-, A+ = map{1,0 : A+, A-}(map{1,0}(gen f));\n\
               expect p equal p;\nexpect p rejects TypeError;\nbudget { depth = 3; fuel = 10; }\n";
    let once = print_file(&parse(src)?);
    assert_eq!(print_file(&parse(&once)?), once);
    assert_eq!(parse(&once)?.items.len(), parse(src)?.items.len());
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn types_round_trip(t in type_expr()) {
        prop_assert_eq!(parse_type(&t.to_string()).unwrap(), t);
    }

    #[test]
    fn terms_round_trip(seed in any::<u64>(), which in 0usize..3) {
        let d = ["MILL", "DILL", "CLLX"][which];
        let mut s = Sketch::new("S", Arc::new(builtin_doctrine(d).unwrap())).with_object("A", "a");
        if d == "MILL" {
            s = s.with_generator("f", &[("A", Neg), ("A", Pos)]);
        } else {
            s = s.with_object("X", "x").with_generator("f", &[("X", Neg), ("A", Neg), ("A", Pos)]);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (der, _) = Sampler::new(&s, 1).sample(&mut rng, 10);
        let ast = term_of(&der);
        let printed = print_term(&ast);
        let reparsed = parse_term(&printed).unwrap();
        prop_assert_eq!(&reparsed, &ast);
        prop_assert_eq!(elaborate_term(&s, &reparsed, &BTreeMap::new()).unwrap(), der);
    }
}
