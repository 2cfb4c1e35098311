use anyhow::Result;
use doctrina::base::{builtin_base, BaseTheory, Sign, SignedSort, SortId, StructuralMap, BUILTIN_BASES};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn base(name: &str) -> BaseTheory {
    builtin_base(name).expect("builtin base")
}

fn sign(pos: bool) -> Sign {
    if pos {
        Sign::Pos
    } else {
        Sign::Neg
    }
}

fn list(raw: &[(usize, bool)], sorts: usize) -> Vec<SignedSort> {
    raw.iter()
        .map(|&(s, p)| SignedSort::new(SortId(s % sorts), sign(p)))
        .collect()
}

// Straight from the definition: one positive nonlinear entry at most, and
// then nothing linear anywhere.
fn admissible_oracle(b: &BaseTheory, l: &[SignedSort]) -> bool {
    let nonlinear_outputs = l
        .iter()
        .filter(|e| e.sign == Sign::Pos && b.is_nonlinear(e.sort))
        .count();
    match nonlinear_outputs {
        0 => true,
        1 => l.iter().all(|e| b.is_nonlinear(e.sort)),
        _ => false,
    }
}

fn count(l: &[SignedSort], sort: usize, s: Sign) -> usize {
    l.iter().filter(|e| e.sort == SortId(sort) && e.sign == s).count()
}

// Hand-written readings of a few tables.
fn inhabited_oracle(name: &str, l: &[SignedSort]) -> Option<bool> {
    let (p0, n0) = (count(l, 0, Sign::Pos), count(l, 0, Sign::Neg));
    let (p1, n1) = (count(l, 1, Sign::Pos), count(l, 1, Sign::Neg));
    Some(match name {
        "cat" => p0 == 1 && n0 == 1,
        "symmulti" | "cartmulti" => p0 == 1,
        "sympoly" => true,
        // 0 = x, 1 = a
        "lnlmulti" => (p0 == 1 && p1 == 0 && n1 == 0) || (p0 == 0 && p1 == 1),
        "cbpv" => (p0 == 1 && p1 == 0 && n1 == 0) || (p0 == 0 && p1 == 1 && n1 <= 1),
        "ecbv" => (p0 == 1 && p1 == 0 && n1 == 0) || (p0 == 0 && p1 == 1 && n1 == 1),
        // 0 = a, 1 = x
        "lnlpoly" => (p1 == 0) || (p1 == 1 && p0 == 0 && n0 == 0),
        _ => return None,
    })
}

fn all_lists(sorts: usize, max_len: usize) -> Vec<Vec<SignedSort>> {
    let atoms: Vec<SignedSort> = (0..sorts)
        .flat_map(|s| {
            [
                SignedSort::new(SortId(s), Sign::Neg),
                SignedSort::new(SortId(s), Sign::Pos),
            ]
        })
        .collect();
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for l in &layer {
            for a in &atoms {
                let mut m: Vec<SignedSort> = l.clone();
                m.push(*a);
                next.push(m);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

#[test]
fn every_builtin_loads() {
    for name in BUILTIN_BASES {
        assert!(builtin_base(name).is_some(), "{name}");
    }
    assert!(builtin_base("nosuch").is_none());
}

#[test]
fn cuts_of_short_lists_stay_inhabited() -> Result<()> {
    // Exhaustive over lists of length at most three.
    for name in BUILTIN_BASES {
        let b = base(name);
        let n = b.sort_ids().count();
        let inhabited: Vec<Vec<SignedSort>> = all_lists(n, 3).into_iter().filter(|l| b.allows(l)).collect();
        for l in &inhabited {
            for r in &inhabited {
                for i in 0..l.len() {
                    for j in 0..r.len() {
                        if l[i].sort != r[j].sort || l[i].sign == r[j].sign {
                            continue;
                        }
                        let out = b.cut_shape(l, i, r, j)?;
                        assert!(b.allows(&out), "{name}: {} ; {} at {i},{j}", b.show(l), b.show(r));
                    }
                }
            }
        }
    }
    Ok(())
}

#[test]
fn sampled_closure_holds() -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for name in BUILTIN_BASES {
        base(name).check_closure(&mut rng, 2_000)?;
    }
    Ok(())
}

#[test]
fn inhabited_rejects_inadmissible_lists() {
    let b = base("lnlpoly");
    let bad = [
        SignedSort::new(SortId(1), Sign::Pos),
        SignedSort::new(SortId(0), Sign::Neg),
    ];
    assert!(b.inhabited(&bad).is_err());
    assert!(!b.allows(&bad));
}

#[test]
fn structural_map_errors() {
    let b = base("cartmulti");
    let src = [SignedSort::new(SortId(0), Sign::Neg)];
    assert!(b
        .validate_structural_map(&src, &StructuralMap::new(2, vec![0]))
        .is_err());
    assert!(b
        .validate_structural_map(&src, &StructuralMap::new(1, vec![3]))
        .is_err());
}

proptest! {
    #[test]
    fn admissibility_matches_definition(
        which in 0..BUILTIN_BASES.len(),
        raw in prop::collection::vec((0usize..3, any::<bool>()), 0..6),
    ) {
        let b = base(BUILTIN_BASES[which]);
        let l = list(&raw, b.sort_ids().count());
        prop_assert_eq!(b.admissible(&l), admissible_oracle(&b, &l));
    }

    #[test]
    fn inhabitation_matches_tables(
        which in 0..BUILTIN_BASES.len(),
        raw in prop::collection::vec((0usize..3, any::<bool>()), 0..6),
    ) {
        let name = BUILTIN_BASES[which];
        let b = base(name);
        let l = list(&raw, b.sort_ids().count());
        if let Some(expected) = inhabited_oracle(name, &l) {
            prop_assert_eq!(b.allows(&l), expected && admissible_oracle(&b, &l));
        }
    }

    #[test]
    fn structural_validity_matches_definition(
        which in 0..BUILTIN_BASES.len(),
        raw in prop::collection::vec((0usize..3, any::<bool>()), 1..5),
        picks in prop::collection::vec(0usize..8, 0..6),
    ) {
        let b = base(BUILTIN_BASES[which]);
        let src = list(&raw, b.sort_ids().count());
        let index: Vec<usize> = picks.iter().map(|p| p % src.len()).collect();
        let map = StructuralMap::new(src.len(), index.clone());
        let check = b.validate_structural_map(&src, &map).unwrap();
        let expected = (0..src.len()).all(|k| {
            let uses = index.iter().filter(|&&i| i == k).count();
            uses == 1 || (src[k].sign == Sign::Neg && b.is_nonlinear(src[k].sort))
        });
        prop_assert_eq!(check.valid, expected);
        let target: Vec<SignedSort> = index.iter().map(|&i| src[i]).collect();
        prop_assert_eq!(check.target, target);
    }

    #[test]
    fn cut_removes_exactly_the_cut_pair(
        which in 0..BUILTIN_BASES.len(),
        seed in any::<u64>(),
    ) {
        let b = base(BUILTIN_BASES[which]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if let (Some(l), Some(r)) = (b.sample_inhabited(&mut rng, 3), b.sample_inhabited(&mut rng, 3)) {
            for i in 0..l.len() {
                for j in 0..r.len() {
                    if l[i].sort != r[j].sort || l[i].sign == r[j].sign {
                        continue;
                    }
                    let out = b.cut_shape(&l, i, &r, j).unwrap();
                    let mut expected = l.clone();
                    expected.remove(i);
                    let mut rest = r.clone();
                    rest.remove(j);
                    expected.extend(rest);
                    prop_assert_eq!(out, expected);
                }
            }
        }
    }

    #[test]
    fn map_composition_reindexes(
        inner in prop::collection::vec(0usize..4, 0..5),
        outer in prop::collection::vec(0usize..5, 4..5),
    ) {
        let first = StructuralMap::new(4, inner.clone());
        let second = StructuralMap::new(5, outer.clone());
        let both = first.then(&second);
        prop_assert_eq!(both.source_len, 5);
        for (k, &i) in inner.iter().enumerate() {
            prop_assert_eq!(both.index[k], outer[i]);
        }
    }
}
