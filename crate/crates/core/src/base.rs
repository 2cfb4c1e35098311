//! Base mode theories: sorts, signs, admissible lists, structural maps and
//! hom-inhabitation tables.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Linearity {
    Linear,
    Nonlinear,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Sign {
    Neg,
    Pos,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Pos => '+',
            Sign::Neg => '-',
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Index of a sort inside its [`BaseTheory`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SortId(pub usize);

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BaseSort {
    pub name: String,
    pub linearity: Linearity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignedSort {
    pub sort: SortId,
    pub sign: Sign,
}

impl SignedSort {
    pub fn new(sort: SortId, sign: Sign) -> Self {
        SignedSort { sort, sign }
    }

    pub fn flipped(self) -> Self {
        SignedSort {
            sort: self.sort,
            sign: self.sign.flip(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Positives {
    Exact(Vec<SortId>),
    ExactlyOneOf(BTreeSet<SortId>),
    AnyOver(BTreeSet<SortId>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bound {
    Zero,
    ExactlyOne,
    AtMostOne,
    Unbounded,
}

impl Bound {
    pub fn admits(self, count: usize) -> bool {
        match self {
            Bound::Zero => count == 0,
            Bound::ExactlyOne => count == 1,
            Bound::AtMostOne => count <= 1,
            Bound::Unbounded => true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InhabitClause {
    pub positives: Positives,
    /// Sorts missing from the map are bounded by [`Bound::Zero`].
    pub negatives: BTreeMap<SortId, Bound>,
}

impl InhabitClause {
    fn mentioned_sorts(&self) -> Vec<SortId> {
        let mut out: Vec<SortId> = match &self.positives {
            Positives::Exact(v) => v.clone(),
            Positives::ExactlyOneOf(s) | Positives::AnyOver(s) => s.iter().copied().collect(),
        };
        out.extend(self.negatives.keys().copied());
        out
    }

    fn matches(&self, pos: &BTreeMap<SortId, usize>, neg: &BTreeMap<SortId, usize>) -> bool {
        let pos_ok = match &self.positives {
            Positives::Exact(want) => {
                let mut counts: BTreeMap<SortId, usize> = BTreeMap::new();
                for s in want {
                    *counts.entry(*s).or_default() += 1;
                }
                counts == *pos
            }
            Positives::ExactlyOneOf(set) => pos.values().sum::<usize>() == 1 && pos.keys().all(|s| set.contains(s)),
            Positives::AnyOver(set) => pos.keys().all(|s| set.contains(s)),
        };
        if !pos_ok {
            return false;
        }
        for (s, n) in neg {
            let bound = self.negatives.get(s).copied().unwrap_or(Bound::Zero);
            if !bound.admits(*n) {
                return false;
            }
        }
        self.negatives.iter().all(|(s, b)| neg.contains_key(s) || b.admits(0))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BaseError {
    #[error("inadmissible list")]
    InadmissibleList,
    #[error("structural map source length {expected} does not match list length {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("structural map index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("cut entries have the same sign")]
    SignMismatch,
    #[error("cut entries have different sorts")]
    SortMismatch,
    #[error("cut index out of range")]
    CutIndex,
    #[error("duplicate sort name `{0}`")]
    DuplicateSort(String),
    #[error("clause mentions an unknown sort index {0}")]
    UnknownSort(usize),
    #[error("closure violation: {0}")]
    Closure(String),
}

/// An index map `σ` from target positions to source positions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StructuralMap {
    pub source_len: usize,
    pub index: Vec<usize>,
}

impl StructuralMap {
    pub fn new(source_len: usize, index: Vec<usize>) -> Self {
        StructuralMap { source_len, index }
    }

    pub fn identity(n: usize) -> Self {
        StructuralMap {
            source_len: n,
            index: (0..n).collect(),
        }
    }

    pub fn target_len(&self) -> usize {
        self.index.len()
    }

    pub fn is_identity(&self) -> bool {
        self.source_len == self.index.len() && self.index.iter().enumerate().all(|(k, &i)| k == i)
    }

    pub fn preimage_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.source_len];
        for &i in &self.index {
            if i < self.source_len {
                counts[i] += 1;
            }
        }
        counts
    }

    /// `outer ∘ self`: first apply `self`, then re-index its source through `outer`.
    pub fn then(&self, outer: &StructuralMap) -> StructuralMap {
        StructuralMap {
            source_len: outer.source_len,
            index: self.index.iter().map(|&i| outer.index[i]).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseTheory {
    pub name: String,
    pub sorts: Vec<BaseSort>,
    pub clauses: Vec<InhabitClause>,
}

impl BaseTheory {
    pub fn new(name: impl Into<String>, sorts: Vec<BaseSort>, clauses: Vec<InhabitClause>) -> Result<Self, BaseError> {
        let mut seen = BTreeSet::new();
        for s in &sorts {
            if !seen.insert(s.name.clone()) {
                return Err(BaseError::DuplicateSort(s.name.clone()));
            }
        }
        for c in &clauses {
            for s in c.mentioned_sorts() {
                if s.0 >= sorts.len() {
                    return Err(BaseError::UnknownSort(s.0));
                }
            }
        }
        Ok(BaseTheory {
            name: name.into(),
            sorts,
            clauses,
        })
    }

    pub fn sort(&self, id: SortId) -> &BaseSort {
        &self.sorts[id.0]
    }

    pub fn sort_ids(&self) -> impl Iterator<Item = SortId> + '_ {
        (0..self.sorts.len()).map(SortId)
    }

    pub fn linearity(&self, id: SortId) -> Linearity {
        self.sorts[id.0].linearity
    }

    pub fn is_nonlinear(&self, id: SortId) -> bool {
        self.linearity(id) == Linearity::Nonlinear
    }

    /// Looks a sort up by name; `lin` and `nonlin` resolve to the unique sort
    /// of that linearity when there is exactly one.
    pub fn sort_by_name(&self, name: &str) -> Option<SortId> {
        if let Some(i) = self.sorts.iter().position(|s| s.name == name) {
            return Some(SortId(i));
        }
        let want = match name {
            "lin" => Linearity::Linear,
            "nonlin" => Linearity::Nonlinear,
            _ => return None,
        };
        let mut found = self.sort_ids().filter(|&s| self.linearity(s) == want);
        let first = found.next()?;
        if found.next().is_some() {
            None
        } else {
            Some(first)
        }
    }

    pub fn sort_name(&self, id: SortId) -> &str {
        &self.sorts[id.0].name
    }

    pub fn admissible(&self, entries: &[SignedSort]) -> bool {
        let pos_nonlinear = entries
            .iter()
            .filter(|e| e.sign == Sign::Pos && self.is_nonlinear(e.sort))
            .count();
        if pos_nonlinear > 1 {
            return false;
        }
        if pos_nonlinear == 1 {
            return entries.iter().all(|e| self.is_nonlinear(e.sort));
        }
        true
    }

    pub fn inhabited(&self, entries: &[SignedSort]) -> Result<bool, BaseError> {
        if !self.admissible(entries) {
            return Err(BaseError::InadmissibleList);
        }
        let mut pos: BTreeMap<SortId, usize> = BTreeMap::new();
        let mut neg: BTreeMap<SortId, usize> = BTreeMap::new();
        for e in entries {
            let table = if e.sign == Sign::Pos { &mut pos } else { &mut neg };
            *table.entry(e.sort).or_default() += 1;
        }
        Ok(self.clauses.iter().any(|c| c.matches(&pos, &neg)))
    }

    /// Admissible and inhabited.
    pub fn allows(&self, entries: &[SignedSort]) -> bool {
        self.inhabited(entries).unwrap_or(false)
    }

    /// Checks `σ` against the source list `Φ` and returns the induced target list.
    pub fn validate_structural_map(
        &self,
        source: &[SignedSort],
        map: &StructuralMap,
    ) -> Result<StructuralCheck, BaseError> {
        if map.source_len != source.len() {
            return Err(BaseError::LengthMismatch {
                expected: map.source_len,
                found: source.len(),
            });
        }
        if let Some(&bad) = map.index.iter().find(|&&i| i >= source.len()) {
            return Err(BaseError::IndexOutOfRange(bad));
        }
        let counts = map.preimage_counts();
        let valid = counts
            .iter()
            .enumerate()
            .all(|(i, &c)| c == 1 || (source[i].sign == Sign::Neg && self.is_nonlinear(source[i].sort)));
        let target = map.index.iter().map(|&i| source[i]).collect();
        Ok(StructuralCheck { valid, target })
    }

    pub fn cut_shape(
        &self,
        left: &[SignedSort],
        i: usize,
        right: &[SignedSort],
        j: usize,
    ) -> Result<Vec<SignedSort>, BaseError> {
        if i >= left.len() || j >= right.len() {
            return Err(BaseError::CutIndex);
        }
        if !self.admissible(left) || !self.admissible(right) {
            return Err(BaseError::InadmissibleList);
        }
        if left[i].sort != right[j].sort {
            return Err(BaseError::SortMismatch);
        }
        if left[i].sign == right[j].sign {
            return Err(BaseError::SignMismatch);
        }
        let mut out: Vec<SignedSort> = Vec::with_capacity(left.len() + right.len() - 2);
        out.extend(left.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, e)| *e));
        out.extend(right.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, e)| *e));
        debug_assert!(self.admissible(&out));
        Ok(out)
    }

    /// Draws an inhabited list by instantiating a random clause.
    pub fn sample_inhabited<R: Rng>(&self, rng: &mut R, spread: usize) -> Option<Vec<SignedSort>> {
        if self.clauses.is_empty() {
            return None;
        }
        for _ in 0..64 {
            let clause = &self.clauses[rng.gen_range(0..self.clauses.len())];
            let mut out = Vec::new();
            match &clause.positives {
                Positives::Exact(v) => out.extend(v.iter().map(|&s| SignedSort::new(s, Sign::Pos))),
                Positives::ExactlyOneOf(set) => {
                    let v: Vec<_> = set.iter().copied().collect();
                    if v.is_empty() {
                        continue;
                    }
                    out.push(SignedSort::new(v[rng.gen_range(0..v.len())], Sign::Pos));
                }
                Positives::AnyOver(set) => {
                    let v: Vec<_> = set.iter().copied().collect();
                    if !v.is_empty() {
                        for _ in 0..rng.gen_range(0..=spread) {
                            out.push(SignedSort::new(v[rng.gen_range(0..v.len())], Sign::Pos));
                        }
                    }
                }
            }
            for (&s, &b) in &clause.negatives {
                let n = match b {
                    Bound::Zero => 0,
                    Bound::ExactlyOne => 1,
                    Bound::AtMostOne => rng.gen_range(0..=1),
                    Bound::Unbounded => rng.gen_range(0..=spread),
                };
                for _ in 0..n {
                    out.push(SignedSort::new(s, Sign::Neg));
                }
            }
            out.shuffle(rng);
            if self.allows(&out) {
                return Some(out);
            }
        }
        None
    }

    /// Randomized check that inhabitation is closed under structural action and
    /// cut-shape composition.
    pub fn check_closure<R: Rng>(&self, rng: &mut R, trials: usize) -> Result<(), BaseError> {
        let neg_nonlinear: Vec<SortId> = self.sort_ids().filter(|&s| self.is_nonlinear(s)).collect();
        for _ in 0..trials {
            let Some(target) = self.sample_inhabited(rng, 3) else {
                return Ok(());
            };
            let (source, map) = random_structural_preimage(self, &target, &neg_nonlinear, rng);
            let check = self.validate_structural_map(&source, &map)?;
            if !check.valid || check.target != target {
                return Err(BaseError::Closure("generated structural map is invalid".into()));
            }
            if !self.allows(&source) {
                return Err(BaseError::Closure(format!(
                    "{} inhabited but its structural source {} is not",
                    self.show(&target),
                    self.show(&source)
                )));
            }
            let (Some(left), Some(right)) = (self.sample_inhabited(rng, 3), self.sample_inhabited(rng, 3)) else {
                continue;
            };
            let pairs: Vec<(usize, usize)> = (0..left.len())
                .flat_map(|i| (0..right.len()).map(move |j| (i, j)))
                .filter(|&(i, j)| left[i].sort == right[j].sort && left[i].sign != right[j].sign)
                .collect();
            if let Some(&(i, j)) = pairs.choose(rng) {
                let out = self.cut_shape(&left, i, &right, j)?;
                if !self.allows(&out) {
                    return Err(BaseError::Closure(format!(
                        "cut of {} and {} gives uninhabited {}",
                        self.show(&left),
                        self.show(&right),
                        self.show(&out)
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn show(&self, entries: &[SignedSort]) -> String {
        let parts: Vec<String> = entries
            .iter()
            .map(|e| format!("{}{}", self.sort_name(e.sort), e.sign))
            .collect();
        format!("({})", parts.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructuralCheck {
    pub valid: bool,
    pub target: Vec<SignedSort>,
}

/// Builds a source list and map whose induced target is `target`, using random
/// exchange, contraction of negative nonlinear entries and weakening.
pub fn random_structural_preimage<R: Rng>(
    base: &BaseTheory,
    target: &[SignedSort],
    weakenable: &[SortId],
    rng: &mut R,
) -> (Vec<SignedSort>, StructuralMap) {
    let mut source: Vec<SignedSort> = Vec::new();
    let mut index = vec![0; target.len()];
    for (k, e) in target.iter().enumerate() {
        let shareable = e.sign == Sign::Neg && base.is_nonlinear(e.sort);
        let reuse = if shareable {
            source.iter().position(|s| s == e).filter(|_| rng.gen_bool(0.5))
        } else {
            None
        };
        index[k] = match reuse {
            Some(i) => i,
            None => {
                source.push(*e);
                source.len() - 1
            }
        };
    }
    if !weakenable.is_empty() {
        for _ in 0..rng.gen_range(0..=2) {
            source.push(SignedSort::new(
                weakenable[rng.gen_range(0..weakenable.len())],
                Sign::Neg,
            ));
        }
    }
    let mut perm: Vec<usize> = (0..source.len()).collect();
    perm.shuffle(rng);
    let mut placed = vec![SignedSort::new(SortId(0), Sign::Neg); source.len()];
    let mut inverse = vec![0; source.len()];
    for (old, &new) in perm.iter().enumerate() {
        placed[new] = source[old];
        inverse[old] = new;
    }
    let index = index.into_iter().map(|i| inverse[i]).collect();
    let len = placed.len();
    (placed, StructuralMap::new(len, index))
}

fn lin(name: &str) -> BaseSort {
    BaseSort {
        name: name.into(),
        linearity: Linearity::Linear,
    }
}

fn nonlin(name: &str) -> BaseSort {
    BaseSort {
        name: name.into(),
        linearity: Linearity::Nonlinear,
    }
}

fn clause(positives: Positives, negatives: &[(usize, Bound)]) -> InhabitClause {
    InhabitClause {
        positives,
        negatives: negatives.iter().map(|&(s, b)| (SortId(s), b)).collect(),
    }
}

fn exact(sorts: &[usize]) -> Positives {
    Positives::Exact(sorts.iter().map(|&s| SortId(s)).collect())
}

fn any_over(sorts: &[usize]) -> Positives {
    Positives::AnyOver(sorts.iter().map(|&s| SortId(s)).collect())
}

pub const BUILTIN_BASES: &[&str] = &[
    "lnlpoly",
    "sympoly",
    "symmulti",
    "cat",
    "cartmulti",
    "lnlmulti",
    "cbpv",
    "ecbv",
    "dblsplit",
    "linpol",
    "smadj",
    "lnlpol",
    "symskew",
];

/// The fixed subterminal tables shipped with the engine.
pub fn builtin_base(name: &str) -> Option<BaseTheory> {
    use Bound::*;
    let (sorts, clauses) = match name {
        // 0 = a (linear), 1 = x (nonlinear)
        "lnlpoly" => (
            vec![lin("a"), nonlin("x")],
            vec![
                clause(any_over(&[0]), &[(0, Unbounded), (1, Unbounded)]),
                clause(exact(&[1]), &[(1, Unbounded)]),
            ],
        ),
        "sympoly" => (vec![lin("a")], vec![clause(any_over(&[0]), &[(0, Unbounded)])]),
        "symmulti" => (vec![lin("a")], vec![clause(exact(&[0]), &[(0, Unbounded)])]),
        "cat" => (vec![lin("a")], vec![clause(exact(&[0]), &[(0, ExactlyOne)])]),
        "cartmulti" => (vec![nonlin("x")], vec![clause(exact(&[0]), &[(0, Unbounded)])]),
        // 0 = x (nonlinear), 1 = a (linear)
        "lnlmulti" => (
            vec![nonlin("x"), lin("a")],
            vec![
                clause(exact(&[0]), &[(0, Unbounded)]),
                clause(exact(&[1]), &[(0, Unbounded), (1, Unbounded)]),
            ],
        ),
        "cbpv" => (
            vec![nonlin("x"), lin("a")],
            vec![
                clause(exact(&[0]), &[(0, Unbounded)]),
                clause(exact(&[1]), &[(0, Unbounded), (1, AtMostOne)]),
            ],
        ),
        "ecbv" => (
            vec![nonlin("x"), lin("a")],
            vec![
                clause(exact(&[0]), &[(0, Unbounded)]),
                clause(exact(&[1]), &[(0, Unbounded), (1, ExactlyOne)]),
            ],
        ),
        // 0 = a, 1 = xl (left-hand), 2 = xr (right-hand)
        "dblsplit" => (
            vec![lin("a"), nonlin("xl"), nonlin("xr")],
            vec![
                clause(any_over(&[0]), &[(0, Unbounded), (1, Unbounded), (2, Unbounded)]),
                clause(exact(&[1]), &[(1, Unbounded), (2, Unbounded)]),
                clause(exact(&[2]), &[(1, Unbounded), (2, Unbounded)]),
            ],
        ),
        // 0 = p, 1 = n
        "linpol" => (
            vec![lin("p"), lin("n")],
            vec![
                clause(exact(&[0]), &[(0, Unbounded)]),
                clause(exact(&[1]), &[(0, Unbounded), (1, AtMostOne)]),
            ],
        ),
        "smadj" => (
            vec![lin("p"), lin("n")],
            vec![
                clause(exact(&[0]), &[(0, Unbounded)]),
                clause(exact(&[1]), &[(0, Unbounded), (1, Unbounded)]),
            ],
        ),
        // 0 = p, 1 = n, 2 = x
        "lnlpol" => (
            vec![lin("p"), lin("n"), nonlin("x")],
            vec![
                clause(exact(&[2]), &[(2, Unbounded)]),
                clause(exact(&[0]), &[(0, Unbounded), (2, Unbounded)]),
                clause(exact(&[1]), &[(0, Unbounded), (1, AtMostOne), (2, Unbounded)]),
            ],
        ),
        // 0 = l (loose), 1 = t (tight)
        "symskew" => (
            vec![lin("l"), lin("t")],
            vec![
                clause(exact(&[0]), &[(0, Unbounded)]),
                clause(exact(&[1]), &[(0, Unbounded), (1, AtMostOne)]),
            ],
        ),
        _ => return None,
    };
    Some(BaseTheory::new(name, sorts, clauses).expect("builtin tables are well formed"))
}
