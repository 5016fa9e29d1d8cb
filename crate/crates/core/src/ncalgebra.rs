//! Monoid algebras over `Q(i)` on reduced words, abelianization to Laurent
//! polynomials, and two-sided ideal membership up to a word-length bound.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::exactmath::GaussRational as G;
use crate::freeword::{ReducedWord, SubmonoidFG, WordError};
use crate::toricfan::MVector;

/// Finite `Q(i)`-combination of reduced words; zero coefficients are never
/// stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AlgElem {
    rank: usize,
    terms: BTreeMap<ReducedWord, G>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlgError {
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("target has words of length {len}, above the bound {bound}")]
    TargetExceedsBound { len: usize, bound: usize },
    #[error("degree bound {bound} must be at least {needed}")]
    BoundTooSmall { bound: usize, needed: usize },
    #[error(transparent)]
    Word(#[from] WordError),
    #[error("cannot parse algebra element `{input}`: {reason}")]
    Parse { input: String, reason: String },
}

impl AlgElem {
    pub fn zero(rank: usize) -> Self {
        AlgElem {
            rank,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(rank: usize) -> Self {
        AlgElem::word(&ReducedWord::identity(rank))
    }

    pub fn word(w: &ReducedWord) -> Self {
        AlgElem::monomial(G::one(), w)
    }

    pub fn monomial(c: G, w: &ReducedWord) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(w.clone(), c);
        }
        AlgElem {
            rank: w.rank(),
            terms,
        }
    }

    pub fn scalar(rank: usize, c: G) -> Self {
        AlgElem::monomial(c, &ReducedWord::identity(rank))
    }

    /// Sums the given terms, dropping any that cancel.
    pub fn from_terms(rank: usize, terms: impl IntoIterator<Item = (ReducedWord, G)>) -> Self {
        let mut out = AlgElem::zero(rank);
        for (w, c) in terms {
            assert_eq!(w.rank(), rank, "word rank differs from element rank");
            out.add_term(w, c);
        }
        out
    }

    fn add_term(&mut self, w: ReducedWord, c: G) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&w) {
            Some(v) => {
                *v += &c;
                if v.is_zero() {
                    self.terms.remove(&w);
                }
            }
            None => {
                self.terms.insert(w, c);
            }
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn terms(&self) -> &BTreeMap<ReducedWord, G> {
        &self.terms
    }

    pub fn coeff(&self, w: &ReducedWord) -> G {
        self.terms.get(w).cloned().unwrap_or_else(G::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Longest word in the support (0 for the zero element).
    pub fn max_len(&self) -> usize {
        self.terms.keys().map(ReducedWord::len).max().unwrap_or(0)
    }

    pub fn words(&self) -> impl Iterator<Item = &ReducedWord> {
        self.terms.keys()
    }

    pub fn checked_add(&self, o: &AlgElem) -> Result<AlgElem, AlgError> {
        if self.rank != o.rank {
            return Err(AlgError::RankMismatch(self.rank, o.rank));
        }
        let mut out = self.clone();
        for (w, c) in &o.terms {
            out.add_term(w.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_mul(&self, o: &AlgElem) -> Result<AlgElem, AlgError> {
        if self.rank != o.rank {
            return Err(AlgError::RankMismatch(self.rank, o.rank));
        }
        let mut out = AlgElem::zero(self.rank);
        for (a, ca) in &self.terms {
            for (b, cb) in &o.terms {
                out.add_term(a.mul(b), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &G) -> AlgElem {
        if c.is_zero() {
            return AlgElem::zero(self.rank);
        }
        AlgElem {
            rank: self.rank,
            terms: self.terms.iter().map(|(w, x)| (w.clone(), x * c)).collect(),
        }
    }

    /// `left · self · right` for words.
    pub fn sandwich(&self, left: &ReducedWord, right: &ReducedWord) -> AlgElem {
        AlgElem::from_terms(
            self.rank,
            self.terms
                .iter()
                .map(|(w, c)| (left.mul(w).mul(right), c.clone())),
        )
    }

    /// All words share one abelianization.
    pub fn is_homogeneous(&self) -> bool {
        let degs: BTreeSet<MVector> = self.terms.keys().map(ReducedWord::abelianize).collect();
        degs.len() <= 1
    }

    /// Parses `"(3/2+1/2i)*z1 z2^-1 + 1"`.
    pub fn parse(s: &str, rank: usize) -> Result<AlgElem, AlgError> {
        let err = |reason: String| AlgError::Parse {
            input: s.to_string(),
            reason,
        };
        let mut out = AlgElem::zero(rank);
        let mut depth = 0i32;
        let mut start = 0;
        let mut pieces: Vec<(bool, &str)> = Vec::new();
        let mut neg = false;
        let bytes = s.as_bytes();
        for (k, &b) in bytes.iter().enumerate() {
            match b {
                b'(' => depth += 1,
                b')' => depth -= 1,
                b'+' | b'-' if depth == 0 => {
                    // a sign right after `^` belongs to an exponent
                    let prev = s[..k].trim_end().chars().last();
                    if prev == Some('^') {
                        continue;
                    }
                    let piece = s[start..k].trim();
                    if !piece.is_empty() {
                        pieces.push((neg, piece));
                    } else if !pieces.is_empty() || neg {
                        return Err(err("empty term".into()));
                    }
                    neg = b == b'-';
                    start = k + 1;
                }
                _ => {}
            }
        }
        if depth != 0 {
            return Err(err("unbalanced parentheses".into()));
        }
        let last = s[start..].trim();
        if last.is_empty() {
            if !pieces.is_empty() || neg {
                return Err(err("dangling sign".into()));
            }
            return Err(err("empty expression".into()));
        }
        pieces.push((neg, last));
        for (neg, piece) in pieces {
            let (coef, word) = split_term(piece).map_err(|r| err(r))?;
            let c: G = match coef {
                Some(t) => t.parse().map_err(|e: crate::exactmath::ParseGaussError| err(e.reason))?,
                None => G::one(),
            };
            let w = match word {
                Some(t) => ReducedWord::parse(t, rank)?,
                None => ReducedWord::identity(rank),
            };
            out.add_term(w, if neg { -c } else { c });
        }
        Ok(out)
    }
}

/// Splits `coef*word`, `(a+bi)*word`, `word`, or a bare scalar.
fn split_term(t: &str) -> Result<(Option<&str>, Option<&str>), String> {
    let t = t.trim();
    if let Some((c, w)) = t.split_once('*') {
        return Ok((Some(c.trim()), Some(w.trim())));
    }
    if t.starts_with('z') {
        return Ok((None, Some(t)));
    }
    if t == "e" {
        return Ok((None, None));
    }
    if let Some(rest) = t.strip_prefix('(') {
        let close = rest.find(')').ok_or("unclosed parenthesis")?;
        let coef = &t[..close + 2];
        let word = rest[close + 1..].trim();
        return Ok((Some(coef), (!word.is_empty()).then_some(word)));
    }
    // bare number possibly followed by a word: `2 z1`
    match t.find('z') {
        Some(k) => Ok((Some(t[..k].trim()), Some(t[k..].trim()))),
        None => Ok((Some(t), None)),
    }
}

impl fmt::Display for AlgElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (w, c) in &self.terms {
            let simple_neg = c.is_real() && c.re < num_rational::BigRational::zero();
            let shown = if simple_neg { -c } else { c.clone() };
            let sep = match (first, simple_neg) {
                (true, true) => "-",
                (true, false) => "",
                (false, true) => " - ",
                (false, false) => " + ",
            };
            let coef = if shown.is_real() {
                shown.to_string()
            } else {
                format!("({shown})")
            };
            if w.is_identity() {
                write!(f, "{sep}{coef}")?;
            } else if shown.is_one() {
                write!(f, "{sep}{w}")?;
            } else {
                write!(f, "{sep}{coef}*{w}")?;
            }
            first = false;
        }
        Ok(())
    }
}

impl<'a> Add<&'a AlgElem> for &'a AlgElem {
    type Output = AlgElem;
    fn add(self, o: &AlgElem) -> AlgElem {
        self.checked_add(o).expect("algebra ranks differ")
    }
}

impl<'a> Sub<&'a AlgElem> for &'a AlgElem {
    type Output = AlgElem;
    fn sub(self, o: &AlgElem) -> AlgElem {
        self.checked_add(&-o).expect("algebra ranks differ")
    }
}

impl<'a> Mul<&'a AlgElem> for &'a AlgElem {
    type Output = AlgElem;
    fn mul(self, o: &AlgElem) -> AlgElem {
        self.checked_mul(o).expect("algebra ranks differ")
    }
}

impl<'a> Neg for &'a AlgElem {
    type Output = AlgElem;
    fn neg(self) -> AlgElem {
        self.scale(&G::from(-1))
    }
}

/// Laurent polynomial: exponent vector to coefficient, no zero entries.
pub type CommPoly = BTreeMap<MVector, G>;

pub fn abelianize_elem(a: &AlgElem) -> CommPoly {
    let mut out = CommPoly::new();
    for (w, c) in &a.terms {
        let key = w.abelianize();
        let v = out.entry(key.clone()).or_insert_with(G::zero);
        *v += c;
        if v.is_zero() {
            out.remove(&key);
        }
    }
    out
}

pub fn comm_mul(a: &CommPoly, b: &CommPoly) -> CommPoly {
    let mut out = CommPoly::new();
    for (u, x) in a {
        for (v, y) in b {
            let key: MVector = u.iter().zip(v).map(|(p, q)| p + q).collect();
            let e = out.entry(key.clone()).or_insert_with(G::zero);
            *e += &(x * y);
            if e.is_zero() {
                out.remove(&key);
            }
        }
    }
    out
}

pub fn comm_add(a: &CommPoly, b: &CommPoly) -> CommPoly {
    let mut out = a.clone();
    for (v, y) in b {
        let e = out.entry(v.clone()).or_insert_with(G::zero);
        *e += y;
        if e.is_zero() {
            out.remove(v);
        }
    }
    out
}

/// Words allowed as left/right multipliers and as basis elements.
#[derive(Clone, Debug)]
pub enum WordDomain {
    /// Positive words only: the free associative algebra.
    Free,
    /// All reduced words: the group algebra.
    Group,
    /// Words of a chart submonoid.
    Chart(SubmonoidFG),
}

impl WordDomain {
    /// All domain words of length at most `d`, shortlex ordered.
    pub fn words_up_to(&self, rank: usize, d: usize) -> Vec<ReducedWord> {
        let letters: Vec<i32> = match self {
            WordDomain::Free => (1..=rank as i32).collect(),
            _ => (1..=rank as i32).flat_map(|i| [i, -i]).collect(),
        };
        let mut layer = vec![ReducedWord::identity(rank)];
        let mut all = layer.clone();
        for _ in 0..d {
            let mut next = Vec::new();
            for w in &layer {
                for &x in &letters {
                    if w.letters().last() == Some(&-x) {
                        continue;
                    }
                    let mut l = w.letters().to_vec();
                    l.push(x);
                    next.push(ReducedWord::from_letters(rank, l).expect("reduced by construction"));
                }
            }
            all.extend(next.iter().cloned());
            layer = next;
        }
        if let WordDomain::Chart(s) = self {
            all.retain(|w| s.member(w));
        }
        all
    }
}

/// Two-sided ideal presented by generators, explored up to a word length.
#[derive(Clone, Debug)]
pub struct BoundedIdeal {
    pub rank: usize,
    pub generators: Vec<AlgElem>,
    pub degree_bound: usize,
    pub domain: WordDomain,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertTerm {
    pub coeff: G,
    pub left: ReducedWord,
    pub generator: usize,
    pub right: ReducedWord,
}

/// `target = Σ coeff · left · generators[generator] · right`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub terms: Vec<CertTerm>,
}

impl Certificate {
    pub fn reconstruct(&self, ideal: &BoundedIdeal) -> AlgElem {
        self.terms.iter().fold(AlgElem::zero(ideal.rank), |acc, t| {
            let piece = ideal.generators[t.generator]
                .sandwich(&t.left, &t.right)
                .scale(&t.coeff);
            &acc + &piece
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Membership {
    Member(Certificate),
    /// No combination exists among the products explored at this bound.
    /// This says nothing about larger bounds.
    NotFoundAtBound(usize),
}

impl Membership {
    pub fn is_member(&self) -> bool {
        matches!(self, Membership::Member(_))
    }
}

type Sparse = BTreeMap<ReducedWord, G>;

/// Echelon basis of the explored span, tracking how each row was formed.
struct Echelon {
    rows: BTreeMap<ReducedWord, (Sparse, BTreeMap<usize, G>)>,
}

impl Echelon {
    fn reduce(&self, mut v: Sparse, mut combo: BTreeMap<usize, G>) -> (Sparse, BTreeMap<usize, G>) {
        let mut cursor: Option<ReducedWord> = None;
        loop {
            let next = v
                .keys()
                .rev()
                .filter(|w| cursor.as_ref().is_none_or(|c| *w < c))
                .find(|w| self.rows.contains_key(*w))
                .cloned();
            let Some(p) = next else { break };
            let f = v[&p].clone();
            let (row, rc) = &self.rows[&p];
            for (w, c) in row {
                let e = v.entry(w.clone()).or_insert_with(G::zero);
                *e -= &(&f * c);
                if e.is_zero() {
                    v.remove(w);
                }
            }
            for (k, c) in rc {
                let e = combo.entry(*k).or_insert_with(G::zero);
                *e -= &(&f * c);
                if e.is_zero() {
                    combo.remove(k);
                }
            }
            cursor = Some(p);
        }
        (v, combo)
    }

    fn insert(&mut self, v: Sparse, combo: BTreeMap<usize, G>) {
        let (v, combo) = self.reduce(v, combo);
        let Some((lead, c)) = v.iter().next_back().map(|(w, c)| (w.clone(), c.clone())) else {
            return;
        };
        let inv = c.inv().expect("nonzero");
        let v = v.into_iter().map(|(w, x)| (w, &x * &inv)).collect();
        let combo = combo.into_iter().map(|(k, x)| (k, &x * &inv)).collect();
        self.rows.insert(lead, (v, combo));
    }
}

pub fn bounded_ideal_member(ideal: &BoundedIdeal, target: &AlgElem) -> Result<Membership, AlgError> {
    if target.rank != ideal.rank {
        return Err(AlgError::RankMismatch(target.rank, ideal.rank));
    }
    if let Some(g) = ideal.generators.iter().find(|g| g.rank != ideal.rank) {
        return Err(AlgError::RankMismatch(g.rank, ideal.rank));
    }
    let d = ideal.degree_bound;
    if target.max_len() > d {
        return Err(AlgError::TargetExceedsBound {
            len: target.max_len(),
            bound: d,
        });
    }
    if target.is_zero() {
        return Ok(Membership::Member(Certificate { terms: Vec::new() }));
    }
    let words = ideal.domain.words_up_to(ideal.rank, d);
    let mut specs: Vec<(usize, &ReducedWord, &ReducedWord)> = Vec::new();
    for (gi, g) in ideal.generators.iter().enumerate() {
        if g.is_zero() {
            continue;
        }
        for x in &words {
            for y in &words {
                if x.len() + y.len() <= d {
                    specs.push((gi, x, y));
                }
            }
        }
    }
    let columns: Vec<Option<AlgElem>> = specs
        .par_iter()
        .map(|(gi, x, y)| {
            let c = ideal.generators[*gi].sandwich(x, y);
            (c.max_len() <= d && !c.is_zero()).then_some(c)
        })
        .collect();
    let mut ech = Echelon {
        rows: BTreeMap::new(),
    };
    for (k, col) in columns.into_iter().enumerate() {
        if let Some(c) = col {
            ech.insert(c.terms, BTreeMap::from([(k, G::one())]));
        }
    }
    let (rest, combo) = ech.reduce(target.terms.clone(), BTreeMap::new());
    if !rest.is_empty() {
        return Ok(Membership::NotFoundAtBound(d));
    }
    // target - Σ combo_k col_k = 0 after reduction, with combo negated
    let terms = combo
        .into_iter()
        .map(|(k, c)| {
            let (gi, x, y) = specs[k];
            CertTerm {
                coeff: -c,
                left: x.clone(),
                generator: gi,
                right: y.clone(),
            }
        })
        .collect();
    let cert = Certificate { terms };
    debug_assert_eq!(cert.reconstruct(ideal), *target);
    Ok(Membership::Member(cert))
}

/// Scales so the first stored coefficient is 1.
fn normalize(a: &AlgElem) -> AlgElem {
    match a.terms.values().next() {
        Some(c) => a.scale(&c.inv().expect("nonzero")),
        None => a.clone(),
    }
}

/// Commutators `[z_i, g]` with `g` a positive word of length `l`, deduplicated
/// up to scalars, in the free algebra.
pub fn l_commutative_gens(rank: usize, l: usize, degree_bound: usize) -> Result<BoundedIdeal, AlgError> {
    if degree_bound < l + 1 {
        return Err(AlgError::BoundTooSmall {
            bound: degree_bound,
            needed: l + 1,
        });
    }
    let all = WordDomain::Free.words_up_to(rank, l);
    let mut gens: Vec<AlgElem> = Vec::new();
    for i in 1..=rank {
        let f = AlgElem::word(&ReducedWord::letter(rank, i));
        for g in all.iter().filter(|w| w.len() == l) {
            let g = AlgElem::word(g);
            let c = &(&f * &g) - &(&g * &f);
            if c.is_zero() {
                continue;
            }
            let c = normalize(&c);
            if !gens.contains(&c) {
                gens.push(c);
            }
        }
    }
    Ok(BoundedIdeal {
        rank,
        generators: gens,
        degree_bound,
        domain: WordDomain::Free,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(s: &str, n: usize) -> AlgElem {
        AlgElem::parse(s, n).unwrap()
    }

    #[test]
    fn arithmetic_examples() {
        let x = a("z1 + z2", 2);
        assert_eq!(&x * &a("z1^-1", 2), a("1 + z2 z1^-1", 2));
        assert_eq!(&x * &AlgElem::one(2), x);
        let p = a("z1 z2", 2);
        let q = a("z2^-1 z1", 2);
        assert_eq!(&p * &q, a("z1^2", 2));
        assert_ne!(&p * &q, &q * &p);
        assert!(AlgElem::one(2).checked_mul(&AlgElem::one(3)).is_err());
    }

    #[test]
    fn parse_display_round_trip() {
        for s in ["(3/2+1/2i)*z1 z2^-1 + 1", "z1 - z2", "-2*z1^2 z2", "i*z1"] {
            let x = a(s, 2);
            assert_eq!(a(&x.to_string(), 2), x, "{s} -> {x}");
        }
        assert_eq!(a("(3/2+1/2i)*z1 z2^-1 + 1", 2).num_terms(), 2);
        assert!(AlgElem::parse("z1 +", 2).is_err());
        assert!(AlgElem::parse("z3", 2).is_err());
    }

    #[test]
    fn abelianization_kills_commutators() {
        assert!(abelianize_elem(&a("z1 z2 - z2 z1", 2)).is_empty());
        let p = abelianize_elem(&a("1 + z2 z1^-1", 2));
        assert_eq!(p.len(), 2);
        assert_eq!(p[&vec![-1, 1]], G::one());
    }

    #[test]
    fn ideal_membership_examples() {
        let ideal = BoundedIdeal {
            rank: 2,
            generators: vec![a("z1", 2)],
            degree_bound: 3,
            domain: WordDomain::Free,
        };
        let t = a("z2 z1 z2", 2);
        match bounded_ideal_member(&ideal, &t).unwrap() {
            Membership::Member(c) => {
                assert_eq!(c.reconstruct(&ideal), t);
                assert_eq!(c.terms.len(), 1);
                assert_eq!(c.terms[0].left, ReducedWord::parse("z2", 2).unwrap());
            }
            other => panic!("{other:?}"),
        }
        let comm = l_commutative_gens(2, 1, 4).unwrap();
        assert_eq!(comm.generators, vec![a("z1 z2 - z2 z1", 2)]);
        assert_eq!(
            bounded_ideal_member(&comm, &a("z1", 2)).unwrap(),
            Membership::NotFoundAtBound(4)
        );
        assert!(matches!(
            bounded_ideal_member(&comm, &a("z1^5", 2)),
            Err(AlgError::TargetExceedsBound { .. })
        ));
    }

    #[test]
    fn rank_one_commutators_vanish() {
        for l in 1..4 {
            assert!(l_commutative_gens(1, l, l + 1).unwrap().generators.is_empty());
        }
        assert!(l_commutative_gens(2, 2, 2).is_err());
    }

    #[test]
    fn longer_commutators_lie_in_the_commutator_ideal() {
        let mut comm = l_commutative_gens(3, 1, 4).unwrap();
        comm.degree_bound = 4;
        let two = l_commutative_gens(3, 2, 4).unwrap();
        for g in &two.generators {
            assert!(bounded_ideal_member(&comm, g).unwrap().is_member(), "{g}");
        }
    }

    #[test]
    fn group_domain_uses_inverses() {
        // z1 - 1 generates; z1^-1 - 1 = -(z1 - 1) z1^-1
        let ideal = BoundedIdeal {
            rank: 1,
            generators: vec![a("z1 - 1", 1)],
            degree_bound: 2,
            domain: WordDomain::Group,
        };
        assert!(bounded_ideal_member(&ideal, &a("z1^-1 - 1", 1)).unwrap().is_member());
        let free = BoundedIdeal {
            domain: WordDomain::Free,
            ..ideal
        };
        assert!(!bounded_ideal_member(&free, &a("z1^-1 - 1", 1)).unwrap().is_member());
    }
}
