//! Reduced words in the free group on `z_1..z_n`, abelianization, and
//! decidable membership in finitely generated submonoids.

use std::cmp::Ordering;
use std::collections::{HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Freely reduced word; letter `k > 0` is `z_k`, `-k` is `z_k^{-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ReducedWord {
    rank: usize,
    letters: Vec<i32>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WordError {
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("letter index {index} outside 1..={rank}")]
    LetterOutOfRange { index: i64, rank: usize },
    #[error("letters {0} and {1} cancel; word is not reduced")]
    NotReduced(i32, i32),
    #[error("cannot parse `{token}`: {reason}")]
    Parse { token: String, reason: String },
}

impl Ord for ReducedWord {
    /// Shortlex: shorter words first, then letters compared as integers.
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank
            .cmp(&other.rank)
            .then(self.letters.len().cmp(&other.letters.len()))
            .then_with(|| self.letters.cmp(&other.letters))
    }
}

impl PartialOrd for ReducedWord {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn push_reduced(out: &mut Vec<i32>, x: i32) {
    if out.last() == Some(&-x) {
        out.pop();
    } else {
        out.push(x);
    }
}

impl ReducedWord {
    pub fn identity(rank: usize) -> Self {
        ReducedWord {
            rank,
            letters: Vec::new(),
        }
    }

    /// `z_i` (1-based).
    pub fn letter(rank: usize, i: usize) -> Self {
        assert!(i >= 1 && i <= rank, "letter index out of range");
        ReducedWord {
            rank,
            letters: vec![i as i32],
        }
    }

    /// Freely reduces an arbitrary letter sequence.
    pub fn reduce(rank: usize, letters: &[i32]) -> Result<Self, WordError> {
        let mut out = Vec::with_capacity(letters.len());
        for &x in letters {
            check_letter(x as i64, rank)?;
            push_reduced(&mut out, x);
        }
        Ok(ReducedWord { rank, letters: out })
    }

    /// Accepts only sequences that are already reduced.
    pub fn from_letters(rank: usize, letters: Vec<i32>) -> Result<Self, WordError> {
        for &x in &letters {
            check_letter(x as i64, rank)?;
        }
        if let Some(w) = letters.windows(2).find(|w| w[0] == -w[1]) {
            return Err(WordError::NotReduced(w[0], w[1]));
        }
        Ok(ReducedWord { rank, letters })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn letters(&self) -> &[i32] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn try_mul(&self, o: &ReducedWord) -> Result<ReducedWord, WordError> {
        if self.rank != o.rank {
            return Err(WordError::RankMismatch(self.rank, o.rank));
        }
        let mut out = self.letters.clone();
        for &x in &o.letters {
            push_reduced(&mut out, x);
        }
        Ok(ReducedWord {
            rank: self.rank,
            letters: out,
        })
    }

    /// Panics on rank mismatch; see [`ReducedWord::try_mul`].
    pub fn mul(&self, o: &ReducedWord) -> ReducedWord {
        self.try_mul(o).expect("word ranks differ")
    }

    pub fn inv(&self) -> ReducedWord {
        ReducedWord {
            rank: self.rank,
            letters: self.letters.iter().rev().map(|x| -x).collect(),
        }
    }

    pub fn pow(&self, k: i64) -> ReducedWord {
        let base = if k < 0 { self.inv() } else { self.clone() };
        (0..k.unsigned_abs()).fold(ReducedWord::identity(self.rank), |acc, _| acc.mul(&base))
    }

    /// Exponent-sum vector.
    pub fn abelianize(&self) -> Vec<i64> {
        let mut v = vec![0i64; self.rank];
        for &x in &self.letters {
            v[x.unsigned_abs() as usize - 1] += x.signum() as i64;
        }
        v
    }

    /// `z_1^{a_1} ⋯ z_n^{a_n}`.
    pub fn canonical_lift(v: &[i64]) -> ReducedWord {
        let mut letters = Vec::new();
        for (i, &a) in v.iter().enumerate() {
            let x = (i as i32 + 1) * a.signum() as i32;
            letters.extend(std::iter::repeat(x).take(a.unsigned_abs() as usize));
        }
        ReducedWord {
            rank: v.len(),
            letters,
        }
    }

    pub fn product<'a>(rank: usize, ws: impl IntoIterator<Item = &'a ReducedWord>) -> ReducedWord {
        ws.into_iter()
            .fold(ReducedWord::identity(rank), |acc, w| acc.mul(w))
    }

    /// Parses `"z1 z2^-1 z1^3"`; `e` or `1` is the identity.
    pub fn parse(s: &str, rank: usize) -> Result<ReducedWord, WordError> {
        let mut letters = Vec::new();
        let s = s.trim();
        if s == "e" || s == "1" || s.is_empty() {
            return Ok(ReducedWord::identity(rank));
        }
        for tok in s.split(|c: char| c.is_whitespace() || c == '*' || c == '·') {
            if tok.is_empty() {
                continue;
            }
            let err = |reason: &str| WordError::Parse {
                token: tok.to_string(),
                reason: reason.to_string(),
            };
            let body = tok.strip_prefix('z').ok_or_else(|| err("expected z<index>"))?;
            let (idx, exp) = match body.split_once('^') {
                Some((i, e)) => (i, e.trim_start_matches('(').trim_end_matches(')')),
                None => (body, "1"),
            };
            let idx: i64 = idx.parse().map_err(|_| err("bad letter index"))?;
            check_letter(idx, rank)?;
            let exp: i64 = exp.parse().map_err(|_| err("bad exponent"))?;
            let x = idx as i32 * exp.signum() as i32;
            for _ in 0..exp.unsigned_abs() {
                push_reduced(&mut letters, x);
            }
        }
        Ok(ReducedWord { rank, letters })
    }
}

fn check_letter(x: i64, rank: usize) -> Result<(), WordError> {
    if x == 0 || x.unsigned_abs() as usize > rank {
        return Err(WordError::LetterOutOfRange { index: x.abs(), rank });
    }
    Ok(())
}

impl fmt::Display for ReducedWord {
    /// Runs of equal letters are collapsed into powers.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "e");
        }
        let mut parts = Vec::new();
        let mut k = 0;
        while k < self.letters.len() {
            let x = self.letters[k];
            let mut run = 1;
            while k + run < self.letters.len() && self.letters[k + run] == x {
                run += 1;
            }
            let exp = run as i64 * x.signum() as i64;
            parts.push(if exp == 1 {
                format!("z{}", x.abs())
            } else {
                format!("z{}^{}", x.abs(), exp)
            });
            k += run;
        }
        write!(f, "{}", parts.join(" "))
    }
}

type Bits = Vec<u64>;

fn bit(b: &Bits, i: usize) -> bool {
    b[i / 64] >> (i % 64) & 1 == 1
}

fn set_bit(b: &mut Bits, i: usize) {
    b[i / 64] |= 1 << (i % 64);
}

fn or_into(dst: &mut Bits, src: &Bits) -> bool {
    let mut changed = false;
    for (d, s) in dst.iter_mut().zip(src) {
        let new = *d | s;
        changed |= new != *d;
        *d = new;
    }
    changed
}

/// Saturated flower automaton. State 0 is both initial and accepting.
#[derive(Clone, Debug)]
struct Acceptor {
    rank: usize,
    states: usize,
    /// `delta[state][letter slot]` lists targets.
    delta: Vec<Vec<Vec<usize>>>,
    /// Reflexive-transitive ε-closure.
    closure: Vec<Bits>,
}

fn slot(x: i32, rank: usize) -> usize {
    if x > 0 {
        x as usize - 1
    } else {
        rank + (-x) as usize - 1
    }
}

impl Acceptor {
    fn build(rank: usize, gens: &[ReducedWord]) -> Acceptor {
        let mut states = 1;
        let mut edges: Vec<(usize, i32, usize)> = Vec::new();
        for g in gens.iter().filter(|g| !g.is_identity()) {
            let mut prev = 0;
            for (k, &x) in g.letters.iter().enumerate() {
                let next = if k + 1 == g.len() {
                    0
                } else {
                    states += 1;
                    states - 1
                };
                edges.push((prev, x, next));
                prev = next;
            }
        }
        let mut delta = vec![vec![Vec::new(); 2 * rank]; states];
        for &(p, x, q) in &edges {
            delta[p][slot(x, rank)].push(q);
        }
        let words = states.div_ceil(64);
        let mut closure: Vec<Bits> = (0..states)
            .map(|s| {
                let mut b = vec![0u64; words];
                set_bit(&mut b, s);
                b
            })
            .collect();
        // Benois saturation: p -x-> r =ε=> s -x̄-> q adds p =ε=> q
        loop {
            let mut changed = false;
            for &(p, x, r) in &edges {
                let inv = slot(-x, rank);
                for s in 0..states {
                    if !bit(&closure[r], s) {
                        continue;
                    }
                    for &q in &delta[s][inv] {
                        if bit(&closure[p], q) {
                            continue;
                        }
                        // every a reaching p now reaches closure(q)
                        let cq = closure[q].clone();
                        for a in 0..states {
                            if bit(&closure[a], p) {
                                or_into(&mut closure[a], &cq);
                            }
                        }
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        Acceptor {
            rank,
            states,
            delta,
            closure,
        }
    }

    fn accepts(&self, w: &ReducedWord) -> bool {
        let words = self.states.div_ceil(64);
        let mut cur = self.closure[0].clone();
        for &x in &w.letters {
            let sl = slot(x, self.rank);
            let mut next = vec![0u64; words];
            for p in 0..self.states {
                if bit(&cur, p) {
                    for &q in &self.delta[p][sl] {
                        or_into(&mut next, &self.closure[q]);
                    }
                }
            }
            if next.iter().all(|&b| b == 0) {
                return false;
            }
            cur = next;
        }
        bit(&cur, 0)
    }
}

/// Finitely generated submonoid of the free group with a compiled acceptor.
#[derive(Clone, Debug)]
pub struct SubmonoidFG {
    rank: usize,
    gens: Vec<ReducedWord>,
    acceptor: Acceptor,
}

impl PartialEq for SubmonoidFG {
    /// Structural: equal generator lists.
    fn eq(&self, other: &Self) -> bool {
        self.rank == other.rank && self.gens == other.gens
    }
}

impl Eq for SubmonoidFG {}

pub fn compile_submonoid(rank: usize, gens: Vec<ReducedWord>) -> Result<SubmonoidFG, WordError> {
    if let Some(g) = gens.iter().find(|g| g.rank != rank) {
        return Err(WordError::RankMismatch(rank, g.rank));
    }
    let acceptor = Acceptor::build(rank, &gens);
    Ok(SubmonoidFG {
        rank,
        gens,
        acceptor,
    })
}

/// Default cap on words visited by the factorization search.
pub const FACTOR_SEARCH_CAP: usize = 200_000;

impl SubmonoidFG {
    /// Panics on rank mismatch; see [`compile_submonoid`].
    pub fn new(rank: usize, gens: Vec<ReducedWord>) -> Self {
        compile_submonoid(rank, gens).expect("generator rank mismatch")
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn gens(&self) -> &[ReducedWord] {
        &self.gens
    }

    pub fn automaton_states(&self) -> usize {
        self.acceptor.states
    }

    pub fn member(&self, w: &ReducedWord) -> bool {
        w.rank == self.rank && self.acceptor.accepts(w)
    }

    pub fn is_unit(&self, w: &ReducedWord) -> bool {
        self.member(w) && self.member(&w.inv())
    }

    /// Shortest product of at most `max_factors` generators equal to `w`,
    /// as a list of generator indices. The search gives up after visiting
    /// `FACTOR_SEARCH_CAP` words, so `None` does not imply non-membership.
    pub fn factorize(&self, w: &ReducedWord, max_factors: usize) -> Option<Vec<usize>> {
        if w.is_identity() {
            return Some(Vec::new());
        }
        if !self.member(w) {
            return None;
        }
        let id = ReducedWord::identity(self.rank);
        let mut seen: HashSet<ReducedWord> = HashSet::from([id.clone()]);
        let mut queue = VecDeque::from([(id, Vec::<usize>::new())]);
        while let Some((cur, path)) = queue.pop_front() {
            if path.len() == max_factors {
                continue;
            }
            for (k, g) in self.gens.iter().enumerate() {
                let next = cur.mul(g);
                let mut p = path.clone();
                p.push(k);
                if next == *w {
                    return Some(p);
                }
                if seen.len() < FACTOR_SEARCH_CAP && seen.insert(next.clone()) {
                    queue.push_back((next, p));
                }
            }
        }
        None
    }

    /// Mutual generator membership.
    pub fn same_submonoid(&self, other: &SubmonoidFG) -> bool {
        self.gens.iter().all(|g| other.member(g)) && other.gens.iter().all(|g| self.member(g))
    }

    /// A new submonoid with `extra` appended, skipping exact duplicates.
    pub fn with_generators(&self, extra: &[ReducedWord]) -> SubmonoidFG {
        let mut gens = self.gens.clone();
        for w in extra {
            if !gens.contains(w) {
                gens.push(w.clone());
            }
        }
        SubmonoidFG::new(self.rank, gens)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> ReducedWord {
        ReducedWord::parse(s, 2).unwrap()
    }

    fn sm(gens: &[&str]) -> SubmonoidFG {
        SubmonoidFG::new(2, gens.iter().map(|g| w(g)).collect())
    }

    #[test]
    fn multiplication_cancels_at_junction() {
        assert_eq!(w("z1 z2").mul(&w("z2^-1 z1")), w("z1^2"));
        assert_eq!(w("z1 z2^2").mul(&w("z2^-2 z1^-1")), w("e"));
        assert_eq!(w("z1 z2^-1").inv(), w("z2 z1^-1"));
        assert!(w("z1").try_mul(&ReducedWord::letter(3, 1)).is_err());
    }

    #[test]
    fn long_loops_abelianize() {
        let g1 = w("z1 z2^3 z1^2 z2^-2 z1^-1 z2 z1^2 z2^-2 z1^-1 z2^-1 z1 z2^-1 z1^-3");
        let g2 = w("z2^-2 z1^-1 z2 z1^-1 z2 z1^-1 z2^3 z1 z2^-2 z1^2 z2^-1");
        assert_eq!(g1.abelianize(), vec![1, -2]);
        assert_eq!(g2.abelianize(), vec![0, 0]);
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(w("z1 z2^-1 z1^3").to_string(), "z1 z2^-1 z1^3");
        assert_eq!(w("z1 z1^-1").to_string(), "e");
        assert!(matches!(
            ReducedWord::parse("z1 z3", 2),
            Err(WordError::LetterOutOfRange { index: 3, .. })
        ));
        assert!(ReducedWord::parse("z0", 2).is_err());
        assert!(ReducedWord::parse("x1", 2).is_err());
        assert_eq!(ReducedWord::canonical_lift(&[2, -1]), w("z1^2 z2^-1"));
        assert!(ReducedWord::from_letters(2, vec![1, -1]).is_err());
    }

    #[test]
    fn membership_examples() {
        assert!(sm(&["z1", "z1^-1"]).member(&w("z1^-3")));
        assert!(!sm(&["z1 z2"]).member(&w("z1")));
        assert!(sm(&["z1", "z1^-1 z2"]).member(&w("z2")));
        assert!(sm(&["z1 z2"]).member(&w("e")));
        assert!(!sm(&["z1^2"]).member(&w("z1^3")));
        assert!(sm(&["z1^2"]).member(&w("z1^4")));
        assert!(sm(&["z1", "z1^-1"]).is_unit(&w("z1")));
        assert!(!sm(&["z1"]).is_unit(&w("z1")));
        assert!(sm(&["z1 z2", "z2^-1 z1^-1"]).is_unit(&w("z1 z2")));
    }

    #[test]
    fn saturation_needs_cancellation_across_generators() {
        // z2 = (z1 z2 z1) (z1^-1) (z1^-1) only after two cancellations
        let s = sm(&["z1 z2 z1", "z1^-1"]);
        assert!(s.member(&w("z2")));
        assert_eq!(s.factorize(&w("z2"), 4).map(|f| f.len()), Some(3));
        assert!(!sm(&["z1 z2 z1", "z1^-2"]).member(&w("z2")));
    }
}
