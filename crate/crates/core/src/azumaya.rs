//! Azumaya points: idempotent systems over a fan, quasi-homomorphisms from
//! chart algebras to `M_r`, morphism verification, surrogate algebras,
//! truncated kernels, A¹ probes and seeded matrix-model sampling.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::deltasystem::AdmissibleSystem;
use crate::exactmath::{minimal_polynomial, nullspace, rank, roots_in_qi, GaussRational as G, Poly, QIMatrix};
use crate::freeword::ReducedWord;
use crate::ncalgebra::{AlgElem, BoundedIdeal, WordDomain};
use crate::toricfan::{ConeId, Fan};

/// Longest generator product explored when looking for relations.
pub const RELATION_LENGTH: usize = 4;
/// Distinct words kept per chart during the relation search.
const RELATION_WORD_CAP: usize = 20_000;
/// Longest factorization tried when restricting a generator to a lower chart.
const RESTRICT_FACTORS: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AzumayaError {
    #[error("matrix for cone {0} is not idempotent")]
    NotIdempotent(ConeId),
    #[error("no data for cone {0}")]
    MissingCone(ConeId),
    #[error("matrix of size {got} where {expected} was expected")]
    SizeMismatch { expected: usize, got: usize },
    #[error("factors multiply to {got}, not {expected}")]
    BadFactorization { expected: String, got: String },
    #[error("{0} is neither a chart generator nor the inverse of one with a witness")]
    UnknownFactor(String),
    #[error("pattern is not a complete strong system: {0}")]
    PatternIncomplete(String),
    #[error("morphism failed verification: {0}")]
    MorphismInvalid(String),
}

/// `e1 ≼ e2`: `e1 e2 = e2 e1 = e1`.
pub fn subordinate(e1: &QIMatrix, e2: &QIMatrix) -> bool {
    e1.mul(e2) == *e1 && e2.mul(e1) == *e1
}

#[derive(Clone, Debug)]
pub struct IdemSystem {
    pub fan: Fan,
    pub e: BTreeMap<ConeId, QIMatrix>,
    pub weak: bool,
    pub strong: bool,
    /// Present when the system is strong.
    pub reduced: Option<BTreeMap<ConeId, QIMatrix>>,
    pub complete: bool,
    /// Human-readable reasons for every failed property.
    pub notes: Vec<String>,
}

pub fn idem_classify(fan: &Fan, e: &BTreeMap<ConeId, QIMatrix>) -> Result<IdemSystem, AzumayaError> {
    let mut size = None;
    for c in fan.faces() {
        let m = e.get(c).ok_or_else(|| AzumayaError::MissingCone(c.clone()))?;
        let r = *size.get_or_insert(m.size());
        if m.size() != r {
            return Err(AzumayaError::SizeMismatch { expected: r, got: m.size() });
        }
        if !m.is_idempotent() {
            return Err(AzumayaError::NotIdempotent(c.clone()));
        }
    }
    let r = size.unwrap_or(0);
    let mut notes = Vec::new();
    let mut weak = true;
    for (tau, sigma) in fan.incidences() {
        if !subordinate(&e[&tau], &e[&sigma]) {
            weak = false;
            notes.push(format!("e{tau} is not subordinate to e{sigma}"));
        }
    }
    let faces: Vec<&ConeId> = fan.faces().collect();
    let mut strong = true;
    for (i, a) in faces.iter().enumerate() {
        for b in &faces[i..] {
            let meet = a.intersection(b);
            if e[*a].mul(&e[*b]) != e[&meet] {
                strong = false;
                notes.push(format!("e{a}·e{b} differs from e{meet}"));
            }
        }
    }
    let mut reduced = None;
    let mut complete = false;
    if strong {
        let mut red = BTreeMap::new();
        for sigma in &faces {
            let facets: Vec<ConeId> = sigma
                .rays()
                .iter()
                .map(|&x| ConeId::new(sigma.rays().iter().copied().filter(|&y| y != x).collect()))
                .collect();
            let mut acc = e[*sigma].clone();
            for mask in 1u32..(1 << facets.len()) {
                let mut prod = QIMatrix::identity(r);
                for (k, f) in facets.iter().enumerate() {
                    if mask & (1 << k) != 0 {
                        prod = prod.mul(&e[f]);
                    }
                }
                acc = if mask.count_ones() % 2 == 1 { acc.sub(&prod) } else { acc.add(&prod) };
            }
            red.insert((*sigma).clone(), acc);
        }
        for (i, a) in faces.iter().enumerate() {
            for b in &faces[i + 1..] {
                if !red[*a].mul(&red[*b]).is_zero() {
                    notes.push(format!("reduced idempotents of {a} and {b} are not orthogonal"));
                    strong = false;
                }
            }
            let sum = faces
                .iter()
                .filter(|t| t.is_subset_of(a))
                .fold(QIMatrix::zero(r), |s, t| s.add(&red[*t]));
            if sum != e[*a] {
                notes.push(format!("reduced idempotents below {a} do not sum to e{a}"));
                strong = false;
            }
        }
        let total = red.values().fold(QIMatrix::zero(r), |s, m| s.add(m));
        complete = strong && total.is_identity();
        if strong && !complete {
            notes.push("reduced idempotents do not sum to the identity".into());
        }
        reduced = Some(red);
    }
    Ok(IdemSystem {
        fan: fan.clone(),
        e: e.clone(),
        weak,
        strong,
        reduced,
        complete,
        notes,
    })
}

/// Values of a chart algebra map on the chart generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuasiHomChart {
    pub cone: ConeId,
    pub images: BTreeMap<ReducedWord, QIMatrix>,
    pub identity_image: QIMatrix,
    /// Corner inverses of invertible generators, keyed by the generator.
    pub inverse_witnesses: BTreeMap<ReducedWord, QIMatrix>,
}

impl QuasiHomChart {
    /// Everything zero: always a quasi-homomorphism.
    pub fn zero(sys: &AdmissibleSystem, cone: &ConeId, r: usize) -> Self {
        QuasiHomChart {
            cone: cone.clone(),
            images: sys
                .chart(cone)
                .gens()
                .iter()
                .map(|g| (g.clone(), QIMatrix::zero(r)))
                .collect(),
            identity_image: QIMatrix::zero(r),
            inverse_witnesses: BTreeMap::new(),
        }
    }

    pub fn size(&self) -> usize {
        self.identity_image.size()
    }

    pub fn is_zero_chart(&self) -> bool {
        self.identity_image.is_zero() && self.images.values().all(QIMatrix::is_zero)
    }

    /// Matrix of one factor: a generator, or the inverse of one with a witness.
    fn factor(&self, w: &ReducedWord) -> Option<&QIMatrix> {
        self.images.get(w).or_else(|| self.inverse_witnesses.get(&w.inv()))
    }
}

/// Image of `w`, given as a product of factors (generators or inverses of
/// witnessed generators).
pub fn eval_word(chart: &QuasiHomChart, w: &ReducedWord, factors: &[ReducedWord]) -> Result<QIMatrix, AzumayaError> {
    let got = ReducedWord::product(w.rank(), factors);
    if got != *w {
        return Err(AzumayaError::BadFactorization {
            expected: w.to_string(),
            got: got.to_string(),
        });
    }
    let mut acc = chart.identity_image.clone();
    for f in factors {
        let m = chart.factor(f).ok_or_else(|| AzumayaError::UnknownFactor(f.to_string()))?;
        acc = acc.mul(m);
    }
    Ok(acc)
}

/// Linear extension of [`eval_word`]; every word needs a factorization.
pub fn eval_elem(
    chart: &QuasiHomChart,
    a: &AlgElem,
    factorizations: &BTreeMap<ReducedWord, Vec<ReducedWord>>,
) -> Result<QIMatrix, AzumayaError> {
    let mut acc = QIMatrix::zero(chart.size());
    for (w, c) in a.terms() {
        let f = factorizations
            .get(w)
            .ok_or_else(|| AzumayaError::UnknownFactor(w.to_string()))?;
        acc = acc.add(&eval_word(chart, w, f)?.scale(c));
    }
    Ok(acc)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AzClause {
    SizeMismatch,
    IdentityIdempotent,
    Absorption,
    Witness,
    Coverage,
    Relation,
    Subordination,
    Centralizer,
    Restriction,
    NoFactorization,
    Strong,
    Complete,
}

impl fmt::Display for AzClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AzClause::SizeMismatch => "size",
            AzClause::IdentityIdempotent => "quasi-hom/idempotent-unit",
            AzClause::Absorption => "quasi-hom/corner-absorption",
            AzClause::Witness => "quasi-hom/corner-inverse",
            AzClause::Coverage => "quasi-hom/coverage",
            AzClause::Relation => "quasi-hom/relation",
            AzClause::Subordination => "glue/subordinate-unit",
            AzClause::Centralizer => "glue/centralizer",
            AzClause::Restriction => "glue/restriction",
            AzClause::NoFactorization => "glue/no-factorization",
            AzClause::Strong => "idempotents/strong",
            AzClause::Complete => "idempotents/complete",
        };
        write!(f, "{s}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AzFinding {
    pub clause: AzClause,
    pub locus: String,
    pub detail: String,
}

impl fmt::Display for AzFinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}: {}", self.clause, self.locus, self.detail)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AzReport {
    pub findings: Vec<AzFinding>,
    /// Set when some chart is the zero map.
    pub zero_chart: bool,
}

impl AzReport {
    pub fn passed(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn has(&self, clause: AzClause) -> bool {
        self.findings.iter().any(|f| f.clause == clause)
    }

    fn push(&mut self, clause: AzClause, locus: impl Into<String>, detail: impl Into<String>) {
        self.findings.push(AzFinding {
            clause,
            locus: locus.into(),
            detail: detail.into(),
        });
    }
}

pub fn check_quasi_hom(chart: &QuasiHomChart) -> AzReport {
    let mut rep = AzReport {
        zero_chart: chart.is_zero_chart(),
        ..AzReport::default()
    };
    let r = chart.size();
    let e = &chart.identity_image;
    let locus = chart.cone.to_string();
    for m in chart.images.values().chain(chart.inverse_witnesses.values()) {
        if m.size() != r {
            rep.push(AzClause::SizeMismatch, locus, format!("expected {r}x{r}"));
            return rep;
        }
    }
    if !e.is_idempotent() {
        rep.push(AzClause::IdentityIdempotent, &locus, format!("{e} is not idempotent"));
    }
    for (g, m) in &chart.images {
        if e.mul(m) != *m || m.mul(e) != *m {
            rep.push(AzClause::Absorption, &locus, format!("image of {g} is not absorbed by {e}"));
        }
    }
    for (g, w) in &chart.inverse_witnesses {
        let Some(m) = chart.images.get(g) else {
            rep.push(AzClause::Witness, &locus, format!("witness for {g}, which has no image"));
            continue;
        };
        if m.mul(w) != *e || w.mul(m) != *e {
            rep.push(AzClause::Witness, &locus, format!("witness for {g} is not a corner inverse"));
        }
    }
    rep
}

/// Checks that any two generator products of length at most `max_len`
/// spelling the same word have the same image.
pub fn check_relations(chart: &QuasiHomChart, max_len: usize) -> AzReport {
    let mut rep = AzReport::default();
    let Some(rank) = chart.images.keys().next().map(ReducedWord::rank) else {
        return rep;
    };
    let factors: Vec<(ReducedWord, &QIMatrix)> = chart
        .images
        .iter()
        .map(|(g, m)| (g.clone(), m))
        .chain(chart.inverse_witnesses.iter().map(|(g, w)| (g.inv(), w)))
        .collect();
    let id = ReducedWord::identity(rank);
    let mut seen: HashMap<ReducedWord, QIMatrix> = HashMap::from([(id.clone(), chart.identity_image.clone())]);
    let mut layer = vec![id];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            let base = seen[w].clone();
            for (f, m) in &factors {
                let v = w.mul(f);
                let val = base.mul(m);
                match seen.get(&v) {
                    Some(prev) if *prev != val => {
                        rep.push(
                            AzClause::Relation,
                            chart.cone.to_string(),
                            format!("two products spelling {v} have different images"),
                        );
                        return rep;
                    }
                    Some(_) => {}
                    None if seen.len() < RELATION_WORD_CAP => {
                        seen.insert(v.clone(), val);
                        next.push(v);
                    }
                    None => {}
                }
            }
        }
        layer = next;
    }
    rep
}

/// Image of an upper-chart generator inside the lower chart.
fn restrict(sys: &AdmissibleSystem, lower: &QuasiHomChart, g: &ReducedWord) -> Result<QIMatrix, AzumayaError> {
    let chart = sys.chart(&lower.cone);
    let idx = chart
        .factorize(g, RESTRICT_FACTORS)
        .ok_or_else(|| AzumayaError::UnknownFactor(g.to_string()))?;
    let f: Vec<ReducedWord> = idx.iter().map(|&k| chart.gens()[k].clone()).collect();
    eval_word(lower, g, &f)
}

pub fn check_gluing_pair(sys: &AdmissibleSystem, upper: &QuasiHomChart, lower: &QuasiHomChart) -> AzReport {
    let mut rep = AzReport::default();
    let locus = format!("{} < {}", lower.cone, upper.cone);
    if upper.size() != lower.size() {
        rep.push(AzClause::SizeMismatch, locus, "charts of different sizes");
        return rep;
    }
    let (es, et) = (&upper.identity_image, &lower.identity_image);
    if !subordinate(et, es) {
        rep.push(AzClause::Subordination, &locus, format!("{et} is not subordinate to {es}"));
    }
    for (g, m) in &upper.images {
        if !m.commutes_with(et) {
            rep.push(AzClause::Centralizer, &locus, format!("image of {g} does not commute with {et}"));
        }
    }
    if lower.is_zero_chart() {
        return rep;
    }
    for (g, m) in &upper.images {
        match restrict(sys, lower, g) {
            Ok(v) => {
                if et.mul(m) != v {
                    rep.push(AzClause::Restriction, &locus, format!("restriction of {g} disagrees"));
                }
            }
            Err(_) => rep.push(
                AzClause::NoFactorization,
                &locus,
                format!("{g} has no factorization of length <= {RESTRICT_FACTORS} in the lower chart"),
            ),
        }
    }
    rep
}

/// Chart for `tau` induced from an upper chart by compressing to the corner
/// of `e_tau`. Generators of the lower chart must factor through the upper
/// chart, directly or via their inverse.
pub fn induce_chart(
    sys: &AdmissibleSystem,
    upper: &QuasiHomChart,
    tau: &ConeId,
    e_tau: &QIMatrix,
) -> Result<QuasiHomChart, AzumayaError> {
    let up = sys.chart(&upper.cone);
    let eval_up = |w: &ReducedWord| -> Option<QIMatrix> {
        let idx = up.factorize(w, RESTRICT_FACTORS)?;
        let f: Vec<ReducedWord> = idx.iter().map(|&k| up.gens()[k].clone()).collect();
        eval_word(upper, w, &f).ok().map(|m| m.compress(e_tau))
    };
    let chart = sys.chart(tau);
    let mut images = BTreeMap::new();
    let mut inverse_witnesses = BTreeMap::new();
    for g in chart.gens() {
        let img = match eval_up(g) {
            Some(m) => m,
            None => {
                let inv = eval_up(&g.inv()).ok_or_else(|| AzumayaError::UnknownFactor(g.to_string()))?;
                inv.corner_inverse(e_tau)
                    .ok_or_else(|| AzumayaError::MorphismInvalid(format!("image of {} is not corner-invertible", g.inv())))?
            }
        };
        if chart.is_unit(g) {
            if let Some(w) = img.corner_inverse(e_tau) {
                inverse_witnesses.insert(g.clone(), w);
            }
        }
        images.insert(g.clone(), img);
    }
    Ok(QuasiHomChart {
        cone: tau.clone(),
        images,
        identity_image: e_tau.clone(),
        inverse_witnesses,
    })
}

#[derive(Clone, Debug)]
pub struct MorphismData {
    pub rank_r: usize,
    pub system: AdmissibleSystem,
    pub charts: BTreeMap<ConeId, QuasiHomChart>,
}

impl MorphismData {
    pub fn idempotents(&self) -> BTreeMap<ConeId, QIMatrix> {
        self.charts
            .iter()
            .map(|(c, q)| (c.clone(), q.identity_image.clone()))
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct MorphismReport {
    pub findings: Vec<AzFinding>,
    pub strong: bool,
    pub complete: bool,
    /// Relations were checked only among products of at most this length.
    pub relation_bound: usize,
}

impl MorphismReport {
    pub fn passed(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn has(&self, clause: AzClause) -> bool {
        self.findings.iter().any(|f| f.clause == clause)
    }
}

pub fn verify_morphism(m: &MorphismData) -> MorphismReport {
    let sys = &m.system;
    let fan = sys.fan();
    let mut findings = Vec::new();
    let mut missing = false;
    for c in fan.faces() {
        let Some(q) = m.charts.get(c) else {
            missing = true;
            findings.push(AzFinding {
                clause: AzClause::Coverage,
                locus: c.to_string(),
                detail: "no chart".into(),
            });
            continue;
        };
        if q.size() != m.rank_r {
            findings.push(AzFinding {
                clause: AzClause::SizeMismatch,
                locus: c.to_string(),
                detail: format!("chart has size {}, expected {}", q.size(), m.rank_r),
            });
            missing = true;
            continue;
        }
        let gens = sys.chart(c).gens();
        for g in gens {
            if !q.images.contains_key(g) {
                findings.push(AzFinding {
                    clause: AzClause::Coverage,
                    locus: c.to_string(),
                    detail: format!("no image for generator {g}"),
                });
            }
        }
        for g in q.images.keys() {
            if !gens.contains(g) {
                findings.push(AzFinding {
                    clause: AzClause::Coverage,
                    locus: c.to_string(),
                    detail: format!("{g} is not a chart generator"),
                });
            }
        }
    }
    if missing {
        return MorphismReport {
            findings,
            strong: false,
            complete: false,
            relation_bound: RELATION_LENGTH,
        };
    }
    let per_chart: Vec<Vec<AzFinding>> = m
        .charts
        .par_iter()
        .map(|(_, q)| {
            let mut f = check_quasi_hom(q).findings;
            if f.is_empty() {
                f.extend(check_relations(q, RELATION_LENGTH).findings);
            }
            f
        })
        .collect();
    findings.extend(per_chart.into_iter().flatten());
    let inc = fan.incidences();
    let per_pair: Vec<Vec<AzFinding>> = inc
        .par_iter()
        .map(|(tau, sigma)| check_gluing_pair(sys, &m.charts[sigma], &m.charts[tau]).findings)
        .collect();
    findings.extend(per_pair.into_iter().flatten());
    let (strong, complete) = match idem_classify(fan, &m.idempotents()) {
        Ok(s) => (s.strong, s.complete),
        Err(e) => {
            findings.push(AzFinding {
                clause: AzClause::IdentityIdempotent,
                locus: "system".into(),
                detail: e.to_string(),
            });
            (false, false)
        }
    };
    if !strong {
        findings.push(AzFinding {
            clause: AzClause::Strong,
            locus: "system".into(),
            detail: "idempotents do not form a strong system".into(),
        });
    } else if !complete {
        findings.push(AzFinding {
            clause: AzClause::Complete,
            locus: "system".into(),
            detail: "reduced idempotents do not sum to the identity".into(),
        });
    }
    MorphismReport {
        findings,
        strong,
        complete,
        relation_bound: RELATION_LENGTH,
    }
}

fn require_valid(m: &MorphismData) -> Result<(), AzumayaError> {
    let rep = verify_morphism(m);
    match rep.findings.first() {
        None => Ok(()),
        Some(f) => Err(AzumayaError::MorphismInvalid(f.to_string())),
    }
}

/// Basis (in row-reduced form) of the unital subalgebra of `M_r` generated
/// by every chart image.
pub fn surrogate_basis(m: &MorphismData) -> Result<Vec<QIMatrix>, AzumayaError> {
    require_valid(m)?;
    let r = m.rank_r;
    let mut seeds = vec![QIMatrix::identity(r)];
    for q in m.charts.values() {
        seeds.push(q.identity_image.clone());
        seeds.extend(q.images.values().cloned());
        seeds.extend(q.inverse_witnesses.values().cloned());
    }
    Ok(span_closure(r, seeds))
}

/// Basis of the algebra generated by `seeds` (which should contain 1).
pub fn span_closure(r: usize, seeds: Vec<QIMatrix>) -> Vec<QIMatrix> {
    let mut basis: Vec<QIMatrix> = Vec::new();
    let mut rows: Vec<Vec<G>> = Vec::new();
    let add = |m: QIMatrix, basis: &mut Vec<QIMatrix>, rows: &mut Vec<Vec<G>>| {
        let mut trial = rows.clone();
        trial.push(m.entries().to_vec());
        if rank(&trial, r * r) > rows.len() {
            rows.push(m.entries().to_vec());
            basis.push(m);
            true
        } else {
            false
        }
    };
    for s in seeds {
        add(s, &mut basis, &mut rows);
    }
    loop {
        let mut grew = false;
        let snapshot = basis.clone();
        for a in &snapshot {
            for b in &snapshot {
                if add(a.mul(b), &mut basis, &mut rows) {
                    grew = true;
                }
            }
        }
        if !grew {
            break;
        }
    }
    let mut red = rows;
    let piv = crate::exactmath::rref(&mut red, r * r);
    red.truncate(piv.len());
    red.into_iter().map(|row| QIMatrix::from_flat(r, row)).collect()
}

/// Generator products of length at most `d`, deduplicated by word, with a
/// factorization for each.
fn chart_words(q: &QuasiHomChart, rank: usize, d: usize) -> Vec<(ReducedWord, Vec<ReducedWord>)> {
    let gens: Vec<ReducedWord> = q.images.keys().cloned().collect();
    let id = ReducedWord::identity(rank);
    let mut seen: BTreeMap<ReducedWord, Vec<ReducedWord>> = BTreeMap::from([(id.clone(), Vec::new())]);
    let mut layer = vec![id];
    for _ in 0..d {
        let mut next = Vec::new();
        for w in &layer {
            let path = seen[w].clone();
            for g in &gens {
                let v = w.mul(g);
                if !seen.contains_key(&v) {
                    let mut p = path.clone();
                    p.push(g.clone());
                    seen.insert(v.clone(), p);
                    next.push(v);
                }
            }
        }
        layer = next;
    }
    seen.into_iter().collect()
}

/// All elements spanned by chart-generator products of length at most `d`
/// that the chart map sends to zero.
pub fn image_kernel_bounded(m: &MorphismData, cone: &ConeId, d: usize) -> Result<BoundedIdeal, AzumayaError> {
    require_valid(m)?;
    let q = m.charts.get(cone).ok_or_else(|| AzumayaError::MissingCone(cone.clone()))?;
    Ok(kernel_of_chart(&m.system, q, d))
}

/// Kernel computation without the global validity gate.
pub fn kernel_of_chart(sys: &AdmissibleSystem, q: &QuasiHomChart, d: usize) -> BoundedIdeal {
    let rank = sys.rank();
    let words = chart_words(q, rank, d);
    let values: Vec<QIMatrix> = words
        .iter()
        .map(|(w, f)| eval_word(q, w, f).expect("generator products"))
        .collect();
    let r2 = q.size() * q.size();
    // rows = matrix entries, columns = words
    let rows: Vec<Vec<G>> = (0..r2)
        .map(|k| values.iter().map(|v| v.entries()[k].clone()).collect())
        .collect();
    let kernel = nullspace(&rows, words.len());
    let generators = kernel
        .into_iter()
        .map(|v| AlgElem::from_terms(rank, words.iter().map(|(w, _)| w.clone()).zip(v)))
        .collect();
    BoundedIdeal {
        rank,
        generators,
        degree_bound: words.iter().map(|(w, _)| w.len()).max().unwrap_or(0),
        domain: WordDomain::Chart(sys.chart(&q.cone).clone()),
    }
}

/// Left action of the chart generators on `C^r`: the pushed-forward module.
pub fn pushforward_action(m: &MorphismData, cone: &ConeId) -> Result<Vec<(ReducedWord, QIMatrix)>, AzumayaError> {
    let q = m.charts.get(cone).ok_or_else(|| AzumayaError::MissingCone(cone.clone()))?;
    Ok(q.images.iter().map(|(g, a)| (g.clone(), a.clone())).collect())
}

/// Result of probing `a` as the image of a coordinate `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct A1Probe {
    pub minpoly: Poly,
    /// Roots in `Q(i)` with the fiber dimension of `M_r` over each.
    pub fibers: Vec<(G, usize)>,
    /// Factor of the minimal polynomial without roots in `Q(i)`.
    pub irreducible_rest: Option<Poly>,
    pub truncated: bool,
}

pub fn a1_probe(a: &QIMatrix) -> A1Probe {
    let r = a.size();
    let minpoly = minimal_polynomial(a);
    let split = roots_in_qi(&minpoly);
    let fibers = split
        .roots
        .iter()
        .map(|l| {
            let shifted = a.sub(&QIMatrix::identity(r).scale(l));
            (l.clone(), r * r - r * shifted.rank())
        })
        .collect();
    let irreducible_rest = (split.residual.degree().unwrap_or(0) > 0).then_some(split.residual);
    A1Probe {
        minpoly,
        fibers,
        irreducible_rest,
        truncated: split.truncated,
    }
}

/// Idempotent template for [`sample_matrix_model`].
#[derive(Clone, Debug)]
pub enum Pattern {
    /// Identity on the reference cone, zero elsewhere.
    Trivial,
    Idempotents(BTreeMap<ConeId, QIMatrix>),
}

fn random_entry(rng: &mut ChaCha8Rng) -> G {
    G::from_parts(rng.gen_range(-3..=3), 1, rng.gen_range(-3..=3), 1)
}

fn random_corner_invertible(rng: &mut ChaCha8Rng, e: &QIMatrix) -> (QIMatrix, QIMatrix) {
    let r = e.size();
    loop {
        let x = QIMatrix::from_flat(r, (0..r * r).map(|_| random_entry(rng)).collect()).compress(e);
        if let Some(w) = x.corner_inverse(e) {
            return (x, w);
        }
    }
}

/// Group representation of the letters inside one reduced corner.
struct BlockRep {
    e: QIMatrix,
    letters: Vec<(QIMatrix, QIMatrix)>,
}

impl BlockRep {
    fn eval(&self, w: &ReducedWord) -> QIMatrix {
        w.letters().iter().fold(self.e.clone(), |acc, &x| {
            let (a, ainv) = &self.letters[x.unsigned_abs() as usize - 1];
            acc.mul(if x > 0 { a } else { ainv })
        })
    }
}

/// Seeded random morphism following `pattern`. Each nonzero reduced corner
/// carries a random representation of the free group; the chart of a cone
/// acts through the corners of its faces, which makes every gluing
/// condition hold by construction.
pub fn sample_matrix_model(
    sys: &AdmissibleSystem,
    r: usize,
    pattern: &Pattern,
    seed: u64,
) -> Result<MorphismData, AzumayaError> {
    let fan = sys.fan();
    let e = match pattern {
        Pattern::Trivial => fan
            .faces()
            .map(|c| {
                let m = if c == fan.reference_cone() { QIMatrix::identity(r) } else { QIMatrix::zero(r) };
                (c.clone(), m)
            })
            .collect(),
        Pattern::Idempotents(e) => e.clone(),
    };
    let idem = idem_classify(fan, &e).map_err(|x| AzumayaError::PatternIncomplete(x.to_string()))?;
    if !idem.complete {
        return Err(AzumayaError::PatternIncomplete(idem.notes.join("; ")));
    }
    if let Some(m) = e.values().find(|m| m.size() != r) {
        return Err(AzumayaError::SizeMismatch { expected: r, got: m.size() });
    }
    let reduced = idem.reduced.expect("complete implies strong");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let blocks: BTreeMap<ConeId, BlockRep> = reduced
        .iter()
        .filter(|(_, m)| !m.is_zero())
        .map(|(c, m)| {
            let letters = (0..sys.rank()).map(|_| random_corner_invertible(&mut rng, m)).collect();
            (c.clone(), BlockRep { e: m.clone(), letters })
        })
        .collect();
    let mut charts = BTreeMap::new();
    for c in fan.faces() {
        let below: Vec<&BlockRep> = blocks
            .iter()
            .filter(|(rho, _)| rho.is_subset_of(c))
            .map(|(_, b)| b)
            .collect();
        let eval = |w: &ReducedWord| below.iter().fold(QIMatrix::zero(r), |s, b| s.add(&b.eval(w)));
        let chart = sys.chart(c);
        let mut images = BTreeMap::new();
        let mut inverse_witnesses = BTreeMap::new();
        for g in chart.gens() {
            images.insert(g.clone(), eval(g));
            if chart.is_unit(g) {
                inverse_witnesses.insert(g.clone(), eval(&g.inv()));
            }
        }
        charts.insert(
            c.clone(),
            QuasiHomChart {
                cone: c.clone(),
                images,
                identity_image: e[c].clone(),
                inverse_witnesses,
            },
        );
    }
    Ok(MorphismData {
        rank_r: r,
        system: sys.clone(),
        charts,
    })
}
