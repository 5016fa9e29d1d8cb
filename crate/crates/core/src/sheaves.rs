//! Invertible sheaves as gluing data on a Δ-system, the divisor pipeline,
//! polytope and twisted sections, and ideal data of subschemes cut out by
//! sections.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::deltasystem::{soften, AdmissibleSystem, ExtraMap, SofteningRecord, SystemError};
use crate::exactmath::{int_q, projection_bounds, GaussRational as G, Inequality, Relation};
use crate::freeword::ReducedWord;
use crate::ncalgebra::{AlgElem, BoundedIdeal, WordDomain};
use crate::toricfan::{comm_monoid_member, dual_generators, vec_sub, ConeId, Fan, MVector};

/// Integer coefficient per ray.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivisorData {
    pub coefficients: Vec<i64>,
}

impl DivisorData {
    pub fn new(coefficients: Vec<i64>) -> Self {
        DivisorData { coefficients }
    }

    pub fn zero(fan: &Fan) -> Self {
        DivisorData::new(vec![0; fan.rays().len()])
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MSigmaAssignment {
    pub m: BTreeMap<ConeId, MVector>,
    /// Maximal cone each lower cone copies its vector from.
    pub cover: BTreeMap<ConeId, ConeId>,
}

/// Scalar and word attached to an incidence `τ ≺ σ`, keyed `(σ, τ)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GluingData {
    pub system_digest: String,
    pub rank: usize,
    pub pairs: BTreeMap<(ConeId, ConeId), (G, ReducedWord)>,
}

impl GluingData {
    /// All scalars 1 and all words trivial.
    pub fn trivial(sys: &AdmissibleSystem) -> Self {
        let pairs = sys
            .fan()
            .incidences()
            .into_iter()
            .map(|(t, s)| ((s, t), (G::one(), ReducedWord::identity(sys.rank()))))
            .collect();
        GluingData {
            system_digest: sys.digest(),
            rank: sys.rank(),
            pairs,
        }
    }

    pub fn get(&self, sigma: &ConeId, tau: &ConeId) -> Option<&(G, ReducedWord)> {
        self.pairs.get(&(sigma.clone(), tau.clone()))
    }

    /// Same data, declared to live on `sys` (for softenings of the original).
    pub fn pulled_back_to(&self, sys: &AdmissibleSystem) -> GluingData {
        GluingData {
            system_digest: sys.digest(),
            ..self.clone()
        }
    }
}

/// Per-cone presentations of a twisted section.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwistedSectionData {
    pub system_digest: String,
    pub rank: usize,
    pub presentations: BTreeMap<ConeId, AlgElem>,
}

impl TwistedSectionData {
    pub fn pulled_back_to(&self, sys: &AdmissibleSystem) -> TwistedSectionData {
        TwistedSectionData {
            system_digest: sys.digest(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SheafError {
    #[error(transparent)]
    System(#[from] SystemError),
    #[error("divisor has {got} coefficients for {rays} rays")]
    DivisorLength { got: usize, rays: usize },
    #[error("candidate for cone {cone} is not admissible: {reason}")]
    CandidateNotUnit { cone: ConeId, reason: String },
    #[error("the polytope is unbounded in coordinate {0}")]
    UnboundedPolytope(usize),
    #[error("{mprime:?} is not a section: it leaves the dual cone of {cone}")]
    NotASection { mprime: MVector, cone: ConeId },
    #[error("data lives on a different system ({found} vs {expected})")]
    MismatchedSystems { expected: String, found: String },
    #[error("no presentation for cone {0}")]
    MissingCone(ConeId),
}

/// Labels of the conditions checked on gluing data and sections.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SheafClause {
    /// Every incidence carries data.
    Coverage,
    /// The transition word is a unit of the lower chart.
    TransitionUnit,
    /// The transition word abelianizes into `τ^⊥`.
    TransitionPerp,
    /// Scalar part of the cocycle identity.
    CocycleScalar,
    /// Word part of the cocycle identity.
    CocycleWord,
    /// Transition scalars are nonzero.
    NonzeroScalar,
    /// Data was produced for this system.
    SameSystem,
    /// Local presentations use chart words only.
    PresentationInChart,
    /// Restricted presentations agree up to a unit.
    TwistedAgreement,
}

impl fmt::Display for SheafClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SheafClause::Coverage => "gluing/coverage",
            SheafClause::TransitionUnit => "gluing/transition-unit",
            SheafClause::TransitionPerp => "gluing/transition-perp",
            SheafClause::CocycleScalar => "gluing/cocycle-scalar",
            SheafClause::CocycleWord => "gluing/cocycle-word",
            SheafClause::NonzeroScalar => "gluing/nonzero-scalar",
            SheafClause::SameSystem => "same-system",
            SheafClause::PresentationInChart => "section/presentation-in-chart",
            SheafClause::TwistedAgreement => "section/twisted-agreement",
        };
        write!(f, "{s}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SheafFinding {
    pub clause: SheafClause,
    pub locus: String,
    pub detail: String,
}

impl fmt::Display for SheafFinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}: {}", self.clause, self.locus, self.detail)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SheafReport {
    pub findings: Vec<SheafFinding>,
}

impl SheafReport {
    pub fn passed(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn has(&self, clause: SheafClause) -> bool {
        self.findings.iter().any(|f| f.clause == clause)
    }
}

fn pair_locus(sigma: &ConeId, tau: &ConeId) -> String {
    format!("{tau} < {sigma}")
}

fn same_system(digest: &str, sys: &AdmissibleSystem) -> Option<SheafFinding> {
    (digest != sys.digest()).then(|| SheafFinding {
        clause: SheafClause::SameSystem,
        locus: "system".into(),
        detail: format!("data built for system {digest}, checked against {}", sys.digest()),
    })
}

pub fn check_gluing(sys: &AdmissibleSystem, g: &GluingData) -> SheafReport {
    let fan = sys.fan();
    let mut findings: Vec<SheafFinding> = same_system(&g.system_digest, sys).into_iter().collect();
    let incidences = fan.incidences();
    let per_pair: Vec<Vec<SheafFinding>> = incidences
        .par_iter()
        .map(|(tau, sigma)| {
            let mut out = Vec::new();
            let locus = pair_locus(sigma, tau);
            let Some((c, w)) = g.get(sigma, tau) else {
                out.push(SheafFinding {
                    clause: SheafClause::Coverage,
                    locus,
                    detail: "no transition data".into(),
                });
                return out;
            };
            if c.is_zero() {
                out.push(SheafFinding {
                    clause: SheafClause::NonzeroScalar,
                    locus: locus.clone(),
                    detail: "scalar is zero".into(),
                });
            }
            if w.rank() != sys.rank() || !sys.chart(tau).is_unit(w) {
                out.push(SheafFinding {
                    clause: SheafClause::TransitionUnit,
                    locus: locus.clone(),
                    detail: format!("{w} is not a unit of the chart of {tau}"),
                });
            }
            if w.rank() == sys.rank() && !fan.in_perp(tau, &w.abelianize()) {
                out.push(SheafFinding {
                    clause: SheafClause::TransitionPerp,
                    locus,
                    detail: format!("{w} abelianizes to {:?}", w.abelianize()),
                });
            }
            out
        })
        .collect();
    findings.extend(per_pair.into_iter().flatten());
    let chains = fan.chains();
    let per_chain: Vec<Vec<SheafFinding>> = chains
        .par_iter()
        .map(|(rho, tau, sigma)| {
            let mut out = Vec::new();
            let (Some((c_st, w_st)), Some((c_tr, w_tr)), Some((c_sr, w_sr))) =
                (g.get(sigma, tau), g.get(tau, rho), g.get(sigma, rho))
            else {
                return out;
            };
            let locus = format!("{rho} < {tau} < {sigma}");
            if *c_sr != c_st * c_tr {
                out.push(SheafFinding {
                    clause: SheafClause::CocycleScalar,
                    locus: locus.clone(),
                    detail: format!("{c_sr} != {c_st} * {c_tr}"),
                });
            }
            if w_st.rank() == w_tr.rank() && *w_sr != w_st.mul(w_tr) {
                out.push(SheafFinding {
                    clause: SheafClause::CocycleWord,
                    locus,
                    detail: format!("{w_sr} != ({w_st})({w_tr})"),
                });
            }
            out
        })
        .collect();
    findings.extend(per_chain.into_iter().flatten());
    SheafReport { findings }
}

/// Local rescaling per cone: `(c_σ, w̆_σ)`.
pub type Trivialization = BTreeMap<ConeId, (G, ReducedWord)>;

/// Whether `candidate` carries `g1` to `g2`, i.e.
/// `c'_{στ} = c_σ^{-1} c_{στ} c_τ` and `w̆'_{στ} = w̆_σ^{-1} w̆_{στ} w̆_τ`.
pub fn sheaves_isomorphic(
    sys: &AdmissibleSystem,
    g1: &GluingData,
    g2: &GluingData,
    candidate: &Trivialization,
) -> Result<bool, SheafError> {
    let fan = sys.fan();
    for c in fan.faces() {
        let (k, w) = candidate
            .get(c)
            .ok_or_else(|| SheafError::CandidateNotUnit {
                cone: c.clone(),
                reason: "missing".into(),
            })?;
        if k.is_zero() {
            return Err(SheafError::CandidateNotUnit {
                cone: c.clone(),
                reason: "zero scalar".into(),
            });
        }
        if w.rank() != sys.rank() || !fan.in_perp(c, &w.abelianize()) {
            return Err(SheafError::CandidateNotUnit {
                cone: c.clone(),
                reason: format!("{w} does not abelianize into the perpendicular lattice"),
            });
        }
        if !sys.chart(c).is_unit(w) {
            return Err(SheafError::CandidateNotUnit {
                cone: c.clone(),
                reason: format!("{w} is not a unit of the chart"),
            });
        }
    }
    for (tau, sigma) in fan.incidences() {
        let (Some((c1, w1)), Some((c2, w2))) = (g1.get(&sigma, &tau), g2.get(&sigma, &tau)) else {
            return Ok(false);
        };
        let (cs, ws) = &candidate[&sigma];
        let (ct, wt) = &candidate[&tau];
        let want_c = &(&cs.inv().expect("nonzero") * c1) * ct;
        let want_w = ws.inv().mul(w1).mul(wt);
        if *c2 != want_c || *w2 != want_w {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Abelian shadow of the isomorphism problem. A candidate must have trivial
/// words on maximal cones, which forces `π(w̆_τ)` on every lower cone; when
/// the forced values disagree no candidate exists at all. Returns a
/// description of the clash, or `None` when the shadow is consistent.
pub fn abelian_obstruction(sys: &AdmissibleSystem, g1: &GluingData, g2: &GluingData) -> Option<String> {
    let fan = sys.fan();
    let mut forced: BTreeMap<ConeId, MVector> = BTreeMap::new();
    for m in fan.max_cones() {
        forced.insert(m.clone(), vec![0; sys.rank()]);
    }
    for tau in fan.faces_by_dim_desc() {
        for sigma in fan.maximal_cones_containing(&tau) {
            if sigma == tau {
                continue;
            }
            let (Some((_, w1)), Some((_, w2))) = (g1.get(&sigma, &tau), g2.get(&sigma, &tau)) else {
                return Some(format!("missing data on {}", pair_locus(&sigma, &tau)));
            };
            // π(w2) = -π(w_σ) + π(w1) + π(w_τ)
            let v = vec_sub(&w2.abelianize(), &w1.abelianize());
            match forced.get(&tau) {
                Some(prev) if *prev != v => {
                    return Some(format!(
                        "cone {tau}: forced vectors {prev:?} and {v:?} disagree"
                    ))
                }
                _ => {
                    forced.insert(tau.clone(), v);
                }
            }
        }
        if let Some(v) = forced.get(&tau) {
            if !fan.in_perp(&tau, v) {
                return Some(format!("cone {tau}: forced vector {v:?} leaves the perpendicular lattice"));
            }
        }
    }
    for (tau, sigma) in fan.incidences() {
        let (Some((_, w1)), Some((_, w2))) = (g1.get(&sigma, &tau), g2.get(&sigma, &tau)) else {
            return Some(format!("missing data on {}", pair_locus(&sigma, &tau)));
        };
        let lhs = w2.abelianize();
        let rhs: MVector = w1
            .abelianize()
            .iter()
            .zip(&forced[&tau])
            .zip(&forced[&sigma])
            .map(|((a, t), s)| a + t - s)
            .collect();
        if lhs != rhs {
            return Some(format!("incidence {} has no abelian solution", pair_locus(&sigma, &tau)));
        }
    }
    None
}

pub fn m_sigma_assignment(fan: &Fan, d: &DivisorData) -> Result<MSigmaAssignment, SheafError> {
    if d.coefficients.len() != fan.rays().len() {
        return Err(SheafError::DivisorLength {
            got: d.coefficients.len(),
            rays: fan.rays().len(),
        });
    }
    let mut m = BTreeMap::new();
    let mut cover = BTreeMap::new();
    for sigma in fan.max_cones() {
        let u = dual_generators(fan, sigma).map_err(SystemError::from)?;
        let mut v = vec![0i64; fan.rank()];
        for (uj, &r) in u.iter().zip(sigma.rays()) {
            for (x, y) in v.iter_mut().zip(uj) {
                *x -= d.coefficients[r] * y;
            }
        }
        m.insert(sigma.clone(), v);
    }
    for tau in fan.faces() {
        if fan.is_maximal(tau) {
            continue;
        }
        let s = fan.maximal_cones_containing(tau)[0].clone();
        m.insert(tau.clone(), m[&s].clone());
        cover.insert(tau.clone(), s);
    }
    Ok(MSigmaAssignment { m, cover })
}

/// Output of [`sheaf_from_divisor`].
#[derive(Clone, Debug)]
pub struct DivisorSheaf {
    pub system: AdmissibleSystem,
    pub record: SofteningRecord,
    pub gluing: GluingData,
    pub m: MSigmaAssignment,
}

fn push_extra(extra: &mut ExtraMap, sys: &AdmissibleSystem, tau: &ConeId, w: ReducedWord) {
    if sys.chart(tau).member(&w) {
        return;
    }
    let slot = extra.entry(tau.clone()).or_default();
    if !slot.contains(&w) {
        slot.push(w);
    }
}

pub fn sheaf_from_divisor(sys: &AdmissibleSystem, d: &DivisorData) -> Result<DivisorSheaf, SheafError> {
    let fan = sys.fan();
    let m = m_sigma_assignment(fan, d)?;
    let lift = |c: &ConeId| ReducedWord::canonical_lift(&m.m[c]);
    let mut pairs = BTreeMap::new();
    let mut extra = ExtraMap::new();
    for (tau, sigma) in fan.incidences() {
        let w = lift(&sigma).inv().mul(&lift(&tau));
        push_extra(&mut extra, sys, &tau, w.clone());
        push_extra(&mut extra, sys, &tau, w.inv());
        pairs.insert((sigma, tau), (G::one(), w));
    }
    let (system, record) = soften(sys, &extra)?;
    let gluing = GluingData {
        system_digest: system.digest(),
        rank: sys.rank(),
        pairs,
    };
    Ok(DivisorSheaf {
        system,
        record,
        gluing,
        m,
    })
}

/// Lattice points of `{u : ⟨u, v_ρ⟩ ≥ -a_ρ}`, sorted.
pub fn polytope_sections(fan: &Fan, d: &DivisorData) -> Result<Vec<MVector>, SheafError> {
    if d.coefficients.len() != fan.rays().len() {
        return Err(SheafError::DivisorLength {
            got: d.coefficients.len(),
            rays: fan.rays().len(),
        });
    }
    let n = fan.rank();
    let sys: Vec<Inequality> = fan
        .rays()
        .iter()
        .zip(&d.coefficients)
        .map(|(v, &a)| {
            Inequality::new(v.iter().map(|&x| int_q(x)).collect(), int_q(-a), Relation::Ge)
        })
        .collect();
    let mut ranges = Vec::with_capacity(n);
    for k in 0..n {
        let Some((lo, hi)) = projection_bounds(n, &sys, k) else {
            return Ok(Vec::new());
        };
        let (Some(lo), Some(hi)) = (lo, hi) else {
            return Err(SheafError::UnboundedPolytope(k));
        };
        let lo: i64 = lo.ceil().to_integer().try_into().expect("small bound");
        let hi: i64 = hi.floor().to_integer().try_into().expect("small bound");
        ranges.push(lo..=hi);
    }
    let mut out = vec![Vec::new()];
    for r in ranges {
        out = out
            .into_iter()
            .flat_map(|p: Vec<i64>| {
                r.clone().map(move |x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    out.retain(|u| {
        fan.rays()
            .iter()
            .zip(&d.coefficients)
            .all(|(v, &a)| crate::toricfan::pairing(u, v) >= -a)
    });
    Ok(out)
}

/// Output of [`extend_section`].
#[derive(Clone, Debug)]
pub struct ExtendedSection {
    pub system: AdmissibleSystem,
    pub record: SofteningRecord,
    pub section: TwistedSectionData,
    /// The input gluing data, re-tagged for the softened system.
    pub gluing: GluingData,
}

/// Word `r̆_σ` in the chart of `σ` abelianizing to `target`, as a product of
/// lifted generators taken in generator order.
fn lift_to_chart(sys: &AdmissibleSystem, sigma: &ConeId, target: &[i64]) -> Option<ReducedWord> {
    let table = sys.lift_table(sigma);
    let ms: Vec<MVector> = table.iter().map(|e| e.m.clone()).collect();
    let (words, coeffs) = match comm_monoid_member(&ms, target).ok().flatten() {
        Some(c) => (table.iter().map(|e| e.word.clone()).collect::<Vec<_>>(), c),
        None => {
            let gens = sys.chart(sigma).gens().to_vec();
            let ab: Vec<MVector> = gens.iter().map(ReducedWord::abelianize).collect();
            let c = comm_monoid_member(&ab, target).ok().flatten()?;
            (gens, c)
        }
    };
    let mut r = ReducedWord::identity(sys.rank());
    for (w, &k) in words.iter().zip(&coeffs) {
        r = r.mul(&w.pow(k as i64));
    }
    Some(r)
}

pub fn extend_section(
    sys: &AdmissibleSystem,
    g: &GluingData,
    m: &MSigmaAssignment,
    mprime: &[i64],
) -> Result<ExtendedSection, SheafError> {
    if g.system_digest != sys.digest() {
        return Err(SheafError::MismatchedSystems {
            expected: sys.digest(),
            found: g.system_digest.clone(),
        });
    }
    let fan = sys.fan();
    let mut r: BTreeMap<ConeId, ReducedWord> = BTreeMap::new();
    for sigma in fan.faces() {
        let t = vec_sub(mprime, &m.m[sigma]);
        if !fan.in_dual(sigma, &t) {
            return Err(SheafError::NotASection {
                mprime: mprime.to_vec(),
                cone: sigma.clone(),
            });
        }
        let w = lift_to_chart(sys, sigma, &t).ok_or_else(|| SheafError::NotASection {
            mprime: mprime.to_vec(),
            cone: sigma.clone(),
        })?;
        r.insert(sigma.clone(), w);
    }
    let mut extra = ExtraMap::new();
    for (tau, sigma) in fan.incidences() {
        let (_, w) = g.get(&sigma, &tau).ok_or_else(|| SheafError::MissingCone(tau.clone()))?;
        let q = r[&sigma].mul(w).mul(&r[&tau].inv());
        push_extra(&mut extra, sys, &tau, q.clone());
        push_extra(&mut extra, sys, &tau, q.inv());
    }
    let (system, record) = soften(sys, &extra)?;
    let section = TwistedSectionData {
        system_digest: system.digest(),
        rank: sys.rank(),
        presentations: r.iter().map(|(c, w)| (c.clone(), AlgElem::word(w))).collect(),
    };
    Ok(ExtendedSection {
        gluing: g.pulled_back_to(&system),
        system,
        record,
        section,
    })
}

/// Unit `c·u` of the chart of `τ` with `h = c·u·s`, found from monomial pairs.
pub fn relating_unit(
    sys: &AdmissibleSystem,
    tau: &ConeId,
    h: &AlgElem,
    s: &AlgElem,
) -> Option<(G, ReducedWord)> {
    if h.is_zero() && s.is_zero() {
        return Some((G::one(), ReducedWord::identity(sys.rank())));
    }
    let (wb, cb) = s.terms().iter().next()?;
    for (wa, ca) in h.terms() {
        let c = ca.checked_div(cb)?;
        let u = wa.mul(&wb.inv());
        if !sys.chart(tau).is_unit(&u) {
            continue;
        }
        if &AlgElem::monomial(c.clone(), &u) * s == *h {
            return Some((c, u));
        }
    }
    None
}

pub fn check_twisted_section(sys: &AdmissibleSystem, g: &GluingData, s: &TwistedSectionData) -> SheafReport {
    let fan = sys.fan();
    let mut findings: Vec<SheafFinding> = same_system(&s.system_digest, sys)
        .into_iter()
        .chain(same_system(&g.system_digest, sys))
        .collect();
    for c in fan.faces() {
        match s.presentations.get(c) {
            None => findings.push(SheafFinding {
                clause: SheafClause::Coverage,
                locus: c.to_string(),
                detail: "no presentation".into(),
            }),
            Some(p) => {
                if p.rank() != sys.rank() {
                    findings.push(SheafFinding {
                        clause: SheafClause::PresentationInChart,
                        locus: c.to_string(),
                        detail: "rank mismatch".into(),
                    });
                    continue;
                }
                for w in p.words() {
                    if !sys.chart(c).member(w) {
                        findings.push(SheafFinding {
                            clause: SheafClause::PresentationInChart,
                            locus: c.to_string(),
                            detail: format!("{w} is not in the chart"),
                        });
                    }
                }
            }
        }
    }
    if !findings.is_empty() {
        return SheafReport { findings };
    }
    let incidences = fan.incidences();
    let per_pair: Vec<Option<SheafFinding>> = incidences
        .par_iter()
        .map(|(tau, sigma)| {
            let locus = pair_locus(sigma, tau);
            let Some((c, w)) = g.get(sigma, tau) else {
                return Some(SheafFinding {
                    clause: SheafClause::Coverage,
                    locus,
                    detail: "no transition data".into(),
                });
            };
            let h = &s.presentations[sigma] * &AlgElem::monomial(c.clone(), w);
            match relating_unit(sys, tau, &h, &s.presentations[tau]) {
                Some(_) => None,
                None => Some(SheafFinding {
                    clause: SheafClause::TwistedAgreement,
                    locus,
                    detail: format!(
                        "no unit u of the lower chart with ({h}) = u·({})",
                        s.presentations[tau]
                    ),
                }),
            }
        })
        .collect();
    findings.extend(per_pair.into_iter().flatten());
    SheafReport { findings }
}

/// `Σ c_i s_i` chart by chart. Sections must share a system.
pub fn combine_sections(
    coeffs: &[G],
    sections: &[TwistedSectionData],
) -> Result<TwistedSectionData, SheafError> {
    let first = sections.first().expect("at least one section");
    for s in sections {
        if s.system_digest != first.system_digest {
            return Err(SheafError::MismatchedSystems {
                expected: first.system_digest.clone(),
                found: s.system_digest.clone(),
            });
        }
    }
    let mut presentations = BTreeMap::new();
    for c in first.presentations.keys() {
        let mut acc = AlgElem::zero(first.rank);
        for (k, s) in coeffs.iter().zip(sections) {
            let p = s.presentations.get(c).ok_or_else(|| SheafError::MissingCone(c.clone()))?;
            acc = &acc + &p.scale(k);
        }
        presentations.insert(c.clone(), acc);
    }
    Ok(TwistedSectionData {
        system_digest: first.system_digest.clone(),
        rank: first.rank,
        presentations,
    })
}

/// Per-cone two-sided ideals generated by the presentations of the given
/// sections, in the chart algebra, explored to `extra_bound` beyond the
/// longest generator.
pub fn subscheme_from_sections(
    sys: &AdmissibleSystem,
    sections: &[TwistedSectionData],
    extra_bound: usize,
) -> Result<BTreeMap<ConeId, BoundedIdeal>, SheafError> {
    for s in sections {
        if s.system_digest != sys.digest() {
            return Err(SheafError::MismatchedSystems {
                expected: sys.digest(),
                found: s.system_digest.clone(),
            });
        }
    }
    let mut out = BTreeMap::new();
    for c in sys.fan().faces() {
        let gens: Vec<AlgElem> = sections
            .iter()
            .map(|s| s.presentations.get(c).cloned().ok_or_else(|| SheafError::MissingCone(c.clone())))
            .collect::<Result<_, _>>()?;
        let d = gens.iter().map(AlgElem::max_len).max().unwrap_or(0) + extra_bound;
        out.insert(
            c.clone(),
            BoundedIdeal {
                rank: sys.rank(),
                generators: gens,
                degree_bound: d,
                domain: WordDomain::Chart(sys.chart(c).clone()),
            },
        );
    }
    Ok(out)
}

/// Extends every lattice point of the divisor polytope in turn, softening
/// as needed, and returns all sections over the final system.
pub fn all_polytope_sections(
    sys: &AdmissibleSystem,
    d: &DivisorData,
) -> Result<(DivisorSheaf, Vec<(MVector, TwistedSectionData)>), SheafError> {
    let mut sheaf = sheaf_from_divisor(sys, d)?;
    let points = polytope_sections(sys.fan(), d)?;
    let mut sections: Vec<(MVector, TwistedSectionData)> = Vec::new();
    for p in points {
        let ext = extend_section(&sheaf.system, &sheaf.gluing, &sheaf.m, &p)?;
        sheaf.record = sheaf.record.then(&ext.record);
        sheaf.system = ext.system;
        sheaf.gluing = ext.gluing;
        for (_, s) in sections.iter_mut() {
            *s = s.pulled_back_to(&sheaf.system);
        }
        sections.push((p, ext.section));
    }
    Ok((sheaf, sections))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deltasystem::build_system;
    use crate::ncalgebra::abelianize_elem;
    use crate::toricfan::{validate_fan, RawFan};

    fn p2() -> Fan {
        validate_fan(&RawFan {
            rank: 2,
            rays: vec![vec![1, 0], vec![0, 1], vec![-1, -1]],
            max_cones: vec![vec![0, 1], vec![1, 2], vec![0, 2]],
            certificates: vec![],
        })
        .unwrap()
    }

    fn p1() -> Fan {
        validate_fan(&RawFan {
            rank: 1,
            rays: vec![vec![1], vec![-1]],
            max_cones: vec![vec![0], vec![1]],
            certificates: vec![],
        })
        .unwrap()
    }

    #[test]
    fn trivial_gluing_passes() {
        let s = build_system(&p2(), None).unwrap();
        assert!(check_gluing(&s, &GluingData::trivial(&s)).passed());
    }

    #[test]
    fn zero_divisor_is_trivial() {
        let s = build_system(&p2(), None).unwrap();
        let out = sheaf_from_divisor(&s, &DivisorData::zero(s.fan())).unwrap();
        assert!(out.record.is_empty());
        assert_eq!(out.gluing, GluingData::trivial(&s));
    }

    #[test]
    fn o1_on_p2() {
        let s = build_system(&p2(), None).unwrap();
        let out = sheaf_from_divisor(&s, &DivisorData::new(vec![0, 0, 1])).unwrap();
        assert_eq!(out.m.m[&ConeId::new(vec![0, 1])], vec![0, 0]);
        assert!(check_gluing(&out.system, &out.gluing).passed());
        for ((sigma, tau), (_, w)) in &out.gluing.pairs {
            assert!(out.system.fan().in_perp(tau, &w.abelianize()), "{sigma} {tau}");
        }
        let mut bad = out.gluing.clone();
        let key = bad.pairs.keys().find(|(s, t)| s.dim() == 2 && t.dim() == 1).unwrap().clone();
        bad.pairs.get_mut(&key).unwrap().0 = G::from(2);
        let rep = check_gluing(&out.system, &bad);
        assert!(rep.has(SheafClause::CocycleScalar));
    }

    #[test]
    fn p1_transitions() {
        let s = build_system(&p1(), None).unwrap();
        for k in 1..4 {
            let out = sheaf_from_divisor(&s, &DivisorData::new(vec![k, 0])).unwrap();
            let (_, w) = out.gluing.get(&ConeId::new(vec![0]), &ConeId::zero()).unwrap();
            let (_, w2) = out.gluing.get(&ConeId::new(vec![1]), &ConeId::zero()).unwrap();
            assert_eq!(w.abelianize(), vec![0]);
            assert_eq!(w2.abelianize(), vec![-k]);
        }
    }

    #[test]
    fn polytope_counts() {
        let f = p2();
        assert_eq!(polytope_sections(&f, &DivisorData::new(vec![0, 0, 1])).unwrap().len(), 3);
        assert_eq!(polytope_sections(&f, &DivisorData::new(vec![0, 0, 3])).unwrap().len(), 10);
        assert!(polytope_sections(&f, &DivisorData::new(vec![-5, 0, 0])).unwrap().is_empty());
        let single = validate_fan(&RawFan {
            rank: 2,
            rays: vec![vec![1, 0], vec![0, 1]],
            max_cones: vec![vec![0, 1]],
            certificates: vec![],
        })
        .unwrap();
        assert!(matches!(
            polytope_sections(&single, &DivisorData::new(vec![0, 0])),
            Err(SheafError::UnboundedPolytope(_))
        ));
    }

    #[test]
    fn sections_of_o1() {
        let s = build_system(&p2(), None).unwrap();
        let d = DivisorData::new(vec![0, 0, 1]);
        let (sheaf, secs) = all_polytope_sections(&s, &d).unwrap();
        assert_eq!(secs.len(), 3);
        for (p, sec) in &secs {
            assert!(check_twisted_section(&sheaf.system, &sheaf.gluing, sec).passed());
            for (c, r) in &sec.presentations {
                let ab = abelianize_elem(r);
                let want = vec_sub(p, &sheaf.m.m[c]);
                assert_eq!(ab.len(), 1);
                assert_eq!(ab[&want], G::one());
            }
        }
        for sigma in sheaf.system.fan().max_cones() {
            assert_eq!(sheaf.system.chart(sigma).gens(), s.chart(sigma).gens());
        }
    }

    #[test]
    fn perturbed_sections() {
        let s = build_system(&p2(), None).unwrap();
        let d = DivisorData::new(vec![0, 0, 1]);
        let (sheaf, secs) = all_polytope_sections(&s, &d).unwrap();
        let (_, sec) = &secs[1];
        let tau = ConeId::new(vec![1]);
        let mut doubled = sec.clone();
        let p = doubled.presentations[&tau].scale(&G::from(2));
        doubled.presentations.insert(tau.clone(), p);
        assert!(check_twisted_section(&sheaf.system, &sheaf.gluing, &doubled).passed());
        let mut shifted = sec.clone();
        let p = &shifted.presentations[&tau] + &AlgElem::one(2);
        shifted.presentations.insert(tau, p);
        let rep = check_twisted_section(&sheaf.system, &sheaf.gluing, &shifted);
        assert!(rep.has(SheafClause::TwistedAgreement) || rep.has(SheafClause::PresentationInChart));
    }

    #[test]
    fn isomorphism_by_rescaling() {
        let s = build_system(&p2(), None).unwrap();
        let out = sheaf_from_divisor(&s, &DivisorData::new(vec![0, 0, 1])).unwrap();
        let id: Trivialization = out
            .system
            .fan()
            .faces()
            .map(|c| (c.clone(), (G::one(), ReducedWord::identity(2))))
            .collect();
        assert!(sheaves_isomorphic(&out.system, &out.gluing, &out.gluing, &id).unwrap());
        let by_i: Trivialization = id.keys().map(|c| (c.clone(), (G::i(), ReducedWord::identity(2)))).collect();
        assert!(sheaves_isomorphic(&out.system, &out.gluing, &out.gluing, &by_i).unwrap());
        let o2 = sheaf_from_divisor(&out.system, &DivisorData::new(vec![0, 0, 2])).unwrap();
        let g1 = out.gluing.pulled_back_to(&o2.system);
        assert!(abelian_obstruction(&o2.system, &g1, &o2.gluing).is_some());
        assert!(abelian_obstruction(&o2.system, &o2.gluing, &o2.gluing).is_none());
    }
}
