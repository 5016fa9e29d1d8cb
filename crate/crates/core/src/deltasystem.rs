//! Inverse Δ-systems of admissible submonoids: construction from a fan,
//! completion from maximal charts, augmentation, softening and admissibility
//! checking.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::freeword::{ReducedWord, SubmonoidFG};
use crate::toricfan::{
    comm_monoid_member, dual_generators, monoid_generators_with_units, ConeId, Fan, FanError,
    MVector,
};

/// Where a chart generator came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    /// Lift of a dual generator of a maximal cone.
    MaximalLift,
    /// Supplied maximal chart.
    Completion,
    /// Generator of the maximal chart over the cone.
    CoverUnion(ConeId),
    /// Inverse of a generator abelianizing into `τ^⊥`.
    PerpInverse,
    /// Letter generator of the full group at the zero cone.
    ZeroConeLetter,
    /// Word supplied as an augmentation extra.
    Extra,
    /// Inverse adjoined during augmentation.
    AugmentInverse,
    /// Generator inherited from an augmented cone one dimension up.
    CoverInherit(ConeId),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvenanceEntry {
    pub cone: ConeId,
    pub word: ReducedWord,
    pub source: Provenance,
}

/// Lift of one generator of `M_τ` to a chart word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftEntry {
    pub m: MVector,
    pub word: ReducedWord,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdmissibleSystem {
    fan: Fan,
    charts: BTreeMap<ConeId, SubmonoidFG>,
    lift_table: BTreeMap<ConeId, Vec<LiftEntry>>,
    provenance: Vec<ProvenanceEntry>,
}

/// Generators added to each cone by a softening.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SofteningRecord {
    pub added: BTreeMap<ConeId, Vec<ReducedWord>>,
    pub invariant_charts: Vec<ConeId>,
}

impl SofteningRecord {
    pub fn is_empty(&self) -> bool {
        self.added.values().all(Vec::is_empty)
    }

    /// Record of two softenings applied in sequence.
    pub fn then(&self, later: &SofteningRecord) -> SofteningRecord {
        let mut added = self.added.clone();
        for (c, ws) in &later.added {
            let slot = added.entry(c.clone()).or_default();
            for w in ws {
                if !slot.contains(w) {
                    slot.push(w.clone());
                }
            }
        }
        SofteningRecord {
            added,
            invariant_charts: self.invariant_charts.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SystemError {
    #[error(transparent)]
    Fan(#[from] FanError),
    #[error("lift {index} of cone {cone} abelianizes to {got:?}, expected {expected:?}")]
    BadLift {
        cone: ConeId,
        index: usize,
        expected: MVector,
        got: MVector,
    },
    #[error("wrong number of lifts for cone {cone}: {got}")]
    LiftCount { cone: ConeId, got: usize },
    #[error("no chart supplied for maximal cone {0}")]
    MissingMaximalChart(ConeId),
    #[error("chart for {cone} is not admissible: {detail}")]
    NotAdmissibleInput { cone: ConeId, detail: String },
    #[error("extra word {word} for cone {cone} abelianizes outside the dual cone")]
    ExtraOutsideDualCone { cone: ConeId, word: ReducedWord },
    #[error("softening may not touch maximal cone {0}")]
    MaximalChartTouched(ConeId),
    #[error("word {word} has rank {got}, expected {expected}")]
    RankMismatch {
        word: ReducedWord,
        got: usize,
        expected: usize,
    },
}

struct Builder {
    charts: BTreeMap<ConeId, Vec<ReducedWord>>,
    provenance: Vec<ProvenanceEntry>,
}

impl Builder {
    fn new() -> Self {
        Builder {
            charts: BTreeMap::new(),
            provenance: Vec::new(),
        }
    }

    fn push(&mut self, cone: &ConeId, w: ReducedWord, source: Provenance) -> bool {
        let slot = self.charts.entry(cone.clone()).or_default();
        if slot.contains(&w) {
            return false;
        }
        slot.push(w.clone());
        self.provenance.push(ProvenanceEntry {
            cone: cone.clone(),
            word: w,
            source,
        });
        true
    }

    /// Adjoins inverses of every current generator lying over `τ^⊥`.
    fn close_perp(&mut self, fan: &Fan, cone: &ConeId, source: Provenance) {
        let gens = self.charts.get(cone).cloned().unwrap_or_default();
        for g in gens {
            if fan.in_perp(cone, &g.abelianize()) {
                self.push(cone, g.inv(), source.clone());
            }
        }
    }

    fn finish(self, fan: Fan) -> AdmissibleSystem {
        let n = fan.rank();
        let charts = self
            .charts
            .into_iter()
            .map(|(c, gens)| (c, SubmonoidFG::new(n, gens)))
            .collect();
        AdmissibleSystem::assemble(fan, charts, self.provenance)
    }
}

fn zero_cone_letters(b: &mut Builder, n: usize) {
    for i in 1..=n {
        let z = ReducedWord::letter(n, i);
        b.push(&ConeId::zero(), z.clone(), Provenance::ZeroConeLetter);
        b.push(&ConeId::zero(), z.inv(), Provenance::ZeroConeLetter);
    }
}

/// Lower charts from maximal ones: union over covering maximal cones, then
/// inverses of the generators over `τ^⊥`.
fn fill_lower_cones(b: &mut Builder, fan: &Fan) {
    for tau in fan.faces_by_dim_desc() {
        if fan.is_maximal(&tau) {
            continue;
        }
        if tau.is_zero() {
            zero_cone_letters(b, fan.rank());
            continue;
        }
        for s in fan.maximal_cones_containing(&tau) {
            for g in b.charts[&s].clone() {
                b.push(&tau, g, Provenance::CoverUnion(s.clone()));
            }
        }
        b.close_perp(fan, &tau, Provenance::PerpInverse);
    }
}

/// Lifts per maximal cone, in the order of [`dual_generators`].
pub type LiftMap = BTreeMap<ConeId, Vec<ReducedWord>>;

pub fn build_system(fan: &Fan, lifts: Option<&LiftMap>) -> Result<AdmissibleSystem, SystemError> {
    let n = fan.rank();
    let mut b = Builder::new();
    for sigma in fan.max_cones() {
        let u = dual_generators(fan, sigma)?;
        let chosen: Vec<ReducedWord> = match lifts.and_then(|l| l.get(sigma)) {
            Some(ws) => {
                if ws.len() != n {
                    return Err(SystemError::LiftCount {
                        cone: sigma.clone(),
                        got: ws.len(),
                    });
                }
                for (i, (w, ui)) in ws.iter().zip(&u).enumerate() {
                    check_rank(w, n)?;
                    if w.abelianize() != *ui {
                        return Err(SystemError::BadLift {
                            cone: sigma.clone(),
                            index: i,
                            expected: ui.clone(),
                            got: w.abelianize(),
                        });
                    }
                }
                ws.clone()
            }
            None => u.iter().map(|ui| ReducedWord::canonical_lift(ui)).collect(),
        };
        for w in chosen {
            b.push(sigma, w, Provenance::MaximalLift);
        }
    }
    if let Some(l) = lifts {
        if let Some(bad) = l.keys().find(|c| !fan.is_maximal(c)) {
            return Err(FanError::NotMaximal(bad.clone()).into());
        }
    }
    fill_lower_cones(&mut b, fan);
    Ok(b.finish(fan.clone()))
}

fn check_rank(w: &ReducedWord, n: usize) -> Result<(), SystemError> {
    if w.rank() != n {
        return Err(SystemError::RankMismatch {
            word: w.clone(),
            got: w.rank(),
            expected: n,
        });
    }
    Ok(())
}

pub fn complete_system(
    fan: &Fan,
    partial: &BTreeMap<ConeId, SubmonoidFG>,
) -> Result<AdmissibleSystem, SystemError> {
    let n = fan.rank();
    if let Some(bad) = partial.keys().find(|c| !fan.is_maximal(c)) {
        return Err(FanError::NotMaximal(bad.clone()).into());
    }
    let mut b = Builder::new();
    for sigma in fan.max_cones() {
        let chart = partial
            .get(sigma)
            .ok_or_else(|| SystemError::MissingMaximalChart(sigma.clone()))?;
        if chart.rank() != n {
            return Err(SystemError::NotAdmissibleInput {
                cone: sigma.clone(),
                detail: format!("rank {} chart", chart.rank()),
            });
        }
        if let Some(f) = chart_failures(fan, sigma, chart).into_iter().next() {
            return Err(SystemError::NotAdmissibleInput {
                cone: sigma.clone(),
                detail: f.to_string(),
            });
        }
        for g in chart.gens() {
            b.push(sigma, g.clone(), Provenance::Completion);
        }
    }
    fill_lower_cones(&mut b, fan);
    Ok(b.finish(fan.clone()))
}

pub type ExtraMap = BTreeMap<ConeId, Vec<ReducedWord>>;

fn augment_inner(
    sys: &AdmissibleSystem,
    extra: &ExtraMap,
    skip_maximal: bool,
) -> Result<AdmissibleSystem, SystemError> {
    let fan = &sys.fan;
    let n = fan.rank();
    for (c, ws) in extra {
        fan.require_face(c)?;
        for w in ws {
            check_rank(w, n)?;
            if !fan.in_dual(c, &w.abelianize()) {
                return Err(SystemError::ExtraOutsideDualCone {
                    cone: c.clone(),
                    word: w.clone(),
                });
            }
        }
    }
    let mut b = Builder::new();
    b.provenance = sys.provenance.clone();
    for (c, chart) in &sys.charts {
        b.charts.insert(c.clone(), chart.gens().to_vec());
    }
    let none = Vec::new();
    for tau in fan.faces_by_dim_desc() {
        let ex = extra.get(&tau).unwrap_or(&none);
        for w in ex {
            b.push(&tau, w.clone(), Provenance::Extra);
        }
        if fan.is_maximal(&tau) {
            if !ex.is_empty() && !skip_maximal {
                b.close_perp(fan, &tau, Provenance::AugmentInverse);
            }
        } else if tau.is_zero() {
            for w in ex {
                b.push(&tau, w.inv(), Provenance::AugmentInverse);
            }
        } else {
            for s in fan.immediate_supercones(&tau) {
                for g in b.charts[&s].clone() {
                    b.push(&tau, g, Provenance::CoverInherit(s.clone()));
                }
            }
            b.close_perp(fan, &tau, Provenance::AugmentInverse);
        }
    }
    Ok(b.finish(fan.clone()))
}

pub fn augment_system(sys: &AdmissibleSystem, extra: &ExtraMap) -> Result<AdmissibleSystem, SystemError> {
    augment_inner(sys, extra, false)
}

/// Augmentation leaving every maximal chart untouched.
pub fn soften(
    sys: &AdmissibleSystem,
    extra: &ExtraMap,
) -> Result<(AdmissibleSystem, SofteningRecord), SystemError> {
    if let Some(c) = extra
        .iter()
        .find(|(c, ws)| sys.fan.is_maximal(c) && !ws.is_empty())
        .map(|(c, _)| c)
    {
        return Err(SystemError::MaximalChartTouched(c.clone()));
    }
    let out = augment_inner(sys, extra, true)?;
    let mut record = SofteningRecord {
        added: BTreeMap::new(),
        invariant_charts: sys.fan.max_cones().to_vec(),
    };
    for (c, chart) in &out.charts {
        let old = sys.charts[c].gens();
        if sys.fan.is_maximal(c) {
            if chart.gens() != old {
                return Err(SystemError::MaximalChartTouched(c.clone()));
            }
            continue;
        }
        let added: Vec<ReducedWord> = chart.gens()[old.len()..].to_vec();
        if !added.is_empty() {
            record.added.insert(c.clone(), added);
        }
    }
    Ok((out, record))
}

impl AdmissibleSystem {
    fn assemble(
        fan: Fan,
        charts: BTreeMap<ConeId, SubmonoidFG>,
        provenance: Vec<ProvenanceEntry>,
    ) -> AdmissibleSystem {
        let lift_table = charts
            .iter()
            .map(|(c, chart)| {
                let entries = monoid_generators_with_units(&fan, c)
                    .into_iter()
                    .filter_map(|m| {
                        chart
                            .gens()
                            .iter()
                            .find(|g| g.abelianize() == m)
                            .map(|w| LiftEntry { m, word: w.clone() })
                    })
                    .collect();
                (c.clone(), entries)
            })
            .collect();
        AdmissibleSystem {
            fan,
            charts,
            lift_table,
            provenance,
        }
    }

    /// Builds a system from explicit charts without checking anything;
    /// callers run [`check_admissible`] afterwards.
    pub fn from_charts(
        fan: Fan,
        charts: BTreeMap<ConeId, SubmonoidFG>,
    ) -> Result<AdmissibleSystem, SystemError> {
        for c in fan.faces() {
            if !charts.contains_key(c) {
                return Err(SystemError::NotAdmissibleInput {
                    cone: c.clone(),
                    detail: "missing chart".into(),
                });
            }
        }
        if let Some(c) = charts.keys().find(|c| !fan.is_face(c)) {
            return Err(FanError::UnknownCone(c.clone()).into());
        }
        Ok(AdmissibleSystem::assemble(fan, charts, Vec::new()))
    }

    /// Copy with one chart replaced (no checks).
    pub fn with_chart(&self, cone: &ConeId, chart: SubmonoidFG) -> AdmissibleSystem {
        let mut charts = self.charts.clone();
        charts.insert(cone.clone(), chart);
        AdmissibleSystem::assemble(self.fan.clone(), charts, self.provenance.clone())
    }

    pub fn fan(&self) -> &Fan {
        &self.fan
    }

    pub fn rank(&self) -> usize {
        self.fan.rank()
    }

    /// Panics for cones outside the fan.
    pub fn chart(&self, c: &ConeId) -> &SubmonoidFG {
        &self.charts[c]
    }

    pub fn charts(&self) -> &BTreeMap<ConeId, SubmonoidFG> {
        &self.charts
    }

    pub fn lift_table(&self, c: &ConeId) -> &[LiftEntry] {
        &self.lift_table[c]
    }

    pub fn provenance(&self) -> &[ProvenanceEntry] {
        &self.provenance
    }

    /// Canonical text listing every chart, used for digests and equality of
    /// systems across files.
    pub fn canonical_text(&self) -> String {
        let mut s = format!("rank {}\n", self.rank());
        for v in self.fan.rays() {
            s.push_str(&format!("ray {v:?}\n"));
        }
        for (c, chart) in &self.charts {
            let gens: Vec<String> = chart.gens().iter().map(ToString::to_string).collect();
            s.push_str(&format!("{c}: {}\n", gens.join(", ")));
        }
        s
    }

    /// FNV-1a hash of [`AdmissibleSystem::canonical_text`].
    pub fn digest(&self) -> String {
        let mut h: u64 = 0xcbf29ce484222325;
        for b in self.canonical_text().bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x100000001b3);
        }
        format!("{h:016x}")
    }
}

/// Abelianized chart generators.
pub fn abelianized_chart(sys: &AdmissibleSystem, tau: &ConeId) -> Vec<MVector> {
    sys.chart(tau).gens().iter().map(ReducedWord::abelianize).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AdmissibilityClause {
    /// Generators finite and of the right rank.
    FiniteGeneration,
    /// Abelianized generators lie in `M_τ` and generate it.
    AbelianizationOnto,
    /// Generators over `τ^⊥` are units of the chart.
    PerpUnits,
    /// Charts of larger cones embed in charts of their faces.
    InverseSystem,
    /// The zero-cone chart is the whole group.
    ZeroChartFull,
}

impl fmt::Display for AdmissibilityClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AdmissibilityClause::FiniteGeneration => "admissible/finite-generation",
            AdmissibilityClause::AbelianizationOnto => "admissible/abelianization-onto",
            AdmissibilityClause::PerpUnits => "admissible/perp-units",
            AdmissibilityClause::InverseSystem => "inverse-system",
            AdmissibilityClause::ZeroChartFull => "zero-chart-full",
        };
        write!(f, "{s}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdmissibilityFailure {
    pub clause: AdmissibilityClause,
    pub cone: ConeId,
    pub detail: String,
}

impl fmt::Display for AdmissibilityFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] cone {}: {}", self.clause, self.cone, self.detail)
    }
}

fn chart_failures(fan: &Fan, tau: &ConeId, chart: &SubmonoidFG) -> Vec<AdmissibilityFailure> {
    let fail = |clause, detail: String| AdmissibilityFailure {
        clause,
        cone: tau.clone(),
        detail,
    };
    let mut out = Vec::new();
    if chart.rank() != fan.rank() {
        out.push(fail(
            AdmissibilityClause::FiniteGeneration,
            format!("chart rank {} differs from fan rank {}", chart.rank(), fan.rank()),
        ));
        return out;
    }
    let ab: Vec<MVector> = chart.gens().iter().map(ReducedWord::abelianize).collect();
    for (g, a) in chart.gens().iter().zip(&ab) {
        if !fan.in_dual(tau, a) {
            out.push(fail(
                AdmissibilityClause::AbelianizationOnto,
                format!("generator {g} abelianizes to {a:?}, outside the dual cone"),
            ));
        }
    }
    for m in monoid_generators_with_units(fan, tau) {
        match comm_monoid_member(&ab, &m) {
            Ok(Some(_)) => {}
            Ok(None) => out.push(fail(
                AdmissibilityClause::AbelianizationOnto,
                format!("{m:?} is not in the monoid generated by the abelianized chart"),
            )),
            Err(e) => out.push(fail(AdmissibilityClause::AbelianizationOnto, e.to_string())),
        }
    }
    for (g, a) in chart.gens().iter().zip(&ab) {
        if fan.in_perp(tau, a) && !chart.member(&g.inv()) {
            out.push(fail(
                AdmissibilityClause::PerpUnits,
                format!("generator {g} lies over the perpendicular lattice but {} is not in the chart", g.inv()),
            ));
        }
    }
    out
}

/// Per-cone outcome of [`check_admissible`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdmissibilityReport {
    pub cones: BTreeMap<ConeId, Vec<AdmissibilityFailure>>,
}

impl AdmissibilityReport {
    pub fn passed(&self) -> bool {
        self.cones.values().all(Vec::is_empty)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AdmissibilityFailure> {
        self.cones.values().flatten()
    }
}

pub fn check_admissible(sys: &AdmissibleSystem) -> AdmissibilityReport {
    let fan = &sys.fan;
    let faces: Vec<ConeId> = fan.faces().cloned().collect();
    let cones = faces
        .par_iter()
        .map(|tau| {
            let chart = sys.chart(tau);
            let mut fails = chart_failures(fan, tau, chart);
            if tau.is_zero() {
                for i in 1..=fan.rank() {
                    let z = ReducedWord::letter(fan.rank(), i);
                    if !chart.is_unit(&z) {
                        fails.push(AdmissibilityFailure {
                            clause: AdmissibilityClause::ZeroChartFull,
                            cone: tau.clone(),
                            detail: format!("letter {z} is not a unit"),
                        });
                    }
                }
            }
            for sigma in fan.immediate_supercones(tau) {
                for g in sys.chart(&sigma).gens() {
                    if !chart.member(g) {
                        fails.push(AdmissibilityFailure {
                            clause: AdmissibilityClause::InverseSystem,
                            cone: tau.clone(),
                            detail: format!("generator {g} of {sigma} is not in the chart"),
                        });
                    }
                }
            }
            (tau.clone(), fails)
        })
        .collect();
    AdmissibilityReport { cones }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toricfan::{validate_fan, RawFan};

    fn fan(rays: Vec<Vec<i64>>, cones: Vec<Vec<usize>>) -> Fan {
        validate_fan(&RawFan {
            rank: rays[0].len(),
            rays,
            max_cones: cones,
            certificates: vec![],
        })
        .unwrap()
    }

    fn p2() -> Fan {
        fan(
            vec![vec![1, 0], vec![0, 1], vec![-1, -1]],
            vec![vec![0, 1], vec![1, 2], vec![0, 2]],
        )
    }

    fn w(s: &str) -> ReducedWord {
        ReducedWord::parse(s, 2).unwrap()
    }

    fn c(v: &[usize]) -> ConeId {
        ConeId::new(v.to_vec())
    }

    #[test]
    fn single_cone_by_hand() {
        let f = fan(vec![vec![1, 0], vec![0, 1]], vec![vec![0, 1]]);
        let s = build_system(&f, None).unwrap();
        assert_eq!(s.chart(&c(&[0, 1])).gens(), &[w("z1"), w("z2")]);
        assert_eq!(s.chart(&c(&[0])).gens(), &[w("z1"), w("z2"), w("z2^-1")]);
        assert_eq!(
            s.chart(&ConeId::zero()).gens(),
            &[w("z1"), w("z1^-1"), w("z2"), w("z2^-1")]
        );
        assert!(check_admissible(&s).passed());
    }

    #[test]
    fn p2_builds_admissibly() {
        let s = build_system(&p2(), None).unwrap();
        assert_eq!(s.charts().len(), 7);
        let rep = check_admissible(&s);
        assert!(rep.passed(), "{:?}", rep.failures().collect::<Vec<_>>());
    }

    #[test]
    fn tampering_breaks_perp_units() {
        let s = build_system(&p2(), None).unwrap();
        // ray 0 = (1,0): z2 lies over the perpendicular lattice
        let ray = c(&[0]);
        let gens: Vec<ReducedWord> = s
            .chart(&ray)
            .gens()
            .iter()
            .filter(|g| **g != w("z2^-1"))
            .cloned()
            .collect();
        let bad = s.with_chart(&ray, SubmonoidFG::new(2, gens));
        let rep = check_admissible(&bad);
        assert!(rep.cones[&ray]
            .iter()
            .any(|f| f.clause == AdmissibilityClause::PerpUnits));
    }

    #[test]
    fn noncommutative_lifts() {
        let mut lifts = LiftMap::new();
        lifts.insert(c(&[0, 1]), vec![w("z2 z1 z2^-1"), w("z2")]);
        let s = build_system(&p2(), Some(&lifts)).unwrap();
        assert!(check_admissible(&s).passed());
        lifts.insert(c(&[0, 1]), vec![w("z1 z2"), w("z2")]);
        assert!(matches!(
            build_system(&p2(), Some(&lifts)),
            Err(SystemError::BadLift { index: 0, .. })
        ));
    }

    #[test]
    fn completion_matches_build() {
        let f = p2();
        let s = build_system(&f, None).unwrap();
        let partial: BTreeMap<ConeId, SubmonoidFG> = f
            .max_cones()
            .iter()
            .map(|m| (m.clone(), s.chart(m).clone()))
            .collect();
        let t = complete_system(&f, &partial).unwrap();
        assert_eq!(s.charts(), t.charts());

        let mut extra = partial.clone();
        extra.insert(c(&[0, 1]), SubmonoidFG::new(2, vec![w("z1"), w("z2"), w("z1 z2")]));
        let t = complete_system(&f, &extra).unwrap();
        assert!(t.chart(&c(&[0])).member(&w("z1 z2")));
        assert!(check_admissible(&t).passed());

        let mut missing = partial;
        missing.insert(c(&[0, 1]), SubmonoidFG::new(2, vec![w("z1")]));
        assert!(matches!(
            complete_system(&f, &missing),
            Err(SystemError::NotAdmissibleInput { .. })
        ));
    }

    #[test]
    fn augmentation_at_zero_cone() {
        let s = build_system(&p2(), None).unwrap();
        let mut extra = ExtraMap::new();
        extra.insert(ConeId::zero(), vec![w("z1 z2 z1^-1")]);
        let a = augment_system(&s, &extra).unwrap();
        let z = a.chart(&ConeId::zero());
        assert!(z.gens().contains(&w("z1 z2 z1^-1")));
        assert!(z.gens().contains(&w("z1 z2^-1 z1^-1")));
        assert!(check_admissible(&a).passed());
        assert_eq!(augment_system(&s, &ExtraMap::new()).unwrap().charts(), s.charts());
    }

    #[test]
    fn extras_must_lie_in_dual_cone() {
        let s = build_system(&p2(), None).unwrap();
        let mut extra = ExtraMap::new();
        extra.insert(c(&[0]), vec![w("z1^-1")]);
        assert!(matches!(
            augment_system(&s, &extra),
            Err(SystemError::ExtraOutsideDualCone { .. })
        ));
    }

    #[test]
    fn softening_on_a_ray() {
        let s = build_system(&p2(), None).unwrap();
        let mut extra = ExtraMap::new();
        extra.insert(c(&[1]), vec![w("z1 z2 z1^-1")]);
        let (t, rec) = soften(&s, &extra).unwrap();
        for m in s.fan().max_cones() {
            assert_eq!(s.chart(m).gens(), t.chart(m).gens());
        }
        assert!(rec.added.keys().all(|k| *k == c(&[1]) || k.is_zero()));
        assert!(check_admissible(&t).passed());
        let mut on_max = ExtraMap::new();
        on_max.insert(c(&[0, 1]), vec![w("z1")]);
        assert!(matches!(soften(&s, &on_max), Err(SystemError::MaximalChartTouched(_))));
    }

    #[test]
    fn rank_one_charts() {
        let f = fan(vec![vec![1], vec![-1]], vec![vec![0], vec![1]]);
        let s = build_system(&f, None).unwrap();
        let one = ReducedWord::letter(1, 1);
        assert_eq!(s.chart(&ConeId::zero()).gens(), &[one.clone(), one.inv()]);
        assert!(check_admissible(&s).passed());
    }
}
