//! Lattices, simplicial index-one fans and the commutative monoids `σ^∨ ∩ M`.
//!
//! Cones are identified combinatorially by their sorted ray-index sets. Under
//! the simpliciality assumption every subset of a maximal cone's rays spans a
//! face, so the face lattice is a union of boolean lattices.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::exactmath::{
    int_q, linear_feasible, primitive_integer_vector, solve_integer, unimodular_inverse,
    Feasibility, Inequality, IntMatrix, Relation,
};

/// Element of `M` (or `N`) in coordinates.
pub type MVector = Vec<i64>;

pub fn pairing(m: &[i64], v: &[i64]) -> i64 {
    m.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn vec_add(a: &[i64], b: &[i64]) -> MVector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vec_sub(a: &[i64], b: &[i64]) -> MVector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vec_neg(a: &[i64]) -> MVector {
    a.iter().map(|x| -x).collect()
}

/// Sorted set of ray indices naming a cone; the empty set is the zero cone.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct ConeId(Vec<usize>);

impl ConeId {
    pub fn new(mut rays: Vec<usize>) -> Self {
        rays.sort_unstable();
        rays.dedup();
        ConeId(rays)
    }

    pub fn zero() -> Self {
        ConeId(Vec::new())
    }

    pub fn rays(&self) -> &[usize] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_subset_of(&self, other: &ConeId) -> bool {
        self.0.iter().all(|r| other.0.binary_search(r).is_ok())
    }

    /// `self ≺ other`: proper face.
    pub fn is_proper_face_of(&self, other: &ConeId) -> bool {
        self.dim() < other.dim() && self.is_subset_of(other)
    }

    pub fn intersection(&self, other: &ConeId) -> ConeId {
        ConeId(
            self.0
                .iter()
                .copied()
                .filter(|r| other.0.binary_search(r).is_ok())
                .collect(),
        )
    }
}

impl fmt::Display for ConeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl From<ConeId> for String {
    fn from(c: ConeId) -> String {
        c.to_string()
    }
}

impl FromStr for ConeId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let body = s
            .trim()
            .strip_prefix('{')
            .and_then(|t| t.strip_suffix('}'))
            .ok_or_else(|| format!("cone key `{s}` must look like {{0,1}}"))?;
        if body.trim().is_empty() {
            return Ok(ConeId::zero());
        }
        let rays = body
            .split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|_| format!("bad ray index `{t}` in `{s}`")))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ConeId::new(rays))
    }
}

impl TryFrom<String> for ConeId {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

/// Separating functional supplied for (or found for) a pair of maximal cones.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCertificate {
    pub pair: (usize, usize),
    pub functional: MVector,
}

/// Unvalidated fan description, as read from a file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawFan {
    pub rank: usize,
    pub rays: Vec<Vec<i64>>,
    pub max_cones: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub certificates: Vec<PairCertificate>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FanError {
    #[error("malformed fan: {0}")]
    Malformed(String),
    #[error("ray {ray} = {vector:?} is not primitive")]
    NonPrimitiveRay { ray: usize, vector: Vec<i64> },
    #[error("cone {cone} is not unimodular (|det| = {det})")]
    NotIndexOne { cone: ConeId, det: String },
    #[error("no maximal cone is spanned by the standard basis e_1..e_n")]
    MissingReferenceCone,
    #[error("cones {a} and {b} do not meet in a common face")]
    NotAFan { a: ConeId, b: ConeId },
    #[error("supplied certificate for cones {a} and {b} does not separate them")]
    InvalidCertificate { a: ConeId, b: ConeId },
    #[error("cone {0} is not maximal")]
    NotMaximal(ConeId),
    #[error("cone {0} is not a face of the fan")]
    UnknownCone(ConeId),
}

impl FanError {
    /// Short name of the violated condition.
    pub fn clause(&self) -> &'static str {
        match self {
            FanError::Malformed(_) => "fan/malformed",
            FanError::NonPrimitiveRay { .. } => "fan/primitive-ray",
            FanError::NotIndexOne { .. } => "fan/index-one",
            FanError::MissingReferenceCone => "fan/reference-cone",
            FanError::NotAFan { .. } => "fan/common-face",
            FanError::InvalidCertificate { .. } => "fan/certificate",
            FanError::NotMaximal(_) => "fan/not-maximal",
            FanError::UnknownCone(_) => "fan/unknown-cone",
        }
    }
}

/// A validated fan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fan {
    rank: usize,
    rays: Vec<MVector>,
    max_cones: Vec<ConeId>,
    faces: BTreeSet<ConeId>,
    certificates: BTreeMap<(usize, usize), MVector>,
    reference: usize,
}

fn is_primitive(v: &[i64]) -> bool {
    v.iter().fold(0i64, |g, &x| g.gcd(&x)) == 1
}

fn to_q(v: i64) -> BigRational {
    int_q(v)
}

/// Constraints on `m` saying it separates `a` from `b` along their common face.
fn separation_constraints(rays: &[MVector], a: &ConeId, b: &ConeId) -> Vec<Inequality> {
    let mut out = Vec::new();
    let coeffs = |r: usize| rays[r].iter().map(|&x| to_q(x)).collect::<Vec<_>>();
    for &r in a.rays() {
        let rel = if b.rays().contains(&r) {
            Relation::Eq
        } else {
            Relation::Gt
        };
        out.push(Inequality::new(coeffs(r), BigRational::zero(), rel));
    }
    for &r in b.rays() {
        if !a.rays().contains(&r) {
            let neg: Vec<BigRational> = coeffs(r).into_iter().map(|x| -x).collect();
            out.push(Inequality::new(neg, BigRational::zero(), Relation::Gt));
        }
    }
    out
}

fn certificate_separates(rays: &[MVector], a: &ConeId, b: &ConeId, m: &[i64]) -> bool {
    a.rays().iter().all(|&r| {
        let p = pairing(m, &rays[r]);
        if b.rays().contains(&r) {
            p == 0
        } else {
            p > 0
        }
    }) && b
        .rays()
        .iter()
        .filter(|r| !a.rays().contains(r))
        .all(|&r| pairing(m, &rays[r]) < 0)
}

pub fn validate_fan(raw: &RawFan) -> Result<Fan, FanError> {
    let n = raw.rank;
    if n == 0 {
        return Err(FanError::Malformed("rank must be positive".into()));
    }
    for (i, v) in raw.rays.iter().enumerate() {
        if v.len() != n {
            return Err(FanError::Malformed(format!(
                "ray {i} has {} entries, expected {n}",
                v.len()
            )));
        }
        if !is_primitive(v) {
            return Err(FanError::NonPrimitiveRay {
                ray: i,
                vector: v.clone(),
            });
        }
    }
    let distinct: BTreeSet<&Vec<i64>> = raw.rays.iter().collect();
    if distinct.len() != raw.rays.len() {
        return Err(FanError::Malformed("duplicate ray vectors".into()));
    }
    let mut max_cones = Vec::new();
    for c in &raw.max_cones {
        if c.len() != n {
            return Err(FanError::Malformed(format!(
                "maximal cone {c:?} must have exactly {n} rays"
            )));
        }
        if let Some(&bad) = c.iter().find(|&&r| r >= raw.rays.len()) {
            return Err(FanError::Malformed(format!("ray index {bad} out of range")));
        }
        let id = ConeId::new(c.clone());
        if id.dim() != n {
            return Err(FanError::Malformed(format!("maximal cone {c:?} repeats a ray")));
        }
        if max_cones.contains(&id) {
            return Err(FanError::Malformed(format!("maximal cone {id} listed twice")));
        }
        max_cones.push(id);
    }
    if max_cones.is_empty() {
        return Err(FanError::Malformed("no maximal cones".into()));
    }
    let used: BTreeSet<usize> = max_cones.iter().flat_map(|c| c.rays().to_vec()).collect();
    if used.len() != raw.rays.len() {
        return Err(FanError::Malformed("some ray lies in no maximal cone".into()));
    }
    for c in &max_cones {
        let m = IntMatrix::from_i64_rows(n, &c.rays().iter().map(|&r| raw.rays[r].clone()).collect::<Vec<_>>());
        let det = m.det();
        if det.abs() != BigInt::one() {
            return Err(FanError::NotIndexOne {
                cone: c.clone(),
                det: det.abs().to_string(),
            });
        }
    }
    let reference = max_cones
        .iter()
        .position(|c| {
            let mut vs: Vec<&Vec<i64>> = c.rays().iter().map(|&r| &raw.rays[r]).collect();
            vs.sort();
            let mut basis: Vec<Vec<i64>> = (0..n)
                .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
                .collect();
            basis.sort();
            vs.into_iter().cloned().collect::<Vec<_>>() == basis
        })
        .ok_or(FanError::MissingReferenceCone)?;

    let supplied: BTreeMap<(usize, usize), MVector> = raw
        .certificates
        .iter()
        .map(|c| {
            let (a, b) = c.pair;
            let key = (a.min(b), a.max(b));
            let m = if a <= b { c.functional.clone() } else { vec_neg(&c.functional) };
            (key, m)
        })
        .collect();
    let pairs: Vec<(usize, usize)> = (0..max_cones.len())
        .flat_map(|a| (a + 1..max_cones.len()).map(move |b| (a, b)))
        .collect();
    let found: Result<Vec<((usize, usize), MVector)>, FanError> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let (ca, cb) = (&max_cones[a], &max_cones[b]);
            if let Some(m) = supplied.get(&(a, b)) {
                if m.len() == n && certificate_separates(&raw.rays, ca, cb, m) {
                    return Ok(((a, b), m.clone()));
                }
                return Err(FanError::InvalidCertificate {
                    a: ca.clone(),
                    b: cb.clone(),
                });
            }
            match linear_feasible(n, &separation_constraints(&raw.rays, ca, cb)) {
                Feasibility::Feasible(w) => {
                    let m: MVector = primitive_integer_vector(&w)
                        .iter()
                        .map(|x| x.to_i64().expect("small functional"))
                        .collect();
                    debug_assert!(certificate_separates(&raw.rays, ca, cb, &m));
                    Ok(((a, b), m))
                }
                Feasibility::Infeasible(_) => Err(FanError::NotAFan {
                    a: ca.clone(),
                    b: cb.clone(),
                }),
            }
        })
        .collect();
    let certificates = found?.into_iter().collect();

    let mut faces = BTreeSet::new();
    for c in &max_cones {
        let k = c.dim();
        for mask in 0u64..(1u64 << k) {
            let sub: Vec<usize> = (0..k)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| c.rays()[i])
                .collect();
            faces.insert(ConeId(sub));
        }
    }
    Ok(Fan {
        rank: n,
        rays: raw.rays.clone(),
        max_cones,
        faces,
        certificates,
        reference,
    })
}

impl Fan {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn rays(&self) -> &[MVector] {
        &self.rays
    }

    pub fn ray(&self, i: usize) -> &[i64] {
        &self.rays[i]
    }

    /// Maximal cones in file order.
    pub fn max_cones(&self) -> &[ConeId] {
        &self.max_cones
    }

    /// The maximal cone spanned by the standard basis.
    pub fn reference_cone(&self) -> &ConeId {
        &self.max_cones[self.reference]
    }

    pub fn faces(&self) -> impl Iterator<Item = &ConeId> {
        self.faces.iter()
    }

    /// Faces ordered by decreasing dimension, ties broken lexicographically.
    pub fn faces_by_dim_desc(&self) -> Vec<ConeId> {
        let mut v: Vec<ConeId> = self.faces.iter().cloned().collect();
        v.sort_by(|a, b| b.dim().cmp(&a.dim()).then(a.cmp(b)));
        v
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn is_face(&self, c: &ConeId) -> bool {
        self.faces.contains(c)
    }

    pub fn is_maximal(&self, c: &ConeId) -> bool {
        self.max_cones.contains(c)
    }

    pub fn certificate(&self, a: usize, b: usize) -> Option<&MVector> {
        self.certificates.get(&(a.min(b), a.max(b)))
    }

    /// Maximal cones containing `tau`, in file order.
    pub fn maximal_cones_containing(&self, tau: &ConeId) -> Vec<ConeId> {
        self.max_cones
            .iter()
            .filter(|s| tau.is_subset_of(s))
            .cloned()
            .collect()
    }

    /// Faces having `tau` as a facet.
    pub fn immediate_supercones(&self, tau: &ConeId) -> Vec<ConeId> {
        self.faces
            .iter()
            .filter(|s| s.dim() == tau.dim() + 1 && tau.is_subset_of(s))
            .cloned()
            .collect()
    }

    /// All strict incidences `(τ, σ)` with `τ ≺ σ`.
    pub fn incidences(&self) -> Vec<(ConeId, ConeId)> {
        let mut out = Vec::new();
        for s in &self.faces {
            for t in &self.faces {
                if t.is_proper_face_of(s) {
                    out.push((t.clone(), s.clone()));
                }
            }
        }
        out
    }

    /// All chains `ρ ≺ τ ≺ σ`, returned as `(ρ, τ, σ)`.
    pub fn chains(&self) -> Vec<(ConeId, ConeId, ConeId)> {
        let mut out = Vec::new();
        for (t, s) in self.incidences() {
            for r in &self.faces {
                if r.is_proper_face_of(&t) {
                    out.push((r.clone(), t.clone(), s.clone()));
                }
            }
        }
        out
    }

    pub fn ray_matrix(&self, c: &ConeId) -> IntMatrix {
        let rows: Vec<Vec<i64>> = c.rays().iter().map(|&r| self.rays[r].clone()).collect();
        IntMatrix::from_i64_rows(self.rank, &rows)
    }

    /// Whether `m` lies in `τ^⊥`.
    pub fn in_perp(&self, tau: &ConeId, m: &[i64]) -> bool {
        tau.rays().iter().all(|&r| pairing(m, &self.rays[r]) == 0)
    }

    /// Whether `m` lies in `τ^∨`.
    pub fn in_dual(&self, tau: &ConeId, m: &[i64]) -> bool {
        tau.rays().iter().all(|&r| pairing(m, &self.rays[r]) >= 0)
    }

    pub fn to_raw(&self) -> RawFan {
        RawFan {
            rank: self.rank,
            rays: self.rays.clone(),
            max_cones: self.max_cones.iter().map(|c| c.rays().to_vec()).collect(),
            certificates: self
                .certificates
                .iter()
                .map(|(&pair, m)| PairCertificate {
                    pair,
                    functional: m.clone(),
                })
                .collect(),
        }
    }

    pub fn require_face(&self, c: &ConeId) -> Result<(), FanError> {
        if self.is_face(c) {
            Ok(())
        } else {
            Err(FanError::UnknownCone(c.clone()))
        }
    }
}

/// `u_1..u_n` with `⟨u_i, v_j⟩ = δ_ij` against the rays of a maximal cone,
/// listed in the order of the cone's sorted ray indices.
pub fn dual_generators(fan: &Fan, sigma: &ConeId) -> Result<Vec<MVector>, FanError> {
    if !fan.is_maximal(sigma) {
        return Err(FanError::NotMaximal(sigma.clone()));
    }
    let inv = unimodular_inverse(&fan.ray_matrix(sigma)).expect("index one cone");
    let t = inv.transpose();
    Ok(t.to_i64_rows().expect("small entries"))
}

/// Generators of `τ^∨ ∩ M` from the union of dual bases of the maximal cones
/// over `τ`, with a flag marking those in `τ^⊥`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeMonoidGens {
    pub gens: Vec<MVector>,
    pub perp: Vec<bool>,
}

pub fn cone_monoid_generators(fan: &Fan, tau: &ConeId) -> ConeMonoidGens {
    let mut gens: Vec<MVector> = Vec::new();
    for s in fan.maximal_cones_containing(tau) {
        for u in dual_generators(fan, &s).expect("maximal") {
            if !gens.contains(&u) {
                gens.push(u);
            }
        }
    }
    if tau.is_zero() {
        for i in 0..fan.rank() {
            let e: MVector = (0..fan.rank()).map(|j| -i64::from(i == j)).collect();
            if !gens.contains(&e) {
                gens.push(e);
            }
        }
    }
    let perp = gens.iter().map(|g| fan.in_perp(tau, g)).collect();
    ConeMonoidGens { gens, perp }
}

/// Generators of `M_τ` as a monoid: the union above together with the
/// negatives of the `τ^⊥` generators, deduplicated.
pub fn monoid_generators_with_units(fan: &Fan, tau: &ConeId) -> Vec<MVector> {
    let ConeMonoidGens { mut gens, perp } = cone_monoid_generators(fan, tau);
    let negs: Vec<MVector> = gens
        .iter()
        .zip(&perp)
        .filter(|(_, &p)| p)
        .map(|(g, _)| vec_neg(g))
        .collect();
    for g in negs {
        if !gens.contains(&g) {
            gens.push(g);
        }
    }
    gens
}

/// `ℤ`-basis of `τ^⊥ ∩ M`.
pub fn perp_lattice_basis(fan: &Fan, tau: &ConeId) -> Vec<MVector> {
    crate::exactmath::kernel_basis(&fan.ray_matrix(tau))
        .to_i64_rows()
        .expect("small entries")
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CommMemberError {
    #[error("generator and target dimensions differ")]
    DimensionMismatch,
    #[error("bounded search exceeded {0} nodes")]
    SearchTooLarge(usize),
}

const SEARCH_CAP: usize = 2_000_000;

/// Integer functional `ψ ≥ 0` on all generators, positive exactly off the
/// lineality part. Returns `(ψ, lineality flags)`.
fn positivity_split(gens: &[MVector], n: usize) -> (Vec<BigRational>, Vec<bool>) {
    let mut psi = vec![BigRational::zero(); n];
    let mut lineal = vec![false; gens.len()];
    for (k, g) in gens.iter().enumerate() {
        if g.iter().all(|&x| x == 0) {
            lineal[k] = true;
            continue;
        }
        let mut sys: Vec<Inequality> = gens
            .iter()
            .map(|h| Inequality::new(h.iter().map(|&x| to_q(x)).collect(), BigRational::zero(), Relation::Ge))
            .collect();
        sys.push(Inequality::new(
            g.iter().map(|&x| to_q(x)).collect(),
            BigRational::one(),
            Relation::Ge,
        ));
        match linear_feasible(n, &sys) {
            Feasibility::Feasible(phi) => {
                for (p, f) in psi.iter_mut().zip(phi) {
                    *p += f;
                }
            }
            Feasibility::Infeasible(_) => lineal[k] = true,
        }
    }
    (psi, lineal)
}

/// Strictly positive integer relation `Σ μ_j k_j = 0` among the lineality
/// generators.
fn positive_relation(k: &[MVector], n: usize) -> Option<Vec<BigInt>> {
    let m = k.len();
    let mut sys = Vec::new();
    for coord in 0..n {
        sys.push(Inequality::new(
            k.iter().map(|v| to_q(v[coord])).collect(),
            BigRational::zero(),
            Relation::Eq,
        ));
    }
    for j in 0..m {
        let mut c = vec![BigRational::zero(); m];
        c[j] = BigRational::one();
        sys.push(Inequality::new(c, BigRational::one(), Relation::Ge));
    }
    let w = linear_feasible(m, &sys).witness()?.to_vec();
    let lcm = w.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    Some(w.iter().map(|x| (x * BigRational::from_integer(lcm.clone())).to_integer()).collect())
}

/// Nonnegative integer coefficients `c` with `Σ c_i gens_i = target`, if any.
pub fn comm_monoid_member(
    gens: &[MVector],
    target: &[i64],
) -> Result<Option<Vec<u64>>, CommMemberError> {
    let n = target.len();
    if gens.iter().any(|g| g.len() != n) {
        return Err(CommMemberError::DimensionMismatch);
    }
    let (psi_q, lineal) = positivity_split(gens, n);
    let psi = primitive_or_zero(&psi_q);
    let val = |v: &[i64]| -> i64 { pairing(&psi, v) };
    let budget = val(target);
    if budget < 0 {
        return Ok(None);
    }
    let free: Vec<usize> = (0..gens.len()).filter(|&k| !lineal[k]).collect();
    let kset: Vec<usize> = (0..gens.len()).filter(|&k| lineal[k]).collect();
    let kvecs: Vec<MVector> = kset.iter().map(|&k| gens[k].clone()).collect();
    let kmat = IntMatrix::from_i64_rows(n, &kvecs);
    let relation = if kvecs.is_empty() {
        None
    } else {
        positive_relation(&kvecs, n)
    };

    let finish = |rem: &[i64]| -> Option<Vec<u64>> {
        if kvecs.is_empty() {
            return rem.iter().all(|&x| x == 0).then(Vec::new);
        }
        let t: Vec<BigInt> = rem.iter().map(|&x| BigInt::from(x)).collect();
        let y = solve_integer(&kmat, &t)?;
        let shift = y.iter().map(|v| -v).max().unwrap_or_default().max(BigInt::zero());
        let mu = relation.as_ref();
        let out: Option<Vec<u64>> = y
            .iter()
            .enumerate()
            .map(|(j, v)| {
                let extra = mu.map_or(BigInt::zero(), |m| &shift * &m[j]);
                (v + extra).to_u64()
            })
            .collect();
        out
    };

    let mut coeffs = vec![0u64; gens.len()];
    let mut nodes = 0usize;
    let found = dfs(
        gens, &free, 0, budget, target.to_vec(), &val, &mut coeffs, &mut nodes, &finish,
    )?;
    Ok(found.map(|kc| {
        for (slot, &k) in kset.iter().enumerate() {
            coeffs[k] = kc[slot];
        }
        coeffs
    }))
}

fn primitive_or_zero(v: &[BigRational]) -> MVector {
    primitive_integer_vector(v)
        .iter()
        .map(|x| x.to_i64().expect("small functional"))
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    gens: &[MVector],
    free: &[usize],
    idx: usize,
    budget: i64,
    rem: MVector,
    val: &dyn Fn(&[i64]) -> i64,
    coeffs: &mut Vec<u64>,
    nodes: &mut usize,
    finish: &dyn Fn(&[i64]) -> Option<Vec<u64>>,
) -> Result<Option<Vec<u64>>, CommMemberError> {
    *nodes += 1;
    if *nodes > SEARCH_CAP {
        return Err(CommMemberError::SearchTooLarge(SEARCH_CAP));
    }
    if idx == free.len() {
        return Ok(if budget == 0 { finish(&rem) } else { None });
    }
    let g = &gens[free[idx]];
    let w = val(g);
    let max = budget / w;
    for c in (0..=max).rev() {
        let next: MVector = rem.iter().zip(g).map(|(r, x)| r - c * x).collect();
        coeffs[free[idx]] = c as u64;
        if let Some(k) = dfs(gens, free, idx + 1, budget - c * w, next, val, coeffs, nodes, finish)? {
            return Ok(Some(k));
        }
    }
    coeffs[free[idx]] = 0;
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn p2() -> Fan {
        validate_fan(&RawFan {
            rank: 2,
            rays: vec![vec![1, 0], vec![0, 1], vec![-1, -1]],
            max_cones: vec![vec![0, 1], vec![1, 2], vec![0, 2]],
            certificates: vec![],
        })
        .unwrap()
    }

    fn c(v: &[usize]) -> ConeId {
        ConeId::new(v.to_vec())
    }

    #[test]
    fn p2_faces_and_certificates() {
        let f = p2();
        assert_eq!(f.num_faces(), 7);
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            let m = f.certificate(a, b).unwrap();
            assert!(certificate_separates(f.rays(), &f.max_cones()[a], &f.max_cones()[b], m));
        }
        assert_eq!(f.reference_cone(), &c(&[0, 1]));
    }

    #[test]
    fn rejects_bad_fans() {
        let det2 = RawFan {
            rank: 2,
            rays: vec![vec![1, 0], vec![1, 2]],
            max_cones: vec![vec![0, 1]],
            certificates: vec![],
        };
        assert!(matches!(validate_fan(&det2), Err(FanError::NotIndexOne { .. })));
        let nonprim = RawFan {
            rank: 2,
            rays: vec![vec![1, 0], vec![0, 2]],
            max_cones: vec![vec![0, 1]],
            certificates: vec![],
        };
        assert!(matches!(validate_fan(&nonprim), Err(FanError::NonPrimitiveRay { ray: 1, .. })));
        let noref = RawFan {
            rank: 2,
            rays: vec![vec![-1, 0], vec![0, 1]],
            max_cones: vec![vec![0, 1]],
            certificates: vec![],
        };
        assert_eq!(validate_fan(&noref), Err(FanError::MissingReferenceCone));
        // two cones overlapping in their interiors
        let overlap = RawFan {
            rank: 2,
            rays: vec![vec![1, 0], vec![0, 1], vec![1, 1]],
            max_cones: vec![vec![0, 1], vec![0, 2]],
            certificates: vec![],
        };
        assert!(matches!(validate_fan(&overlap), Err(FanError::NotAFan { .. })));
    }

    #[test]
    fn supplied_certificates_are_checked() {
        let mut raw = p2().to_raw();
        assert_eq!(validate_fan(&raw).unwrap(), p2());
        raw.certificates[0].functional = vec![0, 0];
        assert!(matches!(validate_fan(&raw), Err(FanError::InvalidCertificate { .. })));
    }

    #[test]
    fn dual_generators_examples() {
        let f = p2();
        assert_eq!(dual_generators(&f, &c(&[0, 1])).unwrap(), vec![vec![1, 0], vec![0, 1]]);
        let u = dual_generators(&f, &c(&[1, 2])).unwrap();
        assert_eq!(u, vec![vec![-1, 1], vec![-1, 0]]);
        assert!(dual_generators(&f, &c(&[1])).is_err());
    }

    #[test]
    fn ray_monoid_generators() {
        let f = p2();
        let g = cone_monoid_generators(&f, &c(&[1]));
        assert_eq!(g.gens, vec![vec![1, 0], vec![0, 1], vec![-1, 1], vec![-1, 0]]);
        assert_eq!(g.perp, vec![true, false, false, true]);
        let z = cone_monoid_generators(&f, &ConeId::zero());
        assert!(z.perp.iter().all(|&p| p));
        assert!(z.gens.contains(&vec![0, -1]));
    }

    #[test]
    fn perp_bases() {
        let f = p2();
        let b = perp_lattice_basis(&f, &c(&[2]));
        assert_eq!(b.len(), 1);
        assert!(b[0] == vec![1, -1] || b[0] == vec![-1, 1]);
        assert!(perp_lattice_basis(&f, &c(&[0, 1])).is_empty());
        assert_eq!(perp_lattice_basis(&f, &ConeId::zero()).len(), 2);
    }

    #[test]
    fn comm_member_examples() {
        let e = vec![vec![1, 0], vec![0, 1]];
        assert_eq!(comm_monoid_member(&e, &[2, 3]).unwrap(), Some(vec![2, 3]));
        assert_eq!(comm_monoid_member(&e, &[-1, 0]).unwrap(), None);
        let s = vec![vec![-1, 1], vec![-1, 0]];
        assert_eq!(comm_monoid_member(&s, &[-2, 1]).unwrap(), Some(vec![1, 1]));
    }

    #[test]
    fn comm_member_with_group_part() {
        // generators of the ray monoid of (0,1) in P^2: x^{±1} directions
        let g = vec![vec![1, 0], vec![0, 1], vec![-1, 1], vec![-1, 0]];
        for t in [[-5, 0], [3, 2], [-4, 1], [7, 0]] {
            let c = comm_monoid_member(&g, &t).unwrap().unwrap();
            let sum = g.iter().zip(&c).fold(vec![0, 0], |acc, (v, &k)| {
                vec![acc[0] + v[0] * k as i64, acc[1] + v[1] * k as i64]
            });
            assert_eq!(sum, t.to_vec());
        }
        assert_eq!(comm_monoid_member(&g, &[0, -1]).unwrap(), None);
        // a lattice where only even multiples of the group direction occur
        let h = vec![vec![2, 0], vec![-2, 0], vec![0, 1]];
        assert_eq!(comm_monoid_member(&h, &[1, 0]).unwrap(), None);
        assert!(comm_monoid_member(&h, &[-4, 3]).unwrap().is_some());
    }

    #[test]
    fn cone_keys_round_trip() {
        for s in ["{}", "{0}", "{0,2}"] {
            assert_eq!(s.parse::<ConeId>().unwrap().to_string(), s);
        }
        assert_eq!("{ 2 , 0 }".parse::<ConeId>().unwrap(), c(&[0, 2]));
        assert!("0,1".parse::<ConeId>().is_err());
    }
}
