//! JSON file formats and their conversion to library values.
//!
//! Words, algebra elements and matrix entries are written as text literals
//! (`"z1 z2^-1"`, `"3/2+1/2i"`), so every number stays exact.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use nctoric::azumaya::{MorphismData, QuasiHomChart};
use nctoric::deltasystem::AdmissibleSystem;
use nctoric::exactmath::{GaussRational as G, QIMatrix};
use nctoric::freeword::{compile_submonoid, ReducedWord};
use nctoric::ncalgebra::{AlgElem, BoundedIdeal, WordDomain};
use nctoric::sheaves::{DivisorData, GluingData, MSigmaAssignment, TwistedSectionData};
use nctoric::toricfan::{validate_fan, ConeId, Fan, MVector, RawFan};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {msg}")]
    Json {
        path: PathBuf,
        line: usize,
        column: usize,
        msg: String,
    },
    #[error("{path}: {detail}")]
    Invalid { path: PathBuf, detail: String },
    #[error("{0}")]
    Usage(String),
}

pub fn invalid(path: &Path, detail: impl ToString) -> InputError {
    InputError::Invalid {
        path: path.to_path_buf(),
        detail: detail.to_string(),
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, InputError> {
    let text = fs::read_to_string(path).map_err(|source| InputError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| InputError::Json {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    })
}

/// Reads `arg` as a JSON file, or parses it as inline JSON when no such
/// file exists and it starts with `[` or `{`.
pub fn read_json_or_literal<T: DeserializeOwned>(arg: &Path) -> Result<T, InputError> {
    let text = arg.to_string_lossy();
    let inline = text.trim_start();
    if arg.exists() || !(inline.starts_with('[') || inline.starts_with('{')) {
        return read_json(arg);
    }
    serde_json::from_str(inline).map_err(|e| InputError::Json {
        path: PathBuf::from("<literal>"),
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), InputError> {
    let mut text = serde_json::to_string_pretty(value).expect("plain data serializes");
    text.push('\n');
    fs::write(path, text).map_err(|source| InputError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn parse_word(path: &Path, s: &str, rank: usize) -> Result<ReducedWord, InputError> {
    ReducedWord::parse(s, rank).map_err(|e| invalid(path, format!("word `{s}`: {e}")))
}

pub fn parse_scalar(path: &Path, s: &str) -> Result<G, InputError> {
    s.parse::<G>().map_err(|e| invalid(path, e))
}

pub fn parse_elem(path: &Path, s: &str, rank: usize) -> Result<AlgElem, InputError> {
    AlgElem::parse(s, rank).map_err(|e| invalid(path, format!("element `{s}`: {e}")))
}

/// Row-major matrix of Gaussian-rational literals.
pub type MatrixText = Vec<Vec<String>>;

pub fn parse_matrix(path: &Path, rows: &MatrixText) -> Result<QIMatrix, InputError> {
    let parsed = rows
        .iter()
        .map(|row| row.iter().map(|s| parse_scalar(path, s)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    QIMatrix::try_from_rows(parsed).ok_or_else(|| invalid(path, "matrix must be square and nonempty"))
}

pub fn matrix_text(m: &QIMatrix) -> MatrixText {
    m.rows()
        .iter()
        .map(|row| row.iter().map(ToString::to_string).collect())
        .collect()
}

pub fn load_fan(path: &Path) -> Result<Fan, InputError> {
    let raw: RawFan = read_json(path)?;
    validate_fan(&raw).map_err(|e| invalid(path, e))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemFile {
    pub fan: RawFan,
    pub charts: BTreeMap<ConeId, Vec<String>>,
}

impl SystemFile {
    pub fn from_system(sys: &AdmissibleSystem) -> Self {
        SystemFile {
            fan: sys.fan().to_raw(),
            charts: sys
                .charts()
                .iter()
                .map(|(c, m)| (c.clone(), m.gens().iter().map(ToString::to_string).collect()))
                .collect(),
        }
    }

    pub fn to_system(&self, path: &Path) -> Result<AdmissibleSystem, InputError> {
        let fan = validate_fan(&self.fan).map_err(|e| invalid(path, e))?;
        let n = fan.rank();
        let mut charts = BTreeMap::new();
        for (c, gens) in &self.charts {
            let words = gens.iter().map(|s| parse_word(path, s, n)).collect::<Result<Vec<_>, _>>()?;
            let m = compile_submonoid(n, words).map_err(|e| invalid(path, e))?;
            charts.insert(c.clone(), m);
        }
        AdmissibleSystem::from_charts(fan, charts).map_err(|e| invalid(path, e))
    }
}

/// A fan file or a system file; a bare fan gets the default construction.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum FanOrSystem {
    System(SystemFile),
    Fan(RawFan),
}

pub fn load_system(path: &Path) -> Result<AdmissibleSystem, InputError> {
    match read_json::<FanOrSystem>(path)? {
        FanOrSystem::System(s) => s.to_system(path),
        FanOrSystem::Fan(raw) => {
            let fan = validate_fan(&raw).map_err(|e| invalid(path, e))?;
            nctoric::deltasystem::build_system(&fan, None).map_err(|e| invalid(path, e))
        }
    }
}

/// `cone → list of word literals`, used for lifts and extras.
pub type WordMapFile = BTreeMap<ConeId, Vec<String>>;

pub fn load_word_map(path: &Path, rank: usize) -> Result<BTreeMap<ConeId, Vec<ReducedWord>>, InputError> {
    let raw: WordMapFile = read_json(path)?;
    raw.into_iter()
        .map(|(c, ws)| {
            let words = ws.iter().map(|s| parse_word(path, s, rank)).collect::<Result<Vec<_>, _>>()?;
            Ok((c, words))
        })
        .collect()
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum DivisorFile {
    List(Vec<i64>),
    Coefficients { coefficients: Vec<i64> },
    ByRay(BTreeMap<String, i64>),
}

pub fn load_divisor(path: &Path, fan: &Fan) -> Result<DivisorData, InputError> {
    let n = fan.rays().len();
    let coefficients = match read_json_or_literal::<DivisorFile>(path)? {
        DivisorFile::List(v) | DivisorFile::Coefficients { coefficients: v } => v,
        DivisorFile::ByRay(map) => {
            let mut v = vec![0; n];
            for (k, a) in map {
                let i: usize = k.trim().parse().map_err(|_| invalid(path, format!("ray key `{k}` is not an index")))?;
                if i >= n {
                    return Err(invalid(path, format!("ray index {i} out of range (fan has {n} rays)")));
                }
                v[i] = a;
            }
            v
        }
    };
    if coefficients.len() != n {
        return Err(invalid(path, format!("{} coefficients for {n} rays", coefficients.len())));
    }
    Ok(DivisorData::new(coefficients))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GluingEntry {
    pub upper: ConeId,
    pub lower: ConeId,
    pub scalar: String,
    pub word: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SheafFile {
    pub system: SystemFile,
    pub gluing: Vec<GluingEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_sigma: Option<BTreeMap<ConeId, MVector>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cover: Option<BTreeMap<ConeId, ConeId>>,
}

/// Decoded sheaf file.
pub struct Sheaf {
    pub system: AdmissibleSystem,
    pub gluing: GluingData,
    pub m: Option<MSigmaAssignment>,
}

impl SheafFile {
    pub fn new(sys: &AdmissibleSystem, g: &GluingData, m: Option<&MSigmaAssignment>) -> Self {
        SheafFile {
            system: SystemFile::from_system(sys),
            gluing: g
                .pairs
                .iter()
                .map(|((s, t), (c, w))| GluingEntry {
                    upper: s.clone(),
                    lower: t.clone(),
                    scalar: c.to_string(),
                    word: w.to_string(),
                })
                .collect(),
            m_sigma: m.map(|m| m.m.clone()),
            cover: m.map(|m| m.cover.clone()),
        }
    }

    pub fn decode(&self, path: &Path) -> Result<Sheaf, InputError> {
        let system = self.system.to_system(path)?;
        let n = system.rank();
        let mut pairs = BTreeMap::new();
        for e in &self.gluing {
            let c = parse_scalar(path, &e.scalar)?;
            let w = parse_word(path, &e.word, n)?;
            if pairs.insert((e.upper.clone(), e.lower.clone()), (c, w)).is_some() {
                return Err(invalid(path, format!("duplicate gluing entry {} < {}", e.lower, e.upper)));
            }
        }
        let gluing = GluingData {
            system_digest: system.digest(),
            rank: n,
            pairs,
        };
        let m = self.m_sigma.as_ref().map(|m| MSigmaAssignment {
            m: m.clone(),
            cover: self.cover.clone().unwrap_or_default(),
        });
        if let Some(m) = &m {
            for c in system.fan().faces() {
                match m.m.get(c) {
                    Some(v) if v.len() == n => {}
                    _ => return Err(invalid(path, format!("m_sigma has no {n}-vector for cone {c}"))),
                }
            }
        }
        Ok(Sheaf { system, gluing, m })
    }
}

pub fn load_sheaf(path: &Path) -> Result<Sheaf, InputError> {
    read_json::<SheafFile>(path)?.decode(path)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<MVector>,
    pub presentations: BTreeMap<ConeId, String>,
}

/// Sections over the system of the enclosed sheaf.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionsFile {
    pub sheaf: SheafFile,
    pub sections: Vec<SectionEntry>,
}

pub struct Sections {
    pub sheaf: Sheaf,
    pub sections: Vec<(Option<MVector>, TwistedSectionData)>,
}

impl SectionsFile {
    pub fn new(sheaf: SheafFile, sections: &[(Option<MVector>, TwistedSectionData)]) -> Self {
        SectionsFile {
            sheaf,
            sections: sections
                .iter()
                .map(|(p, s)| SectionEntry {
                    point: p.clone(),
                    presentations: s
                        .presentations
                        .iter()
                        .map(|(c, a)| (c.clone(), a.to_string()))
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn decode(&self, path: &Path) -> Result<Sections, InputError> {
        let sheaf = self.sheaf.decode(path)?;
        let n = sheaf.system.rank();
        let digest = sheaf.system.digest();
        let sections = self
            .sections
            .iter()
            .map(|e| {
                let presentations = e
                    .presentations
                    .iter()
                    .map(|(c, s)| Ok((c.clone(), parse_elem(path, s, n)?)))
                    .collect::<Result<BTreeMap<_, _>, InputError>>()?;
                Ok((
                    e.point.clone(),
                    TwistedSectionData {
                        system_digest: digest.clone(),
                        rank: n,
                        presentations,
                    },
                ))
            })
            .collect::<Result<Vec<_>, InputError>>()?;
        Ok(Sections { sheaf, sections })
    }
}

pub fn load_sections(path: &Path) -> Result<Sections, InputError> {
    read_json::<SectionsFile>(path)?.decode(path)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdealEntry {
    pub generators: Vec<String>,
    pub degree_bound: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubschemeFile {
    pub system: SystemFile,
    pub ideals: BTreeMap<ConeId, IdealEntry>,
}

impl SubschemeFile {
    pub fn new(sys: &AdmissibleSystem, ideals: &BTreeMap<ConeId, BoundedIdeal>) -> Self {
        SubschemeFile {
            system: SystemFile::from_system(sys),
            ideals: ideals
                .iter()
                .map(|(c, i)| {
                    (
                        c.clone(),
                        IdealEntry {
                            generators: i.generators.iter().map(ToString::to_string).collect(),
                            degree_bound: i.degree_bound,
                        },
                    )
                })
                .collect(),
        }
    }

    pub fn decode(&self, path: &Path) -> Result<(AdmissibleSystem, BTreeMap<ConeId, BoundedIdeal>), InputError> {
        let sys = self.system.to_system(path)?;
        let n = sys.rank();
        let mut out = BTreeMap::new();
        for (c, e) in &self.ideals {
            if !sys.fan().is_face(c) {
                return Err(invalid(path, format!("{c} is not a cone of the fan")));
            }
            let generators = e.generators.iter().map(|s| parse_elem(path, s, n)).collect::<Result<_, _>>()?;
            out.insert(
                c.clone(),
                BoundedIdeal {
                    rank: n,
                    generators,
                    degree_bound: e.degree_bound,
                    domain: WordDomain::Chart(sys.chart(c).clone()),
                },
            );
        }
        Ok((sys, out))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartEntry {
    pub e: MatrixText,
    /// Omitted images are induced from a maximal chart containing the cone.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub images: Option<BTreeMap<String, MatrixText>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub witnesses: BTreeMap<String, MatrixText>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorphismFile {
    pub rank_r: usize,
    pub system: SystemFile,
    pub charts: BTreeMap<ConeId, ChartEntry>,
}

impl MorphismFile {
    pub fn new(m: &MorphismData) -> Self {
        let word_map = |x: &BTreeMap<ReducedWord, QIMatrix>| -> BTreeMap<String, MatrixText> {
            x.iter().map(|(w, a)| (w.to_string(), matrix_text(a))).collect()
        };
        MorphismFile {
            rank_r: m.rank_r,
            system: SystemFile::from_system(&m.system),
            charts: m
                .charts
                .iter()
                .map(|(c, q)| {
                    (
                        c.clone(),
                        ChartEntry {
                            e: matrix_text(&q.identity_image),
                            images: Some(word_map(&q.images)),
                            witnesses: word_map(&q.inverse_witnesses),
                        },
                    )
                })
                .collect(),
        }
    }

    pub fn decode(&self, path: &Path) -> Result<MorphismData, InputError> {
        let sys = self.system.to_system(path)?;
        let n = sys.rank();
        let word_map = |x: &BTreeMap<String, MatrixText>| -> Result<BTreeMap<ReducedWord, QIMatrix>, InputError> {
            x.iter()
                .map(|(w, a)| Ok((parse_word(path, w, n)?, parse_matrix(path, a)?)))
                .collect()
        };
        let mut charts = BTreeMap::new();
        let mut pending = Vec::new();
        for (c, entry) in &self.charts {
            if !sys.fan().is_face(c) {
                return Err(invalid(path, format!("{c} is not a cone of the fan")));
            }
            let e = parse_matrix(path, &entry.e)?;
            if e.size() != self.rank_r {
                return Err(invalid(path, format!("e for {c} is {0}x{0}, expected {1}x{1}", e.size(), self.rank_r)));
            }
            match &entry.images {
                Some(images) => {
                    charts.insert(
                        c.clone(),
                        QuasiHomChart {
                            cone: c.clone(),
                            images: word_map(images)?,
                            identity_image: e,
                            inverse_witnesses: word_map(&entry.witnesses)?,
                        },
                    );
                }
                None => pending.push((c.clone(), e)),
            }
        }
        for (c, e) in pending {
            let chart = if e.is_zero() {
                QuasiHomChart::zero(&sys, &c, self.rank_r)
            } else {
                let upper = sys
                    .fan()
                    .maximal_cones_containing(&c)
                    .into_iter()
                    .find(|s| charts.contains_key(s))
                    .ok_or_else(|| invalid(path, format!("no maximal chart to induce {c} from")))?;
                nctoric::azumaya::induce_chart(&sys, &charts[&upper], &c, &e).map_err(|x| invalid(path, x))?
            };
            charts.insert(c, chart);
        }
        Ok(MorphismData {
            rank_r: self.rank_r,
            system: sys,
            charts,
        })
    }
}

pub fn load_morphism(path: &Path) -> Result<MorphismData, InputError> {
    read_json::<MorphismFile>(path)?.decode(path)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateEntry {
    pub scalar: String,
    pub word: String,
}

pub type CandidateFile = BTreeMap<ConeId, CandidateEntry>;

/// `cone → matrix`, an idempotent template.
pub type PatternFile = BTreeMap<ConeId, MatrixText>;
