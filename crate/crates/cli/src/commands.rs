use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use nctoric::azumaya::{
    a1_probe, image_kernel_bounded, sample_matrix_model, surrogate_basis, verify_morphism, Pattern,
};
use nctoric::deltasystem::{augment_system, build_system, check_admissible, soften, AdmissibleSystem};
use nctoric::exactmath::{GaussRational as G, QIMatrix};
use nctoric::freeword::ReducedWord;
use nctoric::ncalgebra::{bounded_ideal_member, Membership};
use nctoric::sheaves::{
    abelian_obstruction, check_gluing, check_twisted_section, combine_sections, extend_section, polytope_sections,
    sheaf_from_divisor, sheaves_isomorphic, subscheme_from_sections, TwistedSectionData,
};
use nctoric::toricfan::{validate_fan, ConeId, MVector, RawFan};

use crate::files::*;
use crate::report::Report;

#[derive(Debug, Parser)]
#[command(name = "nctoric", version, about = "Soft noncommutative toric schemes, sections and matrix morphisms")]
pub struct Cli {
    /// Print the report as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    /// Search or truncation bound for bounded computations.
    #[arg(long, global = true)]
    pub bound: Option<usize>,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Where to write the produced artifact.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Group,
}

#[derive(Debug, Subcommand)]
pub enum Group {
    /// Fans: validation and index checks.
    #[command(subcommand)]
    Fan(FanCmd),
    /// Δ-systems of chart submonoids.
    #[command(subcommand)]
    System(SystemCmd),
    /// Gluing data of twisted line sheaves.
    #[command(subcommand)]
    Sheaf(SheafCmd),
    /// Twisted sections.
    #[command(subcommand)]
    Section(SectionCmd),
    /// Ideals cut out by sections.
    #[command(subcommand)]
    Subscheme(SubschemeCmd),
    /// Matrix morphisms to the scheme.
    #[command(subcommand)]
    Morphism(MorphismCmd),
    /// Probes of single matrices.
    #[command(subcommand)]
    Probe(ProbeCmd),
}

#[derive(Debug, Subcommand)]
pub enum FanCmd {
    /// Validate a fan file.
    Check { fan: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum SystemCmd {
    /// Default Δ-system of a fan, optionally with chosen lifts on maximal cones.
    Build {
        fan: PathBuf,
        #[arg(long)]
        lifts: Option<PathBuf>,
    },
    /// Adjoin extra words to charts.
    Augment {
        system: PathBuf,
        #[arg(long)]
        extras: PathBuf,
    },
    /// Adjoin extra words to non-maximal charts only.
    Soften {
        system: PathBuf,
        #[arg(long)]
        extras: PathBuf,
    },
    /// Check every admissibility condition.
    Check { system: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum SheafCmd {
    /// Gluing data of the sheaf of a divisor (input: fan or system file).
    FromDivisor {
        input: PathBuf,
        /// Divisor file or inline JSON such as `[0,0,3]`.
        #[arg(long)]
        divisor: PathBuf,
    },
    /// Check gluing data.
    Check { sheaf: PathBuf },
    /// Decide whether two sheaves on one system are isomorphic.
    Isom {
        first: PathBuf,
        second: PathBuf,
        #[arg(long)]
        candidate: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum SectionCmd {
    /// Lattice points of the divisor polytope.
    List {
        fan: PathBuf,
        /// Divisor file or inline JSON such as `[0,0,3]`.
        #[arg(long)]
        divisor: PathBuf,
    },
    /// Extend lattice points to twisted sections (input: sheaf file with m_sigma).
    Extend {
        sheaf: PathBuf,
        /// Comma-separated lattice point; repeatable.
        #[arg(long = "point")]
        points: Vec<String>,
        /// Extend every lattice point of this divisor's polytope.
        #[arg(long)]
        all: Option<PathBuf>,
    },
    /// Check every section in a sections file.
    Check { sections: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum SubschemeCmd {
    /// Per-chart ideals cut out by sections.
    Build {
        sections: PathBuf,
        /// Comma-separated scalars combining all sections into one.
        #[arg(long)]
        coeffs: Option<String>,
    },
    /// Bounded membership of an element in one chart ideal.
    Member {
        subscheme: PathBuf,
        #[arg(long)]
        cone: String,
        #[arg(long)]
        element: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum MorphismCmd {
    /// Verify a morphism file.
    Check { morphism: PathBuf },
    /// Random matrix model over a fan or system file.
    Sample {
        input: PathBuf,
        #[arg(long)]
        rank: usize,
        /// Idempotent template; the trivial pattern when omitted.
        #[arg(long)]
        pattern: Option<PathBuf>,
    },
    /// Basis of the surrogate algebra.
    Surrogate { morphism: PathBuf },
    /// Truncated kernel of one chart map.
    Kernel {
        morphism: PathBuf,
        #[arg(long)]
        cone: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum ProbeCmd {
    /// Minimal polynomial and fiber dimensions of a matrix (file or literal).
    A1 {
        #[arg(long)]
        matrix: String,
    },
}

const DEFAULT_BOUND: usize = 2;

fn parse_cone(s: &str) -> Result<ConeId, InputError> {
    s.parse().map_err(InputError::Usage)
}

fn parse_point(s: &str) -> Result<MVector, InputError> {
    s.split(',')
        .map(|t| t.trim().parse::<i64>().map_err(|_| InputError::Usage(format!("bad point `{s}`"))))
        .collect()
}

fn emit<T: serde::Serialize>(cli: &Cli, report: &mut Report, value: &T) -> Result<(), InputError> {
    if let Some(out) = &cli.out {
        write_json(out, value)?;
        report.output = Some(out.display().to_string());
    }
    Ok(())
}

fn system_failures(report: &mut Report, sys: &AdmissibleSystem) {
    for f in check_admissible(sys).failures() {
        report.fail(&f.clause, &f.cone, &f.detail);
    }
}

/// Runs one command. `Err` means a usage or parse problem (exit code 2).
pub fn run(cli: &Cli) -> Result<Report, InputError> {
    match &cli.command {
        Group::Fan(FanCmd::Check { fan }) => {
            let mut r = Report::new("fan check");
            let raw: RawFan = read_json(fan)?;
            match validate_fan(&raw) {
                Ok(f) => r.note(format!(
                    "rank {}, {} rays, {} maximal cones, {} faces",
                    f.rank(),
                    f.rays().len(),
                    f.max_cones().len(),
                    f.num_faces()
                )),
                Err(e) => r.fail(e.clause(), fan.display(), e),
            }
            Ok(r)
        }
        Group::System(cmd) => run_system(cli, cmd),
        Group::Sheaf(cmd) => run_sheaf(cli, cmd),
        Group::Section(cmd) => run_section(cli, cmd),
        Group::Subscheme(cmd) => run_subscheme(cli, cmd),
        Group::Morphism(cmd) => run_morphism(cli, cmd),
        Group::Probe(ProbeCmd::A1 { matrix }) => {
            let mut r = Report::new("probe a1");
            let rows: MatrixText = read_json_or_literal(Path::new(matrix))?;
            let a = parse_matrix(Path::new("<matrix>"), &rows)?;
            let p = a1_probe(&a);
            r.note(format!("minimal polynomial: {}", p.minpoly));
            for (l, d) in &p.fibers {
                r.note(format!("root {l}: fiber dimension {d}"));
            }
            if let Some(rest) = &p.irreducible_rest {
                r.note(format!("factor without roots in Q(i): {rest}"));
            }
            if p.truncated {
                r.bound_relative("root search was cut off by coefficient size");
            }
            Ok(r)
        }
    }
}

fn run_system(cli: &Cli, cmd: &SystemCmd) -> Result<Report, InputError> {
    match cmd {
        SystemCmd::Build { fan, lifts } => {
            let mut r = Report::new("system build");
            let f = load_fan(fan)?;
            let lifts = lifts.as_deref().map(|p| load_word_map(p, f.rank())).transpose()?;
            match build_system(&f, lifts.as_ref()) {
                Ok(sys) => {
                    system_failures(&mut r, &sys);
                    r.note(format!("digest {}", sys.digest()));
                    emit(cli, &mut r, &SystemFile::from_system(&sys))?;
                }
                Err(e) => r.fail("system/construction", fan.display(), e),
            }
            Ok(r)
        }
        SystemCmd::Augment { system, extras } | SystemCmd::Soften { system, extras } => {
            let softening = matches!(cmd, SystemCmd::Soften { .. });
            let mut r = Report::new(if softening { "system soften" } else { "system augment" });
            let sys = load_system(system)?;
            let extra = load_word_map(extras, sys.rank())?;
            let result = if softening {
                soften(&sys, &extra).map(|(s, rec)| {
                    for (c, ws) in &rec.added {
                        if !ws.is_empty() {
                            let ws: Vec<String> = ws.iter().map(ToString::to_string).collect();
                            r.note(format!("{c}: added {}", ws.join(", ")));
                        }
                    }
                    s
                })
            } else {
                augment_system(&sys, &extra)
            };
            match result {
                Ok(s) => {
                    system_failures(&mut r, &s);
                    emit(cli, &mut r, &SystemFile::from_system(&s))?;
                }
                Err(e) => r.fail("system/extras", extras.display(), e),
            }
            Ok(r)
        }
        SystemCmd::Check { system } => {
            let mut r = Report::new("system check");
            let sys = load_system(system)?;
            system_failures(&mut r, &sys);
            r.note(format!("{} charts, digest {}", sys.charts().len(), sys.digest()));
            Ok(r)
        }
    }
}

fn sheaf_findings(r: &mut Report, rep: &nctoric::sheaves::SheafReport) {
    for f in &rep.findings {
        r.fail(f.clause, &f.locus, &f.detail);
    }
}

fn run_sheaf(cli: &Cli, cmd: &SheafCmd) -> Result<Report, InputError> {
    match cmd {
        SheafCmd::FromDivisor { input, divisor } => {
            let mut r = Report::new("sheaf from-divisor");
            let sys = load_system(input)?;
            let d = load_divisor(divisor, sys.fan())?;
            match sheaf_from_divisor(&sys, &d) {
                Ok(out) => {
                    sheaf_findings(&mut r, &check_gluing(&out.system, &out.gluing));
                    let added: usize = out.record.added.values().map(Vec::len).sum();
                    r.note(format!("softening added {added} generators"));
                    emit(cli, &mut r, &SheafFile::new(&out.system, &out.gluing, Some(&out.m)))?;
                }
                Err(e) => r.fail("sheaf/construction", divisor.display(), e),
            }
            Ok(r)
        }
        SheafCmd::Check { sheaf } => {
            let mut r = Report::new("sheaf check");
            let s = load_sheaf(sheaf)?;
            sheaf_findings(&mut r, &check_gluing(&s.system, &s.gluing));
            Ok(r)
        }
        SheafCmd::Isom { first, second, candidate } => {
            let mut r = Report::new("sheaf isom");
            let a = load_sheaf(first)?;
            let b = load_sheaf(second)?;
            // a sheaf on a system pulls back to any softening of it
            let contains = |big: &AdmissibleSystem, small: &AdmissibleSystem| {
                big.fan() == small.fan()
                    && small
                        .charts()
                        .iter()
                        .all(|(c, m)| m.gens().iter().all(|w| big.chart(c).member(w)))
            };
            let (sys, g1, g2) = if contains(&b.system, &a.system) {
                (&b.system, a.gluing.pulled_back_to(&b.system), b.gluing.clone())
            } else if contains(&a.system, &b.system) {
                (&a.system, a.gluing.clone(), b.gluing.pulled_back_to(&a.system))
            } else {
                r.fail("same-system", second.display(), "neither system refines the other");
                return Ok(r);
            };
            let cand = match candidate {
                Some(p) => {
                    let raw: CandidateFile = read_json(p)?;
                    let mut m = BTreeMap::new();
                    for (c, e) in raw {
                        m.insert(c, (parse_scalar(p, &e.scalar)?, parse_word(p, &e.word, sys.rank())?));
                    }
                    m
                }
                None => sys
                    .fan()
                    .faces()
                    .map(|c| (c.clone(), (G::from(1), ReducedWord::identity(sys.rank()))))
                    .collect(),
            };
            match sheaves_isomorphic(sys, &g1, &g2, &cand) {
                Ok(true) => r.note("the candidate trivialization is an isomorphism"),
                Ok(false) => match abelian_obstruction(sys, &g1, &g2) {
                    Some(why) => r.fail("isomorphism/abelian-shadow", "system", why),
                    None if candidate.is_some() => r.fail("isomorphism/candidate", "system", "the candidate does not intertwine the gluing data"),
                    None => r.bound_relative("no obstruction on the commutative shadow and no candidate supplied"),
                },
                Err(e) => r.fail("isomorphism/candidate-unit", "candidate", e),
            }
            Ok(r)
        }
    }
}

fn section_findings(r: &mut Report, sys: &AdmissibleSystem, g: &nctoric::sheaves::GluingData, k: usize, s: &TwistedSectionData) {
    for f in check_twisted_section(sys, g, s).findings {
        r.fail(f.clause, format!("section {k}, {}", f.locus), f.detail);
    }
}

fn run_section(cli: &Cli, cmd: &SectionCmd) -> Result<Report, InputError> {
    match cmd {
        SectionCmd::List { fan, divisor } => {
            let mut r = Report::new("section list");
            let f = load_fan(fan)?;
            let d = load_divisor(divisor, &f)?;
            match polytope_sections(&f, &d) {
                Ok(pts) => {
                    r.note(format!("{} lattice points", pts.len()));
                    for p in &pts {
                        r.note(format!("{p:?}"));
                    }
                    emit(cli, &mut r, &pts)?;
                }
                Err(e) => r.fail("polytope/bounded", divisor.display(), e),
            }
            Ok(r)
        }
        SectionCmd::Extend { sheaf, points, all } => {
            let mut r = Report::new("section extend");
            let s = load_sheaf(sheaf)?;
            let m = s
                .m
                .clone()
                .ok_or_else(|| invalid(sheaf, "sheaf file has no m_sigma; produce it with `sheaf from-divisor`"))?;
            let mut pts: Vec<MVector> = points.iter().map(|p| parse_point(p)).collect::<Result<_, _>>()?;
            if let Some(dp) = all {
                let d = load_divisor(dp, s.system.fan())?;
                match polytope_sections(s.system.fan(), &d) {
                    Ok(v) => pts.extend(v),
                    Err(e) => {
                        r.fail("polytope/bounded", dp.display(), e);
                        return Ok(r);
                    }
                }
            }
            if pts.is_empty() {
                return Err(InputError::Usage("give --point or --all".into()));
            }
            let (mut sys, mut g) = (s.system, s.gluing);
            let mut secs: Vec<(Option<MVector>, TwistedSectionData)> = Vec::new();
            for p in pts {
                if p.len() != sys.rank() {
                    return Err(InputError::Usage(format!("point {p:?} has the wrong length")));
                }
                match extend_section(&sys, &g, &m, &p) {
                    Ok(ext) => {
                        sys = ext.system;
                        g = ext.gluing;
                        for (_, s) in secs.iter_mut() {
                            *s = s.pulled_back_to(&sys);
                        }
                        secs.push((Some(p), ext.section));
                    }
                    Err(e) => {
                        r.fail("section/extension", format!("{p:?}"), e);
                        return Ok(r);
                    }
                }
            }
            for (k, (_, s)) in secs.iter().enumerate() {
                section_findings(&mut r, &sys, &g, k, s);
            }
            r.note(format!("{} sections over system {}", secs.len(), sys.digest()));
            emit(cli, &mut r, &SectionsFile::new(SheafFile::new(&sys, &g, Some(&m)), &secs))?;
            Ok(r)
        }
        SectionCmd::Check { sections } => {
            let mut r = Report::new("section check");
            let s = load_sections(sections)?;
            for (k, (_, sec)) in s.sections.iter().enumerate() {
                section_findings(&mut r, &s.sheaf.system, &s.sheaf.gluing, k, sec);
            }
            r.note(format!("{} sections checked", s.sections.len()));
            Ok(r)
        }
    }
}

fn run_subscheme(cli: &Cli, cmd: &SubschemeCmd) -> Result<Report, InputError> {
    match cmd {
        SubschemeCmd::Build { sections, coeffs } => {
            let mut r = Report::new("subscheme build");
            let s = load_sections(sections)?;
            let sys = &s.sheaf.system;
            let mut secs: Vec<TwistedSectionData> = s.sections.into_iter().map(|(_, x)| x).collect();
            if let Some(c) = coeffs {
                let cs: Vec<G> = c
                    .split(',')
                    .map(|t| t.trim().parse::<G>().map_err(|e| InputError::Usage(e.to_string())))
                    .collect::<Result<_, _>>()?;
                if cs.len() != secs.len() {
                    return Err(InputError::Usage(format!("{} coefficients for {} sections", cs.len(), secs.len())));
                }
                match combine_sections(&cs, &secs) {
                    Ok(x) => secs = vec![x],
                    Err(e) => {
                        r.fail("section/combination", sections.display(), e);
                        return Ok(r);
                    }
                }
            }
            match subscheme_from_sections(sys, &secs, cli.bound.unwrap_or(DEFAULT_BOUND)) {
                Ok(ideals) => {
                    for (c, i) in &ideals {
                        let gens: Vec<String> = i.generators.iter().map(ToString::to_string).collect();
                        r.note(format!("{c}: ({})", gens.join(", ")));
                    }
                    emit(cli, &mut r, &SubschemeFile::new(sys, &ideals))?;
                }
                Err(e) => r.fail("same-system", sections.display(), e),
            }
            Ok(r)
        }
        SubschemeCmd::Member { subscheme, cone, element } => {
            let mut r = Report::new("subscheme member");
            let (sys, ideals) = read_json::<SubschemeFile>(subscheme)?.decode(subscheme)?;
            let c = parse_cone(cone)?;
            let mut ideal = ideals
                .get(&c)
                .cloned()
                .ok_or_else(|| InputError::Usage(format!("no ideal for cone {c}")))?;
            if let Some(b) = cli.bound {
                ideal.degree_bound = b;
            }
            let target = parse_elem(Path::new("<element>"), element, sys.rank())?;
            match bounded_ideal_member(&ideal, &target) {
                Ok(Membership::Member(cert)) => {
                    r.note(format!("member; certificate with {} terms", cert.terms.len()));
                    for t in &cert.terms {
                        r.note(format!("({})·{}·g{}·{}", t.coeff, t.left, t.generator, t.right));
                    }
                }
                Ok(Membership::NotFoundAtBound(d)) => r.bound_relative(format!("no certificate at bound {d}")),
                Err(e) => return Err(InputError::Usage(e.to_string())),
            }
            Ok(r)
        }
    }
}

fn run_morphism(cli: &Cli, cmd: &MorphismCmd) -> Result<Report, InputError> {
    match cmd {
        MorphismCmd::Check { morphism } => {
            let mut r = Report::new("morphism check");
            let m = load_morphism(morphism)?;
            let rep = verify_morphism(&m);
            for f in &rep.findings {
                r.fail(f.clause, &f.locus, &f.detail);
            }
            r.note(format!(
                "strong: {}, complete: {}; relations checked among products of length <= {}",
                rep.strong, rep.complete, rep.relation_bound
            ));
            Ok(r)
        }
        MorphismCmd::Sample { input, rank, pattern } => {
            let mut r = Report::new("morphism sample");
            let sys = load_system(input)?;
            let pat = match pattern {
                None => Pattern::Trivial,
                Some(p) => {
                    let raw: PatternFile = read_json(p)?;
                    let mut e = BTreeMap::new();
                    for (c, m) in raw {
                        e.insert(c, parse_matrix(p, &m)?);
                    }
                    Pattern::Idempotents(e)
                }
            };
            match sample_matrix_model(&sys, *rank, &pat, cli.seed) {
                Ok(m) => {
                    for f in verify_morphism(&m).findings {
                        r.fail(f.clause, &f.locus, &f.detail);
                    }
                    emit(cli, &mut r, &MorphismFile::new(&m))?;
                }
                Err(e) => r.fail("morphism/pattern", input.display(), e),
            }
            Ok(r)
        }
        MorphismCmd::Surrogate { morphism } => {
            let mut r = Report::new("morphism surrogate");
            let m = load_morphism(morphism)?;
            match surrogate_basis(&m) {
                Ok(b) => {
                    r.note(format!("dimension {}", b.len()));
                    for x in &b {
                        r.note(x);
                    }
                    let rows: Vec<MatrixText> = b.iter().map(matrix_text).collect();
                    emit(cli, &mut r, &rows)?;
                }
                Err(e) => r.fail("morphism/valid", morphism.display(), e),
            }
            Ok(r)
        }
        MorphismCmd::Kernel { morphism, cone } => {
            let mut r = Report::new("morphism kernel");
            let m = load_morphism(morphism)?;
            let c = parse_cone(cone)?;
            if !m.system.fan().is_face(&c) {
                return Err(InputError::Usage(format!("{c} is not a cone of the fan")));
            }
            let d = cli.bound.unwrap_or(DEFAULT_BOUND);
            match image_kernel_bounded(&m, &c, d) {
                Ok(k) => {
                    r.note(format!("{} kernel elements among products of length <= {d}", k.generators.len()));
                    for g in &k.generators {
                        r.note(g);
                    }
                }
                Err(e) => r.fail("morphism/valid", morphism.display(), e),
            }
            Ok(r)
        }
    }
}

/// Matrix literal helper shared with tests.
pub fn matrix_literal(m: &QIMatrix) -> String {
    serde_json::to_string(&matrix_text(m)).expect("serializes")
}

/// Applies `NCTORIC_THREADS` to the global thread pool, if set.
pub fn configure_threads() {
    if let Some(n) = std::env::var("NCTORIC_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}
