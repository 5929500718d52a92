//! The `splay` command-line front end.
//!
//! Every command reads one JSON input file and writes one JSON report.
//! Exit codes: 0 success, 1 parse or validation error, 2 hypothesis
//! violation during `resolve`, 3 a verification certificate failed.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::arrangement::{parse_arrangement, Arrangement, Hyperplane};
use crate::blowup::{resolve, BlowupError};
use crate::chartmodel::{verify_dimension_formulas, ChartReport};
use crate::classify::{classify_arrangement, classify_flat};
use crate::exactla::Rational;
use crate::groebner::{
    faber_identity_check, flat_support_probe, jacobian_ideal, parse_poly, product_decomposition_check,
    refute_by_supports, vars, GroebnerError, Ideal, Poly, PrimaryComponentSpec, ProbeOutcome, Vars,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 1;
pub const EXIT_HYPOTHESIS: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "splay", version, about = "Splayed arrangements and crepant resolutions of double covers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Seed for randomized sampling.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Sample points per check (verify-chart).
    #[arg(long, global = true, default_value_t = 5)]
    pub samples: usize,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Flats of the intersection lattice.
    Lattice { input: PathBuf },
    /// Splayed / near-pencil / admissible verdicts.
    Classify { input: PathBuf },
    /// Run the two-phase blowup resolution.
    Resolve { input: PathBuf },
    /// Chart-level tangent-space checks for one blowup.
    VerifyChart {
        input: PathBuf,
        /// Comma-separated hyperplane names cutting out the center.
        #[arg(long)]
        center: String,
        /// Comma-separated hyperplane names; all lattice flats when omitted.
        #[arg(long)]
        q: Option<String>,
    },
    /// Check (J_FG, FG) = (F,G) ∩ (J_F,F) ∩ (J_G,G).
    Faber { input: PathBuf },
    /// Certify the primary decomposition of (J_FG, FG).
    PdVerify { input: PathBuf },
    /// Associated-prime probes for every flat of the cone over an arrangement
    /// or over the linear factors of a factor file.
    Explore { input: PathBuf },
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn parse(message: impl ToString) -> Self {
        Self {
            code: EXIT_PARSE,
            message: message.to_string(),
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_PARSE,
            };
        }
    };
    let (code, report) = match execute(&cli) {
        Ok(pair) => pair,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            return f.code;
        }
    };
    let write_result = match &cli.out {
        Some(path) => fs::write(path, report.as_bytes()),
        None => stdout.write_all(report.as_bytes()),
    };
    if let Err(e) = write_result {
        let _ = writeln!(stderr, "error: cannot write report: {e}");
        return EXIT_PARSE;
    }
    code
}

fn read(path: &PathBuf) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))
}

fn load_arrangement(path: &PathBuf) -> Result<Arrangement, Failure> {
    parse_arrangement(&read(path)?).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable report");
    s.push('\n');
    s
}

fn verified(ok: bool) -> i32 {
    if ok {
        EXIT_OK
    } else {
        EXIT_VERIFY
    }
}

fn execute(cli: &Cli) -> Result<(i32, String), Failure> {
    match &cli.command {
        Command::Lattice { input } => Ok((EXIT_OK, to_json(&lattice_report(&load_arrangement(input)?)))),
        Command::Classify { input } => Ok((EXIT_OK, to_json(&classify_report(&load_arrangement(input)?)))),
        Command::Resolve { input } => {
            let arr = load_arrangement(input)?;
            match resolve(&arr) {
                Ok(trace) => Ok((EXIT_OK, trace.to_json() + "\n")),
                Err(e @ BlowupError::HypothesisViolation { .. }) => Err(Failure {
                    code: EXIT_HYPOTHESIS,
                    message: e.to_string(),
                }),
                Err(e) => Err(Failure {
                    code: EXIT_VERIFY,
                    message: e.to_string(),
                }),
            }
        }
        Command::VerifyChart { input, center, q } => {
            let arr = load_arrangement(input)?;
            let reports = chart_reports(&arr, center, q.as_deref(), cli.samples, cli.seed)?;
            let ok = reports.iter().all(ChartReport::passes);
            Ok((verified(ok), to_json(&reports)))
        }
        Command::Faber { input } => {
            let fx = FactorFixture::load(&read(input)?)?;
            let cert = faber_identity_check(fx.vars.clone(), &fx.f(), &fx.g()).map_err(Failure::parse)?;
            Ok((verified(cert.equal), to_json(&cert)))
        }
        Command::PdVerify { input } => {
            let fx = FactorFixture::load(&read(input)?)?;
            match product_decomposition_check(fx.vars.clone(), &fx.f_factors, &fx.g_factors, &fx.comps_f, &fx.comps_g) {
                Ok(cert) => Ok((verified(cert.passes()), to_json(&cert))),
                Err(e @ GroebnerError::Decomposition(_)) => Err(Failure {
                    code: EXIT_VERIFY,
                    message: e.to_string(),
                }),
                Err(e) => Err(Failure::parse(e)),
            }
        }
        Command::Explore { input } => {
            let text = read(input)?;
            let is_factor_file = serde_json::from_slice::<serde_json::Value>(&text)
                .is_ok_and(|v| v.get("variables").is_some());
            let table = if is_factor_file {
                let fx = FactorFixture::load(&text)?;
                let forms = fx
                    .cone()
                    .ok_or_else(|| Failure::parse(format!("{}: explore needs linear factors", input.display())))?;
                // supplied components only settle probes once certified
                let certified = product_decomposition_check(
                    fx.vars.clone(),
                    &fx.f_factors,
                    &fx.g_factors,
                    &fx.comps_f,
                    &fx.comps_g,
                )
                .is_ok_and(|c| c.passes());
                let supports = fx.supports();
                explore_forms(&fx.vars, &forms, certified.then_some(supports.as_slice()))
            } else {
                explore(&load_arrangement(input)?)
            };
            Ok((EXIT_OK, to_json(&table.map_err(Failure::parse)?)))
        }
    }
}

#[derive(Debug, Serialize)]
pub struct FlatRecord {
    pub containing: Vec<String>,
    pub codim: usize,
    pub dim: usize,
}

#[derive(Debug, Serialize)]
pub struct LatticeReport {
    pub ambient_dim: usize,
    pub flats: Vec<FlatRecord>,
}

pub fn lattice_report(arr: &Arrangement) -> LatticeReport {
    LatticeReport {
        ambient_dim: arr.dim(),
        flats: arr
            .intersection_lattice()
            .iter()
            .map(|f| FlatRecord {
                containing: arr.names(&f.containing),
                codim: f.codim,
                dim: f.proj_dim,
            })
            .collect(),
    }
}

#[derive(Debug, Serialize)]
pub struct WitnessRecord {
    pub part1: Vec<String>,
    pub part2: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct VerdictRecord {
    pub containing: Vec<String>,
    pub codim: usize,
    pub dim: usize,
    pub splayed: bool,
    pub witness: Option<WitnessRecord>,
    pub near_pencil: bool,
    pub admissible: bool,
    pub branch_count: usize,
}

#[derive(Debug, Serialize)]
pub struct ClassifyReport {
    pub flats: Vec<VerdictRecord>,
    pub ours: bool,
    pub classic: bool,
    pub branch_degree_sum: usize,
    pub warnings: Vec<String>,
}

pub fn classify_report(arr: &Arrangement) -> ClassifyReport {
    let c = classify_arrangement(arr);
    ClassifyReport {
        flats: c
            .verdicts
            .iter()
            .map(|v| VerdictRecord {
                containing: arr.names(&v.flat.containing),
                codim: v.flat.codim,
                dim: v.flat.proj_dim,
                splayed: v.splayed.is_some(),
                witness: v.splayed.as_ref().map(|w| WitnessRecord {
                    part1: arr.names(&w.part1),
                    part2: arr.names(&w.part2),
                }),
                near_pencil: v.near_pencil,
                admissible: v.admissible,
                branch_count: v.branch_count,
            })
            .collect(),
        ours: c.ours,
        classic: c.classic,
        branch_degree_sum: c.branch_degree_sum,
        warnings: c.warnings,
    }
}

fn names_to_indices(arr: &Arrangement, list: &str) -> Result<Vec<usize>, Failure> {
    let mut out = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|name| {
            arr.index_of(name)
                .ok_or_else(|| Failure::parse(format!("unknown hyperplane {name:?}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn chart_reports(
    arr: &Arrangement,
    center: &str,
    q: Option<&str>,
    samples: usize,
    seed: u64,
) -> Result<Vec<ChartReport>, Failure> {
    let center_idx = names_to_indices(arr, center)?;
    let center = arr
        .flat_of(&center_idx)
        .ok_or_else(|| Failure::parse("center is empty"))?;
    let q_sets: Vec<Vec<usize>> = match q {
        Some(q) => vec![names_to_indices(arr, q)?],
        None => arr
            .intersection_lattice()
            .into_iter()
            .filter(|f| {
                let mut joint = f.containing.clone();
                joint.extend(&center.containing);
                arr.flat_of(&joint).is_some()
            })
            .map(|f| f.containing)
            .collect(),
    };
    q_sets
        .iter()
        .map(|q| verify_dimension_formulas(arr, &center, q, samples, seed).map_err(Failure::parse))
        .collect()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComponentEntry {
    label: String,
    generators: Vec<String>,
    radical: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FactorFile {
    variables: Vec<String>,
    f_factors: Vec<String>,
    g_factors: Vec<String>,
    #[serde(default)]
    comps_f: Vec<ComponentEntry>,
    #[serde(default)]
    comps_g: Vec<ComponentEntry>,
}

/// `F = Π f_i`, `G = Π g_j` in disjoint variables, with optional primary
/// decompositions of their singular ideals.
#[derive(Debug, Clone)]
pub struct FactorFixture {
    pub vars: Vars,
    pub f_factors: Vec<Poly>,
    pub g_factors: Vec<Poly>,
    pub comps_f: Vec<PrimaryComponentSpec>,
    pub comps_g: Vec<PrimaryComponentSpec>,
}

impl FactorFixture {
    fn load(text: &[u8]) -> Result<Self, Failure> {
        Self::parse(text).map_err(Failure::parse)
    }

    pub fn parse(text: &[u8]) -> Result<Self, String> {
        let file: FactorFile = serde_json::from_slice(text).map_err(|e| e.to_string())?;
        let v = vars(&file.variables);
        let polys = |list: &[String]| -> Result<Vec<Poly>, String> {
            list.iter()
                .map(|s| parse_poly(s, &v).map_err(|e| e.to_string()))
                .collect()
        };
        let comps = |list: &[ComponentEntry]| -> Result<Vec<PrimaryComponentSpec>, String> {
            list.iter()
                .map(|c| {
                    Ok(PrimaryComponentSpec {
                        component: Ideal::new(v.clone(), polys(&c.generators)?),
                        radical: Ideal::new(v.clone(), polys(&c.radical)?),
                        label: c.label.clone(),
                    })
                })
                .collect()
        };
        let fixture = Self {
            f_factors: polys(&file.f_factors)?,
            g_factors: polys(&file.g_factors)?,
            comps_f: comps(&file.comps_f)?,
            comps_g: comps(&file.comps_g)?,
            vars: v.clone(),
        };
        if fixture.f_factors.is_empty() || fixture.g_factors.is_empty() {
            return Err("F and G need at least one factor each".into());
        }
        Ok(fixture)
    }

    pub fn f(&self) -> Poly {
        self.f_factors.iter().fold(Poly::one(self.vars.len()), |a, b| &a * b)
    }

    pub fn g(&self) -> Poly {
        self.g_factors.iter().fold(Poly::one(self.vars.len()), |a, b| &a * b)
    }

    /// The factors as a central arrangement, when they are all linear forms.
    pub fn cone(&self) -> Option<Vec<(String, Vec<Rational>)>> {
        let n = self.vars.len();
        self.f_factors
            .iter()
            .chain(&self.g_factors)
            .map(|f| {
                let mut coeffs = vec![Rational::from_integer(0.into()); n];
                for (m, c) in f.terms() {
                    if m.iter().sum::<u32>() != 1 {
                        return None;
                    }
                    coeffs[m.iter().position(|&e| e == 1).unwrap()] = c.clone();
                }
                Some((f.format(&self.vars), coeffs))
            })
            .collect()
    }

    /// Radicals of the full decomposition: the pair ideals and the pushed
    /// factor components.
    pub fn supports(&self) -> Vec<Ideal> {
        let mut out = Vec::new();
        for f in &self.f_factors {
            for g in &self.g_factors {
                out.push(Ideal::new(self.vars.clone(), vec![f.clone(), g.clone()]));
            }
        }
        out.extend(self.comps_f.iter().chain(&self.comps_g).map(|c| c.radical.clone()));
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExploreRow {
    pub flat: Vec<String>,
    pub codim: usize,
    pub splayed: bool,
    pub near_pencil: bool,
    pub inside: bool,
    pub witness: Option<String>,
    pub outcome: ProbeOutcome,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExploreReport {
    pub variables: Vec<String>,
    pub polynomial: String,
    /// Rows are evidence about associated primes, not theorems.
    pub label: &'static str,
    pub rows: Vec<ExploreRow>,
}

/// Probes every flat of codimension ≥ 2 of the central arrangement cut out
/// by `forms` in `A^m` against the singular ideal of their product. With
/// `supports`, inconclusive probes are settled against that decomposition.
pub fn explore_forms(
    var_names: &[String],
    forms: &[(String, Vec<Rational>)],
    supports: Option<&[Ideal]>,
) -> Result<ExploreReport, GroebnerError> {
    let m = var_names.len();
    let v = vars(var_names);
    let zero = Rational::from_integer(0.into());
    let polys: Vec<Poly> = forms.iter().map(|(_, c)| Poly::linear(c, &zero)).collect();
    let f = polys.iter().fold(Poly::one(m), |a, b| &a * b);
    let ideal = jacobian_ideal(v.clone(), &f)?;

    // one extra projective coordinate keeps the origin of A^m as a flat
    let padded: Vec<Hyperplane> = forms
        .iter()
        .map(|(name, c)| {
            let mut c = c.clone();
            c.push(zero.clone());
            Hyperplane::new(name.clone(), c).expect("nonzero form")
        })
        .collect();
    let arr = Arrangement::new(m, padded, None).map_err(|e| GroebnerError::Parse {
        text: String::new(),
        reason: e.to_string(),
    })?;
    let mut rows = Vec::new();
    for flat in arr.intersection_lattice().iter().filter(|f| f.codim >= 2) {
        let verdict = classify_flat(&arr, flat).expect("lattice flat");
        let gens: Vec<Poly> = flat
            .forms_span
            .basis()
            .iter()
            .map(|b| Poly::linear(&b[..m], &zero))
            .collect();
        let prime = Ideal::new(v.clone(), gens);
        let mut probe = flat_support_probe(&ideal, &prime)?;
        if let Some(s) = supports {
            probe = refute_by_supports(probe, &prime, s)?;
        }
        rows.push(ExploreRow {
            flat: arr.names(&flat.containing),
            codim: flat.codim,
            splayed: verdict.splayed.is_some(),
            near_pencil: verdict.near_pencil,
            inside: probe.inside,
            witness: probe.witness,
            outcome: probe.outcome,
        });
    }
    Ok(ExploreReport {
        variables: var_names.to_vec(),
        polynomial: f.format(&v),
        label: "evidence",
        rows,
    })
}

/// `explore` on an arrangement file: the hyperplanes are read as linear
/// forms on `A^{n+1}` with coordinates `x1, ..., x{n+1}`.
pub fn explore(arr: &Arrangement) -> Result<ExploreReport, GroebnerError> {
    let names: Vec<String> = (1..=arr.dim() + 1).map(|i| format!("x{i}")).collect();
    let forms: Vec<(String, Vec<Rational>)> = arr
        .hyperplanes()
        .iter()
        .map(|h| (h.name.clone(), h.coeffs().to_vec()))
        .collect();
    explore_forms(&names, &forms, None)
}
