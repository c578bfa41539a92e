use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context as _, Result};
use clap::{Parser, Subcommand, ValueEnum};
use lipsat_core::error::Error;
use lipsat_core::problem::{self, Object, ProblemFile, RunDefaults, Transfer};
use lipsat_core::verify::{self, LemmaReport, Part};
use rayon::prelude::*;

/// Exit code when every query resolved.
const EXIT_RESOLVED: u8 = 0;
/// Malformed input, unknown names, or failed verification.
const EXIT_INPUT: u8 = 1;
/// At least one query came back Unknown.
const EXIT_UNKNOWN: u8 = 2;

#[derive(Parser)]
#[command(name = "lipsat", version, about = "Exact Lipschitz saturation and integral closure checks")]
struct Cli {
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every query in a problem file.
    Run {
        path: PathBuf,
        /// Curve exponent cap for queries without `budget=`.
        #[arg(long, default_value_t = 6)]
        budget: u32,
        /// Search only numeric curves, without generic parameters.
        #[arg(long)]
        no_params: bool,
        /// Transfer ideal for transfer and chain queries: a declared ideal or `auto`.
        #[arg(long, value_name = "NAME|auto")]
        transfer_ideal: Option<String>,
        /// Keep full certificates in the JSON report.
        #[arg(long)]
        emit_certificates: bool,
        /// Print the JSON report instead of the table.
        #[arg(long)]
        json: bool,
        /// Also write the JSON report to this file.
        #[arg(long, value_name = "FILE")]
        report: Option<PathBuf>,
    },
    /// Print a built-in problem file.
    Fixture {
        #[arg(value_parser = problem::FIXTURES)]
        name: String,
        /// Family index for `fr-family`.
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[arg(long, short, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Parse a problem file and print it in canonical form.
    Print { path: PathBuf },
    /// Check the determinantal lemmas on seeded random instances.
    Verify {
        /// Lemmas to check; all of them by default.
        #[arg(long, value_enum)]
        lemma: Vec<Lemma>,
        /// Number of seeds per lemma.
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        /// First seed.
        #[arg(long, default_value_t = 0)]
        start: u64,
        /// Include the per-generator transcript.
        #[arg(long)]
        full: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Lemma {
    Identities,
    GeneratorSets,
    CrossMinor,
    InclusionA,
    InclusionB,
    Free,
    RankDoubling,
    Cofactor,
}

impl Lemma {
    fn run(self, seed: u64) -> lipsat_core::error::Result<LemmaReport> {
        match self {
            Lemma::Identities => verify::verify_identities(seed),
            Lemma::GeneratorSets => verify::generator_sets(&verify::random_instance(seed, verify::Shape::MEDIUM)),
            Lemma::CrossMinor => verify::verify_cross_minor(seed),
            Lemma::InclusionA => verify::verify_transfer_inclusion(seed, Part::A),
            Lemma::InclusionB => verify::verify_transfer_inclusion(seed, Part::B),
            Lemma::Free => verify::verify_free_lemma(seed),
            Lemma::RankDoubling => verify::verify_rank_doubling(seed),
            Lemma::Cofactor => verify::verify_cofactor(seed),
        }
    }
}

fn read_problem(path: &Path) -> Result<ProblemFile> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    ProblemFile::parse(&text).map_err(|e| match e {
        Error::Parse { line, column, message } => anyhow!("{}:{line}:{column}: {message}", path.display()),
        other => anyhow!("{}: {other}", path.display()),
    })
}

fn run(
    path: &Path,
    budget: u32,
    no_params: bool,
    transfer_ideal: Option<String>,
    emit_certificates: bool,
    json: bool,
    report: Option<PathBuf>,
) -> Result<u8> {
    let pf = read_problem(path)?;
    let transfer = match transfer_ideal.as_deref() {
        None => None,
        Some("auto") => Some(Transfer::Auto),
        Some(name) => match pf.object(name) {
            Some(Object::Ideal(_)) => Some(Transfer::Named(name.to_string())),
            _ => bail!("--transfer-ideal: `{name}` is not an ideal declared in {}", path.display()),
        },
    };
    if budget == 0 {
        bail!("--budget must be at least 1");
    }
    let defaults = RunDefaults {
        budget,
        noparams: no_params,
        transfer,
        emit_certificates,
    };
    let rep = problem::run_problem(&pf, &defaults).map_err(|e| anyhow!("{}: {e}", path.display()))?;
    let body = serde_json::to_string_pretty(&rep.to_json())?;
    if let Some(out) = report {
        fs::write(&out, format!("{body}\n")).with_context(|| format!("cannot write {}", out.display()))?;
    }
    let mut stdout = std::io::stdout().lock();
    if json {
        writeln!(stdout, "{body}")?;
    } else {
        write!(stdout, "{}", rep.table())?;
    }
    Ok(if rep.all_resolved() { EXIT_RESOLVED } else { EXIT_UNKNOWN })
}

fn verify_cmd(lemmas: Vec<Lemma>, seeds: u64, start: u64, full: bool) -> Result<u8> {
    let lemmas = if lemmas.is_empty() {
        Lemma::value_variants().to_vec()
    } else {
        lemmas
    };
    let jobs: Vec<(Lemma, u64)> = lemmas
        .iter()
        .flat_map(|&l| (start..start + seeds).map(move |s| (l, s)))
        .collect();
    let reports: Vec<(Lemma, u64, lipsat_core::error::Result<LemmaReport>)> =
        jobs.par_iter().map(|&(l, s)| (l, s, l.run(s))).collect();
    let mut stdout = std::io::stdout().lock();
    let mut ok = true;
    for (l, s, r) in reports {
        let line = match r {
            Ok(r) => {
                ok &= r.passed;
                let r = if full { r } else { r.summary() };
                serde_json::to_string(&r.to_json())?
            }
            Err(e) => {
                ok = false;
                serde_json::json!({ "lemma": format!("{l:?}"), "seed": s, "error": e.to_string() }).to_string()
            }
        };
        writeln!(stdout, "{line}")?;
    }
    Ok(if ok { EXIT_RESOLVED } else { EXIT_INPUT })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INPUT);
        }
    }
    let result = match cli.command {
        Command::Run {
            path,
            budget,
            no_params,
            transfer_ideal,
            emit_certificates,
            json,
            report,
        } => run(&path, budget, no_params, transfer_ideal, emit_certificates, json, report),
        Command::Fixture { name, n, output } => problem::fixture(&name, n)
            .map_err(anyhow::Error::from)
            .and_then(|text| {
                match output {
                    Some(p) => fs::write(&p, text).with_context(|| format!("cannot write {}", p.display()))?,
                    None => print!("{text}"),
                }
                Ok(EXIT_RESOLVED)
            }),
        Command::Print { path } => read_problem(&path).map(|pf| {
            print!("{}", pf.print());
            EXIT_RESOLVED
        }),
        Command::Verify {
            lemma,
            seeds,
            start,
            full,
        } => verify_cmd(lemma, seeds, start, full),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
