//! `copekit` command-line front end.
//!
//! Documents go to stdout (or `--output`), diagnostics to stderr. Exit codes: 0 success or
//! Noncontextual, 10 Contextual, 20 Undetermined, 1 no model found or model fails its claimed
//! kind, 2 usage, parse or validation error, 3 computation guard exceeded.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use copekit::certifier::EnmfDecision;
use copekit::factorizer::{fiducial_tomography_test, quasi_from_gpt};
use copekit::io::{emit_certificate, emit_cope, emit_model, parse_cope, parse_model};
use copekit::linalg::independent_columns;
use copekit::theories::{self, cardinal_directions, discrete_qubit, generic_directions};
use copekit::*;

const EXIT_NOT_FOUND: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_GUARD: u8 = 3;
const EXIT_CONTEXTUAL: u8 = 10;
const EXIT_UNDETERMINED: u8 = 20;

#[derive(Parser)]
#[command(name = "copekit", version, about = "COPE matrices, model factorizations and contextuality certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: GlobalOpts,
}

#[derive(Args)]
struct GlobalOpts {
    /// Convert the input matrix to this backend before working on it.
    #[arg(long, global = true, value_enum)]
    backend: Option<BackendArg>,
    /// Tolerance of the float backend.
    #[arg(long, global = true)]
    eps: Option<f64>,
    /// Seed for factorization restarts.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Restarts per inner dimension.
    #[arg(long, global = true)]
    restarts: Option<usize>,
    /// Largest inner dimension tried by the equirank search (default rank + 3).
    #[arg(long = "max-k", global = true)]
    max_k: Option<usize>,
    /// Write the output document here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Rational,
    Float,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Pregpt,
    Gpt,
    Quasi,
    Trivial,
    Nmf,
    Enmf,
}

#[derive(Clone, Copy, ValueEnum)]
enum TheoryArg {
    Spekkens,
    Boxworld,
    ExtendedBoxworld,
    Qubit,
}

#[derive(Subcommand)]
enum Command {
    /// Print dimensions, rank and fiducial tomography flags.
    Info { input: Option<PathBuf> },
    /// Check the probabilistic invariants of a matrix document.
    Validate { input: Option<PathBuf> },
    /// Identify equivalent columns and outcomes and keep one representative of each extremal class.
    Quotient { input: Option<PathBuf> },
    /// Stack all measurements into one.
    Merge { input: Option<PathBuf> },
    /// Keep some preparations and measurements (0-based, comma separated).
    Restrict {
        input: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', required = true)]
        preparations: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        measurements: Vec<usize>,
    },
    /// Write a model document of the requested kind.
    Factorize {
        input: Option<PathBuf>,
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Inner dimension for `nmf` (default: number of preparations).
        #[arg(long)]
        inner_dim: Option<usize>,
        /// Tomographic columns for `quasi` (default: first independent columns).
        #[arg(long, value_delimiter = ',')]
        columns: Option<Vec<usize>>,
    },
    /// Classify a model document against a matrix.
    Verify {
        input: Option<PathBuf>,
        #[arg(long)]
        model: PathBuf,
    },
    /// Certify contextuality and write a certificate document.
    Certify {
        input: Option<PathBuf>,
        /// Also run the exhaustive decision at this inner dimension.
        #[arg(long = "exhaustive-k")]
        exhaustive_k: Option<usize>,
    },
    /// Write a built-in theory as a matrix document.
    Generate {
        #[arg(long, value_enum)]
        theory: TheoryArg,
        /// Generic antipodal pairs for `qubit`.
        #[arg(long, default_value_t = 5)]
        directions: usize,
        /// Add the three cardinal axes to `qubit`.
        #[arg(long)]
        cardinal: bool,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<CopeError> for Failure {
    fn from(e: CopeError) -> Self {
        let code = match e {
            CopeError::Guard(_) => EXIT_GUARD,
            _ => EXIT_USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure { code: EXIT_USAGE, message: e.to_string() }
    }
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

fn read_input(path: Option<&Path>) -> io::Result<Vec<u8>> {
    match path {
        Some(p) if p != Path::new("-") => fs::read(p),
        _ => {
            let mut buf = Vec::new();
            io::stdin().read_to_end(&mut buf)?;
            Ok(buf)
        }
    }
}

impl GlobalOpts {
    fn matrix(&self, path: Option<&Path>) -> Result<CopeMatrix, Failure> {
        let c = parse_cope(&read_input(path)?)?;
        let backend = match (self.backend, self.eps) {
            (Some(BackendArg::Rational), _) => Backend::Exact,
            (Some(BackendArg::Float), eps) => Backend::Float { eps: eps.unwrap_or(scalar::DEFAULT_EPS) },
            (None, Some(eps)) if !c.backend().is_exact() => Backend::Float { eps },
            (None, _) => c.backend(),
        };
        Ok(if backend == c.backend() { c } else { c.with_backend(backend) })
    }

    fn nmf_options(&self) -> NmfOptions {
        let mut opts = NmfOptions { seed: self.seed, max_inner_dim: self.max_k, ..NmfOptions::default() };
        if let Some(r) = self.restarts {
            opts.max_restarts = r;
        }
        opts
    }

    fn emit(&self, document: &str) -> io::Result<()> {
        match &self.output {
            Some(p) => fs::write(p, format!("{document}\n")),
            None => writeln!(io::stdout().lock(), "{document}"),
        }
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let g = &cli.global;
    match cli.command {
        Command::Info { input } => {
            let c = g.matrix(input.as_deref())?;
            let (states, effects) = fiducial_tomography_test(&c);
            println!("preparations: {}", c.num_preparations());
            println!("measurements: {} (outcomes {:?})", c.num_measurements(), c.block_sizes());
            println!("rows: {}", c.num_rows());
            println!("backend: {}", c.backend().name());
            println!("rank: {}", c.rank());
            println!("preparations exceed rank: {states}");
            println!("distinct outcomes exceed rank: {effects}");
            let violations = c.validate();
            println!("valid: {}", violations.is_empty());
            Ok(0)
        }
        Command::Validate { input } => {
            let c = g.matrix(input.as_deref())?;
            eprintln!("valid: {} preparations, {} measurements", c.num_preparations(), c.num_measurements());
            Ok(0)
        }
        Command::Quotient { input } => {
            let rep = g.matrix(input.as_deref())?.quotient_extremal();
            eprintln!("kept columns {:?}, dropped columns {:?}", rep.kept_columns, rep.dropped_columns);
            eprintln!("kept measurements {:?}, dropped measurements {:?}", rep.kept_measurements, rep.dropped_measurements);
            g.emit(&emit_cope(&rep.quotiented))?;
            Ok(0)
        }
        Command::Merge { input } => {
            g.emit(&emit_cope(&g.matrix(input.as_deref())?.merge_measurements()))?;
            Ok(0)
        }
        Command::Restrict { input, preparations, measurements } => {
            let c = g.matrix(input.as_deref())?.restrict(&preparations, &measurements)?;
            g.emit(&emit_cope(&c))?;
            Ok(0)
        }
        Command::Factorize { input, kind, inner_dim, columns } => {
            let c = g.matrix(input.as_deref())?;
            let model = match kind {
                KindArg::Pregpt => pregpt_from_svd(&c),
                KindArg::Gpt => gpt(&c),
                KindArg::Quasi => {
                    let g = gpt(&c);
                    let tom = columns.unwrap_or_else(|| independent_columns(c.data(), c.backend()));
                    quasi_from_gpt(&g, &tom)?
                }
                KindArg::Trivial => trivial_ontological(&c),
                KindArg::Nmf => {
                    let k = inner_dim.unwrap_or(c.num_preparations());
                    nmf(&c, &NmfOptions { inner_dim: k, ..g.nmf_options() })
                        .ok_or_else(|| fail(EXIT_NOT_FOUND, format!("no nonnegative factorization found at k = {k}")))?
                }
                KindArg::Enmf => enmf(&c, &g.nmf_options())
                    .ok_or_else(|| fail(EXIT_NOT_FOUND, "no equirank nonnegative factorization found"))?,
            };
            g.emit(&emit_model(&model))?;
            Ok(0)
        }
        Command::Verify { input, model } => {
            let c = g.matrix(input.as_deref())?;
            let m = parse_model(&fs::read(&model)?)?;
            let rep = classify_model(&c, &m)?;
            let kinds: Vec<&str> = rep.inferred_kinds.iter().map(|k| k.name()).collect();
            println!("claimed: {}", m.kind.name());
            println!("inferred: {}", kinds.join(", "));
            println!("reconstruction: {}", rep.reconstruction_ok);
            println!("unit: {} (all ones: {})", rep.unit_ok, rep.unit_is_ones);
            println!("nonnegative: {}", rep.nonnegative_ok);
            println!("ranks: matrix {}, effects {}, states {}", rep.rank_c, rep.rank_effects, rep.rank_states);
            Ok(if rep.is(m.kind) { 0 } else { EXIT_NOT_FOUND })
        }
        Command::Certify { input, exhaustive_k } => {
            let c = g.matrix(input.as_deref())?;
            if let Some(k) = exhaustive_k {
                let verdict = match exhaustive_enmf_decision(&c, k)? {
                    EnmfDecision::Exists(_) => "exists",
                    EnmfDecision::NotExists(_) => "does not exist",
                    EnmfDecision::Inconclusive(_) => "inconclusive",
                };
                eprintln!("equirank model at k = {k}: {verdict}");
            }
            let cert = certify(&c, &g.nmf_options());
            eprintln!("verdict: {} ({})", cert.verdict.name(), cert.evidence.kind());
            for note in &cert.notes {
                eprintln!("note: {note}");
            }
            g.emit(&emit_certificate(&cert))?;
            Ok(match cert.verdict {
                Verdict::Noncontextual => 0,
                Verdict::Contextual => EXIT_CONTEXTUAL,
                Verdict::Undetermined => EXIT_UNDETERMINED,
            })
        }
        Command::Generate { theory, directions, cardinal } => {
            let c = match theory {
                TheoryArg::Spekkens => theories::spekkens(),
                TheoryArg::Boxworld => theories::boxworld(),
                TheoryArg::ExtendedBoxworld => theories::extended_boxworld(),
                TheoryArg::Qubit => {
                    let mut dirs = if cardinal { cardinal_directions() } else { Vec::new() };
                    dirs.extend(generic_directions(directions));
                    discrete_qubit(&dirs, true)?
                }
            };
            let c = match (g.backend, g.eps) {
                (Some(BackendArg::Float), eps) => c.with_backend(Backend::Float { eps: eps.unwrap_or(scalar::DEFAULT_EPS) }),
                (Some(BackendArg::Rational), _) => c.with_backend(Backend::Exact),
                _ => c,
            };
            g.emit(&emit_cope(&c))?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
