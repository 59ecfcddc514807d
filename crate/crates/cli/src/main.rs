//! `bt`: verification suites for the Buekenhout-Tits unital.

mod report;
mod suites;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use bt_core::collineation::PROBE_PARAMS;
use bt_core::feet::{Scope, SpectrumReport};
use bt_core::stabilizer::{StabilizerReport, DEFAULT_BUDGET};
use bt_core::{build_bt_unital, Error, FieldCtx, UnitalSet};
use clap::{Parser, Subcommand, ValueEnum};

use report::{ContextInfo, Reproducibility, SuiteResult, VerificationReport, SCHEMA_VERSION};
use suites::{Options, SUITES};

#[derive(Parser, Debug)]
#[command(name = "bt", version, about = "Exact verification suites for the Buekenhout-Tits unital in PG(2, q^2), q = 2^(2e+1)")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Extension parameter; q = 2^(2e+1).
    #[arg(short = 'e', global = true, default_value_t = 1)]
    e: u32,

    /// Worker threads for the parallel scans.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Maximum stabiliser candidates to scan.
    #[arg(long, global = true)]
    budget: Option<u128>,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Spectrum over every admissible point instead of orbit representatives.
    #[arg(long, global = true)]
    all: bool,

    /// Include Frobenius twists in the stabiliser scan.
    #[arg(long, global = true)]
    semilinear: bool,

    /// Lift the stabiliser budget.
    #[arg(long, global = true)]
    force: bool,

    /// Checkpoint file for the stabiliser scan.
    #[arg(long, global = true)]
    checkpoint: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Field context: modulus, epsilon, delta and exponent maps.
    Context,
    /// Construct the unital.
    Build,
    /// Line intersection sizes and the subline property.
    VerifyUnital,
    /// The cone over the Tits ovoid against the unital.
    VerifyAbb,
    /// The group G, psi, and the orbit representatives.
    Group,
    /// Exhaustive flag-group stabiliser scan.
    Stabilizer,
    /// Nucleus, oval, root-count and trace checks; feet oracle coherence.
    Feet,
    /// Feet intersection spectrum.
    Spectrum,
    /// Certificates for three and four feet on a line.
    Witnesses,
    /// Integer counting identities at q = 8, 32, 128.
    Identities,
    /// Every suite.
    All,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Context => "context",
            Command::Build => "build",
            Command::VerifyUnital => "verify-unital",
            Command::VerifyAbb => "verify-abb",
            Command::Group => "group",
            Command::Stabilizer => "stabilizer",
            Command::Feet => "feet",
            Command::Spectrum => "spectrum",
            Command::Witnesses => "witnesses",
            Command::Identities => "identities",
            Command::All => "all",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

struct Run {
    report: VerificationReport,
    spectrum: Option<SpectrumReport>,
    stabilizers: Vec<StabilizerReport>,
}

fn run(cli: &Cli) -> Result<Run, Error> {
    let start = Instant::now();
    let ctx = FieldCtx::new(cli.e)?;
    let budget = if cli.force { u128::MAX } else { cli.budget.unwrap_or(DEFAULT_BUDGET) };
    let all = cli.command == Command::All;
    let opts = Options {
        budget,
        scope: if cli.all { Scope::AllPoints } else { Scope::Representatives },
        semilinear: if all { None } else { Some(cli.semilinear) },
        checkpoint: cli.checkpoint.clone(),
    };

    let mut unital: Option<UnitalSet> = None;
    let mut spectrum = None;
    let mut stabilizers = Vec::new();
    let mut results: Vec<SuiteResult> = Vec::new();
    for name in SUITES {
        if !all && cli.command.name() != name {
            results.push(SuiteResult::skipped(name, None));
            continue;
        }
        let u = &*unital.get_or_insert_with(|| build_bt_unital(&ctx));
        let result = match name {
            "context" => suites::timed(name, || suites::context(&ctx))?,
            "build" => suites::timed(name, || suites::build(&ctx, u))?,
            "verify-unital" => suites::timed(name, || suites::verify(&ctx, u))?,
            "verify-abb" => suites::timed(name, || suites::abb(&ctx))?,
            "group" => suites::timed(name, || suites::group(&ctx, u))?,
            "stabilizer" => {
                let attempt = suites::timed(name, || {
                    let (out, reports) = suites::run_stabilizer(&ctx, u, &opts)?;
                    stabilizers = reports;
                    Ok(out)
                });
                match attempt {
                    Err(Error::BudgetExceeded { candidates, budget }) if all => SuiteResult::skipped(
                        name,
                        format!("{candidates} candidates exceed the budget of {budget}; pass --force"),
                    ),
                    other => other?,
                }
            }
            "feet" => suites::timed(name, || suites::feet(&ctx, u))?,
            "spectrum" => suites::timed(name, || {
                let (out, r) = suites::spectrum(&ctx, u, opts.scope);
                spectrum = Some(r);
                Ok(out)
            })?,
            "witnesses" => suites::timed(name, || suites::witnesses(&ctx, u))?,
            "identities" => suites::timed(name, suites::identities)?,
            _ => unreachable!("suite list is fixed"),
        };
        results.push(result);
    }

    let n = ctx.big_order() as u64 - 1;
    let twists = if all || cli.semilinear { ctx.degree() as u64 } else { 1 };
    let report = VerificationReport {
        schema_version: SCHEMA_VERSION,
        artifact_version: env!("CARGO_PKG_VERSION"),
        context: ContextInfo::new(&ctx),
        suites: results,
        reproducibility: Reproducibility {
            command: cli.command.name().to_string(),
            threads: rayon::current_num_threads(),
            budget,
            scope: match opts.scope {
                Scope::Representatives => "representatives",
                Scope::AllPoints => "all-points",
            },
            semilinear: cli.semilinear || all,
            probe_ordering: PROBE_PARAMS.to_vec(),
            shard_count: twists * n * n,
            sampling_seed: suites::SAMPLING_SEED,
        },
        runtime_ms: start.elapsed().as_millis() as u64,
    };
    Ok(Run { report, spectrum, stabilizers })
}

fn write_spectrum_csv(r: &SpectrumReport, out: &mut dyn Write) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["point_rep_a", "point_rep_b", "k0", "k1", "k2", "k3", "k4", "points"])?;
    for rep in &r.per_representative {
        let mut row = vec![rep.a.to_string(), rep.b.to_string()];
        row.extend((0..5).map(|k| rep.counts.get(k).copied().unwrap_or(0).to_string()));
        row.push(rep.points.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_stabilizer_csv(reports: &[StabilizerReport], out: &mut dyn Write) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "semilinear", "frob", "x11", "x12", "x13", "x21", "x22", "x23", "x31", "x32", "x33",
    ])?;
    for r in reports {
        for c in &r.elements {
            let mut row = vec![r.semilinear.to_string(), c.frob().to_string()];
            row.extend(c.matrix().iter().flatten().map(|x| x.to_string()));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn emit(cli: &Cli, run: &Run, out: &mut dyn Write) -> io::Result<()> {
    match cli.format {
        Format::Json => run.report.write_json(out),
        Format::Csv => {
            let res = match (cli.command, &run.spectrum) {
                (Command::Spectrum, Some(s)) => write_spectrum_csv(s, out),
                (Command::Stabilizer, _) => write_stabilizer_csv(&run.stabilizers, out),
                _ => run.report.write_summary_csv(out),
            };
            res.map_err(io::Error::other)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(err) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("bt: {err}");
            return ExitCode::from(2);
        }
    }
    let run = match run(&cli) {
        Ok(r) => r,
        Err(err) => {
            eprintln!("bt: {err}");
            return ExitCode::from(2);
        }
    };
    let written = match &cli.out {
        Some(path) => File::create(path).and_then(|f| {
            let mut w = BufWriter::new(f);
            emit(&cli, &run, &mut w)?;
            w.flush()
        }),
        None => emit(&cli, &run, &mut io::stdout().lock()),
    };
    if let Err(err) = written {
        eprintln!("bt: {err}");
        return ExitCode::from(2);
    }
    if run.report.failed() {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
