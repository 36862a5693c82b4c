//! Command-line front-end: seeded, reproducible runs of the counters and
//! stream estimators, plus the distributed simulation and a benchmark
//! harness. Every run prints `estimate <value>`; `--report` adds a stable
//! machine-readable key set and `--stats` extends it with call counters and
//! wall time (wall time is the one non-deterministic key, so byte-identical
//! output is guaranteed only without `--stats`).

mod bench;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use f0mc::counting::{self, ExecMode, SearchMode};
use f0mc::dist::{self, Protocol};
use f0mc::f0stream::{self, Strategy};
use f0mc::formula::{self, FormulaRef};
use f0mc::setstream;
use f0mc::solvers::NpOracle;

use report::{Report, ReportFormat};

#[derive(Parser)]
#[command(
    name = "f0mc",
    about = "Distinct-count sketches and hashing-based model counters",
    after_help = "File formats:\n  \
        .dnf / .cnf     'p dnf <n> <k>' header, one term/clause per line as\n                  \
        signed 1-based indices ending in 0; '#' comments\n  \
        element stream  header 'n=<int>', one element per line (0b/0x/decimal)\n  \
        range stream    header 'n=<int> d=<int>', items 'lo hi [step] ; ...'\n  \
        affine stream   header 'n=<int>', per item n hex rows of A then '| <hex B>'\n  \
        dnf stream      .dnf blocks separated by '---' lines\n  \
        weighted dnf    'p wdnf' header plus 'w <var> <k> <m>' weight lines\n  \
        scenario        'dnf <path>', optional 'protocol <p>', 'site <j>: <terms>'"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    global: GlobalFlags,
}

#[derive(Args)]
struct GlobalFlags {
    /// PRNG seed; identical seeds reproduce runs bit for bit.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    /// Tolerance: estimates aim within a (1+eps) factor.
    #[arg(long, global = true, default_value_t = 0.8)]
    eps: f64,

    /// Failure probability bound.
    #[arg(long, global = true, default_value_t = 0.2)]
    delta: f64,

    /// Width cap for the brute-force oracle backend.
    #[arg(long, global = true, default_value_t = formula::DEFAULT_BRUTE_CAP)]
    oracle_cap: usize,

    /// Emit solver/oracle call counters and wall time in the report.
    #[arg(long, global = true)]
    stats: bool,

    /// Report format appended after the estimate line.
    #[arg(long, global = true, value_enum)]
    report: Option<ReportFormat>,

    /// Fan independent rows/cells across a worker pool (results identical).
    #[arg(long, global = true, conflicts_with = "deterministic")]
    parallel: bool,

    /// Single-threaded execution (the default).
    #[arg(long, global = true)]
    deterministic: bool,
}

impl GlobalFlags {
    fn exec(&self) -> ExecMode {
        if self.parallel {
            ExecMode::Parallel
        } else {
            ExecMode::Deterministic
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Bucketing,
    Min,
    Est,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Strategy {
        match s {
            StrategyArg::Bucketing => Strategy::Bucketing,
            StrategyArg::Min => Strategy::Minimum,
            StrategyArg::Est => Strategy::Estimation,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SearchArg {
    Linear,
    Binary,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProtocolArg {
    Bucketing,
    Minimum,
    Estimation,
}

#[derive(Subcommand)]
enum Command {
    /// Approximate model counting for a DNF or CNF formula.
    Count {
        #[arg(long, conflicts_with = "cnf")]
        dnf: Option<PathBuf>,
        #[arg(long)]
        cnf: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "bucketing")]
        strategy: StrategyArg,
        /// Level search for the bucketing strategy.
        #[arg(long, value_enum, default_value = "linear")]
        search: SearchArg,
        /// Estimation resolution; derived from a rough estimate when absent.
        #[arg(long)]
        r: Option<u32>,
    },
    /// F0 estimation over a plain element stream file.
    StreamF0 {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "min")]
        strategy: StrategyArg,
        #[arg(long)]
        r: Option<u32>,
    },
    /// F0 estimation over a multidimensional range stream.
    RangesF0 {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// F0 estimation over an affine-space stream.
    AffineF0 {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// F0 estimation over a stream of DNF formulas.
    DnfStreamF0 {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "min")]
        strategy: StrategyArg,
    },
    /// Weighted DNF model counting via the range-stream reduction.
    Weighted {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Distributed DNF counting simulation with communication accounting.
    DistSim {
        /// Scenario file (global .dnf plus a term partition).
        #[arg(long, conflicts_with_all = ["dnf", "sites"])]
        scenario: Option<PathBuf>,
        /// Global formula, split round-robin over --sites.
        #[arg(long, requires = "sites")]
        dnf: Option<PathBuf>,
        #[arg(long)]
        sites: Option<usize>,
        #[arg(long, value_enum)]
        protocol: Option<ProtocolArg>,
    },
    /// Exact brute-force model count (desk scale).
    OracleCheck {
        #[arg(long, conflicts_with = "cnf")]
        dnf: Option<PathBuf>,
        #[arg(long)]
        cnf: Option<PathBuf>,
    },
    /// Parameter sweeps with call-count and timing tables.
    Bench {
        #[arg(long)]
        spec: PathBuf,
    },
}

fn read(path: &Path) -> Result<String, f0mc::Error> {
    std::fs::read_to_string(path).map_err(f0mc::Error::from)
}

fn run(cli: &Cli) -> Result<Report, f0mc::Error> {
    let g = &cli.global;
    let started = Instant::now();
    let mut report = Report::new();

    match &cli.command {
        Command::Count { dnf, cnf, strategy, search, r } => {
            let strategy = Strategy::from(*strategy);
            let mode = match search {
                SearchArg::Linear => SearchMode::Linear,
                SearchArg::Binary => SearchMode::Binary,
            };
            let oracle = NpOracle::brute_force(g.oracle_cap);
            report.push_str("strategy", strategy.name());
            match (dnf, cnf) {
                (Some(path), None) => {
                    let phi = formula::parse_dnf(&read(path)?)?;
                    match strategy {
                        Strategy::Bucketing => {
                            let run = counting::approx_mc_dnf(
                                &phi, g.eps, g.delta, g.seed, mode, g.exec(),
                            )?;
                            report.estimate(run.estimate);
                            report.push("rows", run.rows.len() as u64);
                            report.push("solver_calls", run.total_calls());
                        }
                        Strategy::Minimum => {
                            let run = counting::approx_model_count_min(
                                &phi, g.eps, g.delta, g.seed, g.exec(),
                            )?;
                            report.estimate(run.estimate);
                            report.push("rows", run.rows.len() as u64);
                        }
                        Strategy::Estimation => {
                            return Err(f0mc::Error::InvalidParams {
                                msg: "estimation counting takes CNF input; \
                                      no efficient DNF path is known"
                                    .into(),
                            });
                        }
                    }
                }
                (None, Some(path)) => {
                    let phi = formula::parse_cnf(&read(path)?)?;
                    match strategy {
                        Strategy::Bucketing => {
                            let run = counting::approx_mc_cnf(
                                &phi, g.eps, g.delta, g.seed, mode, &oracle, g.exec(),
                            )?;
                            report.estimate(run.estimate);
                            report.push("rows", run.rows.len() as u64);
                            report.push("solver_calls", run.total_calls());
                        }
                        Strategy::Minimum => {
                            let run = counting::approx_model_count_min_cnf(
                                &phi, g.eps, g.delta, g.seed, &oracle, g.exec(),
                            )?;
                            report.estimate(run.estimate);
                            report.push("rows", run.rows.len() as u64);
                        }
                        Strategy::Estimation => {
                            let run = match r {
                                Some(r) => counting::approx_model_count_est(
                                    &phi, g.eps, g.delta, *r, g.seed, &oracle, g.exec(),
                                )?,
                                None => counting::approx_model_count_est_auto(
                                    &phi, g.eps, g.delta, g.seed, &oracle, g.exec(),
                                )?,
                            };
                            report.estimate(run.estimate);
                            report.push("rows", run.sketch.t as u64);
                            report.push("r", run.r as u64);
                        }
                    }
                }
                _ => {
                    return Err(f0mc::Error::InvalidParams {
                        msg: "count needs exactly one of --dnf or --cnf".into(),
                    })
                }
            }
            report.push("oracle_calls", oracle.queries());
        }

        Command::StreamF0 { input, strategy, r } => {
            let (n, items) = f0stream::parse_stream_file(&read(input)?)?;
            let strategy = Strategy::from(*strategy);
            let params = f0stream::ApproxParams::new(g.eps, g.delta)?;
            let est = f0stream::compute_f0(n, items, strategy, &params, g.seed, *r)?;
            report.estimate(est);
            report.push_str("strategy", strategy.name());
            report.push("rows", params.t as u64);
        }

        Command::RangesF0 { input } => {
            let (_, _, items) = setstream::parse_range_stream(&read(input)?)?;
            let est = setstream::f0_ranges(items.iter(), g.eps, g.delta, g.seed)?;
            report.estimate(est);
            report.push_str("strategy", Strategy::Minimum.name());
            report.push("rows", f0stream::ApproxParams::new(g.eps, g.delta)?.t as u64);
        }

        Command::AffineF0 { input } => {
            let (_, items) = setstream::parse_affine_stream(&read(input)?)?;
            let est = setstream::f0_affine_stream(items.iter(), g.eps, g.delta, g.seed)?;
            report.estimate(est);
            report.push_str("strategy", Strategy::Minimum.name());
            report.push("rows", f0stream::ApproxParams::new(g.eps, g.delta)?.t as u64);
        }

        Command::DnfStreamF0 { input, strategy } => {
            let items = setstream::parse_dnf_stream(&read(input)?)?;
            let strategy = Strategy::from(*strategy);
            let est = setstream::f0_dnf_stream(items.iter(), g.eps, g.delta, g.seed, strategy)?;
            report.estimate(est);
            report.push_str("strategy", strategy.name());
        }

        Command::Weighted { input } => {
            let wphi = setstream::parse_weighted_dnf(&read(input)?)?;
            let est = setstream::weighted_dnf_count(&wphi, g.eps, g.delta, g.seed)?;
            report.estimate(est);
            report.push_str("strategy", Strategy::Minimum.name());
        }

        Command::DistSim { scenario, dnf, sites, protocol } => {
            let mut proto = protocol.map(|p| match p {
                ProtocolArg::Bucketing => Protocol::Bucketing,
                ProtocolArg::Minimum => Protocol::Minimum,
                ProtocolArg::Estimation => Protocol::Estimation,
            });
            let site_inputs = match (scenario, dnf, sites) {
                (Some(path), None, None) => {
                    let sc = dist::parse_scenario(&read(path)?)?;
                    let dnf_path = path.parent().unwrap_or(Path::new(".")).join(&sc.dnf);
                    let phi = formula::parse_dnf(&read(&dnf_path)?)?;
                    if proto.is_none() {
                        proto = sc.protocol;
                    }
                    dist::assemble_sites(&phi, &sc.partition)?
                }
                (None, Some(path), Some(k)) => {
                    let phi = formula::parse_dnf(&read(path)?)?;
                    dist::split_round_robin(&phi, *k)
                }
                _ => {
                    return Err(f0mc::Error::InvalidParams {
                        msg: "dist-sim needs --scenario or --dnf with --sites".into(),
                    })
                }
            };
            let proto = proto.unwrap_or(Protocol::Minimum);
            let out = dist::dist_count(&site_inputs, g.eps, g.delta, g.seed, proto)?;
            report.estimate(out.estimate);
            report.push_str("strategy", proto.name());
            report.push("sites", site_inputs.len() as u64);
            report.push("comm_bits", out.ledger.total_bits());
            report.push("comm_messages", out.ledger.messages);
            report.extra(out.ledger.report());
        }

        Command::OracleCheck { dnf, cnf } => {
            let count = match (dnf, cnf) {
                (Some(path), None) => {
                    let phi = formula::parse_dnf(&read(path)?)?;
                    formula::brute_count_with_cap(FormulaRef::Dnf(&phi), g.oracle_cap)?
                }
                (None, Some(path)) => {
                    let phi = formula::parse_cnf(&read(path)?)?;
                    formula::brute_count_with_cap(FormulaRef::Cnf(&phi), g.oracle_cap)?
                }
                _ => {
                    return Err(f0mc::Error::InvalidParams {
                        msg: "oracle-check needs exactly one of --dnf or --cnf".into(),
                    })
                }
            };
            report.estimate(count as f64);
            report.push_str("method", "brute");
        }

        Command::Bench { spec } => {
            let table = bench::run_bench(&read(spec)?, g.exec())?;
            report.extra(table);
        }
    }

    report.push_front("seed", g.seed);
    report.push_front_f64("delta", g.delta);
    report.push_front_f64("epsilon", g.eps);
    if g.stats {
        report.push("elapsed_ms", started.elapsed().as_millis() as u64);
    }
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            let wants_report = cli.global.report.is_some() || cli.global.stats;
            print!(
                "{}",
                report.render(cli.global.report.unwrap_or(ReportFormat::Kv), wants_report)
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
