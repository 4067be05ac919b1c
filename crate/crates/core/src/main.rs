use std::io::Write;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde::Serialize;

use vstar::group::{build_group, GroupSpec, DEFAULT_GROUP_CAP};
use vstar::report::{
    all_witnesses, emit_report, run_catalog, OutputFormat, RunConfig, WitnessFailure,
};
use vstar::theorem::{WitnessCase, WitnessRecord};
use vstar::units::{candidate_count, enumerate_v, filter_unitary};
use vstar::{AlgebraContext, FiniteGroup, GroupTable};

#[derive(Parser)]
#[command(
    name = "vstar",
    version,
    about = "Unit groups of modular group algebras GF(p)[G]"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check one group at one prime.
    Verify {
        #[arg(long)]
        spec: GroupSpec,
        #[arg(long)]
        p: u64,
        /// Enumeration cap on p^(|G|-1).
        #[arg(long)]
        cap: Option<u64>,
        #[arg(long, default_value = "text")]
        format: OutputFormat,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a catalog (the built-in one unless a config file lists specs).
    Catalog {
        #[arg(long, value_delimiter = ',')]
        primes: Option<Vec<u64>>,
        /// `key = value` file with RunConfig fields.
        #[arg(long)]
        config: Option<std::path::PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        cap: Option<u64>,
        #[arg(long)]
        format: Option<OutputFormat>,
        /// Include per-entry wall-clock times (makes output nondeterministic).
        #[arg(long)]
        timings: bool,
    },
    /// Build the unitary witnesses for every valid input.
    Witness {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        case: u8,
        #[arg(long)]
        spec: GroupSpec,
        #[arg(long)]
        p: u64,
    },
    /// Count V(FG) and V_*(FG).
    EnumerateUnits {
        #[arg(long)]
        spec: GroupSpec,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        cap: Option<u64>,
        /// Also list the unitary units.
        #[arg(long)]
        list: bool,
    },
}

#[derive(Serialize)]
struct UnitSummary {
    group: String,
    group_order: usize,
    p: u32,
    candidates: u128,
    v_order: usize,
    vstar_order: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    unitary_units: Option<Vec<String>>,
}

#[derive(Serialize)]
struct WitnessOutput<'a> {
    witnesses: &'a [WitnessRecord],
    failures: &'a [WitnessFailure],
}

fn build(spec: &GroupSpec) -> Result<Arc<FiniteGroup>, String> {
    build_group(spec, DEFAULT_GROUP_CAP)
        .map(Arc::new)
        .map_err(|e| e.to_string())
}

fn write_out(bytes: &[u8]) {
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(bytes);
    let _ = stdout.flush();
}

fn run(cli: Cli) -> Result<bool, String> {
    let workers = RunConfig::workers_from_env().unwrap_or(0);
    match cli.command {
        Command::Verify {
            spec,
            p,
            cap,
            format,
            seed,
        } => {
            let mut cfg = RunConfig {
                primes: vec![p],
                specs: vec![spec],
                seed,
                format,
                workers,
                ..RunConfig::default()
            };
            if let Some(cap) = cap {
                cfg.enumeration_cap = cap;
            }
            cfg.validate().map_err(|e| e.to_string())?;
            let report = run_catalog(&cfg);
            write_out(&emit_report(&report, format));
            Ok(report.passed())
        }
        Command::Catalog {
            primes,
            config,
            seed,
            cap,
            format,
            timings,
        } => {
            let mut cfg = match config {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| format!("{}: {e}", path.display()))?;
                    RunConfig::from_kv(&text).map_err(|e| format!("{}: {e}", path.display()))?
                }
                None => RunConfig::default(),
            };
            if let Some(primes) = primes {
                cfg.primes = primes;
            }
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(cap) = cap {
                cfg.enumeration_cap = cap;
            }
            if let Some(format) = format {
                cfg.format = format;
            }
            if workers > 0 {
                cfg.workers = workers;
            }
            cfg.timings |= timings;
            cfg.validate().map_err(|e| e.to_string())?;
            let report = run_catalog(&cfg);
            write_out(&emit_report(&report, cfg.format));
            Ok(report.passed())
        }
        Command::Witness { case, spec, p } => {
            let ctx = AlgebraContext::new(build(&spec)?, p).map_err(|e| e.to_string())?;
            let case =
                [WitnessCase::Case1, WitnessCase::Case2, WitnessCase::Case3][case as usize - 1];
            let (records, failures) = all_witnesses(&ctx, &spec.to_string(), Some(case));
            if records.is_empty() && failures.is_empty() {
                return Err(format!("no valid inputs for {case:?} in {spec} at p = {p}"));
            }
            let out = WitnessOutput {
                witnesses: &records,
                failures: &failures,
            };
            write_out(
                format!("{}\n", serde_json::to_string_pretty(&out).expect("json")).as_bytes(),
            );
            Ok(failures.is_empty() && records.iter().all(|r| r.passed()))
        }
        Command::EnumerateUnits { spec, p, cap, list } => {
            let group = build(&spec)?;
            let ctx = AlgebraContext::new(group.clone(), p).map_err(|e| e.to_string())?;
            let v = enumerate_v(&ctx, cap.unwrap_or(RunConfig::default().enumeration_cap))
                .map_err(|e| e.to_string())?;
            let vstar = filter_unitary(&v).map_err(|e| e.to_string())?;
            let summary = UnitSummary {
                group: spec.to_string(),
                group_order: group.order(),
                p: ctx.p(),
                candidates: candidate_count(&ctx),
                v_order: v.order(),
                vstar_order: vstar.order(),
                unitary_units: list.then(|| vstar.elements().map(|u| u.to_string()).collect()),
            };
            write_out(
                format!(
                    "{}\n",
                    serde_json::to_string_pretty(&summary).expect("json")
                )
                .as_bytes(),
            );
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
