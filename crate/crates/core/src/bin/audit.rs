use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use persona_audit::error::{Error, Result};
use persona_audit::parsing::write_records;
use persona_audit::personas::registry;
use persona_audit::prompting::Variant;
use persona_audit::provider::ProviderKind;
use persona_audit::report::{emit, report_from_cache, run_audit, AuditConfig, AuditOutcome};

#[derive(Parser)]
#[command(name = "audit", version, about = "Persona-conditioned annotation audits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProviderArg {
    Simulated,
    Http,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Cot,
    NoCot,
}

#[derive(Subcommand)]
enum Command {
    /// Run an audit and write its tables.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        provider: Option<ProviderArg>,
        #[arg(long, value_enum)]
        variant: Option<VariantArg>,
        #[arg(long)]
        runs: Option<u32>,
        /// Overrides both the run seed and the simulation seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Recompute every table from a response cache.
    Report {
        #[arg(long)]
        from: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Inspect the persona registry.
    Personas {
        #[command(subcommand)]
        action: PersonasAction,
    },
}

#[derive(Subcommand)]
enum PersonasAction {
    /// Print every persona as JSON.
    List,
}

fn finish(out: &std::path::Path, outcome: AuditOutcome) -> Result<()> {
    let files = emit(&outcome.bundle, &outcome.manifest, out)?;
    write_records(&out.join("records.jsonl"), &outcome.records)?;
    let m = &outcome.manifest;
    eprintln!(
        "{} work items ({} cached, {} requested), {} files in {}",
        m.work_items,
        m.cache_hits,
        m.backend_calls,
        files.len() + 1,
        out.display()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            out,
            provider,
            variant,
            runs,
            seed,
        } => {
            let mut cfg = AuditConfig::load(&config)?;
            if let Some(p) = provider {
                cfg.provider.kind = match p {
                    ProviderArg::Simulated => ProviderKind::Simulated,
                    ProviderArg::Http => ProviderKind::HttpChat,
                };
            }
            if let Some(v) = variant {
                cfg.variant = match v {
                    VariantArg::Cot => Variant::Cot,
                    VariantArg::NoCot => Variant::NoCot,
                };
            }
            if let Some(r) = runs {
                cfg.runs = r;
            }
            if let Some(s) = seed {
                cfg.seed = s;
                cfg.simulation.seed = s;
            }
            if cfg.cache_path.is_none() {
                cfg.cache_path = Some(out.join("cache.jsonl"));
            }
            finish(&out, run_audit(&cfg)?)
        }
        Command::Report { from, out } => finish(&out, report_from_cache(&from)?),
        Command::Personas {
            action: PersonasAction::List,
        } => {
            let text = serde_json::to_string_pretty(registry()).map_err(Error::from)?;
            match writeln!(std::io::stdout().lock(), "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::Io {
                    context: "writing to stdout".into(),
                    source: e,
                }),
                _ => Ok(()),
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
