use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use tilecap_cli::commands::{self, DumpFormat, EnumerateOptions, EvaluateCommand, OptimizeCommand};
use tilecap_cli::config::RunConfig;
use tilecap_cli::{exit_code, ConfigError, Status};
use tilecap_core::scenario::ScenarioKind;

#[derive(Parser)]
#[command(
    name = "tilecap",
    version,
    about = "Polyomino sub-array tiling search for zero-forcing MU-MIMO capacity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct Common {
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override scenario.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override scenario.drops.
    #[arg(long)]
    drops: Option<usize>,
    /// Override run.workers (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Override run.output_dir.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.scenario.seed = s;
        }
        if let Some(d) = self.drops {
            cfg.scenario.drops = d;
        }
        if let Some(w) = self.workers {
            cfg.run.workers = w;
        }
        if let Some(o) = &self.out {
            cfg.run.output_dir = o.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Dump {
    Ascii,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Print a configuration file with every default filled in.
    InitConfig {
        #[arg(long, default_value = "uma")]
        scenario: String,
    },
    /// Count the tilings of the aperture, optionally writing them out.
    Enumerate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        dump: Option<Dump>,
        #[arg(long)]
        limit: Option<u64>,
    },
    /// Score every tiling and keep the best one.
    Optimize {
        #[command(flatten)]
        common: Common,
        /// Continue from the ledger in the output directory.
        #[arg(long)]
        resume: bool,
        #[arg(short, long)]
        quiet: bool,
        #[arg(long)]
        export_channels: bool,
        #[arg(long)]
        export_precoders: bool,
        #[arg(long, default_value_t = 20)]
        bins: usize,
    },
    /// Score a single tiling (the baseline by default).
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// Tiling file: tiling JSON, result JSON or ASCII grid.
        #[arg(long)]
        tiling: Option<PathBuf>,
        /// Output file stem.
        #[arg(long, default_value = "evaluation")]
        name: String,
        #[arg(long)]
        far_field: bool,
        #[arg(long)]
        export_channels: bool,
        #[arg(long)]
        export_precoders: bool,
        #[arg(long, default_value_t = 20)]
        bins: usize,
    },
    /// Summarize a ledger.
    Report {
        ledger: PathBuf,
        /// Result file; defaults to result.json next to the ledger.
        #[arg(long)]
        result: Option<PathBuf>,
    },
    /// Draw a tiling as ASCII and SVG.
    Render {
        tiling: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        name: Option<String>,
    },
}

fn run(cli: Cli) -> anyhow::Result<Status> {
    let stdout = std::io::stdout();
    let out = &mut stdout.lock();
    match cli.command {
        Command::InitConfig { scenario } => {
            let kind: ScenarioKind = scenario.parse().map_err(|e| ConfigError(format!("{e}")))?;
            print!("{}", RunConfig::for_scenario(kind).to_toml_string());
            Ok(Status::Ok)
        }
        Command::Enumerate { common, dump, limit } => {
            let opts = EnumerateOptions {
                dump: dump.map(|d| match d {
                    Dump::Ascii => DumpFormat::Ascii,
                    Dump::Json => DumpFormat::Json,
                }),
                limit,
            };
            commands::enumerate(&common.load()?, &opts, out)
        }
        Command::Optimize {
            common,
            resume,
            quiet,
            export_channels,
            export_precoders,
            bins,
        } => {
            let opts = OptimizeCommand {
                resume,
                progress: !quiet,
                export_channels,
                export_precoders,
                bins,
            };
            commands::optimize_run(&common.load()?, &opts, out)
        }
        Command::Evaluate {
            common,
            tiling,
            name,
            far_field,
            export_channels,
            export_precoders,
            bins,
        } => {
            let opts = EvaluateCommand {
                tiling,
                far_field,
                export_channels,
                export_precoders,
                bins,
                name,
            };
            commands::evaluate_run(&common.load()?, &opts, out)
        }
        Command::Report { ledger, result } => commands::report(&ledger, result.as_deref(), out),
        Command::Render { tiling, common, name } => {
            commands::render_file(&common.load()?, &tiling, name.as_deref(), out)
        }
    }
}

fn main() -> ExitCode {
    let result = run(Cli::parse());
    if let Err(e) = &result {
        eprintln!("error: {e:#}");
    }
    ExitCode::from(exit_code(&result) as u8)
}
