use std::fs::File;
use std::io::{self, BufWriter};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use maxstable_cli::config::{Command, Format};
use maxstable_cli::{exit, parse_config, run, write_output};

#[derive(Parser)]
#[command(name = "maxstable", version, about = "Extremal-index estimation and tail-field checks for max-stable fields")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Estimate the extremal index with the configured methods.
    Theta(Common),
    /// Run the identity suites on the configured model.
    Verify(Common),
    /// Finite-dimensional distributions.
    Fidi(Common),
    /// Brown-Resnick lower bound for the extremal index.
    Bound(Common),
    /// Anti-clustering probe.
    Probe(Common),
    /// Pickands estimates over a range of window sides.
    Sweep(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Write here instead of stdout (or the config's `output`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    workers: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::Theta(a) => (Command::Theta, a),
        Cmd::Verify(a) => (Command::Verify, a),
        Cmd::Fidi(a) => (Command::Fidi, a),
        Cmd::Bound(a) => (Command::Bound, a),
        Cmd::Probe(a) => (Command::Probe, a),
        Cmd::Sweep(a) => (Command::Sweep, a),
    };
    ExitCode::from(main_inner(command, args) as u8)
}

fn main_inner(command: Command, args: Common) -> i32 {
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            return exit::USAGE;
        }
    };
    let mut cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", args.config.display());
            return exit::USAGE;
        }
    };
    if cfg.command != command {
        eprintln!("error: config is for `{:?}`, not `{:?}`", cfg.command, command);
        return exit::USAGE;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(f) = args.format {
        cfg.format = match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        };
    }
    if let Some(n) = args.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: --workers: {e}");
            return exit::USAGE;
        }
    }
    let out = match run(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return exit::USAGE;
        }
    };
    let dest = args.out.or(cfg.output.clone());
    let written = match &dest {
        Some(p) => File::create(p).and_then(|f| write_output(&out, cfg.format, BufWriter::new(f))),
        None => write_output(&out, cfg.format, io::stdout().lock()),
    };
    if let Err(e) = written {
        eprintln!("error: writing output: {e}");
        return exit::FAILURE;
    }
    for e in &out.errors {
        eprintln!("{}: {}", e.method, e.error);
    }
    for m in &out.out_of_range {
        eprintln!("{m}: estimate outside [0, 1]");
    }
    if out.success() {
        exit::OK
    } else {
        exit::FAILURE
    }
}
