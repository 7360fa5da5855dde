use std::path::PathBuf;
use std::process;

use clap::{Parser, Subcommand};
use stz_cli::commands::{cmd_compress, cmd_decompress, cmd_eval, cmd_inspect, finish, CompressArgs, EvalArgs};
use stz_cli::exit::ExitCode;

const EXIT_CODES: &str = "Exit codes:
  0  success
  2  bad command-line usage
  3  invalid config or scenario
  4  numerical failure (divergence, non-finite values, eigensolver)
  5  I/O failure or unrecognized file format
  6  corrupt stream (checksum, truncation, malformed section)
  7  unsupported format version";

#[derive(Parser)]
#[command(name = "stz", version, about = "Sparse Tucker + Givens codec for beamforming weight tensors", after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compress a .ct3 tensor into a .stz blob.
    Compress {
        input: PathBuf,
        /// Codec config JSON: {"method", "solver": {...}, "quant": {...}, "refit"}.
        config: PathBuf,
        output: PathBuf,
        /// Override a config field, e.g. --set solver.s2=0.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Also write a run manifest here.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Reconstruct a .ct3 tensor from a .stz blob.
    Decompress { input: PathBuf, output: PathBuf },
    /// Run a scenario sweep and write report.csv, report.json, traces/ and
    /// manifest.json into OUT.
    Eval {
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override a scenario field, e.g. --set seeds=[0,1,2].
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Replace OUT if it exists.
        #[arg(long)]
        force: bool,
        /// Write zero timings so reruns are byte-identical.
        #[arg(long)]
        no_timings: bool,
    },
    /// Print a blob's header and section sizes.
    Inspect { input: PathBuf },
}

fn main() {
    let cli = Cli::parse();
    let (code, text) = match &cli.command {
        Command::Compress { input, config, output, overrides, manifest } => finish(cmd_compress(&CompressArgs {
            input,
            config,
            output,
            overrides,
            manifest: manifest.as_deref(),
        })),
        Command::Decompress { input, output } => finish(cmd_decompress(input, output)),
        Command::Eval { scenario, out, overrides, jobs, force, no_timings } => finish(cmd_eval(&EvalArgs {
            scenario,
            out,
            overrides,
            jobs: *jobs,
            force: *force,
            no_timings: *no_timings,
        })),
        Command::Inspect { input } => {
            let (code, text) = finish(cmd_inspect(input));
            if code == ExitCode::Ok {
                print!("{text}");
                process::exit(0);
            }
            (code, text)
        }
    };
    eprintln!("{text}");
    process::exit(code as i32);
}
