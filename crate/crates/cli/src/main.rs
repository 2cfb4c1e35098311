use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use doctrina::cli::{run_files, Command, Flags};

#[derive(Parser)]
#[command(
    name = "doctrina",
    version,
    about = "Check, search and compare derivations over a doctrine"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    report: Format,
    /// Print sequents as signed entry lists instead of split contexts.
    #[arg(long, global = true)]
    entries_only: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Load and validate every declaration.
    Validate { files: Vec<PathBuf> },
    /// Check proofs and expectations.
    Check {
        files: Vec<PathBuf>,
        #[arg(long)]
        proof: Option<String>,
    },
    /// Search for derivations of goals.
    Search {
        file: PathBuf,
        #[arg(long)]
        goal: Option<String>,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        cut_depth: Option<usize>,
    },
    /// Print the normal form of a proof.
    Normalize {
        file: PathBuf,
        #[arg(long)]
        proof: String,
    },
    /// Compare two proofs.
    Eq {
        file: PathBuf,
        #[arg(long)]
        lhs: String,
        #[arg(long)]
        rhs: String,
    },
    /// Count types by height, or classes of a hom-set.
    Enumerate(EnumArgs),
    /// Translate proofs along a doctrine map.
    Translate {
        file: PathBuf,
        #[arg(long)]
        map: String,
    },
    /// List the builtin doctrines and their cones.
    Builtins,
}

#[derive(Args)]
struct EnumArgs {
    file: PathBuf,
    #[arg(long, requires = "height", conflicts_with = "hom")]
    types: bool,
    #[arg(long)]
    height: Option<usize>,
    #[arg(long)]
    sketch: Option<String>,
    #[arg(long, requires = "size")]
    hom: Option<String>,
    #[arg(long)]
    size: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, files) = match cli.command {
        Cmd::Validate { files } => (Command::Validate, files),
        Cmd::Check { files, proof } => (Command::Check { proof }, files),
        Cmd::Search {
            file,
            goal,
            depth,
            cut_depth,
        } => (Command::Search { goal, depth, cut_depth }, vec![file]),
        Cmd::Normalize { file, proof } => (Command::Normalize { proof }, vec![file]),
        Cmd::Eq { file, lhs, rhs } => (Command::Eq { lhs, rhs }, vec![file]),
        Cmd::Enumerate(a) => {
            let cmd = match (a.hom, a.size, a.height) {
                (Some(goal), Some(size), _) => Command::EnumerateHom { goal, size },
                (None, _, Some(height)) => Command::EnumerateTypes {
                    sketch: a.sketch,
                    height,
                },
                _ => {
                    eprintln!("enumerate needs --types --height H or --hom GOAL --size K");
                    return ExitCode::from(2);
                }
            };
            (cmd, vec![a.file])
        }
        Cmd::Translate { file, map } => (Command::Translate { map }, vec![file]),
        Cmd::Builtins => (Command::Builtins, Vec::new()),
    };
    let report = run_files(
        &command,
        &files,
        Flags {
            entries_only: cli.entries_only,
        },
    );
    match cli.report {
        Format::Text => print!("{}", report.to_text()),
        Format::Json => println!("{}", report.to_json()),
    }
    ExitCode::from(report.exit_code() as u8)
}
