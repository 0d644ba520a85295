mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Opts;

/// Memory-bound kernel benchmarks: STREAM, matrix transpose, Gaussian blur.
#[derive(Parser)]
#[command(name = "membench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand)]
enum Command {
    /// Measure COPY/SCALE/SUM/TRIAD bandwidth at every memory level
    Stream,
    /// Time the in-place transpose variants
    Transpose,
    /// Time the Gaussian blur variants
    Blur,
    /// Run stream, transpose and blur, then draw charts
    Suite,
    /// Draw charts from existing result files
    Chart,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = config::resolve(cli.opts).and_then(|settings| match cli.command {
        Command::Stream => commands::cmd_stream(settings),
        Command::Transpose => commands::cmd_transpose(settings),
        Command::Blur => commands::cmd_blur(settings),
        Command::Suite => commands::cmd_suite(settings),
        Command::Chart => commands::cmd_chart(settings),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
