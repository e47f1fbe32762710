use std::process::ExitCode;

use clap::{Parser, Subcommand};
use segcodec_cli::commands::*;
use segcodec_cli::CliResult;

/// Entity masks to colormaps and back.
#[derive(Parser)]
#[command(name = "segcodec", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Paint an idmap's entities with the location-aware palette.
    Encode(EncodeArgs),
    /// Recover entities from a (possibly noisy) colormap.
    Decode(DecodeArgs),
    /// Apply a degradation profile to a colormap.
    Degrade(DegradeArgs),
    /// Encode, degrade, decode and score a directory of idmaps over a grid of settings.
    Sweep(SweepArgs),
    /// Sample a coarse region mask around the entities.
    CoarseMask(CoarseMaskArgs),
    /// Black out the masked region of an image.
    ApplyMask(ApplyMaskArgs),
    /// Score a predicted idmap against ground truth.
    Eval(EvalArgs),
    /// Write synthetic scenes as idmaps.
    Synth(SynthArgs),
    /// Convert an idmap to COCO-style RLE JSON.
    RleExport(RleExportArgs),
    /// Convert COCO-style RLE JSON to an idmap.
    RleImport(RleImportArgs),
}

fn dispatch(command: &Command) -> CliResult<()> {
    match command {
        Command::Encode(a) => run_encode(a),
        Command::Decode(a) => run_decode(a),
        Command::Degrade(a) => run_degrade(a),
        Command::Sweep(a) => run_sweep_cmd(a),
        Command::CoarseMask(a) => run_coarse_mask(a),
        Command::ApplyMask(a) => run_apply_mask(a),
        Command::Eval(a) => run_eval(a),
        Command::Synth(a) => run_synth(a),
        Command::RleExport(a) => run_rle_export(a),
        Command::RleImport(a) => run_rle_import(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match std::panic::catch_unwind(|| dispatch(&cli.command)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("segcodec: {e}");
            ExitCode::from(e.exit_code())
        }
        Err(_) => ExitCode::from(4),
    }
}
