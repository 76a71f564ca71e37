//! The `pano` command line tool.

pub mod args;
pub mod bench;
pub mod chain;
pub mod commands;
pub mod error;
pub mod script;
pub mod sequence;
pub mod serve;

use std::ffi::OsString;
use std::fs;
use std::io::Write;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};
use pano_agents::BackendSuite;

use crate::args::{ChainArgs, Cli, Command};
use crate::chain::{run_chain, ChainOptions};
use crate::commands::emit;
use crate::error::{exit, CliError, Result};
use crate::sequence::{read_png, write_json, write_sequence, SequenceManifest};

pub use crate::error::exit as exit_code;

fn chain_cmd(args: &ChainArgs, out: &mut dyn Write) -> Result<()> {
    let steps = match &args.yaw_script {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::unreadable(path, e))?;
            script::parse_script(&text)?
        }
        None => Vec::new(),
    };
    let image = args.image.as_deref().map(read_png).transpose()?;
    let options = ChainOptions {
        prompt: args.prompt.clone(),
        image,
        segments: args.segments,
        seed: args.seed,
        width: args.width,
        duration_s: args.duration,
        fps: args.fps,
    };
    let outcome = run_chain(&options, &steps, &BackendSuite::mock())?;
    let report = &outcome.report;
    if let Some(dir) = &args.out {
        let manifest = SequenceManifest::describe(&outcome.clip, report.final_yaw, None);
        write_sequence(dir, &outcome.clip, &manifest)?;
        write_json(&dir.join("chain.json"), report)?;
    }
    let text = if args.json {
        serde_json::to_string_pretty(report).map_err(|e| CliError::Internal(e.to_string()))? + "\n"
    } else {
        let mut s = String::new();
        for seg in &report.segments {
            s += &format!(
                "segment {} yaw {} heading {}: {}\n",
                seg.index,
                seg.yaw_at_generation.degrees(),
                seg.heading.degrees(),
                seg.text_prompt
            );
        }
        s + &format!(
            "{} frames, {:.3} s at {} fps, {}x{}\nsha256 {}\n",
            report.frame_count, report.duration_s, report.fps, report.width, report.height, report.sha256
        )
    };
    emit(out, &text)
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Convert(a) => commands::convert(a, out),
        Command::Recenter(a) => commands::recenter_cmd(a, out),
        Command::Blend(a) => commands::blend(a, out),
        Command::Chain(a) => chain_cmd(a, out),
        Command::Concat(a) => commands::concat_cmd(a, out),
        Command::Seam(a) => commands::seam(a, out),
        Command::Serve(a) => serve::serve(a, out),
        Command::Bench(a) => {
            let report = bench::run_bench(a.width, a.seconds)?;
            let text = if a.json {
                serde_json::to_string_pretty(&report).map_err(|e| CliError::Internal(e.to_string()))? + "\n"
            } else {
                format!(
                    "{}x{} from {}x{}\nrecenter {:.1} frames/s ({} frames)\nto_equirect {:.1} frames/s ({} frames)\n",
                    report.width,
                    report.height,
                    report.source_width,
                    report.source_height,
                    report.recenter_fps,
                    report.recenter_frames,
                    report.to_equirect_fps,
                    report.to_equirect_frames
                )
            };
            emit(out, &text)
        }
    }
}

fn subcommand_name(command: &Command) -> &'static str {
    match command {
        Command::Convert(_) => "convert",
        Command::Recenter(_) => "recenter",
        Command::Blend(_) => "blend",
        Command::Chain(_) => "chain",
        Command::Concat(_) => "concat",
        Command::Seam(_) => "seam",
        Command::Serve(_) => "serve",
        Command::Bench(_) => "bench",
    }
}

/// Parses `argv`, runs the command and returns the process exit code.
/// Diagnostics go to `err`.
pub fn main_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    return exit::OK;
                }
                _ => exit::USAGE,
            };
            let _ = write!(err, "{}", e.render());
            return code;
        }
    };
    match run(&cli, out) {
        Ok(()) => exit::OK,
        Err(e) => {
            if let CliError::Usage(message) = &e {
                // Render like a clap error so the usage line is included.
                let mut cmd = Cli::command();
                cmd.build();
                let name = subcommand_name(&cli.command);
                let sub = cmd.find_subcommand_mut(name).expect("subcommand exists");
                let _ = write!(err, "{}", sub.error(ErrorKind::ValueValidation, message).render());
            } else {
                let _ = writeln!(err, "error: {e}");
            }
            e.exit_code()
        }
    }
}
