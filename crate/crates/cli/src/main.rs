//! Command-line pipeline driver.
//!
//! Subcommands cover the full path: synthetic scene generation, camera-pose
//! synthesis, association-map rendering with synthetic features, feature
//! back-projection, point sampling, toy training, sliding-window inference,
//! mIoU evaluation, and colored PLY export.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

mod commands;

use clap::error::ErrorKind;
use clap::Parser;
use commands::{Cli, Command};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's help/version output is not an error.
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                std::process::exit(0);
            }
            eprint!("{e}");
            std::process::exit(1);
        }
    };

    if let Some(threads) = cli.threads {
        // A single failure here means the pool was already built; fine.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }

    let result = match cli.command {
        Command::GenScene(args) => commands::gen_scene(args),
        Command::GenPoses(args) => commands::gen_poses(args),
        Command::Render(args) => commands::render(args),
        Command::Backproject(args) => commands::backproject(args),
        Command::Sample(args) => commands::sample(args),
        Command::TrainToy(args) => commands::train_toy(args),
        Command::Infer(args) => commands::infer(args),
        Command::Eval(args) => commands::eval(args),
        Command::ExportPly(args) => commands::export_ply(args),
    };

    match result {
        Ok(()) => {}
        Err(commands::CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(1);
        }
        Err(commands::CliError::Data(e)) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
}
