use std::process::ExitCode;

use clap::Parser;
use dirac_harness::cli::{execute, Cli};

fn report(class: &str, message: &str) {
    eprintln!("{}", serde_json::json!({ "error": class, "message": message }));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            report("UsageError", e.to_string().trim());
            return ExitCode::from(2);
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).parse_default_env().init();
    match execute(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(e.class(), &e.to_string());
            ExitCode::FAILURE
        }
    }
}
