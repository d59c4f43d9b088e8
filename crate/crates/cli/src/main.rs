mod args;
mod commands;
mod config;
mod failure;
mod instance;
mod io;
mod svg;

use clap::Parser;

use args::{Cli, Command};

fn main() {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = match cli.command {
        Command::Gen(a) => commands::gen::cmd_gen(&a),
        Command::Run(a) => commands::run::cmd_run(&a),
        Command::Compare(a) => commands::compare::cmd_compare(&a),
        Command::Check(a) => commands::check::cmd_check(&a),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
