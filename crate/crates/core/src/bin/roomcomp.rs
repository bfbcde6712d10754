use clap::Parser;
use roomcomp::cli::{diagnostic, exit_code, run, Cli};

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("{}", diagnostic(&e));
        std::process::exit(exit_code(&e));
    }
}
