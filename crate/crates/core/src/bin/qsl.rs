use clap::Parser;
use qsl_core::cli::{main_with, Cli};

fn main() {
    std::process::exit(main_with(&Cli::parse()));
}
