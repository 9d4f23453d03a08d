use alnewton::cli::{self, Cli};
use clap::Parser;

fn main() {
    std::process::exit(cli::run(Cli::parse()));
}
