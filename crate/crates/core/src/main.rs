use clap::Parser;

use lorentz_aut::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
