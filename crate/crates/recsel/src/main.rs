use clap::Parser;
use recsel::cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
