use clap::Parser;
use contagion_cli::args::Cli;

fn main() {
    std::process::exit(contagion_cli::main_with(Cli::parse()));
}
