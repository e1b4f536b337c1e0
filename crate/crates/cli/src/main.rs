use clap::Parser;

fn main() {
    std::process::exit(bncritic_cli::run(bncritic_cli::Cli::parse()));
}
