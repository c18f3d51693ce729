use clap::Parser;

fn main() {
    std::process::exit(hamf_cli::run(hamf_cli::Cli::parse()));
}
