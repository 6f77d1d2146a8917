use clap::Parser;

fn main() {
    let cli = frspace::cli::Cli::parse();
    std::process::exit(frspace::cli::run(cli));
}
