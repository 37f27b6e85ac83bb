use clap::Parser;

fn main() {
    let cli = pdcp::cli::Cli::parse();
    std::process::exit(pdcp::cli::run(cli));
}
