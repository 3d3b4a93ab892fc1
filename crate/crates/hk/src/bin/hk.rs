use clap::Parser;

fn main() {
    let cli = hk::cli::Cli::parse();
    std::process::exit(hk::cli::run(cli));
}
