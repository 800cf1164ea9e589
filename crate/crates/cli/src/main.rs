use clap::Parser;

fn main() {
    let cli = hqc_cli::Cli::parse();
    std::process::exit(hqc_cli::run(cli));
}
