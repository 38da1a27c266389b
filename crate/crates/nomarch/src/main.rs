use clap::Parser;

fn main() {
    let cli = nomarch::cli::Cli::parse();
    if let Err(e) = nomarch::cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
