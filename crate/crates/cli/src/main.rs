use clap::Parser;
use ecrank_cli::cli::Cli;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Err(e) = ecrank_cli::run(&cli) {
        eprintln!("error: {e:#}");
        std::process::exit(ecrank_cli::exit_code(&e));
    }
}
