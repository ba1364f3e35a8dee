use clap::Parser;
use etimd_cli::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = execute(&cli, &mut std::io::stdout().lock()) {
        eprintln!("etimd-lab: {e}");
        std::process::exit(e.exit_code());
    }
}
