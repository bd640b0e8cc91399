use clap::Parser;
use rcap::cli::{self, Cli};

fn main() {
    let cli = Cli::parse();
    match cli::run(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("rcap: {err}");
            std::process::exit(4);
        }
    }
}
