use clap::Parser;
use designlab_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("designlab: {e}");
            std::process::exit(2);
        }
    }
}
