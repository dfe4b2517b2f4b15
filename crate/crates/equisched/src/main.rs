use clap::Parser;

use equisched::cli::{exit_code, run, RunConfig};

fn main() {
    let cfg = RunConfig::parse();
    match run(&cfg) {
        Ok(out) => {
            println!("{}", out.stdout);
            std::process::exit(out.code);
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(exit_code(&e));
        }
    }
}
