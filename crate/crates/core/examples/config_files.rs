//! Drive runs from the bundled TOML configs, as the `opnet` binary does.
//!
//! ```text
//! cargo run --release --example config_files -- configs/consensus.toml /tmp/opnet-run
//! ```

use std::path::PathBuf;

use opnet::cli::{self, CommonArgs, Command, FileConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let config = PathBuf::from(args.next().unwrap_or_else(|| "configs/consensus.toml".into()));
    let out = PathBuf::from(args.next().unwrap_or_else(|| std::env::temp_dir().join("opnet-example").display().to_string()));

    let parsed = match FileConfig::load(&config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    };
    println!("config hash {}", parsed.hash());
    for p in parsed.parameter_echo() {
        println!("  {:<24} {:<10} {}", p["key"].as_str().unwrap_or(""), p["symbol"].as_str().unwrap_or(""), p["value"]);
    }

    let common = CommonArgs {
        config,
        out: out.clone(),
        seed: None,
    };
    let command = if parsed.degree_dist.is_some() { Command::DegreeDist(common) } else { Command::Simulate(common) };
    match cli::run(&command) {
        Ok(()) => println!("outputs written to {}", out.display()),
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}
