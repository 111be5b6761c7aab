use clap::Parser;

use pauli_switch_cli::{run, write_output, RunConfig};

fn main() {
    let cfg = RunConfig::parse();
    match run(&cfg) {
        Ok(output) => {
            if let Err(e) = write_output(&cfg, &output) {
                eprintln!("error: {e:#}");
                std::process::exit(2);
            }
            std::process::exit(if output.all_passed { 0 } else { 1 });
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(2);
        }
    }
}
