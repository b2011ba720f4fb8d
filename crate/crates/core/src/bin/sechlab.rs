use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use sechlab::harness::{parse_cli, run_experiment};

fn main() -> ExitCode {
    let config = match parse_cli(std::env::args_os()) {
        Ok(c) => c,
        Err(exit) => {
            if exit.code == 0 {
                print!("{}", exit.message);
            } else {
                eprint!("{}", exit.message);
            }
            return ExitCode::from(exit.code as u8);
        }
    };
    let started = Instant::now();
    let report = match run_experiment(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match report.write() {
        Ok(Some(body)) => {
            let mut out = std::io::stdout().lock();
            if out.write_all(body.as_bytes()).is_err() {
                return ExitCode::from(1);
            }
        }
        Ok(None) => {}
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let agg = &report.aggregate;
    eprintln!(
        "{}: {} ({}) in {:.2?}",
        config.experiment.as_str(),
        if agg.passed { "PASS" } else { "FAIL" },
        agg.predicate,
        started.elapsed()
    );
    if agg.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
