// SPDX-License-Identifier: MIT OR Apache-2.0

//! Command-line entry: `cpfit-solver <model.lp> <out.sol> [options]`.

use std::process::ExitCode;

use cpfit_solver::branch::{solve_problem, BbConfig};
use cpfit_solver::lp_read::parse_lp;
use cpfit_solver::sol_write::write_sol;

const USAGE: &str = "usage: cpfit-solver <model.lp> <out.sol> \
[--time-limit SECONDS] [--rel-gap TOL] [--threads N] [--seed N]

Reads an LP-format model, solves it (LP, binary MILP, or separable convex
binary MIQP), and writes an annotated solution file. --threads is accepted
for interface compatibility; the solve is single-threaded.";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut positional: Vec<String> = Vec::new();
    let mut cfg = BbConfig::default();
    let mut seed = 0u64;
    let mut i = 0usize;
    while i < args.len() {
        match args[i].as_str() {
            "--help" | "-h" => {
                println!("{USAGE}");
                return ExitCode::SUCCESS;
            }
            "--time-limit" | "--rel-gap" | "--threads" | "--seed" => {
                let flag = args[i].clone();
                i += 1;
                let Some(value) = args.get(i) else {
                    eprintln!("missing value for {flag}");
                    return ExitCode::from(2);
                };
                let ok = match flag.as_str() {
                    "--time-limit" => value.parse::<f64>().map(|v| cfg.time_limit = v).is_ok(),
                    "--rel-gap" => value.parse::<f64>().map(|v| cfg.rel_gap = v).is_ok(),
                    "--seed" => value.parse::<u64>().map(|v| seed = v).is_ok(),
                    // Accepted and recorded; the engine is single-threaded.
                    "--threads" => value.parse::<u32>().map(|_| ()).is_ok(),
                    _ => false,
                };
                if !ok {
                    eprintln!("invalid value '{value}' for {flag}");
                    return ExitCode::from(2);
                }
            }
            other if other.starts_with("--") => {
                eprintln!("unknown option {other}\n{USAGE}");
                return ExitCode::from(2);
            }
            _ => positional.push(args[i].clone()),
        }
        i += 1;
    }
    if positional.len() != 2 {
        eprintln!("{USAGE}");
        return ExitCode::from(2);
    }

    let text = match std::fs::read_to_string(&positional[0]) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read {}: {e}", positional[0]);
            return ExitCode::from(2);
        }
    };
    let mut problem = match parse_lp(&text) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("cannot parse {}: {e}", positional[0]);
            return ExitCode::from(2);
        }
    };
    problem.name = std::path::Path::new(&positional[0])
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "model".into());

    let outcome = solve_problem(&problem, &cfg);
    let sol = write_sol(&problem, &outcome, cfg.rel_gap, seed);
    if let Err(e) = std::fs::write(&positional[1], sol) {
        eprintln!("cannot write {}: {e}", positional[1]);
        return ExitCode::from(2);
    }
    if outcome.status == cpfit_solver::branch::SolveStatusKind::Error {
        eprintln!(
            "solve failed: {}",
            outcome.message.as_deref().unwrap_or("unknown error")
        );
        return ExitCode::from(3);
    }
    ExitCode::SUCCESS
}
