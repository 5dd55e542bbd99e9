//! Command-line front end: configuration, orchestration and report files.

pub mod commands;
pub mod config;

use std::io::Write;

pub use commands::{execute, write_output, Output, RunError};
pub use config::{parse_config, ConfigError, ExperimentConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

pub const USAGE: &str = "\
usage: rnl <command> [--config FILE] [--key value]...

commands: norm, family, sweep, threshold, solve, check

Keys may also be given in FILE as key=value lines; flags override the file.
'-' and '_' are interchangeable in key names. See the README for every key.
";

/// Caps the global thread pool at `RNL_THREADS` when it is set.
pub fn init_threads(var: Option<&str>) -> Result<(), ConfigError> {
    let Some(v) = var else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| ConfigError::TypeMismatch {
        key: "RNL_THREADS".into(),
        value: v.into(),
        expected: "a positive integer",
    })?;
    if n == 0 {
        return Err(ConfigError::Constraint {
            key: "RNL_THREADS".into(),
            message: "must be at least 1".into(),
        });
    }
    // A second initialisation in the same process keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Parses, runs and reports; returns the process exit code.
pub fn run(args: &[String], threads: Option<&str>, out: &mut impl Write, err: &mut impl Write) -> i32 {
    if args.iter().any(|a| a == "--help" || a == "-h" || a == "help") {
        let _ = out.write_all(USAGE.as_bytes());
        return EXIT_OK;
    }
    let cfg = match init_threads(threads).and_then(|()| parse_config(args, |p| std::fs::read_to_string(p))) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "configuration error: {e}");
            return EXIT_CONFIG;
        }
    };
    let output = match execute(&cfg) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_FAILED;
        }
    };
    for line in &output.lines {
        let _ = writeln!(out, "{line}");
    }
    match &cfg.out {
        Some(dir) => match write_output(&cfg, &output, dir) {
            Ok(paths) => {
                for p in paths {
                    let _ = writeln!(out, "wrote {}", p.display());
                }
            }
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                return EXIT_FAILED;
            }
        },
        None => {
            let _ = out.write_all(output.json.as_bytes());
        }
    }
    match output.failure {
        Some(f) => {
            let _ = writeln!(err, "failed: {f}");
            EXIT_FAILED
        }
        None => EXIT_OK,
    }
}
