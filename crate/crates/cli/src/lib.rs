//! Verification suites, configuration and report output for the
//! `staticgeo` command.

pub mod config;
pub mod dump;
pub mod report;
pub mod suites;

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde_json::json;

use config::{Resolver, Source};
use report::{emit_plot_data, write_json, CheckRecord, Outcome, SuiteReport, TableRecord, Timing};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

/// Process exit codes.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const FAIL: i32 = 1;
    pub const CONFIG: i32 = 2;
}

pub const DEFAULT_SEED: u64 = 0;

#[derive(Clone, Debug, Default)]
pub struct VerifyOptions {
    pub parallel: bool,
    pub seed: Option<u64>,
}

/// Run `suite` with `config`, writing `report.json`, `timing.json` and one
/// CSV per table into `out`.
pub fn run_suite(suite: &str, config: &Resolver, out: &Path, opts: &VerifyOptions) -> Result<SuiteReport, CliError> {
    let s = suites::find(suite).ok_or_else(|| {
        let known: Vec<&str> = suites::SUITES.iter().map(|s| s.name).collect();
        CliError::Config(format!("unknown suite '{suite}' (known: {})", known.join(", ")))
    })?;
    if let Some(named) = config.raw_str("suite") {
        config.note("suite", json!(named), Source::Config);
        if named != suite {
            return Err(CliError::Config(format!(
                "config is for suite '{named}' but '{suite}' was requested"
            )));
        }
    }
    let seed = match (opts.seed, config.raw_u64("seed")) {
        (Some(s), _) => {
            config.note("seed", json!(s), Source::Cli);
            s
        }
        (None, Some(s)) => {
            config.note("seed", json!(s), Source::Config);
            s
        }
        (None, None) => {
            config.note("seed", json!(DEFAULT_SEED), Source::Default);
            DEFAULT_SEED
        }
    };
    let checks = s.build(config, seed)?;
    let unused = config.unused();
    if !unused.is_empty() {
        return Err(CliError::Config(format!(
            "key(s) {} not used by suite '{suite}'",
            unused.join(", ")
        )));
    }
    std::fs::create_dir_all(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;

    let start = Instant::now();
    let timed = |c: &suites::Check| {
        let t = Instant::now();
        let o = c.run();
        (o, t.elapsed().as_secs_f64())
    };
    let results: Vec<(Outcome, f64)> = if opts.parallel {
        checks.par_iter().map(timed).collect()
    } else {
        checks.iter().map(timed).collect()
    };
    let wall = start.elapsed().as_secs_f64();

    let mut records = Vec::with_capacity(checks.len());
    let mut tables = Vec::new();
    for (c, (o, _)) in checks.iter().zip(&results) {
        records.push(CheckRecord {
            name: c.name.clone(),
            computed: o.computed,
            expected: o.expected,
            tolerance: o.tolerance,
            norm: o.norm,
            pass: o.passed(),
            message: o.message.clone(),
        });
        for t in &o.tables {
            let file = format!("{}.csv", t.name);
            emit_plot_data(t, &out.join(&file))?;
            tables.push(TableRecord {
                name: t.name.clone(),
                file,
                rows: t.rows.len(),
                header: t.header.clone(),
                fields: t.fields.clone(),
            });
        }
    }
    let report = SuiteReport {
        suite: suite.to_string(),
        passed: records.iter().all(|r| r.pass),
        checks: records,
        tables,
        config: config.echo(),
    };
    write_json(&out.join("report.json"), &report)?;
    let timing = Timing {
        suite: suite.to_string(),
        wall_seconds: wall,
        checks: checks.iter().zip(&results).map(|(c, (_, t))| (c.name.clone(), *t)).collect(),
    };
    write_json(&out.join("timing.json"), &timing)?;
    Ok(report)
}
