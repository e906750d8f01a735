//! `dtrans` — experiment runner for the Dirichlet transport library.
//!
//! Usage: `dtrans <command> [--flag value]...`
//!
//! Commands: cost, couple, schrodinger, paths, interpolate, entropy, gaps,
//! validate. A `--config FILE` flag loads flat `key=value` lines (later
//! keys override earlier ones; command-line flags override the file).
//! `--out DIR` writes `result.json` plus CSV mirrors (`--format
//! json|csv|both`). `DTRANS_THREADS` caps the worker count; payloads are
//! byte-identical for a fixed config and seed regardless of it.
//!
//! Exit codes: 0 success, 2 validation failure, 3 numerical failure.

mod commands;
mod config;
mod report;

use std::process::ExitCode;

use dtrans_core::Error;

use commands::RunOutput;
use config::RawConfig;
use report::Json;

const USAGE: &str = "usage: dtrans <command> [--flag value]...
commands:
  cost         transport cost of a single pair (--p, --q)
  couple       exact OT between sampled measures (--n --atoms --generator --cost)
  schrodinger  mixture-coupling convergence experiment (--N --seeds --lambda auto)
  paths        bridge-path convergence experiment (--lambda grid --grid --seeds)
  interpolate  displacement cost curve (--atoms --t-grid)
  entropy      entropy-convexity experiment (--model --t-grid --samples)
  gaps         order-statistics gap bound experiment (--model --n-grid --replicas)
  validate     check a config without running (--kind ...)
common flags: --config FILE --seed S --eps E --out DIR --format json|csv|both
";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let Some(kind) = args.first().cloned() else {
        eprint!("{USAGE}");
        return ExitCode::from(2);
    };
    if kind == "--help" || kind == "help" {
        print!("{USAGE}");
        return ExitCode::SUCCESS;
    }
    let cfg = match RawConfig::from_args(&args[1..]) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match commands::run(&kind, &cfg) {
        Ok(output) => match deliver(&cfg, &output) {
            Ok(()) if output.failed_validation => ExitCode::from(2),
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Numerical(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn envelope(output: &RunOutput) -> Json {
    let mut root = Json::obj();
    root.push("schema", Json::Str("dtrans.result.v1".into()));
    root.push("kind", Json::Str(output.kind.into()));
    root.push("library_version", Json::Str(dtrans_core::VERSION.into()));
    root.push("seed", Json::Int(output.seed as i64));
    root.push("config", output.config_echo.clone());
    root.push("results", output.results.clone());
    root
}

fn deliver(cfg: &RawConfig, output: &RunOutput) -> dtrans_core::Result<()> {
    print!("{}", output.stdout);
    let Some(out_dir) = cfg.get("out") else {
        return Ok(());
    };
    let format = cfg.get_or("format", "both");
    if !["json", "csv", "both"].contains(&format.as_str()) {
        return Err(Error::parameter(format!(
            "format: expected json|csv|both, got '{format}'"
        )));
    }
    std::fs::create_dir_all(out_dir)
        .map_err(|e| Error::parameter(format!("out: cannot create '{out_dir}': {e}")))?;
    let write = |name: &str, contents: &str| -> dtrans_core::Result<()> {
        let path = format!("{out_dir}/{name}");
        std::fs::write(&path, contents)
            .map_err(|e| Error::parameter(format!("out: cannot write '{path}': {e}")))
    };
    if format == "json" || format == "both" {
        write("result.json", &envelope(output).render())?;
    }
    if format == "csv" || format == "both" {
        for table in &output.tables {
            write(&format!("{}.csv", table.name), &table.render())?;
        }
    }
    Ok(())
}
