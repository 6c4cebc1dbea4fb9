//! `shearbounds`: sweep plane-wave-expansion and monodromy-matrix bounds of
//! the effective shear speed over filling fraction and truncation order.
//!
//! Exit codes: 0 success, 1 some sweep points failed, 2 configuration error,
//! 3 output I/O error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use shearbounds_cli::config::{Backend, FGrid, Method, OutputFormatConfig, SweepConfig};
use shearbounds_cli::output::{write_output, OutputFormat};
use shearbounds_cli::sweep::run_sweep;

#[derive(Parser, Debug)]
#[command(
    name = "shearbounds",
    about = "Converging upper/lower bounds for the effective shear speed of 2D periodic composites",
    version
)]
struct Cli {
    /// Sweep configuration (JSON).
    #[arg(long)]
    config: PathBuf,

    /// Override the truncation orders, e.g. "0,1,2,4".
    #[arg(long = "N", value_name = "LIST")]
    n_values: Option<String>,

    /// Override the filling-fraction grid as start:stop:count.
    #[arg(long = "f-grid", value_name = "START:STOP:COUNT")]
    f_grid: Option<String>,

    /// Override the method: pwe, mm, or both.
    #[arg(long)]
    method: Option<String>,

    /// Override the integrator backend: exp, product, or peano.
    #[arg(long)]
    backend: Option<String>,

    /// Product-rule step count or Peano series order.
    #[arg(long)]
    steps: Option<usize>,

    /// Override the output format: csv or json.
    #[arg(long)]
    format: Option<String>,

    /// Override the output path.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Bypass the cubic-symmetry gate (laminate tests).
    #[arg(long)]
    oracle_mode: bool,
}

fn apply_overrides(cfg: &mut SweepConfig, cli: &Cli) -> Result<(), String> {
    if let Some(list) = &cli.n_values {
        cfg.n_values = list
            .split(',')
            .map(|s| s.trim().parse::<i32>().map_err(|e| format!("bad --N entry {s:?}: {e}")))
            .collect::<Result<_, _>>()?;
    }
    if let Some(grid) = &cli.f_grid {
        let parts: Vec<&str> = grid.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("--f-grid expects start:stop:count, got {grid:?}"));
        }
        cfg.f_grid = Some(FGrid {
            start: parts[0].parse().map_err(|e| format!("bad --f-grid start: {e}"))?,
            stop: parts[1].parse().map_err(|e| format!("bad --f-grid stop: {e}"))?,
            count: parts[2].parse().map_err(|e| format!("bad --f-grid count: {e}"))?,
        });
    }
    if let Some(m) = &cli.method {
        cfg.method = match m.as_str() {
            "pwe" => Method::Pwe,
            "mm" => Method::Mm,
            "both" => Method::Both,
            other => return Err(format!("unknown method {other:?}")),
        };
    }
    if let Some(b) = &cli.backend {
        cfg.backend = Some(match b.as_str() {
            "exp" => Backend::Exp,
            "product" => Backend::Product,
            "peano" => Backend::Peano,
            other => return Err(format!("unknown backend {other:?}")),
        });
    }
    if let Some(s) = cli.steps {
        cfg.steps = Some(s);
    }
    if let Some(f) = &cli.format {
        cfg.format = match f.as_str() {
            "csv" => OutputFormatConfig::Csv,
            "json" => OutputFormatConfig::Json,
            other => return Err(format!("unknown format {other:?}")),
        };
    }
    if let Some(out) = &cli.out {
        cfg.output = out.clone();
    }
    if cli.oracle_mode {
        cfg.oracle_mode = true;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", cli.config.display());
            return ExitCode::from(2);
        }
    };
    let mut cfg = match SweepConfig::from_json(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = apply_overrides(&mut cfg, &cli) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    if let Err(e) = cfg.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }

    let rows = run_sweep(&cfg);
    let failures = rows.iter().filter(|r| r.error.is_some()).count();

    let format = match cfg.format {
        OutputFormatConfig::Csv => OutputFormat::Csv,
        OutputFormatConfig::Json => OutputFormat::Json,
    };
    if let Err(e) = write_output(&rows, format, &cfg.output) {
        eprintln!("error: cannot write {}: {e}", cfg.output.display());
        return ExitCode::from(3);
    }

    if failures > 0 {
        eprintln!("{failures} of {} sweep points failed; see the error column", rows.len());
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}
