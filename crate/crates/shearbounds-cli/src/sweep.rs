//! Batch evaluation of bound curves over `(f, N, method)` with deterministic
//! output ordering.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use shearbounds_core::mm::{self, MmOptions};
use shearbounds_core::pwe;

use crate::config::{Method, SweepConfig};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("speed conversion needs positive modulus and density (mu = {mu}, rho = {rho})")]
    NonPositive { mu: f64, rho: f64 },
}

/// One `(f, N, method)` record. Failed points keep their row with the bound
/// fields empty and the failure recorded in `error`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsRow {
    pub f: f64,
    #[serde(rename = "N")]
    pub n: i32,
    pub method: String,
    pub mu_lower: Option<f64>,
    pub mu_upper: Option<f64>,
    pub c_lower: Option<f64>,
    pub c_upper: Option<f64>,
    pub rho_avg: f64,
    pub backend: String,
    pub condition_estimate: Option<f64>,
    pub error: Option<String>,
}

/// `c = sqrt(mu / rho)`.
pub fn bounds_to_speed(mu_bound: f64, rho_avg: f64) -> Result<f64, SweepError> {
    if !(mu_bound > 0.0 && rho_avg > 0.0) {
        return Err(SweepError::NonPositive { mu: mu_bound, rho: rho_avg });
    }
    Ok((mu_bound / rho_avg).sqrt())
}

fn method_tag(m: Method) -> &'static str {
    match m {
        Method::Pwe => "pwe",
        Method::Mm => "mm",
        Method::Both => unreachable!("expanded before dispatch"),
    }
}

fn evaluate_point(cfg: &SweepConfig, opts: &MmOptions, f: f64, n: i32, method: Method) -> BoundsRow {
    let mut row = BoundsRow {
        f,
        n,
        method: method_tag(method).into(),
        mu_lower: None,
        mu_upper: None,
        c_lower: None,
        c_upper: None,
        rho_avg: f64::NAN,
        backend: String::new(),
        condition_estimate: None,
        error: None,
    };
    let field = match cfg.realize(f) {
        Ok(field) => field,
        Err(e) => {
            row.error = Some(e);
            return row;
        }
    };
    row.rho_avg = field.averages().rho_avg;

    let bounds = match method {
        Method::Pwe => {
            let res = if opts.oracle_mode {
                pwe::pwe_upper_mu_ungated(&field, n).and_then(|up| {
                    pwe::pwe_upper_mu_ungated(&field.inverted(), n).map(|inv| (1.0 / inv, up))
                })
            } else {
                pwe::pwe_lower_mu(&field, n)
                    .and_then(|lo| pwe::pwe_upper_mu(&field, n).map(|up| (lo, up)))
            };
            res.map_err(|e| e.to_string())
        }
        Method::Mm => {
            let use_half = field.symmetry().even_x1;
            let res = mm::mm_bounds(&field, n, opts).map(|(lo, up)| {
                row.backend = if use_half {
                    format!("{}+half", up.diagnostics.backend)
                } else {
                    up.diagnostics.backend.to_string()
                };
                row.condition_estimate = Some(up.diagnostics.condition_estimate);
                (lo.value, up.value)
            });
            res.map_err(|e| e.to_string())
        }
        Method::Both => unreachable!(),
    };

    match bounds {
        Ok((lo, up)) => {
            row.mu_lower = Some(lo);
            row.mu_upper = Some(up);
            match (bounds_to_speed(lo, row.rho_avg), bounds_to_speed(up, row.rho_avg)) {
                (Ok(cl), Ok(cu)) => {
                    row.c_lower = Some(cl);
                    row.c_upper = Some(cu);
                }
                (Err(e), _) | (_, Err(e)) => row.error = Some(e.to_string()),
            }
        }
        Err(e) => row.error = Some(e),
    }
    row
}

/// Evaluate every `(f, N, method)` point of the config. Points run in
/// parallel; rows come back sorted by `(f, N, method)` so identical configs
/// produce identical outputs regardless of scheduling.
pub fn run_sweep(cfg: &SweepConfig) -> Vec<BoundsRow> {
    let opts = cfg.mm_options();
    let methods: Vec<Method> = match cfg.method {
        Method::Both => vec![Method::Mm, Method::Pwe],
        m => vec![m],
    };
    let mut tasks: Vec<(f64, i32, Method)> = Vec::new();
    for f in cfg.f_values() {
        for &n in &cfg.n_values {
            for &m in &methods {
                tasks.push((f, n, m));
            }
        }
    }
    let mut rows: Vec<BoundsRow> = tasks
        .par_iter()
        .map(|&(f, n, m)| evaluate_point(cfg, &opts, f, n, m))
        .collect();
    rows.sort_by(|a, b| {
        a.f.total_cmp(&b.f)
            .then(a.n.cmp(&b.n))
            .then(a.method.cmp(&b.method))
    });
    rows
}
