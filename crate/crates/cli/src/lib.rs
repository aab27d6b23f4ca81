//! Subcommands behind the `twomode` binary.

pub mod config;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use twomode::classify::{CellStatus, Table1Report};
use twomode::{
    concurrence, eof, negativity, pure_state_negativities, table1_harness, verify_equivalence, Error, Evolution, Label,
    Scenario, Scheme,
};

pub use config::{Column, RunConfig, SweepConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// A subcommand failure with its exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Self { code: EXIT_CONFIG, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidArgument(_)
            | Error::UnknownLabel(_)
            | Error::DimensionMismatch { .. }
            | Error::LayoutMismatch(_) => EXIT_CONFIG,
            _ => EXIT_NUMERICAL,
        };
        Self { code, message: e.to_string() }
    }
}

/// Output of a subcommand: text to write and the exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub body: String,
    pub code: i32,
}

/// Fixed float format: 17 significant digits, scientific notation.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// One CSV row per grid sample: `t`, the requested measures, `leakage`.
pub fn simulate(cfg: &RunConfig) -> Result<Outcome, Failure> {
    let model = cfg.model();
    let initial = twomode::assemble_initial(cfg.atoms, &cfg.field, &model)?;
    let evolution = Evolution::new(&initial, &model)?;
    let columns = cfg.columns();
    if columns.contains(&Column::NegativityFields) {
        let ok = evolution.layout().len() == 4 && evolution.pure_state_at(0.0).is_some();
        if !ok {
            return Err(Failure::config(format!(
                "negativity_fields needs a pure state evolved on a two-mode layout (got {:?}); \
                 use a pure field and the BLOCK_EXACT backend for TMSC",
                evolution.layout().labels()
            )));
        }
    }
    let leakage = evolution.leakage();
    let rows = model
        .grid
        .times()
        .par_iter()
        .map(|&t| -> Result<String, Failure> {
            let rho = evolution.atoms_at(t)?;
            let c = concurrence(&rho)?;
            let mut fields = vec![fmt_float(t)];
            for col in &columns {
                let v = match col {
                    Column::Concurrence => c,
                    Column::Eof => eof(c)?,
                    Column::NegativityAtoms => negativity(&rho, &["atom1"])?,
                    Column::NegativityFields => {
                        let state = evolution.pure_state_at(t).expect("checked pure");
                        pure_state_negativities(&state)?.1
                    }
                };
                fields.push(fmt_float(v));
            }
            fields.push(fmt_float(leakage));
            Ok(fields.join(","))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut header = vec!["t"];
    header.extend(columns.iter().map(|c| c.header()));
    header.push("leakage");
    let mut body = header.join(",");
    body.push('\n');
    for row in rows {
        body.push_str(&row);
        body.push('\n');
    }
    Ok(Outcome { body, code: EXIT_OK })
}

/// Summary of one classified run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub param: f64,
    pub min_after_life: Option<f64>,
    pub max_after_life: Option<f64>,
    /// `None` when the run failed numerically.
    pub label: Option<Label>,
    pub error: Option<String>,
}

fn sweep_row(param: f64, cfg: &RunConfig) -> SweepRow {
    let outcome = Scenario::new(cfg.atoms, cfg.field.clone(), cfg.model()).classify();
    match outcome {
        Ok((series, class)) => {
            let start = class.first_life.unwrap_or(f64::NEG_INFINITY);
            let after: Vec<f64> =
                series.times.iter().zip(&series.values).filter(|(t, _)| **t >= start).map(|(_, v)| *v).collect();
            SweepRow {
                param,
                min_after_life: after.iter().copied().reduce(f64::min),
                max_after_life: after.iter().copied().reduce(f64::max),
                label: Some(class.label),
                error: None,
            }
        }
        Err(e) => SweepRow { param, min_after_life: None, max_after_life: None, label: None, error: Some(e.to_string()) },
    }
}

/// One CSV row per swept value, in input order. Statistics cover the
/// samples from the first life on (all samples when there is none).
pub fn sweep(sweep: &SweepConfig) -> Result<Outcome, Failure> {
    let configs = sweep.values.iter().map(|&v| sweep.instance(v).map(|c| (v, c))).collect::<Result<Vec<_>, _>>();
    let configs = configs.map_err(Failure::config)?;
    let rows: Vec<SweepRow> = configs.par_iter().map(|(v, cfg)| sweep_row(*v, cfg)).collect();
    let opt = |x: Option<f64>| x.map(fmt_float).unwrap_or_default();
    let mut body = format!("{},min_concurrence,max_concurrence,label\n", sweep.parameter);
    for r in &rows {
        body.push_str(&format!(
            "{},{},{},{}\n",
            fmt_float(r.param),
            opt(r.min_after_life),
            opt(r.max_after_life),
            r.label.map_or("INVALID", Label::name)
        ));
    }
    let code = if rows.iter().any(|r| r.label.is_none()) { EXIT_NUMERICAL } else { EXIT_OK };
    for r in rows.iter().filter_map(|r| r.error.as_ref()) {
        eprintln!("{}: {r}", sweep.parameter);
    }
    Ok(Outcome { body, code })
}

/// Largest atomic trace distance between the full two-mode model and its
/// reduced model.
pub fn verify(cfg: &RunConfig, as_json: bool) -> Result<Outcome, Failure> {
    let deviation = verify_equivalence(cfg.atoms, &cfg.field, &cfg.model())?;
    let pass = deviation < cfg.verify_bound;
    let body = if as_json {
        let v = json!({
            "scheme": cfg.scheme,
            "atoms": cfg.atoms,
            "field": cfg.field,
            "max_trace_distance": deviation,
            "bound": cfg.verify_bound,
            "pass": pass,
        });
        serde_json::to_string_pretty(&v).expect("report serializes") + "\n"
    } else {
        format!(
            "{} {} {:?}: max trace distance {} (bound {}) {}\n",
            cfg.scheme.name(),
            cfg.atoms.name(),
            cfg.field,
            fmt_float(deviation),
            fmt_float(cfg.verify_bound),
            if pass { "ok" } else { "EXCEEDED" }
        )
    };
    Ok(Outcome { body, code: if pass { EXIT_OK } else { EXIT_MISMATCH } })
}

/// Machine-readable form of a classification table report.
pub fn table1_json(report: &Table1Report) -> serde_json::Value {
    let cells: Vec<serde_json::Value> = report
        .cells
        .iter()
        .map(|c| {
            json!({
                "cell": c.key(),
                "scheme": c.scheme,
                "row": c.row,
                "column": c.column.to_string(),
                "atoms": c.atoms,
                "expected": c.expected.text,
                "observed": c.observed_text(),
                "parameters": c.instances.iter().map(|i| i.parameters.clone()).collect::<Vec<_>>(),
                "window": [c.window.0, c.window.1],
                "status": c.status,
                "branches_covered": c.branches_covered,
                "instances": c.instances,
            })
        })
        .collect();
    json!({
        "cells": cells,
        "summary": {
            "total": report.cells.len(),
            "pass": report.count(CellStatus::Pass),
            "fail": report.count(CellStatus::Fail),
            "invalid": report.count(CellStatus::Invalid),
        },
        "instances": report.instances,
    })
}

pub fn table1(cfg: &RunConfig, only: Option<Scheme>, as_json: bool) -> Result<Outcome, Failure> {
    let schemes = match only {
        Some(s) => vec![s],
        None => vec![Scheme::Tmsc, Scheme::Tmac],
    };
    let mut instances = cfg.table1.clone();
    instances.grid = cfg.grid;
    let report = table1_harness(&instances, &schemes);
    let body = if as_json {
        serde_json::to_string_pretty(&table1_json(&report)).expect("report serializes") + "\n"
    } else {
        report.text()
    };
    let code = if report.count(CellStatus::Invalid) > 0 {
        EXIT_NUMERICAL
    } else if report.count(CellStatus::Fail) > 0 {
        EXIT_MISMATCH
    } else {
        EXIT_OK
    };
    Ok(Outcome { body, code })
}
