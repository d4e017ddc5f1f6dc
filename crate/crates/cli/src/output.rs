//! CSV rendering with a `#`-prefixed provenance header.

use std::fmt::Write;

use crate::config::ExperimentConfig;
use crate::experiments::{Cell, Table};

/// Shortest decimal that round-trips to the same `f64`; scientific notation
/// outside `[1e-5, 1e16)`.
pub fn format_f64(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let a = v.abs();
    if a != 0.0 && !(1e-5..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

fn format_cell(c: &Cell) -> String {
    match c {
        Cell::Num(v) => format_f64(*v),
        Cell::Int(v) => v.to_string(),
        Cell::Bool(b) => b.to_string(),
        Cell::Empty => String::new(),
    }
}

pub fn render(cfg: &ExperimentConfig, table: &Table) -> String {
    let mut out = String::new();
    writeln!(out, "# {} {}", env!("CARGO_BIN_NAME"), env!("CARGO_PKG_VERSION")).unwrap();
    for line in cfg.to_toml().lines() {
        if line.is_empty() {
            out.push_str("#\n");
        } else {
            writeln!(out, "# {line}").unwrap();
        }
    }
    writeln!(out, "{}", table.columns.join(",")).unwrap();
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(format_cell).collect();
        writeln!(out, "{}", cells.join(",")).unwrap();
    }
    out
}
