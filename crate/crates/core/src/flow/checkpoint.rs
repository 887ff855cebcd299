//! Plain-text checkpoints. Floats are written in Rust's shortest
//! round-trip form, so a reload reproduces the state bit for bit.

use std::io::{BufRead, Write};

use super::{FlowState, Grid};
use crate::error::{Error, Result};
use crate::manifold::ManifoldModel;

pub const CHECKPOINT_HEADER: &str = "GRAPHFLOW v1";

/// Grid, model, time and field values read back from a checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub grid: Grid,
    pub model: ManifoldModel,
    pub t: f64,
    pub f: Vec<f64>,
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn write_checkpoint(state: &FlowState, mut w: impl Write) -> Result<()> {
    let g = &state.grid;
    writeln!(w, "{CHECKPOINT_HEADER}")?;
    writeln!(w, "model {}", state.model)?;
    writeln!(w, "chart_margin {}", state.model.chart_margin)?;
    writeln!(w, "t {}", state.t)?;
    writeln!(w, "lo {}", join(&g.lo))?;
    writeln!(w, "hi {}", join(&g.hi))?;
    writeln!(w, "points {}", join(&g.points))?;
    writeln!(
        w,
        "periodic {}",
        join(&g.periodic.iter().map(|&p| p as u8).collect::<Vec<_>>())
    )?;
    writeln!(w, "data {}", state.len())?;
    for p in 0..state.len() {
        writeln!(w, "{}", join(state.value(p)))?;
    }
    Ok(())
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Config(format!("checkpoint: {}", msg.into()))
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split_whitespace()
        .map(|x| {
            x.parse::<T>()
                .map_err(|_| bad(format!("bad {what} value `{x}`")))
        })
        .collect()
}

pub fn read_checkpoint(r: impl BufRead) -> Result<Checkpoint> {
    let mut lines = r.lines();
    let mut next = |key: &str| -> Result<String> {
        let line = lines
            .next()
            .ok_or_else(|| bad(format!("missing `{key}`")))??;
        if key.is_empty() {
            return Ok(line);
        }
        line.strip_prefix(key)
            .and_then(|rest| rest.strip_prefix(' '))
            .map(str::to_owned)
            .ok_or_else(|| bad(format!("expected `{key}`, found `{line}`")))
    };
    let header = next("")?;
    if header.trim() != CHECKPOINT_HEADER {
        return Err(bad(format!("unsupported header `{header}`")));
    }
    let model: ManifoldModel = next("model")?.parse()?;
    let margin: f64 = next("chart_margin")?
        .trim()
        .parse()
        .map_err(|_| bad("bad chart_margin"))?;
    let model = model.with_margin(margin);
    let t: f64 = next("t")?.trim().parse().map_err(|_| bad("bad t"))?;
    let lo = parse_list(&next("lo")?, "lo")?;
    let hi = parse_list(&next("hi")?, "hi")?;
    let points = parse_list(&next("points")?, "points")?;
    let periodic: Vec<u8> = parse_list(&next("periodic")?, "periodic")?;
    let grid = Grid::new(
        lo,
        hi,
        points,
        periodic.into_iter().map(|p| p != 0).collect(),
    )?;
    let count: usize = next("data")?
        .trim()
        .parse()
        .map_err(|_| bad("bad data count"))?;
    if count != grid.len() {
        return Err(bad(format!(
            "data count {count} does not match grid size {}",
            grid.len()
        )));
    }
    let n = model.dim();
    let mut f = Vec::with_capacity(count * n);
    for p in 0..count {
        let row: Vec<f64> = parse_list(&next("")?, "data")?;
        if row.len() != n {
            return Err(bad(format!(
                "row {p} has {} values, expected {n}",
                row.len()
            )));
        }
        f.extend(row);
    }
    Ok(Checkpoint { grid, model, t, f })
}
