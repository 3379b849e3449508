//! CSV serialization of fields.
//!
//! The first line is a `#`-prefixed JSON header with the grid metadata, then
//! a CSV table with columns `t,x[,y],value`, one row per node and time (axis 0
//! fastest). Numbers are written with 17 significant digits.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::characteristics::CharacteristicBundle;
use crate::error::{Error, Result};
use crate::grid::{Field, Grid, SpaceTimeField};

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    grid: Grid,
    times: usize,
}

/// Formats with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_field_csv<W: Write>(field: &SpaceTimeField, writer: W) -> Result<()> {
    let mut writer = writer;
    let header = Header { grid: field.grid().clone(), times: field.times().len() };
    writeln!(writer, "# {}", serde_json::to_string(&header)?)?;
    let grid = field.grid();
    let mut csv = csv::Writer::from_writer(writer);
    if grid.dim() == 1 {
        csv.write_record(["t", "x", "value"])?;
    } else {
        csv.write_record(["t", "x", "y", "value"])?;
    }
    for (t, slice) in field.times().iter().zip(field.slices()) {
        for (idx, v) in slice.values().iter().enumerate() {
            let x = grid.node(idx);
            if grid.dim() == 1 {
                csv.write_record([fmt_f64(*t), fmt_f64(x[0]), fmt_f64(*v)])?;
            } else {
                csv.write_record([fmt_f64(*t), fmt_f64(x[0]), fmt_f64(x[1]), fmt_f64(*v)])?;
            }
        }
    }
    csv.flush()?;
    Ok(())
}

pub fn read_field_csv<R: BufRead>(mut reader: R) -> Result<SpaceTimeField> {
    let mut first = String::new();
    reader.read_line(&mut first)?;
    let json = first
        .trim()
        .strip_prefix('#')
        .ok_or_else(|| Error::Parse("missing '# {json}' header line".into()))?;
    let header: Header = serde_json::from_str(json.trim())?;
    let grid = Grid::new(header.grid.dim(), header.grid.lengths(), header.grid.points())?;
    let nodes = grid.node_count();
    let value_col = grid.dim() + 1;

    let mut csv = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let mut times = Vec::with_capacity(header.times);
    let mut slices = Vec::with_capacity(header.times);
    let mut current = Vec::with_capacity(nodes);
    for (row, record) in csv.records().enumerate() {
        let record = record?;
        let num = |c: usize| -> Result<f64> {
            record
                .get(c)
                .ok_or_else(|| Error::Parse(format!("row {row}: missing column {c}")))?
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("row {row}: bad number in column {c}")))
        };
        if current.is_empty() {
            times.push(num(0)?);
        }
        current.push(num(value_col)?);
        if current.len() == nodes {
            slices.push(Field::from_values(grid.clone(), std::mem::take(&mut current))?);
        }
    }
    if !current.is_empty() || slices.len() != header.times {
        return Err(Error::Parse(format!(
            "expected {} slices of {nodes} rows, found {} full slices",
            header.times,
            slices.len()
        )));
    }
    SpaceTimeField::new(grid, times, slices)
}

/// Bundle table with columns `t,seed,x[,y],grad_x[,grad_y]`, one row per
/// time and seed.
pub fn write_bundle_csv<W: Write>(bundle: &CharacteristicBundle, writer: W) -> Result<()> {
    let dim = bundle.grid.dim();
    let mut csv = csv::Writer::from_writer(writer);
    let header: &[&str] = if dim == 1 { &["t", "seed", "x", "grad_x"] } else { &["t", "seed", "x", "y", "grad_x", "grad_y"] };
    csv.write_record(header)?;
    for (k, t) in bundle.times.iter().enumerate() {
        for (j, (x, p)) in bundle.paths[k].iter().zip(&bundle.grad_along[k]).enumerate() {
            let mut row = vec![fmt_f64(*t), j.to_string()];
            row.extend(x[..dim].iter().map(|v| fmt_f64(*v)));
            row.extend(p[..dim].iter().map(|v| fmt_f64(*v)));
            csv.write_record(&row)?;
        }
    }
    csv.flush()?;
    Ok(())
}
