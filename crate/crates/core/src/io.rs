//! CSV files for paths (`t,value`) and solutions (`t,X,Kplus,Kminus`).
//!
//! Numbers are written with 17 significant digits so a write/read cycle is lossless.

use std::io::{Read, Write};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::path::{GridPath, TimeGrid};
use crate::spr::SprSolution;

pub const PATH_HEADER: [&str; 2] = ["t", "value"];
pub const SOLUTION_HEADER: [&str; 4] = ["t", "X", "Kplus", "Kminus"];

/// Relative tolerance when matching file times against an existing grid.
const TIME_MATCH_TOL: f64 = 1e-12;

pub fn format_number(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_err(e: impl std::fmt::Display) -> Error {
    Error::Csv(e.to_string())
}

/// Reads columns of finite numbers under the exact `header`.
pub fn read_columns<R: Read>(reader: R, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let found: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(str::to_owned).collect();
    if found != header {
        return Err(Error::Csv(format!("expected header {}, found {}", header.join(","), found.join(","))));
    }
    let mut columns = vec![Vec::new(); header.len()];
    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(csv_err)?;
        for (col, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::Csv(format!("row {}: cannot parse {field:?}", row + 1)))?;
            if !v.is_finite() {
                return Err(Error::Csv(format!("row {}: non-finite value {field}", row + 1)));
            }
            columns[col].push(v);
        }
    }
    Ok(columns)
}

fn attach_grid(times: &[f64], grid: Option<&Arc<TimeGrid>>) -> Result<Arc<TimeGrid>> {
    if let Some(index) = times.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::Csv(format!("times not strictly increasing at row {}", index + 2)));
    }
    match grid {
        None => Ok(Arc::new(TimeGrid::new(times.to_vec())?)),
        Some(grid) => {
            if times.len() != grid.len() {
                return Err(Error::LengthMismatch { expected: grid.len(), got: times.len() });
            }
            let scale = grid.horizon().abs().max(1.0);
            if times.iter().zip(grid.points()).any(|(a, b)| (a - b).abs() > TIME_MATCH_TOL * scale) {
                return Err(Error::GridMismatch);
            }
            Ok(grid.clone())
        }
    }
}

/// Reads a `t,value` path. With `grid`, the file times must be those grid points.
pub fn read_path_csv<R: Read>(reader: R, grid: Option<&Arc<TimeGrid>>) -> Result<GridPath> {
    let cols = read_columns(reader, &PATH_HEADER)?;
    let grid = attach_grid(&cols[0], grid)?;
    GridPath::new(grid, cols[1].clone())
}

pub fn write_path_csv<W: Write>(writer: W, path: &GridPath) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(PATH_HEADER).map_err(csv_err)?;
    for (t, v) in path.grid().points().iter().zip(path.values()) {
        w.write_record([format_number(*t), format_number(*v)]).map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)
}

/// Raw solution columns `(X, K⁺, K⁻)` on `grid`; compensator invariants are not checked.
pub fn read_solution_csv<R: Read>(reader: R, grid: &Arc<TimeGrid>) -> Result<(GridPath, GridPath, GridPath)> {
    let cols = read_columns(reader, &SOLUTION_HEADER)?;
    let grid = attach_grid(&cols[0], Some(grid))?;
    Ok((
        GridPath::new(grid.clone(), cols[1].clone())?,
        GridPath::new(grid.clone(), cols[2].clone())?,
        GridPath::new(grid, cols[3].clone())?,
    ))
}

pub fn write_solution_csv<W: Write>(writer: W, sol: &SprSolution) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(SOLUTION_HEADER).map_err(csv_err)?;
    let (x, kp, km) = (sol.x().values(), sol.k_plus().values(), sol.k_minus().values());
    for (k, t) in sol.x().grid().points().iter().enumerate() {
        w.write_record([format_number(*t), format_number(x[k]), format_number(kp[k]), format_number(km[k])])
            .map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)
}
