//! Snapshot persistence: one CSV per snapshot (`t,x[,y],u[,v]`, one row per node)
//! and an index listing file names and times.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::grid::{CoupledState, Grid, RangeTag, StateField};
use crate::solver::{Snapshot, State};

pub const INDEX_FILE: &str = "index.csv";

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

/// CSV text of one snapshot, values with 17 significant digits.
pub fn snapshot_csv(t: f64, state: &State) -> String {
    let grid = state.grid();
    let mut out = String::new();
    out.push_str("t,x");
    if grid.dim() == 2 {
        out.push_str(",y");
    }
    out.push_str(",u");
    if state.is_coupled() {
        out.push_str(",v");
    }
    out.push('\n');
    let u = state.u().values();
    let v = state.v().map(|v| v.values());
    for k in 0..grid.len() {
        let x = grid.coords(k);
        let _ = write!(out, "{t:.16e},{:.16e}", x[0]);
        if grid.dim() == 2 {
            let _ = write!(out, ",{:.16e}", x[1]);
        }
        let _ = write!(out, ",{:.16e}", u[k]);
        if let Some(v) = v {
            let _ = write!(out, ",{:.16e}", v[k]);
        }
        out.push('\n');
    }
    out
}

/// Parses a snapshot written by [`snapshot_csv`] back onto `grid`.
pub fn parse_snapshot(text: &str, grid: &Grid, range: RangeTag) -> Result<Snapshot> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| Error::Io("empty snapshot file".into()))?
        .split(',')
        .collect();
    let col = |name: &str| header.iter().position(|h| h.trim() == name);
    let (tc, uc) = match (col("t"), col("u")) {
        (Some(t), Some(u)) => (t, u),
        _ => return Err(Error::Io("snapshot header lacks t or u".into())),
    };
    let vc = col("v");
    let mut t = None;
    let mut u = Vec::with_capacity(grid.len());
    let mut v = Vec::new();
    for (row, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Io(format!("row {}: {e}", row + 2)))?;
        if fields.len() != header.len() {
            return Err(Error::Io(format!("row {} has {} fields", row + 2, fields.len())));
        }
        t.get_or_insert(fields[tc]);
        u.push(fields[uc]);
        if let Some(c) = vc {
            v.push(fields[c]);
        }
    }
    if u.len() != grid.len() {
        return Err(Error::Io(format!(
            "snapshot has {} rows, grid has {} nodes",
            u.len(),
            grid.len()
        )));
    }
    let u = StateField::new(*grid, u, range)?;
    let state = if vc.is_some() {
        State::Coupled(CoupledState::new(u, StateField::new(*grid, v, RangeTag::Unit)?)?)
    } else {
        State::Scalar(u)
    };
    Ok(Snapshot {
        t: t.unwrap_or(0.0),
        state,
    })
}

pub fn snapshot_file_name(index: usize) -> String {
    format!("snapshot_{index:05}.csv")
}

/// Writes every snapshot and the index into `dir`; returns the written paths.
pub fn write_snapshots(dir: &Path, snapshots: &[Snapshot]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut index = String::from("file,t\n");
    let mut paths = Vec::with_capacity(snapshots.len() + 1);
    for (i, s) in snapshots.iter().enumerate() {
        let name = snapshot_file_name(i);
        let path = dir.join(&name);
        fs::write(&path, snapshot_csv(s.t, &s.state)).map_err(|e| io_err(&path, e))?;
        let _ = writeln!(index, "{name},{:.16e}", s.t);
        paths.push(path);
    }
    let path = dir.join(INDEX_FILE);
    fs::write(&path, index).map_err(|e| io_err(&path, e))?;
    paths.push(path);
    Ok(paths)
}

/// Reads the snapshots listed in `dir/index.csv`.
pub fn read_snapshots(dir: &Path, grid: &Grid, range: RangeTag) -> Result<Vec<Snapshot>> {
    let path = dir.join(INDEX_FILE);
    let index = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
    let mut out = Vec::new();
    for line in index.lines().skip(1).filter(|l| !l.trim().is_empty()) {
        let name = line.split(',').next().unwrap_or_default();
        let p = dir.join(name);
        let text = fs::read_to_string(&p).map_err(|e| io_err(&p, e))?;
        out.push(parse_snapshot(&text, grid, range)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::build_grid;

    #[test]
    fn csv_round_trip_is_exact() {
        let g = build_grid(2, &[1.0, 2.0], &[3, 4]).unwrap();
        let u = StateField::from_fn(g, RangeTag::NonNegative, |x| 0.1 * x[0] + 0.01 * x[1] / 3.0).unwrap();
        let v = StateField::from_fn(g, RangeTag::Unit, |x| x[0] / 7.0).unwrap();
        let state = State::Coupled(CoupledState::new(u, v).unwrap());
        let text = snapshot_csv(0.125, &state);
        assert!(text.starts_with("t,x,y,u,v\n"));
        let back = parse_snapshot(&text, &g, RangeTag::NonNegative).unwrap();
        assert_eq!(back.t, 0.125);
        assert_eq!(back.state, state);
    }
}
