//! CSV trajectory files: a one-line header followed by one row per timestep.
//!
//! Header `x,y,z` marks a Cartesian path; `j0,...,j{M-1}` marks a joint-space
//! trajectory with M joints. Values are decimal floats, no trailing commas.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::trajectory::{CartesianPath, JointTrajectory};

/// Payload of a trajectory file. Joint files carry no timing information, so
/// the raw matrix is returned and the caller attaches `dt`.
#[derive(Debug, Clone)]
pub enum TrajectoryFile {
    Joint(DMatrix<f64>),
    Cartesian(CartesianPath),
}

impl TrajectoryFile {
    /// Interprets a joint payload as a trajectory sampled at `dt`.
    pub fn into_joint(self, dt: f64) -> Result<JointTrajectory> {
        match self {
            TrajectoryFile::Joint(m) => JointTrajectory::new(m, dt),
            TrajectoryFile::Cartesian(_) => Err(Error::DimensionMismatch(
                "expected a joint-space file, found a cartesian one".into(),
            )),
        }
    }

    pub fn into_cartesian(self) -> Result<CartesianPath> {
        match self {
            TrajectoryFile::Cartesian(p) => Ok(p),
            TrajectoryFile::Joint(_) => Err(Error::DimensionMismatch(
                "expected a cartesian file, found a joint-space one".into(),
            )),
        }
    }
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Reads a trajectory file, dispatching on the header row.
pub fn read_trajectory(path: impl AsRef<Path>) -> Result<TrajectoryFile> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    parse_trajectory(&text, path)
}

fn parse_trajectory(text: &str, path: &Path) -> Result<TrajectoryFile> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_error(path, 1, "empty file"))?;

    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if header.ends_with(',') {
        return Err(parse_error(path, 1, "trailing comma in header"));
    }
    let is_cartesian = cols == ["x", "y", "z"];
    let is_joint = !cols.is_empty() && cols.iter().enumerate().all(|(i, c)| *c == format!("j{i}"));
    if !is_cartesian && !is_joint {
        return Err(parse_error(
            path,
            1,
            format!("unrecognized header {header:?}; expected \"x,y,z\" or \"j0,..,j{{M-1}}\""),
        ));
    }
    let ncols = cols.len();

    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        if line.ends_with(',') {
            return Err(parse_error(path, lineno, "trailing comma"));
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != ncols {
            return Err(parse_error(
                path,
                lineno,
                format!("expected {ncols} columns, found {}", cells.len()),
            ));
        }
        let mut row = Vec::with_capacity(ncols);
        for cell in cells {
            let v: f64 = cell
                .parse()
                .map_err(|_| parse_error(path, lineno, format!("non-numeric cell {cell:?}")))?;
            row.push(v);
        }
        rows.push(row);
    }

    let matrix = DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]);
    if is_cartesian {
        Ok(TrajectoryFile::Cartesian(CartesianPath::new(matrix)?))
    } else {
        Ok(TrajectoryFile::Joint(matrix))
    }
}

fn format_matrix(header: &str, m: &DMatrix<f64>) -> String {
    let mut out = String::with_capacity(16 * m.len() + header.len() + 2);
    out.push_str(header);
    out.push('\n');
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if j > 0 {
                out.push(',');
            }
            // shortest round-trip formatting keeps read(write(x)) exact
            out.push_str(&format!("{}", m[(i, j)]));
        }
        out.push('\n');
    }
    out
}

pub fn write_cartesian(path: impl AsRef<Path>, p: &CartesianPath) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_matrix("x,y,z", p.points())).map_err(|e| io_error(path, e))
}

pub fn write_joint_matrix(path: impl AsRef<Path>, m: &DMatrix<f64>) -> Result<()> {
    let path = path.as_ref();
    let header: Vec<String> = (0..m.ncols()).map(|j| format!("j{j}")).collect();
    fs::write(path, format_matrix(&header.join(","), m)).map_err(|e| io_error(path, e))
}

pub fn write_joint(path: impl AsRef<Path>, traj: &JointTrajectory) -> Result<()> {
    write_joint_matrix(path, traj.points())
}

/// Writes either payload kind back to disk.
pub fn write_trajectory(path: impl AsRef<Path>, file: &TrajectoryFile) -> Result<()> {
    match file {
        TrajectoryFile::Cartesian(p) => write_cartesian(path, p),
        TrajectoryFile::Joint(m) => write_joint_matrix(path, m),
    }
}
