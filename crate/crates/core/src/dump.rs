//! Plain CSV formats for node fields and trajectories.
//!
//! Numbers are written with 17 significant digits (`{:.16e}`), so a
//! written file reads back bit-exactly and repeated runs are byte-identical.
//!
//! Field dump header: `i,j,k,x,y,z,<components>`, one row per node in
//! storage order (`k` fastest). Tensor components are row-major
//! (`_xx,_xy,_xz,_yx,...`).
//!
//! Trajectory header: `t,point_id,A_xx..A_zz,D_xx..D_zz,vol_ratio,power_residual`.

use std::io::{BufRead, Write};

use thiserror::Error;

use crate::error::KinError;
use crate::grid::{Field, FieldValue, Grid3};
use crate::shape::{deformedness, volume_ratio, PowerResidual, Trajectory};

#[derive(Debug, Error)]
pub enum DumpError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Kin(#[from] KinError),
}

pub const AXES: [&str; 3] = ["x", "y", "z"];

/// `prefix_xx, prefix_xy, ..., prefix_zz`.
pub fn tensor_columns(prefix: &str) -> Vec<String> {
    let mut v = Vec::with_capacity(9);
    for a in AXES {
        for b in AXES {
            v.push(format!("{prefix}_{a}{b}"));
        }
    }
    v
}

/// `prefix_x, prefix_y, prefix_z`.
pub fn vector_columns(prefix: &str) -> Vec<String> {
    AXES.iter().map(|a| format!("{prefix}_{a}")).collect()
}

/// 17 significant digits in scientific notation.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn check_names<T: FieldValue>(names: &[String]) -> Result<(), DumpError> {
    if names.len() != T::NCOMP {
        return Err(DumpError::Parse {
            line: 0,
            msg: format!("{} column names for {} components", names.len(), T::NCOMP),
        });
    }
    Ok(())
}

pub fn write_field<T: FieldValue, W: Write>(
    mut w: W,
    field: &Field<T>,
    names: &[String],
) -> Result<(), DumpError> {
    check_names::<T>(names)?;
    writeln!(w, "i,j,k,x,y,z,{}", names.join(","))?;
    let g = field.grid();
    let mut comps = Vec::with_capacity(T::NCOMP);
    let mut line = String::new();
    for n in 0..g.len() {
        let [i, j, k] = g.ijk(n);
        let p = g.position(n);
        comps.clear();
        field.at(n).push_components(&mut comps);
        line.clear();
        line.push_str(&format!(
            "{i},{j},{k},{},{},{}",
            fmt_num(p.x),
            fmt_num(p.y),
            fmt_num(p.z)
        ));
        for c in &comps {
            line.push(',');
            line.push_str(&fmt_num(*c));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// Reads a field dump written for `grid`. Every node must appear exactly
/// once and its coordinates must match the grid to 1e-9 of the spacing.
pub fn read_field<T: FieldValue, R: BufRead>(
    r: R,
    grid: &Grid3,
    names: &[String],
) -> Result<Field<T>, DumpError> {
    check_names::<T>(names)?;
    let mut lines = r.lines();
    let header = lines.next().ok_or(DumpError::Parse {
        line: 1,
        msg: "empty file".into(),
    })??;
    let expect = format!("i,j,k,x,y,z,{}", names.join(","));
    if header.trim() != expect {
        return Err(DumpError::Parse {
            line: 1,
            msg: format!("header `{}`, expected `{expect}`", header.trim()),
        });
    }
    let mut vals: Vec<Option<T>> = vec![None; grid.len()];
    let tol = 1e-9 * grid.spacing.iter().copied().fold(f64::INFINITY, f64::min);
    for (ln, row) in lines.enumerate() {
        let line = ln + 2;
        let row = row?;
        if row.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = row.split(',').map(str::trim).collect();
        if cells.len() != 6 + T::NCOMP {
            return Err(DumpError::Parse {
                line,
                msg: format!("{} cells, expected {}", cells.len(), 6 + T::NCOMP),
            });
        }
        let idx = |c: &str| {
            c.parse::<usize>().map_err(|e| DumpError::Parse {
                line,
                msg: format!("index `{c}`: {e}"),
            })
        };
        let (i, j, k) = (idx(cells[0])?, idx(cells[1])?, idx(cells[2])?);
        if i >= grid.counts[0] || j >= grid.counts[1] || k >= grid.counts[2] {
            return Err(DumpError::Parse {
                line,
                msg: format!("node ({i},{j},{k}) outside grid"),
            });
        }
        let nums = cells[3..]
            .iter()
            .map(|c| {
                c.parse::<f64>().map_err(|e| DumpError::Parse {
                    line,
                    msg: format!("number `{c}`: {e}"),
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        let n = grid.node(i, j, k);
        let p = grid.position(n);
        if (0..3).any(|a| (p[a] - nums[a]).abs() > tol) {
            return Err(DumpError::Parse {
                line,
                msg: format!("coordinates do not match grid node ({i},{j},{k})"),
            });
        }
        if vals[n].is_some() {
            return Err(DumpError::Parse {
                line,
                msg: format!("node ({i},{j},{k}) repeated"),
            });
        }
        vals[n] = Some(T::from_components(&nums[3..]));
    }
    if let Some(n) = vals.iter().position(Option::is_none) {
        return Err(DumpError::Parse {
            line: 0,
            msg: format!("node {:?} missing", grid.ijk(n)),
        });
    }
    Ok(Field::new(
        grid.clone(),
        vals.into_iter().map(Option::unwrap).collect(),
    )?)
}

/// Trajectory header line (without newline).
pub fn trajectory_header() -> String {
    let mut cols = vec!["t".to_string(), "point_id".to_string()];
    cols.extend(tensor_columns("A"));
    cols.extend(tensor_columns("D"));
    cols.push("vol_ratio".into());
    cols.push("power_residual".into());
    cols.join(",")
}

/// Writes a shape trajectory ordered by time, then point. `power` supplies
/// the `power_residual` column; it is left empty when absent.
pub fn write_trajectory<W: Write>(
    mut w: W,
    traj: &Trajectory,
    power: Option<&PowerResidual>,
) -> Result<(), DumpError> {
    writeln!(w, "{}", trajectory_header())?;
    let mut comps = Vec::with_capacity(9);
    for (k, t) in traj.times.iter().enumerate() {
        for (p, tr) in traj.points.iter().enumerate() {
            let a = &tr.a[k];
            let d = deformedness(a, &traj.h)
                .map_err(|e| e.context(format!("point {p}, sample {k}")))?;
            let mut line = format!("{},{p}", fmt_num(*t));
            for m in [a.matrix(), d.matrix()] {
                comps.clear();
                m.push_components(&mut comps);
                for c in &comps {
                    line.push(',');
                    line.push_str(&fmt_num(*c));
                }
            }
            line.push(',');
            line.push_str(&fmt_num(volume_ratio(a)?));
            line.push(',');
            if let Some(pr) = power {
                line.push_str(&fmt_num(pr.residual[p][k]));
            }
            writeln!(w, "{line}")?;
        }
    }
    Ok(())
}
