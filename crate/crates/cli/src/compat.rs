use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;

use serde::Serialize;

use shapekin::compat::{
    compat_convergence, compat_residual_from_shape, shape_field_from_polynomial, ConvergenceRow,
};
use shapekin::dump::{read_field, tensor_columns, write_field};
use shapekin::grid::SECOND_ORDER_MARGIN;
use shapekin::tensor::Metric3;
use shapekin::{Field, Grid3, Ten3, TensorField};

use crate::config::{check_grid, metric, resolve, CompatConfig, Loaded, ShapeField};
use crate::error::{input, output, CliError};
use crate::output::{Header, OutDir};

pub fn build_shape(
    src: &ShapeField,
    grid: &Grid3,
    h: &Metric3,
    dir: &Path,
    at: &str,
) -> Result<TensorField, CliError> {
    match src {
        ShapeField::FromPotential { potential } => {
            Ok(shape_field_from_polynomial(potential, grid, h)?)
        }
        ShapeField::Polynomial { components } => Ok(Field::from_fn(grid, |p| components.eval(p))?),
        ShapeField::File { path } => {
            let full = resolve(dir, path, &format!("{at}.path"))?;
            let f = File::open(&full)
                .map_err(|e| CliError::Config(format!("{}: {e}", full.display())))?;
            read_field::<Ten3, _>(BufReader::new(f), grid, &tensor_columns("A"))
                .map_err(input(&full.display().to_string()))
        }
    }
}

/// The grid and its `levels` successive halvings.
pub fn refinements(grid: &Grid3, levels: usize, at: &str) -> Result<Vec<Grid3>, CliError> {
    let mut out = vec![grid.clone()];
    for l in 1..=levels {
        out.push(grid.refine(1 << l).map_err(CliError::setup(at))?);
    }
    Ok(out)
}

pub fn check_refinable(src: &ShapeField, at: &str) -> Result<(), CliError> {
    if matches!(src, ShapeField::File { .. }) {
        return Err(CliError::Config(format!(
            "{at}: a field read from a file cannot be refined"
        )));
    }
    Ok(())
}

pub fn convergence_table(out: &mut OutDir, rows: &[ConvergenceRow]) -> Result<(), CliError> {
    let cells: Vec<Vec<Option<f64>>> = rows
        .iter()
        .enumerate()
        .map(|(l, r)| {
            vec![
                Some(l as f64),
                Some(r.spacing),
                Some(r.ricci_rms),
                Some(r.saint_venant_rms),
                r.order,
            ]
        })
        .collect();
    out.table(
        "convergence.csv",
        &["level", "spacing", "ricci_rms", "saint_venant_rms", "order"],
        &cells,
    )
}

#[derive(Debug, Serialize)]
pub struct Compatibility {
    pub status: &'static str,
    pub relative_ricci_rms: f64,
    pub tolerance: f64,
}

#[derive(Debug, Serialize)]
struct CompatSummary {
    #[serde(flatten)]
    header: Header,
    nodes: usize,
    spacing: [f64; 3],
    ricci_rms: f64,
    saint_venant_rms: f64,
    field_scale: f64,
    compatibility: Compatibility,
    convergence: Option<Vec<ConvergenceRow>>,
}

pub fn run(loaded: &Loaded, header: Header, out: &mut OutDir) -> Result<(), CliError> {
    let cfg: &CompatConfig = loaded
        .config
        .compat
        .as_ref()
        .ok_or_else(|| CliError::Config("config has no `compat` section".into()))?;
    check_grid(&cfg.grid, "compat.grid")?;
    let h = metric(&cfg.metric, "compat.metric")?;
    let grids = if cfg.refinement_levels > 0 {
        check_refinable(&cfg.shape, "compat.shape")?;
        refinements(&cfg.grid, cfg.refinement_levels, "compat.refinement_levels")?
    } else {
        vec![cfg.grid.clone()]
    };
    let a = build_shape(&cfg.shape, &cfg.grid, &h, &loaded.dir, "compat.shape")?;
    let report = compat_residual_from_shape(&a, &h)?;
    let scale = a.rms_interior(SECOND_ORDER_MARGIN);
    let rel = report.ricci_rms / scale;
    let tol = loaded.config.tolerances.compatibility;

    let mut w = out.file("ricci_field.csv")?;
    write_field(&mut w, &report.ricci_field, &tensor_columns("R")).map_err(output)?;
    w.flush()?;

    let convergence = if grids.len() > 1 {
        let rows = compat_convergence(&grids, &h, |g| {
            build_shape(&cfg.shape, g, &h, &loaded.dir, "compat.shape")
                .map_err(|e| shapekin::KinError::Domain(e.to_string()))
        })?;
        convergence_table(out, &rows)?;
        Some(rows)
    } else {
        None
    };
    out.summary(&CompatSummary {
        header,
        nodes: cfg.grid.len(),
        spacing: cfg.grid.spacing,
        ricci_rms: report.ricci_rms,
        saint_venant_rms: report.saint_venant_rms,
        field_scale: scale,
        compatibility: Compatibility {
            status: if rel < tol {
                "compatible"
            } else {
                "incompatible"
            },
            relative_ricci_rms: rel,
            tolerance: tol,
        },
        convergence,
    })
}
