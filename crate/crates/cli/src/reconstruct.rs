use std::fs::File;
use std::io::{BufReader, Write};

use serde::Serialize;

use shapekin::compat::{cesaro_volterra, reconstruction_error};
use shapekin::dump::{read_field, tensor_columns, vector_columns, write_field};
use shapekin::grid::{saint_venant_rms, SECOND_ORDER_MARGIN};
use shapekin::poly::TensorPoly;
use shapekin::tensor::ten3;
use shapekin::{Field, KinError, Ten3, TensorField, Vec3};

use crate::config::{check_grid, resolve, Loaded, ReconstructConfig, StrainSource};
use crate::error::{input, output, CliError};
use crate::output::{Check, Header, OutDir};

fn strain(cfg: &ReconstructConfig, loaded: &Loaded) -> Result<TensorField, CliError> {
    let grid = &cfg.grid;
    let sym = |m: &Ten3| (m - m.transpose()).norm() <= 1e-12 * m.norm().max(1.0);
    let e = match &cfg.strain {
        StrainSource::File { path } => {
            let full = resolve(&loaded.dir, path, "reconstruct.strain.path")?;
            let f = File::open(&full)
                .map_err(|e| CliError::Config(format!("{}: {e}", full.display())))?;
            read_field::<Ten3, _>(BufReader::new(f), grid, &tensor_columns("E"))
                .map_err(input(&full.display().to_string()))?
        }
        StrainSource::Constant { tensor } => Field::from_fn(grid, |_| ten3(*tensor))
            .map_err(CliError::setup("reconstruct.strain"))?,
        StrainSource::Polynomial { components } => Field::from_fn(grid, |p| components.eval(p))
            .map_err(CliError::setup("reconstruct.strain"))?,
        StrainSource::FromDisplacement { displacement } => {
            let e = TensorPoly::sym_gradient_of(displacement);
            Field::from_fn(grid, |p| e.eval(p)).map_err(CliError::setup("reconstruct.strain"))?
        }
    };
    if let Some(n) = e.values().iter().position(|m| !sym(m)) {
        return Err(CliError::Config(format!(
            "reconstruct.strain: not symmetric at node {:?}",
            grid.ijk(n)
        )));
    }
    Ok(e)
}

#[derive(Debug, Serialize)]
struct ReconstructSummary {
    #[serde(flatten)]
    header: Header,
    nodes: usize,
    base_point: [f64; 3],
    saint_venant_rms: f64,
    strain_rms: f64,
    reconstruction: Check,
    /// Largest `‖(u − w)⊗∇ˢ‖` when `E` came from a displacement `w`: zero
    /// up to round-off when `u` and `w` differ by a rigid field.
    rigid_difference: Option<f64>,
}

pub fn run(loaded: &Loaded, header: Header, out: &mut OutDir) -> Result<(), CliError> {
    let cfg = loaded
        .config
        .reconstruct
        .as_ref()
        .ok_or_else(|| CliError::Config("config has no `reconstruct` section".into()))?;
    check_grid(&cfg.grid, "reconstruct.grid")?;
    let grid = &cfg.grid;
    let om = ten3(cfg.omega_arb);
    if (om + om.transpose()).norm() > 1e-12 * om.norm().max(1.0) {
        return Err(CliError::Config(
            "reconstruct.omega_arb must be antisymmetric".into(),
        ));
    }
    let base = cfg
        .base_point
        .map(Vec3::from)
        .unwrap_or_else(|| grid.position(0));
    let e = strain(cfg, loaded)?;
    let u = cesaro_volterra(
        &e,
        &base,
        &cfg.path,
        &Vec3::from(cfg.u_arb),
        &om,
        cfg.options,
    )
    .map_err(|err| match err {
        KinError::IncompatibleField(_) => CliError::from(err),
        KinError::Grid(_) | KinError::Domain(_) | KinError::Symmetry(_) => {
            CliError::Config(format!("reconstruct: {err}"))
        }
        other => other.into(),
    })?;
    let err = reconstruction_error(&u, &e)?;
    let rigid = match &cfg.strain {
        StrainSource::FromDisplacement { displacement } => {
            let d = Field::from_fn(grid, |p| displacement.eval(p))?;
            let diff = Field::new(
                grid.clone(),
                u.values()
                    .iter()
                    .zip(d.values())
                    .map(|(a, b)| a - b)
                    .collect(),
            )?;
            let zero = Field::from_fn(grid, |_| Ten3::zeros())?;
            Some(reconstruction_error(&diff, &zero)?)
        }
        _ => None,
    };

    let mut w = out.file("displacement.csv")?;
    write_field(&mut w, &u, &vector_columns("u")).map_err(output)?;
    w.flush()?;

    out.summary(&ReconstructSummary {
        header,
        nodes: grid.len(),
        base_point: base.into(),
        saint_venant_rms: saint_venant_rms(&e)?,
        strain_rms: e.rms_interior(SECOND_ORDER_MARGIN),
        reconstruction: Check::below(err, loaded.config.tolerances.reconstruction),
        rigid_difference: rigid,
    })
}
