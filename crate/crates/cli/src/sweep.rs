use serde::Serialize;

use shapekin::compat::{compat_convergence, ConvergenceRow};
use shapekin::grid::SECOND_ORDER_MARGIN;
use shapekin::shape::{StrainMeasure, Trajectory};

use crate::compat::{build_shape, check_refinable, convergence_table, refinements, Compatibility};
use crate::config::{check_grid, metric, Loaded, SweepConfig};
use crate::error::CliError;
use crate::evolve::{power, prepare, run_trajectory};
use crate::output::{Header, OutDir};

#[derive(Debug, Serialize)]
struct RefinementSummary {
    #[serde(flatten)]
    header: Header,
    kind: &'static str,
    rows: Vec<ConvergenceRow>,
    monotone: bool,
    min_order: Option<f64>,
    field_scale: f64,
    compatibility: Compatibility,
}

#[derive(Debug, Clone, Serialize)]
struct StepRow {
    dt: f64,
    power_max_relative: Option<f64>,
    power_order: Option<f64>,
    final_shape_change: Option<f64>,
}

#[derive(Debug, Serialize)]
struct TimeStepSummary {
    #[serde(flatten)]
    header: Header,
    kind: &'static str,
    power_measure: StrainMeasure,
    rows: Vec<StepRow>,
}

fn final_change(a: &Trajectory, b: &Trajectory) -> f64 {
    a.points
        .iter()
        .zip(&b.points)
        .map(|(p, q)| {
            let (x, y) = (p.a.last().unwrap().matrix(), q.a.last().unwrap().matrix());
            (x - y).norm() / y.norm()
        })
        .fold(0.0, f64::max)
}

pub fn run(loaded: &Loaded, header: Header, out: &mut OutDir) -> Result<(), CliError> {
    let cfg = loaded
        .config
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("config has no `sweep` section".into()))?;
    match cfg {
        SweepConfig::Refinement {
            grid,
            metric: m,
            shape,
            levels,
        } => {
            check_grid(grid, "sweep.grid")?;
            check_refinable(shape, "sweep.shape")?;
            if *levels == 0 {
                return Err(CliError::Config("sweep.levels must be at least 1".into()));
            }
            let h = metric(m, "sweep.metric")?;
            let grids = refinements(grid, *levels, "sweep.levels")?;
            let scale = std::cell::Cell::new(0.0);
            let rows = compat_convergence(&grids, &h, |g| {
                let a = build_shape(shape, g, &h, &loaded.dir, "sweep.shape")
                    .map_err(|e| shapekin::KinError::Domain(e.to_string()))?;
                scale.set(a.rms_interior(SECOND_ORDER_MARGIN));
                Ok(a)
            })?;
            convergence_table(out, &rows)?;
            let monotone = rows.windows(2).all(|w| w[1].ricci_rms < w[0].ricci_rms);
            let min_order = rows.iter().filter_map(|r| r.order).reduce(f64::min);
            let scale = scale.get();
            let rel = rows.last().unwrap().ricci_rms / scale;
            let tol = loaded.config.tolerances.compatibility;
            out.summary(&RefinementSummary {
                header,
                kind: "refinement",
                monotone,
                min_order,
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
                rows,
            })
        }
        SweepConfig::TimeStep { evolve, dts } => {
            if dts.is_empty() || dts.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
                return Err(CliError::Config("sweep.dts must be positive steps".into()));
            }
            let mut base = (**evolve).clone();
            base.step_check = false;
            let mut rows: Vec<StepRow> = Vec::new();
            let mut prev: Option<Trajectory> = None;
            for (i, &dt) in dts.iter().enumerate() {
                base.time.dt = dt;
                let p = prepare(&base, header.seed, &format!("sweep.evolve (dt = {dt})"))?;
                let traj = run_trajectory(&base, &p, dt)?;
                let pw = power(&traj, &base, base.power_measure)?.map(|r| r.max_relative);
                let order = match (rows.last(), pw) {
                    (Some(r), Some(now)) => r
                        .power_max_relative
                        .map(|before| (before / now).ln() / (dts[i - 1] / dt).ln()),
                    _ => None,
                };
                let change = prev.as_ref().map(|q| final_change(&traj, q));
                rows.push(StepRow {
                    dt,
                    power_max_relative: pw,
                    power_order: order,
                    final_shape_change: change,
                });
                prev = Some(traj);
            }
            let cells: Vec<Vec<Option<f64>>> = rows
                .iter()
                .map(|r| {
                    vec![
                        Some(r.dt),
                        r.power_max_relative,
                        r.power_order,
                        r.final_shape_change,
                    ]
                })
                .collect();
            out.table(
                "convergence.csv",
                &[
                    "dt",
                    "power_max_relative",
                    "power_order",
                    "final_shape_change",
                ],
                &cells,
            )?;
            out.summary(&TimeStepSummary {
                header,
                kind: "time_step",
                power_measure: base.power_measure,
                rows,
            })
        }
    }
}
