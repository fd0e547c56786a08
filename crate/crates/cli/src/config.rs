//! Scenario configuration. One JSON file may carry sections for several
//! subcommands; each subcommand reads only its own section.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use shapekin::compat::{CvOptions, CvPath};
use shapekin::plastic::PlasticLaw;
use shapekin::poly::{TensorPoly, VectorPoly};
use shapekin::shape::{ElasticPotential, StrainMeasure};
use shapekin::tensor::{ten3, Metric3};
use shapekin::{Grid3, MotionSpec, Vec3};

use crate::error::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub description: String,
    /// Seed for randomized inputs; `--seed` overrides it.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub evolve: Option<EvolveConfig>,
    pub compat: Option<CompatConfig>,
    pub reconstruct: Option<ReconstructConfig>,
    pub sweep: Option<SweepConfig>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Bound on `‖A − J g̃⁻¹ Jᵀ h‖ / ‖A‖` for the elastic-identity check.
    pub elastic_identity: f64,
    /// Bound on the same quantity when `g̃` is co-evolved under a plastic law.
    pub co_evolution: f64,
    /// Bound on `‖(u⊗∇)ˢ − E‖` for a reconstruction to pass.
    pub reconstruction: f64,
    /// Ricci RMS relative to the field scale below which a shape field is
    /// reported compatible.
    pub compatibility: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            elastic_identity: 1e-8,
            co_evolution: 1e-7,
            reconstruction: 1e-8,
            compatibility: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeWindow {
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Points {
    List {
        labels: Vec<[f64; 3]>,
    },
    /// Every node of a grid, in storage order.
    Grid {
        grid: Grid3,
    },
    /// Uniform samples in the box `[lo, hi]` drawn from the scenario seed.
    Random {
        count: usize,
        lo: [f64; 3],
        hi: [f64; 3],
    },
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialShape {
    #[default]
    Identity,
    /// The same tensor at every point; must be h-symmetric positive definite.
    Explicit { tensor: [[f64; 3]; 3] },
    /// `A = G G⁺` with `G` the gradient of `potential` at its preimage of
    /// each point's position at `t0`.
    FromPotential { potential: VectorPoly },
}

fn default_record_every() -> usize {
    1
}

fn default_true() -> bool {
    true
}

fn no_plastic() -> PlasticLaw {
    PlasticLaw::None
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    pub motion: MotionSpec,
    /// Spatial metric `h`; identity when absent.
    #[serde(default)]
    pub metric: Option<[[f64; 3]; 3]>,
    pub points: Points,
    #[serde(default)]
    pub initial_shape: InitialShape,
    pub material: ElasticPotential,
    #[serde(default = "no_plastic")]
    pub plastic: PlasticLaw,
    pub time: TimeWindow,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default = "hencky")]
    pub power_measure: StrainMeasure,
    /// Rerun at `dt/2` and report the change of the final shapes.
    #[serde(default = "default_true")]
    pub step_check: bool,
}

fn hencky() -> StrainMeasure {
    StrainMeasure::Hencky
}

/// Source of a shape tensor field on a grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeField {
    /// Generated by a polynomial vector potential (compatible by construction).
    FromPotential { potential: VectorPoly },
    /// Component polynomials `A_ij(x)`.
    Polynomial { components: TensorPoly },
    /// A field dump with columns `A_xx..A_zz`.
    File { path: PathBuf },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompatConfig {
    pub grid: Grid3,
    #[serde(default)]
    pub metric: Option<[[f64; 3]; 3]>,
    pub shape: ShapeField,
    /// Number of successive halvings of the spacing for a refinement table.
    #[serde(default)]
    pub refinement_levels: usize,
}

/// Source of a small-strain field on a grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum StrainSource {
    /// A field dump with columns `E_xx..E_zz`.
    File {
        path: PathBuf,
    },
    Constant {
        tensor: [[f64; 3]; 3],
    },
    Polynomial {
        components: TensorPoly,
    },
    /// `E = (w⊗∇)ˢ` of a polynomial displacement `w`.
    FromDisplacement {
        displacement: VectorPoly,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReconstructConfig {
    pub grid: Grid3,
    pub strain: StrainSource,
    /// Base point of the path integral; must be a node. Defaults to node 0.
    #[serde(default)]
    pub base_point: Option<[f64; 3]>,
    #[serde(default)]
    pub path: CvPath,
    #[serde(default)]
    pub u_arb: [f64; 3],
    #[serde(default)]
    pub omega_arb: [[f64; 3]; 3],
    #[serde(default)]
    pub options: CvOptions,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SweepConfig {
    /// Compatibility residuals on the grid and `levels` halvings of it.
    Refinement {
        grid: Grid3,
        #[serde(default)]
        metric: Option<[[f64; 3]; 3]>,
        shape: ShapeField,
        levels: usize,
    },
    /// Power residual and final shape of an evolution at several steps.
    TimeStep {
        evolve: Box<EvolveConfig>,
        dts: Vec<f64>,
    },
}

/// Parsed configuration with the bookkeeping needed for summaries.
pub struct Loaded {
    pub config: ScenarioConfig,
    pub sha256: String,
    pub dir: PathBuf,
}

pub fn load(path: &Path) -> Result<Loaded, CliError> {
    let bytes =
        std::fs::read(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let config: ScenarioConfig = serde_json::from_slice(&bytes).map_err(|e| {
        let msg = e.to_string();
        let msg = msg
            .strip_suffix(&format!(" at line {} column {}", e.line(), e.column()))
            .unwrap_or(&msg);
        CliError::Config(format!(
            "{}:{}:{}: {msg}",
            path.display(),
            e.line(),
            e.column()
        ))
    })?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(Loaded {
        config,
        sha256: hex::encode(Sha256::digest(&bytes)),
        dir,
    })
}

pub fn metric(m: &Option<[[f64; 3]; 3]>, at: &str) -> Result<Metric3, CliError> {
    match m {
        None => Ok(Metric3::identity()),
        Some(rows) => Metric3::new(ten3(*rows)).map_err(|e| CliError::Config(format!("{at}: {e}"))),
    }
}

pub fn resolve(dir: &Path, p: &Path, at: &str) -> Result<PathBuf, CliError> {
    let full = if p.is_absolute() {
        p.to_path_buf()
    } else {
        dir.join(p)
    };
    if !full.is_file() {
        return Err(CliError::Config(format!(
            "{at}: file {} does not exist",
            full.display()
        )));
    }
    Ok(full)
}

pub fn check_window(w: &TimeWindow, at: &str) -> Result<(), CliError> {
    if !(w.dt > 0.0 && w.dt.is_finite()) {
        return Err(CliError::Config(format!(
            "{at}.dt = {} must be positive",
            w.dt
        )));
    }
    if !(w.t0.is_finite() && w.t1.is_finite() && w.t1 > w.t0) {
        return Err(CliError::Config(format!(
            "{at}: need t0 < t1, got [{}, {}]",
            w.t0, w.t1
        )));
    }
    Ok(())
}

pub fn check_grid(g: &Grid3, at: &str) -> Result<(), CliError> {
    g.validate()
        .map_err(|e| CliError::Config(format!("{at}: {e}")))
}

impl Points {
    pub fn labels(&self, seed: u64, at: &str) -> Result<Vec<Vec3>, CliError> {
        let out: Vec<Vec3> = match self {
            Points::List { labels } => labels.iter().map(|p| Vec3::from(*p)).collect(),
            Points::Grid { grid } => {
                check_grid(grid, &format!("{at}.grid"))?;
                (0..grid.len()).map(|n| grid.position(n)).collect()
            }
            Points::Random { count, lo, hi } => {
                if (0..3).any(|a| !(lo[a] <= hi[a])) {
                    return Err(CliError::Config(format!("{at}: lo must not exceed hi")));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..*count)
                    .map(|_| Vec3::from_fn(|a, _| lo[a] + (hi[a] - lo[a]) * rng.random::<f64>()))
                    .collect()
            }
        };
        if out.is_empty() {
            return Err(CliError::Config(format!("{at}: no material points")));
        }
        if out.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(CliError::Config(format!("{at}: non-finite label")));
        }
        Ok(out)
    }
}
