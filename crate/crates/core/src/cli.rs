//! `zbw` command-line front end.
//!
//! Exit codes: 0 success, 1 I/O or malformed input, 2 usage error,
//! 3 domain error (the message names the violated precondition).
//!
//! Parameters resolve as flag > `--config` file > `ZBW_SEED` (seed only) >
//! built-in default. The config file is a JSON object keyed by long flag
//! names; a run manifest (its `parameters` object) is accepted as well, so a
//! manifest reproduces its run.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::constants::PhysicalConstants;
use crate::density::{self, GridSpec};
use crate::dirac_beat::Axis;
use crate::electrostatics::{pairwise_self_energy, shell_report, SelfEnergyReport};
use crate::error::{Result, ZbwError};
use crate::io;
use crate::kinematics::{CylinderTrajectory, LinearTrajectory, ModeEnsemble};
use crate::mass_solver::{
    solve_fixed_point, GeometryPipeline, GeometryShape, GeometrySpec, Polynomial,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "zbw",
    version,
    about = "Zitterbewegung charge distributions and trial-mass self-energy"
)]
pub struct Cli {
    /// JSON file of default parameters (flags take precedence).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Electron scales in Gaussian units.
    Constants(ConstantsArgs),
    /// Expected position and velocity of a momentum-cell ensemble.
    Beat(BeatArgs),
    /// Position time series of the linear, cylinder or custom motion.
    Trajectory(TrajectoryArgs),
    /// Monte Carlo grid density of a mode ensemble, or analytic pdfs.
    Density(DensityArgs),
    /// Self-energy of a grid file or of a spherical shell.
    SelfEnergy(SelfEnergyArgs),
    /// Solve w_Z(mu) = mu c^2.
    SolveMass(SolveMassArgs),
}

#[derive(Debug, Args)]
struct ConstantsArgs {
    /// Mass in grams (default: electron).
    #[arg(long)]
    mass: Option<f64>,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct BeatArgs {
    #[arg(long)]
    ensemble: Option<PathBuf>,
    #[arg(long)]
    axis: Option<String>,
    #[arg(long = "t-max")]
    t_max: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
enum Shape {
    Linear,
    Cylinder,
    Custom,
}

#[derive(Debug, Args)]
struct TrajectoryArgs {
    #[arg(long, value_enum)]
    shape: Option<Shape>,
    #[arg(long = "lambda-cm")]
    lambda_cm: Option<f64>,
    #[arg(long = "t-max")]
    t_max: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    ensemble: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
enum Analytic {
    Linear,
    Cylinder,
}

#[derive(Debug, Args)]
struct DensityArgs {
    #[arg(long)]
    ensemble: Option<PathBuf>,
    #[arg(long)]
    samples: Option<u64>,
    /// Cells per axis.
    #[arg(long)]
    grid: Option<usize>,
    /// Grid half-width (cm); the grid spans [-X, X]^3.
    #[arg(long = "extent-cm")]
    extent_cm: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    analytic: Option<Analytic>,
    /// Lambda for --analytic; overrides lambda_C/4pi for --ensemble.
    #[arg(long = "lambda-cm")]
    lambda_cm: Option<f64>,
    /// Number of evaluation points for --analytic.
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SelfEnergyArgs {
    #[arg(long)]
    grid: Option<PathBuf>,
    #[arg(long)]
    shell: bool,
    #[arg(long = "r0-cm", allow_negative_numbers = true)]
    r0_cm: Option<f64>,
    #[arg(long = "q-statC", allow_negative_numbers = true)]
    q_stat_c: Option<f64>,
    #[arg(long = "report-json")]
    report_json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
enum FunctionalKind {
    Poly,
}

#[derive(Debug, Args)]
struct SolveMassArgs {
    /// Mode-list JSON defining the geometry.
    #[arg(long)]
    ensemble: Option<PathBuf>,
    /// Use the idealised spherical shell of radius Lambda instead of modes.
    #[arg(long)]
    shell: bool,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "cells-per-lambda")]
    cells_per_lambda: Option<f64>,
    #[arg(long = "mu-min-g")]
    mu_min_g: Option<f64>,
    #[arg(long = "mu-max-g")]
    mu_max_g: Option<f64>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long, value_enum)]
    functional: Option<FunctionalKind>,
    /// Polynomial coefficients a0,a1,... of w(mu) = sum a_i mu^i (erg, mu in g).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    coeffs: Option<Vec<f64>>,
    #[arg(long = "report-json")]
    report_json: bool,
}

/// Resolves parameters against the config file and records the result.
struct Params {
    config: Map<String, Value>,
    resolved: BTreeMap<String, Value>,
}

impl Params {
    fn load(path: Option<&Path>) -> Result<Params> {
        let config = match path {
            None => Map::new(),
            Some(path) => {
                let file = File::open(path).map_err(|source| ZbwError::Io {
                    path: path.to_path_buf(),
                    source,
                })?;
                let value: Value = serde_json::from_reader(BufReader::new(file)).map_err(|e| {
                    ZbwError::Format {
                        path: path.to_path_buf(),
                        message: e.to_string(),
                    }
                })?;
                let value = match value {
                    Value::Object(mut m) if m.contains_key("parameters") => {
                        m.remove("parameters").unwrap()
                    }
                    v => v,
                };
                match value {
                    Value::Object(m) => m,
                    _ => {
                        return Err(ZbwError::Format {
                            path: path.to_path_buf(),
                            message: "config must be a JSON object".into(),
                        })
                    }
                }
            }
        };
        Ok(Params {
            config,
            resolved: BTreeMap::new(),
        })
    }

    fn opt<T: Serialize + DeserializeOwned>(
        &mut self,
        key: &str,
        flag: Option<T>,
    ) -> Result<Option<T>> {
        let value = match flag {
            Some(v) => Some(v),
            None => match self.config.get(key) {
                Some(Value::Null) | None => None,
                Some(v) => {
                    Some(
                        serde_json::from_value(v.clone()).map_err(|e| ZbwError::Format {
                            path: PathBuf::from("<config>"),
                            message: format!("{key}: {e}"),
                        })?,
                    )
                }
            },
        };
        if let Some(v) = &value {
            self.resolved
                .insert(key.to_string(), serde_json::to_value(v)?);
        }
        Ok(value)
    }

    fn or<T: Serialize + DeserializeOwned>(
        &mut self,
        key: &str,
        flag: Option<T>,
        default: T,
    ) -> Result<T> {
        match self.opt(key, flag)? {
            Some(v) => Ok(v),
            None => {
                self.resolved
                    .insert(key.to_string(), serde_json::to_value(&default)?);
                Ok(default)
            }
        }
    }

    fn required<T: Serialize + DeserializeOwned>(
        &mut self,
        key: &str,
        flag: Option<T>,
    ) -> Result<T> {
        self.opt(key, flag)?
            .ok_or_else(|| usage(format!("--{key} is required")))
    }

    fn flag(&mut self, key: &str, flag: bool) -> Result<bool> {
        self.or(key, flag.then_some(true), false)
    }

    fn seed(&mut self, flag: Option<u64>) -> Result<u64> {
        let env = std::env::var("ZBW_SEED").ok().and_then(|s| s.parse().ok());
        match self.opt("seed", flag)? {
            Some(s) => Ok(s),
            None => self.or("seed", env, 0),
        }
    }
}

fn usage(msg: impl Into<String>) -> ZbwError {
    ZbwError::Usage(msg.into())
}

pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(err) => {
            if let ZbwError::Usage(msg) = &err {
                eprintln!("error: {msg}\n\nFor more information, try '--help'.");
                return EXIT_USAGE;
            }
            eprintln!("error: {err}");
            if err.is_domain() {
                EXIT_DOMAIN
            } else {
                EXIT_FAILURE
            }
        }
    }
}

pub fn dispatch(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        // Fails only if a global pool already exists, which is fine.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
    let mut params = Params::load(cli.config.as_deref())?;
    let consts = PhysicalConstants::CGS;
    let started = Instant::now();
    let (name, outputs) = match cli.command {
        Command::Constants(a) => ("constants", run_constants(a, &mut params, &consts)?),
        Command::Beat(a) => ("beat", run_beat(a, &mut params, &consts)?),
        Command::Trajectory(a) => ("trajectory", run_trajectory(a, &mut params, &consts)?),
        Command::Density(a) => ("density", run_density(a, &mut params, &consts)?),
        Command::SelfEnergy(a) => ("self-energy", run_self_energy(a, &mut params, &consts)?),
        Command::SolveMass(a) => ("solve-mass", run_solve_mass(a, &mut params, &consts)?),
    };
    if let Some(first) = outputs.first() {
        write_manifest(
            first,
            name,
            &params,
            &outputs,
            started.elapsed().as_secs_f64(),
        )?;
    }
    Ok(())
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn write_manifest(
    out: &Path,
    subcommand: &str,
    params: &Params,
    outputs: &[PathBuf],
    wall: f64,
) -> Result<()> {
    let manifest = json!({
        "schema": "zbw-manifest v1",
        "subcommand": subcommand,
        "parameters": params.resolved,
        "seed": params.resolved.get("seed"),
        "versions": {
            "zbw-core": env!("CARGO_PKG_VERSION"),
            "grid_format": format!("{} {}", io::GRID_MAGIC, io::GRID_VERSION),
        },
        "outputs": outputs,
        "wall_time_s": wall,
    });
    let path = manifest_path(out);
    std::fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")
        .map_err(|source| ZbwError::Io { path, source })
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    // Round-trip through Value so object keys come out sorted.
    let v = serde_json::to_value(value)?;
    println!("{}", serde_json::to_string_pretty(&v)?);
    Ok(())
}

fn linspace(t_max: f64, steps: usize) -> Result<Vec<f64>> {
    if !(t_max > 0.0) || steps == 0 {
        return Err(ZbwError::domain("t-max > 0 and steps >= 1 required"));
    }
    Ok((0..=steps)
        .map(|k| t_max * k as f64 / steps as f64)
        .collect())
}

fn run_constants(
    a: ConstantsArgs,
    params: &mut Params,
    consts: &PhysicalConstants,
) -> Result<Vec<PathBuf>> {
    let mass = params.or("mass", a.mass, consts.m_e)?;
    let json = params.flag("json", a.json)?;
    let s = consts.electron_scales(mass)?;
    if json {
        print_json(&json!({
            "lambda_C_cm": s.lambda_c,
            "T_Z_s": s.t_z,
            "r_classical_cm": s.r_classical,
            "mu_B": s.mu_b,
        }))?;
    } else {
        let rest = consts.rest_energy(mass);
        println!("{:<16} {:>14}  unit", "quantity", "value");
        for (name, value, unit) in [
            ("mass", mass, "g"),
            ("rest energy", rest, "erg"),
            ("rest energy", consts.erg_to_ev(rest), "eV"),
            ("lambda_C", s.lambda_c, "cm"),
            ("T_Z", s.t_z, "s"),
            ("r_classical", s.r_classical, "cm"),
            ("mu_B", s.mu_b, "erg/G"),
            ("alpha", consts.alpha(), "-"),
        ] {
            println!("{name:<16} {value:>14.6e}  {unit}");
        }
    }
    Ok(Vec::new())
}

fn run_beat(a: BeatArgs, params: &mut Params, consts: &PhysicalConstants) -> Result<Vec<PathBuf>> {
    let ensemble_path: PathBuf = params.required("ensemble", a.ensemble)?;
    let axis: Axis = params.or("axis", a.axis, "x".to_string())?.parse()?;
    let t_z = consts.electron_scales(consts.m_e)?.t_z;
    let t_max = params.or("t-max", a.t_max, 2.0 * t_z)?;
    let steps = params.or("steps", a.steps, 1000)?;
    let out: PathBuf = params.required("out", a.out)?;

    let ensemble = io::read_cell_ensemble(&ensemble_path, consts)?;
    let times = linspace(t_max, steps)?;
    let x = ensemble.expected_position_series(axis, &times)?;
    let v = ensemble.velocity_series(axis, &times);
    let rows = (0..times.len()).map(|i| vec![times[i], x[i], v[i]]);
    io::write_csv(&out, "zbw beat v1", &["t_s", "x_cm", "v_cm_per_s"], rows)?;
    Ok(vec![out])
}

fn run_trajectory(
    a: TrajectoryArgs,
    params: &mut Params,
    consts: &PhysicalConstants,
) -> Result<Vec<PathBuf>> {
    let shape: Shape = params.required("shape", a.shape)?;
    let t_z = consts.electron_scales(consts.m_e)?.t_z;
    let t_max = params.or("t-max", a.t_max, t_z)?;
    let steps = params.or("steps", a.steps, 1000)?;
    let out: PathBuf = params.required("out", a.out)?;
    let times = linspace(t_max, steps)?;

    let positions: Vec<[f64; 3]> = match shape {
        Shape::Linear => {
            let lambda = params.required("lambda-cm", a.lambda_cm)?;
            let traj = LinearTrajectory::for_electron(lambda, consts)?;
            times.iter().map(|&t| traj.position(t)).collect()
        }
        Shape::Cylinder => {
            let lambda = params.required("lambda-cm", a.lambda_cm)?;
            let traj = CylinderTrajectory::for_electron(lambda, consts)?;
            times.iter().map(|&t| traj.position(t)).collect()
        }
        Shape::Custom => {
            let path: PathBuf = params.required("ensemble", a.ensemble)?;
            let ens = mode_ensemble(&path, params.opt("lambda-cm", a.lambda_cm)?, consts)?;
            times.iter().map(|&t| ens.position(t)).collect()
        }
    };
    let rows = times
        .iter()
        .zip(&positions)
        .map(|(&t, p)| vec![t, p[0], p[1], p[2]]);
    io::write_csv(
        &out,
        "zbw trajectory v1",
        &["t_s", "x_cm", "y_cm", "z_cm"],
        rows,
    )?;
    Ok(vec![out])
}

fn mode_ensemble(
    path: &Path,
    lambda_unit: Option<f64>,
    consts: &PhysicalConstants,
) -> Result<ModeEnsemble> {
    let modes = io::read_modes(path)?;
    match lambda_unit {
        Some(l) => ModeEnsemble::new(modes, l, consts.c),
        None => ModeEnsemble::for_mass(modes, consts.m_e, consts),
    }
}

fn run_density(
    a: DensityArgs,
    params: &mut Params,
    consts: &PhysicalConstants,
) -> Result<Vec<PathBuf>> {
    let out: PathBuf = params.required("out", a.out)?;
    if let Some(kind) = params.opt("analytic", a.analytic)? {
        let lambda = params.required("lambda-cm", a.lambda_cm)?;
        let points = params.or("points", a.points, 401)?;
        if points == 0 {
            return Err(ZbwError::domain("points >= 1 required"));
        }
        let (half, header, schema) = match kind {
            Analytic::Linear => (
                3f64.sqrt() * lambda,
                ["s_cm", "pdf_per_cm"],
                "zbw density-linear v1",
            ),
            Analytic::Cylinder => (lambda, ["z_cm", "pdf_per_cm"], "zbw density-cylinder v1"),
        };
        let mut rows = Vec::with_capacity(points);
        for k in 0..points {
            let x = -half + (k as f64 + 0.5) * 2.0 * half / points as f64;
            let pdf = match kind {
                Analytic::Linear => density::linear_pdf(x, lambda)?,
                Analytic::Cylinder => density::cylinder_pdf(x, lambda)?,
            };
            rows.push(vec![x, pdf]);
        }
        io::write_csv(&out, schema, &header, rows)?;
        return Ok(vec![out]);
    }

    let path: PathBuf = params.required("ensemble", a.ensemble)?;
    let ens = mode_ensemble(&path, params.opt("lambda-cm", a.lambda_cm)?, consts)?;
    let samples = params.or("samples", a.samples, 1_000_000)?;
    let n = params.or("grid", a.grid, 64)?;
    let extent = params.or(
        "extent-cm",
        a.extent_cm,
        3f64.sqrt() * ens.effective_lambda(),
    )?;
    let seed = params.seed(a.seed)?;
    let spec = GridSpec::cube(n, extent)?;
    let grid = density::sample_time_marginal(&ens, samples, &spec, seed, consts)?;
    io::save_grid(&out, &grid)?;
    eprintln!(
        "{} samples -> {} occupied cells, total charge {:e} statC",
        samples,
        grid.occupied(),
        grid.charge_sum()
    );
    Ok(vec![out])
}

fn print_report(r: &SelfEnergyReport, json: bool) -> Result<()> {
    if json {
        return print_json(r);
    }
    println!("method       {:?}", r.method);
    println!("w            {:.6e} erg", r.w);
    println!("w            {:.6e} eV", r.w_ev);
    if r.n_cells > 0 {
        println!("cells        {}", r.n_cells);
        println!("spacing      {:.6e} cm", r.spacing);
    }
    if r.resolution_limited {
        println!("note         resolution-limited (fewer than two occupied cells)");
    }
    Ok(())
}

fn run_self_energy(
    a: SelfEnergyArgs,
    params: &mut Params,
    consts: &PhysicalConstants,
) -> Result<Vec<PathBuf>> {
    let json = params.flag("report-json", a.report_json)?;
    if params.flag("shell", a.shell)? {
        let r0 = params.required("r0-cm", a.r0_cm)?;
        let q = params.or("q-statC", a.q_stat_c, consts.e)?;
        print_report(&shell_report(r0, q, consts)?, json)?;
    } else {
        let path: PathBuf = params.required("grid", a.grid)?;
        let grid = io::load_grid(&path)?;
        print_report(&pairwise_self_energy(&grid, consts)?, json)?;
    }
    Ok(Vec::new())
}

fn run_solve_mass(
    a: SolveMassArgs,
    params: &mut Params,
    consts: &PhysicalConstants,
) -> Result<Vec<PathBuf>> {
    let mu_min = params.or("mu-min-g", a.mu_min_g, consts.m_e / 100.0)?;
    let mu_max = params.or("mu-max-g", a.mu_max_g, consts.m_e * 1e4)?;
    let tolerance = params.or("tolerance", a.tolerance, 1e-6)?;
    let json = params.flag("report-json", a.report_json)?;

    let verdict = if let Some(FunctionalKind::Poly) = params.opt("functional", a.functional)? {
        let coeffs: Vec<f64> = params.required("coeffs", a.coeffs)?;
        if coeffs.is_empty() {
            return Err(usage("--coeffs needs at least one value"));
        }
        solve_fixed_point(&Polynomial { coeffs }, mu_min, mu_max, tolerance, consts)?
    } else {
        let shape = if params.flag("shell", a.shell)? {
            GeometryShape::Shell { sigma_a: 1.0 }
        } else {
            let path: PathBuf = params.required("ensemble", a.ensemble)?;
            GeometryShape::Modes(io::read_modes(&path)?)
        };
        let geometry = GeometrySpec {
            shape,
            cells_per_lambda: params.or("cells-per-lambda", a.cells_per_lambda, 32.0)?,
            n_samples: params.or("samples", a.samples, 1_000_000)?,
            seed: params.seed(a.seed)?,
        };
        solve_fixed_point(
            &GeometryPipeline {
                geometry: &geometry,
                consts,
            },
            mu_min,
            mu_max,
            tolerance,
            consts,
        )?
    };

    if json {
        print_json(&verdict)?;
    } else {
        println!("kind                {:?}", verdict.kind);
        println!("ratio w/(mu c^2)    {:.9e}", verdict.ratio);
        println!("homogeneity defect  {:.3e}", verdict.homogeneity_defect);
        for r in &verdict.roots {
            println!(
                "root                mu = {:.9e} g  (residual {:.2e})",
                r.mu_g, r.residual
            );
        }
    }
    Ok(Vec::new())
}
