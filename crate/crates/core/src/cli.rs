//! Command-line front end: `coeffs`, `flux`, `residual` and `evolve`.
//!
//! Settings come from built-in defaults, then an optional JSON config file,
//! then flags. `--dump-config` prints the merged result. Exit codes: 0
//! success, 1 configuration or usage error, 2 tolerance breach, 3 numerical
//! health failure.

use std::ffi::OsString;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::DeformationSpec;
use crate::error::{Error, Result};
use crate::evolution::{
    continuity_residual, evolve_split_step, CurrentMethod, FreeEvolution, ResidualInput,
    ResidualOptions, RhoMethod,
};
use crate::flux::{
    flux_closed_grid_fine, flux_closed_spectral, flux_series, flux_series_spectral, FluxProfile,
};
use crate::io;
use crate::states::{CoordinateState, GaussianPacket, GridState, MomentumGrid, SpectralState};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_TOLERANCE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    Series,
    Closed,
    Spectral,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum RhoArg {
    Analytic,
    Series,
    Fd,
}

/// Every setting of a run. Unknown keys in a config file are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// `kempf-tan`, `undeformed`, or a path to a deformation JSON document.
    pub algebra: String,
    pub beta: f64,
    pub hbar: f64,
    pub mass: f64,
    pub grid_m: usize,
    pub b_eff: f64,
    pub order: usize,
    pub method: MethodArg,
    pub tol: Option<f64>,
    /// Interpret `tol` relative to `max|∂j/∂x|` (residual) or `max|j|` (flux).
    pub relative: bool,
    pub out: PathBuf,
    pub compare: bool,
    /// `gaussian:center=,sigma=,x0=`, `plane:p0=,a=,phi=`,
    /// `two-wave:p1=,p2=,a=,b=,phi1=,phi2=`, or a state file.
    pub state: String,
    pub time: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub x_points: usize,
    pub rho_method: RhoArg,
    pub rho_order: Option<usize>,
    pub dt_fd: Option<f64>,
    pub allow_mismatch: bool,
    pub dt: f64,
    pub steps: usize,
    pub every: usize,
    /// `none`, `harmonic:k=` (`U = k x²/2`) or `constant:c=`.
    pub potential: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            algebra: "kempf-tan".into(),
            beta: 1.0,
            hbar: 1.0,
            mass: 1.0,
            grid_m: 512,
            b_eff: 0.5,
            order: 16,
            method: MethodArg::Closed,
            tol: None,
            relative: false,
            out: PathBuf::from("mlflux-out"),
            compare: false,
            state: "gaussian:center=0.05,sigma=0.1".into(),
            time: 0.0,
            x_min: -20.0,
            x_max: 20.0,
            x_points: 801,
            rho_method: RhoArg::Analytic,
            rho_order: None,
            dt_fd: None,
            allow_mismatch: false,
            dt: 0.1,
            steps: 100,
            every: 10,
            potential: "none".into(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "mlflux", version, about = "Probability current under deformed Heisenberg algebras")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Kinetic-energy series coefficients a_1..a_N.
    Coeffs,
    /// Probability current profile.
    Flux,
    /// Continuity residual ∂ρ/∂t + ∂j/∂x.
    Residual,
    /// Time evolution with snapshots.
    Evolve,
}

#[derive(Debug, Default, Args)]
pub struct Flags {
    #[arg(long, global = true)]
    pub algebra: Option<String>,
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    #[arg(long, global = true)]
    pub hbar: Option<f64>,
    #[arg(long, global = true)]
    pub mass: Option<f64>,
    #[arg(long, global = true)]
    pub grid_m: Option<usize>,
    #[arg(long, global = true)]
    pub b_eff: Option<f64>,
    #[arg(long, global = true)]
    pub order: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub method: Option<MethodArg>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub relative: bool,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub compare: bool,
    #[arg(long, global = true)]
    pub dump_config: bool,
    #[arg(long, global = true)]
    pub state: Option<String>,
    #[arg(long, global = true)]
    pub time: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub x_min: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub x_max: Option<f64>,
    #[arg(long, global = true)]
    pub x_points: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub rho_method: Option<RhoArg>,
    #[arg(long, global = true)]
    pub rho_order: Option<usize>,
    #[arg(long, global = true)]
    pub dt_fd: Option<f64>,
    #[arg(long, global = true)]
    pub allow_mismatch: bool,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub dt: Option<f64>,
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    #[arg(long, global = true)]
    pub every: Option<usize>,
    #[arg(long, global = true)]
    pub potential: Option<String>,
}

impl Flags {
    /// Defaults, then the config file, then explicit flags.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => serde_json::from_str(&fs::read_to_string(path)?)?,
            None => RunConfig::default(),
        };
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(v) = &self.$field { c.$field = v.clone(); })*
            };
        }
        take!(algebra, beta, hbar, mass, grid_m, b_eff, order, method, out, state, time);
        take!(x_min, x_max, x_points, rho_method, dt, steps, every, potential);
        if self.tol.is_some() {
            c.tol = self.tol;
        }
        if self.rho_order.is_some() {
            c.rho_order = self.rho_order;
        }
        if self.dt_fd.is_some() {
            c.dt_fd = self.dt_fd;
        }
        c.relative |= self.relative;
        c.compare |= self.compare;
        c.allow_mismatch |= self.allow_mismatch;
        Ok(c)
    }
}

/// Result of a command that ran to completion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Success,
    ToleranceBreach,
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NumericalHealth(_) | Error::Aliasing(_) | Error::InversionFailure { .. } => {
            EXIT_NUMERICAL
        }
        _ => EXIT_CONFIG,
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Normal output goes to `out`, diagnostics to stderr.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let config = match cli.flags.resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    if cli.flags.dump_config {
        return match serde_json::to_string_pretty(&config) {
            Ok(text) => {
                let _ = writeln!(out, "{text}");
                EXIT_OK
            }
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_CONFIG
            }
        };
    }
    let Some(command) = cli.command else {
        eprintln!("error: a subcommand is required (coeffs, flux, residual, evolve)");
        return EXIT_CONFIG;
    };
    match execute(command, &config, out) {
        Ok(Outcome::Success) => EXIT_OK,
        Ok(Outcome::ToleranceBreach) => EXIT_TOLERANCE,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn execute(command: Command, config: &RunConfig, out: &mut dyn Write) -> Result<Outcome> {
    match command {
        Command::Coeffs => cmd_coeffs(config, out),
        Command::Flux => cmd_flux(config, out),
        Command::Residual => cmd_residual(config, out),
        Command::Evolve => cmd_evolve(config, out),
    }
}

impl RunConfig {
    pub fn spec(&self) -> Result<Arc<DeformationSpec>> {
        let spec = match self.algebra.as_str() {
            "kempf-tan" | "kempf" => DeformationSpec::kempf_tan(self.beta)?,
            "undeformed" => DeformationSpec::undeformed(),
            path if Path::new(path).is_file() => io::load_deformation(path)?,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown algebra {other:?}: expected kempf-tan, undeformed or a JSON file"
                )))
            }
        };
        // user documents carry their own units
        let spec = if matches!(self.algebra.as_str(), "kempf-tan" | "kempf" | "undeformed") {
            spec.with_units(self.hbar, self.mass)?
        } else {
            spec
        };
        Ok(Arc::new(spec))
    }

    pub fn momentum_grid(&self) -> Result<MomentumGrid> {
        if !self.grid_m.is_power_of_two() || self.grid_m < 2 {
            return Err(Error::InvalidArgument(format!(
                "grid size must be a power of two, got {}",
                self.grid_m
            )));
        }
        MomentumGrid::new(self.grid_m, self.b_eff)
    }

    pub fn x_grid(&self) -> Result<Vec<f64>> {
        if self.x_points == 0 || self.x_max.partial_cmp(&self.x_min).is_none_or(|o| o.is_lt()) {
            return Err(Error::InvalidArgument(format!(
                "invalid x range [{}, {}] with {} points",
                self.x_min, self.x_max, self.x_points
            )));
        }
        if self.x_points == 1 {
            return Ok(vec![self.x_min]);
        }
        let step = (self.x_max - self.x_min) / (self.x_points - 1) as f64;
        Ok((0..self.x_points).map(|i| self.x_min + i as f64 * step).collect())
    }

    fn check_order(&self, order: usize) -> Result<()> {
        if order == 0 {
            return Err(Error::InvalidArgument("order must be at least 1".into()));
        }
        Ok(())
    }
}

/// A state built from a recipe or loaded from a file.
#[derive(Clone, Debug)]
pub enum LoadedState {
    Spectral(SpectralState),
    Grid(GridState),
    Coordinate(CoordinateState),
}

fn recipe_params(body: &str) -> Result<Vec<(String, f64)>> {
    body.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|kv| {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("expected key=value, got {kv:?}")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("cannot parse {v:?} in {kv:?}")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

struct Params {
    kind: &'static str,
    values: Vec<(String, f64)>,
}

impl Params {
    fn new(kind: &'static str, body: &str, allowed: &[&str]) -> Result<Self> {
        let values = recipe_params(body)?;
        if let Some((k, _)) = values.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            return Err(Error::InvalidArgument(format!(
                "unknown parameter {k:?} for {kind}; expected one of {}",
                allowed.join(", ")
            )));
        }
        Ok(Self { kind, values })
    }

    fn get(&self, key: &str, default: Option<f64>) -> Result<f64> {
        self.values
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| *v)
            .or(default)
            .ok_or_else(|| Error::InvalidArgument(format!("{} requires {key}=", self.kind)))
    }
}

pub fn load_state(config: &RunConfig, spec: &Arc<DeformationSpec>) -> Result<LoadedState> {
    let recipe = config.state.trim();
    let (kind, body) = recipe.split_once(':').unwrap_or((recipe, ""));
    match kind {
        "plane" => {
            let p = Params::new("plane", body, &["p0", "a", "phi"])?;
            let amp = Complex64::from_polar(p.get("a", Some(1.0))?, p.get("phi", Some(0.0))?);
            let state = SpectralState::new(Arc::clone(spec), 0.0)
                .with_component(p.get("p0", None)?, amp)?;
            Ok(LoadedState::Spectral(state.evolve_free(config.time)?))
        }
        "two-wave" => {
            let p = Params::new("two-wave", body, &["p1", "p2", "a", "b", "phi1", "phi2"])?;
            let a = Complex64::from_polar(p.get("a", Some(1.0))?, p.get("phi1", Some(0.0))?);
            let b = Complex64::from_polar(p.get("b", Some(1.0))?, p.get("phi2", Some(0.0))?);
            let state = SpectralState::new(Arc::clone(spec), 0.0)
                .with_component(p.get("p1", None)?, a)?
                .with_component(p.get("p2", None)?, b)?;
            Ok(LoadedState::Spectral(state.evolve_free(config.time)?))
        }
        "gaussian" => {
            let p = Params::new("gaussian", body, &["center", "sigma", "x0"])?;
            let packet = GaussianPacket::new(p.get("center", Some(0.0))?, p.get("sigma", None)?)
                .displaced(p.get("x0", Some(0.0))?);
            let state = GridState::gaussian(Arc::clone(spec), config.momentum_grid()?, packet)?;
            Ok(LoadedState::Grid(state.evolve_free(config.time)?))
        }
        _ => load_state_file(Path::new(recipe), spec, config.time),
    }
}

fn load_state_file(path: &Path, spec: &Arc<DeformationSpec>, time: f64) -> Result<LoadedState> {
    if !path.is_file() {
        return Err(Error::InvalidArgument(format!(
            "state {:?} is neither a recipe (plane, two-wave, gaussian) nor a file",
            path
        )));
    }
    if path.extension().is_some_and(|e| e == "json") {
        let state = io::read_spectral_state(fs::File::open(path)?, Arc::clone(spec))?;
        return Ok(LoadedState::Spectral(state));
    }
    let mut first = String::new();
    BufReader::new(fs::File::open(path)?).read_line(&mut first)?;
    let reader = fs::File::open(path)?;
    match first.split(',').next().map(str::trim) {
        Some("p") => Ok(LoadedState::Grid(io::read_grid_state(reader, Arc::clone(spec), time)?)),
        Some("x") => Ok(LoadedState::Coordinate(io::read_coordinate_state(
            reader,
            Arc::clone(spec),
            time,
        )?)),
        _ => Err(Error::Parse(format!(
            "{:?}: expected a p,re,im or x,re,im header",
            path
        ))),
    }
}

fn prepare_out(config: &RunConfig) -> Result<&Path> {
    fs::create_dir_all(&config.out)?;
    Ok(&config.out)
}

pub fn cmd_coeffs(config: &RunConfig, out: &mut dyn Write) -> Result<Outcome> {
    config.check_order(config.order)?;
    let spec = config.spec()?;
    let coeffs = spec.taylor_coeffs(config.order)?;
    let p_max = config.b_eff.min(spec.momentum_bound());
    let estimate = if spec.is_undeformed() {
        0.0
    } else {
        coeffs.truncation_estimate(spec.beta(), spec.mass(), p_max)
    };
    let dir = prepare_out(config)?;
    let mut table = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut table);
        w.write_record(["n", "a_n"])?;
        for (i, a) in coeffs.coeffs().iter().enumerate() {
            w.write_record([(i + 1).to_string(), io::fmt_num(*a)])?;
        }
        w.flush()?;
    }
    fs::write(dir.join("coeffs.csv"), &table)?;
    io::write_json(
        &dir.join("coeffs.json"),
        &serde_json::json!({
            "algebra": spec.kind().to_string(),
            "beta": spec.beta(),
            "order": config.order,
            "coeffs": coeffs.coeffs(),
            "p_max": p_max,
            "truncation_estimate": estimate,
        }),
    )?;
    out.write_all(&table)?;
    writeln!(out, "# truncation estimate at |p| = {p_max}: {}", io::fmt_num(estimate))?;
    Ok(Outcome::Success)
}

fn flux_with(
    method: MethodArg,
    state: &LoadedState,
    config: &RunConfig,
) -> Result<FluxProfile> {
    let spec = match state {
        LoadedState::Spectral(s) => s.spec(),
        LoadedState::Grid(s) => s.spec(),
        LoadedState::Coordinate(s) => s.spec(),
    };
    match (method, state) {
        (MethodArg::Series, LoadedState::Spectral(s)) => {
            config.check_order(config.order)?;
            flux_series_spectral(s, &config.x_grid()?, &spec.taylor_coeffs(config.order)?, config.order)
        }
        (MethodArg::Series, LoadedState::Grid(g)) => {
            config.check_order(config.order)?;
            flux_series(
                &g.to_coordinate_oversampled(2)?,
                &spec.taylor_coeffs(config.order)?,
                config.order,
            )
        }
        (MethodArg::Series, LoadedState::Coordinate(c)) => {
            config.check_order(config.order)?;
            flux_series(&c.oversampled(2)?, &spec.taylor_coeffs(config.order)?, config.order)
        }
        (_, LoadedState::Spectral(s)) => flux_closed_spectral(s, &config.x_grid()?, s.time()),
        (_, LoadedState::Grid(g)) => flux_closed_grid_fine(g),
        (_, LoadedState::Coordinate(c)) => flux_closed_grid_fine(&c.to_momentum()?),
    }
}

fn breach(value: f64, tol: Option<f64>, scale: f64, relative: bool) -> bool {
    match tol {
        Some(t) => value > if relative { t * scale } else { t },
        None => false,
    }
}

pub fn cmd_flux(config: &RunConfig, out: &mut dyn Write) -> Result<Outcome> {
    let spec = config.spec()?;
    let state = load_state(config, &spec)?;
    let dir = prepare_out(config)?;
    if !config.compare {
        let profile = flux_with(config.method, &state, config)?;
        io::save_flux(&profile, &dir.join("flux.csv"))?;
        writeln!(
            out,
            "method={} points={} max|j|={} max_imag_residue={}",
            profile.label(),
            profile.x.len(),
            io::fmt_num(profile.max_abs()),
            io::fmt_num(profile.max_imag_residue)
        )?;
        return Ok(Outcome::Success);
    }

    let closed_method = match config.method {
        MethodArg::Series => MethodArg::Closed,
        m => m,
    };
    let series = flux_with(MethodArg::Series, &state, config)?;
    let closed = flux_with(closed_method, &state, config)?;
    io::save_flux(&series, &dir.join("flux_series.csv"))?;
    io::save_flux(&closed, &dir.join("flux_closed.csv"))?;
    let diff: Vec<f64> = series.values.iter().zip(&closed.values).map(|(a, b)| a - b).collect();
    io::write_profile_csv(fs::File::create(dir.join("flux_diff.csv"))?, ["x", "diff"], &series.x, &diff)?;
    let max_diff = series.max_abs_difference(&closed);
    let estimate = series.truncation_estimate.unwrap_or(0.0);
    writeln!(
        out,
        "max|series-closed|={} truncation_estimate={} max|j|={}",
        io::fmt_num(max_diff),
        io::fmt_num(estimate),
        io::fmt_num(closed.max_abs())
    )?;
    if breach(max_diff, config.tol, closed.max_abs(), config.relative) {
        return Ok(Outcome::ToleranceBreach);
    }
    Ok(Outcome::Success)
}

pub fn cmd_residual(config: &RunConfig, out: &mut dyn Write) -> Result<Outcome> {
    let spec = config.spec()?;
    let state = load_state(config, &spec)?;
    let current = match config.method {
        MethodArg::Series => {
            config.check_order(config.order)?;
            CurrentMethod::Series(config.order)
        }
        MethodArg::Closed | MethodArg::Spectral => CurrentMethod::Closed,
    };
    let rho = match config.rho_method {
        RhoArg::Analytic => RhoMethod::Analytic,
        RhoArg::Series => {
            let n = config.rho_order.unwrap_or(config.order);
            config.check_order(n)?;
            RhoMethod::Series(n)
        }
        RhoArg::Fd => RhoMethod::FiniteDifference(config.dt_fd),
    };
    let opts = ResidualOptions {
        rho,
        current,
        allow_order_mismatch: config.allow_mismatch,
    };
    let xs;
    let input = match &state {
        LoadedState::Spectral(s) => {
            xs = config.x_grid()?;
            ResidualInput::Spectral(s, &xs)
        }
        LoadedState::Grid(g) => ResidualInput::Grid(g),
        LoadedState::Coordinate(c) => ResidualInput::Coordinate(c, None),
    };
    let report = continuity_residual(input, opts)?;
    let dir = prepare_out(config)?;
    io::save_residual(&report, &dir.join("residual.csv"))?;
    let scale = report.scale();
    writeln!(
        out,
        "rho={} j={} max|r|={} l2={} max|dj/dx|={}",
        report.rho_method,
        report.j_method,
        io::fmt_num(report.max_abs),
        io::fmt_num(report.l2),
        io::fmt_num(scale)
    )?;
    if breach(report.max_abs, config.tol, scale, config.relative) {
        return Ok(Outcome::ToleranceBreach);
    }
    Ok(Outcome::Success)
}

/// Parses a potential recipe into samples on `x`.
pub fn potential_samples(recipe: &str, x: &[f64]) -> Result<Option<Vec<f64>>> {
    let recipe = recipe.trim();
    let (kind, body) = recipe.split_once(':').unwrap_or((recipe, ""));
    match kind {
        "none" | "" => Ok(None),
        "harmonic" => {
            let k = Params::new("harmonic", body, &["k"])?.get("k", Some(1.0))?;
            Ok(Some(x.iter().map(|x| 0.5 * k * x * x).collect()))
        }
        "constant" => {
            let c = Params::new("constant", body, &["c"])?.get("c", None)?;
            Ok(Some(vec![c; x.len()]))
        }
        other => Err(Error::InvalidArgument(format!(
            "unknown potential {other:?}: expected none, harmonic:k= or constant:c="
        ))),
    }
}

#[derive(Serialize)]
struct Snapshot {
    step: usize,
    t: f64,
    psi: String,
    rho: String,
    flux: String,
    norm: f64,
    mean_x: f64,
}

#[derive(Serialize)]
struct Manifest {
    algebra: String,
    beta: f64,
    dt: f64,
    steps: usize,
    every: usize,
    potential: String,
    snapshots: Vec<Snapshot>,
}

fn write_snapshot(dir: &Path, step: usize, psi: &CoordinateState) -> Result<Snapshot> {
    let psi_name = format!("psi_{step:06}.csv");
    let rho_name = format!("rho_{step:06}.csv");
    let flux_name = format!("flux_{step:06}.csv");
    io::save_coordinate_state(psi, &dir.join(&psi_name))?;
    io::write_profile_csv(
        fs::File::create(dir.join(&rho_name))?,
        ["x", "rho"],
        &psi.x(),
        &psi.density(),
    )?;
    let flux = flux_closed_grid_fine(&psi.to_momentum()?)?;
    io::save_flux(&flux, &dir.join(&flux_name))?;
    Ok(Snapshot {
        step,
        t: psi.time(),
        psi: psi_name,
        rho: rho_name,
        flux: flux_name,
        norm: psi.norm(),
        mean_x: psi.mean_position(),
    })
}

pub fn cmd_evolve(config: &RunConfig, out: &mut dyn Write) -> Result<Outcome> {
    let spec = config.spec()?;
    let psi = match load_state(config, &spec)? {
        LoadedState::Grid(g) => g.to_coordinate()?,
        LoadedState::Coordinate(c) => c,
        LoadedState::Spectral(_) => {
            return Err(Error::InvalidArgument(
                "evolve needs a sampled state (gaussian recipe or a CSV file)".into(),
            ))
        }
    };
    if config.every == 0 {
        return Err(Error::InvalidArgument("--every must be at least 1".into()));
    }
    let potential = potential_samples(&config.potential, &psi.x())?;
    let dir = prepare_out(config)?;

    let mut snapshots = vec![write_snapshot(dir, 0, &psi)?];
    let mut current = psi;
    let mut momentum = current.to_momentum()?;
    for step in 1..=config.steps {
        current = match &potential {
            Some(u) => evolve_split_step(&current, u, config.dt, 1)?,
            None => {
                momentum = momentum.evolve_free(config.dt)?;
                momentum.to_coordinate()?
            }
        };
        if step % config.every == 0 || step == config.steps {
            snapshots.push(write_snapshot(dir, step, &current)?);
        }
    }
    let last = snapshots.last().expect("initial snapshot");
    writeln!(
        out,
        "steps={} t={} norm={} mean_x={} snapshots={}",
        config.steps,
        io::fmt_num(last.t),
        io::fmt_num(last.norm),
        io::fmt_num(last.mean_x),
        snapshots.len()
    )?;
    io::write_json(
        &dir.join("manifest.json"),
        &Manifest {
            algebra: spec.kind().to_string(),
            beta: spec.beta(),
            dt: config.dt,
            steps: config.steps,
            every: config.every,
            potential: config.potential.clone(),
            snapshots,
        },
    )?;
    Ok(Outcome::Success)
}
