//! Command-line front end. Every subcommand reads a JSON parameter file,
//! prints a JSON report on stdout and optionally writes artifacts to `--out`.
//!
//! Exit codes: 0 success (or the criterion holds), 2 a well-formed negative
//! verdict, 1 an input or runtime error.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::case_study::{run_case, volume_fraction_roots, LatticeParams, VolumeFractionCoefficients};
use crate::hulls::{
    kappa_set, mallard_diagonalize, three_well_configs, two_well_membership_tol, HullTolerances, TwoWellSpec,
};
use crate::interior::{construct_interior_point, cubic_austenite_check_with_normal, InteriorPointCertificate};
use crate::mat3::{Mat3, Vec3};
use crate::surface::{
    build_surface, certificate_epsilon, certificate_predicate, chord_control, mesh_interface,
    path_continuity_check, vertex_residuals, verify_compatibility, write_obj, write_residual_csv, Profile,
    SurfaceError, DEFAULT_PATH_STEPS,
};
use crate::symmetry::Stretch;
use crate::twinning::{
    habit_plane_tol, mallard_twin, solve_rank_one_tol, RankOneOutcome, TwinError, MIDDLE_EIGENVALUE_TOL,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_NEGATIVE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "nonplanar", version, about = "Austenite-martensite interface compatibility")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON parameter file, or `-` for stdin.
    #[arg(long, global = true)]
    pub params: Option<PathBuf>,
    /// Directory for report and artifact files.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Tolerance override for the subcommand's main check.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Mesh resolution (vertices per side) for `surface`.
    #[arg(long, global = true, default_value_t = 100)]
    pub resolution: usize,
    /// Seed for random path sampling.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Number of random paths for `surface`.
    #[arg(long, global = true, default_value_t = 100)]
    pub trials: usize,
    /// Trapezoid steps per path for `surface`.
    #[arg(long, global = true, default_value_t = DEFAULT_PATH_STEPS)]
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Rank-one connections between two wells, or a Mallard twin.
    Twin,
    /// Habit-plane solutions of `R M = 1 + b⊗m`.
    Habit,
    /// Two-well hull membership.
    Hull,
    /// Mallard diagonalization, three-well configurations and S(U).
    Mallard,
    /// Interior-point certificate from `U` or from `(Δ, κ, n)`.
    Interior,
    /// Build, mesh and verify a curved interface.
    Surface,
    /// CuAlNi case study.
    Cualni,
    /// Type-II volume fractions.
    Volfrac,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Twin => "twin",
            Command::Habit => "habit",
            Command::Hull => "hull",
            Command::Mallard => "mallard",
            Command::Interior => "interior",
            Command::Surface => "surface",
            Command::Cualni => "cualni",
            Command::Volfrac => "volfrac",
        }
    }
}

/// Report produced by one subcommand.
pub struct Outcome {
    pub code: u8,
    pub report: Value,
    /// Extra files `(name, contents)` written under `--out`.
    pub artifacts: Vec<(String, Vec<u8>)>,
    /// Line printed on stderr alongside a negative verdict.
    pub note: Option<String>,
}

impl Outcome {
    fn new(code: u8, report: Value) -> Self {
        Outcome { code, report, artifacts: Vec::new(), note: None }
    }
}

fn verdict(ok: bool) -> u8 {
    if ok {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    }
}

fn read_params_value(path: Option<&Path>) -> Result<Option<Value>> {
    let Some(path) = path else { return Ok(None) };
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).context("reading parameters from stdin")?;
        s
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
    };
    let v = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(Some(v))
}

fn parse<T: DeserializeOwned>(v: Value) -> Result<T> {
    serde_json::from_value(v).context("invalid parameters")
}

fn require(v: Option<Value>, command: Command) -> Result<Value> {
    v.with_context(|| format!("`{}` requires --params", command.name()))
}

fn tolerance(common: &CommonArgs, default: f64) -> Result<f64> {
    match common.tol {
        None => Ok(default),
        Some(t) if t > 0.0 && t.is_finite() => Ok(t),
        Some(t) => bail!("tolerance must be positive (got {t})"),
    }
}

fn tagged(command: Command, payload: impl Serialize) -> Result<Value> {
    let mut v = serde_json::to_value(payload)?;
    match v.as_object_mut() {
        Some(map) => {
            map.insert("command".into(), json!(command.name()));
            Ok(v)
        }
        None => Ok(json!({ "command": command.name(), "result": v })),
    }
}

/// Runs a parsed command without touching stdout or the filesystem output.
pub fn execute(command: Command, common: &CommonArgs) -> Result<Outcome> {
    let params = read_params_value(common.params.as_deref())?;
    match command {
        Command::Twin => cmd_twin(require(params, command)?, common),
        Command::Habit => cmd_habit(require(params, command)?, common),
        Command::Hull => cmd_hull(require(params, command)?, common),
        Command::Mallard => cmd_mallard(require(params, command)?),
        Command::Interior => cmd_interior(require(params, command)?),
        Command::Surface => cmd_surface(require(params, command)?, common),
        Command::Cualni => cmd_cualni(params),
        Command::Volfrac => cmd_volfrac(require(params, command)?),
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum TwinParams {
    Pair { a: Mat3, b: Mat3 },
    Mallard { u: Stretch, axis: Vec3 },
}

fn cmd_twin(params: Value, common: &CommonArgs) -> Result<Outcome> {
    let tol = tolerance(common, MIDDLE_EIGENVALUE_TOL)?;
    match parse::<TwinParams>(params)? {
        TwinParams::Pair { a, b } => {
            let outcome = solve_rank_one_tol(&a, &b, tol)?;
            let ok = matches!(outcome, RankOneOutcome::Connections { .. });
            Ok(Outcome::new(verdict(ok), tagged(Command::Twin, &outcome)?))
        }
        TwinParams::Mallard { u, axis } => match mallard_twin(&u, &axis) {
            Ok(conn) => Ok(Outcome::new(
                EXIT_OK,
                tagged(Command::Twin, json!({ "verdict": "connections", "solutions": [conn] }))?,
            )),
            Err(TwinError::NoTwin) => Ok(Outcome::new(
                EXIT_NEGATIVE,
                tagged(Command::Twin, json!({ "verdict": "no-twin" }))?,
            )),
            Err(e) => Err(e.into()),
        },
    }
}

#[derive(Deserialize)]
struct HabitParams {
    m: Mat3,
}

fn cmd_habit(params: Value, common: &CommonArgs) -> Result<Outcome> {
    let tol = tolerance(common, MIDDLE_EIGENVALUE_TOL)?;
    let p: HabitParams = parse(params)?;
    match habit_plane_tol(&p.m, tol) {
        Ok(solutions) => Ok(Outcome::new(
            EXIT_OK,
            tagged(Command::Habit, json!({ "verdict": "solutions", "solutions": solutions }))?,
        )),
        Err(TwinError::NoSolution { middle_eigenvalue }) => Ok(Outcome::new(
            EXIT_NEGATIVE,
            tagged(
                Command::Habit,
                json!({ "verdict": "no-solution", "middle_eigenvalue": middle_eigenvalue }),
            )?,
        )),
        Err(TwinError::IdentityInput) => Ok(Outcome::new(
            EXIT_NEGATIVE,
            tagged(Command::Habit, json!({ "verdict": "identity-input" }))?,
        )),
        Err(e) => Err(e.into()),
    }
}

#[derive(Deserialize)]
struct HullParams {
    f: Mat3,
    eta1: f64,
    eta2: f64,
    eta3: f64,
}

fn cmd_hull(params: Value, common: &CommonArgs) -> Result<Outcome> {
    let p: HullParams = parse(params)?;
    let spec = TwoWellSpec::new(p.eta1, p.eta2, p.eta3)?;
    let mut tol = HullTolerances::default();
    if common.tol.is_some() {
        let t = tolerance(common, 0.0)?;
        tol.block = t;
        tol.determinant = t;
    }
    let v = two_well_membership_tol(&p.f, &spec, &tol);
    Ok(Outcome::new(verdict(v.member), tagged(Command::Hull, v)?))
}

#[derive(Deserialize)]
struct MallardParams {
    u: Stretch,
    first: Option<usize>,
    second: Option<usize>,
}

fn cmd_mallard(params: Value) -> Result<Outcome> {
    let p: MallardParams = parse(params)?;
    let chains = match (p.first, p.second) {
        (Some(i), Some(j)) => vec![mallard_diagonalize(&p.u, i, j)?],
        (None, None) => {
            let mut all = Vec::new();
            for i in 1..=3 {
                for j in (1..=3).filter(|&j| j != i) {
                    all.push(mallard_diagonalize(&p.u, i, j)?);
                }
            }
            all
        }
        _ => bail!("give both `first` and `second` axes, or neither"),
    };
    let report = json!({
        "delta": p.u.determinant(),
        "chains": chains,
        "configs": three_well_configs(&p.u)?,
        "kappa_set": kappa_set(&p.u),
    });
    Ok(Outcome::new(EXIT_OK, tagged(Command::Mallard, report)?))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum InteriorParams {
    Stretch { u: Stretch, normal: Option<Vec3> },
    Lattice { lattice: LatticeParams, normal: Option<Vec3> },
    Manual { delta: f64, kappa: f64, normal: Option<Vec3> },
}

fn cmd_interior(params: Value) -> Result<Outcome> {
    let p: InteriorParams = parse(params)?;
    let e1 = Vec3::basis(0);
    let report = match p {
        InteriorParams::Stretch { u, normal } => {
            let r = cubic_austenite_check_with_normal(&u, &normal.unwrap_or(e1))?;
            json!({ "certificate": r.certificate, "report": r })
        }
        InteriorParams::Lattice { lattice, normal } => {
            let u = crate::case_study::cualni_stretch(&lattice)?;
            let r = cubic_austenite_check_with_normal(&u, &normal.unwrap_or(e1))?;
            json!({ "certificate": r.certificate, "report": r })
        }
        InteriorParams::Manual { delta, kappa, normal } => {
            let c = construct_interior_point(delta, &normal.unwrap_or(e1), kappa)?;
            json!({ "certificate": c })
        }
    };
    let holds = report["certificate"]["holds"].as_bool().unwrap_or(false);
    Ok(Outcome::new(verdict(holds), tagged(Command::Interior, report)?))
}

#[derive(Deserialize)]
struct SurfaceParams {
    profile: Profile,
    normal: Vec3,
    shear: Vec3,
    epsilon: Option<f64>,
    #[serde(default = "default_radius")]
    radius: f64,
}

fn default_radius() -> f64 {
    1.0
}

/// Output of `interior`, accepted as input to `surface`.
#[derive(Deserialize)]
struct CertificateFeed {
    certificate: InteriorPointCertificate,
    profile: Option<Profile>,
    radius: Option<f64>,
}

fn cmd_surface(params: Value, common: &CommonArgs) -> Result<Outcome> {
    let tol = tolerance(common, 1e-12)?;
    let (surface_params, cert) = if params.get("certificate").is_some() {
        let feed: CertificateFeed = parse(params)?;
        let cert = feed.certificate;
        if !cert.holds {
            bail!("certificate does not hold (lhs {} >= eps {})", cert.lhs, cert.epsilon);
        }
        let epsilon = certificate_epsilon(&cert);
        let a = cert.shear.norm();
        let profile = feed.profile.unwrap_or_else(|| {
            let unit = Profile::GaussBump { scale: 1.0 }.sup_derivative();
            let limit = epsilon / (a * a);
            Profile::GaussBump { scale: 0.5 * limit / unit }
        });
        let p = SurfaceParams {
            profile,
            normal: cert.normal,
            shear: cert.shear,
            epsilon: Some(epsilon),
            radius: feed.radius.unwrap_or_else(default_radius),
        };
        (p, Some(cert))
    } else {
        (parse::<SurfaceParams>(params)?, None)
    };
    let p = surface_params;
    let surface = match build_surface(&p.normal, &p.shear, p.profile, p.epsilon, p.radius) {
        Ok(s) => s,
        Err(e @ (SurfaceError::BoundViolated { .. } | SurfaceError::PlanarProfile)) => {
            let kind = match e {
                SurfaceError::BoundViolated { .. } => "bound-violated",
                _ => "planar-profile",
            };
            let mut out = Outcome::new(
                EXIT_NEGATIVE,
                tagged(Command::Surface, json!({ "verdict": kind, "message": e.to_string() }))?,
            );
            out.note = Some(e.to_string());
            return Ok(out);
        }
        Err(e) => return Err(e.into()),
    };
    let mesh = mesh_interface(&surface, common.resolution)?;
    let predicate = cert.as_ref().map(|c| certificate_predicate(c, 1e-10));
    let mut report = verify_compatibility(
        &surface,
        &mesh,
        predicate.as_ref().map(|f| f as &dyn Fn(&Mat3) -> bool),
    )?;
    let paths = path_continuity_check(&surface, &mesh, common.trials, common.steps, common.seed)?;
    report.path_continuity_residual = Some(paths.residual);
    let chords = chord_control(&surface, &mesh, common.trials, common.steps, common.seed, 1e-4)?;
    let passes = report.passes(tol);

    let mut obj = Vec::new();
    write_obj(&mesh, &mut obj)?;
    let mut csv = Vec::new();
    write_residual_csv(&vertex_residuals(&surface, &mesh)?, &mut csv)?;
    let value = tagged(
        Command::Surface,
        json!({
            "verdict": if passes { "compatible" } else { "incompatible" },
            "tolerance": tol,
            "resolution": common.resolution,
            "surface": surface,
            "compatibility": report,
            "paths": paths,
            "chord_control": chords,
        }),
    )?;
    let mut out = Outcome::new(verdict(passes), value);
    out.artifacts.push(("surface.obj".into(), obj));
    out.artifacts.push(("residuals.csv".into(), csv));
    Ok(out)
}

fn cmd_cualni(params: Option<Value>) -> Result<Outcome> {
    let lattice = match params {
        Some(v) => match v.get("lattice") {
            Some(l) => parse(l.clone())?,
            None => parse(v)?,
        },
        None => LatticeParams::CUALNI,
    };
    let r = run_case(&lattice)?;
    Ok(Outcome::new(verdict(r.holds), tagged(Command::Cualni, &r)?))
}

#[derive(Deserialize)]
struct VolfracParams {
    #[serde(flatten)]
    coefficients: VolumeFractionCoefficients,
    #[serde(rename = "Lambda", alias = "big_lambda")]
    big_lambda: f64,
}

fn cmd_volfrac(params: Value) -> Result<Outcome> {
    let p: VolfracParams = parse(params)?;
    let roots = volume_fraction_roots(&p.coefficients, p.big_lambda)?;
    let value = tagged(
        Command::Volfrac,
        json!({
            "Lambda": p.big_lambda,
            "rhs": p.coefficients.rhs(p.big_lambda)?,
            "roots": roots,
        }),
    )?;
    Ok(Outcome::new(verdict(!roots.is_empty()), value))
}

/// Serializes a report with a trailing newline.
pub fn render(report: &Value) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)? + "\n")
}

fn write_artifacts(dir: &Path, outcome: &Outcome, command: Command) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let report_name = format!("{}.json", command.name());
    fs::write(dir.join(report_name), render(&outcome.report)?)?;
    for (name, bytes) in &outcome.artifacts {
        fs::write(dir.join(name), bytes).with_context(|| format!("writing {name}"))?;
    }
    Ok(())
}

/// Entry point used by the binary. Returns the process exit code.
pub fn run(cli: Cli) -> u8 {
    let result = execute(cli.command, &cli.common).and_then(|outcome| {
        if let Some(dir) = &cli.common.out {
            write_artifacts(dir, &outcome, cli.command)?;
        }
        print!("{}", render(&outcome.report)?);
        if let Some(note) = &outcome.note {
            eprintln!("{note}");
        }
        Ok(outcome.code)
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    }
}
