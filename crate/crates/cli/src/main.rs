//! `minsurf` — mesh generation, family animation and the verification suite.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 invalid input,
//! 3 I/O failure. `MINSURF_THREADS` caps the worker pool.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use minsurf::families::{family_member, reference_coords, FamilyKind, FamilySpec};
use minsurf::mesh::{mesh_surface, MeshArtifact};
use minsurf::verify::{self, GridSize, VerifyConfig};
use minsurf::weierstrass::{Domain, HolomorphicDatum};
use minsurf::Error;

#[derive(Parser)]
#[command(name = "minsurf", version, about = "Minimal surfaces, drilling/bending contents and bending-neutral deformations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the mesh of one surface as OBJ plus a PLY attribute sidecar.
    Gen(GenArgs),
    /// Write numbered OBJ frames of a one-parameter family and a manifest.
    Animate(AnimateArgs),
    /// Run the verification suite and write a JSON report.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct Common {
    /// JSON configuration file; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Grid size NxM (radial x angular).
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    rmin: Option<f64>,
    #[arg(long)]
    rmax: Option<f64>,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    common: Common,
    /// Catalog specification, e.g. `enneper`, `bour:m=3`, `custom:(0, phi)`.
    #[arg(long)]
    surface: Option<String>,
    /// OBJ path; the PLY sidecar takes the same stem.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AnimateArgs {
    #[command(flatten)]
    common: Common,
    /// bonnet | general | bour-t | catenoid-helicoid
    #[arg(long)]
    family: Option<String>,
    /// Base surface of the family (catalog specification).
    #[arg(long)]
    surface: Option<String>,
    #[arg(long)]
    frames: Option<usize>,
    #[arg(long)]
    outdir: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Grid size NxM; repeat to set the refinement sequence.
    #[arg(long)]
    grid: Vec<String>,
    /// Comma-separated check ids.
    #[arg(long, value_delimiter = ',')]
    check: Vec<String>,
    /// Append one more level with the spacing halved.
    #[arg(long)]
    grid_refinement: bool,
    /// Report path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(untagged)]
enum GridList {
    #[default]
    None,
    One(String),
    Many(Vec<String>),
}

/// Contents of `--config`; every field is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    surface: Option<String>,
    family: Option<FamilySpec>,
    #[serde(default)]
    grid: GridList,
    rmin: Option<f64>,
    rmax: Option<f64>,
    frames: Option<usize>,
    out: Option<PathBuf>,
    outdir: Option<PathBuf>,
    checks: Option<Vec<String>>,
    #[serde(default)]
    grid_refinement: bool,
    seed: Option<u64>,
}

impl FileConfig {
    fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
    }

    fn grids(&self) -> Vec<String> {
        match &self.grid {
            GridList::None => vec![],
            GridList::One(g) => vec![g.clone()],
            GridList::Many(g) => g.clone(),
        }
    }
}

enum Failure {
    Checks(usize),
    Invalid(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(m) => Failure::Io(m),
            other => Failure::Invalid(other.to_string()),
        }
    }
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn grid_size(flag: Option<&String>, file: &FileConfig, default: GridSize) -> Result<GridSize, Failure> {
    match flag.cloned().or_else(|| file.grids().into_iter().next()) {
        Some(text) => Ok(GridSize::parse(&text)?),
        None => Ok(default),
    }
}

fn annulus(common: &Common, file: &FileConfig, rmin: f64) -> Result<Domain, Failure> {
    let rmin = common.rmin.or(file.rmin).unwrap_or(rmin);
    let rmax = common.rmax.or(file.rmax).unwrap_or(1.0);
    Ok(Domain::annulus(rmin, rmax)?)
}

fn cmd_gen(args: GenArgs) -> Result<(), Failure> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let spec = args.surface.or(file.surface.clone()).ok_or_else(|| Failure::Invalid("--surface is required".into()))?;
    let datum = HolomorphicDatum::parse(&spec)?;
    let domain = annulus(&args.common, &file, 0.0)?;
    let size = grid_size(args.common.grid.as_ref(), &file, GridSize::square(128))?;
    let out = args.out.or(file.out).unwrap_or_else(|| PathBuf::from("surface.obj"));

    let (surface, periodic) = mesh_surface(&datum, &domain, size.ns, size.nt)?;
    let mesh = MeshArtifact::from_surface(&surface, &HolomorphicDatum::enneper(), periodic);
    write(&out, &mesh.to_obj())?;
    let ply = out.with_extension("ply");
    write(&ply, &mesh.to_ply())?;
    println!(
        "{}: {} vertices, {} faces{} -> {} (+ {})",
        datum.label,
        mesh.vertices.len(),
        mesh.faces.len(),
        if periodic { ", closed seam" } else { "" },
        out.display(),
        ply.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct FrameEntry {
    index: usize,
    t: f64,
    label: String,
    file: String,
    periodic: bool,
    /// `|r_t(R)|` at the outer reference point.
    scale: f64,
}

#[derive(Serialize)]
struct Manifest {
    spec: FamilySpec,
    domain: Domain,
    grid: GridSize,
    frames: Vec<FrameEntry>,
    timings: Timings,
}

#[derive(Serialize)]
struct Timings {
    compute_seconds: f64,
    write_seconds: f64,
}

fn cmd_animate(args: AnimateArgs) -> Result<(), Failure> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let mut spec = match (&args.family, file.family.clone()) {
        (Some(kind), Some(mut spec)) => {
            spec.kind = kind.parse::<FamilyKind>()?;
            spec
        }
        (Some(kind), None) => FamilySpec::new(kind.parse::<FamilyKind>()?),
        (None, Some(spec)) => spec,
        (None, None) => return Err(Failure::Invalid("--family is required".into())),
    };
    if let Some(base) = args.surface.or(file.surface.clone()) {
        spec.base = Some(base);
    }
    if let Some(frames) = args.frames.or(file.frames) {
        spec.frames = frames;
    }
    spec.validate()?;
    let domain = annulus(&args.common, &file, 0.05)?;
    let size = grid_size(args.common.grid.as_ref(), &file, GridSize::square(64))?;
    let outdir = args.outdir.or(file.outdir.clone()).unwrap_or_else(|| PathBuf::from("frames"));
    spec.check_harmonic_pair(&domain, &domain.grid(size.ns, size.nt)?)?;

    let start = Instant::now();
    let (rs, rt) = reference_coords(&domain);
    let frames: Vec<(FrameEntry, String)> = spec
        .parameters()
        .into_par_iter()
        .enumerate()
        .map(|(index, t)| {
            let datum = family_member(&spec, t)?;
            let (surface, periodic) = mesh_surface(&datum, &domain, size.ns, size.nt)?;
            let mesh = MeshArtifact::from_surface(&surface, &spec.base_datum()?, periodic);
            let entry = FrameEntry {
                index,
                t,
                label: datum.label.clone(),
                file: format!("frame_{index:04}.obj"),
                periodic,
                scale: surface.position_at(rs, rt).norm(),
            };
            Ok((entry, mesh.to_obj()))
        })
        .collect::<Result<_, Error>>()?;
    let compute_seconds = start.elapsed().as_secs_f64();

    let start = Instant::now();
    fs::create_dir_all(&outdir).map_err(|e| Failure::Io(format!("{}: {e}", outdir.display())))?;
    let mut entries = Vec::with_capacity(frames.len());
    for (entry, obj) in frames {
        write(&outdir.join(&entry.file), &obj)?;
        entries.push(entry);
    }
    let timings = Timings { compute_seconds, write_seconds: start.elapsed().as_secs_f64() };
    let count = entries.len();
    let manifest = Manifest { spec, domain, grid: size, frames: entries, timings };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Failure::Io(e.to_string()))?;
    write(&outdir.join("manifest.json"), &json)?;
    println!("{} frames -> {}", count, outdir.display());
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<(), Failure> {
    let file = FileConfig::load(args.config.as_deref())?;
    let mut config = VerifyConfig::default();
    let grids = if args.grid.is_empty() { file.grids() } else { args.grid.clone() };
    if !grids.is_empty() {
        config.grids = grids.iter().map(|g| GridSize::parse(g)).collect::<Result<_, _>>()?;
    }
    if args.grid_refinement || file.grid_refinement {
        let finest = *config.grids.last().expect("non-empty");
        config.grids.push(finest.refined());
    }
    if !args.check.is_empty() {
        config.checks = Some(args.check.clone());
    } else if let Some(checks) = file.checks.clone() {
        config.checks = Some(checks);
    }
    if let Some(seed) = file.seed {
        config.seed = seed;
    }

    let report = verify::run(&config)?;
    for check in &report.checks {
        println!(
            "{:<4} {:<24} max residual {:.3e} (tolerance {:.1e})",
            if check.pass { "PASS" } else { "FAIL" },
            check.check_id,
            check.max_residual,
            check.tolerance
        );
        for d in check.details.iter().filter(|d| !d.pass) {
            println!("       {} [{} {}]: {:e} not in ({:?}, {:?})", d.label, d.surface, d.grid, d.value, d.lower, d.upper);
        }
    }
    println!("{}/{} checks passed", report.summary.passed, report.summary.total);
    let out = args.out.or(file.out).unwrap_or_else(|| PathBuf::from("verify-report.json"));
    let json = serde_json::to_string_pretty(&report).map_err(|e| Failure::Io(e.to_string()))?;
    write(&out, &json)?;
    if report.summary.all_passed {
        Ok(())
    } else {
        Err(Failure::Checks(report.summary.failed))
    }
}

fn init_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("MINSURF_THREADS") else { return Ok(()) };
    let threads = value
        .trim()
        .parse::<usize>()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Invalid(format!("MINSURF_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Invalid(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_threads().and_then(|()| match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Animate(args) => cmd_animate(args),
        Command::Verify(args) => cmd_verify(args),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks(n)) => {
            eprintln!("minsurf: {n} check(s) failed");
            ExitCode::from(1)
        }
        Err(Failure::Invalid(m)) => {
            eprintln!("minsurf: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Io(m)) => {
            eprintln!("minsurf: I/O error: {m}");
            ExitCode::from(3)
        }
    }
}
