//! Subcommands and their flags.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sfs_core::energy::PenaliserKind;
use sfs_core::forward_model::{add_gaussian_noise, generate_scene, irradiance_from_levels, quantise_8bit, shade};
use sfs_core::metrics::{
    relative_image_error, relative_image_error_masked, relative_surface_error, relative_surface_error_masked,
    surface_error_map, DEFAULT_MAP_THRESHOLD,
};
use sfs_core::solver::{reconstruct, InitialGuess, ReconstructionResult, Scheme, SolverConfig};
use sfs_core::{CameraIntrinsics, ScalarField, SceneSpec};

use crate::error::CliError;
use crate::manifest::Manifest;
use crate::pnm::{read_pfm, read_pgm, write_pfm, write_pgm};

/// Images above this many pixels make the full scheme impractically slow.
const FULL_SCHEME_WARN_PIXELS: usize = 64 * 64;

#[derive(Debug, Parser)]
#[command(name = "sfs", version, about = "Perspective shape from shading")]
pub struct Cli {
    /// Worker threads for pixel-parallel loops (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a synthetic scene to an 8-bit image and its ground-truth depth.
    Render(RenderArgs),
    /// Add seeded Gaussian noise to an 8-bit image.
    Noise(NoiseArgs),
    /// Reconstruct depth from a single image.
    Reconstruct(ReconstructArgs),
    /// Compare a reconstruction with ground truth.
    Evaluate(EvaluateArgs),
}

/// `WIDTHxHEIGHT`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Size {
    pub width: usize,
    pub height: usize,
}

impl FromStr for Size {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (w, h) = s.split_once(['x', 'X']).ok_or("expected WIDTHxHEIGHT")?;
        let width = w.trim().parse().map_err(|_| format!("bad width {w:?}"))?;
        let height = h.trim().parse().map_err(|_| format!("bad height {h:?}"))?;
        Ok(Size { width, height })
    }
}

impl fmt::Display for Size {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

/// `CX,CY` in pixels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl FromStr for Point {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s.split_once(',').ok_or("expected CX,CY")?;
        let x = a.trim().parse().map_err(|_| format!("bad coordinate {a:?}"))?;
        let y = b.trim().parse().map_err(|_| format!("bad coordinate {b:?}"))?;
        Ok(Point { x, y })
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.x, self.y)
    }
}

/// A non-negative integer that also accepts scientific notation such as `1e6`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Count(pub usize);

impl FromStr for Count {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Ok(n) = s.parse::<usize>() {
            return Ok(Count(n));
        }
        let v: f64 = s.parse().map_err(|_| format!("not a number: {s:?}"))?;
        if v < 0.0 || v.fract() != 0.0 || v > 1e15 {
            return Err(format!("not a non-negative integer: {s:?}"));
        }
        Ok(Count(v as usize))
    }
}

impl fmt::Display for Count {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug, Args)]
pub struct IntrinsicsArgs {
    #[arg(long, default_value_t = 1.0)]
    pub focal: f64,
    /// Pixel spacing on the image plane (both axes unless --hy is given).
    #[arg(long, default_value_t = 0.005)]
    pub h: f64,
    #[arg(long)]
    pub hy: Option<f64>,
    /// Principal point in pixels (default: image centre).
    #[arg(long)]
    pub pp: Option<Point>,
}

impl IntrinsicsArgs {
    pub fn resolve(&self, width: usize, height: usize) -> Result<CameraIntrinsics, CliError> {
        let pp = self.pp.unwrap_or(Point {
            x: width as f64 / 2.0,
            y: height as f64 / 2.0,
        });
        CameraIntrinsics::new(self.focal, self.h, self.hy.unwrap_or(self.h), pp.x, pp.y)
            .map_err(|e| CliError::Usage(e.to_string()))
    }

    fn record(&self, m: &mut Manifest) {
        m.set_arg("focal", self.focal);
        m.set_arg("h", self.h);
        if let Some(hy) = self.hy {
            m.set_arg("hy", hy);
        }
        if let Some(pp) = self.pp {
            m.set_arg("pp", pp);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SceneKind {
    Sombrero,
    Plane,
    Hemisphere,
}

#[derive(Clone, Debug, Args)]
pub struct RenderArgs {
    #[arg(long, value_enum)]
    pub scene: SceneKind,
    #[arg(long)]
    pub size: Size,
    #[command(flatten)]
    pub intrinsics: IntrinsicsArgs,
    /// Depth of the plane, or of the background plane for the hemisphere.
    #[arg(long, default_value_t = 2.0)]
    pub z0: f64,
    /// Hemisphere radius.
    #[arg(long, default_value_t = 0.3)]
    pub radius: f64,
    /// Output 8-bit image (PGM).
    #[arg(long)]
    pub image: PathBuf,
    /// Output ground-truth depth (PFM).
    #[arg(long)]
    pub depth: PathBuf,
    /// Output manifest (default: image path with extension `manifest`).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Clone, Debug, Args)]
pub struct NoiseArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Standard deviation in 8-bit levels.
    #[arg(long)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Full,
    Simplified,
    Alternating,
}

impl fmt::Display for SchemeArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.to_possible_value().expect("no skipped variants").get_name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PenaliserArg {
    Charbonnier,
    Quadratic,
}

impl fmt::Display for PenaliserArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.to_possible_value().expect("no skipped variants").get_name())
    }
}

/// `data` or a positive plane depth.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InitArg(pub InitialGuess);

impl FromStr for InitArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "data" {
            return Ok(InitArg(InitialGuess::DataTerm));
        }
        s.parse()
            .map(|z| InitArg(InitialGuess::Plane(z)))
            .map_err(|_| format!("expected `data` or a plane depth, got {s:?}"))
    }
}

impl fmt::Display for InitArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            InitialGuess::DataTerm => f.write_str("data"),
            InitialGuess::Plane(z) => write!(f, "{z}"),
        }
    }
}

#[derive(Clone, Debug, Args)]
pub struct ReconstructArgs {
    /// Input 8-bit image (PGM).
    #[arg(long)]
    pub image: PathBuf,
    /// Levels per unit irradiance, as recorded by `render`.
    #[arg(long)]
    pub irradiance_scale: f64,
    #[command(flatten)]
    pub intrinsics: IntrinsicsArgs,
    /// Confidence mask (PGM, level/255).
    #[arg(long)]
    pub mask: Option<PathBuf>,
    #[arg(long, default_value_t = 7.5e-5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1e-2)]
    pub tau: f64,
    /// Step of the full scheme (default: tau times the squared grid spacing).
    #[arg(long)]
    pub tau_full: Option<f64>,
    /// Iterations per pyramid level.
    #[arg(long, default_value = "1e6")]
    pub iters: Count,
    #[arg(long, default_value_t = 0.8)]
    pub eta: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub lambda: f64,
    #[arg(long, value_enum, default_value_t = PenaliserArg::Charbonnier)]
    pub penaliser: PenaliserArg,
    #[arg(long, value_enum, default_value_t = SchemeArg::Alternating)]
    pub scheme: SchemeArg,
    /// Initial depth: `data` or a plane depth such as `10`.
    #[arg(long, default_value = "data")]
    pub init: InitArg,
    #[arg(long, default_value_t = 8)]
    pub min_level: usize,
    /// Output depth (PFM).
    #[arg(long)]
    pub depth: PathBuf,
    /// Output reprojected image (PGM, same irradiance scale as the input).
    #[arg(long)]
    pub reprojection: Option<PathBuf>,
    /// Output energy trace (CSV).
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

impl ReconstructArgs {
    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            alpha: self.alpha,
            tau: self.tau,
            iterations: self.iters.0,
            eta: self.eta,
            scheme: match self.scheme {
                SchemeArg::Full => Scheme::Full,
                SchemeArg::Simplified => Scheme::Simplified,
                SchemeArg::Alternating => Scheme::Alternating,
            },
            penaliser: match self.penaliser {
                PenaliserArg::Charbonnier => PenaliserKind::Charbonnier { lambda: self.lambda },
                PenaliserArg::Quadratic => PenaliserKind::Quadratic,
            },
            min_level_size: self.min_level,
            initial_guess: self.init.0,
            tau_full: self.tau_full,
        }
    }
}

#[derive(Clone, Debug, Args)]
pub struct EvaluateArgs {
    /// Reconstructed depth (PFM).
    #[arg(long)]
    pub depth: PathBuf,
    /// Ground-truth depth (PFM).
    #[arg(long)]
    pub gt_depth: PathBuf,
    /// Reprojected image (PGM).
    #[arg(long)]
    pub reprojection: Option<PathBuf>,
    /// Ground-truth image (PGM).
    #[arg(long)]
    pub gt_image: Option<PathBuf>,
    #[command(flatten)]
    pub intrinsics: IntrinsicsArgs,
    /// Confidence mask; adds masked errors to the report.
    #[arg(long)]
    pub mask: Option<PathBuf>,
    /// Output error map (PGM); pixels at or above the threshold are white.
    #[arg(long)]
    pub error_map: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MAP_THRESHOLD)]
    pub threshold: f64,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

fn manifest_path(explicit: &Option<PathBuf>, output: &Path) -> PathBuf {
    explicit.clone().unwrap_or_else(|| output.with_extension("manifest"))
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn read_mask(path: &Path, width: usize, height: usize) -> Result<ScalarField, CliError> {
    let levels = read_pgm(path)?;
    if levels.width() != width || levels.height() != height {
        return Err(usage(format!(
            "mask is {}x{}, image is {width}x{height}",
            levels.width(),
            levels.height()
        )));
    }
    Ok(levels.map(|l| l / 255.0)?)
}

pub fn render(args: &RenderArgs) -> Result<Manifest, CliError> {
    let start = Instant::now();
    let Size { width, height } = args.size;
    let k = args.intrinsics.resolve(width, height)?;
    let spec = match args.scene {
        SceneKind::Sombrero => SceneSpec::Sombrero,
        SceneKind::Plane => SceneSpec::Plane { z0: args.z0 },
        SceneKind::Hemisphere => SceneSpec::Hemisphere {
            depth: args.z0,
            radius: args.radius,
        },
    };
    let depth = generate_scene(&spec, &k, width, height).map_err(|e| usage(e.to_string()))?;
    let irradiance = shade(&depth, &k)?;
    let q = quantise_8bit(&irradiance)?;
    write_pgm(&args.image, &q.levels)?;
    write_pfm(&args.depth, &depth)?;

    let mut m = Manifest::new("render");
    m.set_arg("scene", args.scene.to_possible_value().expect("no skipped variants").get_name());
    m.set_arg("size", args.size);
    args.intrinsics.record(&mut m);
    m.set_arg("z0", args.z0);
    m.set_arg("radius", args.radius);
    m.set_arg("image", path_str(&args.image));
    m.set_arg("depth", path_str(&args.depth));
    m.set("irradiance_scale", q.scale);
    m.set("max_irradiance", irradiance.max());
    m.set("duration_s", start.elapsed().as_secs_f64());
    m.write(&manifest_path(&args.manifest, &args.image))?;
    Ok(m)
}

pub fn noise(args: &NoiseArgs) -> Result<Manifest, CliError> {
    let start = Instant::now();
    if !(args.sigma >= 0.0 && args.sigma.is_finite()) {
        return Err(usage(format!("sigma must be non-negative, got {}", args.sigma)));
    }
    let levels = read_pgm(&args.input)?;
    let noisy = add_gaussian_noise(&levels, args.sigma, args.seed)?;
    write_pgm(&args.output, &noisy)?;

    let mut m = Manifest::new("noise");
    m.set_arg("input", path_str(&args.input));
    m.set_arg("sigma", args.sigma);
    m.set_arg("seed", args.seed);
    m.set_arg("output", path_str(&args.output));
    m.set("seed", args.seed);
    m.set("duration_s", start.elapsed().as_secs_f64());
    m.write(&manifest_path(&args.manifest, &args.output))?;
    Ok(m)
}

fn write_trace(path: &Path, result: &ReconstructionResult) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(out, "iteration,level,energy").map_err(io)?;
    for level in &result.energy_trace {
        for (it, e) in &level.samples {
            writeln!(out, "{it},{},{e}", level.level).map_err(io)?;
        }
    }
    out.flush().map_err(io)
}

pub fn reconstruct_cmd(args: &ReconstructArgs) -> Result<(Manifest, ReconstructionResult), CliError> {
    let start = Instant::now();
    if !(args.irradiance_scale > 0.0 && args.irradiance_scale.is_finite()) {
        return Err(usage("--irradiance-scale must be positive"));
    }
    let cfg = args.solver_config();
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    let levels = read_pgm(&args.image)?;
    let (w, h) = (levels.width(), levels.height());
    let k = args.intrinsics.resolve(w, h)?;
    let confidence = match &args.mask {
        Some(p) => read_mask(p, w, h)?,
        None => ScalarField::filled(w, h, 1.0)?,
    };
    let image = irradiance_from_levels(&levels, args.irradiance_scale)?;
    let result = reconstruct(&image, &k, &confidence, &cfg)?;

    write_pfm(&args.depth, &result.depth)?;
    if let Some(p) = &args.reprojection {
        write_pgm(p, &result.reprojection.map(|i| (i * args.irradiance_scale).round().clamp(0.0, 255.0))?)?;
    }
    if let Some(p) = &args.trace {
        write_trace(p, &result)?;
    }

    let mut m = Manifest::new("reconstruct");
    m.set_arg("image", path_str(&args.image));
    m.set_arg("irradiance-scale", args.irradiance_scale);
    args.intrinsics.record(&mut m);
    if let Some(p) = &args.mask {
        m.set_arg("mask", path_str(p));
    }
    m.set_arg("alpha", args.alpha);
    m.set_arg("tau", args.tau);
    if let Some(t) = args.tau_full {
        m.set_arg("tau-full", t);
    }
    m.set_arg("iters", args.iters);
    m.set_arg("eta", args.eta);
    m.set_arg("lambda", args.lambda);
    m.set_arg("penaliser", args.penaliser);
    m.set_arg("scheme", args.scheme);
    m.set_arg("init", args.init);
    m.set_arg("min-level", args.min_level);
    m.set_arg("depth", path_str(&args.depth));
    if let Some(p) = &args.reprojection {
        m.set_arg("reprojection", path_str(p));
    }
    if let Some(p) = &args.trace {
        m.set_arg("trace", path_str(p));
    }
    m.set("irradiance_scale", args.irradiance_scale);
    m.set("levels", result.levels);
    if let Some((_, e)) = result.energy_trace.last().and_then(|t| t.samples.last()) {
        m.set("final_energy", e);
    }
    if args.scheme == SchemeArg::Full && w * h > FULL_SCHEME_WARN_PIXELS {
        m.set(
            "warning",
            "the full scheme needs a much smaller time step; expect a runtime orders of magnitude longer than alternating",
        );
    }
    m.set("duration_s", start.elapsed().as_secs_f64());
    m.write(&manifest_path(&args.manifest, &args.depth))?;
    Ok((m, result))
}

/// Errors of one evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub rse: f64,
    pub rie: Option<f64>,
    pub rse_masked: Option<f64>,
    pub rie_masked: Option<f64>,
}

impl fmt::Display for Evaluation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rse={}", self.rse)?;
        if let Some(v) = self.rie {
            writeln!(f, "rie={v}")?;
        }
        if let Some(v) = self.rse_masked {
            writeln!(f, "rse_masked={v}")?;
        }
        if let Some(v) = self.rie_masked {
            writeln!(f, "rie_masked={v}")?;
        }
        Ok(())
    }
}

fn same_size(a: &ScalarField, b: &ScalarField, what: &str) -> Result<(), CliError> {
    if a.same_shape(b) {
        Ok(())
    } else {
        Err(usage(format!(
            "{what}: {}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )))
    }
}

pub fn evaluate(args: &EvaluateArgs) -> Result<Evaluation, CliError> {
    let start = Instant::now();
    let z = read_pfm(&args.depth)?;
    let gt = read_pfm(&args.gt_depth)?;
    same_size(&z, &gt, "depth size mismatch")?;
    let k = args.intrinsics.resolve(gt.width(), gt.height())?;
    let mask = match &args.mask {
        Some(p) => Some(read_mask(p, gt.width(), gt.height())?),
        None => None,
    };
    let images = match (&args.reprojection, &args.gt_image) {
        (Some(a), Some(b)) => {
            let (i, i_gt) = (read_pgm(a)?, read_pgm(b)?);
            same_size(&i, &i_gt, "image size mismatch")?;
            same_size(&i, &gt, "image and depth size mismatch")?;
            Some((i, i_gt))
        }
        (None, None) => None,
        _ => return Err(usage("--reprojection and --gt-image go together")),
    };

    let rse = relative_surface_error(&z, &gt, &k).map_err(|e| usage(e.to_string()))?;
    let rie = images
        .as_ref()
        .map(|(i, g)| relative_image_error(i, g))
        .transpose()
        .map_err(|e| usage(e.to_string()))?;
    let rse_masked = mask
        .as_ref()
        .map(|c| relative_surface_error_masked(&z, &gt, &k, c))
        .transpose()
        .map_err(|e| usage(e.to_string()))?;
    let rie_masked = match (&mask, &images) {
        (Some(c), Some((i, g))) => Some(relative_image_error_masked(i, g, c).map_err(|e| usage(e.to_string()))?),
        _ => None,
    };

    if let Some(p) = &args.error_map {
        let (map, _) = surface_error_map(&z, &gt, &k, args.threshold).map_err(|e| usage(e.to_string()))?;
        let levels = map.map(|e| (255.0 * e / args.threshold).round().clamp(0.0, 255.0))?;
        write_pgm(p, &levels)?;
    }

    let report = Evaluation {
        rse,
        rie,
        rse_masked,
        rie_masked,
    };
    if let Some(p) = &args.manifest {
        let mut m = Manifest::new("evaluate");
        m.set_arg("depth", path_str(&args.depth));
        m.set_arg("gt-depth", path_str(&args.gt_depth));
        if let Some(p) = &args.reprojection {
            m.set_arg("reprojection", path_str(p));
        }
        if let Some(p) = &args.gt_image {
            m.set_arg("gt-image", path_str(p));
        }
        args.intrinsics.record(&mut m);
        if let Some(p) = &args.mask {
            m.set_arg("mask", path_str(p));
        }
        if let Some(p) = &args.error_map {
            m.set_arg("error-map", path_str(p));
        }
        m.set_arg("threshold", args.threshold);
        m.set("rse", rse);
        if let Some(v) = rie {
            m.set("rie", v);
        }
        m.set("duration_s", start.elapsed().as_secs_f64());
        m.write(p)?;
    }
    Ok(report)
}

/// Runs a parsed command line. Output meant for the user goes to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let body = || -> Result<String, CliError> {
        Ok(match &cli.command {
            Command::Render(a) => {
                let m = render(a)?;
                format!("irradiance_scale={}\n", m.get("irradiance_scale").unwrap_or_default())
            }
            Command::Noise(a) => {
                noise(a)?;
                String::new()
            }
            Command::Reconstruct(a) => {
                let (m, _) = reconstruct_cmd(a)?;
                if let Some(w) = m.get("warning") {
                    eprintln!("warning: {w}");
                }
                String::new()
            }
            Command::Evaluate(a) => evaluate(a)?.to_string(),
        })
    };
    let text = match cli.threads {
        Some(0) => return Err(usage("--threads must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| usage(e.to_string()))?
            .install(body)?,
        None => body()?,
    };
    out.write_all(text.as_bytes()).map_err(|source| CliError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    })
}

/// Re-runs the invocation recorded in a manifest.
pub fn rerun(manifest: &Manifest, threads: Option<usize>, out: &mut dyn Write) -> Result<(), CliError> {
    let mut argv = vec!["sfs".to_string()];
    argv.extend(manifest.to_args());
    let mut cli = Cli::try_parse_from(argv).map_err(|e| usage(e.to_string()))?;
    cli.threads = threads;
    run(&cli, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_and_point_parse() {
        assert_eq!("256x128".parse::<Size>().unwrap(), Size { width: 256, height: 128 });
        assert!("256".parse::<Size>().is_err());
        assert_eq!("128,64.5".parse::<Point>().unwrap(), Point { x: 128.0, y: 64.5 });
        let p = Point { x: 0.1, y: -3.0 };
        assert_eq!(p.to_string().parse::<Point>().unwrap(), p);
    }

    #[test]
    fn counts_accept_scientific_notation() {
        assert_eq!("1e6".parse::<Count>().unwrap(), Count(1_000_000));
        assert_eq!("2.5e3".parse::<Count>().unwrap(), Count(2500));
        assert_eq!("42".parse::<Count>().unwrap(), Count(42));
        assert!("1.5".parse::<Count>().is_err());
        assert!("-1".parse::<Count>().is_err());
    }

    #[test]
    fn init_parses() {
        assert_eq!("data".parse::<InitArg>().unwrap().0, InitialGuess::DataTerm);
        assert_eq!("10".parse::<InitArg>().unwrap().0, InitialGuess::Plane(10.0));
        assert!("flat".parse::<InitArg>().is_err());
    }

    #[test]
    fn reconstruct_defaults() {
        let cli = Cli::try_parse_from([
            "sfs",
            "reconstruct",
            "--image",
            "a.pgm",
            "--irradiance-scale",
            "1000",
            "--depth",
            "z.pfm",
        ])
        .unwrap();
        let Command::Reconstruct(a) = cli.command else { panic!() };
        let cfg = a.solver_config();
        assert_eq!(cfg.alpha, 7.5e-5);
        assert_eq!(cfg.tau, 1e-2);
        assert_eq!(cfg.iterations, 1_000_000);
        assert_eq!(cfg.eta, 0.8);
        assert_eq!(cfg.scheme, Scheme::Alternating);
        assert_eq!(cfg.penaliser, PenaliserKind::Charbonnier { lambda: 1e-3 });
    }

    #[test]
    fn irradiance_scale_is_required() {
        assert!(Cli::try_parse_from(["sfs", "reconstruct", "--image", "a.pgm", "--depth", "z.pfm"]).is_err());
    }
}
