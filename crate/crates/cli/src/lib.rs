//! Command-line front end and HTTP preview service for `pantomorph` lenses.
//!
//! [`cli_main`] runs one command and returns its exit code: 0 on success,
//! 1 for invalid parameters or usage, 2 for file and I/O failures.

use std::ffi::OsString;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use pantomorph::chromatic::ChromaticParams;
use pantomorph::distortion::{distorted_raymap, DistortionParams};
use pantomorph::io::{read_stmap, write_raymap, write_stmap};
use pantomorph::mapgen::{apply_stmap, raymap_to_stmap};
use pantomorph::profile::{lookup_preset, preset_registry, LensProfile};
use pantomorph::projection::{aov_from_focal, frame_aov, KVector, LensParams, ReferenceAxis};
use pantomorph::raster::{RgbRaster, RgbaRaster};
use pantomorph::remap::{render_projection, Panorama, RenderOptions};

pub mod service;
pub mod store;

/// Spectral sample count used when only `--dispersion` is given.
pub const DEFAULT_SAMPLES: u32 = 16;
/// Frame shape assumed by `aov` without `--size`.
pub const DEFAULT_ASPECT: f64 = 16.0 / 9.0;
pub const DEFAULT_ADDR: &str = "127.0.0.1:8080";
pub const ADDR_ENV: &str = "PANTOMORPH_ADDR";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Lens(#[from] pantomorph::Error),
    #[error("{}: {message}", path.display())]
    File { path: PathBuf, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Lens(e) if e.is_io() => 2,
            CliError::Lens(_) => 1,
            CliError::File { .. } => 2,
        }
    }

    fn file(path: &Path, message: impl ToString) -> Self {
        CliError::File {
            path: path.to_path_buf(),
            message: message.to_string(),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "pantomorph", version, about = "Anamorphic azimuthal lens maps and renders")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the per-pixel primary rays of a lens (EXR or PFM plus a JSON sidecar).
    Raymap(MapArgs),
    /// Write an ST-map relative to a rectilinear frame of the lens's angle of view.
    Stmap(MapArgs),
    /// Render a lens view of an equirectangular panorama, or apply an ST-map to an image.
    Remap(RemapArgs),
    /// Print the horizontal, vertical and diagonal angles of view.
    Aov(AovArgs),
    /// List or show the built-in presets.
    Preset {
        #[command(subcommand)]
        action: PresetAction,
    },
    /// Check a lens-profile file.
    Validate { path: PathBuf },
    /// Start the HTTP preview service.
    Serve(ServeArgs),
}

#[derive(Subcommand, Debug)]
enum PresetAction {
    List,
    Show { name: String },
}

#[derive(Args, Debug, Clone, Default)]
pub struct LensArgs {
    /// Lens-profile JSON file to start from.
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// Built-in preset to start from.
    #[arg(long)]
    pub preset: Option<String>,
    /// Projection factors `kx,ky[,kz]`, each in [-1, 1].
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<String>,
    /// Angle of view in degrees along the reference axis.
    #[arg(long, allow_hyphen_values = true)]
    pub fov: Option<f64>,
    /// Focal length.
    #[arg(long, allow_hyphen_values = true)]
    pub focal: Option<f64>,
    /// Reference axis, `h` or `v`.
    #[arg(long = "ref-axis")]
    pub ref_axis: Option<String>,
    /// Apply vignetting.
    #[arg(long)]
    pub vignette: bool,
    /// Chromatic-aberration dispersion.
    #[arg(long, allow_hyphen_values = true)]
    pub dispersion: Option<f64>,
    /// Spectral sample count (even, ≥ 2).
    #[arg(long)]
    pub samples: Option<u32>,
}

#[derive(Args, Debug)]
struct MapArgs {
    #[command(flatten)]
    lens: LensArgs,
    /// Map size `WxH`.
    #[arg(long, value_parser = parse_size)]
    size: (usize, usize),
    /// Output path (`.exr` or `.pfm`).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct RemapArgs {
    #[command(flatten)]
    lens: LensArgs,
    /// Equirectangular panorama, or the source image when `--stmap` is given.
    #[arg(long)]
    input: PathBuf,
    /// ST-map to apply instead of rendering a lens.
    #[arg(long)]
    stmap: Option<PathBuf>,
    /// Output size `WxH` (lens rendering only).
    #[arg(long, value_parser = parse_size)]
    size: Option<(usize, usize)>,
    /// Output image (`.png` or `.exr`).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct AovArgs {
    #[command(flatten)]
    lens: LensArgs,
    /// Frame size `WxH`; only its aspect ratio matters.
    #[arg(long, value_parser = parse_size)]
    size: Option<(usize, usize)>,
}

#[derive(Args, Debug)]
struct ServeArgs {
    /// Port to listen on; overrides the port of the bind address.
    #[arg(long)]
    port: Option<u16>,
}

pub fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("size {s:?} is not WxH"))?;
    let w: usize = w.trim().parse().map_err(|_| format!("width {w:?} is not a positive integer"))?;
    let h: usize = h.trim().parse().map_err(|_| format!("height {h:?} is not a positive integer"))?;
    if w == 0 || h == 0 {
        return Err(format!("size {s:?} has no pixels"));
    }
    Ok((w, h))
}

/// Parses `kx,ky[,kz]`.
pub fn parse_k(s: &str) -> Result<KVector, pantomorph::Error> {
    let values: Vec<f64> = s
        .split(',')
        .map(|c| c.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| pantomorph::Error::Invalid {
            field: "k".into(),
            message: format!("{s:?} is not a comma-separated list of numbers"),
        })?;
    KVector::from_slice(&values)
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Builds the lens profile described by the flags: a profile file or preset
/// as the base, with individual flags overriding it.
pub fn resolve_profile(args: &LensArgs) -> CliResult<LensProfile> {
    if args.fov.is_some() && args.focal.is_some() {
        return Err(usage("--fov and --focal are mutually exclusive; give one of them"));
    }
    let base = match (&args.profile, &args.preset) {
        (Some(_), Some(_)) => return Err(usage("--profile and --preset are mutually exclusive")),
        (Some(path), None) => Some(LensProfile::load(path)?),
        (None, Some(name)) => Some(lookup_preset(name).ok_or_else(|| unknown_preset(name))?),
        (None, None) => None,
    };
    let axis = match &args.ref_axis {
        Some(a) => ReferenceAxis::parse(a)?,
        None => base.as_ref().map_or(ReferenceAxis::Horizontal, |b| b.lens.reference_axis()),
    };
    let k = match &args.k {
        Some(k) => parse_k(k)?,
        None => match &base {
            Some(b) => b.lens.k(),
            None => return Err(usage("no lens given: use --k with --fov or --focal, --profile or --preset")),
        },
    };
    let lens = match (args.fov, args.focal, &base) {
        (Some(fov), _, _) => LensParams::with_aov(k, fov.to_radians(), axis)?,
        (None, Some(focal), _) => LensParams::with_focal(k, focal, axis)?,
        (None, None, Some(b)) => LensParams::new(k, b.lens.focal_reciprocal(), axis)?,
        (None, None, None) => return Err(usage("no focal length given: use --fov or --focal")),
    };
    let mut profile = match base {
        Some(mut b) => {
            b.lens = lens;
            b
        }
        None => LensProfile::new("custom", lens),
    };
    profile.vignette |= args.vignette;
    if args.samples.is_some() || args.dispersion.is_some() {
        let current = profile.chromatic;
        let samples = args.samples.or(current.map(|c| c.samples)).unwrap_or(DEFAULT_SAMPLES);
        let dispersion = args.dispersion.or(current.map(|c| c.dispersion)).unwrap_or(0.0);
        profile.chromatic = Some(ChromaticParams::new(samples, dispersion)?);
    }
    profile.validate()?;
    Ok(profile)
}

fn unknown_preset(name: &str) -> CliError {
    let names: Vec<String> = preset_registry().into_iter().map(|p| p.name).collect();
    usage(format!("unknown preset {name:?}; available: {}", names.join(", ")))
}

/// Angle of view along the reference axis, in radians.
fn reference_aov(lens: &LensParams) -> pantomorph::Result<f64> {
    let k = match lens.reference_axis() {
        ReferenceAxis::Horizontal => lens.k().kx(),
        ReferenceAxis::Vertical => lens.k().ky(),
    };
    aov_from_focal(lens.focal_reciprocal(), k)
}

fn format_angle(label: &str, omega: Option<f64>) -> String {
    match omega {
        Some(o) => format!("{label}={:.1}°", o.to_degrees()),
        None => format!("{label}=outside the projection field"),
    }
}

pub fn save_rgba(image: &RgbaRaster, path: &Path) -> CliResult<()> {
    let result = match extension(path).as_str() {
        "png" => image.to_rgba8().save(path),
        "exr" => image.to_rgba32f().save(path),
        other => return Err(usage(format!("unsupported output format {other:?}; use .png or .exr"))),
    };
    result.map_err(|e| CliError::file(path, e))
}

fn save_rgb(image: &RgbRaster, path: &Path) -> CliResult<()> {
    let result = match extension(path).as_str() {
        "png" => image.to_rgb8().save(path),
        "exr" => image.to_rgb32f().save(path),
        other => return Err(usage(format!("unsupported output format {other:?}; use .png or .exr"))),
    };
    result.map_err(|e| CliError::file(path, e))
}

fn extension(path: &Path) -> String {
    path.extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase()
}

fn load_rgb(path: &Path) -> CliResult<RgbRaster> {
    let image = image::open(path).map_err(|e| CliError::file(path, e))?;
    Ok(RgbRaster::from_image(&image))
}

fn lens_raymap(profile: &LensProfile, size: (usize, usize)) -> pantomorph::Result<pantomorph::mapgen::RayMap> {
    let none = DistortionParams::default();
    let distortion = profile.distortion.as_ref().unwrap_or(&none);
    distorted_raymap(size.0, size.1, &profile.lens, distortion)
}

/// Bind address from `PANTOMORPH_ADDR` (default `127.0.0.1:8080`), with the
/// port optionally replaced.
pub fn bind_address(env_value: Option<&str>, port: Option<u16>) -> CliResult<SocketAddr> {
    let text = env_value.unwrap_or(DEFAULT_ADDR);
    let mut addr: SocketAddr = text
        .parse()
        .map_err(|_| usage(format!("{ADDR_ENV}={text:?} is not an address like 127.0.0.1:8080")))?;
    if let Some(port) = port {
        addr.set_port(port);
    }
    Ok(addr)
}

fn run(cli: Cli, out: &mut dyn Write) -> CliResult<()> {
    let mut say = |line: String| {
        let _ = writeln!(out, "{line}");
    };
    match cli.command {
        Command::Raymap(args) => {
            let profile = resolve_profile(&args.lens)?;
            let map = lens_raymap(&profile, args.size)?;
            write_raymap(&map, &args.out)?;
            say(format!("wrote {}", args.out.display()));
        }
        Command::Stmap(args) => {
            let profile = resolve_profile(&args.lens)?;
            let omega = reference_aov(&profile.lens)?;
            let map = lens_raymap(&profile, args.size)?;
            let st = raymap_to_stmap(&map, omega, profile.lens.reference_axis())?;
            write_stmap(&st, &args.out)?;
            say(format!("wrote {} ({:.1}° reference frame)", args.out.display(), omega.to_degrees()));
        }
        Command::Remap(args) => {
            let input = load_rgb(&args.input)?;
            if let Some(map_path) = &args.stmap {
                let map = read_stmap(map_path)?;
                save_rgb(&apply_stmap(&input, &map), &args.out)?;
            } else {
                let profile = resolve_profile(&args.lens)?;
                let (w, h) = args.size.ok_or_else(|| usage("remap needs --size WxH (or --stmap)"))?;
                let pano = Panorama::new(input)?;
                let options = RenderOptions {
                    lens: profile.lens,
                    distortion: profile.distortion.clone(),
                    vignette: profile.vignette,
                    chromatic: profile.chromatic,
                };
                save_rgba(&render_projection(&pano, w, h, &options)?, &args.out)?;
            }
            say(format!("wrote {}", args.out.display()));
        }
        Command::Aov(args) => {
            let profile = resolve_profile(&args.lens)?;
            let aspect = args.size.map_or(DEFAULT_ASPECT, |(w, h)| w as f64 / h as f64);
            let aov = frame_aov(&profile.lens, aspect)?;
            say(format_angle("Ω_h", aov.horizontal));
            say(format_angle("Ω_v", aov.vertical));
            say(format_angle("Ω_d", aov.diagonal));
        }
        Command::Preset { action: PresetAction::List } => {
            for p in preset_registry() {
                let content = p.metadata.get("content").cloned().unwrap_or_default();
                say(format!(
                    "{:<13} k={:?} f={} {content}",
                    p.name,
                    p.lens.k().to_vec(),
                    (p.lens.focal() * 1e9).round() / 1e9
                ));
            }
        }
        Command::Preset { action: PresetAction::Show { name } } => {
            let p = lookup_preset(&name).ok_or_else(|| unknown_preset(&name))?;
            let _ = write!(out, "{}", p.to_json());
        }
        Command::Validate { path } => {
            let p = LensProfile::load(&path)?;
            say(format!("{}: ok ({})", path.display(), p.name));
        }
        Command::Serve(args) => {
            let env = std::env::var(ADDR_ENV).ok();
            let addr = bind_address(env.as_deref(), args.port)?;
            let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::file(Path::new("runtime"), e))?;
            say(format!("listening on http://{addr}"));
            runtime
                .block_on(service::serve(addr))
                .map_err(|e| CliError::file(Path::new(&addr.to_string()), e))?;
        }
    }
    Ok(())
}

/// Runs the command line `args` (including the program name), writing normal
/// output to `out` and diagnostics to `err`. Returns the exit code.
pub fn cli_main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    1
                }
            };
        }
    };
    match run(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    cli_main_with(args, &mut std::io::stdout(), &mut std::io::stderr())
}
