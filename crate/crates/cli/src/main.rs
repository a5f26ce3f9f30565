//! `loomscan` command-line front end.

mod overlay;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use loomscan::defect::{analyze_defects, annotate, CannyParams, DefectParams, DefectReport, EdgeMethod, DEFAULT_MIN_DEFECT_SIZE};
use loomscan::density::{measure_density, measure_density_binary, DensityParams, DEFAULT_STANDARD_LINES};
use loomscan::imgcore::io::{read_gray, read_rgb, write_binary, write_gray, write_rgb};
use loomscan::imgcore::{BinaryImage, GrayImage, Illumination, NiblackParams};
use loomscan::metrics::{fabric_metrics, FabricMetrics};
use loomscan::spectral::DEFAULT_BAND_HALF_WIDTH;
use loomscan::synthgen::{inject_defect, render_fabric, render_uniform_cloth, DefectKind, Rect, SynthSpec, DEFAULT_SCALE};
use loomscan::weave::{analyze_weave, yarn_outlines, WeaveMatrix, WeaveOptions};
use loomscan::wiener::{binarize_sub_image, decompose, YarnAxis, YarnOutlines};
use loomscan::{DensityResult, Error, VerifyReport};

#[derive(Parser)]
#[command(name = "loomscan", version, about = "Woven fabric image analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Warp/weft thread density from spectral reconstruction and Niblack thresholding.
    Density(DensityArgs),
    /// Wiener decomposition into warp and weft sub-images with yarn outlines.
    Decompose(DecomposeArgs),
    /// Weave pattern recognition.
    Pattern(PatternArgs),
    /// Yarn diameter, spacing, count and cover factors.
    Metrics(MetricsArgs),
    /// Defect segmentation and percent-defective report.
    Defect(DefectArgs),
    /// Render a synthetic fabric with optional injected defect.
    Synth(SynthArgs),
    /// Replay the reference fixtures and the synthetic acceptance suite.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    Warp,
    Weft,
    Both,
}

impl AxisArg {
    fn axes(self) -> Vec<YarnAxis> {
        match self {
            AxisArg::Warp => vec![YarnAxis::Warp],
            AxisArg::Weft => vec![YarnAxis::Weft],
            AxisArg::Both => vec![YarnAxis::Warp, YarnAxis::Weft],
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PolarityArg {
    Transmitted,
    Reflected,
}

impl From<PolarityArg> for Illumination {
    fn from(p: PolarityArg) -> Self {
        match p {
            PolarityArg::Transmitted => Illumination::Transmitted,
            PolarityArg::Reflected => Illumination::Reflected,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Canny,
    Sobel,
    Prewitt,
}

impl From<MethodArg> for EdgeMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Canny => EdgeMethod::Canny,
            MethodArg::Sobel => EdgeMethod::Sobel,
            MethodArg::Prewitt => EdgeMethod::Prewitt,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum WeaveArg {
    Plain,
    Twill,
    Satin,
}

#[derive(Clone, Copy, ValueEnum)]
enum DefectArg {
    Hole,
    Stain,
    Slub,
    Float,
}

#[derive(Args)]
struct Common {
    /// Directory for the JSON report and images. Without it the report goes
    /// to stdout only.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DensityArgs {
    input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SCALE)]
    scale: f64,
    #[arg(long, value_enum, default_value = "both")]
    axis: AxisArg,
    #[arg(long, default_value_t = 0.2)]
    niblack_k: f64,
    #[arg(long, default_value_t = 33)]
    niblack_window: usize,
    #[arg(long, default_value_t = DEFAULT_BAND_HALF_WIDTH)]
    band_halfwidth: usize,
    #[arg(long, default_value_t = DEFAULT_STANDARD_LINES)]
    lines: usize,
    /// Treat the input as an already thresholded yarn/gap image
    /// (pixels above 127 are 1).
    #[arg(long)]
    binary: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct DecomposeArgs {
    input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SCALE)]
    scale: f64,
    #[arg(long, value_enum, default_value = "both")]
    axis: AxisArg,
    #[arg(long, value_enum, default_value = "transmitted")]
    polarity: PolarityArg,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct PatternArgs {
    input: PathBuf,
    #[arg(long, value_enum, default_value = "transmitted")]
    polarity: PolarityArg,
    /// Swap warp-over and weft-over in the cross-over matrix.
    #[arg(long)]
    invert: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct MetricsArgs {
    input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SCALE)]
    scale: f64,
    #[arg(long, value_enum, default_value = "transmitted")]
    polarity: PolarityArg,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct DefectArgs {
    input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_MIN_DEFECT_SIZE)]
    min_size: usize,
    #[arg(long, value_enum, default_value = "canny")]
    method: MethodArg,
    #[arg(long, value_enum, default_value = "transmitted")]
    polarity: PolarityArg,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_enum, default_value = "plain")]
    weave: WeaveArg,
    /// threads/cm
    #[arg(long, default_value_t = 30.0)]
    warp_density: f64,
    /// threads/cm
    #[arg(long, default_value_t = 30.0)]
    weft_density: f64,
    /// mm; defaults to 0.6 of the spacing
    #[arg(long)]
    warp_width: Option<f64>,
    /// mm; defaults to 0.6 of the spacing
    #[arg(long)]
    weft_width: Option<f64>,
    #[arg(long, default_value_t = 512)]
    width: usize,
    #[arg(long, default_value_t = 384)]
    height: usize,
    #[arg(long, default_value_t = DEFAULT_SCALE)]
    scale: f64,
    #[arg(long, value_enum, default_value = "transmitted")]
    polarity: PolarityArg,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum)]
    defect: Option<DefectArg>,
    /// x,y,width,height in pixels
    #[arg(long, value_parser = parse_rect, default_value = "234,170,44,45")]
    defect_region: Rect,
    /// Fill level for holes (default: gap level) or darkening for stains.
    #[arg(long)]
    defect_level: Option<u8>,
    /// Render a textureless cloth at this level instead of woven fabric
    /// (defect fixtures). Noise and seed still apply.
    #[arg(long)]
    cloth_level: Option<u8>,
    /// File stem of the outputs.
    #[arg(long, default_value = "fabric")]
    name: String,
    /// Output directory (required).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
}

fn parse_rect(s: &str) -> Result<Rect, String> {
    let v: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    match v[..] {
        [x, y, w, h] => Ok(Rect::new(x, y, w, h)),
        _ => Err("expected x,y,width,height".into()),
    }
}

/// Invalid invocation or unreadable input.
const EXIT_INVALID: u8 = 2;
/// Well-formed input the pipeline could not measure.
const EXIT_UNMEASURABLE: u8 = 1;

fn exit_code(e: &Error) -> u8 {
    if e.is_measurement_failure() {
        EXIT_UNMEASURABLE
    } else {
        EXIT_INVALID
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Density(a) => run_density(a),
        Command::Decompose(a) => run_decompose(a),
        Command::Pattern(a) => run_pattern(a),
        Command::Metrics(a) => run_metrics(a),
        Command::Defect(a) => run_defect(a),
        Command::Synth(a) => run_synth(a),
        Command::Verify(a) => run_verify(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("loomscan: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

type Run = loomscan::Result<u8>;

fn prepare_out(dir: &Option<PathBuf>) -> loomscan::Result<()> {
    if let Some(d) = dir {
        std::fs::create_dir_all(d)?;
    }
    Ok(())
}

/// Prints the report and writes it to `<out>/<name>.json` when an output
/// directory is set.
fn emit<T: Serialize>(report: &T, out: &Option<PathBuf>, name: &str) -> loomscan::Result<()> {
    let json = serde_json::to_string_pretty(report).map_err(|e| Error::InvalidState(e.to_string()))? + "\n";
    match std::io::stdout().write_all(json.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
        _ => {}
    }
    if let Some(d) = out {
        std::fs::write(d.join(format!("{name}.json")), json)?;
    }
    Ok(())
}

fn stem(p: &Path) -> String {
    p.file_stem().map_or_else(|| "image".into(), |s| s.to_string_lossy().into_owned())
}

fn input_name(p: &Path) -> String {
    p.display().to_string()
}

fn existing(path: &Path) -> loomscan::Result<&Path> {
    if path.is_file() {
        Ok(path)
    } else {
        Err(Error::InvalidInput(format!("{}: no such file", path.display())))
    }
}

fn read_scaled(path: &Path, scale: f64) -> loomscan::Result<GrayImage> {
    read_gray(existing(path)?)?.with_scale(scale)
}

#[derive(Serialize)]
struct DensityReport {
    input: String,
    scale_cm_per_px: f64,
    mode: &'static str,
    results: Vec<DensityResult>,
}

fn run_density(a: DensityArgs) -> Run {
    let img = read_scaled(&a.input, a.scale)?;
    let params = DensityParams {
        niblack: NiblackParams::new(a.niblack_window, a.niblack_window, a.niblack_k)?,
        band_half_width: a.band_halfwidth,
        lines: a.lines,
    };
    prepare_out(&a.common.out)?;
    let mut results = Vec::new();
    if a.binary {
        let bin = BinaryImage::from_fn(img.width(), img.height(), |x, y| img.get(x, y) > 127)?.with_scale(img.scale());
        for axis in a.axis.axes() {
            results.push(measure_density_binary(&bin, axis, a.lines)?);
        }
    } else {
        for axis in a.axis.axes() {
            results.push(measure_density(&img, axis, &params)?);
        }
    }
    let report = DensityReport {
        input: input_name(&a.input),
        scale_cm_per_px: a.scale,
        mode: if a.binary { "binary" } else { "spectral" },
        results,
    };
    emit(&report, &a.common.out, "density")?;
    Ok(0)
}

#[derive(Serialize)]
struct DecomposeReport {
    input: String,
    illumination: Illumination,
    outlines: Vec<YarnOutlines>,
}

fn run_decompose(a: DecomposeArgs) -> Run {
    let img = read_scaled(&a.input, a.scale)?;
    let ill: Illumination = a.polarity.into();
    prepare_out(&a.common.out)?;
    let (warp, weft) = yarn_outlines(&img, ill)?;
    let mut outlines = Vec::new();
    for axis in a.axis.axes() {
        let o = if axis == YarnAxis::Warp { &warp } else { &weft };
        if let Some(dir) = &a.common.out {
            let sub = decompose(&img, axis)?;
            let name = format!("{}_{}", stem(&a.input), axis);
            write_gray(dir.join(format!("{name}.png")), &sub)?;
            write_binary(dir.join(format!("{name}_binary.png")), &binarize_sub_image(&sub, ill)?)?;
            write_rgb(dir.join(format!("{name}_outlines.png")), &overlay::outlines(&img, o))?;
        }
        outlines.push(o.clone());
    }
    let report = DecomposeReport { input: input_name(&a.input), illumination: ill, outlines };
    emit(&report, &a.common.out, "decompose")?;
    Ok(0)
}

#[derive(Serialize)]
struct PatternReport {
    input: String,
    illumination: Illumination,
    class: String,
    confidence: f64,
    face: Option<loomscan::weave::Face>,
    repeat_tile: WeaveMatrix,
    crossover_matrix: WeaveMatrix,
    warp_yarns: usize,
    weft_yarns: usize,
}

fn run_pattern(a: PatternArgs) -> Run {
    let img = read_gray(existing(&a.input)?)?;
    let ill: Illumination = a.polarity.into();
    prepare_out(&a.common.out)?;
    let r = analyze_weave(&img, &WeaveOptions { illumination: ill, invert_crossovers: a.invert })?;
    if let Some(dir) = &a.common.out {
        write_rgb(dir.join(format!("{}_pattern.png", stem(&a.input))), &overlay::crossovers(&img, &r.grid, &r.matrix))?;
    }
    let report = PatternReport {
        input: input_name(&a.input),
        illumination: ill,
        class: r.pattern.class.to_string(),
        confidence: r.pattern.confidence,
        face: r.pattern.face,
        repeat_tile: r.pattern.repeat_tile.clone(),
        crossover_matrix: r.matrix.clone(),
        warp_yarns: r.warp.len(),
        weft_yarns: r.weft.len(),
    };
    emit(&report, &a.common.out, "pattern")?;
    Ok(0)
}

#[derive(Serialize)]
struct MetricsReport {
    input: String,
    scale_cm_per_px: f64,
    illumination: Illumination,
    metrics: FabricMetrics,
}

fn run_metrics(a: MetricsArgs) -> Run {
    let img = read_scaled(&a.input, a.scale)?;
    let ill: Illumination = a.polarity.into();
    prepare_out(&a.common.out)?;
    let (warp, weft) = yarn_outlines(&img, ill)?;
    let report = MetricsReport {
        input: input_name(&a.input),
        scale_cm_per_px: a.scale,
        illumination: ill,
        metrics: fabric_metrics(&warp, &weft)?,
    };
    emit(&report, &a.common.out, "metrics")?;
    Ok(0)
}

#[derive(Serialize)]
struct DefectCliReport {
    input: String,
    method: EdgeMethod,
    illumination: Illumination,
    edge_pixels: usize,
    report: DefectReport,
}

fn run_defect(a: DefectArgs) -> Run {
    let rgb = read_rgb(existing(&a.input)?)?;
    let params = DefectParams {
        min_size: a.min_size,
        method: a.method.into(),
        illumination: a.polarity.into(),
        canny: CannyParams::default(),
    };
    prepare_out(&a.common.out)?;
    let r = analyze_defects(&rgb, &params)?;
    if let Some(dir) = &a.common.out {
        let marked = annotate(&r.preprocessed.gray, &r.edges, &r.report.regions);
        write_rgb(dir.join(format!("{}_defects.png", stem(&a.input))), &marked)?;
    }
    let report = DefectCliReport {
        input: input_name(&a.input),
        method: params.method,
        illumination: params.illumination,
        edge_pixels: r.edges.count_ones(),
        report: r.report,
    };
    emit(&report, &a.common.out, "defect")?;
    Ok(0)
}

#[derive(Serialize)]
struct InjectedDefect {
    kind: DefectKind,
    region: Rect,
    level: u8,
    mask: String,
    mask_pixels: usize,
}

#[derive(Serialize)]
struct SynthSidecar {
    image: String,
    /// `None` for woven fabric.
    cloth_level: Option<u8>,
    spec: SynthSpec,
    warp_threads_per_cm: f64,
    weft_threads_per_cm: f64,
    warp_spacing_mm: f64,
    weft_spacing_mm: f64,
    repeat_tile: WeaveMatrix,
    defect: Option<InjectedDefect>,
}

fn run_synth(a: SynthArgs) -> Run {
    let tile = match a.weave {
        WeaveArg::Plain => WeaveMatrix::plain(),
        WeaveArg::Twill => WeaveMatrix::twill31(),
        WeaveArg::Satin => WeaveMatrix::satin5(2)?,
    };
    let mut spec = SynthSpec::new(tile, a.warp_density, a.weft_density)
        .with_illumination(a.polarity.into())
        .with_noise(a.noise, a.seed)
        .with_size(a.width, a.height);
    spec.scale = a.scale;
    if let Some(w) = a.warp_width {
        spec.warp_width = w;
    }
    if let Some(w) = a.weft_width {
        spec.weft_width = w;
    }
    let (ws, fs) = spec.spacing_mm();
    let mut img = match a.cloth_level {
        Some(level) => render_uniform_cloth(a.width, a.height, level, a.noise, a.seed)?.with_scale(a.scale)?,
        None => render_fabric(&spec)?,
    };
    std::fs::create_dir_all(&a.out)?;
    let image_name = format!("{}.png", a.name);
    let defect = match a.defect {
        None => None,
        Some(kind) => {
            let kind = match kind {
                DefectArg::Hole => DefectKind::Hole,
                DefectArg::Stain => DefectKind::Stain,
                DefectArg::Slub => DefectKind::Slub,
                DefectArg::Float => DefectKind::Float,
            };
            let level = a.defect_level.unwrap_or(if kind == DefectKind::Hole { spec.levels.gap } else { 60 });
            let (with_defect, mask) = inject_defect(&img, &spec, kind, a.defect_region, level)?;
            img = with_defect;
            let mask_name = format!("{}_mask.png", a.name);
            write_binary(a.out.join(&mask_name), &mask)?;
            Some(InjectedDefect { kind, region: a.defect_region, level, mask: mask_name, mask_pixels: mask.count_ones() })
        }
    };
    write_gray(a.out.join(&image_name), &img)?;
    let sidecar = SynthSidecar {
        image: image_name,
        cloth_level: a.cloth_level,
        warp_threads_per_cm: spec.warp_density,
        weft_threads_per_cm: spec.weft_density,
        warp_spacing_mm: ws,
        weft_spacing_mm: fs,
        repeat_tile: spec.weave.clone(),
        spec,
        defect,
    };
    emit(&sidecar, &Some(a.out.clone()), &a.name)?;
    Ok(0)
}

fn run_verify(a: VerifyArgs) -> Run {
    prepare_out(&a.common.out)?;
    let report: VerifyReport = loomscan::verify();
    for c in &report.checks {
        eprintln!("{} [{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.criterion, c.name, c.detail);
    }
    emit(&report, &a.common.out, "verify")?;
    Ok(if report.all_passed { 0 } else { EXIT_UNMEASURABLE })
}
