//! The `mfusion` command line.
//!
//! Exit codes: 0 success, 1 usage, 2 I/O or file format, 3 dimension or
//! configuration, 4 failed self-check.

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::builder::{PossibleValuesParser, TypedValueParser};
use clap::{Args, Parser, Subcommand};
use mfusion_core::contourlet::{ct_forward, ct_inverse, dfb_analysis, dfb_synthesis, lp_analysis, lp_synthesis};
use mfusion_core::fusion::{fuse, fuse_traced, FusionConfig, Granularity, Method, SelectionChoice};
use mfusion_core::image::pad_replicate;
use mfusion_core::metrics::{fusion_rmse, spatial_frequency};
use mfusion_core::synth::{make_pair, test_chart, FocusMask};
use mfusion_core::wavelet::{dwt2, idwt2, WaveletFilter};
use mfusion_core::Image;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::bench::{self, thread_cap};
use crate::pnm::{load_pnm, quantized, save_pnm, write_atomic, PnmError};
use crate::table::{fmt_sig, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_INVALID: i32 = 3;
pub const EXIT_CHECK_FAILED: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "mfusion", version, about = "Multifocus image fusion toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fuse two registered grayscale images.
    Fuse(FuseArgs),
    /// Generate a multifocus pair from a ground truth.
    Synth(SynthArgs),
    /// Score a fused image against its inputs.
    Metrics(MetricsArgs),
    /// Run all four methods on a synthetic pair and tabulate their errors.
    Bench(BenchArgs),
    /// Verify transform reconstruction and the spatial-frequency measure.
    Selfcheck(SelfcheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Dims(usize, usize);

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.0, self.1)
    }
}

fn parse_pair(s: &str, allow_single: bool) -> Result<Dims, String> {
    let number = |t: &str| t.trim().parse::<usize>().ok().filter(|&n| n > 0);
    match s.split_once(['x', 'X']) {
        Some((a, b)) => match (number(a), number(b)) {
            (Some(a), Some(b)) => Ok(Dims(a, b)),
            _ => Err(format!("expected two positive integers as HxW, got '{s}'")),
        },
        None if allow_single => number(s).map(|n| Dims(n, n)).ok_or_else(|| format!("expected M or MxN, got '{s}'")),
        None => Err(format!("expected HxW, got '{s}'")),
    }
}

fn parse_dims(s: &str) -> Result<Dims, String> {
    parse_pair(s, false)
}

fn parse_block(s: &str) -> Result<Dims, String> {
    parse_pair(s, true)
}

fn method_parser() -> impl TypedValueParser<Value = Method> {
    PossibleValuesParser::new(Method::ALL.map(Method::id)).map(|s| s.parse::<Method>().expect("listed method"))
}

fn granularity_parser() -> impl TypedValueParser<Value = Granularity> {
    PossibleValuesParser::new(["block", "subband"]).map(|s| s.parse::<Granularity>().expect("listed granularity"))
}

fn filter_parser() -> impl TypedValueParser<Value = WaveletFilter> {
    PossibleValuesParser::new(["haar", "d4"]).map(|s| s.parse::<WaveletFilter>().expect("listed filter"))
}

fn mask_parser() -> impl TypedValueParser<Value = FocusMask> {
    PossibleValuesParser::new(["vhalf", "hhalf", "disk"]).map(|s| match s.as_str() {
        "vhalf" => FocusMask::VerticalHalf,
        "hhalf" => FocusMask::HorizontalHalf,
        _ => FocusMask::CENTERED_DISK,
    })
}

#[derive(Debug, Args)]
struct FuseArgs {
    #[arg(short, long, value_parser = method_parser())]
    method: Method,
    /// Block size M or MxN.
    #[arg(short, long, value_name = "M[xN]", default_value = "8", value_parser = parse_block)]
    block: Dims,
    /// Selection threshold.
    #[arg(short, long, value_name = "TH", default_value_t = 1.75, allow_hyphen_values = true)]
    threshold: f64,
    #[arg(long, value_name = "K", default_value_t = 1)]
    wavelet_levels: usize,
    #[arg(long, value_name = "NAME", default_value = "haar", value_parser = filter_parser())]
    wavelet_filter: WaveletFilter,
    #[arg(long, value_name = "P", default_value_t = 1)]
    lp_levels: usize,
    /// Directional depth per pyramid level, finest first (default: 3 at every level).
    #[arg(long, value_name = "l1,l2,...", value_delimiter = ',')]
    dfb_depths: Option<Vec<usize>>,
    #[arg(long, default_value = "block", value_parser = granularity_parser())]
    granularity: Granularity,
    a: PathBuf,
    b: PathBuf,
    #[arg(short, long, value_name = "OUT")]
    output: PathBuf,
}

impl FuseArgs {
    fn config(&self) -> FusionConfig {
        FusionConfig {
            method: self.method,
            block_rows: self.block.0,
            block_cols: self.block.1,
            threshold: self.threshold,
            wavelet_levels: self.wavelet_levels,
            wavelet_filter: self.wavelet_filter,
            pyr_levels: self.lp_levels,
            dfb_depths: self.dfb_depths.clone().unwrap_or_else(|| vec![3; self.lp_levels]),
            granularity: self.granularity,
        }
    }
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Ground-truth image.
    #[arg(long, value_name = "GT")]
    gt: Option<PathBuf>,
    /// Generate a test chart of this size instead.
    #[arg(long, value_name = "HxW", value_parser = parse_dims)]
    chart: Option<Dims>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[command(flatten)]
    source: Source,
    /// Seed for the test chart.
    #[arg(long, value_name = "S", default_value_t = 0, requires = "chart")]
    seed: u64,
    #[arg(long, value_parser = mask_parser())]
    mask: FocusMask,
    /// Blur standard deviation in pixels.
    #[arg(long, value_name = "F")]
    sigma: f64,
    #[arg(long, value_name = "A")]
    out_a: PathBuf,
    #[arg(long, value_name = "B")]
    out_b: PathBuf,
    /// Also write the ground truth used.
    #[arg(long, value_name = "GT")]
    out_gt: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MetricsArgs {
    #[arg(long, num_args = 2, value_names = ["A", "B"], required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, value_name = "F")]
    fused: PathBuf,
    #[arg(long, value_name = "GT")]
    ground_truth: Option<PathBuf>,
    #[arg(long, value_name = "OUT")]
    csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, value_name = "S", default_value_t = 0, requires = "chart")]
    seed: u64,
    #[arg(long, default_value = "vhalf", value_parser = mask_parser())]
    mask: FocusMask,
    #[arg(long, value_name = "F")]
    sigma: f64,
    #[arg(long, value_name = "OUT")]
    csv: PathBuf,
    /// Directory for the ground truth, the pair and the four fused images.
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SelfcheckArgs {
    #[arg(long, value_name = "HxW", default_value = "128x128", value_parser = parse_dims)]
    size: Dims,
    #[arg(long, value_name = "N", default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
}

#[derive(Debug)]
enum Failure {
    Io(String),
    Invalid(String),
    Check(usize),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Io(_) => EXIT_IO,
            Failure::Invalid(_) => EXIT_INVALID,
            Failure::Check(_) => EXIT_CHECK_FAILED,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Io(m) | Failure::Invalid(m) => f.write_str(m),
            Failure::Check(n) => write!(f, "{n} self-check(s) failed"),
        }
    }
}

impl From<PnmError> for Failure {
    fn from(e: PnmError) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<mfusion_core::Error> for Failure {
    fn from(e: mfusion_core::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn load(path: &Path) -> Result<Image, Failure> {
    load_pnm(path).map_err(|e| match e {
        PnmError::Format { .. } => Failure::Io(format!("{}: {e}", path.display())),
        other => other.into(),
    })
}

fn save(img: &Image, path: &Path) -> Outcome {
    Ok(save_pnm(img, path)?)
}

fn save_text(path: &Path, text: &str) -> Outcome {
    write_atomic(path, text.as_bytes()).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn out_line(out: &mut dyn Write, line: fmt::Arguments<'_>) -> Outcome {
    writeln!(out, "{line}").map_err(|e| Failure::Io(format!("stdout: {e}")))
}

fn load_source(source: &Source, seed: u64) -> Result<Image, Failure> {
    match (&source.gt, source.chart) {
        (Some(path), _) => load(path),
        (None, Some(Dims(h, w))) => Ok(test_chart(h, w, seed)?),
        (None, None) => unreachable!("clap requires one source"),
    }
}

fn dims(img: &Image) -> Dims {
    Dims(img.height(), img.width())
}

/// Parses `args` (program name first) and runs the subcommand, printing to stdout and stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().ansi().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    let result = match &cli.command {
        Command::Fuse(a) => cmd_fuse(a, out),
        Command::Synth(a) => cmd_synth(a, out),
        Command::Metrics(a) => cmd_metrics(a, out),
        Command::Bench(a) => cmd_bench(a, out),
        Command::Selfcheck(a) => cmd_selfcheck(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "mfusion: error: {f}");
            f.code()
        }
    }
}

fn cmd_fuse(args: &FuseArgs, out: &mut dyn Write) -> Outcome {
    let cfg = args.config();
    cfg.validate()?;
    let a = load(&args.a)?;
    let b = load(&args.b)?;
    let fused = fuse_traced(&a, &b, &cfg)?;
    save(&fused.image, &args.output)?;
    let t = &fused.trace;
    let decisions = if t.total() == 0 {
        String::new()
    } else {
        format!(
            ", {} decisions: A {} / B {} / average {}",
            t.total(),
            t.count(SelectionChoice::TakeA),
            t.count(SelectionChoice::TakeB),
            t.count(SelectionChoice::Average)
        )
    };
    out_line(out, format_args!("wrote {} ({}, {}{decisions})", args.output.display(), dims(&fused.image), cfg.method))
}

fn cmd_synth(args: &SynthArgs, out: &mut dyn Write) -> Outcome {
    let gt = quantized(&load_source(&args.source, args.seed)?);
    let (a, b) = make_pair(&gt, args.mask, args.sigma)?;
    let mut outputs = vec![(&args.out_a, quantized(&a)), (&args.out_b, quantized(&b))];
    if let Some(path) = &args.out_gt {
        outputs.push((path, gt));
    }
    for (path, img) in &outputs {
        save(img, path)?;
        out_line(out, format_args!("wrote {} ({})", path.display(), dims(img)))?;
    }
    Ok(())
}

fn cmd_metrics(args: &MetricsArgs, out: &mut dyn Write) -> Outcome {
    let a = load(&args.inputs[0])?;
    let b = load(&args.inputs[1])?;
    let f = load(&args.fused)?;
    let mut report = fusion_rmse(&a, &b, &f)?.with_spatial_frequency(&a, &b, &f);
    if let Some(path) = &args.ground_truth {
        report = report.with_ground_truth(&f, &load(path)?)?;
    }
    let sf = |v: Option<mfusion_core::metrics::SfValue>| fmt_sig(v.map_or(0.0, |v| v.sf));
    let rmse_gt = report.rmse_gt.map_or_else(String::new, fmt_sig);
    let mut line =
        format!("rmse1={} rmse2={} rmse={}", fmt_sig(report.rmse1), fmt_sig(report.rmse2), fmt_sig(report.rmse));
    if report.rmse_gt.is_some() {
        line.push_str(&format!(" rmse_gt={rmse_gt}"));
    }
    line.push_str(&format!(" sf_a={} sf_b={} sf_f={}", sf(report.sf_a), sf(report.sf_b), sf(report.sf_f)));
    out_line(out, format_args!("{line}"))?;
    if let Some(path) = &args.csv {
        let mut table = Table::new(&["rmse1", "rmse2", "rmse", "rmse_gt", "sf_a", "sf_b", "sf_f"]);
        table.push(vec![
            fmt_sig(report.rmse1),
            fmt_sig(report.rmse2),
            fmt_sig(report.rmse),
            rmse_gt,
            sf(report.sf_a),
            sf(report.sf_b),
            sf(report.sf_f),
        ]);
        save_text(path, &table.render())?;
        out_line(out, format_args!("wrote {}", path.display()))?;
    }
    Ok(())
}

fn cmd_bench(args: &BenchArgs, out: &mut dyn Write) -> Outcome {
    let gt = load_source(&args.source, args.seed)?;
    let run = bench::run(&gt, args.mask, args.sigma, thread_cap())?;
    for r in &run.results {
        let m = &r.metrics;
        out_line(
            out,
            format_args!(
                "{:<14} rmse1={} rmse2={} rmse={} rmse_gt={}",
                r.method.id(),
                fmt_sig(m.rmse1),
                fmt_sig(m.rmse2),
                fmt_sig(m.rmse),
                m.rmse_gt.map_or_else(String::new, fmt_sig)
            ),
        )?;
    }
    if let Some(dir) = &args.out_dir {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
        let mut images = vec![("gt".to_string(), &run.gt), ("a".to_string(), &run.a), ("b".to_string(), &run.b)];
        images.extend(run.results.iter().map(|r| (r.method.id().to_string(), &r.fused)));
        for (name, img) in images {
            let path = dir.join(format!("{name}.pgm"));
            save(img, &path)?;
            out_line(out, format_args!("wrote {} ({})", path.display(), dims(img)))?;
        }
    }
    save_text(&args.csv, &bench::csv(&run.results).render())?;
    out_line(out, format_args!("wrote {} ({} methods)", args.csv.display(), run.results.len()))
}

fn random_image(h: usize, w: usize, rng: &mut ChaCha8Rng) -> Image {
    Image::from_fn(h, w, |_, _| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 255.0)
}

/// Spatial frequency evaluated term by term with 1-based indices.
fn sf_by_definition(block: &Image) -> f64 {
    let (m_max, n_max) = block.dims();
    let f = |m: usize, n: usize| block[(m - 1, n - 1)];
    let mut rf = 0.0;
    for m in 1..=m_max {
        for n in 2..=n_max {
            rf += (f(m, n) - f(m, n - 1)).powi(2);
        }
    }
    let mut cf = 0.0;
    for n in 1..=n_max {
        for m in 2..=m_max {
            cf += (f(m, n) - f(m - 1, n)).powi(2);
        }
    }
    let mn = (m_max * n_max) as f64;
    (rf / mn + cf / mn).sqrt()
}

struct Check {
    name: &'static str,
    tolerance: f64,
    worst: f64,
}

impl Check {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Check { name, tolerance, worst: 0.0 }
    }

    fn record(&mut self, err: f64) {
        self.worst = if err.is_nan() { f64::NAN } else { self.worst.max(err) };
    }

    fn passed(&self) -> bool {
        self.worst <= self.tolerance
    }
}

fn cmd_selfcheck(args: &SelfcheckArgs, out: &mut dyn Write) -> Outcome {
    let Dims(h, w) = args.size;
    let mut checks = [
        Check::new("haar dwt reconstruction (levels 1-3)", 1e-9),
        Check::new("d4 dwt reconstruction (levels 1-3)", 1e-9),
        Check::new("laplacian pyramid reconstruction (levels 1-3)", 1e-12),
        Check::new("directional filter bank reconstruction (depths 1-3)", 1e-9),
        Check::new("contourlet reconstruction (1,[3]) and (2,[2,3])", 1e-9),
        Check::new("spatial frequency against definition (8x8 blocks)", 1e-12),
        Check::new("fusion of an image with itself (all methods)", 1e-6),
    ];
    let blocks_per_trial = 1000usize.div_ceil(args.trials as usize);
    for trial in 0..args.trials {
        let mut rng = ChaCha8Rng::seed_from_u64(trial);
        let x = random_image(h, w, &mut rng);
        for levels in 1..=3 {
            let haar = dwt2(&x, levels, WaveletFilter::Haar)?;
            checks[0].record(idwt2(&haar)?.max_abs_diff(&x));
            let d4 = dwt2(&x, levels, WaveletFilter::Daubechies4)?;
            checks[1].record(idwt2(&d4)?.max_abs_diff(&x));
            checks[2].record(lp_synthesis(&lp_analysis(&x, levels)?)?.max_abs_diff(&x));
        }
        let padded = pad_replicate(&x, (h.div_ceil(8) * 8, w.div_ceil(8) * 8))?;
        for depth in 1..=3 {
            checks[3].record(dfb_synthesis(&dfb_analysis(&padded, depth)?)?.max_abs_diff(&padded));
        }
        for (pyr, depths) in [(1, &[3][..]), (2, &[2, 3][..])] {
            checks[4].record(ct_inverse(&ct_forward(&x, pyr, depths)?)?.max_abs_diff(&x));
        }
        for _ in 0..blocks_per_trial {
            let block = random_image(8, 8, &mut rng);
            checks[5].record((spatial_frequency(&block).sf - sf_by_definition(&block)).abs());
        }
        for method in Method::ALL {
            checks[6].record(fuse(&x, &x, &FusionConfig::with_method(method))?.max_abs_diff(&x));
        }
    }
    let mut failed = 0;
    for c in &checks {
        let verdict = if c.passed() { "PASS" } else { "FAIL" };
        failed += usize::from(!c.passed());
        out_line(out, format_args!("{verdict} {} (max error {:.3e}, tolerance {:.0e})", c.name, c.worst, c.tolerance))?;
    }
    out_line(
        out,
        format_args!("{}/{} checks passed on {h}x{w}, {} trial(s)", checks.len() - failed, checks.len(), args.trials),
    )?;
    if failed > 0 {
        return Err(Failure::Check(failed));
    }
    Ok(())
}
