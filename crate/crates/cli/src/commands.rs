use std::fmt;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use depthfill::image::gradient_histogram;
use depthfill::io::{read_image, read_mask, write_image, write_mask, ImageFormat};
use depthfill::lowrank::solve_lr;
use depthfill::mask::{gen_random_mask, load_textual_mask};
use depthfill::metrics::{format_psnr, psnr_on_mask};
use depthfill::{solve, solve_from, EvalReport, Mask, Method, SolverConfig};
use rayon::prelude::*;

use crate::args::{EvalArgs, InpaintArgs, MaskArgs, MaskType, StatsArgs, SweepParam};
use crate::manifest::Manifest;

/// Failure classes, each with its own exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or inputs that do not fit together.
    Usage(String),
    /// Unreadable, unwritable or malformed files.
    Io(String),
    /// A solver produced non-finite values.
    Divergence(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Io(_) => 2,
            Failure::Divergence(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "error: {m}"),
            Failure::Io(m) => write!(f, "I/O error: {m}"),
            Failure::Divergence(m) => write!(f, "solver diverged: {m}"),
        }
    }
}

impl From<depthfill::Error> for Failure {
    fn from(e: depthfill::Error) -> Self {
        use depthfill::Error as E;
        match e {
            E::Io(_) | E::Format(_) => Failure::Io(e.to_string()),
            E::Divergence(_) => Failure::Divergence(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn read_with_context<T>(
    what: &str,
    path: &Path,
    f: impl FnOnce(&Path) -> depthfill::Result<T>,
) -> Result<T, Failure> {
    f(path).map_err(|e| match Failure::from(e) {
        Failure::Io(m) => Failure::Io(format!("{what} '{}': {m}", path.display())),
        other => other,
    })
}

fn output_format(path: &Path) -> Result<ImageFormat, Failure> {
    ImageFormat::from_path(path).map_err(|e| Failure::Usage(e.to_string()))
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".manifest");
    PathBuf::from(s)
}

fn write_text(path: &Path, text: &str) -> CmdResult {
    fs::write(path, text).map_err(|e| Failure::Io(format!("'{}': {e}", path.display())))
}

pub fn inpaint(args: InpaintArgs) -> CmdResult {
    let started = Instant::now();
    let format = output_format(&args.output)?;
    let cfg = args.solver.config(args.method.into());
    cfg.validate()?;

    let input = read_with_context("input", &args.input, |p| read_image(p))?;
    let mask = read_with_context("mask", &args.mask, |p| read_mask(p))?;
    mask.matches(&input)?;
    let gt = match &args.gt {
        Some(p) => {
            let gt = read_with_context("ground truth", p, |p| read_image(p))?;
            mask.matches(&gt)?;
            Some(gt)
        }
        None => None,
    };

    let (out, state) = solve(&input, &mask, &cfg)?;
    write_image(&out, &args.output, format)?;

    let mut m = Manifest::new("inpaint");
    m.push_path("input", &args.input);
    m.push_path("mask", &args.mask);
    m.push_path("output", &args.output);
    if let Some(p) = &args.gt {
        m.push_path("gt", p);
    }
    m.extend(cfg.to_key_values());
    m.push("width", input.width());
    m.push("height", input.height());
    m.push("missing_pixels", mask.missing_count());
    m.push("outer_iterations", state.iter);
    m.push("converged", state.converged);
    m.push("rel_change", format!("{:e}", state.rel_change));
    m.push("primal_residual", format!("{:e}", state.primal_residual()));
    if let Some(gt) = &gt {
        m.extend(EvalReport::evaluate(gt, &out, &mask, cfg.alpha)?.to_key_values());
    }
    m.push("wall_clock_secs", format!("{:.3}", started.elapsed().as_secs_f64()));
    let path = args.manifest.clone().unwrap_or_else(|| sidecar(&args.output));
    write_text(&path, &m.render())
}

pub fn mask(args: MaskArgs) -> CmdResult {
    let started = Instant::now();
    let format = output_format(&args.output)?;
    let size = match (&args.like, args.width, args.height) {
        (Some(p), None, None) => {
            let img = read_with_context("reference image", p, |p| read_image(p))?;
            Some((img.width(), img.height()))
        }
        (None, Some(w), Some(h)) => Some((w, h)),
        (None, None, None) => None,
        _ => {
            return Err(Failure::Usage(
                "give either --like or both --width and --height".into(),
            ))
        }
    };

    let mut m = Manifest::new("mask");
    let mask = match args.kind {
        MaskType::Random => {
            let rate = args
                .rate
                .ok_or_else(|| Failure::Usage("--type random needs --rate".into()))?;
            let (w, h) = size.ok_or_else(|| {
                Failure::Usage("--type random needs --like or --width/--height".into())
            })?;
            m.push("type", "random");
            m.push("rate", rate);
            gen_random_mask(w, h, rate, args.seed)?
        }
        MaskType::Text => {
            let stencil = args
                .stencil
                .as_ref()
                .ok_or_else(|| Failure::Usage("--type text needs --stencil".into()))?;
            let mask = read_with_context("stencil", stencil, |p| load_textual_mask(p))?;
            if let Some((w, h)) = size {
                if (w, h) != (mask.width(), mask.height()) {
                    return Err(Failure::Usage(format!(
                        "stencil is {}x{}, expected {w}x{h}",
                        mask.width(),
                        mask.height()
                    )));
                }
            }
            m.push("type", "text");
            m.push_path("stencil", stencil);
            mask
        }
    };
    write_mask(&mask, &args.output, format)?;

    m.push("seed", args.seed);
    m.push("width", mask.width());
    m.push("height", mask.height());
    m.push("missing_pixels", mask.missing_count());
    m.push_path("output", &args.output);
    m.push("wall_clock_secs", format!("{:.3}", started.elapsed().as_secs_f64()));
    let path = args.manifest.clone().unwrap_or_else(|| sidecar(&args.output));
    write_text(&path, &m.render())
}

fn append_csv(path: &Path, header: &str, row: &str) -> CmdResult {
    let fresh = fs::metadata(path).map(|md| md.len() == 0).unwrap_or(true);
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Failure::Io(format!("'{}': {e}", path.display())))?;
    let mut text = String::new();
    if fresh {
        text.push_str(header);
        text.push('\n');
    }
    text.push_str(row);
    text.push('\n');
    f.write_all(text.as_bytes())?;
    Ok(())
}

pub fn eval(args: EvalArgs) -> CmdResult {
    let started = Instant::now();
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(Failure::Usage(format!("alpha must lie in (0, 1), got {}", args.alpha)));
    }
    let gt = read_with_context("ground truth", &args.gt, |p| read_image(p))?;
    let result = read_with_context("result", &args.result, |p| read_image(p))?;
    let mask = read_with_context("mask", &args.mask, |p| read_mask(p))?;
    let report = EvalReport::evaluate(&gt, &result, &mask, args.alpha)?;

    if let Some(csv) = &args.csv {
        let row = report.csv_row(&args.result.display().to_string());
        append_csv(csv, EvalReport::CSV_HEADER, &row)?;
    }

    let mut m = Manifest::new("eval");
    m.push_path("gt", &args.gt);
    m.push_path("result", &args.result);
    m.push_path("mask", &args.mask);
    m.push("alpha", args.alpha);
    m.extend(report.to_key_values());
    m.push("wall_clock_secs", format!("{:.3}", started.elapsed().as_secs_f64()));
    match &args.manifest {
        Some(p) => write_text(p, &m.render()),
        None => {
            print!("{}", m.render());
            Ok(())
        }
    }
}

/// Writes `text` to `path` or stdout, and the manifest next to it (or to
/// stderr when the data went to stdout).
fn emit(text: &str, path: Option<&Path>, manifest: &Manifest, manifest_path: Option<&Path>) -> CmdResult {
    match path {
        Some(p) => write_text(p, text)?,
        None => print!("{text}"),
    }
    match (manifest_path, path) {
        (Some(mp), _) => write_text(mp, &manifest.render()),
        (None, Some(p)) => write_text(&sidecar(p), &manifest.render()),
        (None, None) => {
            eprint!("{}", manifest.render());
            Ok(())
        }
    }
}

pub fn stats(args: StatsArgs) -> CmdResult {
    match args.sweep {
        Some(param) => sweep(&args, param),
        None => histogram(&args),
    }
}

fn histogram(args: &StatsArgs) -> CmdResult {
    let started = Instant::now();
    let img = read_with_context("input", &args.input, |p| read_image(p))?;
    let hist = gradient_histogram(&img);
    let mut text = String::from("magnitude,count\n");
    for (mag, count) in &hist.counts {
        text.push_str(&format!("{mag},{count}\n"));
    }
    let mut m = Manifest::new("stats-histogram");
    m.push_path("input", &args.input);
    if let Some(p) = &args.hist {
        m.push_path("output", p);
    }
    m.push("pixels", hist.total());
    m.push("wall_clock_secs", format!("{:.3}", started.elapsed().as_secs_f64()));
    emit(&text, args.hist.as_deref(), &m, args.manifest.as_deref())
}

fn sweep_values(from: f64, to: f64, step: f64) -> Result<Vec<f64>, Failure> {
    if !(from.is_finite() && to.is_finite() && step.is_finite()) || step <= 0.0 || to < from {
        return Err(Failure::Usage(format!(
            "sweep needs finite --from <= --to and --step > 0, got {from}..{to} by {step}"
        )));
    }
    let n = ((to - from) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| from + k as f64 * step).collect())
}

fn with_weight(base: &SolverConfig, param: SweepParam, value: f64) -> SolverConfig {
    let mut cfg = base.clone();
    match param {
        SweepParam::LambdaR => cfg.lambda_r = value,
        SweepParam::LambdaTv => cfg.lambda_tv = value,
        SweepParam::LambdaL0 => cfg.lambda_l0 = value,
        SweepParam::LambdaL0psi => cfg.lambda_l0psi = value,
    }
    cfg
}

fn sweep(args: &StatsArgs, param: SweepParam) -> CmdResult {
    let started = Instant::now();
    let method: Method = args.method.into();
    let base = args.solver.config(method);
    let values = sweep_values(args.from, args.to, args.step)?;
    let configs: Vec<SolverConfig> = values.iter().map(|&v| with_weight(&base, param, v)).collect();
    for cfg in &configs {
        cfg.validate()?;
    }

    let (Some(mask_path), Some(gt_path)) = (&args.mask, &args.gt) else {
        return Err(Failure::Usage("--sweep needs --mask and --gt".into()));
    };
    let input = read_with_context("input", &args.input, |p| read_image(p))?;
    let mask: Mask = read_with_context("mask", mask_path, |p| read_mask(p))?;
    let gt = read_with_context("ground truth", gt_path, |p| read_image(p))?;
    mask.matches(&input)?;
    mask.matches(&gt)?;

    // the low rank start does not depend on the gradient weights
    let shared_lr = if param == SweepParam::LambdaR {
        None
    } else {
        Some(solve_lr(&input, &mask, &base)?)
    };
    let psnrs: Vec<depthfill::Result<f64>> = configs
        .par_iter()
        .map(|cfg| {
            let (out, _) = match &shared_lr {
                Some(lr) => solve_from(&input, &mask, cfg, lr.clone())?,
                None => solve(&input, &mask, cfg)?,
            };
            psnr_on_mask(&gt, &out, &mask)
        })
        .collect();

    let mut text = String::from("lambda,psnr\n");
    for (v, psnr) in values.iter().zip(psnrs) {
        text.push_str(&format!("{v},{}\n", format_psnr(psnr?)));
    }

    let mut m = Manifest::new("stats-sweep");
    m.push_path("input", &args.input);
    m.push_path("mask", mask_path);
    m.push_path("gt", gt_path);
    if let Some(p) = &args.output {
        m.push_path("output", p);
    }
    m.push(
        "sweep",
        match param {
            SweepParam::LambdaR => "lambda-r",
            SweepParam::LambdaTv => "lambda-tv",
            SweepParam::LambdaL0 => "lambda-l0",
            SweepParam::LambdaL0psi => "lambda-l0psi",
        },
    );
    m.push("from", args.from);
    m.push("to", args.to);
    m.push("step", args.step);
    m.extend(base.to_key_values());
    m.push("wall_clock_secs", format!("{:.3}", started.elapsed().as_secs_f64()));
    emit(&text, args.output.as_deref(), &m, args.manifest.as_deref())
}
