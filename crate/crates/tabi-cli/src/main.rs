//! Atlas packing command line: pack, validate, render, gen, bench.
//!
//! Exit codes: 0 success, 1 usage or i/o error, 2 packing failure (no scale
//! fits), 3 validation failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use tabi_core::chart::{AtlasSpec, ChartSet, PackResult};
use tabi_core::corpus::{generate_chart_set, CorpusParams};
use tabi_core::io::{
    chartset_to_json, export_result, import_result, load_chart_set, render_atlas_svg, ChartFormat,
};
use tabi_core::metrics::l2_stretch;
use tabi_core::validate::{occupancy, validate_atlas};
use tabi_core::{chameleon_pack, pack, Error};

#[derive(Parser)]
#[command(name = "tabi", version, about = "Tight-and-balanced texel atlas packing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pack a chart set into an atlas.
    Pack(PackArgs),
    /// Check a packing for overlaps, gutter violations, and bounds.
    Validate(ValidateArgs),
    /// Render a packed atlas as SVG.
    Render(RenderArgs),
    /// Generate a synthetic chart set.
    Gen(GenArgs),
    /// Pack a corpus directory with both packers and tabulate results.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Tabi,
    Chameleon,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Args, Clone)]
struct SpecArgs {
    /// Atlas dimensions, e.g. 1024x1024.
    #[arg(long, value_parser = parse_dims, default_value = "1024x1024")]
    atlas: (u32, u32),
    /// Gutter width in texels around each chart.
    #[arg(long, default_value_t = 1)]
    gutter: u32,
    /// Number of discrete scale candidates.
    #[arg(long, default_value_t = 64)]
    scales: u32,
    /// Pre-rotate charts to axis-align their tight boxes.
    #[arg(long)]
    prerotate: bool,
    /// Prefix-switch threshold as a fraction of atlas height
    /// (default: 0 up to 10k charts, 0.01 above).
    #[arg(long, value_name = "FRACTION")]
    t_opt: Option<f64>,
    /// Local bounding boxes per axis.
    #[arg(long, default_value_t = 10, value_name = "K")]
    local_aabbs: u32,
}

impl SpecArgs {
    fn to_spec(&self) -> AtlasSpec {
        let mut spec = AtlasSpec::new(self.atlas.0, self.atlas.1);
        spec.gutter = self.gutter;
        spec.scale_count = self.scales;
        spec.prerotate = self.prerotate;
        spec.t_opt_fraction = self.t_opt;
        spec.local_aabb_count = self.local_aabbs;
        spec
    }
}

fn parse_dims(s: &str) -> Result<(u32, u32), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("'{s}' is not WxH"))?;
    Ok((
        w.parse().map_err(|_| format!("bad width in '{s}'"))?,
        h.parse().map_err(|_| format!("bad height in '{s}'"))?,
    ))
}

#[derive(Args)]
struct PackArgs {
    /// Chart set: .json (chartset) or .obj (UV islands).
    input: PathBuf,
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long, value_enum, default_value_t = Mode::Tabi)]
    mode: Mode,
    /// Write the packing result file here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also render the packed atlas to this SVG path.
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    report: ReportFormat,
    /// UV-to-texel scale for OBJ inputs.
    #[arg(long, default_value_t = 1024.0)]
    obj_dim: f64,
    /// Cap worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args)]
struct ValidateArgs {
    /// Chart set file.
    input: PathBuf,
    /// Result file produced by `pack --out`.
    result: PathBuf,
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    report: ReportFormat,
    #[arg(long, default_value_t = 1024.0)]
    obj_dim: f64,
}

#[derive(Args)]
struct RenderArgs {
    input: PathBuf,
    result: PathBuf,
    /// Output SVG path.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long, default_value_t = 1024.0)]
    obj_dim: f64,
}

#[derive(Args)]
struct GenArgs {
    /// Random seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of charts.
    #[arg(long)]
    count: u32,
    #[arg(long, default_value_t = 8.0)]
    min_height: f64,
    #[arg(long, default_value_t = 110.0)]
    max_height: f64,
    /// Output chartset json path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of chartset .json files.
    corpus: PathBuf,
    #[command(flatten)]
    spec: SpecArgs,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    report: ReportFormat,
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // Help and version are not errors.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Pack(a) => cmd_pack(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Render(a) => cmd_render(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn load_set(path: &Path, obj_dim: f64) -> anyhow::Result<ChartSet> {
    let format = match path.extension().and_then(|e| e.to_str()) {
        Some("obj") => ChartFormat::ObjUv { texture_dim: obj_dim },
        _ => ChartFormat::ChartsetJson,
    };
    let loaded = load_chart_set(path, format)
        .with_context(|| format!("loading {}", path.display()))?;
    if loaded.dropped > 0 {
        eprintln!("warning: dropped {} degenerate chart(s)", loaded.dropped);
    }
    Ok(loaded.set)
}

fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> anyhow::Result<T> {
    if jobs == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .context("building worker pool")?;
    Ok(pool.install(f))
}

#[derive(Serialize)]
struct PackReport {
    input: String,
    mode: &'static str,
    success: bool,
    scale_index: Option<u32>,
    scale_count: u32,
    scale: f64,
    l2_stretch: Option<f64>,
    occupancy: Option<f64>,
    rows: u32,
    knees_detected: u32,
    knee_folds: u32,
    pack_ms: f64,
    diagnostic: Option<String>,
}

fn run_packer(mode: Mode, set: &ChartSet, spec: &AtlasSpec) -> tabi_core::Result<PackResult> {
    match mode {
        Mode::Tabi => pack(set, spec),
        Mode::Chameleon => chameleon_pack(set, spec),
    }
}

fn make_report(
    input: &Path,
    mode: Mode,
    set: &ChartSet,
    spec: &AtlasSpec,
    result: &PackResult,
    pack_ms: f64,
) -> anyhow::Result<PackReport> {
    let (stretch, occ) = if result.is_success() {
        (
            Some(l2_stretch(set, result)?.l2_stretch),
            Some(occupancy(set, result, spec)?),
        )
    } else {
        (None, None)
    };
    Ok(PackReport {
        input: input.display().to_string(),
        mode: match mode {
            Mode::Tabi => "tabi",
            Mode::Chameleon => "chameleon",
        },
        success: result.is_success(),
        scale_index: result.scale_index,
        scale_count: result.scale_count,
        scale: result.scale_value(),
        l2_stretch: stretch,
        occupancy: occ,
        rows: result.stats.rows,
        knees_detected: result.stats.knees_detected,
        knee_folds: result.stats.knee_folds,
        pack_ms,
        diagnostic: result.diagnostic.clone(),
    })
}

fn print_report(r: &PackReport, format: ReportFormat) {
    match format {
        ReportFormat::Json => println!("{}", serde_json::to_string_pretty(r).unwrap()),
        ReportFormat::Text => {
            if r.success {
                println!(
                    "{} [{}]: scale {}/{} ({:.4}), stretch {:.4}, occupancy {:.4}, rows {}, knees {} ({} folds), {:.2} ms",
                    r.input,
                    r.mode,
                    r.scale_index.unwrap(),
                    r.scale_count,
                    r.scale,
                    r.l2_stretch.unwrap(),
                    r.occupancy.unwrap(),
                    r.rows,
                    r.knees_detected,
                    r.knee_folds,
                    r.pack_ms
                );
            } else {
                println!(
                    "{} [{}]: packing failed: {}",
                    r.input,
                    r.mode,
                    r.diagnostic.as_deref().unwrap_or("no diagnostic")
                );
            }
        }
    }
}

fn cmd_pack(args: PackArgs) -> anyhow::Result<u8> {
    let spec = args.spec.to_spec();
    spec.validate().map_err(|e| anyhow::anyhow!(e))?;
    let set = load_set(&args.input, args.obj_dim)?;

    // Wall time covers proxy construction through scale search, not file I/O.
    let (result, pack_ms) = with_jobs(args.jobs, || {
        let t0 = Instant::now();
        let r = run_packer(args.mode, &set, &spec);
        (r, t0.elapsed().as_secs_f64() * 1e3)
    })?;
    let result = result?;

    let report = make_report(&args.input, args.mode, &set, &spec, &result, pack_ms)?;
    print_report(&report, args.report);

    if !result.is_success() {
        return Ok(2);
    }
    if let Some(out) = &args.out {
        export_result(&result, out).with_context(|| format!("writing {}", out.display()))?;
    }
    if let Some(svg) = &args.svg {
        std::fs::write(svg, render_atlas_svg(&set, &result, &spec)?)
            .with_context(|| format!("writing {}", svg.display()))?;
    }
    Ok(0)
}

fn cmd_validate(args: ValidateArgs) -> anyhow::Result<u8> {
    let spec = args.spec.to_spec();
    spec.validate().map_err(|e| anyhow::anyhow!(e))?;
    let set = load_set(&args.input, args.obj_dim)?;
    let result = import_result(&args.result)
        .with_context(|| format!("reading {}", args.result.display()))?;
    if result.placements.len() != set.charts.len() {
        bail!(Error::ChartIdMismatch(format!(
            "{} charts but {} placements",
            set.charts.len(),
            result.placements.len()
        )));
    }
    let report = validate_atlas(&set, &result, &spec)?;
    match args.report {
        ReportFormat::Json => println!(
            "{}",
            serde_json::json!({
                "overlap_texels": report.overlap_texels,
                "gutter_violation_texels": report.gutter_violation_texels,
                "out_of_bounds_texels": report.out_of_bounds_texels,
                "passed": report.passed,
            })
        ),
        ReportFormat::Text => println!(
            "overlap {}, gutter violations {}, out of bounds {}: {}",
            report.overlap_texels,
            report.gutter_violation_texels,
            report.out_of_bounds_texels,
            if report.passed { "PASS" } else { "FAIL" }
        ),
    }
    Ok(if report.passed { 0 } else { 3 })
}

fn cmd_render(args: RenderArgs) -> anyhow::Result<u8> {
    let spec = args.spec.to_spec();
    let set = load_set(&args.input, args.obj_dim)?;
    let result = import_result(&args.result)?;
    std::fs::write(&args.out, render_atlas_svg(&set, &result, &spec)?)
        .with_context(|| format!("writing {}", args.out.display()))?;
    Ok(0)
}

fn cmd_gen(args: GenArgs) -> anyhow::Result<u8> {
    let params = CorpusParams {
        seed: args.seed,
        count: args.count,
        min_height: args.min_height,
        max_height: args.max_height,
    };
    let set = generate_chart_set(&params)?;
    std::fs::write(&args.out, chartset_to_json(&set))
        .with_context(|| format!("writing {}", args.out.display()))?;
    println!("wrote {} charts to {}", set.charts.len(), args.out.display());
    Ok(0)
}

fn cmd_bench(args: BenchArgs) -> anyhow::Result<u8> {
    let spec = args.spec.to_spec();
    spec.validate().map_err(|e| anyhow::anyhow!(e))?;
    let mut inputs: Vec<PathBuf> = std::fs::read_dir(&args.corpus)
        .with_context(|| format!("reading {}", args.corpus.display()))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("json"))
        .collect();
    inputs.sort();
    if inputs.is_empty() {
        bail!(Error::Usage(format!("no chartset .json files in {}", args.corpus.display())));
    }

    let mut reports = Vec::new();
    for path in &inputs {
        let set = load_set(path, 1024.0)?;
        for mode in [Mode::Tabi, Mode::Chameleon] {
            let (result, ms) = with_jobs(args.jobs, || {
                let t0 = Instant::now();
                let r = run_packer(mode, &set, &spec);
                (r, t0.elapsed().as_secs_f64() * 1e3)
            })?;
            let result = result?;
            reports.push(make_report(path, mode, &set, &spec, &result, ms)?);
        }
    }

    match args.report {
        ReportFormat::Json => println!("{}", serde_json::to_string_pretty(&reports).unwrap()),
        ReportFormat::Text => {
            for r in &reports {
                print_report(r, ReportFormat::Text);
            }
            for mode in ["tabi", "chameleon"] {
                let rows: Vec<&PackReport> =
                    reports.iter().filter(|r| r.mode == mode && r.success).collect();
                if rows.is_empty() {
                    println!("{mode}: no successful packings");
                    continue;
                }
                let n = rows.len() as f64;
                println!(
                    "{mode} aggregate over {} inputs: mean scale {:.4}, mean stretch {:.4}, mean occupancy {:.4}, mean time {:.2} ms",
                    rows.len(),
                    rows.iter().map(|r| r.scale).sum::<f64>() / n,
                    rows.iter().filter_map(|r| r.l2_stretch).sum::<f64>() / n,
                    rows.iter().filter_map(|r| r.occupancy).sum::<f64>() / n,
                    rows.iter().map(|r| r.pack_ms).sum::<f64>() / n,
                );
            }
        }
    }
    Ok(0)
}
