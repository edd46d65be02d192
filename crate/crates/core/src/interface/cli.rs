//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use super::document::PriorSetDocument;
use super::inline::{format_spec, parse_spec};
use super::pipeline::{rank, FitMethod, RankRequest};
use super::tables::{heatmap_csv, parse_data_csv};
use crate::dac::{rank_stability_note, DacReport};
use crate::dist::DistributionSpec;
use crate::divergence::{kl, DensityFloorPolicy, QuadratureConfig, DEFAULT_RELATIVE_TOLERANCE};
use crate::error::DacError;
use crate::posterior::McmcConfig;
use crate::sensitivity::{
    compare_rank_stability, conflict_fraction, run_grid, AxisRange, DataSource, GridConfig, NamedBenchmark,
    DEFAULT_GRID_SEED,
};
use crate::serde_ext::format_value;

pub const EXIT_OK: i32 = 0;
/// Bad flags, unreadable or malformed input files, invalid parameters.
pub const EXIT_USAGE: i32 = 2;
/// Undefined DAC ratio or another numerical failure.
pub const EXIT_NUMERICAL: i32 = 3;
/// Output could not be written.
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "dac", version, about = "Score and rank expert priors with the Data Agreement Criterion")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the benchmark posterior and rank expert priors.
    Rank(RankArgs),
    /// Sweep a lattice of normal priors against several benchmarks.
    Sensitivity(SensitivityArgs),
    /// Kullback-Leibler divergence KL(p || q).
    Kl(KlArgs),
    /// Serve the JSON API.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct RankArgs {
    /// One-column CSV of observations (optional header `y`).
    #[arg(long, conflicts_with = "posterior", required_unless_present = "posterior")]
    pub data: Option<PathBuf>,
    /// Use this normal posterior instead of fitting one, e.g. `normal:2.29,0.0945`.
    #[arg(long)]
    pub posterior: Option<String>,
    /// Prior-set JSON document.
    #[arg(long)]
    pub priors: PathBuf,
    /// Benchmark prior, e.g. `uniform:0,5`.
    #[arg(long)]
    pub benchmark: String,
    /// `analytic` or `mcmc`.
    #[arg(long, default_value = "analytic")]
    pub method: String,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 4)]
    pub chains: usize,
    /// Retained MCMC draws per chain.
    #[arg(long, default_value_t = 25_000)]
    pub iterations: usize,
    #[arg(long, default_value_t = 1_000)]
    pub burn_in: usize,
    /// Write the report document here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_RELATIVE_TOLERANCE)]
    pub quad_tol: f64,
    /// Timestamp recorded in the report provenance.
    #[arg(long)]
    pub created_at: Option<String>,
}

#[derive(Debug, Args)]
pub struct SensitivityArgs {
    /// Directory for the per-benchmark heatmap CSVs.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Grid steps on both axes (overrides the 81 x 30 default).
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub mean_steps: Option<usize>,
    #[arg(long)]
    pub sd_steps: Option<usize>,
    /// Observations to use instead of generated standard-normal data.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = DEFAULT_GRID_SEED)]
    pub seed: u64,
    /// Replace the default benchmarks; repeatable, `id=family:p1,p2`.
    #[arg(long = "benchmark")]
    pub benchmarks: Vec<String>,
    /// Also write the full grid result as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_RELATIVE_TOLERANCE)]
    pub quad_tol: f64,
}

#[derive(Debug, Args)]
pub struct KlArgs {
    #[arg(long)]
    pub p: String,
    #[arg(long)]
    pub q: String,
    #[arg(long, default_value_t = DEFAULT_RELATIVE_TOLERANCE)]
    pub quad_tol: f64,
    /// Clamp q's density at this floor instead of reporting infinity.
    #[arg(long)]
    pub floor: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
}

enum Failure {
    Input(String),
    Numerical(String),
    Io(String),
}

impl From<DacError> for Failure {
    fn from(e: DacError) -> Self {
        if e.is_input_error() {
            Self::Input(e.to_string())
        } else {
            Self::Numerical(e.to_string())
        }
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))
}

fn write_output(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))
}

/// Render the report as an aligned table in the experts' input order.
pub fn report_table(report: &DacReport, order: &[String]) -> String {
    let mut rows: Vec<[String; 5]> = vec![[
        "expert".into(),
        "KL".into(),
        "DAC".into(),
        "conflict".into(),
        "rank".into(),
    ]];
    for id in order {
        if let Some(e) = report.entry(id) {
            let name = if e.label.is_empty() { e.expert_id.clone() } else { e.label.clone() };
            let fmt = |v: f64| if v.is_finite() { format!("{v:.4}") } else { format_value(v) };
            rows.push([
                name,
                fmt(e.kl_value),
                fmt(e.dac_value),
                if e.conflict { "yes" } else { "no" }.into(),
                e.rank.to_string(),
            ]);
        }
    }
    rows.push([
        "benchmark".into(),
        format!("{:.4}", report.benchmark_kl),
        "-".into(),
        "-".into(),
        "-".into(),
    ]);
    let widths: Vec<usize> = (0..5).map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for r in &rows {
        let line: Vec<String> = r
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(c, (cell, w))| if c == 0 { format!("{cell:<w$}") } else { format!("{cell:>w$}") })
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn cmd_rank(args: RankArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let benchmark = parse_spec(&args.benchmark)?;
    let priors = PriorSetDocument::from_json(&read_input(&args.priors)?)?;
    let method: FitMethod = args.method.parse()?;
    let mut req = RankRequest::new(benchmark, priors);
    req.method = method;
    req.mcmc = McmcConfig {
        chains: args.chains,
        iterations_per_chain: args.iterations,
        burn_in: args.burn_in,
        seed: args.seed,
        ..McmcConfig::default()
    };
    req.quadrature = QuadratureConfig::with_relative_tolerance(args.quad_tol);
    req.created_at = args.created_at;
    match (&args.data, &args.posterior) {
        (Some(path), None) => req.observations = Some(parse_data_csv(&read_input(path)?)?),
        (None, Some(spec)) => req.posterior = Some(parse_spec(spec)?),
        _ => return Err(Failure::Input("give exactly one of --data and --posterior".into())),
    }

    let doc = rank(&req)?;
    let report = &doc.report;
    for w in &report.provenance.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    let order: Vec<String> = doc.experts.experts.iter().map(|e| e.id.clone()).collect();
    let post = &report.posterior;
    let _ = writeln!(
        out,
        "posterior: {} ({:?})  benchmark: {}",
        format_spec(&post.summary),
        post.method,
        format_spec(&report.benchmark)
    );
    if let Some(d) = &post.diagnostics {
        let _ = writeln!(
            out,
            "mcmc: r_hat {:.4}, acceptance {:.3}, {} chains x {} draws after {} burn-in, seed {}{}",
            d.r_hat,
            d.acceptance_rate,
            d.chains,
            d.iterations,
            d.burn_in,
            d.seed,
            if d.converged { "" } else { " [NOT CONVERGED]" }
        );
    }
    let _ = write!(out, "{}", report_table(report, &order));
    let _ = writeln!(out, "{}", rank_stability_note(report));
    if let Some(path) = &args.out {
        write_output(path, &(doc.to_json_pretty() + "\n"))?;
    }
    Ok(())
}

fn parse_named_benchmark(text: &str) -> Result<NamedBenchmark, Failure> {
    let (id, spec) = text
        .split_once('=')
        .ok_or_else(|| Failure::Input(format!("expected id=family:params, got '{text}'")))?;
    let id = id.trim();
    if id.is_empty() || id.contains(['/', '\\']) {
        return Err(Failure::Input(format!("invalid benchmark id '{id}'")));
    }
    Ok(NamedBenchmark {
        id: id.to_string(),
        spec: parse_spec(spec)?,
    })
}

fn cmd_sensitivity(args: SensitivityArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let mut cfg = GridConfig::default();
    if let Some(path) = &args.data {
        cfg.data_source = DataSource::Observations(parse_data_csv(&read_input(path)?)?);
    } else {
        cfg.data_source = DataSource::Generated {
            spec: DistributionSpec::Normal { mean: 0.0, sd: 1.0 },
            n: args.n,
            seed: args.seed,
        };
    }
    let mean_steps = args.mean_steps.or(args.steps).unwrap_or(cfg.mean_offsets.steps);
    let sd_steps = args.sd_steps.or(args.steps).unwrap_or(cfg.sd_range.steps);
    cfg.mean_offsets = AxisRange::new(cfg.mean_offsets.lower, cfg.mean_offsets.upper, mean_steps);
    cfg.sd_range = AxisRange::new(cfg.sd_range.lower, cfg.sd_range.upper, sd_steps);
    if !args.benchmarks.is_empty() {
        cfg.benchmarks = args
            .benchmarks
            .iter()
            .map(|b| parse_named_benchmark(b))
            .collect::<Result<_, _>>()?;
    }
    cfg.quadrature = QuadratureConfig::with_relative_tolerance(args.quad_tol);

    let grid = run_grid(&cfg)?;
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| Failure::Io(format!("cannot create {}: {e}", args.out_dir.display())))?;
    let _ = writeln!(
        out,
        "data: n={} mean={:.6} sd={:.6}; grid {} means x {} sds",
        grid.data.n,
        grid.data.mean,
        grid.data.sd,
        grid.means.len(),
        grid.sds.len()
    );
    let mut written = 0;
    for panel in &grid.panels {
        match (&panel.dac, heatmap_csv(&grid, panel)) {
            (Some(dac), Some(csv)) => {
                let path = args.out_dir.join(format!("dac_grid_{}.csv", panel.benchmark_id));
                write_output(&path, &csv)?;
                written += 1;
                let _ = writeln!(
                    out,
                    "{}: benchmark {} KL {:.6} conflict fraction {:.4} -> {}",
                    panel.benchmark_id,
                    format_spec(&panel.benchmark),
                    panel.benchmark_kl.unwrap_or(f64::NAN),
                    conflict_fraction(dac),
                    path.display()
                );
            }
            _ => {
                let _ = writeln!(
                    err,
                    "warning: benchmark {}: {}",
                    panel.benchmark_id,
                    panel.error.as_deref().unwrap_or("no result")
                );
            }
        }
    }
    let ok: Vec<_> = grid.panels.iter().filter_map(|p| p.dac.as_ref().map(|d| (p, d))).collect();
    for (i, (pa, a)) in ok.iter().enumerate() {
        for (pb, b) in &ok[i + 1..] {
            if let Ok(r) = compare_rank_stability(a, b) {
                let _ = writeln!(
                    out,
                    "rank agreement {} vs {}: kendall tau {:.6}, spearman rho {:.6}",
                    pa.benchmark_id, pb.benchmark_id, r.kendall_tau, r.spearman_rho
                );
            }
        }
    }
    if let Some(path) = &args.json {
        write_output(path, &(serde_json::to_string_pretty(&grid).expect("grid serializes") + "\n"))?;
    }
    if written == 0 {
        return Err(Failure::Numerical("no benchmark could be evaluated".into()));
    }
    Ok(())
}

fn cmd_kl(args: KlArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let p = parse_spec(&args.p)?;
    let q = parse_spec(&args.q)?;
    let mut cfg = QuadratureConfig::with_relative_tolerance(args.quad_tol);
    if let Some(f) = args.floor {
        cfg.density_floor_policy = DensityFloorPolicy::Floor(f);
    }
    let r = kl(&p, &q, &cfg)?;
    let _ = writeln!(out, "{}", serde_json::to_string(&r).expect("KL result serializes"));
    Ok(())
}

fn cmd_serve(args: ServeArgs) -> Result<(), Failure> {
    let addr: SocketAddr = format!("{}:{}", args.host, args.port)
        .parse()
        .map_err(|e| Failure::Input(format!("invalid address: {e}")))?;
    let rt = tokio::runtime::Runtime::new().map_err(|e| Failure::Io(e.to_string()))?;
    rt.block_on(super::server::serve(addr)).map_err(|e| Failure::Io(e.to_string()))
}

/// Run the CLI with explicit arguments and output streams; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    let result = match cli.command {
        Command::Rank(a) => cmd_rank(a, out, err),
        Command::Sensitivity(a) => cmd_sensitivity(a, out, err),
        Command::Kl(a) => cmd_kl(a, out),
        Command::Serve(a) => cmd_serve(a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Input(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_USAGE
        }
        Err(Failure::Numerical(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_NUMERICAL
        }
        Err(Failure::Io(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_IO
        }
    }
}
