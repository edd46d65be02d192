//! Benchmark-influence study: a lattice of normal expert priors scored against
//! several benchmarks on one shared dataset.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dac::MIN_BENCHMARK_KL;
use crate::dist::DistributionSpec;
use crate::divergence::{kl, QuadratureConfig};
use crate::error::{DacError, Result};
use crate::posterior::{fit_posterior, Dataset, PosteriorSummary};
use crate::serde_ext;

pub const DEFAULT_GRID_SEED: u64 = 20_180_101;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Generated { spec: DistributionSpec, n: usize, seed: u64 },
    Observations(Vec<f64>),
}

impl DataSource {
    pub fn dataset(&self) -> Result<Dataset> {
        match self {
            Self::Generated { spec, n, seed } => Dataset::new(spec.sample(*n, *seed)?),
            Self::Observations(y) => Dataset::new(y.clone()),
        }
    }
}

/// Evenly spaced axis from `lower` to `upper` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisRange {
    pub lower: f64,
    pub upper: f64,
    pub steps: usize,
}

impl AxisRange {
    pub fn new(lower: f64, upper: f64, steps: usize) -> Self {
        Self { lower, upper, steps }
    }

    pub fn values(&self) -> Vec<f64> {
        let width = self.upper - self.lower;
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| self.lower + width * i as f64 / last)
            .collect()
    }

    fn validate(&self, name: &str) -> Result<()> {
        if self.steps < 2 {
            return Err(DacError::validation(format!("{name}: steps must be at least 2")));
        }
        if !(self.lower.is_finite() && self.upper.is_finite() && self.lower < self.upper) {
            return Err(DacError::validation(format!("{name}: need finite lower < upper")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedBenchmark {
    pub id: String,
    pub spec: DistributionSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub data_source: DataSource,
    /// Expert means, relative to the sample mean.
    pub mean_offsets: AxisRange,
    /// Expert standard deviations.
    pub sd_range: AxisRange,
    pub benchmarks: Vec<NamedBenchmark>,
    pub quadrature: QuadratureConfig,
}

/// The four reference benchmarks: two vague (A normal, C uniform) and two
/// informative (B accurate, D misplaced). Normal variances 10000 and 0.5 are
/// converted to standard deviations.
pub fn default_benchmarks() -> Vec<NamedBenchmark> {
    vec![
        NamedBenchmark {
            id: "A".into(),
            spec: DistributionSpec::Normal { mean: 0.0, sd: 100.0 },
        },
        NamedBenchmark {
            id: "B".into(),
            spec: DistributionSpec::Normal { mean: 0.0, sd: 1.0 },
        },
        NamedBenchmark {
            id: "C".into(),
            spec: DistributionSpec::Uniform { lower: -50.0, upper: 50.0 },
        },
        NamedBenchmark {
            id: "D".into(),
            spec: DistributionSpec::Normal { mean: 5.0, sd: 0.5f64.sqrt() },
        },
    ]
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            data_source: DataSource::Generated {
                spec: DistributionSpec::Normal { mean: 0.0, sd: 1.0 },
                n: 100,
                seed: DEFAULT_GRID_SEED,
            },
            mean_offsets: AxisRange::new(-4.0, 4.0, 81),
            sd_range: AxisRange::new(0.1, 3.0, 30),
            benchmarks: default_benchmarks(),
            quadrature: QuadratureConfig::default(),
        }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<()> {
        self.mean_offsets.validate("mean_offsets")?;
        self.sd_range.validate("sd_range")?;
        if !(self.sd_range.lower > 0.0) {
            return Err(DacError::validation("sd_range lower bound must be > 0"));
        }
        if self.benchmarks.is_empty() {
            return Err(DacError::validation("at least one benchmark is required"));
        }
        for b in &self.benchmarks {
            b.spec.validate()?;
        }
        self.quadrature.validate()
    }
}

/// Row-major matrix of DAC values: rows are expert means, columns expert sds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DacMatrix {
    pub rows: usize,
    pub cols: usize,
    #[serde(with = "serde_ext::extended_f64_vec")]
    pub values: Vec<f64>,
}

impl DacMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(DacError::validation(format!(
                "matrix of {rows}x{cols} needs {} values, got {}",
                rows * cols,
                values.len()
            )));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSummary {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Panel {
    pub benchmark_id: String,
    pub benchmark: DistributionSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub posterior: Option<PosteriorSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub benchmark_kl: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dac: Option<DacMatrix>,
    /// Set instead of `dac` when this benchmark could not be evaluated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub data: DataSummary,
    pub mean_offsets: Vec<f64>,
    /// Absolute expert means: sample mean plus offset.
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
    pub panels: Vec<Panel>,
}

impl GridResult {
    pub fn panel(&self, id: &str) -> Option<&Panel> {
        self.panels.iter().find(|p| p.benchmark_id == id)
    }
}

/// DAC of a single `Normal(mean, sd)` expert prior.
pub fn grid_cell(
    posterior: &PosteriorSummary,
    benchmark_kl: f64,
    mean: f64,
    sd: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let expert = DistributionSpec::normal(mean, sd)?;
    Ok(kl(&posterior.summary, &expert, cfg)?.value / benchmark_kl)
}

fn run_panel(data: &Dataset, bench: &NamedBenchmark, means: &[f64], sds: &[f64], cfg: &QuadratureConfig) -> Panel {
    let mut panel = Panel {
        benchmark_id: bench.id.clone(),
        benchmark: bench.spec,
        posterior: None,
        benchmark_kl: None,
        dac: None,
        error: None,
    };
    let result = (|| -> Result<(PosteriorSummary, f64, DacMatrix)> {
        let posterior = fit_posterior(data, &bench.spec)?;
        let bkl = kl(&posterior.summary, &bench.spec, cfg)?;
        if bkl.infinite || bkl.value <= MIN_BENCHMARK_KL {
            return Err(DacError::UndefinedRatio(format!(
                "benchmark '{}' KL is {}",
                bench.id,
                serde_ext::format_value(bkl.value)
            )));
        }
        let cols = sds.len();
        let values = (0..means.len() * cols)
            .into_par_iter()
            .map(|i| grid_cell(&posterior, bkl.value, means[i / cols], sds[i % cols], cfg))
            .collect::<Result<Vec<f64>>>()?;
        Ok((posterior, bkl.value, DacMatrix::new(means.len(), cols, values)?))
    })();
    match result {
        Ok((posterior, bkl, dac)) => {
            panel.posterior = Some(posterior);
            panel.benchmark_kl = Some(bkl);
            panel.dac = Some(dac);
        }
        Err(e) => panel.error = Some(e.to_string()),
    }
    panel
}

/// Score every lattice cell against every benchmark.
///
/// A benchmark that cannot be evaluated yields a panel carrying `error`;
/// the other panels are unaffected.
pub fn run_grid(cfg: &GridConfig) -> Result<GridResult> {
    cfg.validate()?;
    let data = cfg.data_source.dataset()?;
    let mean = data.mean();
    let mean_offsets = cfg.mean_offsets.values();
    let means: Vec<f64> = mean_offsets.iter().map(|o| mean + o).collect();
    let sds = cfg.sd_range.values();

    let panels = cfg
        .benchmarks
        .iter()
        .map(|b| run_panel(&data, b, &means, &sds, &cfg.quadrature))
        .collect();

    Ok(GridResult {
        data: DataSummary {
            n: data.len(),
            mean,
            sd: data.sd(),
        },
        mean_offsets,
        means,
        sds,
        panels,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankCorrelation {
    pub kendall_tau: f64,
    pub spearman_rho: f64,
}

fn check_comparable(a: &DacMatrix, b: &DacMatrix) -> Result<()> {
    if a.rows != b.rows || a.cols != b.cols {
        return Err(DacError::validation(format!(
            "matrix dimensions differ: {}x{} vs {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    if a.values.iter().chain(&b.values).any(|v| v.is_nan()) {
        return Err(DacError::validation("rank correlation is undefined for NaN cells"));
    }
    if a.values.len() < 2 {
        return Err(DacError::validation("rank correlation needs at least 2 cells"));
    }
    Ok(())
}

fn cmp(x: f64, y: f64) -> Ordering {
    x.partial_cmp(&y).expect("NaN excluded")
}

/// Exact Kendall tau-b over all cell pairs.
pub fn kendall_tau_b(a: &[f64], b: &[f64]) -> Result<f64> {
    let n = a.len();
    let (mut concordant, mut discordant, mut ties_a, mut ties_b) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let ca = cmp(a[i], a[j]);
            let cb = cmp(b[i], b[j]);
            match (ca, cb) {
                (Ordering::Equal, Ordering::Equal) => {
                    ties_a += 1;
                    ties_b += 1;
                }
                (Ordering::Equal, _) => ties_a += 1,
                (_, Ordering::Equal) => ties_b += 1,
                _ if ca == cb => concordant += 1,
                _ => discordant += 1,
            }
        }
    }
    let pairs = (n * (n - 1) / 2) as i64;
    let denom = (((pairs - ties_a) as f64) * ((pairs - ties_b) as f64)).sqrt();
    if denom == 0.0 {
        return Err(DacError::validation("Kendall tau is undefined for constant input"));
    }
    Ok((concordant - discordant) as f64 / denom)
}

fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&i, &j| cmp(v[i], v[j]));
    let mut ranks = vec![0.0; v.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && cmp(v[idx[end]], v[idx[start]]) == Ordering::Equal {
            end += 1;
        }
        let avg = (start + end + 1) as f64 / 2.0;
        for &k in &idx[start..end] {
            ranks[k] = avg;
        }
        start = end;
    }
    ranks
}

/// Spearman rho: Pearson correlation of tie-averaged ranks.
pub fn spearman_rho(a: &[f64], b: &[f64]) -> Result<f64> {
    let ra = average_ranks(a);
    let rb = average_ranks(b);
    let n = ra.len() as f64;
    let ma = ra.iter().sum::<f64>() / n;
    let mb = rb.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in ra.iter().zip(&rb) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(DacError::validation("Spearman rho is undefined for constant input"));
    }
    Ok((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Agreement between the cell orderings of two DAC matrices.
pub fn compare_rank_stability(a: &DacMatrix, b: &DacMatrix) -> Result<RankCorrelation> {
    check_comparable(a, b)?;
    Ok(RankCorrelation {
        kendall_tau: kendall_tau_b(&a.values, &b.values)?,
        spearman_rho: spearman_rho(&a.values, &b.values)?,
    })
}

/// Share of cells in prior-data conflict (DAC > 1).
pub fn conflict_fraction(m: &DacMatrix) -> f64 {
    if m.values.is_empty() {
        return 0.0;
    }
    m.values.iter().filter(|&&v| v > 1.0).count() as f64 / m.values.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(values: Vec<f64>, cols: usize) -> DacMatrix {
        DacMatrix::new(values.len() / cols, cols, values).unwrap()
    }

    #[test]
    fn axis_values_hit_both_ends() {
        let v = AxisRange::new(0.1, 3.0, 30).values();
        assert_eq!(v.len(), 30);
        assert_eq!(v[0], 0.1);
        assert_eq!(v[29], 3.0);
        assert!((v[4] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn identity_and_reversal() {
        let m = mat(vec![0.3, 1.2, 5.0, 0.7, 2.2, 0.1], 3);
        let r = compare_rank_stability(&m, &m).unwrap();
        assert_eq!(r.kendall_tau, 1.0);
        assert!((r.spearman_rho - 1.0).abs() < 1e-15);
        let r = compare_rank_stability(&m, &m.map(|v| -v)).unwrap();
        assert_eq!(r.kendall_tau, -1.0);
        assert!((r.spearman_rho + 1.0).abs() < 1e-15);
    }

    #[test]
    fn kendall_tau_b_with_ties_matches_hand_count() {
        // pairs: (0,1) tie in a; (0,2) C; (1,2) C; -> tau_b = 2 / sqrt(2 * 3)
        let a = [1.0, 1.0, 2.0];
        let b = [1.0, 2.0, 3.0];
        let t = kendall_tau_b(&a, &b).unwrap();
        assert!((t - 2.0 / 6f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn infinities_compare_as_ties() {
        let a = mat(vec![0.5, f64::INFINITY, f64::INFINITY, 2.0], 2);
        let r = compare_rank_stability(&a, &a).unwrap();
        assert_eq!(r.kendall_tau, 1.0);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let a = mat(vec![1.0, 2.0, 3.0, 4.0], 2);
        let b = mat(vec![1.0, 2.0, 3.0, 4.0], 4);
        assert!(matches!(compare_rank_stability(&a, &b), Err(DacError::Validation(_))));
        assert!(DacMatrix::new(2, 2, vec![1.0]).is_err());
    }

    #[test]
    fn constant_input_rejected() {
        let a = mat(vec![0.5; 4], 2);
        assert!(compare_rank_stability(&a, &a).is_err());
    }

    #[test]
    fn conflict_fraction_extremes() {
        assert_eq!(conflict_fraction(&mat(vec![0.5; 6], 3)), 0.0);
        assert_eq!(conflict_fraction(&mat(vec![2.0; 6], 3)), 1.0);
        assert_eq!(conflict_fraction(&mat(vec![1.0, 1.0 + 1e-12], 2)), 0.5);
    }

    #[test]
    fn grid_config_validation() {
        let cfg = GridConfig { sd_range: AxisRange::new(0.0, 3.0, 30), ..GridConfig::default() };
        assert!(cfg.validate().is_err());
        let mut cfg = GridConfig::default();
        cfg.mean_offsets.steps = 1;
        assert!(cfg.validate().is_err());
        let mut cfg = GridConfig::default();
        cfg.benchmarks.clear();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn failing_benchmark_does_not_poison_others() {
        let mut cfg = GridConfig::default();
        cfg.mean_offsets.steps = 3;
        cfg.sd_range.steps = 2;
        cfg.benchmarks.push(NamedBenchmark {
            id: "far".into(),
            spec: DistributionSpec::Uniform { lower: 20.0, upper: 30.0 },
        });
        let g = run_grid(&cfg).unwrap();
        assert!(g.panel("far").unwrap().error.is_some());
        assert!(g.panel("A").unwrap().dac.is_some());
    }
}
