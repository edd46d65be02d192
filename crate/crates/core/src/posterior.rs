//! The benchmark posterior: the distribution of the mean under the benchmark
//! prior given the data, summarized as a normal.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::DistributionSpec;
use crate::error::{DacError, Result};

/// Untruncated posterior mass allowed outside a uniform benchmark before the
/// truncated-normal moments are used instead.
pub const SUPPORT_MASS_TOLERANCE: f64 = 1e-12;
pub const RHAT_CONVERGENCE_THRESHOLD: f64 = 1.05;
pub const ACCEPTANCE_RATE_RANGE: (f64, f64) = (0.1, 0.7);

/// Observed outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    observations: Vec<f64>,
}

impl Dataset {
    pub fn new(observations: Vec<f64>) -> Result<Self> {
        if observations.is_empty() {
            return Err(DacError::validation("dataset has no observations"));
        }
        if let Some(i) = observations.iter().position(|y| !y.is_finite()) {
            return Err(DacError::validation(format!("observation {i} is not finite")));
        }
        Ok(Self { observations })
    }

    pub fn observations(&self) -> &[f64] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.observations.iter().sum::<f64>() / self.len() as f64
    }

    /// Sample standard deviation (denominator `N - 1`); zero for a single value.
    pub fn sd(&self) -> f64 {
        let n = self.len();
        if n < 2 {
            return 0.0;
        }
        let m = self.mean();
        let ss: f64 = self.observations.iter().map(|y| (y - m) * (y - m)).sum();
        (ss / (n - 1) as f64).sqrt()
    }

    fn check_fit_preconditions(&self) -> Result<()> {
        if self.len() < 2 {
            return Err(DacError::validation(format!(
                "posterior fit needs at least 2 observations, got {}",
                self.len()
            )));
        }
        if !(self.sd() > 0.0) {
            return Err(DacError::validation("observations have zero variance"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PosteriorMethod {
    /// Flat (uniform) benchmark: `N(mean, sd / sqrt(N))`, truncated if needed.
    Analytic,
    /// Normal benchmark: exact normal-normal update.
    Conjugate,
    Mcmc,
    /// Given directly by the caller.
    Supplied,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McmcDiagnostics {
    pub r_hat: f64,
    pub chains: usize,
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub acceptance_rate: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    /// Always a normal distribution.
    pub summary: DistributionSpec,
    pub method: PosteriorMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<McmcDiagnostics>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl PosteriorSummary {
    /// Wrap a caller-supplied normal posterior.
    pub fn supplied(summary: DistributionSpec) -> Result<Self> {
        summary.validate()?;
        if !matches!(summary, DistributionSpec::Normal { .. }) {
            return Err(DacError::validation("a supplied posterior must be a normal distribution"));
        }
        Ok(Self {
            summary,
            method: PosteriorMethod::Supplied,
            diagnostics: None,
            warnings: Vec::new(),
        })
    }

    pub fn mean(&self) -> f64 {
        self.summary.mean()
    }

    pub fn sd(&self) -> f64 {
        self.summary.sd()
    }
}

/// Posterior of the mean under a flat benchmark on `[lower, upper]`, with the
/// likelihood variance fixed at the sample variance.
pub fn fit_posterior_analytic(data: &Dataset, benchmark: &DistributionSpec) -> Result<PosteriorSummary> {
    let DistributionSpec::Uniform { lower, upper } = *benchmark else {
        return Err(DacError::validation("analytic posterior needs a uniform benchmark"));
    };
    benchmark.validate()?;
    data.check_fit_preconditions()?;

    let mean = data.mean();
    let sd = data.sd() / (data.len() as f64).sqrt();
    let untruncated = DistributionSpec::normal(mean, sd)?;
    let outside = untruncated.cdf(lower) + untruncated.survival(upper);
    if outside < SUPPORT_MASS_TOLERANCE {
        return Ok(PosteriorSummary {
            summary: untruncated,
            method: PosteriorMethod::Analytic,
            diagnostics: None,
            warnings: Vec::new(),
        });
    }

    let (tm, tsd) = truncated_normal_moments(mean, sd, lower, upper)?;
    Ok(PosteriorSummary {
        summary: DistributionSpec::normal(tm, tsd)?,
        method: PosteriorMethod::Analytic,
        diagnostics: None,
        warnings: vec![format!(
            "benchmark support [{lower}, {upper}] truncates {outside:.3e} of the posterior mass; \
             summary is the moment-matched truncated normal"
        )],
    })
}

/// Mean and sd of `N(mean, sd)` restricted to `[lower, upper]`.
pub fn truncated_normal_moments(mean: f64, sd: f64, lower: f64, upper: f64) -> Result<(f64, f64)> {
    let std = DistributionSpec::Normal { mean: 0.0, sd: 1.0 };
    let a = (lower - mean) / sd;
    let b = (upper - mean) / sd;
    // mass computed from whichever tail keeps precision
    let z = if a > 0.0 {
        std.survival(a) - std.survival(b)
    } else {
        std.cdf(b) - std.cdf(a)
    };
    if !(z > 0.0) {
        return Err(DacError::Numerical(format!(
            "benchmark support [{lower}, {upper}] holds no posterior mass"
        )));
    }
    let (pa, pb) = (std.density(a), std.density(b));
    let shift = (pa - pb) / z;
    let var = 1.0 + (a * pa - b * pb) / z - shift * shift;
    if !(var > 0.0) {
        return Err(DacError::Numerical("truncated posterior variance is not positive".into()));
    }
    Ok((mean + sd * shift, sd * var.sqrt()))
}

/// Exact posterior of the mean under a normal benchmark, likelihood variance
/// fixed at the sample variance.
pub fn fit_posterior_conjugate(data: &Dataset, benchmark: &DistributionSpec) -> Result<PosteriorSummary> {
    let DistributionSpec::Normal { mean: m0, sd: s0 } = *benchmark else {
        return Err(DacError::validation("conjugate posterior needs a normal benchmark"));
    };
    benchmark.validate()?;
    data.check_fit_preconditions()?;
    let n = data.len() as f64;
    let s2 = data.sd().powi(2);
    let precision = n / s2 + 1.0 / (s0 * s0);
    let mean = (n * data.mean() / s2 + m0 / (s0 * s0)) / precision;
    Ok(PosteriorSummary {
        summary: DistributionSpec::normal(mean, precision.sqrt().recip())?,
        method: PosteriorMethod::Conjugate,
        diagnostics: None,
        warnings: Vec::new(),
    })
}

/// Analytic path for uniform benchmarks, conjugate path for normal ones.
pub fn fit_posterior(data: &Dataset, benchmark: &DistributionSpec) -> Result<PosteriorSummary> {
    match benchmark {
        DistributionSpec::Uniform { .. } => fit_posterior_analytic(data, benchmark),
        DistributionSpec::Normal { .. } => fit_posterior_conjugate(data, benchmark),
        DistributionSpec::SkewNormal(_) => Err(DacError::validation(
            "closed-form posterior needs a uniform or normal benchmark; use MCMC",
        )),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum McmcStart {
    /// Each chain starts at a random point a few posterior sds from the data mean.
    #[default]
    Overdispersed,
    /// Every chain starts at the data mean and sample sd.
    AtDataMean,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct McmcConfig {
    pub chains: usize,
    /// Retained draws per chain, after burn-in.
    pub iterations_per_chain: usize,
    pub burn_in: usize,
    /// Random-walk step for the mean; defaults to `sd / sqrt(N)`.
    pub proposal_sd: Option<f64>,
    pub seed: u64,
    pub start: McmcStart,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            chains: 4,
            iterations_per_chain: 25_000,
            burn_in: 1_000,
            proposal_sd: None,
            seed: 1,
            start: McmcStart::Overdispersed,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.chains < 2 {
            return Err(DacError::validation("MCMC needs at least 2 chains"));
        }
        if self.iterations_per_chain < 10 {
            return Err(DacError::validation("MCMC needs at least 10 iterations per chain"));
        }
        if self.burn_in >= self.iterations_per_chain {
            return Err(DacError::validation("burn_in must be smaller than iterations_per_chain"));
        }
        if let Some(s) = self.proposal_sd {
            if !(s > 0.0 && s.is_finite()) {
                return Err(DacError::validation(format!("proposal_sd must be > 0, got {s}")));
            }
        }
        Ok(())
    }
}

/// Raw output of the sampler.
#[derive(Debug, Clone, PartialEq)]
pub struct McmcRun {
    /// Post-burn-in draws of the mean, one vector per chain.
    pub chains: Vec<Vec<f64>>,
    pub acceptance_rate: f64,
}

struct Target<'a> {
    n: f64,
    mean: f64,
    ss: f64,
    prior: &'a DistributionSpec,
}

impl Target<'_> {
    // (theta, log sigma); the 1/sigma prior is flat in log sigma
    fn log_density(&self, theta: f64, log_sigma: f64) -> f64 {
        let prior = self.prior.log_density(theta);
        if prior == f64::NEG_INFINITY {
            return prior;
        }
        let d = self.mean - theta;
        prior - self.n * log_sigma - (self.ss + self.n * d * d) * (-2.0 * log_sigma).exp() / 2.0
    }
}

/// Random-walk Metropolis over `(mean, log sd)` with `y_i ~ N(mean, sd)`,
/// the benchmark as prior on the mean and `p(sd) ∝ 1 / sd`.
pub fn run_mcmc(data: &Dataset, benchmark: &DistributionSpec, cfg: &McmcConfig) -> Result<McmcRun> {
    cfg.validate()?;
    benchmark.validate()?;
    data.check_fit_preconditions()?;

    let n = data.len() as f64;
    let mean = data.mean();
    let sd = data.sd();
    let target = Target {
        n,
        mean,
        ss: sd * sd * (n - 1.0),
        prior: benchmark,
    };
    if target.log_density(mean, sd.ln()) == f64::NEG_INFINITY {
        return Err(DacError::validation(
            "benchmark assigns zero density to the data mean; the sampler cannot start",
        ));
    }
    let step_mean = cfg.proposal_sd.unwrap_or(sd / n.sqrt());
    let step_log_sd = (2.0 * n).sqrt().recip();

    let results: Vec<(Vec<f64>, usize)> = (0..cfg.chains)
        .into_par_iter()
        .map(|chain| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(chain as u64 + 1);
            let (mut theta, mut log_sigma) = match cfg.start {
                McmcStart::AtDataMean => (mean, sd.ln()),
                McmcStart::Overdispersed => {
                    let z1: f64 = rng.sample(StandardNormal);
                    let z2: f64 = rng.sample(StandardNormal);
                    (mean + 3.0 * step_mean * z1, sd.ln() + 3.0 * step_log_sd * z2)
                }
            };
            let mut current = target.log_density(theta, log_sigma);
            if current == f64::NEG_INFINITY {
                theta = mean;
                log_sigma = sd.ln();
                current = target.log_density(theta, log_sigma);
            }
            let mut draws = Vec::with_capacity(cfg.iterations_per_chain);
            let mut accepted = 0usize;
            for i in 0..cfg.burn_in + cfg.iterations_per_chain {
                let z1: f64 = rng.sample(StandardNormal);
                let z2: f64 = rng.sample(StandardNormal);
                let cand_theta = theta + step_mean * z1;
                let cand_log_sigma = log_sigma + step_log_sd * z2;
                let proposed = target.log_density(cand_theta, cand_log_sigma);
                let u: f64 = rng.random();
                if u.ln() < proposed - current {
                    theta = cand_theta;
                    log_sigma = cand_log_sigma;
                    current = proposed;
                    if i >= cfg.burn_in {
                        accepted += 1;
                    }
                }
                if i >= cfg.burn_in {
                    draws.push(theta);
                }
            }
            (draws, accepted)
        })
        .collect();

    let accepted: usize = results.iter().map(|(_, a)| a).sum();
    let total = cfg.chains * cfg.iterations_per_chain;
    Ok(McmcRun {
        chains: results.into_iter().map(|(d, _)| d).collect(),
        acceptance_rate: accepted as f64 / total as f64,
    })
}

/// Posterior via MCMC, moment-matched to a normal, with convergence diagnostics.
pub fn fit_posterior_mcmc(data: &Dataset, benchmark: &DistributionSpec, cfg: &McmcConfig) -> Result<PosteriorSummary> {
    let run = run_mcmc(data, benchmark, cfg)?;
    let r_hat = gelman_rubin(&run.chains)?;
    let pooled: Vec<f64> = run.chains.concat();
    let m = pooled.iter().sum::<f64>() / pooled.len() as f64;
    let var = pooled.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (pooled.len() - 1) as f64;

    let converged = r_hat <= RHAT_CONVERGENCE_THRESHOLD;
    let mut warnings = Vec::new();
    if !converged {
        warnings.push(format!(
            "MCMC not converged: r_hat = {r_hat:.4} exceeds {RHAT_CONVERGENCE_THRESHOLD}"
        ));
    }
    let (lo, hi) = ACCEPTANCE_RATE_RANGE;
    if !(lo..=hi).contains(&run.acceptance_rate) {
        warnings.push(format!(
            "MCMC acceptance rate {:.3} outside [{lo}, {hi}]; consider another proposal_sd",
            run.acceptance_rate
        ));
    }
    Ok(PosteriorSummary {
        summary: DistributionSpec::normal(m, var.sqrt())?,
        method: PosteriorMethod::Mcmc,
        diagnostics: Some(McmcDiagnostics {
            r_hat,
            chains: cfg.chains,
            iterations: cfg.iterations_per_chain,
            burn_in: cfg.burn_in,
            seed: cfg.seed,
            acceptance_rate: run.acceptance_rate,
            converged,
        }),
        warnings,
    })
}

/// Potential scale reduction factor of equally long chains, reported as at
/// least 1.
pub fn gelman_rubin(chains: &[Vec<f64>]) -> Result<f64> {
    if chains.len() < 2 {
        return Err(DacError::validation("gelman_rubin needs at least 2 chains"));
    }
    let n = chains[0].len();
    if chains.iter().any(|c| c.len() != n) {
        return Err(DacError::validation("gelman_rubin needs chains of equal length"));
    }
    if n < 10 {
        return Err(DacError::validation("gelman_rubin needs at least 10 draws per chain"));
    }
    let nf = n as f64;
    let m = chains.len() as f64;
    let stats: Vec<(f64, f64)> = chains
        .iter()
        .map(|c| {
            let mean = c.iter().sum::<f64>() / nf;
            let var = c.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (nf - 1.0);
            (mean, var)
        })
        .collect();
    let within = stats.iter().map(|s| s.1).sum::<f64>() / m;
    if !(within > 0.0) {
        return Err(DacError::validation("chains have zero within-chain variance"));
    }
    let grand = stats.iter().map(|s| s.0).sum::<f64>() / m;
    let between = nf * stats.iter().map(|s| (s.0 - grand).powi(2)).sum::<f64>() / (m - 1.0);
    let pooled = within * (nf - 1.0) / nf + between / nf;
    Ok((pooled / within).sqrt().max(1.0))
}
