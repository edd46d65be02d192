//! The three distribution families used for priors, benchmarks and posteriors.
//!
//! Skew-normal here is the two-piece construction: a normal whose halves on
//! either side of the location are stretched by `shape` (above) and
//! `1 / shape` (below). `shape = 1` is the plain normal; `shape > 1` moves mass
//! above the location, with `P(X < location) = 1 / (1 + shape^2)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{DacError, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

/// How the first two skew-normal parameters are to be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SkewParameterization {
    /// Location and scale of the base normal before skewing.
    #[default]
    LocationScale,
    /// Mean and standard deviation of the skewed distribution itself.
    MeanSd,
}

impl SkewParameterization {
    pub fn describe(self) -> &'static str {
        match self {
            Self::LocationScale => {
                "skew-normal (location, scale) are the pre-skew location and scale of the base normal"
            }
            Self::MeanSd => "skew-normal (mean, sd) are the mean and standard deviation of the skewed distribution",
        }
    }
}

/// Two-piece skew-normal parameters as supplied by the user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewNormal {
    /// Pre-skew location, or the mean under [`SkewParameterization::MeanSd`].
    pub location: f64,
    /// Pre-skew scale, or the standard deviation under [`SkewParameterization::MeanSd`].
    pub scale: f64,
    pub shape: f64,
    pub parameterization: SkewParameterization,
}

/// Mean and standard deviation of the standard two-piece skew-normal
/// (location 0, scale 1) with the given shape.
pub fn standard_skew_moments(shape: f64) -> (f64, f64) {
    let m1 = 2.0 / SQRT_2PI;
    let inv = shape.recip();
    let mean = m1 * (shape - inv);
    let var = shape * shape - 1.0 + inv * inv - mean * mean;
    (mean, var.sqrt())
}

impl SkewNormal {
    /// Location and scale of the underlying base normal.
    pub fn base(&self) -> (f64, f64) {
        match self.parameterization {
            SkewParameterization::LocationScale => (self.location, self.scale),
            SkewParameterization::MeanSd => {
                let (m, s) = standard_skew_moments(self.shape);
                let scale = self.scale / s;
                (self.location - m * scale, scale)
            }
        }
    }
}

/// A fully specified probability distribution on the real line.
///
/// Serializes as `{"family": ..., "parameters": {...}}`; see
/// [`SpecDocument`](crate::interface::SpecDocument).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "crate::interface::SpecDocument", into = "crate::interface::SpecDocument")]
pub enum DistributionSpec {
    Normal { mean: f64, sd: f64 },
    Uniform { lower: f64, upper: f64 },
    SkewNormal(SkewNormal),
}

/// A finite interval holding at least `covered_mass` of a distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveSupport {
    pub lower: f64,
    pub upper: f64,
    pub covered_mass: f64,
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

fn std_normal_ln_pdf(z: f64) -> f64 {
    -0.5 * z * z - LN_SQRT_2PI
}

impl DistributionSpec {
    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        Self::Normal { mean, sd }.validated()
    }

    /// Normal parameterized by its variance.
    pub fn normal_var(mean: f64, variance: f64) -> Result<Self> {
        if !(variance > 0.0) {
            return Err(DacError::validation(format!("normal variance must be > 0, got {variance}")));
        }
        Self::normal(mean, variance.sqrt())
    }

    pub fn uniform(lower: f64, upper: f64) -> Result<Self> {
        Self::Uniform { lower, upper }.validated()
    }

    /// Two-piece skew-normal from pre-skew location, scale and shape.
    pub fn skew_normal(location: f64, scale: f64, shape: f64) -> Result<Self> {
        Self::SkewNormal(SkewNormal {
            location,
            scale,
            shape,
            parameterization: SkewParameterization::LocationScale,
        })
        .validated()
    }

    /// Two-piece skew-normal whose mean and sd (after skewing) are given.
    pub fn skew_normal_mean_sd(mean: f64, sd: f64, shape: f64) -> Result<Self> {
        Self::SkewNormal(SkewNormal {
            location: mean,
            scale: sd,
            shape,
            parameterization: SkewParameterization::MeanSd,
        })
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Normal { mean, sd } => {
                if !mean.is_finite() {
                    return Err(DacError::validation(format!("normal mean must be finite, got {mean}")));
                }
                if !(sd > 0.0 && sd.is_finite()) {
                    return Err(DacError::validation(format!("normal sd must be finite and > 0, got {sd}")));
                }
            }
            Self::Uniform { lower, upper } => {
                if !(lower.is_finite() && upper.is_finite()) {
                    return Err(DacError::validation("uniform bounds must be finite"));
                }
                if !(lower < upper) {
                    return Err(DacError::validation(format!(
                        "uniform requires lower < upper, got [{lower}, {upper}]"
                    )));
                }
            }
            Self::SkewNormal(sn) => {
                if !sn.location.is_finite() {
                    return Err(DacError::validation("skew-normal location must be finite"));
                }
                if !(sn.scale > 0.0 && sn.scale.is_finite()) {
                    return Err(DacError::validation(format!(
                        "skew-normal scale must be finite and > 0, got {}",
                        sn.scale
                    )));
                }
                if !(sn.shape > 0.0 && sn.shape.is_finite()) {
                    return Err(DacError::validation(format!(
                        "skew-normal shape must be finite and > 0, got {}",
                        sn.shape
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn family(&self) -> &'static str {
        match self {
            Self::Normal { .. } => "normal",
            Self::Uniform { .. } => "uniform",
            Self::SkewNormal(_) => "skew_normal",
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        match *self {
            Self::Uniform { lower, upper } => {
                if x >= lower && x <= upper {
                    1.0 / (upper - lower)
                } else {
                    0.0
                }
            }
            _ => self.log_density(x).exp(),
        }
    }

    pub fn log_density(&self, x: f64) -> f64 {
        match *self {
            Self::Normal { mean, sd } => std_normal_ln_pdf((x - mean) / sd) - sd.ln(),
            Self::Uniform { lower, upper } => {
                if x >= lower && x <= upper {
                    -(upper - lower).ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            Self::SkewNormal(sn) => {
                let (loc, scale) = sn.base();
                let g = sn.shape;
                let z = (x - loc) / scale;
                let arg = if z >= 0.0 { z / g } else { z * g };
                (2.0 / (g + g.recip())).ln() - scale.ln() + std_normal_ln_pdf(arg)
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Self::Normal { mean, sd } => std_normal_cdf((x - mean) / sd),
            Self::Uniform { lower, upper } => ((x - lower) / (upper - lower)).clamp(0.0, 1.0),
            Self::SkewNormal(sn) => {
                let (loc, scale) = sn.base();
                let g = sn.shape;
                let g2 = g * g;
                let z = (x - loc) / scale;
                if z < 0.0 {
                    2.0 / (1.0 + g2) * std_normal_cdf(g * z)
                } else {
                    1.0 - 2.0 * g2 / (1.0 + g2) * std_normal_cdf(-z / g)
                }
            }
        }
    }

    /// Upper-tail probability `P(X > x)`, accurate far into the right tail.
    pub fn survival(&self, x: f64) -> f64 {
        match *self {
            Self::Normal { mean, sd } => std_normal_cdf(-(x - mean) / sd),
            Self::Uniform { lower, upper } => ((upper - x) / (upper - lower)).clamp(0.0, 1.0),
            Self::SkewNormal(sn) => {
                let (loc, scale) = sn.base();
                let g = sn.shape;
                let g2 = g * g;
                let z = (x - loc) / scale;
                if z < 0.0 {
                    1.0 - 2.0 / (1.0 + g2) * std_normal_cdf(g * z)
                } else {
                    2.0 * g2 / (1.0 + g2) * std_normal_cdf(-z / g)
                }
            }
        }
    }

    /// Characteristic width used for solver tolerances and brackets.
    fn scale(&self) -> f64 {
        match *self {
            Self::Normal { sd, .. } => sd,
            Self::Uniform { lower, upper } => upper - lower,
            Self::SkewNormal(sn) => {
                let (_, scale) = sn.base();
                scale * sn.shape.max(sn.shape.recip())
            }
        }
    }

    fn center(&self) -> f64 {
        match *self {
            Self::Normal { mean, .. } => mean,
            Self::Uniform { lower, upper } => 0.5 * (lower + upper),
            Self::SkewNormal(sn) => sn.base().0,
        }
    }

    /// Inverse cdf by bisection, to an absolute tolerance of `1e-10` times the
    /// distribution's scale.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(DacError::domain(format!("quantile probability must lie in (0, 1), got {p}")));
        }
        if let Self::Uniform { lower, upper } = *self {
            return Ok(lower + p * (upper - lower));
        }
        let scale = self.scale();
        let center = self.center();
        let tol = 1e-10 * scale;
        let mut lo = center - 40.0 * scale;
        let mut hi = center + 40.0 * scale;
        while self.cdf(lo) > p {
            lo -= 40.0 * scale;
        }
        while self.cdf(hi) < p {
            hi += 40.0 * scale;
        }
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Self::Normal { mean, .. } => mean,
            Self::Uniform { lower, upper } => 0.5 * (lower + upper),
            Self::SkewNormal(sn) => {
                let (loc, scale) = sn.base();
                loc + scale * standard_skew_moments(sn.shape).0
            }
        }
    }

    pub fn sd(&self) -> f64 {
        match *self {
            Self::Normal { sd, .. } => sd,
            Self::Uniform { lower, upper } => (upper - lower) / 12f64.sqrt(),
            Self::SkewNormal(sn) => sn.base().1 * standard_skew_moments(sn.shape).1,
        }
    }

    /// Points where the density is not smooth, for quadrature splitting.
    pub fn kinks(&self) -> Vec<f64> {
        match *self {
            Self::Normal { .. } => Vec::new(),
            Self::Uniform { lower, upper } => vec![lower, upper],
            Self::SkewNormal(sn) => vec![sn.base().0],
        }
    }

    /// Draw `n` values from a generator seeded with `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(DacError::validation("sample size must be at least 1"));
        }
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(self.sample_with(&mut rng, n))
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.draw(rng)).collect()
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Normal { mean, sd } => {
                let z: f64 = rng.sample(StandardNormal);
                mean + sd * z
            }
            Self::Uniform { lower, upper } => lower + rng.random::<f64>() * (upper - lower),
            Self::SkewNormal(sn) => {
                let (loc, scale) = sn.base();
                let g = sn.shape;
                let upper_branch = rng.random::<f64>() < g * g / (1.0 + g * g);
                let z: f64 = rng.sample(StandardNormal);
                let magnitude = z.abs();
                if upper_branch {
                    loc + scale * g * magnitude
                } else {
                    loc - scale * magnitude / g
                }
            }
        }
    }

    /// A finite interval holding at least `1 - epsilon` of the mass.
    ///
    /// Normal and skew-normal intervals are widened outward so each end sits an
    /// integer number of (base) scales away from the location.
    pub fn effective_support(&self, epsilon: f64) -> Result<EffectiveSupport> {
        self.validate()?;
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(DacError::domain(format!("support epsilon must lie in (0, 0.5), got {epsilon}")));
        }
        let (lower, upper) = match *self {
            Self::Uniform { lower, upper } => {
                return Ok(EffectiveSupport {
                    lower,
                    upper,
                    covered_mass: 1.0,
                })
            }
            Self::Normal { mean, sd } => {
                let std = Self::Normal { mean: 0.0, sd: 1.0 };
                let k = std.quantile(1.0 - 0.5 * epsilon)?.ceil();
                (mean - k * sd, mean + k * sd)
            }
            Self::SkewNormal(sn) => {
                let (loc, scale) = sn.base();
                let lo = self.quantile(0.5 * epsilon)?;
                let hi = self.quantile(1.0 - 0.5 * epsilon)?;
                let k_lo = ((loc - lo) / scale).ceil().max(1.0);
                let k_hi = ((hi - loc) / scale).ceil().max(1.0);
                (loc - k_lo * scale, loc + k_hi * scale)
            }
        };
        let outside = self.cdf(lower) + self.survival(upper);
        Ok(EffectiveSupport {
            lower,
            upper,
            covered_mass: (1.0 - outside).clamp(f64::MIN_POSITIVE, 1.0),
        })
    }
}
