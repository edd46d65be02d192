//! Kullback-Leibler divergence `KL(p || q) = ∫ p log(p / q)` by adaptive
//! quadrature over the effective support of `p`, plus closed-form oracles.

use serde::{Deserialize, Serialize};

use crate::dist::DistributionSpec;
use crate::error::{DacError, Result};
use crate::quadrature;
use crate::serde_ext;

pub const DEFAULT_RELATIVE_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_MAX_SUBDIVISIONS: usize = 2000;
pub const DEFAULT_SUPPORT_EPSILON: f64 = 1e-12;

/// What to do where `q` has zero density but `p` does not.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DensityFloorPolicy {
    /// The divergence is infinite.
    #[default]
    Infinite,
    /// Clamp `q` from below at this density. Exploratory use only.
    Floor(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureConfig {
    pub relative_tolerance: f64,
    pub max_subdivisions: usize,
    pub support_epsilon: f64,
    pub density_floor_policy: DensityFloorPolicy,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            relative_tolerance: DEFAULT_RELATIVE_TOLERANCE,
            max_subdivisions: DEFAULT_MAX_SUBDIVISIONS,
            support_epsilon: DEFAULT_SUPPORT_EPSILON,
            density_floor_policy: DensityFloorPolicy::Infinite,
        }
    }
}

impl QuadratureConfig {
    pub fn with_relative_tolerance(relative_tolerance: f64) -> Self {
        Self {
            relative_tolerance,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.relative_tolerance > 0.0 && self.relative_tolerance.is_finite()) {
            return Err(DacError::validation(format!(
                "relative_tolerance must be > 0, got {}",
                self.relative_tolerance
            )));
        }
        if self.max_subdivisions < 1 {
            return Err(DacError::validation("max_subdivisions must be at least 1"));
        }
        if !(self.support_epsilon > 0.0 && self.support_epsilon < 0.5) {
            return Err(DacError::validation(format!(
                "support_epsilon must lie in (0, 0.5), got {}",
                self.support_epsilon
            )));
        }
        if let DensityFloorPolicy::Floor(v) = self.density_floor_policy {
            if !(v > 0.0 && v.is_finite()) {
                return Err(DacError::validation(format!("density floor must be > 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// A KL divergence estimate with its diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KlResult {
    #[serde(with = "serde_ext::extended_f64")]
    pub value: f64,
    pub estimated_error: f64,
    /// Mass of `p` left outside the integration domain.
    pub truncated_mass: f64,
    pub infinite: bool,
    /// Set when `q` was clamped by a [`DensityFloorPolicy::Floor`].
    #[serde(default)]
    pub floored: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl KlResult {
    fn infinite(truncated_mass: f64) -> Self {
        Self {
            value: f64::INFINITY,
            estimated_error: 0.0,
            truncated_mass,
            infinite: true,
            floored: false,
            warning: None,
        }
    }
}

/// `KL(p || q)`: information lost when `q` is used to approximate `p`.
pub fn kl(p: &DistributionSpec, q: &DistributionSpec, cfg: &QuadratureConfig) -> Result<KlResult> {
    p.validate()?;
    q.validate()?;
    cfg.validate()?;

    let support = p.effective_support(cfg.support_epsilon)?;
    let (mut lower, mut upper) = (support.lower, support.upper);
    let mut truncated_mass = p.cdf(lower) + p.survival(upper);
    let floor_ln = match cfg.density_floor_policy {
        DensityFloorPolicy::Infinite => None,
        DensityFloorPolicy::Floor(v) => Some(v.ln()),
    };
    let mut floored = false;

    if let DistributionSpec::Uniform { lower: a, upper: b } = *q {
        let outside = p.cdf(a) + p.survival(b);
        if outside > cfg.support_epsilon || (a >= upper || b <= lower) {
            match floor_ln {
                None => return Ok(KlResult::infinite(truncated_mass)),
                Some(_) => floored = true,
            }
        } else {
            // p's mass outside q's support is negligible; integrate over the overlap
            lower = lower.max(a);
            upper = upper.min(b);
            truncated_mass = p.cdf(lower) + p.survival(upper);
        }
    }

    let integrand = |x: f64| {
        let lp = p.log_density(x);
        if lp == f64::NEG_INFINITY {
            return 0.0;
        }
        let mut lq = q.log_density(x);
        if let Some(f) = floor_ln {
            lq = lq.max(f);
        }
        lp.exp() * (lp - lq)
    };

    let mut breakpoints = p.kinks();
    breakpoints.extend(q.kinks());
    let integral = quadrature::integrate(
        integrand,
        lower,
        upper,
        &breakpoints,
        cfg.relative_tolerance,
        0.0,
        cfg.max_subdivisions,
    );

    if integral.value.is_infinite() && integral.value > 0.0 {
        return Ok(KlResult::infinite(truncated_mass));
    }
    if integral.value.is_nan() {
        return Err(DacError::Numerical("KL integrand produced NaN".into()));
    }

    let mut warning = (!integral.converged).then(|| {
        format!(
            "subdivision budget of {} exhausted; estimated error {:.3e} exceeds tolerance",
            cfg.max_subdivisions, integral.estimated_error
        )
    });
    let mut value = integral.value;
    if value < 0.0 {
        if value < -1e-10 {
            warning.get_or_insert_with(|| format!("negative KL estimate {value:.3e} clamped to 0"));
        }
        value = 0.0;
    }

    Ok(KlResult {
        value,
        estimated_error: integral.estimated_error,
        truncated_mass,
        infinite: false,
        floored,
        warning,
    })
}

/// Closed-form `KL(p || q)` for two normals.
pub fn kl_closed_normal(p: &DistributionSpec, q: &DistributionSpec) -> Result<f64> {
    match (*p, *q) {
        (DistributionSpec::Normal { mean: mp, sd: sp }, DistributionSpec::Normal { mean: mq, sd: sq }) => {
            p.validate()?;
            q.validate()?;
            let dm = mp - mq;
            Ok((sq / sp).ln() + (sp * sp + dm * dm) / (2.0 * sq * sq) - 0.5)
        }
        _ => Err(DacError::domain("closed-form normal KL needs two normal distributions")),
    }
}

/// Closed-form `KL(p || q)` for normal `p` and uniform `q`: the log width of
/// `q` minus the entropy of `p`, or infinity when `p` puts more than
/// [`DEFAULT_SUPPORT_EPSILON`] of its mass outside `q`.
pub fn kl_closed_normal_uniform(p: &DistributionSpec, q: &DistributionSpec) -> Result<f64> {
    match (*p, *q) {
        (DistributionSpec::Normal { sd, .. }, DistributionSpec::Uniform { lower, upper }) => {
            p.validate()?;
            q.validate()?;
            let outside = p.cdf(lower) + p.survival(upper);
            if outside >= DEFAULT_SUPPORT_EPSILON {
                return Ok(f64::INFINITY);
            }
            let entropy = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E * sd * sd).ln();
            Ok((upper - lower).ln() - entropy)
        }
        _ => Err(DacError::domain(
            "closed-form normal/uniform KL needs a normal p and a uniform q",
        )),
    }
}
