//! Data Agreement Criterion scoring and ranking of expert priors.
//!
//! Each expert's score is `KL(posterior || expert) / KL(posterior || benchmark)`.
//! A score above 1 means the expert prior loses more information about the
//! benchmark posterior than the benchmark itself does: prior-data conflict.

use std::cmp::Ordering;
use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{DistributionSpec, SkewParameterization};
use crate::divergence::{kl, QuadratureConfig};
use crate::error::{DacError, Result};
use crate::posterior::PosteriorSummary;
use crate::serde_ext;

/// Benchmark KL at or below this is treated as zero (benchmark equals posterior).
pub const MIN_BENCHMARK_KL: f64 = 1e-12;

pub const TIE_RULE: &str = "equal DAC values are ranked by ascending expert id";

#[derive(Debug, Clone, PartialEq)]
pub struct ExpertPrior {
    pub id: String,
    pub label: String,
    pub spec: DistributionSpec,
}

impl ExpertPrior {
    pub fn new(id: impl Into<String>, label: impl Into<String>, spec: DistributionSpec) -> Self {
        Self {
            id: id.into(),
            label: label.into(),
            spec,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DacEntry {
    pub expert_id: String,
    pub label: String,
    #[serde(with = "serde_ext::extended_f64")]
    pub kl_value: f64,
    #[serde(with = "serde_ext::extended_f64")]
    pub dac_value: f64,
    pub conflict: bool,
    pub rank: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Provenance {
    pub parameterization_notes: Vec<String>,
    pub tie_rule: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub seeds: Vec<u64>,
    /// Only recorded when the caller supplies it, so reports stay reproducible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_at: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DacReport {
    pub posterior: PosteriorSummary,
    pub benchmark: DistributionSpec,
    pub benchmark_kl: f64,
    /// Sorted by rank.
    pub entries: Vec<DacEntry>,
    pub quadrature: QuadratureConfig,
    pub provenance: Provenance,
}

impl DacReport {
    pub fn entry(&self, expert_id: &str) -> Option<&DacEntry> {
        self.entries.iter().find(|e| e.expert_id == expert_id)
    }
}

fn parameterization_notes(benchmark: &DistributionSpec, experts: &[ExpertPrior]) -> Vec<String> {
    let mut notes = Vec::new();
    let mut seen = HashSet::new();
    for spec in std::iter::once(benchmark).chain(experts.iter().map(|e| &e.spec)) {
        if let DistributionSpec::SkewNormal(sn) = spec {
            if seen.insert(sn.parameterization) {
                notes.push(sn.parameterization.describe().to_string());
            }
        }
    }
    if seen.is_empty() {
        notes.push(SkewParameterization::LocationScale.describe().to_string());
    }
    notes.push("normal second parameter is a standard deviation".to_string());
    notes
}

/// Score every expert against the benchmark posterior and rank them.
pub fn evaluate(
    posterior: &PosteriorSummary,
    benchmark: &DistributionSpec,
    experts: &[ExpertPrior],
    cfg: &QuadratureConfig,
) -> Result<DacReport> {
    if experts.is_empty() {
        return Err(DacError::validation("at least one expert prior is required"));
    }
    let mut ids = HashSet::new();
    for e in experts {
        if !ids.insert(e.id.as_str()) {
            return Err(DacError::validation(format!("duplicate expert id '{}'", e.id)));
        }
        e.spec
            .validate()
            .map_err(|err| DacError::validation(format!("expert '{}': {err}", e.id)))?;
    }

    let post = &posterior.summary;
    let bench = kl(post, benchmark, cfg)?;
    if bench.infinite {
        return Err(DacError::UndefinedRatio(
            "benchmark prior has zero density where the posterior has mass; benchmark KL is infinite".into(),
        ));
    }
    if bench.value <= MIN_BENCHMARK_KL {
        return Err(DacError::UndefinedRatio(format!(
            "benchmark KL is {:.3e}: the benchmark coincides with the posterior",
            bench.value
        )));
    }

    let kls: Vec<_> = experts
        .par_iter()
        .map(|e| kl(post, &e.spec, cfg))
        .collect::<Result<_>>()?;

    let mut provenance = Provenance {
        parameterization_notes: parameterization_notes(benchmark, experts),
        tie_rule: TIE_RULE.to_string(),
        ..Provenance::default()
    };
    provenance.warnings.extend(posterior.warnings.iter().cloned());
    if let Some(d) = &posterior.diagnostics {
        provenance.seeds.push(d.seed);
    }
    if let Some(w) = &bench.warning {
        provenance.warnings.push(format!("benchmark KL: {w}"));
    }
    if bench.floored {
        provenance.warnings.push("benchmark KL computed with a density floor".into());
    }

    let mut entries: Vec<DacEntry> = experts
        .iter()
        .zip(kls)
        .map(|(e, r)| {
            if let Some(w) = &r.warning {
                provenance.warnings.push(format!("expert '{}' KL: {w}", e.id));
            }
            if r.floored {
                provenance
                    .warnings
                    .push(format!("expert '{}' KL computed with a density floor", e.id));
            }
            let dac_value = r.value / bench.value;
            DacEntry {
                expert_id: e.id.clone(),
                label: e.label.clone(),
                kl_value: r.value,
                dac_value,
                conflict: dac_value > 1.0,
                rank: 0,
                warning: r.warning,
            }
        })
        .collect();

    entries.sort_by(|a, b| {
        a.dac_value
            .partial_cmp(&b.dac_value)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.expert_id.cmp(&b.expert_id))
    });
    for (i, e) in entries.iter_mut().enumerate() {
        e.rank = i + 1;
    }

    Ok(DacReport {
        posterior: posterior.clone(),
        benchmark: *benchmark,
        benchmark_kl: bench.value,
        entries,
        quadrature: *cfg,
        provenance,
    })
}

/// Whether the benchmark is vague enough relative to the posterior for
/// rankings not to depend on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityNote {
    pub uninformative: bool,
    pub message: String,
}

impl std::fmt::Display for StabilityNote {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

/// Flags a benchmark as informative when a normal benchmark's sd is at most
/// ten posterior sds, or a bounded benchmark does not cover the posterior mean
/// plus or minus ten posterior sds.
pub fn rank_stability_note(report: &DacReport) -> StabilityNote {
    let (m, s) = (report.posterior.mean(), report.posterior.sd());
    let (uninformative, detail) = match report.benchmark {
        DistributionSpec::Uniform { lower, upper } => {
            let ok = lower <= m - 10.0 * s && upper >= m + 10.0 * s;
            (
                ok,
                format!(
                    "support [{lower}, {upper}] vs posterior mean ± 10 sd = [{:.6}, {:.6}]",
                    m - 10.0 * s,
                    m + 10.0 * s
                ),
            )
        }
        ref b => {
            let sd = b.sd();
            (
                sd > 10.0 * s,
                format!("benchmark sd {sd:.6} vs 10 × posterior sd = {:.6}", 10.0 * s),
            )
        }
    };
    let message = if uninformative {
        format!("uninformative: yes ({detail}); rankings should not depend on the benchmark choice")
    } else {
        format!(
            "uninformative: no ({detail}); the benchmark is informative, so conflict \
             classification and possibly rankings depend on it"
        )
    };
    StabilityNote { uninformative, message }
}
