//! The rank pipeline shared by the CLI and the HTTP service.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::document::{digest, PriorSetDocument, ReportDocument, ToolInfo, FORMAT_VERSION};
use crate::dac::evaluate;
use crate::dist::DistributionSpec;
use crate::divergence::QuadratureConfig;
use crate::error::{DacError, Result};
use crate::posterior::{fit_posterior, fit_posterior_mcmc, Dataset, McmcConfig, PosteriorSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    #[default]
    Analytic,
    Mcmc,
}

impl std::str::FromStr for FitMethod {
    type Err = DacError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Self::Analytic),
            "mcmc" => Ok(Self::Mcmc),
            other => Err(DacError::validation(format!("unknown method '{other}' (analytic|mcmc)"))),
        }
    }
}

/// Everything needed to produce a [`ReportDocument`]. Exactly one of
/// `observations` and `posterior` must be given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observations: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub posterior: Option<DistributionSpec>,
    pub benchmark: DistributionSpec,
    pub experts: PriorSetDocument,
    #[serde(default)]
    pub method: FitMethod,
    #[serde(default)]
    pub mcmc: McmcConfig,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_at: Option<String>,
}

impl RankRequest {
    pub fn new(benchmark: DistributionSpec, experts: PriorSetDocument) -> Self {
        Self {
            observations: None,
            posterior: None,
            benchmark,
            experts,
            method: FitMethod::Analytic,
            mcmc: McmcConfig::default(),
            quadrature: QuadratureConfig::default(),
            created_at: None,
        }
    }
}

fn fit(req: &RankRequest) -> Result<(PosteriorSummary, BTreeMap<String, String>)> {
    let mut digests = BTreeMap::new();
    let posterior = match (&req.observations, &req.posterior) {
        (Some(_), Some(_)) => {
            return Err(DacError::validation("give either observations or a posterior, not both"));
        }
        (None, None) => return Err(DacError::validation("either observations or a posterior is required")),
        (None, Some(spec)) => {
            digests.insert("posterior".into(), digest(spec));
            PosteriorSummary::supplied(*spec)?
        }
        (Some(y), None) => {
            digests.insert("observations".into(), digest(y));
            let data = Dataset::new(y.clone())?;
            match req.method {
                FitMethod::Analytic => fit_posterior(&data, &req.benchmark)?,
                FitMethod::Mcmc => fit_posterior_mcmc(&data, &req.benchmark, &req.mcmc)?,
            }
        }
    };
    Ok((posterior, digests))
}

/// Fit (or accept) the benchmark posterior, then score and rank the experts.
pub fn rank(req: &RankRequest) -> Result<ReportDocument> {
    req.benchmark.validate()?;
    let experts = req.experts.to_experts()?;
    let (posterior, mut input_digests) = fit(req)?;
    input_digests.insert("benchmark".into(), digest(&req.benchmark));
    input_digests.insert("priors".into(), digest(&req.experts));

    let mut report = evaluate(&posterior, &req.benchmark, &experts, &req.quadrature)?;
    report.provenance.created_at = req.created_at.clone();
    Ok(ReportDocument {
        format_version: FORMAT_VERSION,
        tool: ToolInfo::default(),
        input_digests,
        experts: req.experts.clone(),
        report,
    })
}
