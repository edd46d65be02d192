//! JSON documents: distribution specs, prior sets and DAC reports.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dac::{evaluate, DacReport, ExpertPrior};
use crate::dist::{DistributionSpec, SkewNormal, SkewParameterization};
use crate::error::{DacError, Result};

pub const FORMAT_VERSION: u32 = 1;
pub const TOOL_NAME: &str = "dac";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Wire form of a [`DistributionSpec`].
///
/// | family        | parameters                                   |
/// |---------------|----------------------------------------------|
/// | `normal`      | `mean`, `sd`                                 |
/// | `uniform`     | `lower`, `upper`                             |
/// | `skew_normal` | `location`, `scale`, `shape` (pre-skew)      |
/// | `skew_normal` | `mean`, `sd`, `shape` (moments after skewing)|
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecDocument {
    pub family: String,
    pub parameters: BTreeMap<String, f64>,
}

fn params<const N: usize>(pairs: [(&str, f64); N]) -> BTreeMap<String, f64> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

impl From<DistributionSpec> for SpecDocument {
    fn from(spec: DistributionSpec) -> Self {
        let parameters = match spec {
            DistributionSpec::Normal { mean, sd } => params([("mean", mean), ("sd", sd)]),
            DistributionSpec::Uniform { lower, upper } => params([("lower", lower), ("upper", upper)]),
            DistributionSpec::SkewNormal(sn) => match sn.parameterization {
                SkewParameterization::LocationScale => {
                    params([("location", sn.location), ("scale", sn.scale), ("shape", sn.shape)])
                }
                SkewParameterization::MeanSd => params([("mean", sn.location), ("sd", sn.scale), ("shape", sn.shape)]),
            },
        };
        Self {
            family: spec.family().to_string(),
            parameters,
        }
    }
}

impl TryFrom<SpecDocument> for DistributionSpec {
    type Error = DacError;

    fn try_from(doc: SpecDocument) -> Result<Self> {
        let p = &doc.parameters;
        let has = |keys: &[&str]| p.len() == keys.len() && keys.iter().all(|k| p.contains_key(*k));
        let spec = match doc.family.as_str() {
            "normal" if has(&["mean", "sd"]) => DistributionSpec::Normal {
                mean: p["mean"],
                sd: p["sd"],
            },
            "uniform" if has(&["lower", "upper"]) => DistributionSpec::Uniform {
                lower: p["lower"],
                upper: p["upper"],
            },
            "skew_normal" if has(&["location", "scale", "shape"]) => DistributionSpec::SkewNormal(SkewNormal {
                location: p["location"],
                scale: p["scale"],
                shape: p["shape"],
                parameterization: SkewParameterization::LocationScale,
            }),
            "skew_normal" if has(&["mean", "sd", "shape"]) => DistributionSpec::SkewNormal(SkewNormal {
                location: p["mean"],
                scale: p["sd"],
                shape: p["shape"],
                parameterization: SkewParameterization::MeanSd,
            }),
            "normal" => return Err(DacError::validation("normal needs exactly parameters {mean, sd}")),
            "uniform" => return Err(DacError::validation("uniform needs exactly parameters {lower, upper}")),
            "skew_normal" => {
                return Err(DacError::validation(
                    "skew_normal needs exactly {location, scale, shape} or {mean, sd, shape}",
                ))
            }
            other => {
                return Err(DacError::validation(format!(
                    "unknown family '{other}' (expected normal, uniform or skew_normal)"
                )))
            }
        };
        spec.validated()
    }
}

/// One expert prior as stored in a prior-set file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpertEntry {
    pub id: String,
    #[serde(default)]
    pub label: String,
    #[serde(flatten)]
    pub spec: SpecDocument,
}

/// A set of elicited expert priors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorSetDocument {
    pub format_version: u32,
    pub experts: Vec<ExpertEntry>,
    #[serde(default)]
    pub parameterization_note: String,
}

impl PriorSetDocument {
    pub fn from_experts(experts: &[ExpertPrior]) -> Self {
        let mut readings: Vec<&str> = experts
            .iter()
            .filter_map(|e| match e.spec {
                DistributionSpec::SkewNormal(sn) => Some(sn.parameterization.describe()),
                _ => None,
            })
            .collect();
        readings.dedup();
        Self {
            format_version: FORMAT_VERSION,
            experts: experts
                .iter()
                .map(|e| ExpertEntry {
                    id: e.id.clone(),
                    label: e.label.clone(),
                    spec: e.spec.into(),
                })
                .collect(),
            parameterization_note: readings.join("; "),
        }
    }

    /// Decode into expert priors; an empty set is an error.
    pub fn to_experts(&self) -> Result<Vec<ExpertPrior>> {
        if self.format_version != FORMAT_VERSION {
            return Err(DacError::validation(format!(
                "unsupported prior-set format_version {} (expected {FORMAT_VERSION})",
                self.format_version
            )));
        }
        if self.experts.is_empty() {
            return Err(DacError::validation("prior set contains no experts"));
        }
        self.experts
            .iter()
            .map(|e| {
                let spec = DistributionSpec::try_from(e.spec.clone())
                    .map_err(|err| DacError::validation(format!("expert '{}': {err}", e.id)))?;
                Ok(ExpertPrior::new(e.id.clone(), e.label.clone(), spec))
            })
            .collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| DacError::validation(format!("invalid prior-set document: {e}")))
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("prior set serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

impl Default for ToolInfo {
    fn default() -> Self {
        Self {
            name: TOOL_NAME.into(),
            version: TOOL_VERSION.into(),
        }
    }
}

/// A DAC report together with everything needed to recompute it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub format_version: u32,
    pub tool: ToolInfo,
    /// SHA-256 of the canonical JSON of each input.
    pub input_digests: BTreeMap<String, String>,
    pub experts: PriorSetDocument,
    pub report: DacReport,
}

impl ReportDocument {
    /// Re-run the scoring from the embedded posterior, benchmark, experts and
    /// quadrature settings.
    pub fn reevaluate(&self) -> Result<DacReport> {
        let experts = self.experts.to_experts()?;
        evaluate(&self.report.posterior, &self.report.benchmark, &experts, &self.report.quadrature)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| DacError::validation(format!("invalid report document: {e}")))
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Hex SHA-256 of the compact JSON encoding of `value`.
pub fn digest<T: Serialize + ?Sized>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("digest input serializes");
    hex::encode(Sha256::digest(&bytes))
}
