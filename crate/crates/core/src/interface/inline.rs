//! Inline distribution syntax used on the command line: `family:p1,p2[,p3]`.
//!
//! - `normal:mean,sd`
//! - `normal_var:mean,variance`
//! - `uniform:lower,upper`
//! - `skew_normal:location,scale,shape` (pre-skew location and scale)
//! - `skew_normal_moments:mean,sd,shape` (moments of the skewed distribution)

use crate::dist::{DistributionSpec, SkewParameterization};
use crate::error::{DacError, Result};

pub fn parse_spec(text: &str) -> Result<DistributionSpec> {
    let (family, rest) = text
        .trim()
        .split_once(':')
        .ok_or_else(|| DacError::validation(format!("expected family:p1,p2[,p3], got '{text}'")))?;
    let values = rest
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| DacError::validation(format!("'{}' is not a number in '{text}'", v.trim())))
        })
        .collect::<Result<Vec<f64>>>()?;
    let arity = |n: usize| {
        if values.len() == n {
            Ok(())
        } else {
            Err(DacError::validation(format!(
                "{family} takes {n} parameters, got {} in '{text}'",
                values.len()
            )))
        }
    };
    match family.trim() {
        "normal" => {
            arity(2)?;
            DistributionSpec::normal(values[0], values[1])
        }
        "normal_var" => {
            arity(2)?;
            DistributionSpec::normal_var(values[0], values[1])
        }
        "uniform" => {
            arity(2)?;
            DistributionSpec::uniform(values[0], values[1])
        }
        "skew_normal" => {
            arity(3)?;
            DistributionSpec::skew_normal(values[0], values[1], values[2])
        }
        "skew_normal_moments" => {
            arity(3)?;
            DistributionSpec::skew_normal_mean_sd(values[0], values[1], values[2])
        }
        other => Err(DacError::validation(format!("unknown family '{other}'"))),
    }
}

/// Inverse of [`parse_spec`].
pub fn format_spec(spec: &DistributionSpec) -> String {
    match *spec {
        DistributionSpec::Normal { mean, sd } => format!("normal:{mean},{sd}"),
        DistributionSpec::Uniform { lower, upper } => format!("uniform:{lower},{upper}"),
        DistributionSpec::SkewNormal(sn) => {
            let family = match sn.parameterization {
                SkewParameterization::LocationScale => "skew_normal",
                SkewParameterization::MeanSd => "skew_normal_moments",
            };
            format!("{family}:{},{},{}", sn.location, sn.scale, sn.shape)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_each_family() {
        assert_eq!(parse_spec("uniform:0,5").unwrap(), DistributionSpec::uniform(0.0, 5.0).unwrap());
        assert_eq!(parse_spec(" normal: 0.5 , 1 ").unwrap(), DistributionSpec::normal(0.5, 1.0).unwrap());
        assert_eq!(parse_spec("normal_var:0,900").unwrap(), DistributionSpec::normal(0.0, 30.0).unwrap());
        assert_eq!(
            parse_spec("skew_normal:2.15,0.09,0.78").unwrap(),
            DistributionSpec::skew_normal(2.15, 0.09, 0.78).unwrap()
        );
        assert_eq!(
            parse_spec("skew_normal_moments:2.15,0.09,0.78").unwrap(),
            DistributionSpec::skew_normal_mean_sd(2.15, 0.09, 0.78).unwrap()
        );
    }

    #[test]
    fn rejects_malformed() {
        for bad in ["normal", "normal:0", "normal:0,1,2", "uniform:5,0", "beta:1,2", "normal:a,1", "normal:0,-1"] {
            assert!(parse_spec(bad).is_err(), "{bad}");
        }
    }

    proptest! {
        #[test]
        fn format_then_parse_is_identity(m in -1e6f64..1e6, s in 1e-6f64..1e6, g in 1e-3f64..1e3, mom in any::<bool>()) {
            let specs = [
                DistributionSpec::normal(m, s).unwrap(),
                DistributionSpec::uniform(m, m + s).unwrap(),
                if mom {
                    DistributionSpec::skew_normal_mean_sd(m, s, g).unwrap()
                } else {
                    DistributionSpec::skew_normal(m, s, g).unwrap()
                },
            ];
            for spec in specs {
                prop_assert_eq!(parse_spec(&format_spec(&spec)).unwrap(), spec);
            }
        }
    }
}
