//! JSON has no infinity; divergences and ratios may be `+inf`.
//! Non-finite values are written as the strings `"inf"`, `"-inf"`, `"nan"`.

use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtF64(pub f64);

impl Serialize for ExtF64 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v = self.0;
        if v.is_finite() {
            s.serialize_f64(v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

impl<'de> Deserialize<'de> for ExtF64 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = ExtF64;

            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<ExtF64, E> {
                Ok(ExtF64(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<ExtF64, E> {
                Ok(ExtF64(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<ExtF64, E> {
                Ok(ExtF64(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<ExtF64, E> {
                match v {
                    "inf" | "+inf" | "Infinity" => Ok(ExtF64(f64::INFINITY)),
                    "-inf" | "-Infinity" => Ok(ExtF64(f64::NEG_INFINITY)),
                    "nan" | "NaN" => Ok(ExtF64(f64::NAN)),
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }
        }
        d.deserialize_any(V)
    }
}

pub mod extended_f64 {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        ExtF64(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        ExtF64::deserialize(d).map(|v| v.0)
    }
}

pub mod extended_f64_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| ExtF64(*x)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<ExtF64>::deserialize(d).map(|v| v.into_iter().map(|x| x.0).collect())
    }
}

/// Render a value the way it appears in text tables and CSV.
pub fn format_value(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize, Deserialize, PartialEq, Debug)]
    struct Holder {
        #[serde(with = "extended_f64")]
        x: f64,
        #[serde(with = "extended_f64_vec")]
        xs: Vec<f64>,
    }

    #[test]
    fn infinity_round_trips() {
        let h = Holder {
            x: f64::INFINITY,
            xs: vec![0.1, f64::INFINITY, -2.0],
        };
        let s = serde_json::to_string(&h).unwrap();
        assert_eq!(s, r#"{"x":"inf","xs":[0.1,"inf",-2.0]}"#);
        assert_eq!(serde_json::from_str::<Holder>(&s).unwrap(), h);
    }

    #[test]
    fn integers_accepted() {
        let h: Holder = serde_json::from_str(r#"{"x":3,"xs":[1,-2]}"#).unwrap();
        assert_eq!(h.x, 3.0);
        assert_eq!(h.xs, vec![1.0, -2.0]);
    }

    #[test]
    fn junk_string_rejected() {
        assert!(serde_json::from_str::<Holder>(r#"{"x":"big","xs":[]}"#).is_err());
    }
}
