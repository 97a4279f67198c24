use serde::de::DeserializeOwned;
use serde_json::{json, Map, Value};

use super::{AxisBox, ConvexBody, HPolytope, LpBall};
use crate::error::{Error, Result};
use crate::norm::Norm;

/// A body description as read from JSON.
///
/// The kind is inferred from the keys present: `"A"` selects a polytope,
/// `"lower"` a box and `"radius"` a ball.
#[derive(Debug, Clone, PartialEq)]
pub enum BodySpec {
    Polytope {
        normals: Vec<Vec<f64>>,
        offsets: Vec<f64>,
        interior_point: Vec<f64>,
        volume: Option<f64>,
        precision_bits: Option<u32>,
    },
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
        p: Norm,
    },
}

/// Parses a body description, naming the offending field on failure.
pub fn parse_body_json(text: &str) -> Result<BodySpec> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| Error::invalid_body("(document)", e.to_string()))?;
    BodySpec::from_value(&value)
}

fn field<T: DeserializeOwned>(obj: &Map<String, Value>, name: &str) -> Result<T> {
    let v = obj.get(name).ok_or_else(|| Error::invalid_body(name, "missing"))?;
    serde_json::from_value(v.clone()).map_err(|e| Error::invalid_body(name, e.to_string()))
}

fn optional<T: DeserializeOwned>(obj: &Map<String, Value>, name: &str) -> Result<Option<T>> {
    match obj.get(name) {
        None | Some(Value::Null) => Ok(None),
        Some(_) => field(obj, name).map(Some),
    }
}

fn parse_norm(v: &Value) -> Result<Norm> {
    match v {
        Value::Number(x) => x
            .as_f64()
            .ok_or_else(|| Error::invalid_body("p", "not a number"))
            .and_then(|p| Norm::new(p).map_err(|e| Error::invalid_body("p", e.to_string()))),
        Value::String(s) => s.parse().map_err(|e: Error| Error::invalid_body("p", e.to_string())),
        _ => Err(Error::invalid_body("p", "expected a number or \"inf\"")),
    }
}

impl BodySpec {
    pub fn from_value(value: &Value) -> Result<Self> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::invalid_body("(document)", "expected a JSON object"))?;
        if obj.contains_key("A") {
            let n: usize = field(obj, "n")?;
            let interior_point: Vec<f64> = field(obj, "interior_point")?;
            if interior_point.len() != n {
                return Err(Error::invalid_body(
                    "interior_point",
                    format!("length {} but n = {n}", interior_point.len()),
                ));
            }
            Ok(BodySpec::Polytope {
                normals: field(obj, "A")?,
                offsets: field(obj, "b")?,
                interior_point,
                volume: optional(obj, "volume")?,
                precision_bits: optional(obj, "precision_bits")?,
            })
        } else if obj.contains_key("lower") {
            Ok(BodySpec::Box {
                lower: field(obj, "lower")?,
                upper: field(obj, "upper")?,
            })
        } else if obj.contains_key("radius") {
            let p = match obj.get("p") {
                Some(v) => parse_norm(v)?,
                None => return Err(Error::invalid_body("p", "missing")),
            };
            Ok(BodySpec::Ball {
                center: field(obj, "center")?,
                radius: field(obj, "radius")?,
                p,
            })
        } else {
            Err(Error::invalid_body(
                "(document)",
                "cannot tell the body kind: expected \"A\", \"lower\" or \"radius\"",
            ))
        }
    }

    pub fn to_value(&self) -> Value {
        match self {
            BodySpec::Polytope {
                normals,
                offsets,
                interior_point,
                volume,
                precision_bits,
            } => {
                let mut v = json!({
                    "n": interior_point.len(),
                    "A": normals,
                    "b": offsets,
                    "interior_point": interior_point,
                });
                if let Some(vol) = volume {
                    v["volume"] = json!(vol);
                }
                if let Some(bits) = precision_bits {
                    v["precision_bits"] = json!(bits);
                }
                v
            }
            BodySpec::Box { lower, upper } => json!({ "lower": lower, "upper": upper }),
            BodySpec::Ball { center, radius, p } => {
                let p = match p {
                    Norm::Inf => json!("inf"),
                    Norm::P(v) => json!(v),
                };
                json!({ "center": center, "radius": radius, "p": p })
            }
        }
    }

    pub fn build(&self) -> Result<AnyBody> {
        Ok(match self.clone() {
            BodySpec::Polytope {
                normals,
                offsets,
                interior_point,
                volume,
                precision_bits,
            } => {
                let mut k = HPolytope::new(normals, offsets, interior_point)?;
                if let Some(v) = volume {
                    if !(v.is_finite() && v > 0.0) {
                        return Err(Error::invalid_body("volume", format!("must be positive, got {v}")));
                    }
                    k = k.with_volume(v);
                }
                if let Some(bits) = precision_bits {
                    if bits == 0 || bits > 60 {
                        return Err(Error::invalid_body("precision_bits", "must be in 1..=60"));
                    }
                    k = k.with_precision_bits(bits);
                }
                AnyBody::Polytope(k)
            }
            BodySpec::Box { lower, upper } => AnyBody::Box(AxisBox::new(lower, upper)?),
            BodySpec::Ball { center, radius, p } => AnyBody::Ball(LpBall::new(center, radius, p)?),
        })
    }
}

/// One of the concrete bodies, as produced by [`BodySpec::build`].
#[derive(Debug, Clone)]
pub enum AnyBody {
    Polytope(HPolytope),
    Box(AxisBox),
    Ball(LpBall),
}

macro_rules! delegate {
    ($self:ident, $b:ident => $e:expr) => {
        match $self {
            AnyBody::Polytope($b) => $e,
            AnyBody::Box($b) => $e,
            AnyBody::Ball($b) => $e,
        }
    };
}

impl ConvexBody for AnyBody {
    fn dim(&self) -> usize {
        delegate!(self, b => b.dim())
    }

    fn membership(&self, x: &[f64]) -> bool {
        delegate!(self, b => b.membership(x))
    }

    fn outer_radius(&self) -> f64 {
        delegate!(self, b => b.outer_radius())
    }

    fn reference_point(&self) -> Vec<f64> {
        delegate!(self, b => b.reference_point())
    }

    fn inner_radius(&self, p: Norm) -> f64 {
        delegate!(self, b => b.inner_radius(p))
    }

    fn precision_bits(&self) -> u32 {
        delegate!(self, b => b.precision_bits())
    }

    fn volume(&self) -> Option<f64> {
        delegate!(self, b => b.volume())
    }

    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        delegate!(self, b => b.bounds())
    }

    fn exact_depth(&self, x: &[f64], p: Norm) -> Option<f64> {
        delegate!(self, b => b.exact_depth(x, p))
    }

    fn exact_chord(&self, x: &[f64], axis: usize) -> Option<(f64, f64)> {
        delegate!(self, b => b.exact_chord(x, axis))
    }

    fn exact_exterior_distance(&self, x: &[f64], p: Norm) -> Option<f64> {
        delegate!(self, b => b.exact_exterior_distance(x, p))
    }

    fn exact_box_meets_interior(&self, lo: &[f64], hi: &[f64]) -> Option<bool> {
        delegate!(self, b => b.exact_box_meets_interior(lo, hi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field_of(err: Error) -> String {
        match err {
            Error::InvalidBody { field, .. } => field,
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn parses_polytope() {
        let text = r#"{"n": 2, "A": [[1, 1], [-1, 0], [0, -1]], "b": [1, 0, 0],
                       "interior_point": [0.25, 0.25], "volume": 0.5}"#;
        let spec = parse_body_json(text).unwrap();
        let body = spec.build().unwrap();
        assert!(body.contains(&[0.1, 0.1]).unwrap());
        assert_eq!(body.volume(), Some(0.5));
    }

    #[test]
    fn round_trips_through_json() {
        for text in [
            r#"{"lower": [-0.4, -0.4], "upper": [0.4, 0.4]}"#,
            r#"{"center": [0.1, 0.2, 0.3], "radius": 0.7, "p": "inf"}"#,
            r#"{"center": [0.0, 0.0], "radius": 0.1, "p": 1.5}"#,
            r#"{"n": 1, "A": [[1], [-1]], "b": [0.30000000000000004, 1e-300], "interior_point": [0.0]}"#,
        ] {
            let spec = parse_body_json(text).unwrap();
            let again = parse_body_json(&spec.to_value().to_string()).unwrap();
            assert_eq!(spec, again);
        }
    }

    #[test]
    fn errors_name_the_field() {
        assert_eq!(field_of(parse_body_json(r#"{"lower": [0, 0]}"#).unwrap_err()), "upper");
        assert_eq!(
            field_of(parse_body_json(r#"{"n": 2, "A": [[1, 0]], "b": "x", "interior_point": [0, 0]}"#).unwrap_err()),
            "b"
        );
        assert_eq!(
            field_of(parse_body_json(r#"{"center": [0], "radius": 1, "p": 0.5}"#).unwrap_err()),
            "p"
        );
        assert_eq!(field_of(parse_body_json("[1, 2").unwrap_err()), "(document)");
        let bad = parse_body_json(r#"{"lower": [1, 0], "upper": [0, 1]}"#).unwrap().build();
        assert_eq!(field_of(bad.unwrap_err()), "upper");
    }
}
