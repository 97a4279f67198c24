//! Run configuration, start-point specs and output plumbing.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rand::Rng;
use serde::Serialize;
use serde_json::{Map, Value};
use whitney_core::body::{parse_body_json, AnyBody, BodySpec};
use whitney_core::rng::WalkRng;
use whitney_core::ConvexBody;

/// A flag value that parsed but does not make sense; reported with exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Everything needed to replay a run. Embedded in every output.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub version: &'static str,
    pub body_path: Option<String>,
    pub body: Option<Value>,
    pub walk: Option<String>,
    pub p: String,
    pub steps: Option<u64>,
    pub stride: Option<u64>,
    pub seed: u64,
    pub depth: Option<u32>,
    /// Where the output went; left out of the embedded copy so that a replay
    /// into another file is byte-identical.
    #[serde(skip)]
    pub output: Option<PathBuf>,
    pub options: Map<String, Value>,
}

impl RunConfig {
    pub fn new(command: &'static str, seed: u64, p: &str) -> Self {
        Self {
            command,
            version: env!("CARGO_PKG_VERSION"),
            body_path: None,
            body: None,
            walk: None,
            p: p.to_string(),
            steps: None,
            stride: None,
            seed,
            depth: None,
            output: None,
            options: Map::new(),
        }
    }

    pub fn option(&mut self, key: &str, value: impl Serialize) {
        self.options
            .insert(key.to_string(), serde_json::to_value(value).expect("serializable option"));
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("serializable config")
    }
}

/// Reads and builds a body, recording both the path and the parsed spec.
pub fn load_body(path: &Path, config: &mut RunConfig) -> Result<AnyBody> {
    let text = fs::read_to_string(path).with_context(|| format!("reading body file {}", path.display()))?;
    let spec: BodySpec = parse_body_json(&text)?;
    let body = spec.build()?;
    config.body_path = Some(path.display().to_string());
    config.body = Some(spec.to_value());
    Ok(body)
}

/// Where a walk starts.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StartSpec {
    /// The body's reference point.
    Auto,
    Point { x: Vec<f64> },
    /// A cube given by level and vertex; point walks start at its center.
    Cube { level: u32, vertex: Vec<i64> },
    /// Uniform on `z + h·B_∞` around the reference point `z`, redrawn until
    /// it lands in `K`.
    Uniform { half_width: f64 },
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    text.split(',')
        .map(|t| t.trim().parse::<T>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| usage(format!("bad {what} `{text}`: {e}")))
}

impl StartSpec {
    /// Parses `auto` (or `center`), `point:x1,...,xn`, `cube:level:v1,...,vn`
    /// or `uniform:h`.
    pub fn parse(text: &str) -> Result<Self> {
        let (kind, rest) = text.split_once(':').unwrap_or((text, ""));
        match kind {
            "auto" | "center" if rest.is_empty() => Ok(StartSpec::Auto),
            "point" => Ok(StartSpec::Point {
                x: parse_list(rest, "start point")?,
            }),
            "cube" => {
                let (level, vertex) = rest
                    .split_once(':')
                    .ok_or_else(|| usage("cube start must look like cube:level:v1,...,vn"))?;
                let level = level
                    .parse()
                    .map_err(|e| usage(format!("bad cube level `{level}`: {e}")))?;
                Ok(StartSpec::Cube {
                    level,
                    vertex: parse_list(vertex, "cube vertex")?,
                })
            }
            "uniform" => {
                let half_width: f64 = rest
                    .parse()
                    .map_err(|e| usage(format!("bad start half-width `{rest}`: {e}")))?;
                if !(half_width > 0.0) {
                    return Err(usage("start half-width must be positive"));
                }
                Ok(StartSpec::Uniform { half_width })
            }
            _ => Err(usage(format!(
                "unknown start `{text}`; expected auto, point:x1,...,xn, cube:level:v1,...,vn or uniform:h"
            ))),
        }
    }

    /// Draws a start point, which must lie in `K`. `scale` is the dyadic
    /// scale exponent used to place cube starts.
    pub fn draw<B: ConvexBody + ?Sized>(&self, body: &B, scale: i32, rng: &mut WalkRng) -> Result<Vec<f64>> {
        let x = match self {
            StartSpec::Auto => body.reference_point(),
            StartSpec::Point { x } => x.clone(),
            StartSpec::Cube { level, vertex } => whitney_core::whitney::DyadicCube::new(scale, *level, vertex).center(),
            StartSpec::Uniform { half_width } => body
                .reference_point()
                .iter()
                .map(|z| z + rng.random_range(-half_width..*half_width))
                .collect(),
        };
        if x.len() != body.dim() {
            return Err(usage(format!(
                "start has {} coordinates, body has dimension {}",
                x.len(),
                body.dim()
            )));
        }
        if !body.contains(&x)? {
            return Err(usage(format!("start point {x:?} is outside the body")));
        }
        Ok(x)
    }
}

/// Parses `inf` or a number `≥ 1`.
pub fn parse_p(text: &str) -> Result<whitney_core::Norm> {
    text.parse().map_err(|e| usage(format!("bad --p `{text}`: {e}")))
}

/// A JSON-lines document starting with the config.
pub fn json_lines(config: &RunConfig, records: impl IntoIterator<Item = Value>) -> String {
    let mut out = String::new();
    writeln!(out, "{}", serde_json::json!({ "config": config.to_json() })).unwrap();
    for r in records {
        writeln!(out, "{r}").unwrap();
    }
    out
}

/// A CSV document whose first line is `# config <json>`.
pub fn csv(config: &RunConfig, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = String::new();
    writeln!(out, "# config {}", config.to_json()).unwrap();
    writeln!(out, "{}", header.join(",")).unwrap();
    for row in rows {
        writeln!(out, "{}", row.join(",")).unwrap();
    }
    out
}

/// A single JSON object with the config under `config`.
pub fn json_document(config: &RunConfig, mut body: Map<String, Value>) -> String {
    body.insert("config".into(), config.to_json());
    let mut text = serde_json::to_string_pretty(&Value::Object(body)).expect("serializable output");
    text.push('\n');
    text
}

pub fn emit(config: &RunConfig, text: &str) -> Result<()> {
    match &config.output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}
