//! Scenario files: `{"command", "payload", "output", "seed"}`.

use std::path::{Path, PathBuf};

use serde::de::{DeserializeOwned, IgnoredAny};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Validate,
    Tensor,
    Legendre,
    Cone,
    Submersion,
    Average,
    Geodesic,
    Distance,
    Foliation,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Tensor => "tensor",
            Command::Legendre => "legendre",
            Command::Cone => "cone",
            Command::Submersion => "submersion",
            Command::Average => "average",
            Command::Geodesic => "geodesic",
            Command::Distance => "distance",
            Command::Foliation => "foliation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    pub path: PathBuf,
    #[serde(default)]
    pub format: Format,
}

/// Everything but the payload, which is parsed in a second, typed pass.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Header {
    pub command: Command,
    #[allow(dead_code)]
    pub payload: IgnoredAny,
    pub output: Option<Output>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Deserialize)]
struct Typed<P> {
    payload: P,
}

/// A parse failure with the JSON path and source position of the offending value.
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn describe(err: serde_path_to_error::Error<serde_json::Error>) -> InputError {
    let path = err.path().to_string();
    let inner = err.into_inner();
    if path.is_empty() || path == "." {
        InputError(inner.to_string())
    } else {
        InputError(format!("{path}: {inner}"))
    }
}

fn parse<T: DeserializeOwned>(text: &str) -> Result<T, InputError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut de).map_err(describe)?;
    de.end().map_err(|e| InputError(e.to_string()))?;
    Ok(value)
}

pub struct Scenario {
    pub header: Header,
    text: String,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, InputError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))?;
        Self::from_text(text)
    }

    pub fn from_text(text: String) -> Result<Self, InputError> {
        let header = parse::<Header>(&text)?;
        Ok(Scenario { header, text })
    }

    /// The payload as `P`; error paths are prefixed with `payload`.
    pub fn payload<P: DeserializeOwned>(&self) -> Result<P, InputError> {
        parse::<Typed<P>>(&self.text).map(|t| t.payload)
    }
}
