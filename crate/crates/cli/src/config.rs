//! Run configuration: the frame plus everything a command needs. Built from
//! an optional JSON file with command-line flags layered on top.

use std::path::Path;

use qcalc_core::config::{FrameSpec, KindTag, RationalText};
use qcalc_core::{parse_rational, QcalcError, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frame: Option<FrameSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub function: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<RationalText>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base: Option<RationalText>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cases: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

impl RunConfig {
    /// Accepts either a full run config or a bare frame definition (an
    /// object with a top-level `kind`).
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| QcalcError::Parse(format!("config: {e}")))?;
        if value.get("kind").is_some() {
            return Ok(RunConfig { frame: Some(FrameSpec::from_json(text)?), ..Default::default() });
        }
        serde_json::from_value(value).map_err(|e| QcalcError::Parse(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| QcalcError::Parse(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    #[cfg(test)]
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("run config serializes")
    }
}

/// Frame flags shared by every command.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct FrameArgs {
    /// Calculus family: h, q, h_symmetric, q_symmetric, affine
    #[arg(long, global = true, value_parser = parse_kind)]
    pub kind: Option<KindTag>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub h: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub q: Option<String>,
    #[arg(long = "h-prime", global = true, allow_hyphen_values = true)]
    pub h_prime: Option<String>,
    #[arg(long = "q-prime", global = true, allow_hyphen_values = true)]
    pub q_prime: Option<String>,
}

fn parse_kind(s: &str) -> std::result::Result<KindTag, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| format!("unknown kind {s:?}; expected h, q, h_symmetric, q_symmetric, affine or custom"))
}

fn rational_flag(v: &Option<String>) -> Result<Option<RationalText>> {
    v.as_deref().map(|s| parse_rational(s).map(RationalText)).transpose()
}

impl FrameArgs {
    pub fn is_empty(&self) -> bool {
        self.kind.is_none() && self.h.is_none() && self.q.is_none() && self.h_prime.is_none() && self.q_prime.is_none()
    }

    /// Layers the flags over a frame from the config file. A `--kind` that
    /// differs from the file's kind starts from a fresh frame.
    pub fn apply(&self, base: Option<FrameSpec>) -> Result<Option<FrameSpec>> {
        if self.is_empty() {
            return Ok(base);
        }
        let mut spec = match (self.kind, base) {
            (Some(kind), Some(spec)) if spec.kind == kind => spec,
            (Some(kind), _) => FrameSpec::empty(kind),
            (None, Some(spec)) => spec,
            (None, None) => return Err(QcalcError::InvalidParams("frame parameters given without --kind".into())),
        };
        let fields = [
            (&self.h, &mut spec.h),
            (&self.q, &mut spec.q),
            (&self.h_prime, &mut spec.h_prime),
            (&self.q_prime, &mut spec.q_prime),
        ];
        for (flag, slot) in fields {
            if let Some(v) = rational_flag(flag)? {
                *slot = Some(v);
            }
        }
        Ok(Some(spec))
    }
}
