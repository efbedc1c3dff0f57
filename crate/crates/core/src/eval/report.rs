use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

pub const REPORT_FORMAT_VERSION: u32 = 1;

/// Versioned JSON experiment record: resolved configuration, results and
/// wall-clock timings in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub format_version: u32,
    pub kind: String,
    pub config: Value,
    pub results: Value,
    #[serde(default)]
    pub timings: BTreeMap<String, f64>,
}

impl ReportDocument {
    pub fn new(kind: &str, config: impl Serialize, results: impl Serialize) -> Result<Self> {
        Ok(ReportDocument {
            format_version: REPORT_FORMAT_VERSION,
            kind: kind.to_string(),
            config: serde_json::to_value(config)?,
            results: serde_json::to_value(results)?,
            timings: BTreeMap::new(),
        })
    }

    pub fn with_timing(mut self, name: &str, seconds: f64) -> Self {
        self.timings.insert(name.to_string(), seconds);
        self
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// The document without timings, for byte comparison between runs.
    pub fn deterministic_json(&self) -> Result<String> {
        let mut copy = self.clone();
        copy.timings.clear();
        copy.to_json_pretty()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ReportDocument = serde_json::from_str(text)?;
        if doc.format_version != REPORT_FORMAT_VERSION {
            return Err(Error::UnsupportedVersion {
                found: doc.format_version,
                supported: REPORT_FORMAT_VERSION,
            });
        }
        Ok(doc)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = self.to_json_pretty()?;
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ReportDocument::from_json(&text)
    }
}
