//! TOML channel files.
//!
//! ```toml
//! name = "example"
//! w = [[[0.9, 0.1], [0.1, 0.9]], [[1.0, 0.0], [1.0, 0.0]]]   # [s][x][y], s = 0 is ∅
//! u = [[1.0, 0.0], [0.0, 1.0]]                               # [x][z]
//!
//! [alphabets]          # optional; defaults to decimal names
//! x = ["0", "1"]
//! y = ["0", "1"]
//! z = ["0", "1"]
//! s = ["none", "jam"]
//!
//! [parameters]         # optional free-form numeric metadata
//! p = 0.1
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Alphabets, MyopicAvc};
use crate::error::{Error, Result};
use crate::math::{Distribution, StochasticMatrix};
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpecFile {
    #[serde(default)]
    pub name: String,
    pub w: Vec<Vec<Vec<f64>>>,
    pub u: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabets: Option<Alphabets>,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
}

impl ChannelSpecFile {
    pub fn from_avc(avc: &MyopicAvc) -> Self {
        Self {
            name: avc.name.clone(),
            w: avc.w_all().iter().map(StochasticMatrix::to_nested).collect(),
            u: avc.u().to_nested(),
            alphabets: Some(avc.alphabets.clone()),
            parameters: avc.parameters.clone(),
        }
    }

    pub fn into_avc(self, source: &str) -> Result<MyopicAvc> {
        let bad = |detail: String| Error::ChannelFile {
            path: source.to_string(),
            detail,
        };
        let tol = Tolerances::DEFAULT.stochasticity;
        let mut w = Vec::with_capacity(self.w.len());
        for (s, rows) in self.w.into_iter().enumerate() {
            for (x, row) in rows.iter().enumerate() {
                Distribution::with_tolerance(row.clone(), tol)
                    .map_err(|e| bad(format!("row w[s={s}][x={x}] is not stochastic: {e}")))?;
            }
            w.push(StochasticMatrix::with_tolerance(rows, tol).map_err(|e| bad(format!("w[s={s}]: {e}")))?);
        }
        for (x, row) in self.u.iter().enumerate() {
            Distribution::with_tolerance(row.clone(), tol)
                .map_err(|e| bad(format!("row u[x={x}] is not stochastic: {e}")))?;
        }
        let u = StochasticMatrix::with_tolerance(self.u, tol).map_err(|e| bad(format!("u: {e}")))?;
        let mut avc = MyopicAvc::new(w, u).map_err(|e| bad(e.to_string()))?.with_name(self.name);
        if let Some(a) = self.alphabets {
            avc = avc.with_alphabets(a).map_err(|e| bad(e.to_string()))?;
        }
        avc.parameters = self.parameters;
        Ok(avc)
    }
}

pub fn to_channel_string(avc: &MyopicAvc) -> Result<String> {
    toml::to_string(&ChannelSpecFile::from_avc(avc)).map_err(|e| Error::ChannelFile {
        path: "<memory>".into(),
        detail: e.to_string(),
    })
}

/// Parses channel-file text. `source` names the origin in diagnostics.
pub fn parse_channel(text: &str, source: &str) -> Result<MyopicAvc> {
    let spec: ChannelSpecFile = toml::from_str(text).map_err(|e| Error::ChannelFile {
        path: source.to_string(),
        detail: e.to_string(),
    })?;
    spec.into_avc(source)
}

pub fn load_channel(path: impl AsRef<Path>) -> Result<MyopicAvc> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::ChannelFile {
        path: path.display().to_string(),
        detail: e.to_string(),
    })?;
    parse_channel(&text, &path.display().to_string())
}

pub fn save_channel(avc: &MyopicAvc, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_channel_string(avc)?)?;
    Ok(())
}
