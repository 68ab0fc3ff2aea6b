//! JSON space files.
//!
//! ```json
//! { "n": 3, "edges": [[0, 1, 1.0], [1, 2, 1.0]], "measure": [1, 1, 1],
//!   "labels": ["a", "b", "c"], "coords": [[0.0], [1.0], [2.0]] }
//! ```
//!
//! Distances are always recomputed from the edges on load; `coords` is
//! metadata.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::MeasuredSpace;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceFile {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
    pub measure: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<Vec<f64>>>,
}

impl SpaceFile {
    pub fn from_space(space: &MeasuredSpace) -> Self {
        Self {
            n: space.n(),
            edges: space.edges().to_vec(),
            measure: space.measure().to_vec(),
            labels: space.labels().map(<[_]>::to_vec),
            coords: space.coords().map(<[_]>::to_vec),
        }
    }

    pub fn into_space(self) -> Result<MeasuredSpace> {
        if self.measure.len() != self.n {
            return Err(Error::MeasureLength {
                expected: self.n,
                got: self.measure.len(),
            });
        }
        let mut space = MeasuredSpace::build_from_graph(self.n, &self.edges, &self.measure)?;
        if let Some(labels) = self.labels {
            space = space.with_labels(labels)?;
        }
        if let Some(coords) = self.coords {
            space = space.with_coords(coords)?;
        }
        Ok(space)
    }
}

pub fn to_json(space: &MeasuredSpace) -> String {
    serde_json::to_string_pretty(&SpaceFile::from_space(space)).expect("space file serializes")
}

pub fn from_json(text: &str) -> Result<MeasuredSpace> {
    let file: SpaceFile = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    file.into_space()
}

pub fn save(space: &MeasuredSpace, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = to_json(space);
    text.push('\n');
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load(path: impl AsRef<Path>) -> Result<MeasuredSpace> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    from_json(&text)
}
