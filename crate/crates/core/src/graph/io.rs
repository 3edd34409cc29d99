//! JSON graph files: `{"n": 4, "d": 3, "adj": [[1,2,3], ...]}`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GraphError, RegularGraph};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphFile {
    pub n: usize,
    pub d: usize,
    pub adj: Vec<Vec<usize>>,
}

impl From<&RegularGraph> for GraphFile {
    fn from(g: &RegularGraph) -> Self {
        GraphFile {
            n: g.n(),
            d: g.d(),
            adj: g.adjacency_lists(),
        }
    }
}

impl TryFrom<GraphFile> for RegularGraph {
    type Error = GraphError;

    fn try_from(file: GraphFile) -> Result<Self, Self::Error> {
        if file.adj.len() != file.n {
            return Err(GraphError::Format(format!(
                "header says n = {} but {} rows follow",
                file.n,
                file.adj.len()
            )));
        }
        let g = RegularGraph::from_adjacency(&file.adj)?;
        if g.d() != file.d {
            return Err(GraphError::Format(format!(
                "header says d = {} but rows have width {}",
                file.d,
                g.d()
            )));
        }
        Ok(g)
    }
}

impl RegularGraph {
    /// Compact JSON with sorted rows and a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(&GraphFile::from(self)).expect("plain data serialises");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let file: GraphFile =
            serde_json::from_str(text).map_err(|e| GraphError::Format(e.to_string()))?;
        RegularGraph::try_from(file)
    }

    pub fn read_json_file(path: impl AsRef<Path>) -> Result<Self, GraphError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| GraphError::Format(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn write_json_file(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        std::fs::write(path, self.to_json())
    }
}
