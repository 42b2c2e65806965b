//! Text file format for quotient graphs.
//!
//! A graph file is a JSON object with fields `d`, `num_vertices`,
//! `edges: [[u, v, [n1, ..., nd]], ...]`, and optional `potential` and
//! `name`. Edges may appear in either orientation; files are written with
//! the canonical orientation only.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{GraphError, PeriodicGraph, Potential};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    d: usize,
    num_vertices: u32,
    edges: Vec<(u32, u32, Vec<i64>)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    potential: Option<Vec<f64>>,
}

/// A parsed graph file: the graph, its optional potential, and its optional
/// name.
#[derive(Clone, Debug)]
pub struct GraphDocument {
    pub name: Option<String>,
    pub graph: PeriodicGraph,
    pub potential: Option<Potential>,
}

impl GraphDocument {
    pub fn new(graph: PeriodicGraph, potential: Option<Potential>, name: Option<String>) -> Self {
        GraphDocument {
            name,
            graph,
            potential,
        }
    }
}

/// Parse a graph document from file text.
pub fn read_graph(text: &str) -> Result<GraphDocument, IoError> {
    let file: GraphFile = serde_json::from_str(text)?;
    let graph = PeriodicGraph::new(file.d, file.num_vertices, file.edges)?;
    let potential = match file.potential {
        None => None,
        Some(values) => Some(Potential::for_graph(&graph, values)?),
    };
    Ok(GraphDocument {
        name: file.name,
        graph,
        potential,
    })
}

/// Serialize a graph document; edges are written once per unordered pair in
/// canonical orientation, so output is deterministic.
pub fn write_graph(doc: &GraphDocument) -> String {
    let file = GraphFile {
        name: doc.name.clone(),
        d: doc.graph.dim(),
        num_vertices: doc.graph.num_vertices() as u32,
        edges: doc
            .graph
            .edges()
            .iter()
            .map(|e| (e.u.0, e.v.0, e.offset.components().to_vec()))
            .collect(),
        potential: doc.potential.as_ref().map(|q| q.values().to_vec()),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("graph file serializes");
    text.push('\n');
    text
}

pub fn load_graph_file(path: &Path) -> Result<GraphDocument, IoError> {
    let text = fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })?;
    read_graph(&text)
}

pub fn save_graph_file(path: &Path, doc: &GraphDocument) -> Result<(), IoError> {
    fs::write(path, write_graph(doc)).map_err(|source| IoError::Write {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::gen_stripe;

    #[test]
    fn round_trip_preserves_canonical_edges() {
        let stripe = gen_stripe(2, &[0.0, 1.0]).unwrap();
        let doc = GraphDocument::new(stripe.graph, stripe.potential, Some("stripe".into()));
        let text = write_graph(&doc);
        let back = read_graph(&text).unwrap();
        assert_eq!(back.graph, doc.graph);
        assert_eq!(back.potential, doc.potential);
        assert_eq!(back.name.as_deref(), Some("stripe"));
        // a second write is byte-identical
        assert_eq!(write_graph(&back), text);
    }

    #[test]
    fn either_orientation_is_accepted() {
        let a = read_graph(
            r#"{"d": 1, "num_vertices": 2, "edges": [[0, 1, [0]], [1, 0, [-1]]]}"#,
        )
        .unwrap();
        let b = read_graph(
            r#"{"d": 1, "num_vertices": 2, "edges": [[1, 0, [0]], [0, 1, [1]]]}"#,
        )
        .unwrap();
        assert_eq!(a.graph, b.graph);
    }

    #[test]
    fn offset_length_mismatch_names_the_edge() {
        let err = read_graph(
            r#"{"d": 2, "num_vertices": 2, "edges": [[0, 1, [0, 0]], [0, 1, [1]]]}"#,
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("edge #1"), "message was: {msg}");
        assert!(msg.contains("expected 2"), "message was: {msg}");
    }

    #[test]
    fn potential_length_is_checked() {
        let err = read_graph(
            r#"{"d": 1, "num_vertices": 2, "edges": [[0, 1, [0]]], "potential": [1.0]}"#,
        )
        .unwrap_err();
        assert!(matches!(
            err,
            IoError::Graph(GraphError::PotentialLength { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = read_graph("{\"d\": 1,\n  num_vertices: 2}").unwrap_err();
        assert!(err.to_string().contains("line"));
    }
}
