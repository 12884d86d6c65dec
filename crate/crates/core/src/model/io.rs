//! Instance JSON documents.
//!
//! Grid instances carry `"map"` as either inline body rows or a path to a
//! movingAI file (relative to the instance file). General-graph instances
//! carry `"graph"` instead, with integer vertex ids, plus free-form
//! `"metadata"`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use super::Instance;
use crate::board::{Graph, GraphDoc, GraphError};
use crate::gridmap::{parse_map, CellCoord, GridMap, MapError};

#[derive(Debug, Error)]
pub enum InstanceIoError {
    #[error("invalid instance JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("instance has neither \"map\" nor \"graph\"")]
    MissingBoard,
    #[error("map {path}: {source}")]
    MapFile {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("map: {0}")]
    Map(#[from] MapError),
    #[error("graph: {0}")]
    Graph(#[from] GraphError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum MapRef {
    Rows(Vec<String>),
    File(String),
}

#[derive(Serialize, Deserialize)]
struct AttackerEntry<P> {
    start: P,
    target: P,
}

#[derive(Serialize, Deserialize)]
struct DefenderEntry<P> {
    start: P,
}

#[derive(Serialize, Deserialize)]
struct GridDoc {
    map: MapRef,
    time_limit: u32,
    attackers: Vec<AttackerEntry<CellCoord>>,
    defenders: Vec<DefenderEntry<CellCoord>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metadata: Option<Value>,
}

#[derive(Serialize, Deserialize)]
struct GraphInstanceDoc {
    graph: GraphDoc,
    time_limit: u32,
    attackers: Vec<AttackerEntry<usize>>,
    defenders: Vec<DefenderEntry<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metadata: Option<Value>,
}

/// An instance loaded from JSON, on either kind of board.
#[derive(Clone, Debug)]
pub enum AnyInstance {
    Grid(Instance<GridMap>),
    Graph {
        instance: Instance<Graph>,
        metadata: Option<Value>,
    },
}

/// Parses an instance document. `base_dir` resolves relative map paths.
pub fn load_instance(text: &str, base_dir: Option<&Path>) -> Result<AnyInstance, InstanceIoError> {
    let value: Value = serde_json::from_str(text)?;
    if value.get("graph").is_some() {
        let doc: GraphInstanceDoc = serde_json::from_value(value)?;
        let graph = Graph::try_from(&doc.graph)?;
        return Ok(AnyInstance::Graph {
            instance: Instance {
                board: graph,
                attacker_starts: doc.attackers.iter().map(|a| a.start).collect(),
                attacker_targets: doc.attackers.iter().map(|a| a.target).collect(),
                defender_starts: doc.defenders.iter().map(|d| d.start).collect(),
                time_limit: doc.time_limit,
            },
            metadata: doc.metadata,
        });
    }
    if value.get("map").is_none() {
        return Err(InstanceIoError::MissingBoard);
    }
    let doc: GridDoc = serde_json::from_value(value)?;
    let map = match &doc.map {
        MapRef::Rows(rows) => GridMap::from_rows(rows)?,
        MapRef::File(file) => {
            let path = match base_dir {
                Some(dir) => dir.join(file),
                None => PathBuf::from(file),
            };
            let text = std::fs::read_to_string(&path)
                .map_err(|source| InstanceIoError::MapFile { path, source })?;
            parse_map(&text)?
        }
    };
    Ok(AnyInstance::Grid(Instance {
        board: map,
        attacker_starts: doc.attackers.iter().map(|a| a.start).collect(),
        attacker_targets: doc.attackers.iter().map(|a| a.target).collect(),
        defender_starts: doc.defenders.iter().map(|d| d.start).collect(),
        time_limit: doc.time_limit,
    }))
}

pub fn load_instance_file(path: &Path) -> Result<AnyInstance, InstanceIoError> {
    let text = std::fs::read_to_string(path).map_err(|source| InstanceIoError::Io {
        path: path.to_owned(),
        source,
    })?;
    load_instance(&text, path.parent())
}

/// Serializes instances to the JSON document format.
pub struct InstanceWriter;

impl InstanceWriter {
    /// Grid instance with the map inlined as body rows.
    pub fn grid(instance: &Instance<GridMap>) -> String {
        Self::grid_doc(instance, MapRef::Rows(instance.board.to_rows()))
    }

    /// Grid instance referring to a map file instead of inlining it.
    pub fn grid_with_map_file(instance: &Instance<GridMap>, map_path: &str) -> String {
        Self::grid_doc(instance, MapRef::File(map_path.to_owned()))
    }

    fn grid_doc(instance: &Instance<GridMap>, map: MapRef) -> String {
        let doc = GridDoc {
            map,
            time_limit: instance.time_limit,
            attackers: instance
                .attacker_starts
                .iter()
                .zip(&instance.attacker_targets)
                .map(|(&start, &target)| AttackerEntry { start, target })
                .collect(),
            defenders: instance
                .defender_starts
                .iter()
                .map(|&start| DefenderEntry { start })
                .collect(),
            metadata: None,
        };
        serde_json::to_string_pretty(&doc).expect("instance serializes")
    }

    pub fn graph(instance: &Instance<Graph>, metadata: Option<Value>) -> String {
        let doc = GraphInstanceDoc {
            graph: GraphDoc::from(&instance.board),
            time_limit: instance.time_limit,
            attackers: instance
                .attacker_starts
                .iter()
                .zip(&instance.attacker_targets)
                .map(|(&start, &target)| AttackerEntry { start, target })
                .collect(),
            defenders: instance
                .defender_starts
                .iter()
                .map(|&start| DefenderEntry { start })
                .collect(),
            metadata,
        };
        serde_json::to_string_pretty(&doc).expect("instance serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_roundtrip_inline() {
        let text = r#"{
            "map": ["...", ".@.", "..."],
            "time_limit": 7,
            "attackers": [{"start": [0, 0], "target": [2, 2]}],
            "defenders": [{"start": [2, 0]}]
        }"#;
        let AnyInstance::Grid(inst) = load_instance(text, None).unwrap() else {
            panic!("expected grid instance");
        };
        assert_eq!(inst.attacker_targets, vec![CellCoord::new(2, 2)]);
        assert!(inst.board.is_blocked(CellCoord::new(1, 1)));
        let again = load_instance(&InstanceWriter::grid(&inst), None).unwrap();
        assert!(matches!(again, AnyInstance::Grid(i) if i == inst));
    }

    #[test]
    fn grid_map_file_is_resolved_relative() {
        let dir = std::env::temp_dir().join(format!("aprot-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::write(dir.join("m.map"), "type octile\nheight 1\nwidth 3\nmap\n...\n").unwrap();
        let text = r#"{"map": "m.map", "time_limit": 3,
            "attackers": [{"start": [0, 0], "target": [2, 0]}], "defenders": []}"#;
        let inst = load_instance(text, Some(&dir)).unwrap();
        assert!(matches!(inst, AnyInstance::Grid(i) if i.board.width() == 3));
        let missing = load_instance(text, Some(Path::new("/nonexistent")));
        assert!(matches!(missing, Err(InstanceIoError::MapFile { .. })));
    }

    #[test]
    fn graph_documents() {
        let text = r#"{"graph": {"vertex_count": 3, "edges": [[0,1],[1,2]]}, "time_limit": 5,
            "attackers": [{"start": 0, "target": 2}], "defenders": [], "metadata": {"k": 1}}"#;
        let AnyInstance::Graph { instance, metadata } = load_instance(text, None).unwrap() else {
            panic!("expected graph instance");
        };
        assert_eq!(instance.board.edge_count(), 2);
        assert_eq!(metadata.unwrap()["k"], 1);
        assert!(matches!(load_instance("{}", None), Err(InstanceIoError::MissingBoard)));
    }
}
