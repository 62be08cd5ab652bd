use std::sync::Arc;

use crate::canonical;
use crate::graph::IdeaGraph;

/// Immutable frozen copy of a graph, cheap to share across threads.
#[derive(Clone, Debug)]
pub struct Snapshot {
    graph: Arc<IdeaGraph>,
    round: u32,
    hash: String,
}

impl Snapshot {
    pub fn graph(&self) -> &IdeaGraph {
        &self.graph
    }

    /// Round index of the graph at freeze time.
    pub fn round(&self) -> u32 {
        self.round
    }

    /// Content hash of the frozen graph's canonical serialization.
    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        canonical::serialize(&self.graph)
    }
}

/// Deep-copies the graph; later merges into the live graph are invisible here.
pub fn freeze_snapshot(graph: &IdeaGraph) -> Snapshot {
    let round = graph.round;
    let graph = Arc::new(graph.clone());
    let hash = canonical::content_hash(&graph);
    Snapshot { graph, round, hash }
}
