//! Small hand-checkable graphs and logs.

use crate::graph::{ArrivalEvent, ArrivalLog, EvolvingGraph, NodeId};

/// Path 0-1-2.
pub fn path3() -> EvolvingGraph {
    EvolvingGraph::from_edges(3, [(NodeId(0), NodeId(1)), (NodeId(1), NodeId(2))])
}

/// Triangle on nodes 0, 1, 2.
pub fn k3() -> EvolvingGraph {
    EvolvingGraph::from_edges(
        3,
        [
            (NodeId(0), NodeId(1)),
            (NodeId(1), NodeId(2)),
            (NodeId(0), NodeId(2)),
        ],
    )
}

/// Star with centre 0 and `leaves` leaves.
pub fn star(leaves: u32) -> EvolvingGraph {
    EvolvingGraph::from_edges(
        leaves as usize + 1,
        (1..=leaves).map(|i| (NodeId(0), NodeId(i))),
    )
}

/// Seed path 1-2-3, then nodes 4 and 5 each attach to node 2.
///
/// Node labels are "1".."5" (dense ids 0..4). The two growth choices both pick
/// label "2": uniform choice gives likelihood 1/3 * 1/4, degree-proportional
/// choice gives 1/2 * 1/2.
pub fn worked_example_log() -> ArrivalLog {
    let n = NodeId;
    ArrivalLog {
        seed_size: 2,
        events: vec![
            ArrivalEvent::initial(),
            ArrivalEvent::new_node(n(2), n(1)),
            ArrivalEvent::new_node(n(3), n(1)),
            ArrivalEvent::new_node(n(4), n(1)),
        ],
        labels: (1..=5).map(|i| i.to_string()).collect(),
    }
}
