//! Growing simple undirected graphs and the arrival logs that describe them.
//!
//! An [`ArrivalLog`] is an ordered list of edge additions. Replaying it from the
//! empty graph reproduces every intermediate state `G_0, G_1, ...`; the
//! [`EvolvingGraph`] keeps per-node degree and triangle counts up to date as each
//! edge lands so that model components can be evaluated without rescanning.

use std::fmt;
use std::ops::Range;

use thiserror::Error;

/// Dense node identifier, assigned in first-seen order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId(i as u32)
    }
}

/// What kind of growth step an event is.
///
/// A node arriving with `N` attachments is one `NewNode` event followed by
/// `N - 1` `NewNodeExtra` events naming the same newcomer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EventKind {
    /// The first edge of a log; both endpoints are new and no choice is made.
    Initial,
    /// `u` is a brand new node attached to the existing node `v`.
    NewNode,
    /// `u` is the most recently arrived node, making one more attachment to `v`.
    NewNodeExtra,
    /// An edge between two existing, non-adjacent nodes.
    InnerEdge,
}

/// The two operation streams scored separately by the inner model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Stream {
    NewNode,
    InnerEdge,
}

impl Stream {
    pub fn name(self) -> &'static str {
        match self {
            Stream::NewNode => "new_node",
            Stream::InnerEdge => "inner_edge",
        }
    }
}

impl EventKind {
    /// Which stream the event's choice belongs to; `None` for the initial edge.
    pub fn stream(self) -> Option<Stream> {
        match self {
            EventKind::Initial => None,
            EventKind::NewNode | EventKind::NewNodeExtra => Some(Stream::NewNode),
            EventKind::InnerEdge => Some(Stream::InnerEdge),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ArrivalEvent {
    pub kind: EventKind,
    pub u: NodeId,
    pub v: NodeId,
}

impl ArrivalEvent {
    pub fn initial() -> Self {
        ArrivalEvent {
            kind: EventKind::Initial,
            u: NodeId(0),
            v: NodeId(1),
        }
    }

    pub fn new_node(new: NodeId, target: NodeId) -> Self {
        ArrivalEvent {
            kind: EventKind::NewNode,
            u: new,
            v: target,
        }
    }

    pub fn new_node_extra(newcomer: NodeId, target: NodeId) -> Self {
        ArrivalEvent {
            kind: EventKind::NewNodeExtra,
            u: newcomer,
            v: target,
        }
    }

    pub fn inner_edge(a: NodeId, b: NodeId) -> Self {
        ArrivalEvent {
            kind: EventKind::InnerEdge,
            u: a,
            v: b,
        }
    }
}

/// Why an event could not be applied.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("edge ({0}, {1}) already present")]
    DuplicateEdge(NodeId, NodeId),
    #[error("node {0} is not present")]
    UnknownNode(NodeId),
    #[error("initial edge applied to a non-empty graph")]
    InitialOnNonEmpty,
    #[error("expected new node id {expected}, got {got}")]
    NotNewNode { expected: NodeId, got: NodeId },
    #[error("node {0} is not the newcomer of an open arrival")]
    NoOpenArrival(NodeId),
}

/// A structured failure tied to the offending event index.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("event {index}: {violation}")]
pub struct EventError {
    pub index: usize,
    pub violation: Violation,
}

/// Undirected simple graph with incrementally maintained node metrics.
#[derive(Clone, Debug, Default)]
pub struct EvolvingGraph {
    adjacency: Vec<Vec<NodeId>>,
    triangles: Vec<u64>,
    /// `degree_histogram[d]` = number of nodes with degree `d`.
    degree_histogram: Vec<u64>,
    edge_count: usize,
    triangle_sum: u64,
}

impl EvolvingGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a graph from an edge list over nodes `0..node_count`, skipping
    /// self-loops and repeated edges. Connectivity is not required.
    pub fn from_edges(
        node_count: usize,
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
    ) -> Self {
        let mut g = Self::new();
        for _ in 0..node_count {
            g.add_node();
        }
        for (u, v) in edges {
            if u != v && u.index() < node_count && v.index() < node_count && !g.has_edge(u, v) {
                g.insert_edge(u, v, &mut Vec::new());
            }
        }
        g
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn contains(&self, n: NodeId) -> bool {
        n.index() < self.adjacency.len()
    }

    pub fn degree(&self, n: NodeId) -> u32 {
        self.adjacency[n.index()].len() as u32
    }

    pub fn triangles(&self, n: NodeId) -> u64 {
        self.triangles[n.index()]
    }

    /// Neighbours of `n` in ascending id order.
    pub fn neighbors(&self, n: NodeId) -> &[NodeId] {
        &self.adjacency[n.index()]
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.adjacency.len()).map(NodeId::from)
    }

    pub fn degrees(&self) -> impl Iterator<Item = u32> + '_ {
        self.adjacency.iter().map(|a| a.len() as u32)
    }

    /// Count of nodes per degree value, indexed by degree.
    pub fn degree_histogram(&self) -> &[u64] {
        &self.degree_histogram
    }

    pub fn max_degree(&self) -> u32 {
        self.degree_histogram
            .iter()
            .rposition(|&c| c > 0)
            .unwrap_or(0) as u32
    }

    /// Sum of per-node triangle counts (three times the number of 3-cycles).
    pub fn triangle_sum(&self) -> u64 {
        self.triangle_sum
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        let (a, b) = if self.degree(u) <= self.degree(v) {
            (u, v)
        } else {
            (v, u)
        };
        self.adjacency[a.index()].binary_search(&b).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(i, adj)| {
            let u = NodeId::from(i);
            adj.iter().filter(move |&&v| u < v).map(move |&v| (u, v))
        })
    }

    pub fn add_node(&mut self) -> NodeId {
        let id = NodeId::from(self.adjacency.len());
        self.adjacency.push(Vec::new());
        self.triangles.push(0);
        self.bump_histogram(0, 1);
        id
    }

    fn bump_histogram(&mut self, degree: usize, delta: i64) {
        if self.degree_histogram.len() <= degree {
            self.degree_histogram.resize(degree + 1, 0);
        }
        let slot = &mut self.degree_histogram[degree];
        *slot = (*slot as i64 + delta) as u64;
    }

    /// Inserts an edge between two present, distinct, non-adjacent nodes.
    ///
    /// Every node whose degree or triangle count changed is appended to
    /// `touched` (the two endpoints first, then the common neighbours).
    pub fn insert_edge(&mut self, u: NodeId, v: NodeId, touched: &mut Vec<NodeId>) {
        debug_assert!(u != v && self.contains(u) && self.contains(v) && !self.has_edge(u, v));
        let (small, large) = if self.degree(u) <= self.degree(v) {
            (u, v)
        } else {
            (v, u)
        };
        let mut common = Vec::new();
        {
            let large_adj = &self.adjacency[large.index()];
            for &w in &self.adjacency[small.index()] {
                if large_adj.binary_search(&w).is_ok() {
                    common.push(w);
                }
            }
        }
        for (a, b) in [(u, v), (v, u)] {
            let adj = &mut self.adjacency[a.index()];
            let pos = adj.binary_search(&b).unwrap_err();
            adj.insert(pos, b);
            let d = adj.len();
            self.bump_histogram(d - 1, -1);
            self.bump_histogram(d, 1);
        }
        let c = common.len() as u64;
        self.triangles[u.index()] += c;
        self.triangles[v.index()] += c;
        for &w in &common {
            self.triangles[w.index()] += 1;
        }
        self.triangle_sum += 3 * c;
        self.edge_count += 1;
        touched.push(u);
        touched.push(v);
        touched.extend_from_slice(&common);
    }

    /// Validates `event` against the current state and applies it.
    pub fn apply_event(&mut self, event: &ArrivalEvent, index: usize) -> Result<(), EventError> {
        self.apply_event_tracked(event, index, &mut Vec::new())
    }

    pub(crate) fn apply_event_tracked(
        &mut self,
        event: &ArrivalEvent,
        index: usize,
        touched: &mut Vec<NodeId>,
    ) -> Result<(), EventError> {
        let fail = |violation| Err(EventError { index, violation });
        let n = self.node_count();
        let ArrivalEvent { kind, u, v } = *event;
        if u == v {
            return fail(Violation::SelfLoop(u));
        }
        match kind {
            EventKind::Initial => {
                if n != 0 {
                    return fail(Violation::InitialOnNonEmpty);
                }
                let (lo, hi) = if u < v { (u, v) } else { (v, u) };
                if lo != NodeId(0) || hi != NodeId(1) {
                    return fail(Violation::NotNewNode {
                        expected: NodeId(0),
                        got: lo,
                    });
                }
                self.add_node();
                self.add_node();
            }
            EventKind::NewNode => {
                if u.index() != n {
                    return fail(Violation::NotNewNode {
                        expected: NodeId::from(n),
                        got: u,
                    });
                }
                if !self.contains(v) {
                    return fail(Violation::UnknownNode(v));
                }
                self.add_node();
            }
            EventKind::NewNodeExtra => {
                if n == 0 || u.index() != n - 1 {
                    return fail(Violation::NoOpenArrival(u));
                }
                if !self.contains(v) {
                    return fail(Violation::UnknownNode(v));
                }
                if self.has_edge(u, v) {
                    return fail(Violation::DuplicateEdge(u, v));
                }
            }
            EventKind::InnerEdge => {
                for x in [u, v] {
                    if !self.contains(x) {
                        return fail(Violation::UnknownNode(x));
                    }
                }
                if self.has_edge(u, v) {
                    return fail(Violation::DuplicateEdge(u, v));
                }
            }
        }
        self.insert_edge(u, v, touched);
        Ok(())
    }
}

/// Which set of nodes a single node choice is drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChoiceContext {
    /// Every present node: a new node's first target or an inner edge's first end.
    First,
    /// Every present node except `f` and the neighbours of `f`.
    Second(NodeId),
}

/// Number of nodes eligible under `context`.
pub fn candidate_count(graph: &EvolvingGraph, context: ChoiceContext) -> usize {
    match context {
        ChoiceContext::First => graph.node_count(),
        ChoiceContext::Second(f) => graph.node_count() - 1 - graph.degree(f) as usize,
    }
}

pub fn is_candidate(graph: &EvolvingGraph, context: ChoiceContext, n: NodeId) -> bool {
    match context {
        ChoiceContext::First => graph.contains(n),
        ChoiceContext::Second(f) => graph.contains(n) && n != f && !graph.has_edge(f, n),
    }
}

/// The eligible nodes for a choice, in ascending id order.
pub fn candidate_set(graph: &EvolvingGraph, context: ChoiceContext) -> Vec<NodeId> {
    match context {
        ChoiceContext::First => graph.nodes().collect(),
        ChoiceContext::Second(f) => {
            let mut excluded = graph.neighbors(f).iter().copied().peekable();
            let mut out = Vec::with_capacity(candidate_count(graph, context));
            for n in graph.nodes() {
                while excluded.peek().is_some_and(|&e| e < n) {
                    excluded.next();
                }
                if n == f || excluded.peek() == Some(&n) {
                    continue;
                }
                out.push(n);
            }
            out
        }
    }
}

/// Ordered record of graph growth.
///
/// The first `seed_size` events build `G_0`; analysis windows normally start there.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArrivalLog {
    pub seed_size: usize,
    pub events: Vec<ArrivalEvent>,
    /// External label per dense node id.
    pub labels: Vec<String>,
}

impl ArrivalLog {
    /// Builds a log whose node labels are the decimal node ids.
    pub fn new(seed_size: usize, events: Vec<ArrivalEvent>) -> Self {
        let mut nodes = 0usize;
        for e in &events {
            nodes = nodes.max(e.u.index() + 1).max(e.v.index() + 1);
        }
        let labels = (0..nodes).map(|i| i.to_string()).collect();
        ArrivalLog {
            seed_size,
            events,
            labels,
        }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Events after the seed: the default analysis window.
    pub fn growth_window(&self) -> Range<usize> {
        self.seed_size.min(self.events.len())..self.events.len()
    }

    /// Replays every event, checking the log invariants, and returns the final graph.
    pub fn validate(&self) -> Result<EvolvingGraph, EventError> {
        let mut replay = Replay::new(self, 0)?;
        while replay.current().is_some() {
            replay.advance()?;
        }
        Ok(replay.into_graph())
    }

    pub fn final_graph(&self) -> Result<EvolvingGraph, EventError> {
        self.validate()
    }

    /// Count of choices per stream inside `window`.
    pub fn choice_counts(&self, window: Range<usize>) -> (usize, usize) {
        let mut counts = (0, 0);
        for e in &self.events[window] {
            match e.kind.stream() {
                Some(Stream::NewNode) => counts.0 += 1,
                Some(Stream::InnerEdge) => counts.1 += 1,
                None => {}
            }
        }
        counts
    }
}

/// Step-by-step replay of an [`ArrivalLog`].
///
/// At each position the graph is the state *before* the current event, i.e.
/// the state on which that event's choice was made.
pub struct Replay<'a> {
    log: &'a ArrivalLog,
    graph: EvolvingGraph,
    position: usize,
    open_arrival: Option<NodeId>,
    touched: Vec<NodeId>,
}

impl<'a> Replay<'a> {
    /// Starts a replay positioned at `from`, applying all earlier events.
    pub fn new(log: &'a ArrivalLog, from: usize) -> Result<Self, EventError> {
        let mut replay = Replay {
            log,
            graph: EvolvingGraph::new(),
            position: 0,
            open_arrival: None,
            touched: Vec::new(),
        };
        let from = from.min(log.events.len());
        while replay.position < from {
            replay.advance()?;
        }
        Ok(replay)
    }

    pub fn position(&self) -> usize {
        self.position
    }

    pub fn graph(&self) -> &EvolvingGraph {
        &self.graph
    }

    /// Current event index and event, or `None` once the log is exhausted.
    pub fn current(&self) -> Option<(usize, &'a ArrivalEvent)> {
        self.log
            .events
            .get(self.position)
            .map(|e| (self.position, e))
    }

    /// Nodes whose metrics changed during the last `advance`.
    pub fn touched(&self) -> &[NodeId] {
        &self.touched
    }

    /// Applies the current event and moves to the next one.
    pub fn advance(&mut self) -> Result<(), EventError> {
        let Some((index, event)) = self.current() else {
            return Ok(());
        };
        if event.kind == EventKind::NewNodeExtra && self.open_arrival != Some(event.u) {
            return Err(EventError {
                index,
                violation: Violation::NoOpenArrival(event.u),
            });
        }
        self.touched.clear();
        self.graph
            .apply_event_tracked(event, index, &mut self.touched)?;
        self.open_arrival = match event.kind {
            EventKind::NewNode | EventKind::NewNodeExtra => Some(event.u),
            _ => None,
        };
        self.position += 1;
        Ok(())
    }

    /// Visits every event in `[position, end)` with the graph before it.
    pub fn run_until<F>(&mut self, end: usize, mut visit: F) -> Result<(), EventError>
    where
        F: FnMut(usize, &EvolvingGraph, &ArrivalEvent),
    {
        let end = end.min(self.log.events.len());
        while self.position < end {
            let (index, event) = self.current().expect("position < len");
            visit(index, &self.graph, event);
            self.advance()?;
        }
        Ok(())
    }

    pub fn into_graph(self) -> EvolvingGraph {
        self.graph
    }
}

/// Pairs of (graph before event, event) for every event from `from` on,
/// collected eagerly. Intended for small logs and tests; large analyses
/// should drive a [`Replay`] directly.
pub fn replay(
    log: &ArrivalLog,
    from: usize,
) -> Result<Vec<(EvolvingGraph, ArrivalEvent)>, EventError> {
    let mut r = Replay::new(log, from)?;
    let mut out = Vec::new();
    r.run_until(log.len(), |_, g, e| out.push((g.clone(), *e)))?;
    Ok(out)
}
