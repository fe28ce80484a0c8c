//! Inner-model components and their linear mixtures.
//!
//! Each component assigns a non-negative raw weight to a node from its degree
//! and triangle count; normalising over a candidate set gives a probability
//! vector. A [`Mixture`] is a convex combination of normalised components.

use std::fmt;

use thiserror::Error;

use crate::graph::{candidate_count, ChoiceContext, EvolvingGraph, NodeId, Stream};

/// Tolerance on the sum of mixture weights accepted by [`Mixture::new`].
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ComponentKind {
    /// Uniform over the candidate set.
    Null,
    /// Proportional to degree.
    Degree,
    /// Proportional to triangle count.
    Triangle,
    /// Uniform over degree-1 nodes.
    Singleton,
    /// Uniform over degree-2 nodes.
    Doubleton,
    /// Positive-feedback preference: `d^(1 + delta * log10 d)`.
    Pfp(f64),
}

impl ComponentKind {
    pub fn raw_weight(self, degree: u32, triangles: u64) -> f64 {
        match self {
            ComponentKind::Null => 1.0,
            ComponentKind::Degree => degree as f64,
            ComponentKind::Triangle => triangles as f64,
            ComponentKind::Singleton => (degree == 1) as u8 as f64,
            ComponentKind::Doubleton => (degree == 2) as u8 as f64,
            ComponentKind::Pfp(delta) => pfp_weight(delta, degree),
        }
    }

    /// Number of free real parameters carried by the component.
    pub fn parameter_count(self) -> usize {
        matches!(self, ComponentKind::Pfp(_)) as usize
    }

    pub fn uses_triangles(self) -> bool {
        self == ComponentKind::Triangle
    }

    /// True when some candidate set can have zero total weight.
    pub fn can_vanish(self) -> bool {
        matches!(
            self,
            ComponentKind::Triangle | ComponentKind::Singleton | ComponentKind::Doubleton
        )
    }
}

impl fmt::Display for ComponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComponentKind::Null => f.write_str("null"),
            ComponentKind::Degree => f.write_str("degree"),
            ComponentKind::Triangle => f.write_str("triangle"),
            ComponentKind::Singleton => f.write_str("singleton"),
            ComponentKind::Doubleton => f.write_str("doubleton"),
            ComponentKind::Pfp(delta) => write!(f, "pfp({delta})"),
        }
    }
}

/// `d^(1 + delta * log10 d)`. Equals 1 at `d = 1` for every `delta` and is
/// exactly `d` when `delta = 0`.
pub fn pfp_weight(delta: f64, degree: u32) -> f64 {
    if degree == 0 {
        return 0.0;
    }
    let d = degree as f64;
    d.powf(1.0 + delta * d.log10())
}

pub fn raw_weight(kind: ComponentKind, degree: u32, triangles: u64) -> f64 {
    kind.raw_weight(degree, triangles)
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ModelError {
    #[error("a mixture needs at least one term")]
    Empty,
    #[error("weight {0} is outside [0, 1]")]
    WeightOutOfRange(f64),
    #[error("weights sum to {0}, expected 1")]
    WeightSum(f64),
    #[error("pfp parameter {0} is not finite")]
    NonFiniteDelta(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Term {
    pub weight: f64,
    pub kind: ComponentKind,
}

impl Term {
    pub fn new(weight: f64, kind: ComponentKind) -> Self {
        Term { weight, kind }
    }
}

/// A convex combination of components for one operation stream.
#[derive(Clone, Debug, PartialEq)]
pub struct Mixture {
    terms: Vec<Term>,
}

impl Mixture {
    pub fn new(terms: Vec<Term>) -> Result<Self, ModelError> {
        Self::with_tolerance(terms, WEIGHT_SUM_TOLERANCE)
    }

    /// Validates weights, renormalising when the sum is within `tolerance` of 1.
    pub fn with_tolerance(mut terms: Vec<Term>, tolerance: f64) -> Result<Self, ModelError> {
        if terms.is_empty() {
            return Err(ModelError::Empty);
        }
        for t in &terms {
            if !(0.0..=1.0).contains(&t.weight) {
                return Err(ModelError::WeightOutOfRange(t.weight));
            }
            if let ComponentKind::Pfp(delta) = t.kind {
                if !delta.is_finite() {
                    return Err(ModelError::NonFiniteDelta(delta));
                }
            }
        }
        let sum: f64 = terms.iter().map(|t| t.weight).sum();
        if (sum - 1.0).abs() > tolerance {
            return Err(ModelError::WeightSum(sum));
        }
        // leave weights alone when the sum is off only by rounding, so that
        // rendering and re-parsing a mixture reproduces it exactly
        if (sum - 1.0).abs() > 1e-12 {
            for t in &mut terms {
                t.weight /= sum;
            }
        }
        Ok(Mixture { terms })
    }

    pub fn pure(kind: ComponentKind) -> Self {
        Mixture {
            terms: vec![Term::new(1.0, kind)],
        }
    }

    pub fn null() -> Self {
        Self::pure(ComponentKind::Null)
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_null(&self) -> bool {
        self.terms
            .iter()
            .all(|t| t.kind == ComponentKind::Null || t.weight == 0.0)
    }

    /// Free mixture weights plus free component parameters.
    pub fn free_parameters(&self) -> usize {
        self.terms.len() - 1
            + self
                .terms
                .iter()
                .map(|t| t.kind.parameter_count())
                .sum::<usize>()
    }
}

impl fmt::Display for Mixture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let [only] = self.terms.as_slice() {
            if only.weight == 1.0 {
                return write!(f, "{}", only.kind);
            }
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            write!(f, "{}*{}", t.weight, t.kind)?;
        }
        Ok(())
    }
}

/// Inner model: one mixture per operation stream.
#[derive(Clone, Debug, PartialEq)]
pub struct MixtureModel {
    pub new_node: Mixture,
    pub inner_edge: Mixture,
}

impl MixtureModel {
    pub fn new(new_node: Mixture, inner_edge: Mixture) -> Self {
        MixtureModel {
            new_node,
            inner_edge,
        }
    }

    /// The same mixture on both streams.
    pub fn uniform(mixture: Mixture) -> Self {
        MixtureModel {
            new_node: mixture.clone(),
            inner_edge: mixture,
        }
    }

    pub fn null() -> Self {
        Self::uniform(Mixture::null())
    }

    pub fn stream(&self, stream: Stream) -> &Mixture {
        match stream {
            Stream::NewNode => &self.new_node,
            Stream::InnerEdge => &self.inner_edge,
        }
    }

    pub fn free_parameters(&self) -> usize {
        self.new_node.free_parameters() + self.inner_edge.free_parameters()
    }
}

/// Normalised component probabilities over `candidates`.
///
/// If every candidate has zero raw weight the uniform distribution is used.
pub fn component_probabilities(
    kind: ComponentKind,
    graph: &EvolvingGraph,
    candidates: &[NodeId],
) -> Vec<f64> {
    let raw: Vec<f64> = candidates
        .iter()
        .map(|&n| kind.raw_weight(graph.degree(n), graph.triangles(n)))
        .collect();
    let total: f64 = raw.iter().sum();
    if total > 0.0 {
        raw.into_iter().map(|w| w / total).collect()
    } else {
        vec![1.0 / candidates.len() as f64; candidates.len()]
    }
}

/// Entrywise weighted sum of the component probability vectors.
pub fn mixture_probabilities(
    mixture: &Mixture,
    graph: &EvolvingGraph,
    candidates: &[NodeId],
) -> Vec<f64> {
    let mut out = vec![0.0; candidates.len()];
    for term in mixture.terms() {
        if term.weight == 0.0 {
            continue;
        }
        let probs = component_probabilities(term.kind, graph, candidates);
        for (o, p) in out.iter_mut().zip(probs) {
            *o += term.weight * p;
        }
    }
    out
}

/// Incremental weight lookups for one component.
///
/// Totals over the whole node set come from graph-level aggregates (edge
/// count, degree histogram, triangle sum), so a choice costs time proportional
/// to the excluded neighbourhood rather than to the node count.
#[derive(Clone, Debug)]
pub(crate) struct Weigher {
    kind: ComponentKind,
    /// Pfp weight cache indexed by degree.
    by_degree: Vec<f64>,
}

/// Excluded mass above this fraction of the total is recomputed directly to
/// avoid cancellation in `total - excluded`.
const CANCELLATION_GUARD: f64 = 1.0 - 1e-6;

impl Weigher {
    pub fn new(kind: ComponentKind) -> Self {
        Weigher {
            kind,
            by_degree: Vec::new(),
        }
    }

    /// Grows the Pfp cache to cover every degree present in `graph`.
    pub fn prepare(&mut self, graph: &EvolvingGraph) {
        self.prepare_degree(graph.degree_histogram().len());
    }

    pub fn prepare_degree(&mut self, len: usize) {
        if let ComponentKind::Pfp(delta) = self.kind {
            while self.by_degree.len() < len {
                let d = self.by_degree.len() as u32;
                self.by_degree.push(pfp_weight(delta, d));
            }
        }
    }

    /// Raw weight of `n`; [`prepare`](Self::prepare) must have been called.
    #[inline]
    pub fn weight(&self, graph: &EvolvingGraph, n: NodeId) -> f64 {
        match self.kind {
            ComponentKind::Pfp(_) => self.by_degree[graph.degree(n) as usize],
            kind => kind.raw_weight(graph.degree(n), graph.triangles(n)),
        }
    }

    /// Raw weight summed over all present nodes.
    pub fn total(&self, graph: &EvolvingGraph) -> f64 {
        let hist = graph.degree_histogram();
        match self.kind {
            ComponentKind::Null => graph.node_count() as f64,
            ComponentKind::Degree => 2.0 * graph.edge_count() as f64,
            ComponentKind::Triangle => graph.triangle_sum() as f64,
            ComponentKind::Singleton => hist.get(1).copied().unwrap_or(0) as f64,
            ComponentKind::Doubleton => hist.get(2).copied().unwrap_or(0) as f64,
            ComponentKind::Pfp(_) => hist
                .iter()
                .zip(&self.by_degree)
                .skip(1)
                .filter(|(&c, _)| c > 0)
                .map(|(&c, &w)| c as f64 * w)
                .sum(),
        }
    }

    /// Raw weight summed over the candidate set of `context`, given `total`.
    pub fn mass(&self, graph: &EvolvingGraph, context: ChoiceContext, total: f64) -> f64 {
        match context {
            ChoiceContext::First => total,
            ChoiceContext::Second(f) => {
                let excluded = self.weight(graph, f)
                    + graph
                        .neighbors(f)
                        .iter()
                        .map(|&n| self.weight(graph, n))
                        .sum::<f64>();
                if matches!(self.kind, ComponentKind::Pfp(_))
                    && excluded > CANCELLATION_GUARD * total
                {
                    self.direct_mass(graph, f)
                } else {
                    // exact for the integer-valued components
                    (total - excluded).max(0.0)
                }
            }
        }
    }

    fn direct_mass(&self, graph: &EvolvingGraph, f: NodeId) -> f64 {
        let mut excluded = graph.neighbors(f).iter().copied().peekable();
        let mut sum = 0.0;
        for n in graph.nodes() {
            while excluded.peek().is_some_and(|&e| e < n) {
                excluded.next();
            }
            if n != f && excluded.peek() != Some(&n) {
                sum += self.weight(graph, n);
            }
        }
        sum
    }
}

/// Candidate-set masses of each term of a mixture, plus the uniform
/// probability used by terms whose mass vanishes.
#[derive(Clone, Debug)]
pub(crate) struct Normalised {
    pub masses: Vec<f64>,
    pub uniform: f64,
}

impl Normalised {
    /// Normalised probability of a node with raw weight `raw` under term `i`.
    #[inline]
    pub fn component(&self, i: usize, raw: f64) -> f64 {
        let mass = self.masses[i];
        if mass > 0.0 {
            raw / mass
        } else {
            self.uniform
        }
    }
}

/// Fast mixture evaluation over a replayed graph.
#[derive(Clone, Debug)]
pub(crate) struct MixtureWeigher {
    terms: Vec<(f64, Weigher)>,
    totals: Vec<f64>,
}

impl MixtureWeigher {
    pub fn new(mixture: &Mixture) -> Self {
        Self::from_parts(mixture.terms().iter().map(|t| (t.weight, t.kind)))
    }

    /// One unit-weight term per component; used to produce dataset columns.
    pub fn columns(kinds: &[ComponentKind]) -> Self {
        Self::from_parts(kinds.iter().map(|&k| (1.0, k)))
    }

    fn from_parts(parts: impl Iterator<Item = (f64, ComponentKind)>) -> Self {
        let terms: Vec<_> = parts.map(|(b, k)| (b, Weigher::new(k))).collect();
        let totals = vec![0.0; terms.len()];
        MixtureWeigher { terms, totals }
    }

    /// Refreshes caches and whole-graph totals; call once per graph state.
    pub fn refresh(&mut self, graph: &EvolvingGraph) {
        for (i, (_, w)) in self.terms.iter_mut().enumerate() {
            w.prepare(graph);
            self.totals[i] = w.total(graph);
        }
    }

    pub fn normalise(&self, graph: &EvolvingGraph, context: ChoiceContext) -> Normalised {
        let count = candidate_count(graph, context);
        let masses = self
            .terms
            .iter()
            .zip(&self.totals)
            .map(|((_, w), &total)| w.mass(graph, context, total))
            .collect();
        Normalised {
            masses,
            uniform: 1.0 / count as f64,
        }
    }

    /// Mixture probability of `node`, which must be a candidate of the
    /// context `norm` was computed for.
    pub fn probability(&self, graph: &EvolvingGraph, norm: &Normalised, node: NodeId) -> f64 {
        self.terms
            .iter()
            .enumerate()
            .map(|(i, (beta, w))| beta * norm.component(i, w.weight(graph, node)))
            .sum()
    }

    /// Per-component probabilities of `node`, unweighted.
    pub fn component_values(
        &self,
        graph: &EvolvingGraph,
        norm: &Normalised,
        node: NodeId,
        out: &mut Vec<f64>,
    ) {
        out.clear();
        for (i, (_, w)) in self.terms.iter().enumerate() {
            out.push(norm.component(i, w.weight(graph, node)));
        }
    }

    pub fn beta(&self, i: usize) -> f64 {
        self.terms[i].0
    }
}
