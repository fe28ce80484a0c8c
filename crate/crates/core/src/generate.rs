//! Growing artificial networks from an outer model and an inner mixture model.
//!
//! The outer model decides the shape of each step: a new node arrives with `N`
//! attachments, then `M` inner edges are added. Both counts are drawn from
//! empirical distributions. The inner model picks the nodes involved, using
//! exactly the choice decomposition scored by the likelihood engine.

use std::fmt;
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::components::{
    mixture_probabilities, ComponentKind, Mixture, MixtureModel, MixtureWeigher, Weigher,
};
use crate::graph::{
    candidate_count, is_candidate, ArrivalEvent, ArrivalLog, ChoiceContext, EventError, EventKind,
    EvolvingGraph, NodeId,
};

/// Identifier of the generator behind [`GrowthRecipe::rng_seed`].
pub const RNG_ALGORITHM: &str = "chacha8 (rand_chacha 0.3, seed_from_u64)";

/// Inner-edge bursts give up after this many consecutive impossible draws.
pub const MAX_FAILED_INNER_DRAWS: usize = 50;

pub type GrowthRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> GrowthRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum GrowError {
    #[error("window contains no new-node arrivals")]
    NoArrivals,
    #[error("empirical distribution is empty or has no mass")]
    EmptyDistribution,
    #[error("attachment counts must be at least 1")]
    ZeroAttachments,
    #[error("target of {target} edges does not exceed the seed's {seed} edges")]
    TargetTooSmall { target: usize, seed: usize },
    #[error("seed graph has no edges")]
    EmptySeed,
    #[error(transparent)]
    Event(#[from] EventError),
}

/// A distribution over non-negative integers given by value/probability pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalDistribution {
    values: Vec<u32>,
    probabilities: Vec<f64>,
}

impl EmpiricalDistribution {
    /// Normalises counts (or weights) per value; values are sorted ascending.
    pub fn from_weights(pairs: impl IntoIterator<Item = (u32, f64)>) -> Result<Self, GrowError> {
        let mut pairs: Vec<(u32, f64)> = pairs.into_iter().filter(|&(_, w)| w > 0.0).collect();
        pairs.sort_by_key(|&(v, _)| v);
        pairs.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        if pairs.is_empty() || total <= 0.0 || !total.is_finite() {
            return Err(GrowError::EmptyDistribution);
        }
        Ok(EmpiricalDistribution {
            values: pairs.iter().map(|p| p.0).collect(),
            probabilities: pairs.iter().map(|p| p.1 / total).collect(),
        })
    }

    pub fn from_samples(samples: impl IntoIterator<Item = u32>) -> Result<Self, GrowError> {
        Self::from_weights(samples.into_iter().map(|s| (s, 1.0)))
    }

    pub fn constant(value: u32) -> Self {
        EmpiricalDistribution {
            values: vec![value],
            probabilities: vec![1.0],
        }
    }

    pub fn probability(&self, value: u32) -> f64 {
        self.values
            .iter()
            .position(|&v| v == value)
            .map_or(0.0, |i| self.probabilities[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.values
            .iter()
            .copied()
            .zip(self.probabilities.iter().copied())
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(v, p)| v as f64 * p).sum()
    }

    pub fn min_value(&self) -> u32 {
        self.values[0]
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> u32 {
        if self.values.len() == 1 {
            return self.values[0];
        }
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (&v, &p) in self.values.iter().zip(&self.probabilities) {
            acc += p;
            if u < acc {
                return v;
            }
        }
        *self.values.last().expect("non-empty")
    }
}

/// Attachments per new node (`N`) and inner edges after each arrival (`M`).
#[derive(Clone, Debug, PartialEq)]
pub struct OuterModel {
    pub edges_per_new_node: EmpiricalDistribution,
    pub inner_edges_per_arrival: EmpiricalDistribution,
}

impl OuterModel {
    pub fn new(
        edges_per_new_node: EmpiricalDistribution,
        inner_edges_per_arrival: EmpiricalDistribution,
    ) -> Result<Self, GrowError> {
        if edges_per_new_node.min_value() == 0 {
            return Err(GrowError::ZeroAttachments);
        }
        Ok(OuterModel {
            edges_per_new_node,
            inner_edges_per_arrival,
        })
    }

    /// Every arrival has exactly `n` attachments followed by `m` inner edges.
    pub fn constant(n: u32, m: u32) -> Result<Self, GrowError> {
        Self::new(
            EmpiricalDistribution::constant(n),
            EmpiricalDistribution::constant(m),
        )
    }

    /// Expected edges per new node.
    pub fn edges_per_node(&self) -> f64 {
        self.edges_per_new_node.mean() + self.inner_edges_per_arrival.mean()
    }
}

/// Histograms of attachment counts per arrival and of inner edges following
/// each arrival (up to the next arrival or the end of the window).
pub fn estimate_outer_model(
    log: &ArrivalLog,
    window: Range<usize>,
) -> Result<OuterModel, GrowError> {
    let mut attachments: Vec<u32> = Vec::new();
    let mut inner: Vec<u32> = Vec::new();
    for e in &log.events[window] {
        match e.kind {
            EventKind::NewNode => {
                attachments.push(1);
                inner.push(0);
            }
            EventKind::NewNodeExtra => {
                if let Some(a) = attachments.last_mut() {
                    *a += 1;
                }
            }
            EventKind::InnerEdge => {
                if let Some(m) = inner.last_mut() {
                    *m += 1;
                }
            }
            EventKind::Initial => {}
        }
    }
    if attachments.is_empty() {
        return Err(GrowError::NoArrivals);
    }
    OuterModel::new(
        EmpiricalDistribution::from_samples(attachments)?,
        EmpiricalDistribution::from_samples(inner)?,
    )
}

/// Draws one node from the mixture distribution over `candidates` by
/// cumulative-sum inversion in the given order.
pub fn sample_choice<R: Rng>(
    mixture: &Mixture,
    graph: &EvolvingGraph,
    candidates: &[NodeId],
    rng: &mut R,
) -> NodeId {
    let probs = mixture_probabilities(mixture, graph, candidates);
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last_positive = candidates[0];
    for (&c, &p) in candidates.iter().zip(&probs) {
        if p > 0.0 {
            acc += p;
            last_positive = c;
            if u < acc {
                return c;
            }
        }
    }
    last_positive
}

/// Where growth starts.
#[derive(Clone, Debug, PartialEq)]
pub enum SeedSpec {
    /// Two nodes joined by one edge.
    SingleEdge,
    /// The first `events` events of an existing log.
    LogPrefix { log: ArrivalLog, events: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthRecipe {
    pub seed: SeedSpec,
    pub outer: OuterModel,
    pub inner: MixtureModel,
    pub target_edges: usize,
    pub rng_seed: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct GrowthWarnings {
    /// Arrivals whose sampled `N` exceeded the number of eligible nodes.
    pub capped_attachments: usize,
    /// Inner-edge draws whose first node had no eligible partner.
    pub failed_inner_draws: usize,
    /// Inner-edge bursts abandoned after too many failed draws.
    pub abandoned_bursts: usize,
}

impl fmt::Display for GrowthWarnings {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "capped_attachments={} failed_inner_draws={} abandoned_bursts={}",
            self.capped_attachments, self.failed_inner_draws, self.abandoned_bursts
        )
    }
}

#[derive(Clone, Debug)]
pub struct GrowthOutcome {
    pub graph: EvolvingGraph,
    pub log: ArrivalLog,
    pub warnings: GrowthWarnings,
}

/// Grows a network from `recipe.seed` until it has `recipe.target_edges` edges.
pub fn grow(recipe: &GrowthRecipe) -> Result<GrowthOutcome, GrowError> {
    let (mut events, mut labels, seed_size) = match &recipe.seed {
        SeedSpec::SingleEdge => (vec![ArrivalEvent::initial()], Vec::new(), 1),
        SeedSpec::LogPrefix { log, events } => {
            let k = (*events).min(log.len());
            (log.events[..k].to_vec(), log.labels.clone(), k)
        }
    };
    let seed_log = ArrivalLog::new(seed_size, events.clone());
    let mut graph = seed_log.validate()?;
    if graph.edge_count() == 0 {
        return Err(GrowError::EmptySeed);
    }
    if recipe.target_edges <= graph.edge_count() {
        return Err(GrowError::TargetTooSmall {
            target: recipe.target_edges,
            seed: graph.edge_count(),
        });
    }

    let capacity = graph.node_count() + recipe.target_edges - graph.edge_count();
    let mut sampler = MixtureSampler::new(&recipe.inner, capacity);
    sampler.sync_all(&graph);
    let mut rng = rng_from_seed(recipe.rng_seed);
    let mut warnings = GrowthWarnings::default();
    let mut touched = Vec::new();
    let target = recipe.target_edges;

    let mut apply = |graph: &mut EvolvingGraph,
                     sampler: &mut MixtureSampler,
                     events: &mut Vec<ArrivalEvent>,
                     e: ArrivalEvent|
     -> Result<(), GrowError> {
        touched.clear();
        let index = events.len();
        graph.apply_event_tracked(&e, index, &mut touched)?;
        sampler.sync(graph, &touched);
        events.push(e);
        Ok(())
    };

    while graph.edge_count() < target {
        let mut n = recipe.outer.edges_per_new_node.sample(&mut rng) as usize;
        if n > graph.node_count() {
            warnings.capped_attachments += 1;
            n = graph.node_count();
        }
        let newcomer = NodeId::from(graph.node_count());
        let first = sampler.sample(StreamSel::NewNode, &graph, ChoiceContext::First, &mut rng);
        apply(
            &mut graph,
            &mut sampler,
            &mut events,
            ArrivalEvent::new_node(newcomer, first),
        )?;
        for _ in 1..n {
            if graph.edge_count() >= target {
                break;
            }
            let context = ChoiceContext::Second(newcomer);
            if candidate_count(&graph, context) == 0 {
                break;
            }
            let next = sampler.sample(StreamSel::NewNode, &graph, context, &mut rng);
            apply(
                &mut graph,
                &mut sampler,
                &mut events,
                ArrivalEvent::new_node_extra(newcomer, next),
            )?;
        }

        let m = recipe.outer.inner_edges_per_arrival.sample(&mut rng);
        let mut added = 0;
        let mut failures = 0;
        while added < m && graph.edge_count() < target {
            let a = sampler.sample(StreamSel::InnerEdge, &graph, ChoiceContext::First, &mut rng);
            let context = ChoiceContext::Second(a);
            if candidate_count(&graph, context) == 0 {
                warnings.failed_inner_draws += 1;
                failures += 1;
                if failures >= MAX_FAILED_INNER_DRAWS {
                    warnings.abandoned_bursts += 1;
                    break;
                }
                continue;
            }
            failures = 0;
            let b = sampler.sample(StreamSel::InnerEdge, &graph, context, &mut rng);
            // newcomer-first is how logs mark an extra attachment, so an inner
            // edge from the still-open newcomer is recorded the other way round
            let edge = if added == 0 && a == newcomer {
                (b, a)
            } else {
                (a, b)
            };
            apply(
                &mut graph,
                &mut sampler,
                &mut events,
                ArrivalEvent::inner_edge(edge.0, edge.1),
            )?;
            added += 1;
        }
    }

    extend_labels(&mut labels, graph.node_count());
    let log = ArrivalLog {
        seed_size,
        events,
        labels,
    };
    Ok(GrowthOutcome {
        graph,
        log,
        warnings,
    })
}

/// Labels for generated nodes are their decimal ids, prefixed with `g` when
/// that would collide with an existing label.
fn extend_labels(labels: &mut Vec<String>, node_count: usize) {
    if labels.len() >= node_count {
        labels.truncate(node_count);
        return;
    }
    let existing: std::collections::HashSet<String> = labels.iter().cloned().collect();
    for i in labels.len()..node_count {
        let plain = i.to_string();
        let mut label = if existing.contains(&plain) {
            format!("g{i}")
        } else {
            plain
        };
        while existing.contains(&label) {
            label.insert(0, 'g');
        }
        labels.push(label);
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum StreamSel {
    NewNode,
    InnerEdge,
}

/// Fenwick tree over node ids holding one component's raw weights.
#[derive(Clone, Debug)]
struct WeightTree {
    tree: Vec<f64>,
    values: Vec<f64>,
}

impl WeightTree {
    fn new(capacity: usize) -> Self {
        let size = capacity.next_power_of_two().max(1);
        WeightTree {
            tree: vec![0.0; size + 1],
            values: vec![0.0; size],
        }
    }

    fn size(&self) -> usize {
        self.values.len()
    }

    fn set(&mut self, i: usize, value: f64) {
        let delta = value - self.values[i];
        if delta == 0.0 {
            return;
        }
        self.values[i] = value;
        let mut k = i + 1;
        while k < self.tree.len() {
            self.tree[k] += delta;
            k += k & k.wrapping_neg();
        }
    }
}

/// Samples node choices from a mixture in `O(terms * log n)`.
///
/// Each distinct component keeps a Fenwick tree of raw weights. A draw picks
/// the smallest node id whose combined prefix mass exceeds a uniform variate,
/// where the combination weights each tree by `beta / candidate mass`. For
/// restricted (second-choice) sets the draw is over all nodes and repeated
/// until it lands in the candidate set, which leaves the accepted draw with
/// exactly the restricted mixture distribution; when acceptance would be rare
/// the candidates are scanned directly instead.
struct MixtureSampler {
    weighers: Vec<Weigher>,
    trees: Vec<WeightTree>,
    null_tree: usize,
    streams: [StreamTerms; 2],
    coefficients: Vec<f64>,
}

struct StreamTerms {
    weigher: MixtureWeigher,
    /// Tree index per term.
    tree_of: Vec<usize>,
}

impl MixtureSampler {
    fn new(model: &MixtureModel, capacity: usize) -> Self {
        let mut kinds = vec![ComponentKind::Null];
        let index_of = |k: ComponentKind, kinds: &mut Vec<ComponentKind>| {
            kinds.iter().position(|&x| x == k).unwrap_or_else(|| {
                kinds.push(k);
                kinds.len() - 1
            })
        };
        let mut streams = Vec::new();
        for mixture in [&model.new_node, &model.inner_edge] {
            let tree_of = mixture
                .terms()
                .iter()
                .map(|t| index_of(t.kind, &mut kinds))
                .collect();
            streams.push(StreamTerms {
                weigher: MixtureWeigher::new(mixture),
                tree_of,
            });
        }
        let streams: [StreamTerms; 2] = streams.try_into().ok().expect("two streams");
        let weighers = kinds.iter().map(|&k| Weigher::new(k)).collect();
        let trees = kinds.iter().map(|_| WeightTree::new(capacity)).collect();
        let coefficients = vec![0.0; kinds.len()];
        MixtureSampler {
            weighers,
            trees,
            null_tree: 0,
            streams,
            coefficients,
        }
    }

    fn ensure_capacity(&mut self, n: usize) {
        if n <= self.trees[0].size() {
            return;
        }
        // rebuild at double size; only reached when a recipe under-estimates growth
        let capacity = n * 2;
        for t in &mut self.trees {
            let values = std::mem::take(&mut t.values);
            *t = WeightTree::new(capacity);
            for (i, v) in values.into_iter().enumerate() {
                t.set(i, v);
            }
        }
    }

    fn sync_all(&mut self, graph: &EvolvingGraph) {
        let nodes: Vec<NodeId> = graph.nodes().collect();
        self.sync(graph, &nodes);
    }

    fn sync(&mut self, graph: &EvolvingGraph, touched: &[NodeId]) {
        self.ensure_capacity(graph.node_count());
        for w in &mut self.weighers {
            w.prepare(graph);
        }
        for (k, w) in self.weighers.iter().enumerate() {
            for &n in touched {
                self.trees[k].set(n.index(), w.weight(graph, n));
            }
        }
    }

    fn sample<R: Rng>(
        &mut self,
        stream: StreamSel,
        graph: &EvolvingGraph,
        context: ChoiceContext,
        rng: &mut R,
    ) -> NodeId {
        let s = match stream {
            StreamSel::NewNode => 0,
            StreamSel::InnerEdge => 1,
        };
        let terms = &mut self.streams[s];
        terms.weigher.refresh(graph);
        let norm = terms.weigher.normalise(graph, context);
        self.coefficients.iter_mut().for_each(|c| *c = 0.0);
        for (i, &tree) in terms.tree_of.iter().enumerate() {
            let beta = terms.weigher.beta(i);
            let mass = norm.masses[i];
            if mass > 0.0 {
                self.coefficients[tree] += beta / mass;
            } else {
                self.coefficients[self.null_tree] += beta * norm.uniform;
            }
        }
        let total: f64 = self
            .coefficients
            .iter()
            .zip(&self.trees)
            .map(|(c, t)| if *c == 0.0 { 0.0 } else { c * t.tree_total() })
            .sum();

        match context {
            ChoiceContext::First => self.descend(graph, rng.gen::<f64>() * total),
            ChoiceContext::Second(_) => {
                // mass of the candidate set is 1, so acceptance is 1 / total
                if total < 50.0 {
                    for _ in 0..500 {
                        let n = self.descend(graph, rng.gen::<f64>() * total);
                        if is_candidate(graph, context, n) {
                            return n;
                        }
                    }
                }
                self.scan(graph, context, rng.gen::<f64>())
            }
        }
    }

    /// Smallest node whose combined prefix mass exceeds `target`.
    fn descend(&self, graph: &EvolvingGraph, mut target: f64) -> NodeId {
        let size = self.trees[0].size();
        let mut pos = 0usize;
        let mut step = size;
        while step > 0 {
            let next = pos + step;
            if next <= size {
                let mass: f64 = self
                    .coefficients
                    .iter()
                    .zip(&self.trees)
                    .filter(|(c, _)| **c != 0.0)
                    .map(|(c, t)| c * t.tree[next])
                    .sum();
                if mass <= target {
                    pos = next;
                    target -= mass;
                }
            }
            step >>= 1;
        }
        let n = graph.node_count();
        if pos >= n {
            // rounding pushed past the last node; take the last node with mass
            let last = (0..n)
                .rev()
                .find(|&i| self.point_mass(i) > 0.0)
                .unwrap_or(n - 1);
            return NodeId::from(last);
        }
        NodeId::from(pos)
    }

    fn point_mass(&self, i: usize) -> f64 {
        self.coefficients
            .iter()
            .zip(&self.trees)
            .map(|(c, t)| c * t.values[i])
            .sum()
    }

    fn scan(&self, graph: &EvolvingGraph, context: ChoiceContext, u: f64) -> NodeId {
        let mut acc = 0.0;
        let mut last = None;
        for node in graph.nodes() {
            if !is_candidate(graph, context, node) {
                continue;
            }
            let p = self.point_mass(node.index());
            if p > 0.0 {
                acc += p;
                last = Some(node);
                if u < acc {
                    return node;
                }
            }
        }
        last.expect("candidate set has positive mass")
    }
}

impl WeightTree {
    fn tree_total(&self) -> f64 {
        // root of a power-of-two Fenwick tree covers the whole array
        self.tree[self.size()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::components::Term;
    use crate::fixtures;
    use crate::graph::candidate_set;

    #[test]
    fn outer_model_of_worked_example() {
        let log = fixtures::worked_example_log();
        let outer = estimate_outer_model(&log, log.growth_window()).unwrap();
        assert_eq!(outer.edges_per_new_node.probability(1), 1.0);
        assert_eq!(outer.inner_edges_per_arrival.probability(0), 1.0);
    }

    #[test]
    fn outer_model_of_alternating_log() {
        let n = NodeId;
        let log = ArrivalLog::new(
            1,
            vec![
                ArrivalEvent::initial(),
                ArrivalEvent::new_node(n(2), n(0)),
                ArrivalEvent::inner_edge(n(2), n(1)),
                ArrivalEvent::new_node(n(3), n(0)),
                ArrivalEvent::inner_edge(n(3), n(1)),
            ],
        );
        let outer = estimate_outer_model(&log, log.growth_window()).unwrap();
        assert_eq!(outer.edges_per_new_node.probability(1), 1.0);
        assert_eq!(outer.inner_edges_per_arrival.probability(1), 1.0);
        assert_eq!(estimate_outer_model(&log, 2..3), Err(GrowError::NoArrivals));
    }

    #[test]
    fn singleton_never_picks_the_middle() {
        let g = fixtures::path3();
        let c = candidate_set(&g, ChoiceContext::First);
        let mut rng = rng_from_seed(1);
        let m = Mixture::pure(ComponentKind::Singleton);
        for _ in 0..1000 {
            assert_ne!(sample_choice(&m, &g, &c, &mut rng), NodeId(1));
        }
    }

    #[test]
    fn sampling_is_reproducible() {
        let g = fixtures::path3();
        let c = candidate_set(&g, ChoiceContext::First);
        let m = Mixture::pure(ComponentKind::Degree);
        let draw = |seed| {
            let mut rng = rng_from_seed(seed);
            (0..100)
                .map(|_| sample_choice(&m, &g, &c, &mut rng))
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(9), draw(9));
    }

    #[test]
    fn degree_frequency_of_hub() {
        let g = fixtures::path3();
        let c = candidate_set(&g, ChoiceContext::First);
        let m = Mixture::pure(ComponentKind::Degree);
        let mut rng = rng_from_seed(2024);
        let draws = 100_000;
        let hits = (0..draws)
            .filter(|_| sample_choice(&m, &g, &c, &mut rng) == NodeId(1))
            .count();
        let freq = hits as f64 / draws as f64;
        assert!((freq - 0.5).abs() < 0.01, "{freq}");
    }

    fn recipe(kind: ComponentKind, n: u32, m: u32, target: usize, seed: u64) -> GrowthRecipe {
        GrowthRecipe {
            seed: SeedSpec::SingleEdge,
            outer: OuterModel::constant(n, m).unwrap(),
            inner: MixtureModel::uniform(Mixture::pure(kind)),
            target_edges: target,
            rng_seed: seed,
        }
    }

    #[test]
    fn null_tree_growth() {
        let out = grow(&recipe(ComponentKind::Null, 1, 0, 100, 7)).unwrap();
        assert_eq!(out.graph.edge_count(), 100);
        assert_eq!(out.graph.node_count(), 101);
        let replayed = out.log.validate().unwrap();
        assert_eq!(replayed.edge_count(), 100);
        assert_eq!(out.log.labels.len(), 101);
    }

    #[test]
    fn growth_is_deterministic() {
        let a = grow(&recipe(ComponentKind::Pfp(0.1), 2, 1, 500, 3)).unwrap();
        let b = grow(&recipe(ComponentKind::Pfp(0.1), 2, 1, 500, 3)).unwrap();
        assert_eq!(a.log, b.log);
        let c = grow(&recipe(ComponentKind::Pfp(0.1), 2, 1, 500, 4)).unwrap();
        assert_ne!(a.log, c.log);
    }

    #[test]
    fn grown_graph_matches_its_log() {
        let mix = Mixture::new(vec![
            Term::new(0.5, ComponentKind::Triangle),
            Term::new(0.3, ComponentKind::Doubleton),
            Term::new(0.2, ComponentKind::Degree),
        ])
        .unwrap();
        let r = GrowthRecipe {
            seed: SeedSpec::SingleEdge,
            outer: OuterModel::new(
                EmpiricalDistribution::from_weights([(1, 0.5), (3, 0.5)]).unwrap(),
                EmpiricalDistribution::from_weights([(0, 0.5), (2, 0.5)]).unwrap(),
            )
            .unwrap(),
            inner: MixtureModel::uniform(mix),
            target_edges: 800,
            rng_seed: 11,
        };
        let out = grow(&r).unwrap();
        let replayed = out.log.validate().unwrap();
        assert_eq!(replayed.edge_count(), 800);
        let a: Vec<_> = replayed.edges().collect();
        let b: Vec<_> = out.graph.edges().collect();
        assert_eq!(a, b);
    }

    #[test]
    fn attachments_are_capped_on_tiny_seeds() {
        let out = grow(&recipe(ComponentKind::Degree, 5, 0, 30, 1)).unwrap();
        assert!(out.warnings.capped_attachments > 0);
        assert_eq!(out.graph.edge_count(), 30);
    }

    #[test]
    fn near_complete_graphs_abandon_bursts() {
        let out = grow(&recipe(ComponentKind::Null, 1, 200, 40, 1)).unwrap();
        assert_eq!(out.graph.edge_count(), 40);
        out.log.validate().unwrap();
    }

    #[test]
    fn target_must_exceed_seed() {
        assert_eq!(
            grow(&recipe(ComponentKind::Null, 1, 0, 1, 1)).unwrap_err(),
            GrowError::TargetTooSmall { target: 1, seed: 1 }
        );
    }

    #[test]
    fn fast_sampler_matches_explicit_distribution() {
        // empirical frequencies of the tree sampler against the explicit vector
        let out = grow(&recipe(ComponentKind::Degree, 1, 1, 60, 5)).unwrap();
        let g = out.graph;
        let mix = Mixture::new(vec![
            Term::new(0.6, ComponentKind::Pfp(0.3)),
            Term::new(0.4, ComponentKind::Singleton),
        ])
        .unwrap();
        let model = MixtureModel::uniform(mix.clone());
        let mut sampler = MixtureSampler::new(&model, g.node_count());
        sampler.sync_all(&g);
        let hub = g.nodes().max_by_key(|&n| g.degree(n)).unwrap();
        for context in [
            ChoiceContext::First,
            ChoiceContext::Second(hub),
            ChoiceContext::Second(NodeId(5)),
        ] {
            let c = candidate_set(&g, context);
            let p = mixture_probabilities(&mix, &g, &c);
            let mut counts = vec![0usize; g.node_count()];
            let mut rng = rng_from_seed(77);
            let draws = 200_000;
            for _ in 0..draws {
                counts[sampler
                    .sample(StreamSel::NewNode, &g, context, &mut rng)
                    .index()] += 1;
            }
            for (node, prob) in c.iter().zip(&p) {
                let f = counts[node.index()] as f64 / draws as f64;
                assert!(
                    (f - prob).abs() < 0.006,
                    "{context:?} node {node}: {f} vs {prob}"
                );
            }
            let outside: usize = g
                .nodes()
                .filter(|n| !c.contains(n))
                .map(|n| counts[n.index()])
                .sum();
            assert_eq!(outside, 0);
        }
    }
}
