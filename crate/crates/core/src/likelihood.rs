//! Likelihood statistics of an inner model against an arrival log.
//!
//! Every choice in the window is scored under the candidate model and under
//! the uniform (null) model on the same graph state. From the two
//! log-likelihoods we derive the deviance `D = -2 l`, the null deviance
//! `D0 = -2 (l - l0)` and the per-choice likelihood ratio
//! `c0 = exp((l - l0) / t)`. New-node and inner-edge choices are accumulated
//! separately and then combined.

use std::ops::Range;

use thiserror::Error;

use crate::components::{mixture_probabilities, Mixture, MixtureModel, MixtureWeigher};
use crate::graph::{
    candidate_count, candidate_set, ArrivalEvent, ArrivalLog, ChoiceContext, EventError, EventKind,
    EvolvingGraph, NodeId, Replay, Stream,
};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum LikelihoodError {
    #[error("node {0} is not in the candidate set")]
    NotCandidate(NodeId),
    #[error("({0}, {1}) is not an addable edge")]
    NotAddable(NodeId, NodeId),
    #[error("window {start}..{end} exceeds log of {len} events")]
    Window {
        start: usize,
        end: usize,
        len: usize,
    },
    #[error(transparent)]
    Event(#[from] EventError),
}

/// Options for [`evaluate_with`].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EvaluateOptions {
    /// Mix this fraction of the null model into every choice probability.
    /// Off by default; reported when used.
    pub floor: Option<f64>,
}

/// Likelihood statistics for one stream (or both combined).
#[derive(Clone, Debug, PartialEq)]
pub struct StreamReport {
    pub log_likelihood: f64,
    pub null_log_likelihood: f64,
    pub deviance: f64,
    pub null_deviance: f64,
    pub per_choice_ratio: f64,
    pub choice_count: usize,
    pub free_parameters: usize,
    pub aic: f64,
    pub zero_probability_events: Vec<usize>,
}

impl StreamReport {
    fn from_sums(
        log_likelihood: f64,
        null_log_likelihood: f64,
        choice_count: usize,
        free_parameters: usize,
        zero_probability_events: Vec<usize>,
    ) -> Self {
        // written so that a zero log-likelihood gives +0 rather than -0
        let deviance = 0.0 - 2.0 * log_likelihood;
        let diff = log_likelihood - null_log_likelihood;
        let per_choice_ratio = if choice_count == 0 {
            1.0
        } else {
            (diff / choice_count as f64).exp()
        };
        StreamReport {
            log_likelihood,
            null_log_likelihood,
            deviance,
            null_deviance: 2.0 * (null_log_likelihood - log_likelihood),
            per_choice_ratio,
            choice_count,
            free_parameters,
            aic: aic(deviance, free_parameters),
            zero_probability_events,
        }
    }

    pub fn likelihood(&self) -> f64 {
        self.log_likelihood.exp()
    }

    pub fn is_finite(&self) -> bool {
        self.deviance.is_finite()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LikelihoodReport {
    pub new_node: StreamReport,
    pub inner_edge: StreamReport,
    pub overall: StreamReport,
    pub window: Range<usize>,
    pub floor: Option<f64>,
}

impl LikelihoodReport {
    pub fn stream(&self, stream: Stream) -> &StreamReport {
        match stream {
            Stream::NewNode => &self.new_node,
            Stream::InnerEdge => &self.inner_edge,
        }
    }
}

/// Akaike information criterion `D + 2k`; infinite deviance stays infinite.
pub fn aic(deviance: f64, free_parameters: usize) -> f64 {
    deviance + 2.0 * free_parameters as f64
}

/// Probability that `mixture` picks `chosen` from `candidates`.
pub fn choice_likelihood(
    mixture: &Mixture,
    graph: &EvolvingGraph,
    chosen: NodeId,
    candidates: &[NodeId],
) -> Result<f64, LikelihoodError> {
    let pos = candidates
        .iter()
        .position(|&c| c == chosen)
        .ok_or(LikelihoodError::NotCandidate(chosen))?;
    Ok(mixture_probabilities(mixture, graph, candidates)[pos])
}

/// Probability of adding the inner edge `(a, b)`: pick `a` then `b` from the
/// restricted second set, plus pick `b` then `a`.
pub fn edge_choice_likelihood(
    mixture: &Mixture,
    graph: &EvolvingGraph,
    (a, b): (NodeId, NodeId),
) -> Result<f64, LikelihoodError> {
    if a == b || !graph.contains(a) || !graph.contains(b) || graph.has_edge(a, b) {
        return Err(LikelihoodError::NotAddable(a, b));
    }
    let first = candidate_set(graph, ChoiceContext::First);
    let mut total = 0.0;
    for (x, y) in [(a, b), (b, a)] {
        let second = candidate_set(graph, ChoiceContext::Second(x));
        if second.is_empty() {
            continue;
        }
        total += choice_likelihood(mixture, graph, x, &first)?
            * choice_likelihood(mixture, graph, y, &second)?;
    }
    Ok(total)
}

/// Scores `model` on the events in `window`.
pub fn evaluate(
    model: &MixtureModel,
    log: &ArrivalLog,
    window: Range<usize>,
) -> Result<LikelihoodReport, LikelihoodError> {
    evaluate_with(model, log, window, &EvaluateOptions::default())
}

pub fn evaluate_with(
    model: &MixtureModel,
    log: &ArrivalLog,
    window: Range<usize>,
    options: &EvaluateOptions,
) -> Result<LikelihoodReport, LikelihoodError> {
    let sums = accumulate(
        Some(&model.new_node),
        Some(&model.inner_edge),
        log,
        window.clone(),
        options,
    )?;
    let [new_node, inner_edge] = sums;
    let k_new = model.new_node.free_parameters();
    let k_inner = model.inner_edge.free_parameters();
    let mut zeros: Vec<usize> = new_node
        .zeros
        .iter()
        .chain(&inner_edge.zeros)
        .copied()
        .collect();
    zeros.sort_unstable();
    let overall = StreamReport::from_sums(
        new_node.l + inner_edge.l,
        new_node.l0 + inner_edge.l0,
        new_node.t + inner_edge.t,
        k_new + k_inner,
        zeros,
    );
    Ok(LikelihoodReport {
        new_node: new_node.into_report(k_new),
        inner_edge: inner_edge.into_report(k_inner),
        overall,
        window,
        floor: options.floor,
    })
}

/// Scores a single stream only; the other stream's choices are skipped.
pub fn evaluate_stream(
    mixture: &Mixture,
    log: &ArrivalLog,
    window: Range<usize>,
    stream: Stream,
    options: &EvaluateOptions,
) -> Result<StreamReport, LikelihoodError> {
    let (new, inner) = match stream {
        Stream::NewNode => (Some(mixture), None),
        Stream::InnerEdge => (None, Some(mixture)),
    };
    let [a, b] = accumulate(new, inner, log, window, options)?;
    let sums = if stream == Stream::NewNode { a } else { b };
    Ok(sums.into_report(mixture.free_parameters()))
}

#[derive(Default)]
struct Sums {
    l: f64,
    l0: f64,
    t: usize,
    zeros: Vec<usize>,
}

impl Sums {
    fn add(&mut self, index: usize, p: f64, p_null: f64) {
        if p <= 0.0 {
            self.zeros.push(index);
        }
        self.l += p.ln();
        self.l0 += p_null.ln();
        self.t += 1;
    }

    fn into_report(self, free_parameters: usize) -> StreamReport {
        StreamReport::from_sums(self.l, self.l0, self.t, free_parameters, self.zeros)
    }
}

struct StreamScorer {
    weigher: MixtureWeigher,
    is_null: bool,
    floor: Option<f64>,
}

impl StreamScorer {
    fn new(mixture: &Mixture, floor: Option<f64>) -> Self {
        StreamScorer {
            weigher: MixtureWeigher::new(mixture),
            is_null: mixture.is_null(),
            floor,
        }
    }

    fn refresh(&mut self, g: &EvolvingGraph) {
        if !self.is_null {
            self.weigher.refresh(g);
        }
    }

    fn smooth(&self, p: f64, p_null: f64) -> f64 {
        match self.floor {
            Some(eps) => (1.0 - eps) * p + eps * p_null,
            None => p,
        }
    }

    /// (model, null) probabilities of picking `chosen` in `context`.
    fn node(&self, g: &EvolvingGraph, context: ChoiceContext, chosen: NodeId) -> (f64, f64) {
        let p_null = 1.0 / candidate_count(g, context) as f64;
        if self.is_null {
            return (p_null, p_null);
        }
        let norm = self.weigher.normalise(g, context);
        (
            self.smooth(self.weigher.probability(g, &norm, chosen), p_null),
            p_null,
        )
    }

    fn edge(&self, g: &EvolvingGraph, a: NodeId, b: NodeId) -> (f64, f64) {
        let n = g.node_count() as f64;
        let second = |x| candidate_count(g, ChoiceContext::Second(x)) as f64;
        let p_null = 1.0 / n * (1.0 / second(a)) + 1.0 / n * (1.0 / second(b));
        if self.is_null {
            return (p_null, p_null);
        }
        let first = self.weigher.normalise(g, ChoiceContext::First);
        let mut p = 0.0;
        for (x, y) in [(a, b), (b, a)] {
            let px = self.weigher.probability(g, &first, x);
            if px == 0.0 {
                continue;
            }
            let norm = self.weigher.normalise(g, ChoiceContext::Second(x));
            p += px * self.weigher.probability(g, &norm, y);
        }
        (self.smooth(p, p_null), p_null)
    }
}

fn well_formed(g: &EvolvingGraph, e: &ArrivalEvent) -> bool {
    match e.kind {
        EventKind::Initial => true,
        EventKind::NewNode => g.contains(e.v),
        EventKind::NewNodeExtra | EventKind::InnerEdge => {
            e.u != e.v && g.contains(e.u) && g.contains(e.v) && !g.has_edge(e.u, e.v)
        }
    }
}

fn accumulate(
    new_node: Option<&Mixture>,
    inner_edge: Option<&Mixture>,
    log: &ArrivalLog,
    window: Range<usize>,
    options: &EvaluateOptions,
) -> Result<[Sums; 2], LikelihoodError> {
    if window.start > window.end || window.end > log.len() {
        return Err(LikelihoodError::Window {
            start: window.start,
            end: window.end,
            len: log.len(),
        });
    }
    let mut new_scorer = new_node.map(|m| StreamScorer::new(m, options.floor));
    let mut inner_scorer = inner_edge.map(|m| StreamScorer::new(m, options.floor));
    let mut sums = [Sums::default(), Sums::default()];
    let mut replay = Replay::new(log, window.start)?;
    while replay.position() < window.end {
        let (index, event) = replay.current().expect("within window");
        let g = replay.graph();
        // malformed events are reported by `advance` below
        if event.kind != EventKind::Initial && well_formed(g, event) {
            match event.kind {
                EventKind::NewNode | EventKind::NewNodeExtra => {
                    if let Some(s) = new_scorer.as_mut() {
                        s.refresh(g);
                        let context = match event.kind {
                            EventKind::NewNode => ChoiceContext::First,
                            _ => ChoiceContext::Second(event.u),
                        };
                        let (p, p0) = s.node(g, context, event.v);
                        sums[0].add(index, p, p0);
                    }
                }
                _ => {
                    if let Some(s) = inner_scorer.as_mut() {
                        s.refresh(g);
                        let (p, p0) = s.edge(g, event.u, event.v);
                        sums[1].add(index, p, p0);
                    }
                }
            }
        }
        replay.advance()?;
    }
    Ok(sums)
}
