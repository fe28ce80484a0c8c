//! Fitting mixture weights and the PFP exponent to an arrival log.
//!
//! For every choice the candidate nodes become regression rows: the columns
//! are the component probabilities of that node on the graph state the choice
//! was made on, and the response is 1 for the node actually picked and 0
//! otherwise. Since the expected indicator equals the mixture probability,
//! regressing the indicator on the component columns estimates the mixture
//! weights.
//!
//! The regression is solved as non-negative least squares on the normal
//! equations, then polished by maximising the mixture likelihood of the
//! observed choices over the probability simplex. The PFP exponent is not
//! linear and is found by a grid scan of the likelihood instead.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample as sample_indices;
use rayon::prelude::*;
use thiserror::Error;

use crate::components::{ComponentKind, Mixture, MixtureModel, MixtureWeigher, Term};
use crate::generate::rng_from_seed;
use crate::graph::{
    candidate_count, candidate_set, ArrivalLog, ChoiceContext, EventError, EventKind, NodeId,
    Replay, Stream,
};
use crate::likelihood::{evaluate_stream, EvaluateOptions, LikelihoodError};

/// Datasets with more candidate rows than this are negatively sampled under
/// [`SamplingPolicy::Auto`].
pub const AUTO_ROW_LIMIT: usize = 5_000_000;
/// Negatives kept per choice when sampling.
pub const DEFAULT_NEGATIVES: usize = 50;
/// Gram matrices with a larger eigenvalue ratio are flagged as collinear.
pub const CONDITION_LIMIT: f64 = 1e8;

const EM_MAX_ITERATIONS: usize = 5_000;
const EM_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum FitError {
    #[error("no components given")]
    NoComponents,
    #[error("dataset contains no choices")]
    EmptyDataset,
    #[error("template has no pfp term to scan")]
    NoPfpSlot,
    #[error("template has more than one pfp term")]
    MultiplePfpSlots,
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("every grid point gives infinite deviance; the model family cannot explain the data")]
    NoFiniteDelta,
    #[error(transparent)]
    Likelihood(#[from] LikelihoodError),
    #[error(transparent)]
    Event(#[from] EventError),
}

/// Which candidate rows to keep for each choice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SamplingPolicy {
    /// Every candidate of every choice.
    Exhaustive,
    /// The chosen node plus `per_choice` uniformly drawn other candidates.
    /// Kept negatives are weighted so that weighted sums stay unbiased.
    Negatives { per_choice: usize, seed: u64 },
    /// Exhaustive up to [`AUTO_ROW_LIMIT`] rows, otherwise
    /// [`DEFAULT_NEGATIVES`] negatives per choice.
    Auto { seed: u64 },
}

/// One regression row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChoiceRow<'a> {
    pub choice: usize,
    pub node: NodeId,
    /// Component probabilities, in [`ChoiceDataset::components`] order.
    pub values: &'a [f64],
    pub chosen: bool,
    pub weight: f64,
}

/// Indicator-regression table for one stream over one window.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiceDataset {
    pub components: Vec<ComponentKind>,
    pub stream: Stream,
    pub window: Range<usize>,
    /// Event index of each choice.
    pub choice_events: Vec<usize>,
    /// Whether negatives were sampled.
    pub sampled: bool,
    row_choice: Vec<u32>,
    row_node: Vec<NodeId>,
    row_chosen: Vec<bool>,
    row_weight: Vec<f64>,
    values: Vec<f64>,
}

impl ChoiceDataset {
    pub fn choice_count(&self) -> usize {
        self.choice_events.len()
    }

    pub fn row_count(&self) -> usize {
        self.row_node.len()
    }

    pub fn row(&self, i: usize) -> ChoiceRow<'_> {
        let k = self.components.len();
        ChoiceRow {
            choice: self.row_choice[i] as usize,
            node: self.row_node[i],
            values: &self.values[i * k..(i + 1) * k],
            chosen: self.row_chosen[i],
            weight: self.row_weight[i],
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = ChoiceRow<'_>> + '_ {
        (0..self.row_count()).map(|i| self.row(i))
    }

    /// Component values of the chosen row of each choice.
    pub fn chosen_values(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.rows().filter(|r| r.chosen).map(|r| r.values)
    }
}

/// Choices of `stream` in `window`: (event index, context, chosen node).
fn choices_of(event: &crate::graph::ArrivalEvent, stream: Stream) -> Vec<(ChoiceContext, NodeId)> {
    match (event.kind, stream) {
        (EventKind::NewNode, Stream::NewNode) => vec![(ChoiceContext::First, event.v)],
        (EventKind::NewNodeExtra, Stream::NewNode) => {
            vec![(ChoiceContext::Second(event.u), event.v)]
        }
        (EventKind::InnerEdge, Stream::InnerEdge) => vec![
            (ChoiceContext::First, event.u),
            (ChoiceContext::Second(event.u), event.v),
        ],
        _ => Vec::new(),
    }
}

fn total_candidate_rows(
    log: &ArrivalLog,
    window: Range<usize>,
    stream: Stream,
) -> Result<usize, EventError> {
    let mut replay = Replay::new(log, window.start)?;
    let mut rows = 0usize;
    replay.run_until(window.end, |_, g, e| {
        for (context, _) in choices_of(e, stream) {
            rows += candidate_count(g, context);
        }
    })?;
    Ok(rows)
}

/// Builds the regression table for `stream` over `window`.
pub fn build_dataset(
    components: &[ComponentKind],
    log: &ArrivalLog,
    window: Range<usize>,
    stream: Stream,
    sampling: SamplingPolicy,
) -> Result<ChoiceDataset, FitError> {
    if components.is_empty() {
        return Err(FitError::NoComponents);
    }
    if window.start > window.end || window.end > log.len() {
        return Err(LikelihoodError::Window {
            start: window.start,
            end: window.end,
            len: log.len(),
        }
        .into());
    }
    let (negatives, seed) = match sampling {
        SamplingPolicy::Exhaustive => (None, 0),
        SamplingPolicy::Negatives { per_choice, seed } => (Some(per_choice), seed),
        SamplingPolicy::Auto { seed } => {
            if total_candidate_rows(log, window.clone(), stream)? > AUTO_ROW_LIMIT {
                (Some(DEFAULT_NEGATIVES), seed)
            } else {
                (None, seed)
            }
        }
    };
    let mut rng = rng_from_seed(seed);
    let k = components.len();
    let mut columns = MixtureWeigher::columns(components);
    let mut ds = ChoiceDataset {
        components: components.to_vec(),
        stream,
        window: window.clone(),
        choice_events: Vec::new(),
        sampled: negatives.is_some(),
        row_choice: Vec::new(),
        row_node: Vec::new(),
        row_chosen: Vec::new(),
        row_weight: Vec::new(),
        values: Vec::new(),
    };
    let mut buf = Vec::with_capacity(k);
    let mut replay = Replay::new(log, window.start)?;
    while replay.position() < window.end {
        let (index, event) = replay.current().expect("within window");
        let g = replay.graph();
        let choices = choices_of(event, stream);
        if !choices.is_empty() && well_formed_choice(g, event) {
            columns.refresh(g);
        }
        for (context, chosen) in choices {
            if !well_formed_choice(g, event) {
                break;
            }
            let choice = ds.choice_events.len() as u32;
            ds.choice_events.push(index);
            let norm = columns.normalise(g, context);
            let count = candidate_count(g, context);
            let mut push = |node: NodeId, weight: f64, ds: &mut ChoiceDataset| {
                columns.component_values(g, &norm, node, &mut buf);
                ds.row_choice.push(choice);
                ds.row_node.push(node);
                ds.row_chosen.push(node == chosen);
                ds.row_weight.push(weight);
                ds.values.extend_from_slice(&buf);
            };
            match negatives {
                Some(r) if count - 1 > r => {
                    let weight = (count - 1) as f64 / r as f64;
                    let mut picked: Vec<NodeId> = match context {
                        ChoiceContext::First => sample_indices(&mut rng, count - 1, r)
                            .into_iter()
                            .map(|i| {
                                if i >= chosen.index() {
                                    NodeId::from(i + 1)
                                } else {
                                    NodeId::from(i)
                                }
                            })
                            .collect(),
                        ChoiceContext::Second(_) => {
                            let others: Vec<NodeId> = candidate_set(g, context)
                                .into_iter()
                                .filter(|&n| n != chosen)
                                .collect();
                            sample_indices(&mut rng, others.len(), r)
                                .into_iter()
                                .map(|i| others[i])
                                .collect()
                        }
                    };
                    picked.push(chosen);
                    picked.sort_unstable();
                    for node in picked {
                        push(node, if node == chosen { 1.0 } else { weight }, &mut ds);
                    }
                }
                _ => {
                    for node in candidate_set(g, context) {
                        push(node, 1.0, &mut ds);
                    }
                }
            }
        }
        replay.advance()?;
    }
    Ok(ds)
}

fn well_formed_choice(g: &crate::graph::EvolvingGraph, e: &crate::graph::ArrivalEvent) -> bool {
    match e.kind {
        EventKind::Initial => false,
        EventKind::NewNode => g.contains(e.v),
        _ => e.u != e.v && g.contains(e.u) && g.contains(e.v) && !g.has_edge(e.u, e.v),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FitWarning {
    /// The component columns are nearly collinear.
    IllConditioned { condition_number: f64 },
    /// No component received positive least-squares weight; the best single
    /// component by likelihood was used as the starting point.
    NoPositiveWeight { fallback: ComponentKind },
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    pub components: Vec<ComponentKind>,
    pub stream: Stream,
    /// Final mixture weights: in [0, 1], summing to 1.
    pub betas: Vec<f64>,
    /// Non-negative least-squares weights renormalised to sum to 1.
    pub least_squares_betas: Vec<f64>,
    /// Unconstrained least-squares coefficients.
    pub unconstrained: Vec<f64>,
    pub standard_errors: Vec<f64>,
    /// `|unconstrained| > 2 * standard_error`.
    pub significant: Vec<bool>,
    /// Deviance of the fitted mixture on the dataset's window and stream.
    pub fit_deviance: f64,
    pub per_choice_ratio: f64,
    pub condition_number: f64,
    pub warnings: Vec<FitWarning>,
}

impl FitResult {
    /// The collinearity warning, if one was raised.
    pub fn condition_warning(&self) -> Option<f64> {
        self.warnings.iter().find_map(|w| match w {
            FitWarning::IllConditioned { condition_number } => Some(*condition_number),
            _ => None,
        })
    }

    /// Fitted mixture with zero-weight terms dropped.
    pub fn mixture(&self) -> Mixture {
        let terms: Vec<Term> = self
            .components
            .iter()
            .zip(&self.betas)
            .filter(|(_, &b)| b > 0.0)
            .map(|(&k, &b)| Term::new(b, k))
            .collect();
        Mixture::with_tolerance(terms, 1e-6).expect("fitted weights form a mixture")
    }
}

/// Weighted normal equations `G = X'WX`, `b = X'Wy`.
fn normal_equations(ds: &ChoiceDataset) -> (DMatrix<f64>, DVector<f64>) {
    let k = ds.components.len();
    let mut gram = DMatrix::<f64>::zeros(k, k);
    let mut rhs = DVector::<f64>::zeros(k);
    for row in ds.rows() {
        for a in 0..k {
            let xa = row.weight * row.values[a];
            if xa == 0.0 {
                continue;
            }
            for b in a..k {
                gram[(a, b)] += xa * row.values[b];
            }
            if row.chosen {
                rhs[a] += xa;
            }
        }
    }
    for a in 0..k {
        for b in 0..a {
            gram[(a, b)] = gram[(b, a)];
        }
    }
    (gram, rhs)
}

fn condition_number(gram: &DMatrix<f64>) -> f64 {
    let eig = gram.clone().symmetric_eigen();
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if min <= max * f64::EPSILON * gram.nrows() as f64 || min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Lawson-Hanson active set for `min |y - X beta|^2, beta >= 0`, written on
/// the normal equations `gram = X'X`, `rhs = X'y`.
pub fn nnls_normal(gram: &DMatrix<f64>, rhs: &DVector<f64>) -> DVector<f64> {
    let k = rhs.len();
    let scale = gram.diagonal().max().max(f64::MIN_POSITIVE);
    let tol = 1e-12 * scale;
    let mut x = DVector::<f64>::zeros(k);
    let mut passive = vec![false; k];
    for _ in 0..(3 * k + 10) {
        let w = rhs - gram * &x;
        let candidate = (0..k)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&a, &b| w[a].total_cmp(&w[b]));
        let Some(j) = candidate else { break };
        passive[j] = true;
        loop {
            let idx: Vec<usize> = (0..k).filter(|&i| passive[i]).collect();
            let z = solve_subset(gram, rhs, &idx);
            if idx.iter().zip(z.iter()).all(|(_, &v)| v > 0.0) {
                x.fill(0.0);
                for (&i, &v) in idx.iter().zip(z.iter()) {
                    x[i] = v;
                }
                break;
            }
            let mut alpha = f64::INFINITY;
            for (&i, &v) in idx.iter().zip(z.iter()) {
                if v <= 0.0 {
                    alpha = alpha.min(x[i] / (x[i] - v));
                }
            }
            for (&i, &v) in idx.iter().zip(z.iter()) {
                x[i] += alpha * (v - x[i]);
                if x[i] <= tol.min(1e-15) {
                    x[i] = 0.0;
                    passive[i] = false;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    x
}

fn solve_subset(gram: &DMatrix<f64>, rhs: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
    let m = idx.len();
    let sub = DMatrix::from_fn(m, m, |a, b| gram[(idx[a], idx[b])]);
    let r = DVector::from_fn(m, |a, _| rhs[idx[a]]);
    match sub.clone().cholesky() {
        Some(ch) => ch.solve(&r),
        None => sub
            .pseudo_inverse(1e-12)
            .map(|p| p * &r)
            .unwrap_or_else(|_| DVector::zeros(m)),
    }
}

/// Unconstrained least squares and classical standard errors.
fn unconstrained_fit(
    ds: &ChoiceDataset,
    gram: &DMatrix<f64>,
    rhs: &DVector<f64>,
) -> (Vec<f64>, Vec<f64>) {
    let k = rhs.len();
    let Some(inverse) = gram
        .clone()
        .try_inverse()
        .filter(|m| m.iter().all(|v| v.is_finite()))
    else {
        let beta = gram
            .clone()
            .pseudo_inverse(1e-12)
            .map(|p| p * rhs)
            .unwrap_or_else(|_| DVector::zeros(k));
        return (beta.iter().copied().collect(), vec![f64::INFINITY; k]);
    };
    let beta = &inverse * rhs;
    let mut rss = 0.0;
    let mut n = 0.0;
    for row in ds.rows() {
        let fitted: f64 = row.values.iter().zip(beta.iter()).map(|(x, b)| x * b).sum();
        let y = if row.chosen { 1.0 } else { 0.0 };
        rss += row.weight * (y - fitted).powi(2);
        n += row.weight;
    }
    let dof = (n - k as f64).max(1.0);
    let sigma2 = rss / dof;
    let se = (0..k)
        .map(|i| (sigma2 * inverse[(i, i)]).max(0.0).sqrt())
        .collect();
    (beta.iter().copied().collect(), se)
}

/// Maximises `sum_j ln(sum_k beta_k x_jk)` over the simplex by EM.
fn maximise_likelihood(chosen: &[&[f64]], start: &[f64]) -> Vec<f64> {
    let k = start.len();
    let rows: Vec<&[f64]> = chosen
        .iter()
        .copied()
        .filter(|r| r.iter().any(|&v| v > 0.0))
        .collect();
    if rows.is_empty() || k == 1 {
        return start.to_vec();
    }
    let mut beta: Vec<f64> = start.iter().map(|&b| 0.5 * b + 0.5 / k as f64).collect();
    let mut next = vec![0.0; k];
    for _ in 0..EM_MAX_ITERATIONS {
        next.iter_mut().for_each(|v| *v = 0.0);
        for row in &rows {
            let p: f64 = row.iter().zip(&beta).map(|(x, b)| x * b).sum();
            for i in 0..k {
                next[i] += beta[i] * row[i] / p;
            }
        }
        let n = rows.len() as f64;
        let mut change = 0.0f64;
        for i in 0..k {
            let v = next[i] / n;
            change = change.max((v - beta[i]).abs());
            beta[i] = v;
        }
        if change < EM_TOLERANCE {
            break;
        }
    }
    let sum: f64 = beta.iter().sum();
    beta.iter().map(|b| b / sum).collect()
}

fn mixture_from(components: &[ComponentKind], betas: &[f64]) -> Mixture {
    let terms = components
        .iter()
        .zip(betas)
        .map(|(&k, &b)| Term::new(b, k))
        .collect();
    Mixture::with_tolerance(terms, 1e-6).expect("valid weights")
}

fn unit(k: usize, i: usize) -> Vec<f64> {
    (0..k).map(|j| if j == i { 1.0 } else { 0.0 }).collect()
}

/// Estimates mixture weights from `dataset`, which must have been built from `log`.
pub fn fit_mixture(dataset: &ChoiceDataset, log: &ArrivalLog) -> Result<FitResult, FitError> {
    let k = dataset.components.len();
    if k == 0 {
        return Err(FitError::NoComponents);
    }
    if dataset.choice_count() == 0 {
        return Err(FitError::EmptyDataset);
    }
    let window = dataset.window.clone();
    let stream = dataset.stream;
    let score = |betas: &[f64]| -> Result<(f64, f64), FitError> {
        let r = evaluate_stream(
            &mixture_from(&dataset.components, betas),
            log,
            window.clone(),
            stream,
            &EvaluateOptions::default(),
        )?;
        Ok((r.deviance, r.per_choice_ratio))
    };

    let (gram, rhs) = normal_equations(dataset);
    let condition = condition_number(&gram);
    let mut warnings = Vec::new();
    if k > 1 && condition > CONDITION_LIMIT {
        warnings.push(FitWarning::IllConditioned {
            condition_number: condition,
        });
    }
    let (unconstrained, standard_errors) = unconstrained_fit(dataset, &gram, &rhs);
    let significant = unconstrained
        .iter()
        .zip(&standard_errors)
        .map(|(b, se)| b.abs() > 2.0 * se)
        .collect();

    let pure_scores: Vec<(f64, f64)> = if k > 1 {
        (0..k)
            .map(|i| score(&unit(k, i)))
            .collect::<Result<_, _>>()?
    } else {
        Vec::new()
    };
    let best_pure = || {
        (0..k)
            .min_by(|&a, &b| pure_scores[a].0.total_cmp(&pure_scores[b].0))
            .unwrap_or(0)
    };

    let nnls = nnls_normal(&gram, &rhs);
    let nnls_sum: f64 = nnls.iter().sum();
    let least_squares_betas: Vec<f64> = if k == 1 {
        vec![1.0]
    } else if nnls_sum > 0.0 {
        nnls.iter().map(|v| v / nnls_sum).collect()
    } else {
        let i = best_pure();
        warnings.push(FitWarning::NoPositiveWeight {
            fallback: dataset.components[i],
        });
        unit(k, i)
    };

    let chosen: Vec<&[f64]> = dataset.chosen_values().collect();
    let refined = maximise_likelihood(&chosen, &least_squares_betas);
    let (mut betas, (mut deviance, mut ratio)) = (refined.clone(), score(&refined)?);
    for (i, &(d, c)) in pure_scores.iter().enumerate() {
        if d < deviance {
            betas = unit(k, i);
            deviance = d;
            ratio = c;
        }
    }

    Ok(FitResult {
        components: dataset.components.clone(),
        stream,
        betas,
        least_squares_betas,
        unconstrained,
        standard_errors,
        significant,
        fit_deviance: deviance,
        per_choice_ratio: ratio,
        condition_number: condition,
        warnings,
    })
}

/// Grid for [`scan_delta`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeltaGrid {
    pub lo: f64,
    pub hi: f64,
    pub coarse_step: f64,
    pub refine_levels: u32,
}

impl Default for DeltaGrid {
    fn default() -> Self {
        DeltaGrid {
            lo: -2.5,
            hi: 2.5,
            coarse_step: 0.1,
            refine_levels: 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeltaPoint {
    pub delta: f64,
    pub per_choice_ratio: f64,
    pub deviance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeltaScan {
    pub best_delta: f64,
    pub best_ratio: f64,
    /// Every evaluated point, ascending in delta.
    pub table: Vec<DeltaPoint>,
}

fn round_grid(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

fn grid_points(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=count)
        .map(|i| round_grid(lo + i as f64 * step))
        .collect()
}

/// Substitutes `delta` into the single Pfp term of `template`.
pub fn with_delta(template: &Mixture, delta: f64) -> Mixture {
    let terms = template
        .terms()
        .iter()
        .map(|t| match t.kind {
            ComponentKind::Pfp(_) => Term::new(t.weight, ComponentKind::Pfp(delta)),
            _ => *t,
        })
        .collect();
    Mixture::new(terms).expect("template weights are valid")
}

/// Scans the Pfp exponent of `template` for the best per-choice likelihood
/// ratio, refining `grid.refine_levels` times around the best point with a
/// ten times finer step each time.
pub fn scan_delta(
    template: &Mixture,
    log: &ArrivalLog,
    window: Range<usize>,
    stream: Stream,
    grid: DeltaGrid,
) -> Result<DeltaScan, FitError> {
    let slots = template
        .terms()
        .iter()
        .filter(|t| matches!(t.kind, ComponentKind::Pfp(_)))
        .count();
    match slots {
        0 => return Err(FitError::NoPfpSlot),
        1 => {}
        _ => return Err(FitError::MultiplePfpSlots),
    }
    let finite = grid.lo.is_finite() && grid.hi.is_finite() && grid.coarse_step.is_finite();
    if !finite || grid.lo >= grid.hi || grid.coarse_step <= 0.0 {
        return Err(FitError::InvalidGrid(format!(
            "lo={} hi={} step={}",
            grid.lo, grid.hi, grid.coarse_step
        )));
    }
    let evaluate_points = |points: &[f64]| -> Result<Vec<DeltaPoint>, FitError> {
        points
            .par_iter()
            .map(|&delta| {
                let r = evaluate_stream(
                    &with_delta(template, delta),
                    log,
                    window.clone(),
                    stream,
                    &EvaluateOptions::default(),
                )?;
                Ok(DeltaPoint {
                    delta,
                    per_choice_ratio: r.per_choice_ratio,
                    deviance: r.deviance,
                })
            })
            .collect()
    };
    let best_of = |table: &[DeltaPoint]| -> Option<DeltaPoint> {
        table
            .iter()
            .filter(|p| p.deviance.is_finite())
            .fold(None, |best: Option<DeltaPoint>, p| match best {
                Some(b) if b.deviance <= p.deviance => Some(b),
                _ => Some(*p),
            })
    };

    let mut table = evaluate_points(&grid_points(grid.lo, grid.hi, grid.coarse_step))?;
    let mut best = best_of(&table).ok_or(FitError::NoFiniteDelta)?;
    let mut step = grid.coarse_step;
    for _ in 0..grid.refine_levels {
        let fine = step / 10.0;
        let lo = (best.delta - step).max(grid.lo);
        let hi = (best.delta + step).min(grid.hi);
        let points: Vec<f64> = grid_points(lo, hi, fine)
            .into_iter()
            .filter(|d| !table.iter().any(|p| p.delta == *d))
            .collect();
        table.extend(evaluate_points(&points)?);
        table.sort_by(|a, b| a.delta.total_cmp(&b.delta));
        best = best_of(&table).expect("coarse grid had a finite point");
        step = fine;
    }
    Ok(DeltaScan {
        best_delta: best.delta,
        best_ratio: best.per_choice_ratio,
        table,
    })
}

/// Fits the mixture weights of each stream and returns the combined model.
pub fn fit_model(
    new_node: &[ComponentKind],
    inner_edge: &[ComponentKind],
    log: &ArrivalLog,
    window: Range<usize>,
    sampling: SamplingPolicy,
) -> Result<(MixtureModel, FitResult, FitResult), FitError> {
    let fit = |components: &[ComponentKind], stream| -> Result<FitResult, FitError> {
        let ds = build_dataset(components, log, window.clone(), stream, sampling)?;
        fit_mixture(&ds, log)
    };
    let a = fit(new_node, Stream::NewNode)?;
    let b = fit(inner_edge, Stream::InnerEdge)?;
    Ok((MixtureModel::new(a.mixture(), b.mixture()), a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn worked_example_dataset() {
        let log = fixtures::worked_example_log();
        let ds = build_dataset(
            &[ComponentKind::Null, ComponentKind::Degree],
            &log,
            log.growth_window(),
            Stream::NewNode,
            SamplingPolicy::Exhaustive,
        )
        .unwrap();
        assert_eq!(ds.choice_count(), 2);
        assert_eq!(ds.row_count(), 7);
        let chosen: Vec<_> = ds
            .rows()
            .filter(|r| r.chosen)
            .map(|r| (r.choice, r.node))
            .collect();
        assert_eq!(chosen, vec![(0, NodeId(1)), (1, NodeId(1))]);
        let degree: Vec<f64> = ds.rows().map(|r| r.values[1]).collect();
        let expect = [0.25, 0.5, 0.25, 1.0 / 6.0, 0.5, 1.0 / 6.0, 1.0 / 6.0];
        for (a, b) in degree.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        let col_sum: f64 = ds.rows().map(|r| r.values[0]).sum();
        assert!((col_sum - 2.0).abs() < 1e-12);
    }

    #[test]
    fn single_component_has_unit_weight() {
        let log = fixtures::worked_example_log();
        let ds = build_dataset(
            &[ComponentKind::Degree],
            &log,
            log.growth_window(),
            Stream::NewNode,
            SamplingPolicy::Exhaustive,
        )
        .unwrap();
        let fit = fit_mixture(&ds, &log).unwrap();
        assert_eq!(fit.betas, vec![1.0]);
        assert!((fit.fit_deviance - 2.0 * 4f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn empty_window_gives_empty_dataset() {
        let log = fixtures::worked_example_log();
        let ds = build_dataset(
            &[ComponentKind::Null],
            &log,
            4..4,
            Stream::NewNode,
            SamplingPolicy::Exhaustive,
        )
        .unwrap();
        assert_eq!(ds.choice_count(), 0);
        assert_eq!(fit_mixture(&ds, &log), Err(FitError::EmptyDataset));
    }

    #[test]
    fn nnls_clips_negative_coefficients() {
        // y = 2 x0 - x1 with x0, x1 positively correlated
        let gram = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let rhs = DVector::from_vec(vec![3.0, 0.0]);
        let x = nnls_normal(&gram, &rhs);
        assert!((x[0] - 1.5).abs() < 1e-12);
        assert_eq!(x[1], 0.0);
        let interior = nnls_normal(&gram, &DVector::from_vec(vec![3.0, 3.0]));
        assert!((interior[0] - 1.0).abs() < 1e-12 && (interior[1] - 1.0).abs() < 1e-12);
        let none = nnls_normal(&gram, &DVector::from_vec(vec![-1.0, -1.0]));
        assert_eq!(none.iter().sum::<f64>(), 0.0);
    }

    #[test]
    fn em_finds_simplex_maximum() {
        // two choices, rows (x_null, x_degree)
        let rows: Vec<&[f64]> = vec![&[0.5, 1.0], &[0.5, 0.0]];
        // l(b) = ln(0.5 + 0.5 b) + ln(0.5 (1 - b)) is maximised at b = 0
        let beta = maximise_likelihood(&rows, &[0.5, 0.5]);
        assert!(beta[1] < 1e-3, "{beta:?}");
    }

    #[test]
    fn grid_points_are_clean() {
        let g = grid_points(-0.2, 0.2, 0.1);
        assert_eq!(g, vec![-0.2, -0.1, 0.0, 0.1, 0.2]);
    }

    #[test]
    fn scan_needs_one_pfp_slot() {
        let log = fixtures::worked_example_log();
        let w = log.growth_window();
        assert_eq!(
            scan_delta(
                &Mixture::pure(ComponentKind::Degree),
                &log,
                w.clone(),
                Stream::NewNode,
                DeltaGrid::default()
            ),
            Err(FitError::NoPfpSlot)
        );
        let two = Mixture::new(vec![
            Term::new(0.5, ComponentKind::Pfp(0.0)),
            Term::new(0.5, ComponentKind::Pfp(1.0)),
        ])
        .unwrap();
        assert_eq!(
            scan_delta(&two, &log, w.clone(), Stream::NewNode, DeltaGrid::default()),
            Err(FitError::MultiplePfpSlots)
        );
        let bad = DeltaGrid {
            lo: 1.0,
            hi: 0.0,
            ..DeltaGrid::default()
        };
        assert!(matches!(
            scan_delta(
                &Mixture::pure(ComponentKind::Pfp(0.0)),
                &log,
                w,
                Stream::NewNode,
                bad
            ),
            Err(FitError::InvalidGrid(_))
        ));
    }
}
