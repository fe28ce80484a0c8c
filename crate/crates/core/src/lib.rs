//! Likelihood-based evaluation, fitting and generation of network growth models.
//!
//! A network's growth is recorded as an [`ArrivalLog`]: each edge either
//! attaches a new node or joins two existing nodes. An inner model (a
//! [`MixtureModel`] of simple components such as degree-proportional or
//! positive-feedback preference) assigns a probability to every node choice.
//! This crate scores models against observed logs ([`likelihood`]), fits
//! mixture weights and the PFP exponent ([`fit`]), grows artificial networks
//! from fitted models ([`generate`]) and compares summary statistics
//! ([`stats`]).

pub mod cli;
pub mod components;
pub mod fit;
pub mod fixtures;
pub mod generate;
pub mod graph;
pub mod io;
pub mod likelihood;
pub mod stats;

pub use components::{ComponentKind, Mixture, MixtureModel, ModelError, Term};
pub use fit::{
    build_dataset, fit_mixture, scan_delta, ChoiceDataset, DeltaGrid, FitResult, SamplingPolicy,
};
pub use generate::{estimate_outer_model, grow, GrowthRecipe, OuterModel, SeedSpec};
pub use graph::{ArrivalEvent, ArrivalLog, EventKind, EvolvingGraph, NodeId, Stream};
pub use likelihood::{evaluate, evaluate_with, EvaluateOptions, LikelihoodReport, StreamReport};
pub use stats::{summary, StatsSummary};
