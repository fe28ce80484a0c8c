//! Summary statistics used to compare grown topologies with a target network.

use crate::graph::EvolvingGraph;

/// Degree-distribution, assortativity and clustering summary.
///
/// `assortativity` is `None` when the endpoint-degree variance is zero;
/// `mean_clustering` is `None` when no node has degree two or more.
#[derive(Clone, Debug, PartialEq)]
pub struct StatsSummary {
    pub node_count: usize,
    pub edge_count: usize,
    pub frac_degree_1: f64,
    pub frac_degree_2: f64,
    pub mean_degree: f64,
    pub mean_square_degree: f64,
    pub max_degree: u32,
    pub assortativity: Option<f64>,
    pub mean_clustering: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DegreeStats {
    pub frac_degree_1: f64,
    pub frac_degree_2: f64,
    pub mean_square_degree: f64,
    pub max_degree: u32,
    pub mean_degree: f64,
}

pub fn degree_stats(graph: &EvolvingGraph) -> DegreeStats {
    let n = graph.node_count() as f64;
    let hist = graph.degree_histogram();
    let count = |d: usize| hist.get(d).copied().unwrap_or(0) as f64;
    let mut sum = 0u128;
    let mut sum_sq = 0u128;
    for (d, &c) in hist.iter().enumerate() {
        sum += d as u128 * c as u128;
        sum_sq += (d * d) as u128 * c as u128;
    }
    DegreeStats {
        frac_degree_1: count(1) / n,
        frac_degree_2: count(2) / n,
        mean_square_degree: sum_sq as f64 / n,
        max_degree: graph.max_degree(),
        mean_degree: sum as f64 / n,
    }
}

/// Pearson correlation of the degrees at either end of an edge, with each
/// edge counted in both orientations.
pub fn assortativity(graph: &EvolvingGraph) -> Option<f64> {
    // With both orientations present, both marginals equal the distribution
    // of d over edge ends: sum over edges (d_u + d_v) = sum over nodes d^2.
    let m = graph.edge_count();
    if m == 0 {
        return None;
    }
    let mut s1 = 0u128; // sum over ends of d
    let mut s2 = 0u128; // sum over ends of d^2
    for d in graph.degrees() {
        let d = d as u128;
        s1 += d * d;
        s2 += d * d * d;
    }
    let mut sxy = 0u128;
    for (u, v) in graph.edges() {
        sxy += 2 * graph.degree(u) as u128 * graph.degree(v) as u128;
    }
    let ends = (2 * m) as u128;
    // covariance and variance scaled by ends^2, kept in exact integers
    let cov = sxy as i128 * ends as i128 - (s1 * s1) as i128;
    let var = s2 as i128 * ends as i128 - (s1 * s1) as i128;
    if var == 0 {
        return None;
    }
    Some((cov as f64 / var as f64).clamp(-1.0, 1.0))
}

/// Mean of `t_i / (d_i (d_i - 1) / 2)` over nodes with degree at least two.
pub fn mean_clustering(graph: &EvolvingGraph) -> Option<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for n in graph.nodes() {
        let d = graph.degree(n) as u64;
        if d < 2 {
            continue;
        }
        sum += graph.triangles(n) as f64 / (d * (d - 1) / 2) as f64;
        count += 1;
    }
    (count > 0).then(|| sum / count as f64)
}

pub fn summary(graph: &EvolvingGraph) -> StatsSummary {
    let deg = degree_stats(graph);
    StatsSummary {
        node_count: graph.node_count(),
        edge_count: graph.edge_count(),
        frac_degree_1: deg.frac_degree_1,
        frac_degree_2: deg.frac_degree_2,
        mean_degree: deg.mean_degree,
        mean_square_degree: deg.mean_square_degree,
        max_degree: deg.max_degree,
        assortativity: assortativity(graph),
        mean_clustering: mean_clustering(graph),
    }
}
