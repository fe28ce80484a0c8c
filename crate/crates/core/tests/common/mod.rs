//! Oracles shared by the integration suites: brute-force recomputations that
//! do not touch the incremental code paths.

#![allow(dead_code)]

use std::collections::BTreeSet;

use netgrowth::graph::{candidate_set, ChoiceContext, Replay};
use netgrowth::likelihood::{choice_likelihood, edge_choice_likelihood};
use netgrowth::{
    grow, ArrivalLog, ComponentKind, EventKind, EvolvingGraph, GrowthRecipe, Mixture, MixtureModel,
    NodeId, OuterModel, SeedSpec, Stream, Term,
};

pub fn grown_log(model: &str, outer: (u32, u32), edges: usize, seed: u64) -> ArrivalLog {
    let mix = netgrowth::io::parse_mixture(model).unwrap();
    grown_log_with(MixtureModel::uniform(mix), outer, edges, seed)
}

pub fn grown_log_with(
    model: MixtureModel,
    (n, m): (u32, u32),
    edges: usize,
    seed: u64,
) -> ArrivalLog {
    let recipe = GrowthRecipe {
        seed: SeedSpec::SingleEdge,
        outer: OuterModel::constant(n, m).unwrap(),
        inner: model,
        target_edges: edges,
        rng_seed: seed,
    };
    grow(&recipe).unwrap().log
}

pub const ALL_KINDS: [ComponentKind; 6] = [
    ComponentKind::Null,
    ComponentKind::Degree,
    ComponentKind::Triangle,
    ComponentKind::Singleton,
    ComponentKind::Doubleton,
    ComponentKind::Pfp(0.05),
];

/// Mixture over every component kind with the given raw (unnormalised) weights.
pub fn mixture_from_raw(raw: &[f64], delta: f64) -> Mixture {
    let total: f64 = raw.iter().sum();
    let kinds = [
        ComponentKind::Null,
        ComponentKind::Degree,
        ComponentKind::Triangle,
        ComponentKind::Singleton,
        ComponentKind::Doubleton,
        ComponentKind::Pfp(delta),
    ];
    let terms = kinds
        .iter()
        .zip(raw)
        .map(|(&k, &w)| Term::new(w / total, k))
        .collect();
    Mixture::with_tolerance(terms, 1e-9).unwrap()
}

/// Adjacency sets rebuilt from the edge list.
pub fn adjacency(graph: &EvolvingGraph) -> Vec<BTreeSet<usize>> {
    let mut adj = vec![BTreeSet::new(); graph.node_count()];
    for (u, v) in graph.edges() {
        adj[u.index()].insert(v.index());
        adj[v.index()].insert(u.index());
    }
    adj
}

/// Triangles through each node by enumerating neighbour pairs.
pub fn brute_triangles(adj: &[BTreeSet<usize>]) -> Vec<u64> {
    adj.iter()
        .map(|nb| {
            let nb: Vec<usize> = nb.iter().copied().collect();
            let mut t = 0;
            for i in 0..nb.len() {
                for j in i + 1..nb.len() {
                    if adj[nb[i]].contains(&nb[j]) {
                        t += 1;
                    }
                }
            }
            t
        })
        .collect()
}

/// Union-find check that all nodes form one component.
pub fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut x = x;
        while p[x] != r {
            let next = p[x];
            p[x] = r;
            x = next;
        }
        r
    }
    let mut components = n;
    for &(u, v) in edges {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        if a != b {
            parent[a] = b;
            components -= 1;
        }
    }
    components <= 1
}

/// Log-likelihood of one stream from explicitly enumerated candidate sets.
pub fn explicit_log_likelihood(mixture: &Mixture, log: &ArrivalLog, stream: Stream) -> f64 {
    let mut replay = Replay::new(log, log.seed_size).unwrap();
    let mut l = 0.0;
    replay
        .run_until(log.len(), |_, g, e| {
            let p = match (e.kind, stream) {
                (EventKind::NewNode, Stream::NewNode) => {
                    choice_likelihood(mixture, g, e.v, &candidate_set(g, ChoiceContext::First))
                        .unwrap()
                }
                (EventKind::NewNodeExtra, Stream::NewNode) => choice_likelihood(
                    mixture,
                    g,
                    e.v,
                    &candidate_set(g, ChoiceContext::Second(e.u)),
                )
                .unwrap(),
                (EventKind::InnerEdge, Stream::InnerEdge) => {
                    edge_choice_likelihood(mixture, g, (e.u, e.v)).unwrap()
                }
                _ => return,
            };
            l += p.ln();
        })
        .unwrap();
    l
}

/// Plain summary statistics straight from adjacency sets, in floating point.
pub struct NaiveStats {
    pub d1: f64,
    pub d2: f64,
    pub mean_d: f64,
    pub mean_d2: f64,
    pub dmax: u32,
    pub r: Option<f64>,
    pub gamma: Option<f64>,
}

pub fn naive_stats(n: usize, edges: &[(usize, usize)]) -> NaiveStats {
    let mut adj = vec![BTreeSet::new(); n];
    for &(u, v) in edges {
        adj[u].insert(v);
        adj[v].insert(u);
    }
    let deg: Vec<f64> = adj.iter().map(|a| a.len() as f64).collect();
    let nf = n as f64;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (u, nb) in adj.iter().enumerate() {
        for &v in nb {
            xs.push(deg[u]);
            ys.push(deg[v]);
        }
    }
    let r = if xs.is_empty() {
        None
    } else {
        let m = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / m;
        let my = ys.iter().sum::<f64>() / m;
        let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let vx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let vy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
        if vx == 0.0 || vy == 0.0 {
            None
        } else {
            Some(cov / (vx * vy).sqrt())
        }
    };
    let tri = brute_triangles(&adj);
    let qualifying: Vec<f64> = (0..n)
        .filter(|&i| adj[i].len() >= 2)
        .map(|i| {
            let d = adj[i].len() as f64;
            tri[i] as f64 / (d * (d - 1.0) / 2.0)
        })
        .collect();
    NaiveStats {
        d1: deg.iter().filter(|&&d| d == 1.0).count() as f64 / nf,
        d2: deg.iter().filter(|&&d| d == 2.0).count() as f64 / nf,
        mean_d: deg.iter().sum::<f64>() / nf,
        mean_d2: deg.iter().map(|d| d * d).sum::<f64>() / nf,
        dmax: deg.iter().fold(0.0f64, |a, &b| a.max(b)) as u32,
        r,
        gamma: (!qualifying.is_empty())
            .then(|| qualifying.iter().sum::<f64>() / qualifying.len() as f64),
    }
}

/// Simple random graph with `n` nodes and up to `m` distinct edges, from a
/// small linear congruential stream so the oracle shares no code with the crate.
pub fn random_simple_graph(n: usize, m: usize, seed: u64) -> (EvolvingGraph, Vec<(usize, usize)>) {
    let mut state = seed
        .wrapping_mul(6364136223846793005)
        .wrapping_add(1442695040888963407);
    let mut next = || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (state >> 33) as usize
    };
    let mut seen = BTreeSet::new();
    let mut edges = Vec::new();
    for _ in 0..m {
        let (u, v) = (next() % n, next() % n);
        if u != v && seen.insert((u.min(v), u.max(v))) {
            edges.push((u, v));
        }
    }
    let g = EvolvingGraph::from_edges(
        n,
        edges
            .iter()
            .map(|&(u, v)| (NodeId::from(u), NodeId::from(v))),
    );
    (g, edges)
}
