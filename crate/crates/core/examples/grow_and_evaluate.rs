// Grow a network with a known model, then check that the generating model
// scores better than simpler alternatives on the grown log.

use std::error::Error;

use netgrowth::io::parse_mixture;
use netgrowth::{evaluate, grow, GrowthRecipe, MixtureModel, OuterModel, SeedSpec};

pub fn run() -> Result<(), Box<dyn Error>> {
    let truth = MixtureModel::uniform(parse_mixture("0.8*pfp(0.1)+0.2*null")?);
    let recipe = GrowthRecipe {
        seed: SeedSpec::SingleEdge,
        outer: OuterModel::constant(2, 1)?,
        inner: truth.clone(),
        target_edges: 5_000,
        rng_seed: 42,
    };
    let grown = grow(&recipe)?;
    println!(
        "grew {} nodes, {} edges ({})",
        grown.graph.node_count(),
        grown.graph.edge_count(),
        grown.warnings
    );

    for spec in ["null", "degree", "pfp(0.1)", "0.8*pfp(0.1)+0.2*null"] {
        let model = MixtureModel::uniform(parse_mixture(spec)?);
        let r = evaluate(&model, &grown.log, grown.log.growth_window())?;
        println!(
            "{spec:<24} D={:>12.1} c0={:.4} AIC={:.1}",
            r.overall.deviance, r.overall.per_choice_ratio, r.overall.aic
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
