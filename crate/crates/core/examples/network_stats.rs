// Compare summary statistics of networks grown with different models.

use std::error::Error;

use netgrowth::io::{parse_mixture, render_stats_human};
use netgrowth::{grow, summary, GrowthRecipe, MixtureModel, OuterModel, SeedSpec};

pub fn run() -> Result<(), Box<dyn Error>> {
    let mut rows = Vec::new();
    for spec in ["null", "degree", "pfp(0.1)", "0.5*triangle+0.5*degree"] {
        let recipe = GrowthRecipe {
            seed: SeedSpec::SingleEdge,
            outer: OuterModel::constant(1, 1)?,
            inner: MixtureModel::uniform(parse_mixture(spec)?),
            target_edges: 4_000,
            rng_seed: 11,
        };
        rows.push((spec.to_owned(), summary(&grow(&recipe)?.graph)));
    }
    print!("{}", render_stats_human(&rows));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
