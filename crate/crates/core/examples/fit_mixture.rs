// Recover mixture weights from a grown network.

use std::error::Error;

use netgrowth::io::{parse_mixture, render_fit_human};
use netgrowth::{
    build_dataset, fit_mixture, grow, ComponentKind, GrowthRecipe, MixtureModel, OuterModel,
    SamplingPolicy, SeedSpec, Stream,
};

pub fn run() -> Result<(), Box<dyn Error>> {
    let recipe = GrowthRecipe {
        seed: SeedSpec::SingleEdge,
        outer: OuterModel::constant(1, 1)?,
        inner: MixtureModel::uniform(parse_mixture("0.7*degree+0.3*null")?),
        target_edges: 10_000,
        rng_seed: 7,
    };
    let log = grow(&recipe)?.log;

    let components = [
        ComponentKind::Degree,
        ComponentKind::Null,
        ComponentKind::Singleton,
    ];
    for stream in [Stream::NewNode, Stream::InnerEdge] {
        let data = build_dataset(
            &components,
            &log,
            log.growth_window(),
            stream,
            SamplingPolicy::Auto { seed: 1 },
        )?;
        let fit = fit_mixture(&data, &log)?;
        println!("{} choices, {} rows", data.choice_count(), data.row_count());
        print!("{}", render_fit_human(&fit));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
