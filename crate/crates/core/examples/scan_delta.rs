// Find the positive-feedback exponent that best explains a log.

use std::error::Error;

use netgrowth::io::parse_mixture;
use netgrowth::{
    grow, scan_delta, DeltaGrid, GrowthRecipe, MixtureModel, OuterModel, SeedSpec, Stream,
};

pub fn run() -> Result<(), Box<dyn Error>> {
    let recipe = GrowthRecipe {
        seed: SeedSpec::SingleEdge,
        outer: OuterModel::constant(1, 0)?,
        inner: MixtureModel::uniform(parse_mixture("pfp(0.2)")?),
        target_edges: 5_000,
        rng_seed: 3,
    };
    let log = grow(&recipe)?.log;

    let template = parse_mixture("pfp(0)")?;
    let grid = DeltaGrid {
        lo: -1.0,
        hi: 1.0,
        coarse_step: 0.1,
        refine_levels: 2,
    };
    let scan = scan_delta(&template, &log, log.growth_window(), Stream::NewNode, grid)?;
    for p in scan
        .table
        .iter()
        .filter(|p| (p.delta * 10.0).fract() == 0.0)
    {
        println!("delta {:>5.1}  c0 {:.4}", p.delta, p.per_choice_ratio);
    }
    println!(
        "best delta {} ({} points evaluated)",
        scan.best_delta,
        scan.table.len()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
