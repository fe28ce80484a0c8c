// The five-node worked example: a seed path with two arrivals that both
// attach to the middle node, scored under the uniform and degree models.

use std::error::Error;

use netgrowth::fixtures::worked_example_log;
use netgrowth::{evaluate, ComponentKind, Mixture, MixtureModel};

pub fn run() -> Result<(), Box<dyn Error>> {
    let log = worked_example_log();
    for kind in [ComponentKind::Null, ComponentKind::Degree] {
        let model = MixtureModel::uniform(Mixture::pure(kind));
        let r = evaluate(&model, &log, log.growth_window())?;
        let s = &r.overall;
        println!(
            "{kind:<7} L={:.6} D={:.6} D0={:.6} c0={:.4}",
            s.likelihood(),
            s.deviance,
            s.null_deviance,
            s.per_choice_ratio
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
