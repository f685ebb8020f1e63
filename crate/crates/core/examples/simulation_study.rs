// A small simulation: raw normal data with a known log ratio of means, reduced to
// summaries, then scored per method. Use the `validate` subcommand for the full grid.

use safe_bootstrap::validation::{simulate_scenario, write_scores, Scenario};
use safe_bootstrap::{EffectSizeKind, SafeConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let scenario = Scenario {
        n_grid: vec![5, 20],
        replications: 200,
        config: SafeConfig::with_seed(17).replicates(10_000),
        ..Scenario::default_for(EffectSizeKind::LnRoM, 17)
    };
    let table = simulate_scenario(&scenario)?;
    write_scores(std::io::stdout(), &scenario, &table)?;
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
