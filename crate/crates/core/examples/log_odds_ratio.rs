// Log odds ratio from a 2×2 table, including a table with an empty cell.

use safe_bootstrap::closed_form::lnor_estimate;
use safe_bootstrap::{safe_estimate, CcPolicy, ContingencyTable, EffectInputs, SafeConfig};

fn report(label: &str, table: ContingencyTable, config: &SafeConfig) -> safe_bootstrap::Result<()> {
    let cf = lnor_estimate(&table, config.cc);
    let safe = safe_estimate(&EffectInputs::LnOR(table), config)?;
    println!(
        "{label:<10} First {:8.4} ({:.4})   SAFE {:8.4} ({:.4})   corrected replicates {}",
        cf.point, cf.se, safe.theta_bc, safe.se_safe, safe.cc_applied
    );
    for w in &safe.warnings {
        println!("{:<10} warning: {w}", "");
    }
    Ok(())
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let config = SafeConfig::with_seed(24).replicates(1_000_000);
    report("2/20 10/12", ContingencyTable::new(2, 20, 10, 12)?, &config)?;

    // zero events in group 1: every cell gets +0.5 before the log
    report("0/10 5/5", ContingencyTable::new(0, 10, 5, 5)?, &config)?;

    let heavier = SafeConfig {
        cc: CcPolicy::new(1.0)?,
        ..config
    };
    report("cc = 1", ContingencyTable::new(0, 10, 5, 5)?, &heavier)?;
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
