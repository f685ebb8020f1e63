// Log risk ratio with the success-only continuity correction.

use safe_bootstrap::closed_form::lnrr_estimate;
use safe_bootstrap::{safe_estimate, ContingencyTable, EffectInputs, SafeConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let config = SafeConfig::with_seed(3).replicates(1_000_000);
    let tables = [
        ("2 of 22 vs 10 of 22", ContingencyTable::from_totals(2, 22, 10, 22)?),
        ("0 of 22 vs 10 of 22", ContingencyTable::from_totals(0, 22, 10, 22)?),
        ("10 of 155600 vs 18 of 79250", ContingencyTable::from_totals(10, 155_600, 18, 79_250)?),
    ];
    for (label, t) in tables {
        let cf = lnrr_estimate(&t, config.cc);
        let safe = safe_estimate(&EffectInputs::LnRR(t), &config)?;
        println!("{label}");
        println!("  delta  {:8.4}  var {:.4}", cf.point, cf.variance);
        println!(
            "  SAFE   {:8.4}  var {:.4}  ({} replicates corrected)",
            safe.theta_bc, safe.var_safe, safe.cc_applied
        );
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
