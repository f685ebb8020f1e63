// Log coefficient-of-variation ratio. The delta-method variance has no
// mean-variance covariance term; SAFE needs none either, it just transforms draws.

use safe_bootstrap::closed_form::lncvr_estimate;
use safe_bootstrap::{safe_estimate, Design, EffectInputs, GroupSummary, Order, SafeConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let g1 = GroupSummary::new(17.0, 2.0, 23)?;
    let g2 = GroupSummary::new(12.0, 3.0, 27)?;
    let first = lncvr_estimate(&g1, &g2, Order::First, Design::Independent)?;
    let second = lncvr_estimate(&g1, &g2, Order::Second, Design::Independent)?;
    let safe = safe_estimate(
        &EffectInputs::LnCvr {
            g1,
            g2,
            design: Design::Independent,
        },
        &SafeConfig::with_seed(42).replicates(1_000_000),
    )?;

    println!("        First    Second   SAFE");
    println!("Point {:8.4} {:8.4} {:8.4}", first.point, second.point, safe.theta_bc);
    println!("SE    {:8.4} {:8.4} {:8.4}", first.se, second.se, safe.se_safe);
    println!(
        "{} of {} replicates valid",
        safe.valid, safe.drawn
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
