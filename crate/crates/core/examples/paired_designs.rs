// Matched designs: a within-pair correlation enters the covariance of the sampling
// model and the dependent closed forms.

use safe_bootstrap::closed_form::{lncvr_estimate, lnrom_estimate};
use safe_bootstrap::{safe_estimate, Design, EffectInputs, Error, GroupSummary, Order, SafeConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let before = GroupSummary::new(15.0, 2.0, 25)?;
    let after = GroupSummary::new(10.0, 2.0, 25)?;
    let config = SafeConfig::with_seed(99).replicates(1_000_000);

    for r in [0.0, 0.5, 0.8] {
        let design = Design::paired(r)?;
        let cf = lnrom_estimate(&before, &after, Order::First, design)?;
        let safe = safe_estimate(
            &EffectInputs::two_groups("lnrom".parse()?, before, after, design)?,
            &config,
        )?;
        println!(
            "lnRoM r={r:.1}: delta {:.4} ({:.4})  SAFE {:.4} ({:.4})",
            cf.point, cf.se, safe.theta_bc, safe.se_safe
        );
    }

    // no closed form exists for a second-order paired lnRoM
    match lnrom_estimate(&before, &after, Order::Second, Design::paired(0.5)?) {
        Err(Error::Unsupported(msg)) => println!("second order, paired: {msg}"),
        other => println!("unexpected: {other:?}"),
    }

    let design = Design::paired(0.5)?;
    let d1 = lncvr_estimate(&before, &after, Order::First, design)?;
    let d2 = lncvr_estimate(&before, &after, Order::Second, design)?;
    let safe = safe_estimate(
        &EffectInputs::LnCvr {
            g1: before,
            g2: after,
            design,
        },
        &config,
    )?;
    println!("lnCVR r=0.5   First    Second   SAFE");
    println!("Point       {:8.4} {:8.4} {:8.4}", d1.point, d2.point, safe.theta_bc);
    println!("SE          {:8.4} {:8.4} {:8.4}", d1.se, d2.se, safe.se_safe);

    // unequal group sizes cannot be paired
    let err = EffectInputs::two_groups("smd".parse()?, before, GroupSummary::new(1.0, 1.0, 24)?, design);
    assert!(matches!(err, Err(Error::DesignMismatch(_))));
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
