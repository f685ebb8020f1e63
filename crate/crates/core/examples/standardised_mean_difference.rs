// Cohen's d, Hedges' g and SAFE for a standardised mean difference.
//
// SAFE draws the two means and the two variances jointly; replicates with a
// non-positive variance are rejected. The `chisq` variance model swaps the normal
// variance draws for scaled chi-square ones.

use safe_bootstrap::closed_form::smd_estimate;
use safe_bootstrap::{
    safe_estimate, Design, EffectInputs, GroupSummary, SafeConfig, SmdEstimator, VarianceMode,
};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let g1 = GroupSummary::new(13.4, 4.6, 18)?;
    let g2 = GroupSummary::new(16.1, 3.9, 17)?;
    let (d, details) = smd_estimate(&g1, &g2, SmdEstimator::CohenD)?;
    let (g, _) = smd_estimate(&g1, &g2, SmdEstimator::HedgesG)?;
    println!(
        "pooled sd {:.4}, df {}, J {:.4}",
        details.s_p, details.df, details.j
    );

    let inputs = EffectInputs::Smd {
        g1,
        g2,
        design: Design::Independent,
    };
    let config = SafeConfig::with_seed(5).replicates(1_000_000);
    let gaussian = safe_estimate(&inputs, &config)?;
    let chisq = safe_estimate(
        &inputs,
        &SafeConfig {
            variance_mode: VarianceMode::ChiSquare,
            ..config
        },
    )?;

    println!("{:>6} {:>9} {:>9} {:>9} {:>9}", "", "d", "g", "SAFE", "SAFE-chi");
    println!(
        "{:>6} {:>9.4} {:>9.4} {:>9.4} {:>9.4}",
        "Point", d.point, g.point, gaussian.theta_bc, chisq.theta_bc
    );
    println!(
        "{:>6} {:>9.4} {:>9.4} {:>9.4} {:>9.4}",
        "SE", d.se, g.se, gaussian.se_safe, chisq.se_safe
    );
    println!(
        "rejected {} of {} gaussian replicates",
        gaussian.rejected, gaussian.drawn
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
