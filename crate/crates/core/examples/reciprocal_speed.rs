// Speed from travel times: the reciprocal of a mean is biased upwards in small
// samples, and SAFE estimates that bias directly.

use safe_bootstrap::closed_form::reciprocal_estimate;
use safe_bootstrap::{safe_estimate, EffectInputs, GroupSummary, SafeConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    // hours per unit distance for five trips
    let times = [11.3, 9.7, 10.4, 12.0, 9.1];
    let group = GroupSummary::from_sample(&times)?;
    println!(
        "mean {:.4}, sd {:.4}, n {}",
        group.mean(),
        group.sd(),
        group.n()
    );

    let delta = reciprocal_estimate(&group)?;
    let safe = safe_estimate(
        &EffectInputs::Reciprocal(group),
        &SafeConfig::with_seed(2024).replicates(1_000_000),
    )?;

    println!("plug-in 1/x̄   {:.4}  (delta SE {:.4})", delta.point, delta.se);
    println!("SAFE BC       {:.4}  (SE {:.4})", safe.theta_bc, safe.se_safe);
    println!("bias estimate {:+.6}", safe.bias);

    // 1/x is convex on x > 0, so the replicate mean sits above the plug-in value
    assert!(safe.bias > 0.0);
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
