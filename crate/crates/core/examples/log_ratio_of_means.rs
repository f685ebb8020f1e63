// Log ratio of means: first- and second-order delta method next to SAFE, plus a look
// at the fitted bivariate normal model.

use safe_bootstrap::closed_form::lnrom_estimate;
use safe_bootstrap::{
    safe_estimate, Design, EffectInputs, GroupSummary, Order, SafeConfig, Truncation,
};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let g1 = GroupSummary::new(13.4, 4.6, 18)?;
    let g2 = GroupSummary::new(16.1, 3.9, 17)?;
    let inputs = EffectInputs::LnRoM {
        g1,
        g2,
        design: Design::Independent,
    };

    let model = inputs.sampling_model(Default::default(), Default::default())?;
    let cov = model.covariance().expect("normal model");
    println!(
        "model: mean {:?}, var diag ({:.4}, {:.4})",
        model.mean().unwrap(),
        cov.get(0, 0),
        cov.get(1, 1)
    );

    let first = lnrom_estimate(&g1, &g2, Order::First, Design::Independent)?;
    let second = lnrom_estimate(&g1, &g2, Order::Second, Design::Independent)?;
    let config = SafeConfig::with_seed(11).replicates(1_000_000);
    let safe = safe_estimate(&inputs, &config)?;

    println!("{:>8} {:>9} {:>9} {:>9}", "", "First", "Second", "SAFE");
    println!(
        "{:>8} {:>9.4} {:>9.4} {:>9.4}",
        "Point", first.point, second.point, safe.theta_bc
    );
    println!(
        "{:>8} {:>9.4} {:>9.4} {:>9.4}",
        "SE", first.se, second.se, safe.se_safe
    );

    // redraw instead of discarding non-positive means; with these inputs nothing is lost
    let bounded = safe_estimate(
        &inputs,
        &SafeConfig {
            truncation: Truncation::BoundedDraw,
            ..config
        },
    )?;
    println!("bounded-draw SAFE {:.4} / {:.4}", bounded.theta_bc, bounded.se_safe);
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
