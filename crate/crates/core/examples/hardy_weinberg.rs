// Departure from Hardy–Weinberg proportions as the log relative excess of
// heterozygotes, with a multinomial sampling model for the three genotype counts.

use safe_bootstrap::closed_form::hwd_estimate;
use safe_bootstrap::{safe_estimate, EffectInputs, GenotypeCounts, SafeConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let config = SafeConfig::with_seed(8).replicates(1_000_000);
    for (aa, het, bb) in [(40, 25, 50), (25, 50, 25), (0, 25, 50)] {
        let g = GenotypeCounts::new(aa, het, bb)?;
        let cf = hwd_estimate(&g, config.cc);
        let safe = safe_estimate(&EffectInputs::Hwd(g), &config)?;
        println!(
            "({aa:>2},{het:>2},{bb:>2})  p_A {:.3}  lnω {:8.4} ({:.4})  SAFE {:8.4} ({:.4})",
            g.allele_frequency(),
            cf.point,
            cf.se,
            safe.theta_bc,
            safe.se_safe
        );
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
