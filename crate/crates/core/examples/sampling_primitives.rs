// The seeded random-variate layer on its own: correlated normal vectors through a
// Cholesky factor, truncated draws, and multinomial counts.

use safe_bootstrap::rng::{
    cholesky_lower, multinomial_sample, mvn_sample, mvn_sample_lower_bounded,
    DEFAULT_MAX_ATTEMPT_FACTOR,
};
use safe_bootstrap::{CovarianceMatrix, RngStream};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cov = CovarianceMatrix::new(2, vec![1.0, 0.6, 0.6, 2.0])?;
    let l = cholesky_lower(&cov)?;
    println!("L = [[{:.4}, 0], [{:.4}, {:.4}]]", l.get(0, 0), l.get(1, 0), l.get(1, 1));

    // streams sharing a seed are independent of each other
    let mut rng = RngStream::new(123, 0);
    let draws = mvn_sample(&[0.0, 1.0], &cov, 100_000, &mut rng)?;
    let (x, y) = (draws.column(0), draws.column(1));
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let cxy = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / (n - 1.0);
    println!("sample means ({mx:.3}, {my:.3}), covariance {cxy:.3}");

    let mut rng = RngStream::new(123, 1);
    let positive = mvn_sample_lower_bounded(
        &[0.5],
        &CovarianceMatrix::diagonal(&[1.0])?,
        &[Some(0.0)],
        10_000,
        DEFAULT_MAX_ATTEMPT_FACTOR,
        &mut rng,
    )?;
    let min = positive.as_slice().iter().copied().fold(f64::INFINITY, f64::min);
    println!("truncated normal minimum {min:.5}");

    let mut rng = RngStream::new(123, 2);
    let counts = multinomial_sample(115, &[0.35, 0.22, 0.43], 3, &mut rng)?;
    for row in counts.iter_rows() {
        println!("genotypes {row:?} (sum {})", row.iter().sum::<u64>());
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
