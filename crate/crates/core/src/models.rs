//! The "fit" step: one fitted sampling distribution of the summary statistics per
//! effect-size family and design.

use rand_distr::{Binomial, ChiSquared, Distribution};
use serde::Serialize;

use crate::error::{push_unique, Error, Result, Warning};
use crate::rng::{self, CovarianceMatrix, LowerFactor, Matrix, RngStream};
use crate::summary::{ContingencyTable, Design, GenotypeCounts, GroupSummary};
use crate::transforms::CcPolicy;

/// How the two sample variances of a quartet model are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum VarianceMode {
    /// Jointly normal with the means, variance `2s⁴/(n-1)`.
    #[default]
    Gaussian,
    /// `s²·χ²(n-1)/(n-1)`, independent designs only.
    #[value(name = "chisq")]
    ChiSquare,
}

/// How lower bounds on drawn coordinates are honoured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Truncation {
    /// Draw unrestricted and let the transform reject invalid rows.
    #[default]
    Reject,
    /// Rejection-sample the truncated normal so every returned row is in bounds.
    BoundedDraw,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaledChiSquare {
    pub variance: f64,
    pub df: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelFamily {
    /// Multivariate normal; with `chi_square` set, the normal block covers only the
    /// two means and the two variance columns are appended from scaled chi-squares.
    NormalVector {
        mean: Vec<f64>,
        cov: CovarianceMatrix,
        lower_bounds: Vec<Option<f64>>,
        chi_square: Option<[ScaledChiSquare; 2]>,
    },
    BinomialPair { trials: [u64; 2], probs: [f64; 2] },
    Multinomial { trials: u64, probs: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplingModel {
    labels: Vec<&'static str>,
    family: ModelFamily,
    warnings: Vec<Warning>,
}

/// Replicate draws: continuous summaries or event counts, one row per replicate.
#[derive(Debug, Clone, PartialEq)]
pub enum Draws {
    Continuous(Matrix<f64>),
    Counts(Matrix<u64>),
}

impl Draws {
    pub fn rows(&self) -> usize {
        match self {
            Draws::Continuous(m) => m.rows(),
            Draws::Counts(m) => m.rows(),
        }
    }
}

impl SamplingModel {
    pub fn labels(&self) -> &[&'static str] {
        &self.labels
    }

    pub fn family(&self) -> &ModelFamily {
        &self.family
    }

    pub fn warnings(&self) -> &[Warning] {
        &self.warnings
    }

    /// Number of coordinates per replicate row.
    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn mean(&self) -> Option<&[f64]> {
        match &self.family {
            ModelFamily::NormalVector { mean, .. } => Some(mean),
            _ => None,
        }
    }

    pub fn covariance(&self) -> Option<&CovarianceMatrix> {
        match &self.family {
            ModelFamily::NormalVector { cov, .. } => Some(cov),
            _ => None,
        }
    }

    pub fn lower_bounds(&self) -> Option<&[Option<f64>]> {
        match &self.family {
            ModelFamily::NormalVector { lower_bounds, .. } => Some(lower_bounds),
            _ => None,
        }
    }

    pub fn probabilities(&self) -> Option<&[f64]> {
        match &self.family {
            ModelFamily::BinomialPair { probs, .. } => Some(probs),
            ModelFamily::Multinomial { probs, .. } => Some(probs),
            ModelFamily::NormalVector { .. } => None,
        }
    }

    /// Draws `count` replicate rows in one go.
    pub fn draw(&self, count: usize, truncation: Truncation, rng: &mut RngStream) -> Result<Draws> {
        self.sampler(truncation)?.draw(count, rng).map(|(d, _)| d)
    }

    pub(crate) fn sampler(&self, truncation: Truncation) -> Result<Sampler<'_>> {
        match &self.family {
            ModelFamily::NormalVector {
                mean,
                cov,
                lower_bounds,
                chi_square,
            } => {
                let factor = rng::cholesky_lower(cov)?;
                let chi = match chi_square {
                    Some(parts) => Some([
                        (parts[0].variance, parts[0].df, rng::chi_square(parts[0].df)?),
                        (parts[1].variance, parts[1].df, rng::chi_square(parts[1].df)?),
                    ]),
                    None => None,
                };
                let bounds = match truncation {
                    Truncation::BoundedDraw if lower_bounds.iter().any(Option::is_some) => {
                        Some(&lower_bounds[..mean.len()])
                    }
                    _ => None,
                };
                Ok(Sampler::Normal {
                    mean,
                    factor,
                    bounds,
                    chi,
                    dim: self.dim(),
                })
            }
            ModelFamily::BinomialPair { trials, probs } => {
                let mk = |n: u64, p: f64| {
                    Binomial::new(n, p).map_err(|e| Error::invalid(format!("binomial({n}, {p}): {e}")))
                };
                Ok(Sampler::Binomial([mk(trials[0], probs[0])?, mk(trials[1], probs[1])?]))
            }
            ModelFamily::Multinomial { trials, probs } => Ok(Sampler::Multinomial {
                trials: *trials,
                probs,
            }),
        }
    }
}

pub(crate) enum Sampler<'a> {
    Normal {
        mean: &'a [f64],
        factor: LowerFactor,
        bounds: Option<&'a [Option<f64>]>,
        chi: Option<[(f64, f64, ChiSquared<f64>); 2]>,
        dim: usize,
    },
    Binomial([Binomial; 2]),
    Multinomial { trials: u64, probs: &'a [f64] },
}

impl Sampler<'_> {
    /// Returns the draws and the number of candidate rows consumed.
    pub(crate) fn draw(&self, count: usize, rng: &mut RngStream) -> Result<(Draws, usize)> {
        match self {
            Sampler::Normal {
                mean,
                factor,
                bounds,
                chi,
                dim,
            } => {
                let (normal, attempts) = match bounds {
                    Some(b) => rng::bounded_with_factor(
                        mean,
                        factor,
                        b,
                        count,
                        rng::DEFAULT_MAX_ATTEMPT_FACTOR,
                        rng,
                    )?,
                    None => (rng::mvn_with_factor(mean, factor, count, rng), count),
                };
                let Some(chi) = chi else {
                    return Ok((Draws::Continuous(normal), attempts));
                };
                let mut out = Matrix::with_capacity(*dim, count);
                let mut row = vec![0.0; *dim];
                for means in normal.iter_rows() {
                    row[..means.len()].copy_from_slice(means);
                    for (j, (variance, df, dist)) in chi.iter().enumerate() {
                        row[means.len() + j] = variance * dist.sample(rng) / df;
                    }
                    out.push_row(&row);
                }
                Ok((Draws::Continuous(out), attempts))
            }
            Sampler::Binomial([first, second]) => {
                let mut out = Matrix::with_capacity(2, count);
                for _ in 0..count {
                    let a = first.sample(rng);
                    let c = second.sample(rng);
                    out.push_row(&[a, c]);
                }
                Ok((Draws::Counts(out), count))
            }
            Sampler::Multinomial { trials, probs } => {
                Ok((Draws::Counts(rng::multinomial_sample(*trials, probs, count, rng)?), count))
            }
        }
    }
}

fn zero_bound_if(flag: bool) -> Option<f64> {
    flag.then_some(0.0)
}

/// `x̄* ~ N(x̄, s²/n)`.
pub fn model_single_mean(g: &GroupSummary) -> SamplingModel {
    SamplingModel {
        labels: vec!["x̄"],
        family: ModelFamily::NormalVector {
            mean: vec![g.mean()],
            cov: CovarianceMatrix::diagonal(&[g.variance() / g.nf()]).expect("1x1 is symmetric"),
            lower_bounds: vec![None],
            chi_square: None,
        },
        warnings: Vec::new(),
    }
}

fn mean_block(g1: &GroupSummary, g2: &GroupSummary, r: f64) -> CovarianceMatrix {
    let mut cov = CovarianceMatrix::diagonal(&[g1.variance() / g1.nf(), g2.variance() / g2.nf()])
        .expect("diagonal is symmetric");
    cov.set_symmetric(0, 1, r * g1.sd() * g2.sd() / (g1.nf() * g2.nf()).sqrt());
    cov
}

/// Bivariate normal for two sample means. `positive_means` sets lower bounds of 0
/// on both coordinates for log-ratio transforms.
pub fn model_two_means(
    g1: &GroupSummary,
    g2: &GroupSummary,
    design: Design,
    positive_means: bool,
) -> Result<SamplingModel> {
    design.check_groups(g1, g2)?;
    Ok(SamplingModel {
        labels: vec!["x̄₁", "x̄₂"],
        family: ModelFamily::NormalVector {
            mean: vec![g1.mean(), g2.mean()],
            cov: mean_block(g1, g2, design.r()),
            lower_bounds: vec![zero_bound_if(positive_means); 2],
            chi_square: None,
        },
        warnings: Vec::new(),
    })
}

/// Joint model for `(x̄₁, x̄₂, s₁², s₂²)`.
///
/// Means and variances are uncorrelated; within each block the off-diagonals carry
/// the within-pair correlation (`r·s₁s₂/√(n₁n₂)` for the means,
/// `2r²s₁²s₂²/√((n₁-1)(n₂-1))` for the variances). Variance coordinates are bounded
/// below by 0.
pub fn model_mean_variance_quartet(
    g1: &GroupSummary,
    g2: &GroupSummary,
    design: Design,
    mode: VarianceMode,
    positive_means: bool,
) -> Result<SamplingModel> {
    design.check_groups(g1, g2)?;
    let r = design.r();
    let mut warnings = Vec::new();
    if g1.n() < 3 || g2.n() < 3 {
        warnings.push(Warning::SmallSample);
    }
    let (v1, v2) = (g1.variance(), g2.variance());
    let (df1, df2) = (g1.nf() - 1.0, g2.nf() - 1.0);
    let labels = vec!["x̄₁", "x̄₂", "s₁²", "s₂²"];
    let mean_bound = zero_bound_if(positive_means);
    let lower_bounds = vec![mean_bound, mean_bound, Some(0.0), Some(0.0)];

    let family = match mode {
        VarianceMode::Gaussian => {
            let means = mean_block(g1, g2, r);
            let mut cov = CovarianceMatrix::diagonal(&[
                means.get(0, 0),
                means.get(1, 1),
                2.0 * v1 * v1 / df1,
                2.0 * v2 * v2 / df2,
            ])?;
            cov.set_symmetric(0, 1, means.get(0, 1));
            cov.set_symmetric(2, 3, 2.0 * r * r * v1 * v2 / (df1 * df2).sqrt());
            ModelFamily::NormalVector {
                mean: vec![g1.mean(), g2.mean(), v1, v2],
                cov,
                lower_bounds,
                chi_square: None,
            }
        }
        VarianceMode::ChiSquare => {
            if r != 0.0 {
                return Err(Error::Unsupported(
                    "chi-square variance draws need an independent design (r = 0)".into(),
                ));
            }
            ModelFamily::NormalVector {
                mean: vec![g1.mean(), g2.mean()],
                cov: mean_block(g1, g2, 0.0),
                lower_bounds,
                chi_square: Some([
                    ScaledChiSquare { variance: v1, df: df1 },
                    ScaledChiSquare { variance: v2, df: df2 },
                ]),
            }
        }
    };
    Ok(SamplingModel {
        labels,
        family,
        warnings,
    })
}

/// Continuity-corrected proportion `(x + add)/(n + 2·add)`.
pub(crate) fn corrected_proportion(x: u64, n: u64, add: f64) -> f64 {
    (x as f64 + add) / (n as f64 + 2.0 * add)
}

/// Two independent binomials for the event counts `a*` and `c*`.
///
/// When an observed event count is 0 or equals its group total, the drawing
/// probability is the continuity-corrected `(x + add)/(n + 2·add)` instead of 0 or 1.
pub fn model_two_binomials(t: &ContingencyTable, cc: CcPolicy) -> SamplingModel {
    let mut warnings = Vec::new();
    let mut prob = |x: u64, n: u64| {
        if x == 0 || x == n {
            push_unique(&mut warnings, Warning::CorrectedDrawProbability);
            corrected_proportion(x, n, cc.add)
        } else {
            x as f64 / n as f64
        }
    };
    let probs = [prob(t.a, t.n1()), prob(t.c, t.n2())];
    SamplingModel {
        labels: vec!["a", "c"],
        family: ModelFamily::BinomialPair {
            trials: [t.n1(), t.n2()],
            probs,
        },
        warnings,
    }
}

/// Genotype proportions, with `add` on every category when any count is zero.
pub(crate) fn corrected_genotype_proportions(g: &GenotypeCounts, add: f64) -> [f64; 3] {
    if g.has_zero() {
        let denom = g.n() as f64 + 3.0 * add;
        g.counts().map(|c| (c as f64 + add) / denom)
    } else {
        g.proportions()
    }
}

/// Multinomial over (AA, Aa, aa).
pub fn model_genotypes(g: &GenotypeCounts, cc: CcPolicy) -> SamplingModel {
    let mut warnings = Vec::new();
    if g.has_zero() {
        warnings.push(Warning::CorrectedDrawProbability);
    }
    let mut probs = corrected_genotype_proportions(g, cc.add).to_vec();
    // absorb rounding so the probabilities sum to one
    probs[2] = 1.0 - probs[0] - probs[1];
    SamplingModel {
        labels: vec!["nAA", "nAa", "naa"],
        family: ModelFamily::Multinomial {
            trials: g.n(),
            probs,
        },
        warnings,
    }
}
