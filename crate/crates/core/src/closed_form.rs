//! Delta-method and classical estimators used as the reference for SAFE.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::corrected_genotype_proportions;
use crate::summary::{ContingencyTable, Design, GenotypeCounts, GroupSummary};
use crate::transforms::{corrected_cells, pooled_sd, CcPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    First,
    Second,
    DependentFirst,
    DependentSecond,
    CohenD,
    HedgesG,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::First => "first",
            Method::Second => "second",
            Method::DependentFirst => "dependent-first",
            Method::DependentSecond => "dependent-second",
            Method::CohenD => "cohen-d",
            Method::HedgesG => "hedges-g",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Taylor expansion order for lnRoM and lnCVR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Order {
    #[default]
    First,
    Second,
}

impl Order {
    pub fn from_number(k: u8) -> Result<Self> {
        match k {
            1 => Ok(Order::First),
            2 => Ok(Order::Second),
            _ => Err(Error::invalid(format!("order must be 1 or 2, got {k}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimatorResult {
    pub point: f64,
    pub variance: f64,
    pub se: f64,
    pub method: Method,
}

impl EstimatorResult {
    fn new(point: f64, variance: f64, method: Method) -> Self {
        Self {
            point,
            variance,
            se: variance.sqrt(),
            method,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmdDetails {
    pub d: f64,
    pub g: f64,
    pub j: f64,
    pub s_p: f64,
    pub df: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SmdEstimator {
    CohenD,
    HedgesG,
}

fn require_positive_means(g1: &GroupSummary, g2: &GroupSummary) -> Result<()> {
    for (quantity, v) in [("mean 1", g1.mean()), ("mean 2", g2.mean())] {
        if !(v > 0.0) {
            return Err(Error::Domain {
                quantity,
                requirement: "positive",
                value: v,
            });
        }
    }
    Ok(())
}

/// `s⁴/(n²·x̄⁴)`, the square of the relative variance of the mean.
fn rel_var_sq(g: &GroupSummary) -> f64 {
    g.rel_var_mean().powi(2)
}

pub fn lnrom_estimate(
    g1: &GroupSummary,
    g2: &GroupSummary,
    order: Order,
    design: Design,
) -> Result<EstimatorResult> {
    require_positive_means(g1, g2)?;
    design.check_groups(g1, g2)?;
    let (rv1, rv2) = (g1.rel_var_mean(), g2.rel_var_mean());
    let plug_in = (g1.mean() / g2.mean()).ln();
    match (order, design) {
        (Order::First, Design::Independent) => {
            Ok(EstimatorResult::new(plug_in, rv1 + rv2, Method::First))
        }
        (Order::Second, Design::Independent) => {
            let point = plug_in + 0.5 * (rv1 - rv2);
            let var = rv1 + rv2 + 0.5 * (rel_var_sq(g1) + rel_var_sq(g2));
            Ok(EstimatorResult::new(point, var, Method::Second))
        }
        (Order::First, Design::Paired(p)) => {
            let cross = 2.0 * p.r() * g1.sd() * g2.sd()
                / (g1.mean() * g2.mean() * (g1.nf() * g2.nf()).sqrt());
            Ok(EstimatorResult::new(plug_in, rv1 + rv2 - cross, Method::DependentFirst))
        }
        (Order::Second, Design::Paired(_)) => Err(Error::Unsupported(
            "second-order lnRoM for paired designs has no closed form; use SAFE".into(),
        )),
    }
}

/// Small-sample factor `J = 1 − 3/(4·df − 1)`.
pub fn hedges_j(df: u64) -> f64 {
    1.0 - 3.0 / (4.0 * df as f64 - 1.0)
}

pub fn smd_estimate(
    g1: &GroupSummary,
    g2: &GroupSummary,
    estimator: SmdEstimator,
) -> Result<(EstimatorResult, SmdDetails)> {
    let s_p = pooled_sd(g1, g2);
    if !(s_p > 0.0) {
        return Err(Error::Domain {
            quantity: "pooled sd",
            requirement: "positive",
            value: s_p,
        });
    }
    let df = g1.n() + g2.n() - 2;
    let d = (g1.mean() - g2.mean()) / s_p;
    let (n1, n2) = (g1.nf(), g2.nf());
    let var_d = (n1 + n2) / (n1 * n2) + d * d / (2.0 * df as f64);
    let j = hedges_j(df);
    let details = SmdDetails {
        d,
        g: j * d,
        j,
        s_p,
        df,
    };
    let result = match estimator {
        SmdEstimator::CohenD => EstimatorResult::new(d, var_d, Method::CohenD),
        SmdEstimator::HedgesG => EstimatorResult::new(j * d, j * j * var_d, Method::HedgesG),
    };
    Ok((result, details))
}

/// Cells get `cc.add` on all four when any is zero.
pub fn lnor_estimate(t: &ContingencyTable, cc: CcPolicy) -> EstimatorResult {
    let [a, b, c, d] = corrected_cells(t, cc.add);
    EstimatorResult::new(
        (a * d / (b * c)).ln(),
        1.0 / a + 1.0 / b + 1.0 / c + 1.0 / d,
        Method::First,
    )
}

/// A group with zero events uses `(add)/(n + 2·add)` and event count `add`.
pub fn lnrr_estimate(t: &ContingencyTable, cc: CcPolicy) -> EstimatorResult {
    let group = |x: u64, n: u64| {
        if x == 0 {
            (cc.add / (n as f64 + 2.0 * cc.add), cc.add)
        } else {
            (x as f64 / n as f64, x as f64)
        }
    };
    let (p1, a) = group(t.a, t.n1());
    let (p2, c) = group(t.c, t.n2());
    EstimatorResult::new((p1 / p2).ln(), (1.0 - p1) / a + (1.0 - p2) / c, Method::First)
}

pub fn lncvr_estimate(
    g1: &GroupSummary,
    g2: &GroupSummary,
    order: Order,
    design: Design,
) -> Result<EstimatorResult> {
    require_positive_means(g1, g2)?;
    design.check_groups(g1, g2)?;
    let (rv1, rv2) = (g1.rel_var_mean(), g2.rel_var_mean());
    let (n1, n2) = (g1.nf(), g2.nf());
    let plug_in = (g1.sd() / g1.mean()).ln() - (g2.sd() / g2.mean()).ln();
    let point = match order {
        Order::First => plug_in,
        Order::Second => {
            plug_in + 0.5 * (1.0 / (n1 - 1.0) - 1.0 / (n2 - 1.0)) + 0.5 * (rv2 - rv1)
        }
    };
    let (variance, method) = match (order, design) {
        (Order::First, Design::Independent) => (
            rv1 + rv2 + 1.0 / (2.0 * (n1 - 1.0)) + 1.0 / (2.0 * (n2 - 1.0)),
            Method::First,
        ),
        (Order::Second, Design::Independent) => {
            let part = |g: &GroupSummary, rv: f64| {
                let n = g.nf();
                rv + 0.5 * rel_var_sq(g) + n / (2.0 * (n - 1.0).powi(2))
            };
            (part(g1, rv1) + part(g2, rv2), Method::Second)
        }
        (Order::First, Design::Paired(p)) => {
            let (r, n) = (p.r(), n1);
            let cross = 2.0 * r * g1.sd() * g2.sd() / (n * g1.mean() * g2.mean());
            (
                rv1 + rv2 - cross + 1.0 / (n - 1.0) - r * r / (n - 1.0),
                Method::DependentFirst,
            )
        }
        (Order::Second, Design::Paired(p)) => {
            let (r, n) = (p.r(), n1);
            let (s1, s2, x1, x2) = (g1.sd(), g2.sd(), g1.mean(), g2.mean());
            let cross = 2.0 * r * s1 * s2 / (n * x1 * x2);
            let cross_quartic = r * r * s1 * s1 * s2 * s2 * (x1.powi(4) + x2.powi(4))
                / (2.0 * n * n * x1.powi(4) * x2.powi(4));
            let sd_terms = n / (n - 1.0).powi(2) - r * r / (n - 1.0)
                + r.powi(4) * (s1.powi(8) + s2.powi(8))
                    / (2.0 * (n - 1.0).powi(2) * s1.powi(4) * s2.powi(4));
            (
                rv1 + 0.5 * rel_var_sq(g1) + rv2 + 0.5 * rel_var_sq(g2) - cross
                    + cross_quartic
                    + sd_terms,
                Method::DependentSecond,
            )
        }
    };
    Ok(EstimatorResult::new(point, variance, method))
}

/// Proportions are continuity-corrected when any count is zero; the `1/n` factor keeps
/// the observed `n`.
pub fn hwd_estimate(g: &GenotypeCounts, cc: CcPolicy) -> EstimatorResult {
    let [p1, p2, p3] = corrected_genotype_proportions(g, cc.add);
    let point = (p2 / (2.0 * (p1 * p3).sqrt())).ln();
    let variance = (1.0 / g.n() as f64) * (1.0 / p2 + (1.0 - p2) / (4.0 * p1 * p3));
    EstimatorResult::new(point, variance, Method::First)
}

/// `s²/(n·x̄⁴)`.
pub fn reciprocal_delta_var(mean: f64, sd: f64, n: u64) -> Result<f64> {
    if mean == 0.0 || !mean.is_finite() {
        return Err(Error::Domain {
            quantity: "mean",
            requirement: "non-zero",
            value: mean,
        });
    }
    Ok(sd * sd / (n as f64 * mean.powi(4)))
}

pub fn reciprocal_estimate(g: &GroupSummary) -> Result<EstimatorResult> {
    let var = reciprocal_delta_var(g.mean(), g.sd(), g.n())?;
    Ok(EstimatorResult::new(1.0 / g.mean(), var, Method::First))
}
