//! Plug-in effect sizes and the per-replicate transform.
//!
//! Replicate rows that make a transform undefined are rejected (non-positive means or
//! variances) or continuity-corrected (zero counts), and both are counted.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result, Warning};
use crate::models::{
    corrected_genotype_proportions, corrected_proportion, model_genotypes,
    model_mean_variance_quartet, model_single_mean, model_two_binomials, model_two_means, Draws,
    SamplingModel, VarianceMode,
};
use crate::summary::{ContingencyTable, Design, GenotypeCounts, GroupSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum EffectSizeKind {
    /// Reciprocal of a mean, `1/x̄`.
    Reciprocal,
    /// Log ratio of means.
    #[value(name = "lnrom")]
    LnRoM,
    /// Standardised mean difference (Cohen's d).
    Smd,
    /// Log odds ratio.
    #[value(name = "lnor")]
    LnOR,
    /// Log risk ratio.
    #[value(name = "lnrr")]
    LnRR,
    /// Log coefficient-of-variation ratio.
    #[value(name = "lncvr")]
    LnCvr,
    /// Hardy–Weinberg disequilibrium, log relative excess heterozygosity.
    Hwd,
}

impl EffectSizeKind {
    pub const ALL: [EffectSizeKind; 7] = [
        EffectSizeKind::Reciprocal,
        EffectSizeKind::LnRoM,
        EffectSizeKind::Smd,
        EffectSizeKind::LnOR,
        EffectSizeKind::LnRR,
        EffectSizeKind::LnCvr,
        EffectSizeKind::Hwd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EffectSizeKind::Reciprocal => "reciprocal",
            EffectSizeKind::LnRoM => "lnrom",
            EffectSizeKind::Smd => "smd",
            EffectSizeKind::LnOR => "lnor",
            EffectSizeKind::LnRR => "lnrr",
            EffectSizeKind::LnCvr => "lncvr",
            EffectSizeKind::Hwd => "hwd",
        }
    }

    /// Which counts receive the continuity correction.
    pub fn cc_scope(self) -> Option<CcScope> {
        match self {
            EffectSizeKind::LnOR => Some(CcScope::AllCells),
            EffectSizeKind::LnRR => Some(CcScope::SuccessOnly),
            EffectSizeKind::Hwd => Some(CcScope::AllCategories),
            _ => None,
        }
    }

    pub fn is_two_group_continuous(self) -> bool {
        matches!(
            self,
            EffectSizeKind::LnRoM | EffectSizeKind::Smd | EffectSizeKind::LnCvr
        )
    }
}

impl fmt::Display for EffectSizeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EffectSizeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        EffectSizeKind::ALL
            .into_iter()
            .find(|k| k.name() == lower)
            .ok_or_else(|| Error::invalid(format!("unknown effect size kind {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CcScope {
    /// All four cells of a 2×2 table.
    AllCells,
    /// Only the event count (and its group total) of a group with zero events.
    SuccessOnly,
    /// All three genotype categories.
    AllCategories,
}

/// Continuity correction: the constant added to counts when a zero appears.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CcPolicy {
    pub add: f64,
}

impl Default for CcPolicy {
    fn default() -> Self {
        Self { add: 0.5 }
    }
}

impl CcPolicy {
    pub fn new(add: f64) -> Result<Self> {
        if !(add > 0.0) || !add.is_finite() {
            return Err(Error::invalid(format!(
                "continuity correction must be positive, got {add}"
            )));
        }
        Ok(Self { add })
    }

    pub fn is_standard(&self) -> bool {
        self.add == 0.5 || self.add == 1.0
    }
}

/// Observed inputs for one effect size, tagged by kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EffectInputs {
    Reciprocal(GroupSummary),
    LnRoM {
        g1: GroupSummary,
        g2: GroupSummary,
        design: Design,
    },
    Smd {
        g1: GroupSummary,
        g2: GroupSummary,
        design: Design,
    },
    LnOR(ContingencyTable),
    LnRR(ContingencyTable),
    LnCvr {
        g1: GroupSummary,
        g2: GroupSummary,
        design: Design,
    },
    Hwd(GenotypeCounts),
}

impl EffectInputs {
    /// Builds two-group continuous inputs for `kind`.
    pub fn two_groups(
        kind: EffectSizeKind,
        g1: GroupSummary,
        g2: GroupSummary,
        design: Design,
    ) -> Result<Self> {
        design.check_groups(&g1, &g2)?;
        match kind {
            EffectSizeKind::LnRoM => Ok(EffectInputs::LnRoM { g1, g2, design }),
            EffectSizeKind::Smd => Ok(EffectInputs::Smd { g1, g2, design }),
            EffectSizeKind::LnCvr => Ok(EffectInputs::LnCvr { g1, g2, design }),
            other => Err(Error::invalid(format!("{other} does not take two group summaries"))),
        }
    }

    pub fn kind(&self) -> EffectSizeKind {
        match self {
            EffectInputs::Reciprocal(_) => EffectSizeKind::Reciprocal,
            EffectInputs::LnRoM { .. } => EffectSizeKind::LnRoM,
            EffectInputs::Smd { .. } => EffectSizeKind::Smd,
            EffectInputs::LnOR(_) => EffectSizeKind::LnOR,
            EffectInputs::LnRR(_) => EffectSizeKind::LnRR,
            EffectInputs::LnCvr { .. } => EffectSizeKind::LnCvr,
            EffectInputs::Hwd(_) => EffectSizeKind::Hwd,
        }
    }

    pub fn design(&self) -> Design {
        match self {
            EffectInputs::LnRoM { design, .. }
            | EffectInputs::Smd { design, .. }
            | EffectInputs::LnCvr { design, .. } => *design,
            _ => Design::Independent,
        }
    }

    /// Group labels swapped (rows of a table, AA ↔ aa for genotypes).
    pub fn swapped(&self) -> Self {
        match *self {
            EffectInputs::Reciprocal(g) => EffectInputs::Reciprocal(g),
            EffectInputs::LnRoM { g1, g2, design } => EffectInputs::LnRoM { g1: g2, g2: g1, design },
            EffectInputs::Smd { g1, g2, design } => EffectInputs::Smd { g1: g2, g2: g1, design },
            EffectInputs::LnCvr { g1, g2, design } => EffectInputs::LnCvr { g1: g2, g2: g1, design },
            EffectInputs::LnOR(t) => EffectInputs::LnOR(t.swapped()),
            EffectInputs::LnRR(t) => EffectInputs::LnRR(t.swapped()),
            EffectInputs::Hwd(g) => EffectInputs::Hwd(g.swapped()),
        }
    }

    /// The fitted sampling model bound to this kind.
    pub fn sampling_model(&self, mode: VarianceMode, cc: CcPolicy) -> Result<SamplingModel> {
        match self {
            EffectInputs::Reciprocal(g) => Ok(model_single_mean(g)),
            EffectInputs::LnRoM { g1, g2, design } => model_two_means(g1, g2, *design, true),
            EffectInputs::Smd { g1, g2, design } => {
                model_mean_variance_quartet(g1, g2, *design, mode, false)
            }
            EffectInputs::LnCvr { g1, g2, design } => {
                model_mean_variance_quartet(g1, g2, *design, mode, true)
            }
            EffectInputs::LnOR(t) | EffectInputs::LnRR(t) => Ok(model_two_binomials(t, cc)),
            EffectInputs::Hwd(g) => Ok(model_genotypes(g, cc)),
        }
    }
}

fn positive(quantity: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Domain {
            quantity,
            requirement: "positive",
            value,
        })
    }
}

/// Pooled SD with `df = n₁ + n₂ - 2`.
pub(crate) fn pooled_sd(g1: &GroupSummary, g2: &GroupSummary) -> f64 {
    let df = g1.nf() + g2.nf() - 2.0;
    (((g1.nf() - 1.0) * g1.variance() + (g2.nf() - 1.0) * g2.variance()) / df).sqrt()
}

/// Table cells as reals, with `add` on all four when any cell is zero.
pub(crate) fn corrected_cells(t: &ContingencyTable, add: f64) -> [f64; 4] {
    let cells = [t.a, t.b, t.c, t.d].map(|v| v as f64);
    if t.has_zero_cell() {
        cells.map(|v| v + add)
    } else {
        cells
    }
}

/// Risk `x/n`, or `(x + add)/(n + 2·add)` when `x = 0`.
pub(crate) fn corrected_risk(x: u64, n: u64, add: f64) -> f64 {
    if x == 0 {
        corrected_proportion(x, n, add)
    } else {
        x as f64 / n as f64
    }
}

fn ln_excess_heterozygosity(p: [f64; 3]) -> f64 {
    (p[1] / (2.0 * (p[0] * p[2]).sqrt())).ln()
}

/// The kind's definition formula on the observed summaries.
///
/// Count-based kinds use the continuity-corrected counts when a zero would leave the
/// formula undefined.
pub fn plugin_estimate(inputs: &EffectInputs, cc: CcPolicy) -> Result<f64> {
    match inputs {
        EffectInputs::Reciprocal(g) => {
            if g.mean() == 0.0 {
                return Err(Error::Domain {
                    quantity: "mean",
                    requirement: "non-zero",
                    value: 0.0,
                });
            }
            Ok(1.0 / g.mean())
        }
        EffectInputs::LnRoM { g1, g2, .. } => {
            Ok((positive("mean 1", g1.mean())? / positive("mean 2", g2.mean())?).ln())
        }
        EffectInputs::Smd { g1, g2, .. } => {
            let sp = positive("pooled sd", pooled_sd(g1, g2))?;
            Ok((g1.mean() - g2.mean()) / sp)
        }
        EffectInputs::LnOR(t) => {
            let [a, b, c, d] = corrected_cells(t, cc.add);
            Ok((a * d / (b * c)).ln())
        }
        EffectInputs::LnRR(t) => {
            let p1 = corrected_risk(t.a, t.n1(), cc.add);
            let p2 = corrected_risk(t.c, t.n2(), cc.add);
            Ok((p1 / p2).ln())
        }
        EffectInputs::LnCvr { g1, g2, .. } => {
            let m1 = positive("mean 1", g1.mean())?;
            let m2 = positive("mean 2", g2.mean())?;
            Ok((g1.sd() / m1).ln() - (g2.sd() / m2).ln())
        }
        EffectInputs::Hwd(g) => Ok(ln_excess_heterozygosity(corrected_genotype_proportions(
            g, cc.add,
        ))),
    }
}

/// Transformed replicates and their accounting.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReplicateBatch {
    pub values: Vec<f64>,
    pub drawn: usize,
    pub valid: usize,
    pub rejected_nonpositive: usize,
    pub rejected_nonfinite: usize,
    pub cc_applied: usize,
    pub warnings: Vec<Warning>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Outcome {
    Value { theta: f64, corrected: bool },
    NonPositive,
    NonFinite,
}

/// Per-row transform with the design constants it needs.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Transformer {
    Reciprocal,
    LnRoM,
    Smd { w1: f64, w2: f64, df: f64 },
    LnOR { n1: u64, n2: u64, add: f64 },
    LnRR { n1: u64, n2: u64, add: f64 },
    LnCvr,
    Hwd { n: u64, add: f64 },
}

impl Transformer {
    pub(crate) fn new(inputs: &EffectInputs, cc: CcPolicy) -> Self {
        match inputs {
            EffectInputs::Reciprocal(_) => Transformer::Reciprocal,
            EffectInputs::LnRoM { .. } => Transformer::LnRoM,
            EffectInputs::Smd { g1, g2, .. } => Transformer::Smd {
                w1: g1.nf() - 1.0,
                w2: g2.nf() - 1.0,
                df: g1.nf() + g2.nf() - 2.0,
            },
            EffectInputs::LnOR(t) => Transformer::LnOR {
                n1: t.n1(),
                n2: t.n2(),
                add: cc.add,
            },
            EffectInputs::LnRR(t) => Transformer::LnRR {
                n1: t.n1(),
                n2: t.n2(),
                add: cc.add,
            },
            EffectInputs::LnCvr { .. } => Transformer::LnCvr,
            EffectInputs::Hwd(g) => Transformer::Hwd { n: g.n(), add: cc.add },
        }
    }

    fn finite(theta: f64, corrected: bool) -> Outcome {
        if theta.is_finite() {
            Outcome::Value { theta, corrected }
        } else {
            Outcome::NonFinite
        }
    }

    pub(crate) fn continuous(&self, row: &[f64]) -> Outcome {
        match *self {
            Transformer::Reciprocal => Self::finite(1.0 / row[0], false),
            Transformer::LnRoM => {
                if row[0] > 0.0 && row[1] > 0.0 {
                    Self::finite((row[0] / row[1]).ln(), false)
                } else {
                    Outcome::NonPositive
                }
            }
            Transformer::Smd { w1, w2, df } => {
                if row[2] > 0.0 && row[3] > 0.0 {
                    let sp2 = (w1 * row[2] + w2 * row[3]) / df;
                    Self::finite((row[0] - row[1]) / sp2.sqrt(), false)
                } else {
                    Outcome::NonPositive
                }
            }
            Transformer::LnCvr => {
                if row.iter().all(|v| *v > 0.0) {
                    Self::finite((row[2].sqrt() / row[0]).ln() - (row[3].sqrt() / row[1]).ln(), false)
                } else {
                    Outcome::NonPositive
                }
            }
            _ => unreachable!("count transform applied to continuous draws"),
        }
    }

    pub(crate) fn counts(&self, row: &[u64]) -> Outcome {
        match *self {
            Transformer::LnOR { n1, n2, add } => {
                let (a, c) = (row[0], row[1]);
                let cells = [a, n1 - a, c, n2 - c];
                let corrected = cells.contains(&0);
                let shift = if corrected { add } else { 0.0 };
                let [a, b, c, d] = cells.map(|v| v as f64 + shift);
                Self::finite((a * d / (b * c)).ln(), corrected)
            }
            Transformer::LnRR { n1, n2, add } => {
                let (a, c) = (row[0], row[1]);
                let p1 = corrected_risk(a, n1, add);
                let p2 = corrected_risk(c, n2, add);
                Self::finite((p1 / p2).ln(), a == 0 || c == 0)
            }
            Transformer::Hwd { n, add } => {
                let corrected = row.contains(&0);
                let p = if corrected {
                    let denom = n as f64 + 3.0 * add;
                    [0, 1, 2].map(|j| (row[j] as f64 + add) / denom)
                } else {
                    [0, 1, 2].map(|j| row[j] as f64 / n as f64)
                };
                Self::finite(ln_excess_heterozygosity(p), corrected)
            }
            _ => unreachable!("continuous transform applied to counts"),
        }
    }
}

/// Running rejection/correction tallies.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Tally {
    pub drawn: usize,
    pub valid: usize,
    pub nonpositive: usize,
    pub nonfinite: usize,
    pub cc_applied: usize,
}

impl Tally {
    pub(crate) fn record(&mut self, outcome: Outcome) -> Option<f64> {
        self.drawn += 1;
        match outcome {
            Outcome::Value { theta, corrected } => {
                self.valid += 1;
                self.cc_applied += corrected as usize;
                Some(theta)
            }
            Outcome::NonPositive => {
                self.nonpositive += 1;
                None
            }
            Outcome::NonFinite => {
                self.nonfinite += 1;
                None
            }
        }
    }

    /// Fails below 50% valid; warns below 99%.
    pub(crate) fn check(&self, warnings: &mut Vec<Warning>) -> Result<()> {
        if self.drawn == 0 {
            return Ok(());
        }
        let frac = self.valid as f64 / self.drawn as f64;
        if frac < 0.5 {
            return Err(Error::ExcessRejection {
                valid: self.valid,
                drawn: self.drawn,
            });
        }
        if frac < 0.99 {
            crate::error::push_unique(warnings, Warning::LowValidFraction);
        }
        Ok(())
    }
}

/// Feeds every draw row through the transformer.
pub(crate) fn for_each_outcome(
    transformer: &Transformer,
    draws: &Draws,
    mut f: impl FnMut(Outcome),
) {
    match draws {
        Draws::Continuous(m) => m.iter_rows().for_each(|r| f(transformer.continuous(r))),
        Draws::Counts(m) => m.iter_rows().for_each(|r| f(transformer.counts(r))),
    }
}

/// Applies the effect-size formula to every replicate row.
pub fn transform_replicates(
    inputs: &EffectInputs,
    draws: &Draws,
    cc: CcPolicy,
) -> Result<ReplicateBatch> {
    let transformer = Transformer::new(inputs, cc);
    let shape_ok = match (&transformer, draws) {
        (Transformer::Reciprocal, Draws::Continuous(m)) => m.cols() == 1,
        (Transformer::LnRoM, Draws::Continuous(m)) => m.cols() == 2,
        (Transformer::Smd { .. } | Transformer::LnCvr, Draws::Continuous(m)) => m.cols() == 4,
        (Transformer::LnOR { .. } | Transformer::LnRR { .. }, Draws::Counts(m)) => m.cols() == 2,
        (Transformer::Hwd { .. }, Draws::Counts(m)) => m.cols() == 3,
        _ => false,
    };
    if !shape_ok {
        return Err(Error::invalid(format!(
            "draws do not match the sampling model of {}",
            inputs.kind()
        )));
    }
    let mut tally = Tally::default();
    let mut values = Vec::with_capacity(draws.rows());
    for_each_outcome(&transformer, draws, |o| {
        if let Some(v) = tally.record(o) {
            values.push(v);
        }
    });
    let mut warnings = Vec::new();
    tally.check(&mut warnings)?;
    Ok(ReplicateBatch {
        values,
        drawn: tally.drawn,
        valid: tally.valid,
        rejected_nonpositive: tally.nonpositive,
        rejected_nonfinite: tally.nonfinite,
        cc_applied: tally.cc_applied,
        warnings,
    })
}
