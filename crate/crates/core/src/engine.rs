//! The four SAFE steps: fit, draw, transform, summarise.

use serde::Serialize;

use crate::error::{push_unique, Error, Result, Stage, Warning};
use crate::models::{Truncation, VarianceMode};
use crate::rng::RngStream;
use crate::transforms::{
    for_each_outcome, plugin_estimate, CcPolicy, EffectInputs, ReplicateBatch, Tally, Transformer,
};

pub const DEFAULT_REPLICATES: usize = 100_000;
pub const HIGH_ACCURACY_REPLICATES: usize = 1_000_000;
pub const MIN_REPLICATES: usize = 1_000;

/// Rows drawn per sampler call; bounds peak memory at large B.
const CHUNK: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SafeConfig {
    pub replicates: usize,
    pub seed: u64,
    /// Stream within `seed`; batch runs give each row its own.
    pub stream: u64,
    pub cc: CcPolicy,
    pub variance_mode: VarianceMode,
    pub truncation: Truncation,
    /// Retain θ* (needed for histograms); otherwise only running moments are kept.
    pub keep_replicates: bool,
}

impl Default for SafeConfig {
    fn default() -> Self {
        Self {
            replicates: DEFAULT_REPLICATES,
            seed: 0,
            stream: 0,
            cc: CcPolicy::default(),
            variance_mode: VarianceMode::default(),
            truncation: Truncation::default(),
            keep_replicates: false,
        }
    }
}

impl SafeConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn replicates(mut self, b: usize) -> Self {
        self.replicates = b;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates < MIN_REPLICATES {
            return Err(Error::invalid(format!(
                "B must be at least {MIN_REPLICATES}, got {}",
                self.replicates
            )));
        }
        CcPolicy::new(self.cc.add)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapResult {
    pub theta_hat: f64,
    pub mean_star: f64,
    pub bias: f64,
    pub theta_bc: f64,
    pub se_safe: f64,
    pub var_safe: f64,
    pub drawn: usize,
    pub valid: usize,
    pub rejected: usize,
    pub cc_applied: usize,
    pub warnings: Vec<Warning>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicates: Option<Vec<f64>>,
}

/// Single-pass mean and variance (Welford).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningMoments {
    count: usize,
    mean: f64,
    m2: f64,
}

impl RunningMoments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Divisor `count − 1`.
    pub fn sample_variance(&self) -> f64 {
        if self.count < 2 {
            return f64::NAN;
        }
        self.m2 / (self.count - 1) as f64
    }
}

impl FromIterator<f64> for RunningMoments {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut m = RunningMoments::default();
        iter.into_iter().for_each(|x| m.push(x));
        m
    }
}

fn finish(
    moments: &RunningMoments,
    theta_hat: f64,
    tally: Tally,
    warnings: Vec<Warning>,
    replicates: Option<Vec<f64>>,
) -> Result<BootstrapResult> {
    if moments.count() < 2 {
        return Err(Error::DegenerateBatch {
            valid: moments.count(),
        });
    }
    let mean_star = moments.mean();
    let var_safe = moments.sample_variance();
    Ok(BootstrapResult {
        theta_hat,
        mean_star,
        bias: mean_star - theta_hat,
        theta_bc: 2.0 * theta_hat - mean_star,
        se_safe: var_safe.sqrt(),
        var_safe,
        drawn: tally.drawn,
        valid: tally.valid,
        rejected: tally.nonpositive + tally.nonfinite,
        cc_applied: tally.cc_applied,
        warnings,
        replicates,
    })
}

/// SE, bias and bias-corrected point from a batch of transformed replicates.
pub fn summarise(batch: &ReplicateBatch, theta_hat: f64) -> Result<BootstrapResult> {
    let moments: RunningMoments = batch.values.iter().copied().collect();
    let tally = Tally {
        drawn: batch.drawn,
        valid: batch.valid,
        nonpositive: batch.rejected_nonpositive,
        nonfinite: batch.rejected_nonfinite,
        cc_applied: batch.cc_applied,
    };
    finish(&moments, theta_hat, tally, batch.warnings.clone(), None)
}

fn plugin_needed_correction(inputs: &EffectInputs) -> bool {
    match inputs {
        EffectInputs::LnOR(t) => t.has_zero_cell(),
        EffectInputs::LnRR(t) => t.a == 0 || t.c == 0,
        EffectInputs::Hwd(g) => g.has_zero(),
        _ => false,
    }
}

/// Runs SAFE end to end. θ̂ is the uncorrected first-order plug-in estimate.
pub fn safe_estimate(inputs: &EffectInputs, config: &SafeConfig) -> Result<BootstrapResult> {
    config.validate().map_err(|e| e.at(Stage::Fit))?;
    let mut warnings = Vec::new();
    if config.replicates < DEFAULT_REPLICATES {
        push_unique(&mut warnings, Warning::FewReplicates);
    }
    if inputs.kind().cc_scope().is_some() {
        if !config.cc.is_standard() {
            push_unique(&mut warnings, Warning::NonstandardCorrection);
        }
        if plugin_needed_correction(inputs) {
            push_unique(&mut warnings, Warning::CorrectedPlugIn);
        }
    }

    let theta_hat = plugin_estimate(inputs, config.cc).map_err(|e| e.at(Stage::Fit))?;
    let model = inputs
        .sampling_model(config.variance_mode, config.cc)
        .map_err(|e| e.at(Stage::Fit))?;
    for w in model.warnings() {
        push_unique(&mut warnings, *w);
    }
    let sampler = model
        .sampler(config.truncation)
        .map_err(|e| e.at(Stage::Draw))?;
    let transformer = Transformer::new(inputs, config.cc);
    let mut rng = RngStream::new(config.seed, config.stream);

    let mut tally = Tally::default();
    let mut moments = RunningMoments::default();
    let mut kept = config
        .keep_replicates
        .then(|| Vec::with_capacity(config.replicates));
    let mut remaining = config.replicates;
    while remaining > 0 {
        let n = remaining.min(CHUNK);
        let (draws, _) = sampler.draw(n, &mut rng).map_err(|e| e.at(Stage::Draw))?;
        for_each_outcome(&transformer, &draws, |o| {
            if let Some(v) = tally.record(o) {
                moments.push(v);
                if let Some(k) = kept.as_mut() {
                    k.push(v);
                }
            }
        });
        remaining -= n;
    }
    tally
        .check(&mut warnings)
        .map_err(|e| e.at(Stage::Transform))?;
    finish(&moments, theta_hat, tally, warnings, kept).map_err(|e| e.at(Stage::Summarise))
}
