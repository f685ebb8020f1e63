//! Simulation study: draw raw data from a known population, reduce to summaries, and
//! score SAFE against the closed-form estimators on bias, RMSE and SE calibration.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::closed_form::{
    hwd_estimate, lncvr_estimate, lnor_estimate, lnrom_estimate, lnrr_estimate,
    reciprocal_estimate, smd_estimate, Order, SmdEstimator,
};
use crate::engine::{safe_estimate, SafeConfig};
use crate::error::{Error, Result};
use crate::rng::{binomial_sample, multinomial_sample, normal_sample, RngStream};
use crate::summary::{ContingencyTable, Design, GenotypeCounts, GroupSummary};
use crate::transforms::{EffectInputs, EffectSizeKind};

pub const DEFAULT_GRID: [u64; 5] = [5, 10, 20, 50, 100];
pub const DEFAULT_REPLICATIONS: usize = 1000;
const MAX_REGENERATE: usize = 100;

/// Data-generating population.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "population", rename_all = "snake_case")]
pub enum Population {
    Normal { mu: f64, sigma: f64 },
    TwoNormal { mu1: f64, sigma1: f64, mu2: f64, sigma2: f64 },
    TwoBernoulli { p1: f64, p2: f64 },
    Genotypes { probs: [f64; 3] },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoredMethod {
    /// Definition formula on the observed summaries (Cohen's d for SMD).
    PlugIn,
    SecondOrder,
    HedgesG,
    /// SAFE bias-corrected point with the SAFE SE.
    SafeBc,
}

impl ScoredMethod {
    pub fn label(self) -> &'static str {
        match self {
            ScoredMethod::PlugIn => "plug-in",
            ScoredMethod::SecondOrder => "second-order",
            ScoredMethod::HedgesG => "hedges-g",
            ScoredMethod::SafeBc => "safe-bc",
        }
    }

    pub fn for_kind(kind: EffectSizeKind) -> Vec<ScoredMethod> {
        match kind {
            EffectSizeKind::LnRoM | EffectSizeKind::LnCvr => {
                vec![ScoredMethod::PlugIn, ScoredMethod::SecondOrder, ScoredMethod::SafeBc]
            }
            EffectSizeKind::Smd => {
                vec![ScoredMethod::PlugIn, ScoredMethod::HedgesG, ScoredMethod::SafeBc]
            }
            _ => vec![ScoredMethod::PlugIn, ScoredMethod::SafeBc],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub kind: EffectSizeKind,
    pub population: Population,
    pub n_grid: Vec<u64>,
    pub replications: usize,
    pub methods: Vec<ScoredMethod>,
    pub config: SafeConfig,
    pub seed: u64,
}

impl Scenario {
    /// A moderate default population for `kind` on the default grid.
    pub fn default_for(kind: EffectSizeKind, seed: u64) -> Self {
        let population = match kind {
            EffectSizeKind::Reciprocal => Population::Normal { mu: 10.0, sigma: 2.0 },
            EffectSizeKind::LnRoM | EffectSizeKind::Smd => Population::TwoNormal {
                mu1: 10.0,
                sigma1: 2.0,
                mu2: 12.0,
                sigma2: 2.0,
            },
            EffectSizeKind::LnCvr => Population::TwoNormal {
                mu1: 10.0,
                sigma1: 2.0,
                mu2: 12.0,
                sigma2: 3.0,
            },
            EffectSizeKind::LnOR | EffectSizeKind::LnRR => Population::TwoBernoulli { p1: 0.3, p2: 0.5 },
            EffectSizeKind::Hwd => Population::Genotypes {
                probs: [0.3, 0.3, 0.4],
            },
        };
        Self {
            kind,
            population,
            n_grid: DEFAULT_GRID.to_vec(),
            replications: DEFAULT_REPLICATIONS,
            methods: ScoredMethod::for_kind(kind),
            config: SafeConfig::with_seed(seed),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications < 2 {
            return Err(Error::invalid("need at least 2 replications"));
        }
        if self.n_grid.iter().any(|n| *n < 2) {
            return Err(Error::invalid("every n in the grid must be at least 2"));
        }
        let ok = matches!(
            (self.kind, &self.population),
            (EffectSizeKind::Reciprocal, Population::Normal { .. })
                | (
                    EffectSizeKind::LnRoM | EffectSizeKind::Smd | EffectSizeKind::LnCvr,
                    Population::TwoNormal { .. }
                )
                | (EffectSizeKind::LnOR | EffectSizeKind::LnRR, Population::TwoBernoulli { .. })
                | (EffectSizeKind::Hwd, Population::Genotypes { .. })
        );
        if !ok {
            return Err(Error::invalid(format!(
                "population does not fit kind {}",
                self.kind
            )));
        }
        self.config.validate()?;
        self.true_effect().map(|_| ())
    }

    /// The estimand, computed from the population parameters.
    pub fn true_effect(&self) -> Result<f64> {
        let theta = match (self.kind, self.population) {
            (EffectSizeKind::Reciprocal, Population::Normal { mu, .. }) => 1.0 / mu,
            (EffectSizeKind::LnRoM, Population::TwoNormal { mu1, mu2, .. }) => (mu1 / mu2).ln(),
            (
                EffectSizeKind::Smd,
                Population::TwoNormal {
                    mu1,
                    sigma1,
                    mu2,
                    sigma2,
                },
            ) => (mu1 - mu2) / ((sigma1 * sigma1 + sigma2 * sigma2) / 2.0).sqrt(),
            (
                EffectSizeKind::LnCvr,
                Population::TwoNormal {
                    mu1,
                    sigma1,
                    mu2,
                    sigma2,
                },
            ) => (sigma1 / mu1).ln() - (sigma2 / mu2).ln(),
            (EffectSizeKind::LnOR, Population::TwoBernoulli { p1, p2 }) => {
                (p1 * (1.0 - p2) / (p2 * (1.0 - p1))).ln()
            }
            (EffectSizeKind::LnRR, Population::TwoBernoulli { p1, p2 }) => (p1 / p2).ln(),
            (EffectSizeKind::Hwd, Population::Genotypes { probs: [q1, q2, q3] }) => {
                (q2 / (2.0 * (q1 * q3).sqrt())).ln()
            }
            _ => return Err(Error::invalid("population does not fit kind")),
        };
        if theta.is_finite() {
            Ok(theta)
        } else {
            Err(Error::invalid("true effect is undefined for this population"))
        }
    }
}

/// Point and SE from one method on one replication; `None` when it failed.
pub type Estimate = Option<(f64, f64)>;

/// All method estimates for one grid cell, one entry per replication.
#[derive(Debug, Clone, PartialEq)]
pub struct CellOutcome {
    pub n: u64,
    pub truth: f64,
    pub methods: Vec<ScoredMethod>,
    /// `estimates[rep][method]`.
    pub estimates: Vec<Vec<Estimate>>,
    /// Replications whose raw data stayed degenerate after regeneration.
    pub degenerate: usize,
}

impl CellOutcome {
    pub fn column(&self, method: ScoredMethod) -> Vec<Estimate> {
        let j = self
            .methods
            .iter()
            .position(|m| *m == method)
            .expect("method not scored in this cell");
        self.estimates.iter().map(|r| r[j]).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreRow {
    pub method: &'static str,
    pub n: u64,
    pub mean_bias: f64,
    pub rmse: f64,
    pub mean_se: f64,
    pub emp_sd: f64,
    /// `mean_se / emp_sd`.
    pub calibration: f64,
    pub reps: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreTable {
    pub kind: EffectSizeKind,
    pub truth: f64,
    pub rows: Vec<ScoreRow>,
}

impl ScoreTable {
    pub fn get(&self, method: ScoredMethod, n: u64) -> Option<&ScoreRow> {
        self.rows
            .iter()
            .find(|r| r.method == method.label() && r.n == n)
    }
}

fn replication_stream(n: u64, rep: usize) -> u64 {
    (n << 32) | rep as u64
}

fn normal_group(mu: f64, sigma: f64, n: u64, rng: &mut RngStream) -> Result<Option<GroupSummary>> {
    for _ in 0..MAX_REGENERATE {
        let xs = normal_sample(mu, sigma, n as usize, rng)?;
        if let Ok(g) = GroupSummary::from_sample(&xs) {
            return Ok(Some(g));
        }
    }
    Ok(None)
}

/// Raw data for one replication, reduced to summaries.
fn generate(scenario: &Scenario, n: u64, rng: &mut RngStream) -> Result<Option<EffectInputs>> {
    let inputs = match scenario.population {
        Population::Normal { mu, sigma } => {
            normal_group(mu, sigma, n, rng)?.map(EffectInputs::Reciprocal)
        }
        Population::TwoNormal {
            mu1,
            sigma1,
            mu2,
            sigma2,
        } => {
            let g1 = normal_group(mu1, sigma1, n, rng)?;
            let g2 = normal_group(mu2, sigma2, n, rng)?;
            match (g1, g2) {
                (Some(g1), Some(g2)) => Some(EffectInputs::two_groups(
                    scenario.kind,
                    g1,
                    g2,
                    Design::Independent,
                )?),
                _ => None,
            }
        }
        Population::TwoBernoulli { p1, p2 } => {
            let a = binomial_sample(n, p1, 1, rng)?[0];
            let c = binomial_sample(n, p2, 1, rng)?[0];
            let t = ContingencyTable::from_totals(a, n, c, n)?;
            Some(match scenario.kind {
                EffectSizeKind::LnOR => EffectInputs::LnOR(t),
                _ => EffectInputs::LnRR(t),
            })
        }
        Population::Genotypes { probs } => {
            let m = multinomial_sample(n, &probs, 1, rng)?;
            let r = m.row(0);
            Some(EffectInputs::Hwd(GenotypeCounts::new(r[0], r[1], r[2])?))
        }
    };
    Ok(inputs)
}

fn closed_form_point(inputs: &EffectInputs, method: ScoredMethod, config: &SafeConfig) -> Estimate {
    let order = match method {
        ScoredMethod::SecondOrder => Order::Second,
        _ => Order::First,
    };
    let r = match inputs {
        EffectInputs::Reciprocal(g) => reciprocal_estimate(g).ok()?,
        EffectInputs::LnRoM { g1, g2, design } => lnrom_estimate(g1, g2, order, *design).ok()?,
        EffectInputs::LnCvr { g1, g2, design } => lncvr_estimate(g1, g2, order, *design).ok()?,
        EffectInputs::Smd { g1, g2, .. } => {
            let est = match method {
                ScoredMethod::HedgesG => SmdEstimator::HedgesG,
                _ => SmdEstimator::CohenD,
            };
            smd_estimate(g1, g2, est).ok()?.0
        }
        EffectInputs::LnOR(t) => lnor_estimate(t, config.cc),
        EffectInputs::LnRR(t) => lnrr_estimate(t, config.cc),
        EffectInputs::Hwd(g) => hwd_estimate(g, config.cc),
    };
    (r.point.is_finite() && r.se.is_finite()).then_some((r.point, r.se))
}

fn score_methods(inputs: &EffectInputs, scenario: &Scenario, stream: u64) -> Vec<Estimate> {
    scenario
        .methods
        .iter()
        .map(|m| match m {
            ScoredMethod::SafeBc => {
                let cfg = SafeConfig {
                    seed: scenario.config.seed,
                    stream,
                    keep_replicates: false,
                    ..scenario.config
                };
                safe_estimate(inputs, &cfg).ok().map(|r| (r.theta_bc, r.se_safe))
            }
            other => closed_form_point(inputs, *other, &scenario.config),
        })
        .collect()
}

/// Runs every replication for one sample size.
pub fn simulate_cell(scenario: &Scenario, n: u64) -> Result<CellOutcome> {
    scenario.validate()?;
    let truth = scenario.true_effect()?;
    let per_rep: Vec<Result<Option<Vec<Estimate>>>> = (0..scenario.replications)
        .into_par_iter()
        .map(|rep| {
            let stream = replication_stream(n, rep);
            let mut rng = RngStream::new(scenario.seed, stream);
            Ok(generate(scenario, n, &mut rng)?.map(|inputs| score_methods(&inputs, scenario, stream)))
        })
        .collect();
    let mut estimates = Vec::with_capacity(per_rep.len());
    let mut degenerate = 0;
    for r in per_rep {
        match r? {
            Some(e) => estimates.push(e),
            None => degenerate += 1,
        }
    }
    Ok(CellOutcome {
        n,
        truth,
        methods: scenario.methods.clone(),
        estimates,
        degenerate,
    })
}

fn score(cell: &CellOutcome, method: ScoredMethod) -> ScoreRow {
    let ok: Vec<(f64, f64)> = cell.column(method).into_iter().flatten().collect();
    let k = ok.len() as f64;
    let mean_point = ok.iter().map(|e| e.0).sum::<f64>() / k;
    let mean_bias = mean_point - cell.truth;
    let rmse = (ok.iter().map(|e| (e.0 - cell.truth).powi(2)).sum::<f64>() / k).sqrt();
    let mean_se = ok.iter().map(|e| e.1).sum::<f64>() / k;
    let emp_sd = (ok.iter().map(|e| (e.0 - mean_point).powi(2)).sum::<f64>() / (k - 1.0)).sqrt();
    ScoreRow {
        method: method.label(),
        n: cell.n,
        mean_bias,
        rmse,
        mean_se,
        emp_sd,
        calibration: mean_se / emp_sd,
        reps: ok.len(),
        failures: cell.estimates.len() - ok.len() + cell.degenerate,
    }
}

/// Scores each method on each grid cell against the true effect.
pub fn simulate_scenario(scenario: &Scenario) -> Result<ScoreTable> {
    let truth = scenario.true_effect()?;
    let mut rows = Vec::new();
    for &n in &scenario.n_grid {
        let cell = simulate_cell(scenario, n)?;
        rows.extend(scenario.methods.iter().map(|m| score(&cell, *m)));
    }
    Ok(ScoreTable {
        kind: scenario.kind,
        truth,
        rows,
    })
}

/// CSV with a leading `#` line describing the scenario.
pub fn write_scores<W: Write>(mut out: W, scenario: &Scenario, table: &ScoreTable) -> Result<()> {
    let io = |source| Error::Io {
        path: "<scores>".into(),
        source,
    };
    let grid: Vec<String> = scenario.n_grid.iter().map(u64::to_string).collect();
    writeln!(
        out,
        "# kind={} truth={} population={} grid={} R={} B={} seed={} (default grid is a stand-in, not a published design)",
        scenario.kind,
        table.truth,
        serde_json::to_string(&scenario.population).unwrap_or_default(),
        grid.join(";"),
        scenario.replications,
        scenario.config.replicates,
        scenario.seed
    )
    .map_err(io)?;
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |source| Error::Csv {
        path: "<scores>".into(),
        source,
    };
    for row in &table.rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kind: EffectSizeKind) -> Scenario {
        Scenario {
            n_grid: vec![10],
            replications: 40,
            config: SafeConfig::with_seed(5).replicates(1000),
            ..Scenario::default_for(kind, 5)
        }
    }

    #[test]
    fn true_effects() {
        let s = Scenario::default_for(EffectSizeKind::LnRoM, 0);
        assert!((s.true_effect().unwrap() - (10.0f64 / 12.0).ln()).abs() < 1e-15);
        let s = Scenario::default_for(EffectSizeKind::Smd, 0);
        assert!((s.true_effect().unwrap() + 1.0).abs() < 1e-15);
        let s = Scenario {
            population: Population::Genotypes {
                probs: [0.25, 0.5, 0.25],
            },
            ..Scenario::default_for(EffectSizeKind::Hwd, 0)
        };
        assert!(s.true_effect().unwrap().abs() < 1e-15);
    }

    #[test]
    fn mismatched_population_rejected() {
        let s = Scenario {
            population: Population::TwoBernoulli { p1: 0.2, p2: 0.3 },
            ..Scenario::default_for(EffectSizeKind::Smd, 0)
        };
        assert!(s.validate().is_err());
    }

    #[test]
    fn table_shape_and_invariants() {
        for kind in EffectSizeKind::ALL {
            let s = small(kind);
            let t = simulate_scenario(&s).unwrap();
            assert_eq!(t.rows.len(), s.methods.len());
            for r in &t.rows {
                assert!(r.rmse >= r.mean_bias.abs(), "{kind} {r:?}");
                assert!(r.mean_bias.is_finite() && r.calibration.is_finite(), "{kind} {r:?}");
                assert_eq!(r.reps + r.failures, 40);
            }
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let s = small(EffectSizeKind::LnCvr);
        assert_eq!(simulate_scenario(&s).unwrap(), simulate_scenario(&s).unwrap());
    }

    #[test]
    fn csv_output_has_metadata_line() {
        let s = small(EffectSizeKind::LnRR);
        let t = simulate_scenario(&s).unwrap();
        let mut buf = Vec::new();
        write_scores(&mut buf, &s, &t).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("# kind=lnrr"));
        assert_eq!(
            lines.next().unwrap(),
            "method,n,mean_bias,rmse,mean_se,emp_sd,calibration,reps,failures"
        );
        assert_eq!(lines.count(), 2);
    }
}
