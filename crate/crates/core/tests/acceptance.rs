// Acceptance checks, one line per criterion. Runs with its own main so the report is
// printed even when every check passes.

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use safe_bootstrap::batch::{read_table, run_batch, BatchOptions, ResultRow};
use safe_bootstrap::closed_form::{
    hedges_j, hwd_estimate, lncvr_estimate, lnor_estimate, lnrom_estimate, lnrr_estimate,
    reciprocal_estimate, smd_estimate,
};
use safe_bootstrap::validation::{simulate_cell, simulate_scenario, Population, Scenario, ScoredMethod};
use safe_bootstrap::{
    safe_estimate, CcPolicy, ContingencyTable, Design, EffectInputs,
    EffectSizeKind, GenotypeCounts, GroupSummary, Order, RngStream, SafeConfig, SmdEstimator,
};

/// Collects failures for one criterion.
#[derive(Default)]
struct Check {
    failures: Vec<String>,
    checked: usize,
}

impl Check {
    fn expect(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn near(&mut self, label: &str, got: f64, want: f64, tol: f64) {
        self.expect((got - want).abs() <= tol, || {
            format!("{label}: got {got:.6}, want {want} ± {tol}")
        });
    }
}

fn g(mean: f64, sd: f64, n: u64) -> GroupSummary {
    GroupSummary::new(mean, sd, n).unwrap()
}

fn paired(r: f64) -> Design {
    Design::paired(r).unwrap()
}

// Half a unit in the fourth decimal, with room for binary representation.
const FOUR_DP: f64 = 5e-5 + 1e-12;

fn closed_form_goldens(c: &mut Check) {
    let (a, b) = (g(13.4, 4.6, 18), g(16.1, 3.9, 17));
    let r = lnrom_estimate(&a, &b, Order::First, Design::Independent).unwrap();
    c.near("lnRoM first point", r.point, -0.1836, FOUR_DP);
    c.near("lnRoM first SE", r.se, 0.1000, FOUR_DP);
    let r = lnrom_estimate(&a, &b, Order::Second, Design::Independent).unwrap();
    c.near("lnRoM second point", r.point, -0.1820, FOUR_DP);
    c.near("lnRoM second SE", r.se, 0.1001, FOUR_DP);

    let (d, _) = smd_estimate(&a, &b, SmdEstimator::CohenD).unwrap();
    c.near("d", d.point, -0.6316, FOUR_DP);
    c.near("d SE", d.se, 0.3470, FOUR_DP);
    let (hg, _) = smd_estimate(&a, &b, SmdEstimator::HedgesG).unwrap();
    c.near("g", hg.point, -0.6171, FOUR_DP);
    c.near("g SE", hg.se, 0.3391, FOUR_DP);

    let t = ContingencyTable::new(2, 20, 10, 12).unwrap();
    let cc = CcPolicy::default();
    let r = lnor_estimate(&t, cc);
    c.near("lnOR", r.point, -2.1203, FOUR_DP);
    c.near("lnOR SE", r.se, 0.8563, FOUR_DP);
    let r = lnrr_estimate(&t, cc);
    c.near("lnRR", r.point, -1.6094, FOUR_DP);
    c.near("lnRR SE", r.se, 0.7135, FOUR_DP);

    let (a, b) = (g(17.0, 2.0, 23), g(12.0, 3.0, 27));
    let r = lncvr_estimate(&a, &b, Order::First, Design::Independent).unwrap();
    c.near("lnCVR first", r.point, -0.7538, FOUR_DP);
    c.near("lnCVR first SE", r.se, 0.2118, FOUR_DP);
    let r = lncvr_estimate(&a, &b, Order::Second, Design::Independent).unwrap();
    c.near("lnCVR second", r.point, -0.7494, FOUR_DP);
    c.near("lnCVR second SE", r.se, 0.2160, FOUR_DP);
    let (a, b) = (g(15.0, 2.0, 25), g(10.0, 2.0, 25));
    let r = lncvr_estimate(&a, &b, Order::First, paired(0.5)).unwrap();
    c.near("lnCVR paired first", r.point, -0.4055, FOUR_DP);
    c.near("lnCVR paired first SE", r.se, 0.1803, FOUR_DP);
    let r = lncvr_estimate(&a, &b, Order::Second, paired(0.5)).unwrap();
    c.near("lnCVR paired second", r.point, -0.4050, FOUR_DP);
    c.near("lnCVR paired second SE", r.se, 0.1853, FOUR_DP);

    let r = hwd_estimate(&GenotypeCounts::new(40, 25, 50).unwrap(), cc);
    c.near("HWD", r.point, -1.2747, FOUR_DP);
    c.near("HWD SE", r.se, 0.2264, FOUR_DP);

    let raw = GroupSummary::from_sample(&[11.3, 9.7, 10.4, 12.0, 9.1]).unwrap();
    c.near("Rhat", reciprocal_estimate(&raw).unwrap().point, 0.0952, FOUR_DP);
}

fn golden_inputs() -> Vec<(&'static str, EffectInputs, f64, f64)> {
    let t = ContingencyTable::new(2, 20, 10, 12).unwrap();
    vec![
        (
            "reciprocal",
            EffectInputs::Reciprocal(GroupSummary::from_sample(&[11.3, 9.7, 10.4, 12.0, 9.1]).unwrap()),
            0.0950,
            0.0048,
        ),
        (
            "lnRoM",
            EffectInputs::LnRoM {
                g1: g(13.4, 4.6, 18),
                g2: g(16.1, 3.9, 17),
                design: Design::Independent,
            },
            -0.1820,
            0.1007,
        ),
        (
            "SMD",
            EffectInputs::Smd {
                g1: g(13.4, 4.6, 18),
                g2: g(16.1, 3.9, 17),
                design: Design::Independent,
            },
            -0.6156,
            0.3613,
        ),
        ("lnOR", EffectInputs::LnOR(t), -1.9515, 0.8714),
        ("lnRR", EffectInputs::LnRR(t), -1.4571, 0.7277),
        (
            "lnCVR",
            EffectInputs::LnCvr {
                g1: g(17.0, 2.0, 23),
                g2: g(12.0, 3.0, 27),
                design: Design::Independent,
            },
            -0.7479,
            0.2453,
        ),
        (
            "lnCVR paired",
            EffectInputs::LnCvr {
                g1: g(15.0, 2.0, 25),
                g2: g(10.0, 2.0, 25),
                design: paired(0.5),
            },
            -0.4052,
            0.2112,
        ),
        ("HWD", EffectInputs::Hwd(GenotypeCounts::new(40, 25, 50).unwrap()), -1.2654, 0.2319),
    ]
}

fn safe_goldens(c: &mut Check) -> String {
    let config = SafeConfig::with_seed(20_240_601).replicates(1_000_000);
    let mut slowest = 0.0f64;
    for (label, inputs, bc, se) in golden_inputs() {
        let start = Instant::now();
        let r = safe_estimate(&inputs, &config).unwrap();
        let secs = start.elapsed().as_secs_f64();
        slowest = slowest.max(secs);
        c.near(&format!("{label} SAFE BC"), r.theta_bc, bc, 0.005);
        c.near(&format!("{label} SAFE SE"), r.se_safe, se, 0.005);
        c.expect(secs < 1.0, || format!("{label} took {secs:.2}s"));
    }
    format!("slowest {slowest:.2}s")
}

const LNROM_TABLE: [(&str, f64, f64, f64, f64); 10] = [
    ("242", 0.5033, 0.0055, 0.5041, 0.0056),
    ("21", 0.5470, 0.0385, 0.5503, 0.0406),
    ("739", 0.1841, 0.0074, 0.1856, 0.0074),
    ("456", 0.3702, 0.0058, 0.3708, 0.0058),
    ("458", 0.0315, 0.0042, 0.0314, 0.0042),
    ("726", 0.4378, 0.0074, 0.4362, 0.0075),
    ("96", 0.1809, 0.0040, 0.1807, 0.0040),
    ("87", 0.1794, 0.0060, 0.1788, 0.0061),
    ("615", 0.2276, 0.0380, 0.2258, 0.0400),
    ("254", 0.4362, 0.0002, 0.4362, 0.0002),
];

const LNRR_TABLE: [(&str, f64, f64, f64, f64); 10] = [
    ("Azurin 1965-ii", -0.5369, 0.0301, -0.5410, 0.0308),
    ("Saroso 1978-i", -0.7332, 0.1082, -0.7316, 0.1186),
    ("PCC 1973a-iii", -0.9439, 0.0711, -0.9527, 0.0756),
    ("PCC 1973a-ii", -1.0153, 0.0756, -1.0233, 0.0806),
    ("Mosley 1970-i", -0.2031, 0.1078, -0.2286, 0.1205),
    ("Saroso 1978-ii", -1.2625, 0.1555, -1.2367, 0.1819),
    ("Oseasohn 1965", -1.3962, 0.1550, -1.3413, 0.1911),
    ("PCC 1968", -0.8084, 0.0429, -0.8116, 0.0443),
    ("PCC 1973a-iv", -1.2305, 0.0838, -1.2341, 0.0896),
    ("Azurin 1965-iii", -0.7651, 0.0333, -0.7679, 0.0342),
];

fn batch_tables(c: &mut Check) -> String {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let config = SafeConfig::with_seed(6).replicates(1_000_000);
    let start = Instant::now();
    for (file, kind, expected) in [
        ("lnrom_sample.csv", EffectSizeKind::LnRoM, &LNROM_TABLE),
        ("lnrr_sample.csv", EffectSizeKind::LnRR, &LNRR_TABLE),
    ] {
        let table = read_table(&data.join(file), kind, None, b',').unwrap();
        let run = |threads| {
            let opts = BatchOptions {
                compare: true,
                threads: Some(threads),
                ..BatchOptions::default()
            };
            run_batch(&table, &config, &opts).unwrap()
        };
        let one: Vec<ResultRow> = run(1);
        let eight = run(8);
        c.expect(one == eight, || format!("{file}: 1 and 8 workers differ"));
        c.expect(one.len() == 10, || format!("{file}: {} rows", one.len()));
        for (row, (id, yi, vi, yi_safe, vi_safe)) in one.iter().zip(expected.iter()) {
            c.expect(row.id.as_deref() == Some(*id), || format!("{file}: id {:?} vs {id}", row.id));
            let (y_ref, v_ref) = row.reference.expect("reference columns");
            c.near(&format!("{id} yi"), y_ref, *yi, FOUR_DP);
            c.near(&format!("{id} vi"), v_ref, *vi, FOUR_DP);
            let safe = row.safe.as_ref().expect("SAFE columns");
            c.near(&format!("{id} yi_SAFE"), safe.theta_bc, *yi_safe, 0.01);
            c.near(&format!("{id} vi_SAFE"), safe.var_safe, *vi_safe, 0.01);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    c.expect(secs < 30.0, || format!("batch took {secs:.1}s"));
    format!("{secs:.1}s including the 8-worker rerun")
}

/// Random but reproducible inputs for the property sweep.
struct Gen(RngStream);

impl Gen {
    fn unit(&mut self) -> f64 {
        use rand::Rng;
        self.0.random::<f64>()
    }

    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    fn count(&mut self, lo: u64, hi: u64) -> u64 {
        lo + (self.unit() * (hi - lo + 1) as f64) as u64
    }

    fn group(&mut self, n: Option<u64>) -> GroupSummary {
        let n = n.unwrap_or_else(|| self.count(2, 60));
        g(self.range(0.5, 50.0), self.range(0.1, 20.0), n)
    }
}

fn properties(c: &mut Check) -> String {
    let cc = CcPolicy::default();
    let mut gen = Gen(RngStream::new(77, 0));
    let cases = 500;
    for i in 0..cases {
        let (a, b) = (gen.group(None), gen.group(None));
        let ind = Design::Independent;

        for (label, fwd, rev) in [
            (
                "lnRoM",
                lnrom_estimate(&a, &b, Order::First, ind).unwrap(),
                lnrom_estimate(&b, &a, Order::First, ind).unwrap(),
            ),
            (
                "lnCVR",
                lncvr_estimate(&a, &b, Order::First, ind).unwrap(),
                lncvr_estimate(&b, &a, Order::First, ind).unwrap(),
            ),
            (
                "SMD",
                smd_estimate(&a, &b, SmdEstimator::CohenD).unwrap().0,
                smd_estimate(&b, &a, SmdEstimator::CohenD).unwrap().0,
            ),
        ] {
            c.expect((fwd.point + rev.point).abs() <= 1e-12, || format!("{label} swap point, case {i}"));
            c.expect((fwd.variance - rev.variance).abs() <= 1e-12 * fwd.variance, || {
                format!("{label} swap variance, case {i}")
            });
        }

        let t = ContingencyTable::new(
            gen.count(0, 80),
            gen.count(1, 80),
            gen.count(0, 80),
            gen.count(1, 80),
        )
        .unwrap();
        for (label, fwd, rev) in [
            ("lnOR", lnor_estimate(&t, cc), lnor_estimate(&t.swapped(), cc)),
            ("lnRR", lnrr_estimate(&t, cc), lnrr_estimate(&t.swapped(), cc)),
        ] {
            c.expect((fwd.point + rev.point).abs() <= 1e-12, || format!("{label} swap point {t:?}"));
            c.expect((fwd.variance - rev.variance).abs() <= 1e-12 * fwd.variance, || {
                format!("{label} swap variance {t:?}")
            });
        }

        let geno = GenotypeCounts::new(gen.count(0, 90), gen.count(0, 90), gen.count(0, 90)).unwrap();
        let (h, hs) = (hwd_estimate(&geno, cc), hwd_estimate(&geno.swapped(), cc));
        c.expect(h.point == hs.point && h.variance == hs.variance, || {
            format!("HWD swap invariance {geno:?}")
        });
        let k = gen.count(1, 60);
        let hwe = GenotypeCounts::new(k * k, 2 * k * k, k * k).unwrap();
        c.expect(hwd_estimate(&hwe, cc).point.abs() < 1e-12, || format!("HWE counts {hwe:?}"));

        let (_, det) = smd_estimate(&a, &b, SmdEstimator::HedgesG).unwrap();
        c.expect(det.g == det.j * det.d && det.j < 1.0 && det.j == hedges_j(det.df), || {
            format!("g = J·d, case {i}")
        });

        let o1 = lnrom_estimate(&a, &b, Order::First, ind).unwrap();
        let o2 = lnrom_estimate(&a, &b, Order::Second, ind).unwrap();
        c.expect(o2.variance >= o1.variance, || format!("order-2 variance, case {i}"));

        let n = gen.count(2, 60);
        let (pa, pb) = (gen.group(Some(n)), gen.group(Some(n)));
        let dep = lnrom_estimate(&pa, &pb, Order::First, paired(0.0)).unwrap();
        let indep = lnrom_estimate(&pa, &pb, Order::First, ind).unwrap();
        c.expect(dep.variance == indep.variance, || format!("lnRoM r=0, case {i}"));
        for order in [Order::First, Order::Second] {
            let dep = lncvr_estimate(&pa, &pb, order, paired(0.0)).unwrap();
            let indep = lncvr_estimate(&pa, &pb, order, ind).unwrap();
            c.expect((dep.variance - indep.variance).abs() <= 1e-12 * indep.variance, || {
                format!("lnCVR {order:?} r=0, case {i}")
            });
        }
    }

    // Reciprocal bias is non-negative on every seed; BC identity; bit-exact reruns.
    let rec = EffectInputs::Reciprocal(g(10.5, 1.1, 5));
    for seed in 0..50 {
        let cfg = SafeConfig::with_seed(seed).replicates(100_000);
        let r = safe_estimate(&rec, &cfg).unwrap();
        c.expect(r.bias >= 0.0, || format!("reciprocal bias {} at seed {seed}", r.bias));
        c.expect((r.theta_bc - (2.0 * r.theta_hat - r.mean_star)).abs() <= 1e-12, || {
            format!("BC identity at seed {seed}")
        });
        c.expect(r.bias == r.mean_star - r.theta_hat, || format!("bias identity at seed {seed}"));
    }
    for (label, inputs, _, _) in golden_inputs() {
        let cfg = SafeConfig::with_seed(9).replicates(20_000);
        let first = safe_estimate(&inputs, &cfg).unwrap();
        let second = safe_estimate(&inputs, &cfg).unwrap();
        c.expect(first == second, || format!("{label} not bit-identical on rerun"));
    }
    format!("{cases} random cases + 50 seeds")
}

fn asymptotic(c: &mut Check) {
    let config = SafeConfig::with_seed(31).replicates(1_000_000);
    let (a, b) = (g(13.4, 4.6, 10_000), g(16.1, 3.9, 10_000));
    let r = safe_estimate(
        &EffectInputs::LnRoM {
            g1: a,
            g2: b,
            design: Design::Independent,
        },
        &config,
    )
    .unwrap();
    let first = lnrom_estimate(&a, &b, Order::First, Design::Independent).unwrap();
    let second = lnrom_estimate(&a, &b, Order::Second, Design::Independent).unwrap();
    let rel = (r.se_safe - first.se).abs() / first.se;
    c.expect(rel < 0.02, || format!("lnRoM SE relative gap {rel:.4}"));
    c.near("lnRoM BC vs second-order point", r.theta_bc, second.point, 1e-4);

    let t = ContingencyTable::new(10_000, 20_000, 15_000, 12_000).unwrap();
    for (label, inputs, cf) in [
        ("lnOR", EffectInputs::LnOR(t), lnor_estimate(&t, config.cc)),
        ("lnRR", EffectInputs::LnRR(t), lnrr_estimate(&t, config.cc)),
    ] {
        let r = safe_estimate(&inputs, &config).unwrap();
        let rel = (r.se_safe - cf.se).abs() / cf.se;
        c.expect(rel < 0.02, || format!("{label} SE relative gap {rel:.4}"));
        c.near(&format!("{label} BC vs plug-in"), r.theta_bc, cf.point, 1e-4);
    }
}

/// Bootstrap over replications: can |bias(SAFE BC)| ≤ |bias(plug-in)| be rejected at
/// 95%? Returns the 5% quantile of |mean err BC| − |mean err plug-in|.
fn bias_comparison_lower_bound(bc: &[f64], plug: &[f64], seed: u64) -> f64 {
    use rand::Rng;
    let k = bc.len();
    let mut rng = RngStream::new(seed, 0);
    let mut stats: Vec<f64> = (0..2000)
        .map(|_| {
            let (mut sb, mut sp) = (0.0, 0.0);
            for _ in 0..k {
                let j = rng.random_range(0..k);
                sb += bc[j];
                sp += plug[j];
            }
            (sb / k as f64).abs() - (sp / k as f64).abs()
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    stats[(0.05 * stats.len() as f64) as usize]
}

fn simulation(c: &mut Check) -> String {
    let mut notes = Vec::new();
    for kind in [EffectSizeKind::LnRoM, EffectSizeKind::Smd] {
        let scenario = Scenario {
            population: Population::TwoNormal {
                mu1: 10.0,
                sigma1: 2.0,
                mu2: 12.0,
                sigma2: 2.0,
            },
            n_grid: vec![5, 10, 20, 50, 100],
            replications: 1000,
            config: SafeConfig::with_seed(2718).replicates(100_000),
            ..Scenario::default_for(kind, 2718)
        };
        let truth = scenario.true_effect().unwrap();
        let cell = simulate_cell(&scenario, 5).unwrap();
        let (bc, plug): (Vec<f64>, Vec<f64>) = cell
            .column(ScoredMethod::SafeBc)
            .into_iter()
            .zip(cell.column(ScoredMethod::PlugIn))
            .filter_map(|(b, p)| Some((b?.0 - truth, p?.0 - truth)))
            .unzip();
        let lower = bias_comparison_lower_bound(&bc, &plug, 5);
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        notes.push(format!(
            "{kind} n=5 bias BC {:+.4} vs plug-in {:+.4}",
            mean(&bc),
            mean(&plug)
        ));
        c.expect(lower <= 0.0, || {
            format!("{kind}: |bias BC| > |bias plug-in| at 95% (lower bound {lower:.5})")
        });

        let table = simulate_scenario(&Scenario {
            n_grid: vec![10, 20, 50, 100],
            ..scenario.clone()
        })
        .unwrap();
        for n in [10, 20, 50, 100] {
            let row = table.get(ScoredMethod::SafeBc, n).unwrap();
            c.expect((0.8..=1.3).contains(&row.calibration), || {
                format!("{kind} n={n}: SAFE SE calibration {:.3}", row.calibration)
            });
        }
    }
    notes.join("; ")
}

fn main() -> ExitCode {
    let criteria: [(&str, fn(&mut Check) -> String); 6] = [
        ("1 closed-form goldens to 4 dp", |c| {
            closed_form_goldens(c);
            String::new()
        }),
        ("2 SAFE goldens at B=1e6 within 0.005", safe_goldens),
        ("3 batch tables (ref 4 dp, SAFE 0.01, 1 vs 8 workers)", batch_tables),
        ("4 property suite", properties),
        ("5 asymptotic agreement at n=1e4", |c| {
            asymptotic(c);
            String::new()
        }),
        ("6 simulation study (bias at n=5, calibration n>=10)", simulation),
    ];
    let mut all_ok = true;
    for (name, run) in criteria {
        let mut check = Check::default();
        let start = Instant::now();
        let note = run(&mut check);
        let secs = start.elapsed().as_secs_f64();
        let ok = check.failures.is_empty();
        all_ok &= ok;
        let status = if ok { "PASS" } else { "FAIL" };
        let extra = if note.is_empty() { String::new() } else { format!("; {note}") };
        println!(
            "criterion {name}: {status} ({} checks, {secs:.1}s{extra})",
            check.checked
        );
        for f in &check.failures {
            println!("    {f}");
        }
    }
    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
