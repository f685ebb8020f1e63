//! Observed summary statistics that feed the sampling models and closed forms.

use serde::Serialize;

use crate::error::{Error, Result};

/// One group's mean, standard deviation and sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroupSummary {
    mean: f64,
    sd: f64,
    n: u64,
}

impl GroupSummary {
    pub fn new(mean: f64, sd: f64, n: u64) -> Result<Self> {
        if !mean.is_finite() {
            return Err(Error::Domain {
                quantity: "mean",
                requirement: "finite",
                value: mean,
            });
        }
        if !(sd > 0.0) || !sd.is_finite() {
            return Err(Error::Domain {
                quantity: "sd",
                requirement: "positive and finite",
                value: sd,
            });
        }
        if n < 2 {
            return Err(Error::Domain {
                quantity: "n",
                requirement: "at least 2",
                value: n as f64,
            });
        }
        Ok(Self { mean, sd, n })
    }

    /// Reduces raw observations to (mean, sample SD with divisor n-1, n).
    pub fn from_sample(xs: &[f64]) -> Result<Self> {
        let n = xs.len();
        if n < 2 {
            return Err(Error::Domain {
                quantity: "n",
                requirement: "at least 2",
                value: n as f64,
            });
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let ss = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
        Self::new(mean, (ss / (n - 1) as f64).sqrt(), n as u64)
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn sd(&self) -> f64 {
        self.sd
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn nf(&self) -> f64 {
        self.n as f64
    }

    pub fn variance(&self) -> f64 {
        self.sd * self.sd
    }

    /// Standard error of the mean, `s/√n`.
    pub fn se_mean(&self) -> f64 {
        self.sd / self.nf().sqrt()
    }

    /// `s²/(n·x̄²)`, the squared relative standard error of the mean.
    pub(crate) fn rel_var_mean(&self) -> f64 {
        self.variance() / (self.nf() * self.mean * self.mean)
    }
}

/// Within-pair correlation for a matched design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairedDesign {
    r: f64,
}

impl PairedDesign {
    pub fn new(r: f64) -> Result<Self> {
        if !(r.abs() < 1.0) {
            return Err(Error::Domain {
                quantity: "r",
                requirement: "inside (-1, 1)",
                value: r,
            });
        }
        Ok(Self { r })
    }

    pub fn r(&self) -> f64 {
        self.r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
#[serde(tag = "design", rename_all = "snake_case")]
pub enum Design {
    #[default]
    Independent,
    Paired(PairedDesign),
}

impl Design {
    pub fn paired(r: f64) -> Result<Self> {
        PairedDesign::new(r).map(Design::Paired)
    }

    /// Correlation between the groups; zero for independent designs.
    pub fn r(&self) -> f64 {
        match self {
            Design::Independent => 0.0,
            Design::Paired(p) => p.r(),
        }
    }

    pub fn is_paired(&self) -> bool {
        matches!(self, Design::Paired(_))
    }

    /// Paired designs need a shared sample size.
    pub(crate) fn check_groups(&self, g1: &GroupSummary, g2: &GroupSummary) -> Result<()> {
        if self.is_paired() && g1.n() != g2.n() {
            return Err(Error::DesignMismatch(format!(
                "paired design needs n1 = n2, got {} and {}",
                g1.n(),
                g2.n()
            )));
        }
        Ok(())
    }
}

/// 2×2 table: group 1 has `a` events and `b` non-events, group 2 `c` and `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ContingencyTable {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl ContingencyTable {
    pub fn new(a: u64, b: u64, c: u64, d: u64) -> Result<Self> {
        if a + b == 0 || c + d == 0 {
            return Err(Error::Domain {
                quantity: "group total",
                requirement: "at least 1",
                value: 0.0,
            });
        }
        Ok(Self { a, b, c, d })
    }

    /// From events and group totals, as batch files usually report them.
    pub fn from_totals(a: u64, n1: u64, c: u64, n2: u64) -> Result<Self> {
        if a > n1 || c > n2 {
            return Err(Error::invalid(format!(
                "events exceed totals: a={a}, n1={n1}, c={c}, n2={n2}"
            )));
        }
        Self::new(a, n1 - a, c, n2 - c)
    }

    pub fn n1(&self) -> u64 {
        self.a + self.b
    }

    pub fn n2(&self) -> u64 {
        self.c + self.d
    }

    pub fn p1(&self) -> f64 {
        self.a as f64 / self.n1() as f64
    }

    pub fn p2(&self) -> f64 {
        self.c as f64 / self.n2() as f64
    }

    pub fn has_zero_cell(&self) -> bool {
        [self.a, self.b, self.c, self.d].contains(&0)
    }

    /// Row swap: group 2 becomes group 1.
    pub fn swapped(&self) -> Self {
        Self {
            a: self.c,
            b: self.d,
            c: self.a,
            d: self.b,
        }
    }
}

/// Genotype counts at a bi-allelic locus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GenotypeCounts {
    pub n_aa_major: u64,
    pub n_het: u64,
    pub n_aa_minor: u64,
}

impl GenotypeCounts {
    /// Counts in the order (AA, Aa, aa).
    pub fn new(n_aa_major: u64, n_het: u64, n_aa_minor: u64) -> Result<Self> {
        if n_aa_major + n_het + n_aa_minor == 0 {
            return Err(Error::Domain {
                quantity: "genotype total",
                requirement: "at least 1",
                value: 0.0,
            });
        }
        Ok(Self {
            n_aa_major,
            n_het,
            n_aa_minor,
        })
    }

    pub fn n(&self) -> u64 {
        self.n_aa_major + self.n_het + self.n_aa_minor
    }

    pub fn counts(&self) -> [u64; 3] {
        [self.n_aa_major, self.n_het, self.n_aa_minor]
    }

    pub fn proportions(&self) -> [f64; 3] {
        let n = self.n() as f64;
        self.counts().map(|c| c as f64 / n)
    }

    /// Frequency of allele A, `p₁ + p₂/2`.
    pub fn allele_frequency(&self) -> f64 {
        let [p1, p2, _] = self.proportions();
        p1 + p2 / 2.0
    }

    pub fn has_zero(&self) -> bool {
        self.counts().contains(&0)
    }

    /// Relabel A ↔ a.
    pub fn swapped(&self) -> Self {
        Self {
            n_aa_major: self.n_aa_minor,
            n_het: self.n_het,
            n_aa_minor: self.n_aa_major,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_reduction() {
        let g = GroupSummary::from_sample(&[11.3, 9.7, 10.4, 12.0, 9.1]).unwrap();
        assert!((g.mean() - 10.5).abs() < 1e-12);
        assert!((g.variance() - 1.375).abs() < 1e-12);
        assert_eq!(g.n(), 5);
    }

    #[test]
    fn group_invariants() {
        assert!(GroupSummary::new(1.0, 0.0, 5).is_err());
        assert!(GroupSummary::new(1.0, 1.0, 1).is_err());
        assert!(GroupSummary::new(f64::NAN, 1.0, 5).is_err());
    }

    #[test]
    fn paired_bounds() {
        assert!(PairedDesign::new(1.0).is_err());
        assert!(PairedDesign::new(-0.99).is_ok());
    }

    #[test]
    fn table_derivations() {
        let t = ContingencyTable::from_totals(2, 22, 10, 22).unwrap();
        assert_eq!(t, ContingencyTable::new(2, 20, 10, 12).unwrap());
        assert_eq!((t.n1(), t.n2()), (22, 22));
        assert!(ContingencyTable::new(0, 0, 1, 1).is_err());
        assert!(ContingencyTable::from_totals(5, 4, 1, 1).is_err());
    }

    #[test]
    fn genotype_proportions_sum_to_one() {
        let g = GenotypeCounts::new(40, 25, 50).unwrap();
        assert_eq!(g.counts().iter().sum::<u64>(), g.n());
        assert!((g.proportions().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((g.allele_frequency() - 52.5 / 115.0).abs() < 1e-15);
    }
}
