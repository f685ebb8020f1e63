//! Row-wise SAFE over a delimited dataset.
//!
//! Each row owns an RNG stream derived from its id (or its position when the table has
//! no id column), so results do not depend on worker count or scheduling.

use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::closed_form::{
    hwd_estimate, lncvr_estimate, lnor_estimate, lnrom_estimate, lnrr_estimate,
    reciprocal_estimate, smd_estimate, Order, SmdEstimator,
};
use crate::engine::{safe_estimate, BootstrapResult, SafeConfig};
use crate::error::{Error, Result, Warning};
use crate::summary::{ContingencyTable, Design, GenotypeCounts, GroupSummary};
use crate::transforms::{EffectInputs, EffectSizeKind};

/// Column names bound to the quantities a kind needs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Columns {
    Single {
        mean: String,
        sd: String,
        n: String,
    },
    TwoGroups {
        m1: String,
        sd1: String,
        n1: String,
        m2: String,
        sd2: String,
        n2: String,
        r: Option<String>,
    },
    /// Four cells `a, b, c, d`.
    Cells {
        a: String,
        b: String,
        c: String,
        d: String,
    },
    /// Events and group totals `a, n1, c, n2`.
    Totals {
        a: String,
        n1: String,
        c: String,
        n2: String,
    },
    Genotypes {
        aa: String,
        het: String,
        bb: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSchema {
    pub kind: EffectSizeKind,
    pub columns: Columns,
    pub id: Option<String>,
}

const ID_CANDIDATES: [&str; 3] = ["id", "study", "study_id"];

fn s(v: &str) -> String {
    v.to_string()
}

impl DatasetSchema {
    /// Default bindings for `kind` using conventional column names
    /// (`m1i, sd1i, n1i, …`, `ai, bi, ci, di`, `nAA, nAa, naa`, `mi, sdi, ni`).
    pub fn default_for(kind: EffectSizeKind) -> Self {
        let columns = match kind {
            EffectSizeKind::Reciprocal => Columns::Single {
                mean: s("mi"),
                sd: s("sdi"),
                n: s("ni"),
            },
            EffectSizeKind::LnRoM | EffectSizeKind::Smd | EffectSizeKind::LnCvr => {
                Columns::TwoGroups {
                    m1: s("m1i"),
                    sd1: s("sd1i"),
                    n1: s("n1i"),
                    m2: s("m2i"),
                    sd2: s("sd2i"),
                    n2: s("n2i"),
                    r: None,
                }
            }
            EffectSizeKind::LnOR | EffectSizeKind::LnRR => Columns::Cells {
                a: s("ai"),
                b: s("bi"),
                c: s("ci"),
                d: s("di"),
            },
            EffectSizeKind::Hwd => Columns::Genotypes {
                aa: s("nAA"),
                het: s("nAa"),
                bb: s("naa"),
            },
        };
        Self {
            kind,
            columns,
            id: None,
        }
    }

    /// Default bindings adjusted to a header: picks up `ri` and an id column when
    /// present, and binary tables given as `ai, n1i, ci, n2i`.
    pub fn infer(kind: EffectSizeKind, headers: &[String]) -> Self {
        let has = |name: &str| headers.iter().any(|h| h == name);
        let mut schema = Self::default_for(kind);
        match &mut schema.columns {
            Columns::TwoGroups { r, .. } if has("ri") => *r = Some(s("ri")),
            Columns::Cells { .. } if !(has("bi") && has("di")) && has("n1i") && has("n2i") => {
                schema.columns = Columns::Totals {
                    a: s("ai"),
                    n1: s("n1i"),
                    c: s("ci"),
                    n2: s("n2i"),
                };
            }
            _ => {}
        }
        schema.id = ID_CANDIDATES.iter().find(|c| has(c)).map(|c| s(c));
        schema
    }

    fn bound_names(&self) -> Vec<&str> {
        match &self.columns {
            Columns::Single { mean, sd, n } => vec![mean.as_str(), sd, n],
            Columns::TwoGroups {
                m1,
                sd1,
                n1,
                m2,
                sd2,
                n2,
                r,
            } => {
                let mut v = vec![m1.as_str(), sd1, n1, m2, sd2, n2];
                v.extend(r.as_deref());
                v
            }
            Columns::Cells { a, b, c, d } => vec![a.as_str(), b, c, d],
            Columns::Totals { a, n1, c, n2 } => vec![a.as_str(), n1, c, n2],
            Columns::Genotypes { aa, het, bb } => vec![aa.as_str(), het, bb],
        }
    }
}

/// Parsed numbers for one row, in the schema's binding order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum RowValues {
    Single {
        mean: f64,
        sd: f64,
        n: u64,
    },
    TwoGroups {
        m1: f64,
        sd1: f64,
        n1: u64,
        m2: f64,
        sd2: f64,
        n2: u64,
        r: Option<f64>,
    },
    Table {
        a: u64,
        b: u64,
        c: u64,
        d: u64,
    },
    Genotypes {
        aa: u64,
        het: u64,
        bb: u64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataRow {
    /// 1-based position among data rows.
    pub row: usize,
    pub id: Option<String>,
    /// Raw cells, echoed to the output unchanged.
    pub fields: Vec<String>,
    pub values: RowValues,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub schema: DatasetSchema,
    pub headers: Vec<String>,
    pub rows: Vec<DataRow>,
}

fn is_missing(v: &str) -> bool {
    v.is_empty() || v.eq_ignore_ascii_case("na") || v.eq_ignore_ascii_case("nan")
}

fn parse_real(row: usize, column: &str, v: &str) -> Result<f64> {
    v.parse::<f64>().map_err(|_| Error::Parse {
        row,
        column: column.to_string(),
        value: v.to_string(),
    })
}

fn parse_count(row: usize, column: &str, v: &str) -> Result<u64> {
    let x = parse_real(row, column, v)?;
    if x >= 0.0 && x.fract() == 0.0 && x < 2f64.powi(53) {
        Ok(x as u64)
    } else {
        Err(Error::Parse {
            row,
            column: column.to_string(),
            value: v.to_string(),
        })
    }
}

fn parse_values<'f>(
    schema: &DatasetSchema,
    row: usize,
    get: &dyn Fn(&str) -> &'f str,
) -> Result<RowValues> {
    let real = |c: &str| parse_real(row, c, get(c));
    let count = |c: &str| parse_count(row, c, get(c));
    Ok(match &schema.columns {
        Columns::Single { mean, sd, n } => RowValues::Single {
            mean: real(mean)?,
            sd: real(sd)?,
            n: count(n)?,
        },
        Columns::TwoGroups {
            m1,
            sd1,
            n1,
            m2,
            sd2,
            n2,
            r,
        } => RowValues::TwoGroups {
            m1: real(m1)?,
            sd1: real(sd1)?,
            n1: count(n1)?,
            m2: real(m2)?,
            sd2: real(sd2)?,
            n2: count(n2)?,
            r: match r {
                Some(c) if !is_missing(get(c)) => Some(real(c)?),
                _ => None,
            },
        },
        Columns::Cells { a, b, c, d } => RowValues::Table {
            a: count(a)?,
            b: count(b)?,
            c: count(c)?,
            d: count(d)?,
        },
        Columns::Totals { a, n1, c, n2 } => {
            let (a_v, n1_v, c_v, n2_v) = (count(a)?, count(n1)?, count(c)?, count(n2)?);
            if a_v > n1_v || c_v > n2_v {
                return Err(Error::Row {
                    row,
                    source: Box::new(Error::invalid(format!(
                        "events exceed totals ({a}={a_v}, {n1}={n1_v}, {c}={c_v}, {n2}={n2_v})"
                    ))),
                });
            }
            RowValues::Table {
                a: a_v,
                b: n1_v - a_v,
                c: c_v,
                d: n2_v - c_v,
            }
        }
        Columns::Genotypes { aa, het, bb } => RowValues::Genotypes {
            aa: count(aa)?,
            het: count(het)?,
            bb: count(bb)?,
        },
    })
}

/// Reads a delimited table with a header row. `schema = None` infers bindings from
/// the header.
pub fn read_table_from<R: Read>(
    reader: R,
    kind: EffectSizeKind,
    schema: Option<DatasetSchema>,
    delimiter: u8,
) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let csv_err = |source| Error::Csv {
        path: "<input>".into(),
        source,
    };
    let headers: Vec<String> = rdr
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(str::to_string)
        .collect();
    let schema = schema.unwrap_or_else(|| DatasetSchema::infer(kind, &headers));
    let position = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let bound: Vec<(&str, usize)> = schema
        .bound_names()
        .into_iter()
        .map(|n| position(n).map(|i| (n, i)))
        .collect::<Result<_>>()?;
    let id_idx = schema.id.as_deref().map(position).transpose()?;

    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(csv_err)?;
        let fields: Vec<String> = record.iter().map(str::to_string).collect();
        let get = |name: &str| -> &str {
            bound
                .iter()
                .find(|(n, _)| *n == name)
                .and_then(|(_, idx)| fields.get(*idx))
                .map_or("", String::as_str)
        };
        let values = parse_values(&schema, row, &get)?;
        rows.push(DataRow {
            row,
            id: id_idx.and_then(|j| fields.get(j).cloned()),
            fields,
            values,
        });
    }
    Ok(Table {
        schema,
        headers,
        rows,
    })
}

pub fn read_table(
    path: &Path,
    kind: EffectSizeKind,
    schema: Option<DatasetSchema>,
    delimiter: u8,
) -> Result<Table> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_table_from(file, kind, schema, delimiter).map_err(|e| match e {
        Error::Csv { source, .. } => Error::Csv {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BatchOptions {
    /// Add closed-form reference columns.
    pub compare: bool,
    /// Abort on the first failing row instead of recording the error.
    pub strict: bool,
    /// Worker count; `None` uses all cores.
    pub threads: Option<usize>,
    /// Treat every two-group row as paired with this correlation.
    pub r_override: Option<f64>,
    /// Expansion order of the lnRoM/lnCVR reference columns.
    pub order: Order,
    /// Per-row histogram of θ* with this many bins.
    pub histogram_bins: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramBin {
    pub left: f64,
    pub right: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub row: usize,
    pub id: Option<String>,
    pub fields: Vec<String>,
    pub safe: Option<BootstrapResult>,
    /// Closed-form point and variance.
    pub reference: Option<(f64, f64)>,
    pub warnings: Vec<Warning>,
    pub error: Option<String>,
    pub histogram: Option<Vec<HistogramBin>>,
}

impl ResultRow {
    /// Id when the table has one, otherwise the row number.
    pub fn label(&self) -> String {
        self.id.clone().unwrap_or_else(|| self.row.to_string())
    }
}

/// 64-bit FNV-1a; stable across platforms and releases.
fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ *b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// RNG stream for a row: hashed id, or the row number.
pub fn row_stream(row: &DataRow) -> u64 {
    match &row.id {
        Some(id) => fnv1a(id.as_bytes()),
        None => row.row as u64,
    }
}

/// Builds the effect-size inputs for one row.
pub fn row_inputs(kind: EffectSizeKind, values: &RowValues, r_override: Option<f64>) -> Result<EffectInputs> {
    match (kind, values) {
        (EffectSizeKind::Reciprocal, RowValues::Single { mean, sd, n }) => {
            Ok(EffectInputs::Reciprocal(GroupSummary::new(*mean, *sd, *n)?))
        }
        (
            EffectSizeKind::LnRoM | EffectSizeKind::Smd | EffectSizeKind::LnCvr,
            RowValues::TwoGroups {
                m1,
                sd1,
                n1,
                m2,
                sd2,
                n2,
                r,
            },
        ) => {
            let design = match r_override.or(*r) {
                Some(r) => Design::paired(r)?,
                None => Design::Independent,
            };
            EffectInputs::two_groups(
                kind,
                GroupSummary::new(*m1, *sd1, *n1)?,
                GroupSummary::new(*m2, *sd2, *n2)?,
                design,
            )
        }
        (EffectSizeKind::LnOR, RowValues::Table { a, b, c, d }) => {
            Ok(EffectInputs::LnOR(ContingencyTable::new(*a, *b, *c, *d)?))
        }
        (EffectSizeKind::LnRR, RowValues::Table { a, b, c, d }) => {
            Ok(EffectInputs::LnRR(ContingencyTable::new(*a, *b, *c, *d)?))
        }
        (EffectSizeKind::Hwd, RowValues::Genotypes { aa, het, bb }) => {
            Ok(EffectInputs::Hwd(GenotypeCounts::new(*aa, *het, *bb)?))
        }
        (kind, _) => Err(Error::invalid(format!("row values do not fit kind {kind}"))),
    }
}

/// Closed-form reference for the batch comparison columns: Hedges' g for SMD (none for
/// paired SMD), the chosen order for lnRoM/lnCVR, first order otherwise.
pub fn reference_estimate(inputs: &EffectInputs, config: &SafeConfig, order: Order) -> Option<(f64, f64)> {
    let r = match inputs {
        EffectInputs::Reciprocal(g) => reciprocal_estimate(g).ok()?,
        EffectInputs::LnRoM { g1, g2, design } => lnrom_estimate(g1, g2, order, *design).ok()?,
        EffectInputs::Smd { g1, g2, design } => {
            if design.is_paired() {
                return None;
            }
            smd_estimate(g1, g2, SmdEstimator::HedgesG).ok()?.0
        }
        EffectInputs::LnOR(t) => lnor_estimate(t, config.cc),
        EffectInputs::LnRR(t) => lnrr_estimate(t, config.cc),
        EffectInputs::LnCvr { g1, g2, design } => lncvr_estimate(g1, g2, order, *design).ok()?,
        EffectInputs::Hwd(g) => hwd_estimate(g, config.cc),
    };
    Some((r.point, r.variance))
}

/// Equal-width bins spanning the replicate range.
pub fn histogram(values: &[f64], bins: usize) -> Vec<HistogramBin> {
    if values.is_empty() || bins == 0 {
        return Vec::new();
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut counts = vec![0usize; bins];
    for v in values {
        let k = (((v - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(k, count)| HistogramBin {
            left: lo + k as f64 * width,
            right: if k + 1 == bins { hi.max(lo + width) } else { lo + (k + 1) as f64 * width },
            count,
        })
        .collect()
}

fn run_row(table: &Table, row: &DataRow, config: &SafeConfig, options: &BatchOptions) -> Result<ResultRow> {
    let mut out = ResultRow {
        row: row.row,
        id: row.id.clone(),
        fields: row.fields.clone(),
        safe: None,
        reference: None,
        warnings: Vec::new(),
        error: None,
        histogram: None,
    };
    let inputs = row_inputs(table.schema.kind, &row.values, options.r_override)?;
    if options.compare {
        out.reference = reference_estimate(&inputs, config, options.order);
    }
    let cfg = SafeConfig {
        stream: row_stream(row),
        keep_replicates: options.histogram_bins.is_some(),
        ..*config
    };
    let mut r = safe_estimate(&inputs, &cfg)?;
    if let (Some(bins), Some(values)) = (options.histogram_bins, r.replicates.take()) {
        out.histogram = Some(histogram(&values, bins));
    }
    out.warnings = r.warnings.clone();
    out.safe = Some(r);
    Ok(out)
}

/// Runs SAFE on every row. Failing rows carry their error message unless `strict`.
pub fn run_batch(table: &Table, config: &SafeConfig, options: &BatchOptions) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let work = || -> Vec<(ResultRow, Option<Error>)> {
        table
            .rows
            .par_iter()
            .map(|row| match run_row(table, row, config, options) {
                Ok(r) => (r, None),
                Err(e) => {
                    let mut r = ResultRow {
                        row: row.row,
                        id: row.id.clone(),
                        fields: row.fields.clone(),
                        safe: None,
                        reference: None,
                        warnings: Vec::new(),
                        error: Some(e.to_string()),
                        histogram: None,
                    };
                    if options.compare {
                        r.reference = row_inputs(table.schema.kind, &row.values, options.r_override)
                            .ok()
                            .and_then(|i| reference_estimate(&i, config, options.order));
                    }
                    (r, Some(e))
                }
            })
            .collect()
    };
    let results = match options.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::invalid(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };
    let mut rows = Vec::with_capacity(results.len());
    for (r, err) in results {
        if let (true, Some(e)) = (options.strict, err) {
            return Err(Error::Row {
                row: r.row,
                source: Box::new(e),
            });
        }
        rows.push(r);
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WriteOptions {
    pub delimiter: u8,
    /// Decimal places for computed columns; full precision when `None`.
    pub round: Option<usize>,
    pub compare: bool,
}

impl Default for WriteOptions {
    fn default() -> Self {
        Self {
            delimiter: b',',
            round: None,
            compare: false,
        }
    }
}

fn fmt_num(v: f64, round: Option<usize>) -> String {
    match round {
        Some(k) => format!("{v:.k$}"),
        None => v.to_string(),
    }
}

/// Output column names after the echoed input columns.
pub fn result_columns(compare: bool) -> Vec<&'static str> {
    let mut cols = vec!["yi_safe", "vi_safe", "se_safe", "bias", "valid"];
    if compare {
        cols.extend(["yi_ref", "vi_ref"]);
    }
    cols.extend(["cc_applied", "warnings", "error"]);
    cols
}

pub fn write_table_to<W: Write>(
    writer: W,
    headers: &[String],
    rows: &[ResultRow],
    options: WriteOptions,
) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .delimiter(options.delimiter)
        .from_writer(writer);
    let csv_err = |source| Error::Csv {
        path: "<output>".into(),
        source,
    };
    let mut header: Vec<&str> = headers.iter().map(String::as_str).collect();
    header.extend(result_columns(options.compare));
    w.write_record(&header).map_err(csv_err)?;
    let num = |v: f64| fmt_num(v, options.round);
    for r in rows {
        let mut rec = r.fields.clone();
        match &r.safe {
            Some(s) => rec.extend([
                num(s.theta_bc),
                num(s.var_safe),
                num(s.se_safe),
                num(s.bias),
                s.valid.to_string(),
            ]),
            None => rec.extend(std::iter::repeat_n(String::new(), 5)),
        }
        if options.compare {
            match r.reference {
                Some((y, v)) => rec.extend([num(y), num(v)]),
                None => rec.extend([String::new(), String::new()]),
            }
        }
        rec.push(r.safe.as_ref().map_or(String::new(), |s| s.cc_applied.to_string()));
        rec.push(r.warnings.iter().map(|w| w.code()).collect::<Vec<_>>().join(";"));
        rec.push(r.error.clone().unwrap_or_default());
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: "<output>".into(),
        source,
    })
}

fn with_path(path: &Path, e: Error) -> Error {
    match e {
        Error::Csv { source, .. } => Error::Csv {
            path: path.to_path_buf(),
            source,
        },
        Error::Io { source, .. } => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    }
}

fn create(path: &Path) -> Result<std::fs::File> {
    std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_table(path: &Path, headers: &[String], rows: &[ResultRow], options: WriteOptions) -> Result<()> {
    write_table_to(create(path)?, headers, rows, options).map_err(|e| with_path(path, e))
}

/// One line per bin: `row_id, bin_left, bin_right, count`.
pub fn write_histograms_to<W: Write>(writer: W, rows: &[ResultRow], delimiter: u8) -> Result<()> {
    let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(writer);
    let csv_err = |source| Error::Csv {
        path: "<histogram>".into(),
        source,
    };
    w.write_record(["row_id", "bin_left", "bin_right", "count"])
        .map_err(csv_err)?;
    for r in rows {
        for b in r.histogram.iter().flatten() {
            w.write_record([r.label(), b.left.to_string(), b.right.to_string(), b.count.to_string()])
                .map_err(csv_err)?;
        }
    }
    w.flush().map_err(|source| Error::Io {
        path: "<histogram>".into(),
        source,
    })
}

pub fn write_histograms(path: &Path, rows: &[ResultRow], delimiter: u8) -> Result<()> {
    write_histograms_to(create(path)?, rows, delimiter).map_err(|e| with_path(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const LNROM: &str = "m1i,sd1i,n1i,m2i,sd2i,n2i\n2.2,0.4111,10,1.33,0.1897,10\n";

    fn read(text: &str, kind: EffectSizeKind) -> Result<Table> {
        read_table_from(text.as_bytes(), kind, None, b',')
    }

    #[test]
    fn reads_one_row() {
        let t = read(LNROM, EffectSizeKind::LnRoM).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.rows[0].row, 1);
        assert!(matches!(t.rows[0].values, RowValues::TwoGroups { n1: 10, r: None, .. }));
    }

    #[test]
    fn missing_column_named() {
        let err = read("m1i,sd1i,n1i,m2i,n2i\n1,1,2,1,2\n", EffectSizeKind::LnRoM).unwrap_err();
        assert_eq!(err.to_string(), "column sd2i not found");
    }

    #[test]
    fn parse_error_has_location() {
        let err = read("m1i,sd1i,n1i,m2i,sd2i,n2i\n1,1,2,1,x,2\n", EffectSizeKind::LnRoM).unwrap_err();
        match err {
            Error::Parse { row, column, value } => {
                assert_eq!((row, column.as_str(), value.as_str()), (1, "sd2i", "x"));
            }
            other => panic!("{other:?}"),
        }
        assert!(read("m1i,sd1i,n1i,m2i,sd2i,n2i\n1,1,2.5,1,1,2\n", EffectSizeKind::LnRoM).is_err());
    }

    #[test]
    fn binary_totals_inferred() {
        let t = read("study,ai,n1i,ci,n2i\nX,10,155600,18,79250\n", EffectSizeKind::LnRR).unwrap();
        assert_eq!(t.schema.id.as_deref(), Some("study"));
        assert_eq!(
            t.rows[0].values,
            RowValues::Table {
                a: 10,
                b: 155_590,
                c: 18,
                d: 79_232
            }
        );
    }

    #[test]
    fn r_column_makes_rows_paired() {
        let t = read(
            "m1i,sd1i,n1i,m2i,sd2i,n2i,ri\n15,2,25,10,2,25,0.5\n15,2,25,10,2,25,NA\n",
            EffectSizeKind::LnCvr,
        )
        .unwrap();
        let a = row_inputs(t.schema.kind, &t.rows[0].values, None).unwrap();
        let b = row_inputs(t.schema.kind, &t.rows[1].values, None).unwrap();
        assert_eq!(a.design().r(), 0.5);
        assert!(!b.design().is_paired());
    }

    #[test]
    fn empty_input_empty_output() {
        let t = read("m1i,sd1i,n1i,m2i,sd2i,n2i\n", EffectSizeKind::LnRoM).unwrap();
        let out = run_batch(&t, &SafeConfig::default().replicates(1000), &BatchOptions::default()).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn soft_and_strict_failures() {
        let text = "m1i,sd1i,n1i,m2i,sd2i,n2i\n2.2,0.4111,10,1.33,0.1897,10\n-1,1,10,1,1,10\n";
        let t = read(text, EffectSizeKind::LnRoM).unwrap();
        let cfg = SafeConfig::default().replicates(1000);
        let rows = run_batch(&t, &cfg, &BatchOptions::default()).unwrap();
        assert!(rows[0].error.is_none());
        assert!(rows[1].error.as_deref().unwrap().contains("mean 1"));
        let strict = BatchOptions {
            strict: true,
            ..BatchOptions::default()
        };
        assert!(matches!(run_batch(&t, &cfg, &strict), Err(Error::Row { row: 2, .. })));
    }

    #[test]
    fn histogram_counts_everything() {
        let v: Vec<f64> = (0..1000).map(|i| (i as f64).sqrt()).collect();
        let h = histogram(&v, 7);
        assert_eq!(h.len(), 7);
        assert_eq!(h.iter().map(|b| b.count).sum::<usize>(), 1000);
        assert_eq!(h[0].left, 0.0);
        assert!((h[6].right - 999f64.sqrt()).abs() < 1e-12);
        let flat = histogram(&[2.0, 2.0], 3);
        assert_eq!(flat.iter().map(|b| b.count).sum::<usize>(), 2);
    }

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a(b""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(fnv1a(b"a"), 0xaf63_dc4c_8601_ec8c);
    }

    #[test]
    fn writes_stable_columns() {
        let t = read(LNROM, EffectSizeKind::LnRoM).unwrap();
        let opts = BatchOptions {
            compare: true,
            ..BatchOptions::default()
        };
        let rows = run_batch(&t, &SafeConfig::default().replicates(1000), &opts).unwrap();
        let mut buf = Vec::new();
        write_table_to(
            &mut buf,
            &t.headers,
            &rows,
            WriteOptions {
                round: Some(4),
                compare: true,
                ..WriteOptions::default()
            },
        )
        .unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "m1i,sd1i,n1i,m2i,sd2i,n2i,yi_safe,vi_safe,se_safe,bias,valid,yi_ref,vi_ref,cc_applied,warnings,error"
        );
        let data = lines.next().unwrap();
        assert!(data.starts_with("2.2,0.4111,10,1.33,0.1897,10,"));
        assert!(data.contains(",0.5033,0.0055,"));
    }
}
