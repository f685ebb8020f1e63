use std::path::PathBuf;

use safe_bootstrap::batch::{
    read_table, read_table_from, result_columns, run_batch, write_histograms, write_table,
    write_table_to, BatchOptions, ResultRow, Table, WriteOptions,
};
use safe_bootstrap::{EffectSizeKind, Error, SafeConfig};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn lnrom_table() -> Table {
    read_table(&data("lnrom_sample.csv"), EffectSizeKind::LnRoM, None, b',').unwrap()
}

fn config() -> SafeConfig {
    SafeConfig::with_seed(11).replicates(5_000)
}

fn run(table: &Table, threads: usize) -> Vec<ResultRow> {
    let options = BatchOptions {
        compare: true,
        threads: Some(threads),
        ..BatchOptions::default()
    };
    run_batch(table, &config(), &options).unwrap()
}

#[test]
fn worker_count_does_not_change_results() {
    let table = lnrom_table();
    let one = run(&table, 1);
    for n in [2, 4] {
        assert_eq!(one, run(&table, n));
    }
}

#[test]
fn rows_keyed_by_id_are_independent_of_order() {
    let table = lnrom_table();
    let mut reversed = table.clone();
    reversed.rows.reverse();
    for (i, row) in reversed.rows.iter_mut().enumerate() {
        row.row = i + 1;
    }
    let forward = run(&table, 1);
    let backward = run(&reversed, 1);
    for r in &forward {
        let twin = backward.iter().find(|b| b.id == r.id).unwrap();
        assert_eq!(r.safe, twin.safe, "row {}", r.label());
    }
}

#[test]
fn output_echoes_input_then_result_columns() {
    let table = lnrom_table();
    let rows = run(&table, 1);
    let mut buf = Vec::new();
    let options = WriteOptions {
        compare: true,
        ..WriteOptions::default()
    };
    write_table_to(&mut buf, &table.headers, &rows, options).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let mut expected: Vec<&str> = table.headers.iter().map(String::as_str).collect();
    expected.extend(result_columns(true));
    assert_eq!(header, expected);
    assert_eq!(lines.count(), table.rows.len());
}

#[test]
fn written_table_reads_back_with_the_same_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.tsv");
    let table = read_table(&data("lnrr_sample.csv"), EffectSizeKind::LnRR, None, b',').unwrap();
    let rows = run(&table, 1);
    write_table(&out, &table.headers, &rows, WriteOptions {
        delimiter: b'\t',
        ..WriteOptions::default()
    })
    .unwrap();
    let back = read_table(&out, EffectSizeKind::LnRR, None, b'\t').unwrap();
    assert_eq!(back.rows.len(), table.rows.len());
    for (a, b) in table.rows.iter().zip(&back.rows) {
        assert_eq!(a.values, b.values);
        assert_eq!(a.id, b.id);
    }
    // Full-precision output: the SAFE column parses back to the exact value.
    let mut rdr = csv::ReaderBuilder::new().delimiter(b'\t').from_path(&out).unwrap();
    let col = rdr.headers().unwrap().iter().position(|h| h == "yi_safe").unwrap();
    for (rec, r) in rdr.records().zip(&rows) {
        let y: f64 = rec.unwrap()[col].parse().unwrap();
        assert_eq!(y, r.safe.as_ref().unwrap().theta_bc);
    }
}

#[test]
fn missing_column_is_named() {
    let csv = "id,m1i,sd1i,n1i,m2i,n2i\n1,2,1,10,3,10\n";
    let err = read_table_from(csv.as_bytes(), EffectSizeKind::LnRoM, None, b',').unwrap_err();
    assert!(matches!(&err, Error::MissingColumn(c) if c == "sd2i"), "{err}");
    assert!(err.to_string().contains("sd2i"));
}

#[test]
fn header_only_input_gives_no_rows() {
    let csv = "ai,bi,ci,di\n";
    let table = read_table_from(csv.as_bytes(), EffectSizeKind::LnOR, None, b',').unwrap();
    assert!(table.rows.is_empty());
    assert!(run(&table, 1).is_empty());
}

#[test]
fn bad_rows_soft_fail_unless_strict() {
    // Second row has a negative mean, which lnRoM cannot take.
    let csv = "m1i,sd1i,n1i,m2i,sd2i,n2i\n2,1,10,3,1,10\n-2,1,10,3,1,10\n";
    let table = read_table_from(csv.as_bytes(), EffectSizeKind::LnRoM, None, b',').unwrap();
    let rows = run(&table, 1);
    assert!(rows[0].safe.is_some() && rows[0].error.is_none());
    assert!(rows[1].safe.is_none() && rows[1].error.is_some());

    let strict = BatchOptions {
        strict: true,
        ..BatchOptions::default()
    };
    let err = run_batch(&table, &config(), &strict).unwrap_err();
    assert!(matches!(err, Error::Row { row: 2, .. }), "{err}");
}

#[test]
fn histogram_counts_every_valid_replicate() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("hist.csv");
    let table = lnrom_table();
    let options = BatchOptions {
        histogram_bins: Some(20),
        threads: Some(1),
        ..BatchOptions::default()
    };
    let rows = run_batch(&table, &config(), &options).unwrap();
    write_histograms(&path, &rows, b',').unwrap();

    let mut rdr = csv::Reader::from_path(&path).unwrap();
    assert_eq!(rdr.headers().unwrap(), vec!["row_id", "bin_left", "bin_right", "count"]);
    let records: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(records.len(), 20 * rows.len());
    for r in &rows {
        let total: usize = records
            .iter()
            .filter(|rec| rec[0] == r.label())
            .map(|rec| rec[3].parse::<usize>().unwrap())
            .sum();
        assert_eq!(total, r.safe.as_ref().unwrap().valid);
    }
}
