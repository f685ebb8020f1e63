// Row-wise SAFE over a dataset, with closed-form reference columns and a
// histogram of each row's replicates.

use std::path::Path;

use safe_bootstrap::batch::{
    read_table, run_batch, write_histograms, write_table_to, BatchOptions, WriteOptions,
};
use safe_bootstrap::{EffectSizeKind, SafeConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let config = SafeConfig::with_seed(1);
    let options = BatchOptions {
        compare: true,
        histogram_bins: Some(20),
        ..BatchOptions::default()
    };
    let write = WriteOptions {
        round: Some(4),
        compare: true,
        ..WriteOptions::default()
    };

    for (file, kind) in [
        ("lnrom_sample.csv", EffectSizeKind::LnRoM),
        ("lnrr_sample.csv", EffectSizeKind::LnRR),
    ] {
        let table = read_table(&data.join(file), kind, None, b',')?;
        let rows = run_batch(&table, &config, &options)?;
        println!("{file}");
        write_table_to(std::io::stdout(), &table.headers, &rows, write)?;

        let hist = std::env::temp_dir().join(format!("safe_{kind}_histograms.csv"));
        write_histograms(&hist, &rows, b',')?;
        println!("histograms written to {}\n", hist.display());
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
