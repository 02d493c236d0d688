//! End-to-end analysis of a CSV file: report JSON plus flat plot tables.
//!
//! Usage: `csv_analysis [input.csv] [out_dir]`; without arguments a Hénon
//! sample is written to a temporary file first.
use std::path::PathBuf;

use scaledim::analysis::write_plot_tables;
use scaledim::io::write_csv;
use scaledim::{gen_henon, run_analyze, AnalysisConfig, CsvOptions, DataSource};

fn main() -> scaledim::Result<()> {
    let mut args = std::env::args().skip(1);
    let tmp = std::env::temp_dir().join("scaledim-csv-example");
    std::fs::create_dir_all(&tmp)?;
    let input = match args.next() {
        Some(p) => PathBuf::from(p),
        None => {
            let p = tmp.join("henon.csv");
            write_csv(&gen_henon(1000, 100, 0.003, 5)?, &p)?;
            p
        }
    };
    let out_dir = args.next().map(PathBuf::from).unwrap_or_else(|| tmp.join("tables"));

    let mut config = AnalysisConfig::new(DataSource::Csv { path: input, options: CsvOptions::default() });
    config.replicates = 200;
    let report = run_analyze(&config)?;

    for v in &report.profile.verdicts {
        println!("{:>7}  {:.4}  {}", v.label, v.standardized_scale, v.summary());
    }
    println!("smallest effective dimension: {:?} at {:?}", report.profile.min_effective_dimension, report.profile.min_effective_label);
    std::fs::write(out_dir.with_extension("json"), report.to_json()?)?;
    for path in write_plot_tables(&report, &out_dir)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
