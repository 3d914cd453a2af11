// DQI 1 over 1000-row samples built from k distinct rows.

use std::error::Error;

use vocabprobe::harness::{self, ReportFormat};
use vocabprobe::metrics::DqiConfig;
use vocabprobe::synth::{synth_corpus, SynthSpec};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    // 1000 rows of about 20 tokens each
    let base = synth_corpus(&SynthSpec::zipf(5_000, 20_000, 1_000, 7));
    let k_values = [1, 2, 5, 10, 50, 100, 500, 1000];
    let report = harness::run_dqi_duplication_curve(&base, &k_values, 1000, &DqiConfig::default(), 0)?;

    let k = report.column("k").unwrap();
    let total = report.column("dqi1_total").unwrap();
    for row in &report.rows {
        println!("k={:<5} dqi1={}", row[k], row[total]);
    }

    if let Some(dir) = std::env::args().nth(1) {
        let paths = harness::emit_report(&report, dir.as_ref(), &[ReportFormat::Csv, ReportFormat::Json])?;
        println!("wrote {paths:?}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
