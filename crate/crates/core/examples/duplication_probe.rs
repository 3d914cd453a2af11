// Reconstruction accuracy as the number of distinct rows grows.

use std::error::Error;

use vocabprobe::harness;
use vocabprobe::nn::TrainConfig;
use vocabprobe::synth::{synth_corpus, SynthSpec};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let base = synth_corpus(&SynthSpec::zipf(5_000, 2_000, 200, 5));
    let config = TrainConfig {
        epochs: 30,
        ..TrainConfig::default()
    };
    let report = harness::run_dup_probe(&base, &[1, 2, 10, 100], 1000, &[2, 4], &config, &[0], 0)?;
    println!("{}", report.columns.join("\t"));
    for row in &report.rows {
        let cells: Vec<String> = row.iter().map(harness::csv_cell).collect();
        println!("{}", cells.join("\t"));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
