// Width by squeeze-ratio accuracy grid for a rich and a repetitive corpus,
// compared with a pooled t-test.

use std::error::Error;

use vocabprobe::harness;
use vocabprobe::nn::TrainConfig;
use vocabprobe::stats::TTestVariant;
use vocabprobe::synth::{synth_corpus, SynthSpec};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let rich = synth_corpus(&SynthSpec::uniform(1_000, 10_000, 20, 11));
    let repetitive = synth_corpus(&SynthSpec::uniform(50, 10_000, 20, 11));
    let config = TrainConfig {
        epochs: 3,
        ..TrainConfig::default()
    };
    let report = harness::run_century_squeeze_study(
        &rich,
        &repetitive,
        &[32, 64],
        &[0.5, 0.25, 0.125, 0.0625],
        &config,
        &[0],
        TTestVariant::Pooled,
    )?;
    for row in &report.rows {
        let marker = if row[4] == true { "*" } else { "" };
        println!("{:<22} w={:<3} r={:<7} acc={:.4}{marker}", row[0].as_str().unwrap(), row[1], row[2], row[3].as_f64().unwrap());
    }
    println!("{}", serde_json::to_string_pretty(&report.statistics["test"])?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
