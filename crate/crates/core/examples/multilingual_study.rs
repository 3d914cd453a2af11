// Probe accuracy per work across "languages", with correlation to text
// length and pairwise Welch tests.

use std::error::Error;

use vocabprobe::corpus::Corpus;
use vocabprobe::harness;
use vocabprobe::nn::TrainConfig;
use vocabprobe::stats::TTestVariant;
use vocabprobe::synth::{synth_corpus, SynthSpec};

fn language(name: &str, works: usize, seed: u64) -> Corpus {
    let docs = (0..works)
        .map(|i| {
            let tokens = 300 + 150 * (i % 4);
            let mut doc = synth_corpus(&SynthSpec::zipf(400, tokens, 1, seed * 100 + i as u64)).documents.remove(0);
            doc.id = format!("{name}-{i:02}");
            doc
        })
        .collect();
    Corpus::new(name, docs)
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let languages = [language("aa", 8, 1), language("bb", 8, 2), language("cc", 5, 3)];
    let config = TrainConfig {
        epochs: 10,
        ..TrainConfig::default()
    };
    let report = harness::run_multilingual_study(&languages, 6, 8, &config, &[0], TTestVariant::Welch, 0)?;
    println!("{} works probed", report.rows.len());
    println!("pearson: {}", report.statistics["pearson_accuracy_vs_length"]);
    for test in report.statistics["pairwise_tests"].as_array().unwrap() {
        println!("{} vs {}: p = {}", test["a"], test["b"], test["result"]["p_value"]);
    }
    println!("undersampled: {}", report.statistics["undersampled"]);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
