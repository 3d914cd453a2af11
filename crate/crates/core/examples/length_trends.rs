// How TTR, VOCD and MTLD move with text length, one work per length.

use std::error::Error;

use vocabprobe::corpus::Corpus;
use vocabprobe::harness::{self, Chunking, Metric};
use vocabprobe::metrics::{MtldConfig, VocdConfig};
use vocabprobe::synth::{synth_corpus, SynthSpec};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let lengths = [1_000, 2_000, 5_000, 10_000, 20_000];
    let works = lengths
        .iter()
        .enumerate()
        .flat_map(|(i, &n)| synth_corpus(&SynthSpec::zipf(10_000, n, 1, 100 + i as u64)).documents)
        .enumerate()
        .map(|(i, mut d)| {
            d.id = format!("work-{i}");
            d
        })
        .collect();
    let corpus = Corpus::new("zipf", works);

    let report = harness::run_length_trend_study(
        &[corpus],
        &[Metric::Ttr, Metric::Vocd, Metric::Mtld],
        Chunking::PerWork,
        &MtldConfig::default(),
        &VocdConfig::default(),
    )?;
    for (metric, entry) in report.statistics["fits"]["zipf"].as_object().unwrap() {
        let fit = &entry["fit"];
        println!(
            "{metric:<5} slope {:+.3e}  intercept {:.4}  r2 {:.3}  mean {:.4}",
            fit["slope"].as_f64().unwrap(),
            fit["intercept"].as_f64().unwrap(),
            fit["r_squared"].as_f64().unwrap(),
            entry["mean"].as_f64().unwrap(),
        );
    }
    println!("skipped: {}", report.skipped.len());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
