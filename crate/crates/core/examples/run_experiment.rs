// Config-driven experiment: write a corpus, describe the run in JSON, emit reports.

use std::error::Error;

use vocabprobe::harness::{self, ExperimentConfig};
use vocabprobe::synth::{self, synth_corpus, SynthSpec};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let dir = std::env::temp_dir().join("vocabprobe-experiment");
    std::fs::create_dir_all(&dir)?;
    let corpus_path = dir.join("base.jsonl");
    synth::write_jsonl_file(&synth_corpus(&SynthSpec::zipf(3_000, 10_000, 500, 2)), &corpus_path)?;

    let config: ExperimentConfig = serde_json::from_value(serde_json::json!({
        "experiment": "dqi-duplication",
        "corpora": [{ "path": corpus_path, "format": "jsonl", "label": "base" }],
        "output_dir": dir.join("reports"),
        "k_values": [1, 10, 100, 500],
        "total": 500,
        "seed": 4,
    }))?;
    let report = harness::run_experiment(&config)?;
    for path in harness::emit_report(&report, &config.output_dir, &config.formats)? {
        println!("{}", path.display());
    }

    // the snapshot alone reproduces the rows
    let again: ExperimentConfig = serde_json::from_value(report.config.clone())?;
    assert_eq!(harness::run_experiment(&again)?.rows, report.rows);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
