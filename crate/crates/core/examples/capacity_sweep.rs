// Minimal hidden width needed to reconstruct a small versus a large vocabulary.

use std::error::Error;

use vocabprobe::nn::TrainConfig;
use vocabprobe::probe::{self, ProbeSpec};
use vocabprobe::synth::{synth_corpus, SynthSpec};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let epochs = std::env::args().nth(1).map_or(Ok(20), |s| s.parse())?;
    let config = TrainConfig {
        epochs,
        ..TrainConfig::default()
    };
    let widths = [1, 2, 4, 8];
    for vocab in [50, 500] {
        let corpus = synth_corpus(&SynthSpec::uniform(vocab, 20_000, 20, 9));
        let profile = probe::width_sweep(&corpus, &widths, &ProbeSpec::basic(1), &config, &[0, 1])?;
        let curve: Vec<String> = profile
            .width_accuracy
            .iter()
            .map(|(w, a)| format!("{w}:{a:.3}"))
            .collect();
        println!("V={vocab:<4} {}  minimal width {:?}", curve.join(" "), profile.minimal_width);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
