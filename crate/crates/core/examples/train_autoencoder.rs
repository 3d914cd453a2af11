// Train one autoencoder probe, then save its checkpoint and loss curve.

use std::error::Error;

use vocabprobe::nn::{self, TrainConfig};
use vocabprobe::probe::{self, ProbeSpec};
use vocabprobe::synth::{synth_corpus, SynthSpec};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let corpus = synth_corpus(&SynthSpec::zipf(200, 4_000, 10, 1));
    let config = TrainConfig {
        epochs: 20,
        ..TrainConfig::default()
    };

    for spec in [ProbeSpec::basic(16), ProbeSpec::squeezed(16, 0.25)] {
        let result = probe::run_probe(&corpus, &spec, &config)?;
        println!(
            "{} width {} squeeze {:?}: accuracy {:.4}, final loss {:.4}",
            spec.setup,
            spec.hidden_width,
            spec.squeeze_width(),
            result.accuracy,
            result.training.final_loss()
        );
    }

    let prepared = probe::PreparedCorpus::new(&corpus)?;
    let mut network = probe::build_autoencoder(prepared.vocab_size, &ProbeSpec::basic(8), 0)?;
    let examples = prepared.training_examples(None, 0);
    let result = nn::train(&mut network, &examples, &config)?;

    let dir = std::env::temp_dir().join("vocabprobe-example");
    std::fs::create_dir_all(&dir)?;
    nn::save_checkpoint(&network, &dir.join("probe.json"))?;
    let restored = nn::load_checkpoint(&dir.join("probe.json")).map_err(|e| e as Box<dyn Error>)?;
    assert_eq!(restored.forward_one_hot(0)?, network.forward_one_hot(0)?);
    nn::write_loss_curve(&result, std::fs::File::create(dir.join("loss.csv"))?)?;
    println!("checkpoint and loss curve in {}", dir.display());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
