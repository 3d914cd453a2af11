// TTR, MTLD, VOCD-D and DQI 1 on a small synthetic corpus.

use std::error::Error;

use vocabprobe::corpus::{Corpus, TokenizerSpec};
use vocabprobe::metrics::{self, DqiConfig, MtldConfig, VocdConfig};
use vocabprobe::synth::{synth_corpus, SynthSpec};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let corpus = synth_corpus(&SynthSpec::zipf(2_000, 5_000, 25, 42));
    let tokens: Vec<&str> = corpus.tokens().collect();

    let ttr = metrics::type_token_ratio(&tokens)?;
    let mtld = metrics::mtld(&tokens, &MtldConfig::default())?;
    let vocd = metrics::vocd(&tokens, &VocdConfig::default())?;
    println!("tokens {}  ttr {ttr:.4}  mtld {mtld:.2}", tokens.len());
    println!("vocd D {:.2} (runs {:?}, at boundary: {})", vocd.d, vocd.run_estimates, vocd.at_boundary);

    // one duplicated row; with a=1, b=10 every row length is in range
    let rows = Corpus::from_texts("three-rows", &["a b c", "a b c", "d e"], &TokenizerSpec::default());
    let dqi = metrics::dqi1(&rows, &DqiConfig { a: 1.0, b: 10.0 })?;
    println!(
        "dqi1 {:.4} = vocab {:.4} + length {:.4}  (sigma {:.4}, |S| {})",
        dqi.total, dqi.vocab_term, dqi.length_term, dqi.sigma, dqi.size_s
    );

    let summary = metrics::summarize(&corpus, &MtldConfig::default(), &VocdConfig::default(), &DqiConfig::default());
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
