// Tokenize raw text, build a frequency-ranked vocabulary and encode to ids.

use std::error::Error;

use vocabprobe::corpus::{self, Corpus, TokenizerSpec};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let spec = TokenizerSpec::default();
    println!("{:?}", corpus::tokenize("Hello, World! Hello again.", &spec));

    let texts = ["the cat sat", "the dog sat down", "a cat, a dog"];
    let c = Corpus::from_texts("pets", &texts, &spec);
    let vocab = corpus::build_vocabulary(&c)?;
    for (i, token) in vocab.tokens().iter().enumerate() {
        println!("{:>3}  {token:<6} x{}", i + 1, vocab.frequency(token));
    }

    let encoded = corpus::encode(&c, &vocab)?;
    for (doc, ids) in c.documents.iter().zip(&encoded.documents) {
        let back = vocab.decode(ids).expect("ids come from this vocabulary");
        assert_eq!(back, doc.tokens);
        println!("{:<18} -> {ids:?}", doc.raw_text);
    }

    // a stricter tokenizer that keeps case and only strips commas
    let cased = TokenizerSpec::new(false, ",", ' ')?;
    println!("{:?}", corpus::tokenize("Keep-Case, please", &cased));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
