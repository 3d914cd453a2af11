// Backpropagation against central finite differences on random small networks.

use std::error::Error;

use rand::Rng;
use vocabprobe::nn::{self, Activation, Input, Network};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let mut rng = nn::init_rng(3);
    for trial in 0..5 {
        let v = rng.random_range(2..=8);
        let w = rng.random_range(1..=8);
        let net = Network::glorot(&[v, w, v], &[Activation::Relu, Activation::Softmax], &mut rng)?;
        let input: Vec<f64> = (0..v).map(|_| rng.random_range(-1.0..1.0)).collect();
        let target = rng.random_range(0..v);
        let err = nn::numerical_gradient_check(&net, Input::Dense(&input), target, 1e-6)?;
        println!("trial {trial}: {v}-{w}-{v}  max relative error {err:.2e}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
