//! Shared fixtures for the benchmark targets.

use gridbp::{Activation, NetworkSpec};

/// Four-record logic task: targets are the exclusive-or and the and of the
/// two inputs.
pub fn logic_records() -> Vec<(Vec<f64>, Vec<f64>)> {
    vec![
        (vec![0.0, 0.0], vec![0.0, 0.0]),
        (vec![0.0, 1.0], vec![1.0, 0.0]),
        (vec![1.0, 0.0], vec![1.0, 0.0]),
        (vec![1.0, 1.0], vec![0.0, 1.0]),
    ]
}

pub fn logic_spec() -> NetworkSpec {
    NetworkSpec::uniform(vec![2, 2, 2, 2], Activation::Tanh, 0.1, 1).unwrap()
}

/// A wide synthetic regression problem shaped like the fuel-economy run:
/// 9 inputs, two hidden layers, 64 records.
pub fn wide_records() -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut rng = gridbp::rng::SplitMix64::new(7);
    (0..64)
        .map(|_| {
            let inp: Vec<f64> = (0..9).map(|_| 2.0 * rng.rand01() - 1.0).collect();
            let targ = vec![inp.iter().sum::<f64>() / 3.0];
            (inp, targ)
        })
        .collect()
}

pub fn wide_spec() -> NetworkSpec {
    NetworkSpec {
        topology: vec![9, 50, 30, 1],
        activations: vec![Activation::Relu, Activation::Relu, Activation::Identity],
        etas: vec![0.001; 3],
        seed: 1,
        sampling: gridbp::Sampling::Sequential,
        init: gridbp::WeightInit::Symmetric,
    }
}
