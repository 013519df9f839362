//! Scratch: first pass at which each seed satisfies both SSE thresholds.

use gridbp::net::{Activation, NetworkSpec, WeightInit};
use gridbp::oracle;

fn main() {
    let records: Vec<(Vec<f64>, Vec<f64>)> = vec![
        (vec![0.0, 0.0], vec![0.0, 0.0]),
        (vec![0.0, 1.0], vec![1.0, 0.0]),
        (vec![1.0, 0.0], vec![1.0, 0.0]),
        (vec![1.0, 1.0], vec![0.0, 1.0]),
    ];

    for init in [WeightInit::Uniform01, WeightInit::Symmetric] {
        println!("== init {init:?} ==");
        for seed in 1..=10u64 {
            let mut spec = NetworkSpec::uniform(vec![2, 2, 2, 2], Activation::Tanh, 0.1, seed).unwrap();
            spec.init = init;
            let mut first_cross = None;
            let mut sse_at = vec![];
            oracle::simulate_vbp_with(&spec, &records, 6000, |state| {
                let mut s = [0.0f64; 2];
                for (inp, targ) in &records {
                    let trace = oracle::forward(&state.w_b, &spec.activations, inp).unwrap();
                    for t in 0..2 {
                        let e = targ[t] - trace.output()[t];
                        s[t] += e * e;
                    }
                }
                if first_cross.is_none() && s[0] < 0.005 && s[1] < 0.0013 {
                    first_cross = Some(state.passes);
                }
                if state.passes % 1000 == 0 {
                    sse_at.push((state.passes, s[0], s[1]));
                }
            })
            .unwrap();
            let cross = first_cross.map(|p| p.to_string()).unwrap_or_else(|| ">6000".into());
            print!("  seed {seed}: cross at {cross}; ");
            for (p, a, b) in &sse_at {
                print!("[{p}] {a:.5}/{b:.5} ");
            }
            println!();
        }
    }
}
