//! Scratch scan of the convergence thresholds over seeds; not part of the
//! test suite. Run with --release from the workspace root.

use gridbp::net::{Activation, NetworkSpec, Sampling, WeightInit};
use gridbp::oracle;
use gridbp::pipeline::{self, DatasetScaler, ScalerKind, SplitOrder, SplitSpec};
use std::path::Path;

fn xor_and() -> Vec<(Vec<f64>, Vec<f64>)> {
    vec![
        (vec![0.0, 0.0], vec![0.0, 0.0]),
        (vec![0.0, 1.0], vec![1.0, 0.0]),
        (vec![1.0, 0.0], vec![1.0, 0.0]),
        (vec![1.0, 1.0], vec![0.0, 1.0]),
    ]
}

fn sse(weights: &[Vec<Vec<f64>>], acts: &[Activation], records: &[(Vec<f64>, Vec<f64>)]) -> Vec<f64> {
    let m = records[0].1.len();
    let mut out = vec![0.0; m];
    for (inp, targ) in records {
        let trace = oracle::forward(weights, acts, inp).unwrap();
        for t in 0..m {
            let e = targ[t] - trace.output()[t];
            out[t] += e * e;
        }
    }
    out
}

fn main() {
    let records = xor_and();

    println!("== xor/and 2-2-2-2 tanh eta=0.1, 1000 passes ==");
    for init in [WeightInit::Uniform01, WeightInit::Symmetric] {
        let mut pass = 0;
        for seed in 1..=10u64 {
            let mut spec = NetworkSpec::uniform(vec![2, 2, 2, 2], Activation::Tanh, 0.1, seed).unwrap();
            spec.init = init;
            let last = oracle::simulate_vbp_final(&spec, &records, 1000).unwrap().unwrap();
            let s = sse(&last.w_b, &spec.activations, &records);
            let ok = s[0] < 0.005 && s[1] < 0.0013;
            if ok {
                pass += 1;
            }
            println!("  init {init:?} seed {seed}: sse1 {:.6} sse2 {:.6} {}", s[0], s[1], if ok { "OK" } else { "fail" });
        }
        println!("  init {init:?}: {pass}/10");
    }

    println!("== mpg linear baseline ==");
    let table = pipeline::load_csv(Path::new("data/auto_mpg.csv")).unwrap();
    let inputs: Vec<String> = [
        "cylinders", "displacement", "horsepower", "weight", "acceleration",
        "modelyear", "origin_usa", "origin_europe", "origin_japan",
    ]
    .map(str::to_string)
    .to_vec();
    let targets = vec!["mpg".to_string()];
    let ds = pipeline::validate(&table, &inputs, &targets).unwrap();
    let (ins, outs) =
        pipeline::split(&ds.records, &SplitSpec { in_count: 360, order: SplitOrder::FileOrder }).unwrap();
    let scaler = DatasetScaler::fit(&ds, &ins, ScalerKind::ZScore).unwrap();
    let sins = scaler.apply_all(&ins);
    let souts = scaler.apply_all(&outs);

    let s = sins.len();
    let n = sins[0].0.len();
    let mut mat_in = vec![vec![0.0; s]; n + 1];
    let mut mat_t = vec![vec![0.0; s]; 1];
    for (c, (inp, targ)) in sins.iter().enumerate() {
        for (r, v) in inp.iter().enumerate() {
            mat_in[r][c] = *v;
        }
        mat_in[n][c] = 1.0;
        mat_t[0][c] = targ[0];
    }
    let w = oracle::least_squares(&mat_in, &mat_t).unwrap();
    println!("  weights: {:?}", w[0].iter().map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>());
    let lin_err = |set: &[(Vec<f64>, Vec<f64>)]| -> f64 {
        let mut sum = 0.0;
        for (inp, targ) in set {
            let mut acc = 0.0;
            for (k, v) in inp.iter().enumerate() {
                acc += w[0][k] * v;
            }
            acc += w[0][n];
            sum += scaler.targets[0].error_to_original((targ[0] - acc).abs());
        }
        sum / set.len() as f64
    };
    println!("  in avg|err| {:.4} mpg, out avg|err| {:.4} mpg", lin_err(&sins), lin_err(&souts));

    println!("== mpg 9-50-30-1 relu-relu-identity eta=0.001, 100 epochs ==");
    for sampling in [Sampling::Sequential, Sampling::Random] {
        for init in [WeightInit::Uniform01, WeightInit::Symmetric] {
            let mut errs: Vec<(f64, f64)> = Vec::new();
            for seed in 1..=5u64 {
                let mut spec =
                    NetworkSpec::uniform(vec![9, 50, 30, 1], Activation::Relu, 0.001, seed).unwrap();
                spec.activations = vec![Activation::Relu, Activation::Relu, Activation::Identity];
                spec.init = init;
                spec.sampling = sampling;
                let t0 = std::time::Instant::now();
                let last = oracle::simulate_vbp_final(&spec, &sins, 100 * s as u32).unwrap().unwrap();
                let avg = |set: &[(Vec<f64>, Vec<f64>)]| -> f64 {
                    let mut sum = 0.0;
                    for (inp, targ) in set {
                        let trace = oracle::forward(&last.w_b, &spec.activations, inp).unwrap();
                        sum += scaler.targets[0].error_to_original((targ[0] - trace.output()[0]).abs());
                    }
                    sum / set.len() as f64
                };
                let (ei, eo) = (avg(&sins), avg(&souts));
                println!(
                    "  {sampling:?}/{init:?} seed {seed}: in {ei:.4} out {eo:.4} mpg ({:?})",
                    t0.elapsed()
                );
                errs.push((ei, eo));
            }
            errs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            println!("  {sampling:?}/{init:?}: median in {:.4}, best-out {:.4}", errs[2].0, errs.iter().map(|e| e.1).fold(f64::INFINITY, f64::min));
        }
    }
}
