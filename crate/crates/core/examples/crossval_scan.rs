//! Scratch: epoch-wise keep-best out-sample curves for the 9-50-30-1 run,
//! plus engine wall-clock for one epoch of the same sheet.

use gridbp::builder;
use gridbp::net::{Activation, NetworkSpec, Sampling, WeightInit};
use gridbp::oracle;
use gridbp::pipeline::{self, DatasetScaler, ScalerKind, SplitOrder, SplitSpec};
use std::path::Path;
use std::time::Instant;

fn main() {
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
    let s = sins.len() as u32;

    println!("== keep-best out-sample over 100 epochs (oracle) ==");
    for seed in 1..=5u64 {
        let mut spec = NetworkSpec::uniform(vec![9, 50, 30, 1], Activation::Relu, 0.001, seed).unwrap();
        spec.activations = vec![Activation::Relu, Activation::Relu, Activation::Identity];
        spec.init = WeightInit::Symmetric;
        spec.sampling = Sampling::Random;
        let mut best_out = f64::INFINITY;
        let mut best_epoch = 0;
        let mut final_in = 0.0;
        oracle::simulate_vbp_with(&spec, &sins, 100 * s, |state| {
            if state.passes % s != 0 {
                return;
            }
            let epoch = state.passes / s;
            let avg = |set: &[(Vec<f64>, Vec<f64>)]| -> f64 {
                let mut sum = 0.0;
                for (inp, targ) in set {
                    let t = oracle::forward(&state.w_b, &spec.activations, inp).unwrap();
                    sum += scaler.targets[0].error_to_original((targ[0] - t.output()[0]).abs());
                }
                sum / set.len() as f64
            };
            let out_err = avg(&souts);
            if out_err < best_out {
                best_out = out_err;
                best_epoch = epoch;
            }
            if epoch == 100 {
                final_in = avg(&sins);
            }
        })
        .unwrap();
        println!("  seed {seed}: best-out {best_out:.4} @ epoch {best_epoch}, final in {final_in:.4}");
    }

    println!("== engine wall-clock: build + init + 1 epoch (360 passes) ==");
    let mut spec = NetworkSpec::uniform(vec![9, 50, 30, 1], Activation::Relu, 0.001, 1).unwrap();
    spec.activations = vec![Activation::Relu, Activation::Relu, Activation::Identity];
    spec.init = WeightInit::Symmetric;
    spec.sampling = Sampling::Random;
    let t0 = Instant::now();
    let (mut wb, layout) = builder::build_workbook(&spec, &sins, None).unwrap();
    println!("  build: {:?}", t0.elapsed());
    let t0 = Instant::now();
    builder::init_run(&mut wb, &layout).unwrap();
    println!("  init_run: {:?}", t0.elapsed());
    let t0 = Instant::now();
    builder::train_run(&mut wb, &layout, s).unwrap();
    let dt = t0.elapsed();
    println!("  1 epoch ({s} passes): {dt:?}  => 100 epochs ≈ {:?}", dt * 100);
}
