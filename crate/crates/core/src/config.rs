//! Run configuration: a flat `key = value` text file naming the network,
//! the dataset columns, the split, and the scaler. Lines starting with `#`
//! and blank lines are ignored. Errors carry file and line.

use crate::net::{Activation, NetError, NetworkSpec, Sampling, WeightInit};
use crate::pipeline::{ScalerKind, SplitOrder, SplitSpec};
use std::io;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}:{line}: {msg}")]
    Syntax { path: String, line: usize, msg: String },
    #[error("{path}: missing required key `{key}`")]
    Missing { path: String, key: &'static str },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Net(#[from] NetError),
}

/// Everything a training or regression run needs.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub topology: Vec<usize>,
    pub activations: Vec<Activation>,
    pub etas: Vec<f64>,
    pub seed: u64,
    pub sampling: Sampling,
    pub init: WeightInit,
    pub epochs: u32,
    pub data: PathBuf,
    /// Input column names; `None` means every non-target column, in file
    /// order.
    pub inputs: Option<Vec<String>>,
    pub targets: Vec<String>,
    pub split: Option<SplitSpec>,
    pub scaler: Option<ScalerKind>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_str(&text, &path.display().to_string())
    }

    pub fn parse_str(text: &str, path: &str) -> Result<Self, ConfigError> {
        let err = |line: usize, msg: String| ConfigError::Syntax {
            path: path.to_string(),
            line,
            msg,
        };
        let missing = |key: &'static str| ConfigError::Missing { path: path.to_string(), key };

        let mut topology: Option<Vec<usize>> = None;
        let mut activations: Option<Vec<Activation>> = None;
        let mut etas: Option<Vec<f64>> = None;
        let mut seed = 1u64;
        let mut sampling = Sampling::Sequential;
        let mut init = WeightInit::Uniform01;
        let mut epochs = 1u32;
        let mut data: Option<PathBuf> = None;
        let mut inputs: Option<Vec<String>> = None;
        let mut targets: Option<Vec<String>> = None;
        let mut split_count: Option<usize> = None;
        let mut split_order = SplitOrder::FileOrder;
        let mut scaler: Option<ScalerKind> = None;
        let mut range_lo = -1.0;
        let mut range_hi = 1.0;
        let mut split_seed: Option<u64> = None;

        for (i, raw) in text.lines().enumerate() {
            let ln = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(ln, format!("expected `key = value`, got {line:?}")))?;
            let key = key.trim();
            let value = value.trim();
            let bad = |what: &str| err(ln, format!("bad {what} value {value:?}"));
            match key {
                "topology" => {
                    topology =
                        Some(NetworkSpec::parse_topology(value).map_err(|e| err(ln, e.to_string()))?)
                }
                "activations" => {
                    let acts = value
                        .split(',')
                        .map(|s| Activation::parse(s.trim()))
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|e| err(ln, e.to_string()))?;
                    activations = Some(acts);
                }
                "eta" => {
                    let vals = value
                        .split(',')
                        .map(|s| s.trim().parse::<f64>())
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|_| bad("eta"))?;
                    etas = Some(vals);
                }
                "seed" => seed = value.parse().map_err(|_| bad("seed"))?,
                "sampling" => {
                    sampling = Sampling::parse(value).map_err(|e| err(ln, e.to_string()))?
                }
                "init" => init = WeightInit::parse(value).map_err(|e| err(ln, e.to_string()))?,
                "epochs" => epochs = value.parse().map_err(|_| bad("epochs"))?,
                "data" => data = Some(PathBuf::from(value)),
                "inputs" => {
                    inputs = Some(value.split(',').map(|s| s.trim().to_string()).collect())
                }
                "targets" => {
                    targets = Some(value.split(',').map(|s| s.trim().to_string()).collect())
                }
                "split" => split_count = Some(value.parse().map_err(|_| bad("split"))?),
                "split_order" => {
                    split_order = match value {
                        "file" => SplitOrder::FileOrder,
                        "shuffle" => SplitOrder::Shuffle { seed: 0 },
                        _ => return Err(bad("split_order (file|shuffle)")),
                    }
                }
                "split_seed" => split_seed = Some(value.parse().map_err(|_| bad("split_seed"))?),
                "scaler" => {
                    scaler = match value {
                        "none" => None,
                        "zscore" => Some(ScalerKind::ZScore),
                        "range" => Some(ScalerKind::Range { a: range_lo, b: range_hi }),
                        _ => return Err(bad("scaler (none|zscore|range)")),
                    }
                }
                "range_lo" => range_lo = value.parse().map_err(|_| bad("range_lo"))?,
                "range_hi" => range_hi = value.parse().map_err(|_| bad("range_hi"))?,
                other => return Err(err(ln, format!("unknown key `{other}`"))),
            }
        }

        let topology = topology.ok_or_else(|| missing("topology"))?;
        let data = data.ok_or_else(|| missing("data"))?;
        let targets = targets.ok_or_else(|| missing("targets"))?;
        let q = topology.len() - 1;
        let expand = |mut v: Vec<Activation>| -> Vec<Activation> {
            if v.len() == 1 {
                vec![v.remove(0); q]
            } else {
                v
            }
        };
        let activations = expand(activations.unwrap_or_else(|| vec![Activation::Tanh]));
        let etas = {
            let v = etas.unwrap_or_else(|| vec![0.1]);
            if v.len() == 1 { vec![v[0]; q] } else { v }
        };
        // Bounds given after `scaler = range` still apply.
        let scaler = match scaler {
            Some(ScalerKind::Range { .. }) => Some(ScalerKind::Range { a: range_lo, b: range_hi }),
            other => other,
        };
        let split = split_count.map(|in_count| SplitSpec {
            in_count,
            order: match (split_order, split_seed) {
                (SplitOrder::Shuffle { .. }, Some(s)) => SplitOrder::Shuffle { seed: s },
                (SplitOrder::Shuffle { .. }, None) => SplitOrder::Shuffle { seed },
                (SplitOrder::FileOrder, _) => SplitOrder::FileOrder,
            },
        });

        let cfg = RunConfig {
            topology,
            activations,
            etas,
            seed,
            sampling,
            init,
            epochs,
            data,
            inputs,
            targets,
            split,
            scaler,
        };
        cfg.network_spec()?; // surfaces count mismatches early
        Ok(cfg)
    }

    /// The network description this config names, with its own seed.
    pub fn network_spec(&self) -> Result<NetworkSpec, NetError> {
        let spec = NetworkSpec {
            topology: self.topology.clone(),
            activations: self.activations.clone(),
            etas: self.etas.clone(),
            seed: self.seed,
            sampling: self.sampling,
            init: self.init,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Resolves `data` relative to the config file's directory when the
    /// path is not absolute.
    pub fn data_path(&self, config_path: &Path) -> PathBuf {
        if self.data.is_absolute() {
            self.data.clone()
        } else {
            config_path.parent().unwrap_or(Path::new(".")).join(&self.data)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# four-record logic run
topology = 2-2-2-2
activations = tanh
eta = 0.1
seed = 9
sampling = sequential
init = uniform
epochs = 250
data = ../data/xor_and.csv
targets = targ1,targ2
";

    #[test]
    fn parses_a_minimal_config() {
        let cfg = RunConfig::parse_str(SAMPLE, "test.conf").unwrap();
        assert_eq!(cfg.topology, vec![2, 2, 2, 2]);
        assert_eq!(cfg.activations, vec![Activation::Tanh; 3]);
        assert_eq!(cfg.etas, vec![0.1; 3]);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.epochs, 250);
        assert_eq!(cfg.targets, vec!["targ1", "targ2"]);
        assert!(cfg.inputs.is_none());
        assert!(cfg.split.is_none());
        assert!(cfg.scaler.is_none());
        let spec = cfg.network_spec().unwrap();
        assert_eq!(spec.param_count(), 18);
    }

    #[test]
    fn split_and_scaler_keys() {
        let text = format!(
            "{SAMPLE}split = 360\nsplit_order = shuffle\nsplit_seed = 5\nscaler = range\nrange_lo = -1\nrange_hi = 1\n"
        );
        let cfg = RunConfig::parse_str(&text, "t").unwrap();
        let split = cfg.split.unwrap();
        assert_eq!(split.in_count, 360);
        assert_eq!(split.order, SplitOrder::Shuffle { seed: 5 });
        assert_eq!(cfg.scaler, Some(ScalerKind::Range { a: -1.0, b: 1.0 }));
    }

    #[test]
    fn per_layer_lists_must_match_topology() {
        let text = SAMPLE.replace("eta = 0.1", "eta = 0.1,0.2");
        let err = RunConfig::parse_str(&text, "t").unwrap_err();
        assert!(matches!(err, ConfigError::Net(_)), "{err}");
        let text = SAMPLE.replace("activations = tanh", "activations = tanh,relu,identity");
        let cfg = RunConfig::parse_str(&text, "t").unwrap();
        assert_eq!(
            cfg.activations,
            vec![Activation::Tanh, Activation::Relu, Activation::Identity]
        );
    }

    #[test]
    fn errors_carry_file_and_line() {
        let text = "topology = 2-2\nwhat = 3\n";
        let err = RunConfig::parse_str(text, "runs/x.conf").unwrap_err();
        assert_eq!(err.to_string(), "runs/x.conf:2: unknown key `what`");
        let err = RunConfig::parse_str("topology 2-2\n", "c").unwrap_err();
        assert!(err.to_string().starts_with("c:1: expected `key = value`"));
    }

    #[test]
    fn missing_required_keys_are_named() {
        let err = RunConfig::parse_str("topology = 2-1\ntargets = y\n", "c").unwrap_err();
        assert_eq!(err.to_string(), "c: missing required key `data`");
    }

    #[test]
    fn malformed_topology_is_rejected() {
        let text = SAMPLE.replace("topology = 2-2-2-2", "topology = 2--2");
        assert!(RunConfig::parse_str(&text, "t").is_err());
    }
}
