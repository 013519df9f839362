//! Network descriptions shared by the sheet builder and the reference
//! trainer: topology, per-layer activations and learning rates, weight
//! initialization, and the training-sample scan order.
//!
//! The activation methods here are written with a fixed operation order so
//! that results agree bit-for-bit with the same arithmetic performed by the
//! formula evaluator.

use crate::rng::SplitMix64;
use thiserror::Error;

/// Elementwise layer nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    Logistic,
    Identity,
    Relu,
}

impl Activation {
    pub fn parse(text: &str) -> Result<Self, NetError> {
        match text.to_ascii_lowercase().as_str() {
            "tanh" => Ok(Activation::Tanh),
            "logistic" | "sigmoid" => Ok(Activation::Logistic),
            "identity" | "linear" => Ok(Activation::Identity),
            "relu" => Ok(Activation::Relu),
            _ => Err(NetError::UnknownActivation(text.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::Logistic => "logistic",
            Activation::Identity => "identity",
            Activation::Relu => "relu",
        }
    }

    /// Applies the nonlinearity to a pre-activation value.
    ///
    /// Operation order matters for exact agreement with the sheet:
    /// logistic is computed as `1/(1+exp(-z))` in that association.
    pub fn apply(&self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Logistic => 1.0 / (1.0 + (-z).exp()),
            Activation::Identity => z,
            Activation::Relu => {
                if z > 0.0 {
                    z
                } else {
                    0.0
                }
            }
        }
    }

    /// Derivative expressed in terms of the activation output, matching the
    /// factor the generated sheet multiplies into each delta.
    ///
    /// For RELU the output does not determine the derivative at exactly 0;
    /// we use 0 there, consistent with `apply` returning 0 for z <= 0.
    pub fn derivative_from_output(&self, out: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - out * out,
            Activation::Logistic => out * (1.0 - out),
            Activation::Identity => 1.0,
            Activation::Relu => {
                if out > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// How the two initial weight regions are seeded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightInit {
    /// Draws in [0, 1).
    Uniform01,
    /// Draws in [-1, 1), computed as `2*r - 1`.
    Symmetric,
}

impl WeightInit {
    pub fn parse(text: &str) -> Result<Self, NetError> {
        match text.to_ascii_lowercase().as_str() {
            "uniform01" | "uniform" => Ok(WeightInit::Uniform01),
            "symmetric" => Ok(WeightInit::Symmetric),
            _ => Err(NetError::UnknownInit(text.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            WeightInit::Uniform01 => "uniform01",
            WeightInit::Symmetric => "symmetric",
        }
    }

    /// One initial weight, in the same operation order the sheet uses.
    pub fn draw(&self, rng: &mut SplitMix64) -> f64 {
        let r = rng.rand01();
        match self {
            WeightInit::Uniform01 => r,
            WeightInit::Symmetric => 2.0 * r - 1.0,
        }
    }
}

/// Order in which training records are visited by the sample counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    /// `itc` advances by 1 each pass; every record is hit twice in a row
    /// (once by each region) across consecutive passes.
    Sequential,
    /// `itc` advances by a fixed stride coprime to the record count, so the
    /// scan still covers every record per epoch but in a scrambled order.
    Shuffled,
    /// `itc` jumps by a fresh random amount each pass.
    Random,
}

impl Sampling {
    pub fn parse(text: &str) -> Result<Self, NetError> {
        match text.to_ascii_lowercase().as_str() {
            "sequential" => Ok(Sampling::Sequential),
            "shuffled" => Ok(Sampling::Shuffled),
            "random" => Ok(Sampling::Random),
            _ => Err(NetError::UnknownSampling(text.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Sampling::Sequential => "sequential",
            Sampling::Shuffled => "shuffled",
            Sampling::Random => "random",
        }
    }
}

/// Stride used by shuffled sampling over `s` records: the largest prime
/// below s/2 that is coprime to s, falling back to 1 when no such prime
/// exists (tiny datasets). A coprime stride guarantees a full cycle.
pub fn shuffle_stride(s: usize) -> usize {
    fn is_prime(n: usize) -> bool {
        if n < 2 {
            return false;
        }
        let mut d = 2;
        while d * d <= n {
            if n % d == 0 {
                return false;
            }
            d += 1;
        }
        true
    }
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 { a } else { gcd(b, a % b) }
    }
    let mut best = 1;
    for p in 2..s.div_ceil(2) {
        if is_prime(p) && gcd(p, s) == 1 {
            best = p;
        }
    }
    best
}

#[derive(Debug, Error)]
pub enum NetError {
    #[error("unknown activation `{0}` (expected tanh, logistic, identity, or relu)")]
    UnknownActivation(String),
    #[error("unknown weight init `{0}` (expected uniform01 or symmetric)")]
    UnknownInit(String),
    #[error("unknown sampling mode `{0}` (expected sequential, shuffled, or random)")]
    UnknownSampling(String),
    #[error("bad topology `{0}`: expected dash-separated positive sizes like 2-2-2-2")]
    BadTopology(String),
    #[error("topology needs at least one input and one output layer")]
    TooFewLayers,
    #[error("expected {expected} activations for {layers} weight layers, got {got}")]
    ActivationCount { expected: usize, layers: usize, got: usize },
    #[error("expected {expected} learning rates, got {got}")]
    EtaCount { expected: usize, got: usize },
    #[error("learning rate must be a positive finite number, got {0}")]
    BadEta(f64),
}

/// Full description of a trainable network.
///
/// `topology[0]` is the input width; each later entry is a layer size. A
/// spec with topology `[n, m1, ..., mq]` has `q` weight layers, and
/// `activations`/`etas` carry one entry per weight layer.
#[derive(Debug, Clone)]
pub struct NetworkSpec {
    pub topology: Vec<usize>,
    pub activations: Vec<Activation>,
    pub etas: Vec<f64>,
    pub seed: u64,
    pub sampling: Sampling,
    pub init: WeightInit,
}

impl NetworkSpec {
    /// Parses dash notation like `9-50-30-1` into a size list.
    pub fn parse_topology(text: &str) -> Result<Vec<usize>, NetError> {
        let sizes: Result<Vec<usize>, _> =
            text.split('-').map(|part| part.trim().parse::<usize>()).collect();
        match sizes {
            Ok(sizes) if sizes.len() >= 2 && sizes.iter().all(|&m| m >= 1) => Ok(sizes),
            _ => Err(NetError::BadTopology(text.to_string())),
        }
    }

    /// Inverse of [`parse_topology`](Self::parse_topology).
    pub fn format_topology(sizes: &[usize]) -> String {
        sizes.iter().map(|m| m.to_string()).collect::<Vec<_>>().join("-")
    }

    /// Convenience constructor for the common case of one activation and
    /// one learning rate shared by every layer.
    pub fn uniform(
        topology: Vec<usize>,
        activation: Activation,
        eta: f64,
        seed: u64,
    ) -> Result<Self, NetError> {
        let layers = topology.len().saturating_sub(1);
        let spec = NetworkSpec {
            topology,
            activations: vec![activation; layers],
            etas: vec![eta; layers],
            seed,
            sampling: Sampling::Sequential,
            init: WeightInit::Uniform01,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), NetError> {
        if self.topology.len() < 2 {
            return Err(NetError::TooFewLayers);
        }
        if self.topology.iter().any(|&m| m == 0) {
            return Err(NetError::BadTopology(Self::format_topology(&self.topology)));
        }
        let layers = self.layer_count();
        if self.activations.len() != layers {
            return Err(NetError::ActivationCount {
                expected: layers,
                layers,
                got: self.activations.len(),
            });
        }
        if self.etas.len() != layers {
            return Err(NetError::EtaCount { expected: layers, got: self.etas.len() });
        }
        for &eta in &self.etas {
            if !(eta > 0.0 && eta.is_finite()) {
                return Err(NetError::BadEta(eta));
            }
        }
        Ok(())
    }

    /// Number of weight layers (q).
    pub fn layer_count(&self) -> usize {
        self.topology.len() - 1
    }

    /// Input width (n).
    pub fn input_width(&self) -> usize {
        self.topology[0]
    }

    /// Output width (m_q).
    pub fn output_width(&self) -> usize {
        *self.topology.last().unwrap()
    }

    /// Shape of weight layer `h` (1-based): rows x cols, where cols counts
    /// the previous layer plus its bias unit.
    pub fn weight_shape(&self, h: usize) -> (usize, usize) {
        (self.topology[h], self.topology[h - 1] + 1)
    }

    /// Total trainable parameter count across all layers.
    pub fn param_count(&self) -> usize {
        (1..=self.layer_count())
            .map(|h| {
                let (r, c) = self.weight_shape(h);
                r * c
            })
            .sum()
    }

    /// The shared learning rate if every layer uses the same one.
    pub fn shared_eta(&self) -> Option<f64> {
        let first = self.etas[0];
        if self.etas.iter().all(|&e| e == first) { Some(first) } else { None }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn topology_round_trip() {
        let sizes = NetworkSpec::parse_topology("9-50-30-1").unwrap();
        assert_eq!(sizes, vec![9, 50, 30, 1]);
        assert_eq!(NetworkSpec::format_topology(&sizes), "9-50-30-1");
    }

    #[test]
    fn topology_rejects_malformed() {
        assert!(NetworkSpec::parse_topology("2--2").is_err());
        assert!(NetworkSpec::parse_topology("2-0-1").is_err());
        assert!(NetworkSpec::parse_topology("7").is_err());
        assert!(NetworkSpec::parse_topology("a-b").is_err());
    }

    #[test]
    fn uniform_spec_counts() {
        let spec = NetworkSpec::uniform(vec![2, 2, 2, 2], Activation::Tanh, 0.1, 1).unwrap();
        assert_eq!(spec.layer_count(), 3);
        assert_eq!(spec.weight_shape(1), (2, 3));
        assert_eq!(spec.param_count(), 18);
        assert_eq!(spec.shared_eta(), Some(0.1));

        let spec = NetworkSpec::uniform(vec![9, 50, 30, 1], Activation::Relu, 0.001, 1).unwrap();
        assert_eq!(spec.param_count(), 50 * (9 + 1) + 30 * (50 + 1) + (30 + 1));
        assert_eq!(spec.param_count(), 2061);
    }

    #[test]
    fn validation_catches_bad_fields() {
        let mut spec = NetworkSpec::uniform(vec![2, 2], Activation::Tanh, 0.1, 1).unwrap();
        spec.etas = vec![0.0];
        assert!(matches!(spec.validate(), Err(NetError::BadEta(_))));
        spec.etas = vec![0.1, 0.1];
        assert!(matches!(spec.validate(), Err(NetError::EtaCount { .. })));
        spec.etas = vec![0.1];
        spec.activations = vec![];
        assert!(matches!(spec.validate(), Err(NetError::ActivationCount { .. })));
    }

    #[test]
    fn activation_values() {
        assert_eq!(Activation::Tanh.apply(0.0), 0.0);
        assert!((Activation::Logistic.apply(0.0) - 0.5).abs() < 1e-15);
        assert_eq!(Activation::Identity.apply(-3.5), -3.5);
        assert_eq!(Activation::Relu.apply(-1.0), 0.0);
        assert_eq!(Activation::Relu.apply(2.5), 2.5);
        // Derivative factors expressed in terms of the output.
        let out = Activation::Tanh.apply(0.7);
        assert!((Activation::Tanh.derivative_from_output(out) - (1.0 - out * out)).abs() == 0.0);
        assert_eq!(Activation::Relu.derivative_from_output(0.0), 0.0);
        assert_eq!(Activation::Identity.derivative_from_output(123.0), 1.0);
    }

    #[test]
    fn stride_is_coprime_prime() {
        assert_eq!(shuffle_stride(360), 179);
        assert_eq!(shuffle_stride(4), 1);
        // 5/2 rounds to 2; the largest prime below 3 that is coprime to 5 is 2.
        assert_eq!(shuffle_stride(5), 2);
        for s in [4usize, 5, 7, 10, 360, 392] {
            let p = shuffle_stride(s);
            let mut a = s;
            let mut b = p;
            while b != 0 {
                let t = a % b;
                a = b;
                b = t;
            }
            assert_eq!(a, 1, "stride for {s} must be coprime");
        }
    }

    #[test]
    fn parse_enums() {
        assert_eq!(Activation::parse("ReLU").unwrap(), Activation::Relu);
        assert_eq!(Sampling::parse("SHUFFLED").unwrap(), Sampling::Shuffled);
        assert_eq!(WeightInit::parse("symmetric").unwrap(), WeightInit::Symmetric);
        assert!(Activation::parse("softmax").is_err());
    }
}
