//! Three-layer feed-forward network (input, sigmoid hidden, sigmoid output)
//! trained by full-batch gradient descent on the squared-error signal.

mod model_io;

pub use model_io::ModelArtifact;

use crate::error::{Error, Result};
use crate::seeding::rng_from_seed;
use rand::Rng;

/// Hidden widths swept by the width search: `2m + 1` for `m` in `2..=10`.
pub const HIDDEN_WIDTH_SWEEP: [usize; 9] = [5, 7, 9, 11, 13, 15, 17, 19, 21];

/// Training hyperparameters and layer sizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetConfig {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub learning_rate: f64,
    pub max_epochs: usize,
    /// Stop once the batch error drops to this value; the theoretical
    /// zero-error stop is unreachable in practice.
    pub target_error: f64,
    pub seed: u64,
    /// Weights initialize uniformly in `[-weight_init_range, +weight_init_range]`.
    pub weight_init_range: f64,
}

impl NetConfig {
    /// Default configuration with the `2M + 1` hidden-width heuristic.
    pub fn for_input_dim(input_dim: usize) -> Self {
        Self {
            input_dim,
            hidden_dim: 2 * input_dim + 1,
            learning_rate: 0.05,
            max_epochs: 5000,
            target_error: 1e-4,
            seed: 0,
            weight_init_range: 0.5,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.hidden_dim == 0 {
            return Err(Error::InvalidConfig("layer sizes must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(self.target_error >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "target_error must be non-negative, got {}",
                self.target_error
            )));
        }
        Ok(())
    }
}

/// A trained (or freshly initialized) network.
#[derive(Debug, Clone, PartialEq)]
pub struct NeuralNet {
    /// Input-to-hidden weights, `w[j][i]` for hidden unit `j`, input `i`.
    pub w: Vec<Vec<f64>>,
    pub hidden_bias: Vec<f64>,
    /// Hidden-to-output weights, one per hidden unit.
    pub v: Vec<f64>,
    pub output_bias: f64,
    pub config: NetConfig,
    /// Batch error after each epoch.
    pub train_curve: Vec<f64>,
}

/// Numerically stable logistic function; splits on sign so `exp` never
/// overflows.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl NeuralNet {
    /// Seeded uniform initialization in `±weight_init_range`. Draw order is
    /// fixed (w row-major, hidden biases, v, output bias) so identical
    /// configs produce identical nets.
    pub fn init(config: NetConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = rng_from_seed(config.seed);
        let r = config.weight_init_range;
        let mut draw = move || -> f64 {
            let u: f64 = rng.random();
            u * 2.0 * r - r
        };
        let w = (0..config.hidden_dim)
            .map(|_| (0..config.input_dim).map(|_| draw()).collect())
            .collect();
        let hidden_bias = (0..config.hidden_dim).map(|_| draw()).collect();
        let v = (0..config.hidden_dim).map(|_| draw()).collect();
        let output_bias = draw();
        Ok(Self {
            w,
            hidden_bias,
            v,
            output_bias,
            config,
            train_curve: Vec::new(),
        })
    }

    /// Forward pass: returns the scalar output in (0, 1) and the hidden
    /// activations.
    pub fn forward(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        if x.len() != self.config.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.config.input_dim,
                got: x.len(),
            });
        }
        let z: Vec<f64> = self
            .w
            .iter()
            .zip(&self.hidden_bias)
            .map(|(row, &b)| {
                let s: f64 = row.iter().zip(x).map(|(w, xi)| w * xi).sum();
                sigmoid(s + b)
            })
            .collect();
        let out: f64 = self.v.iter().zip(&z).map(|(v, zj)| v * zj).sum::<f64>() + self.output_bias;
        Ok((sigmoid(out), z))
    }
}

fn check_batch(net: &NeuralNet, inputs: &[Vec<f64>], targets: &[f64]) -> Result<()> {
    if inputs.is_empty() {
        return Err(Error::EmptyInput);
    }
    if inputs.len() != targets.len() {
        return Err(Error::DimensionMismatch {
            expected: inputs.len(),
            got: targets.len(),
        });
    }
    for row in inputs {
        if row.len() != net.config.input_dim {
            return Err(Error::DimensionMismatch {
                expected: net.config.input_dim,
                got: row.len(),
            });
        }
    }
    Ok(())
}

/// Batch error: half the sum of squared residuals.
pub fn loss(net: &NeuralNet, inputs: &[Vec<f64>], targets: &[f64]) -> Result<f64> {
    check_batch(net, inputs, targets)?;
    let mut acc = 0.0;
    for (x, &y) in inputs.iter().zip(targets) {
        let (u, _) = net.forward(x)?;
        acc += (y - u) * (y - u);
    }
    Ok(0.5 * acc)
}

/// Exact gradients of [`loss`] with respect to every weight and bias.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w: Vec<Vec<f64>>,
    pub hidden_bias: Vec<f64>,
    pub v: Vec<f64>,
    pub output_bias: f64,
}

impl Gradients {
    pub fn is_finite(&self) -> bool {
        self.w.iter().flatten().all(|g| g.is_finite())
            && self.hidden_bias.iter().all(|g| g.is_finite())
            && self.v.iter().all(|g| g.is_finite())
            && self.output_bias.is_finite()
    }

    pub fn norms(&self) -> GradientNorms {
        let sq = |it: &mut dyn Iterator<Item = f64>| it.map(|g| g * g).sum::<f64>().sqrt();
        GradientNorms {
            w: sq(&mut self.w.iter().flatten().copied()),
            hidden_bias: sq(&mut self.hidden_bias.iter().copied()),
            v: sq(&mut self.v.iter().copied()),
            output_bias: self.output_bias.abs(),
        }
    }
}

/// L2 norms per parameter group, for divergence monitoring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientNorms {
    pub w: f64,
    pub hidden_bias: f64,
    pub v: f64,
    pub output_bias: f64,
}

/// Accumulate the full-batch chain-rule gradients.
pub fn batch_gradients(net: &NeuralNet, inputs: &[Vec<f64>], targets: &[f64]) -> Result<Gradients> {
    check_batch(net, inputs, targets)?;
    let h = net.config.hidden_dim;
    let m = net.config.input_dim;
    let mut grad = Gradients {
        w: vec![vec![0.0; m]; h],
        hidden_bias: vec![0.0; h],
        v: vec![0.0; h],
        output_bias: 0.0,
    };
    for (x, &y) in inputs.iter().zip(targets) {
        let (u, z) = net.forward(x)?;
        // d(loss)/d(output preactivation)
        let delta_out = (u - y) * u * (1.0 - u);
        grad.output_bias += delta_out;
        for j in 0..h {
            grad.v[j] += delta_out * z[j];
            let delta_hidden = delta_out * net.v[j] * z[j] * (1.0 - z[j]);
            grad.hidden_bias[j] += delta_hidden;
            for i in 0..m {
                grad.w[j][i] += delta_hidden * x[i];
            }
        }
    }
    Ok(grad)
}

/// One full-batch gradient-descent step. Returns the updated network (the
/// input is untouched) plus the gradient norms.
pub fn backprop_step(
    net: &NeuralNet,
    inputs: &[Vec<f64>],
    targets: &[f64],
) -> Result<(NeuralNet, GradientNorms)> {
    let grad = batch_gradients(net, inputs, targets)?;
    if !grad.is_finite() {
        return Err(Error::NonFiniteGradient);
    }
    let lr = net.config.learning_rate;
    let mut next = net.clone();
    for (row, grow) in next.w.iter_mut().zip(&grad.w) {
        for (wij, g) in row.iter_mut().zip(grow) {
            *wij -= lr * g;
        }
    }
    for (b, g) in next.hidden_bias.iter_mut().zip(&grad.hidden_bias) {
        *b -= lr * g;
    }
    for (vj, g) in next.v.iter_mut().zip(&grad.v) {
        *vj -= lr * g;
    }
    next.output_bias -= lr * grad.output_bias;
    Ok((next, grad.norms()))
}

/// Train from a seeded initialization until the batch error reaches
/// `target_error` or `max_epochs` elapse. Deterministic for a fixed config.
pub fn train(config: NetConfig, inputs: &[Vec<f64>], targets: &[f64]) -> Result<NeuralNet> {
    let mut net = NeuralNet::init(config)?;
    check_batch(&net, inputs, targets)?;
    let mut curve = Vec::new();
    for epoch in 0..config.max_epochs {
        let (next, _) = backprop_step(&net, inputs, targets).map_err(|e| match e {
            Error::NonFiniteGradient => Error::Diverged { epoch },
            other => other,
        })?;
        net = next;
        let err = loss(&net, inputs, targets)?;
        if !err.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        curve.push(err);
        if err <= config.target_error {
            break;
        }
    }
    net.train_curve = curve;
    Ok(net)
}

/// Outcome of the hidden-width search.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenWidthSelection {
    pub config: NetConfig,
    /// `(width, validation RMSE)` for every candidate, in sweep order.
    pub evaluated: Vec<(usize, f64)>,
}

/// Train one candidate per hidden width and keep the one with the lowest
/// validation RMSE; ties go to the smaller width.
pub fn select_hidden_width(
    template: NetConfig,
    candidates: &[usize],
    train_set: (&[Vec<f64>], &[f64]),
    validation: (&[Vec<f64>], &[f64]),
) -> Result<HiddenWidthSelection> {
    if validation.0.is_empty() || validation.1.is_empty() {
        return Err(Error::EmptyValidation);
    }
    if candidates.is_empty() {
        return Err(Error::InvalidConfig("no hidden-width candidates".into()));
    }
    let mut evaluated = Vec::with_capacity(candidates.len());
    let mut best: Option<(usize, f64)> = None;
    for &width in candidates {
        let config = NetConfig {
            hidden_dim: width,
            ..template
        };
        let net = train(config, train_set.0, train_set.1)?;
        let predicted: Vec<f64> = validation
            .0
            .iter()
            .map(|x| net.forward(x).map(|(u, _)| u))
            .collect::<Result<_>>()?;
        let rmse = crate::metrics::rmse(validation.1, &predicted)?;
        evaluated.push((width, rmse));
        let better = match best {
            None => true,
            Some((bw, brmse)) => rmse < brmse || (rmse == brmse && width < bw),
        };
        if better {
            best = Some((width, rmse));
        }
    }
    let (width, _) = best.expect("candidates checked non-empty");
    Ok(HiddenWidthSelection {
        config: NetConfig {
            hidden_dim: width,
            ..template
        },
        evaluated,
    })
}
