//! Multilayer perceptrons over the tensor kernel: tanh hidden layers,
//! optionally linear output, with both a no-gradient forward pass (rollouts,
//! execution) and a tape forward pass (training). Both call the same
//! kernels, so the two paths agree bit-for-bit.

use rand::Rng;

use crate::error::{Error, Result};
use crate::tensor::{ParamUpdate, Tape, Tensor, Var};

/// Weights are stored `[in, out]` so the forward pass is `x @ w + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub weights: Vec<Tensor>,
    pub biases: Vec<Tensor>,
    /// Skip the activation on the final layer.
    pub linear_output: bool,
}

impl Mlp {
    /// Uniform init in +/- sqrt(6 / (fan_in + fan_out)); `final_scale`
    /// multiplies the last layer's weights (1.0 for plain nets, 0.01 for
    /// directly trained policy heads so initial policies are near-uniform).
    pub fn init<R: Rng>(
        dims: &[usize],
        linear_output: bool,
        final_scale: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::Contract("mlp needs at least one layer".to_string()));
        }
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for (li, pair) in dims.windows(2).enumerate() {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let scale = if li + 2 == dims.len() { final_scale } else { 1.0 };
            let data: Vec<f64> = (0..fan_in * fan_out)
                .map(|_| scale * rng.random_range(-bound..bound))
                .collect();
            weights.push(Tensor::matrix(fan_in, fan_out, data)?);
            biases.push(Tensor::zeros(vec![fan_out]));
        }
        Ok(Mlp {
            weights,
            biases,
            linear_output,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.weights[0].shape()[0]
    }

    pub fn output_dim(&self) -> usize {
        self.weights.last().unwrap().shape()[1]
    }

    pub fn param_count(&self) -> usize {
        self.weights.iter().map(Tensor::len).sum::<usize>()
            + self.biases.iter().map(Tensor::len).sum::<usize>()
    }

    /// No-gradient forward pass over a batch `[m, input_dim]` flattened
    /// row-major. Returns `[m, output_dim]` flattened.
    pub fn forward(&self, input: &[f64], rows: usize) -> Result<Vec<f64>> {
        let in_dim = self.input_dim();
        if input.len() != rows * in_dim {
            return Err(Error::Shape(format!(
                "mlp forward: {} values for {rows} rows of width {in_dim}",
                input.len()
            )));
        }
        if input.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("mlp forward input".to_string()));
        }
        let nlayers = self.weights.len();
        let mut cur = input.to_vec();
        let mut width = in_dim;
        for (li, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let out_dim = w.shape()[1];
            let mut next =
                crate::tensor::kernels::affine(&cur, w.values(), b.values(), rows, width, out_dim);
            if li + 1 < nlayers || !self.linear_output {
                crate::tensor::kernels::tanh_inplace(&mut next);
            }
            cur = next;
            width = out_dim;
        }
        Ok(cur)
    }

    /// Forward a single input vector.
    pub fn forward_one(&self, input: &[f64]) -> Result<Vec<f64>> {
        self.forward(input, 1)
    }

    /// Lift the parameters onto a tape as named leaves.
    pub fn lift(&self, tape: &mut Tape, prefix: &str) -> MlpVars {
        let weights = self
            .weights
            .iter()
            .enumerate()
            .map(|(i, w)| tape.leaf(&format!("{prefix}.w{i}"), w))
            .collect();
        let biases = self
            .biases
            .iter()
            .enumerate()
            .map(|(i, b)| tape.leaf(&format!("{prefix}.b{i}"), b))
            .collect();
        MlpVars {
            weights,
            biases,
            linear_output: self.linear_output,
        }
    }

    /// Pair each parameter with its gradient from a finished backward pass,
    /// ready to hand to the optimizer.
    pub fn updates<'a>(
        &'a mut self,
        prefix: &str,
        vars: &MlpVars,
        grads: &'a crate::tensor::Gradients,
    ) -> Result<Vec<ParamUpdate<'a>>> {
        let mut out = Vec::with_capacity(self.weights.len() * 2);
        for (i, (w, v)) in self.weights.iter_mut().zip(&vars.weights).enumerate() {
            out.push(ParamUpdate {
                name: format!("{prefix}.w{i}"),
                param: w,
                grad: grads.get(*v)?,
            });
        }
        for (i, (b, v)) in self.biases.iter_mut().zip(&vars.biases).enumerate() {
            out.push(ParamUpdate {
                name: format!("{prefix}.b{i}"),
                param: b,
                grad: grads.get(*v)?,
            });
        }
        Ok(out)
    }
}

/// Tape handles for one MLP's parameters.
#[derive(Debug, Clone)]
pub struct MlpVars {
    pub weights: Vec<Var>,
    pub biases: Vec<Var>,
    pub linear_output: bool,
}

impl MlpVars {
    /// Tape forward pass; `input` must be a `[m, in_dim]` var.
    pub fn forward(&self, tape: &mut Tape, input: Var) -> Result<Var> {
        let nlayers = self.weights.len();
        let mut cur = input;
        for (li, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            cur = tape.matmul(cur, *w)?;
            cur = tape.add_row(cur, *b)?;
            if li + 1 < nlayers || !self.linear_output {
                cur = tape.tanh(cur)?;
            }
        }
        Ok(cur)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_weights_zero_output() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut mlp = Mlp::init(&[3, 4, 2], true, 1.0, &mut rng).unwrap();
        for w in &mut mlp.weights {
            w.values_mut().fill(0.0);
        }
        let out = mlp.forward_one(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(out, vec![0.0, 0.0]);
    }

    #[test]
    fn identity_single_layer() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut mlp = Mlp::init(&[3, 3], true, 1.0, &mut rng).unwrap();
        let eye = Tensor::matrix(3, 3, vec![1., 0., 0., 0., 1., 0., 0., 0., 1.]).unwrap();
        mlp.weights[0] = eye;
        let out = mlp.forward_one(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(out, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn random_two_layer_matches_straight_line_arithmetic() {
        // Independent re-implementation of the same arithmetic, written out
        // longhand, as the oracle.
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mlp = Mlp::init(&[2, 3, 2], true, 1.0, &mut rng).unwrap();
        let x = [0.3, -1.2];
        let got = mlp.forward_one(&x).unwrap();

        let w0 = mlp.weights[0].values();
        let b0 = mlp.biases[0].values();
        let w1 = mlp.weights[1].values();
        let b1 = mlp.biases[1].values();
        let mut hidden = [0.0f64; 3];
        for j in 0..3 {
            let mut s = b0[j];
            for (i, &xi) in x.iter().enumerate() {
                s += xi * w0[i * 3 + j];
            }
            hidden[j] = s.tanh();
        }
        let mut expect = [0.0f64; 2];
        for j in 0..2 {
            let mut s = b1[j];
            for (i, &hi) in hidden.iter().enumerate() {
                s += hi * w1[i * 2 + j];
            }
            expect[j] = s;
        }
        for (g, e) in got.iter().zip(&expect) {
            assert!((g - e).abs() < 1e-12, "{g} vs {e}");
        }
    }

    #[test]
    fn shape_mismatch_is_structured_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mlp = Mlp::init(&[3, 2], true, 1.0, &mut rng).unwrap();
        match mlp.forward_one(&[1.0, 2.0]) {
            Err(Error::Shape(_)) => {}
            other => panic!("expected shape error, got {other:?}"),
        }
    }

    #[test]
    fn tape_forward_matches_nograd_forward_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mlp = Mlp::init(&[4, 8, 3], true, 1.0, &mut rng).unwrap();
        let input: Vec<f64> = (0..8).map(|i| (i as f64) * 0.37 - 1.0).collect();
        let nograd = mlp.forward(&input, 2).unwrap();

        let mut tape = Tape::new();
        let vars = mlp.lift(&mut tape, "m");
        let x = tape.constant(&Tensor::matrix(2, 4, input).unwrap());
        let y = vars.forward(&mut tape, x).unwrap();
        assert_eq!(tape.value(y).unwrap().values(), nograd.as_slice());
    }
}
