//! Central finite-difference gradient verification.
//!
//! The checker treats a loss as a black-box function of a flat parameter
//! group and compares analytic gradients against `(f(x+h) - f(x-h)) / 2h`
//! coordinate by coordinate. It never touches the tape's backward pass, so
//! it is an independent route to the same derivative.

use crate::tensor::Tensor;

/// Outcome of one finite-difference comparison.
#[derive(Debug, Clone)]
pub struct GradCheck {
    /// Largest relative error seen over all checked coordinates.
    pub max_rel_err: f64,
    /// Coordinate count actually compared.
    pub checked: usize,
    /// (leaf name, coordinate, analytic, numeric) for the worst coordinate.
    pub worst: Option<(String, usize, f64, f64)>,
}

impl GradCheck {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_rel_err < tol
    }
}

/// Relative error with an absolute floor: tiny gradients are compared
/// absolutely (at `1e-8`) because central differences carry ~1e-10 noise.
pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    let diff = (analytic - numeric).abs();
    let scale = analytic.abs().max(numeric.abs());
    if diff < 1e-8 {
        0.0
    } else {
        diff / scale.max(1e-8)
    }
}

/// Compare analytic gradients of `loss` against central differences.
///
/// `params` is the set of leaf tensors the loss closes over; `loss` must
/// be a pure function of them. `analytic` holds one gradient tensor per
/// leaf, in the same order. When `sample_per_leaf` is `Some(k)`, only `k`
/// deterministically spread coordinates per leaf are probed (large leaves
/// would otherwise need two loss evaluations per coordinate).
pub fn check<F>(
    params: &mut [(&str, &mut Tensor)],
    analytic: &[Tensor],
    mut loss: F,
    h: f64,
    sample_per_leaf: Option<usize>,
) -> GradCheck
where
    F: FnMut(&[(&str, &mut Tensor)]) -> f64,
{
    assert_eq!(params.len(), analytic.len());
    let mut out = GradCheck {
        max_rel_err: 0.0,
        checked: 0,
        worst: None,
    };
    for li in 0..params.len() {
        let n = params[li].1.len();
        let coords: Vec<usize> = match sample_per_leaf {
            Some(k) if k < n => {
                // Evenly spread with a leaf-dependent offset so different
                // leaves probe different residues.
                let stride = n / k;
                (0..k).map(|j| (j * stride + li * 7919) % n).collect()
            }
            _ => (0..n).collect(),
        };
        for c in coords {
            let orig = params[li].1.values()[c];
            params[li].1.values_mut()[c] = orig + h;
            let fp = loss(params);
            params[li].1.values_mut()[c] = orig - h;
            let fm = loss(params);
            params[li].1.values_mut()[c] = orig;
            let numeric = (fp - fm) / (2.0 * h);
            let an = analytic[li].values()[c];
            let e = rel_err(an, numeric);
            out.checked += 1;
            if e > out.max_rel_err {
                out.max_rel_err = e;
                out.worst = Some((params[li].0.to_string(), c, an, numeric));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Tape;

    #[test]
    fn two_layer_tanh_net_gradient_matches_finite_differences() {
        use crate::nn::Mlp;
        use rand_chacha::rand_core::SeedableRng;
        use rand_chacha::ChaCha8Rng;

        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        let mut mlp = Mlp::init(&[3, 5, 1], false, 1.0, &mut rng).unwrap();
        let input = Tensor::matrix(2, 3, vec![0.1, -0.4, 0.9, 1.3, 0.2, -0.8]).unwrap();

        // analytic
        let mut tape = Tape::new();
        let vars = mlp.lift(&mut tape, "m");
        let x = tape.constant(&input);
        let y = vars.forward(&mut tape, x).unwrap();
        let loss_var = tape.mean_all(y).unwrap();
        let grads = tape.backward(loss_var).unwrap();
        let analytic: Vec<Tensor> = vars
            .weights
            .iter()
            .chain(&vars.biases)
            .map(|v| grads.get(*v).unwrap().clone())
            .collect();

        // numeric: rebuild loss from mutated params
        let w0 = mlp.weights[0].clone();
        let w1 = mlp.weights[1].clone();
        let b0 = mlp.biases[0].clone();
        let b1 = mlp.biases[1].clone();
        let mut leaves = vec![
            ("w0", &mut mlp.weights[0]),
            ("w1", &mut mlp.weights[1]),
            ("b0", &mut mlp.biases[0]),
            ("b1", &mut mlp.biases[1]),
        ];
        let _ = (&w0, &w1, &b0, &b1);
        let result = check(
            &mut leaves,
            &analytic,
            |ps| {
                let probe = Mlp {
                    weights: vec![ps[0].1.clone(), ps[1].1.clone()],
                    biases: vec![ps[2].1.clone(), ps[3].1.clone()],
                    linear_output: false,
                };
                let out = probe.forward(input.values(), 2).unwrap();
                out.iter().sum::<f64>() / out.len() as f64
            },
            1e-5,
            None,
        );
        assert!(
            result.passes(1e-4),
            "max rel err {} at {:?}",
            result.max_rel_err,
            result.worst
        );
    }
}
