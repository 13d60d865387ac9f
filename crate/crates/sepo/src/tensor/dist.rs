//! Categorical and diagonal-Gaussian action distributions.

use rand::Rng;
use rand_distr::StandardNormal;

use super::kernels;
use crate::action::Action;
use crate::error::{Error, Result};

pub const LOG_STD_MIN: f64 = -5.0;
pub const LOG_STD_MAX: f64 = 2.0;

const LN_2PI: f64 = 1.837877066409345483560659472811;

#[derive(Debug, Clone, PartialEq)]
pub enum ActionDistribution {
    Categorical { logits: Vec<f64> },
    DiagGaussian { mean: Vec<f64>, log_std: Vec<f64> },
}

impl ActionDistribution {
    pub fn categorical(logits: Vec<f64>) -> Result<Self> {
        if logits.is_empty() {
            return Err(Error::Contract("categorical with no actions".to_string()));
        }
        if logits.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "categorical logits {logits:?}"
            )));
        }
        Ok(ActionDistribution::Categorical { logits })
    }

    /// Log-std is clamped into [LOG_STD_MIN, LOG_STD_MAX] on construction.
    pub fn diag_gaussian(mean: Vec<f64>, log_std: Vec<f64>) -> Result<Self> {
        if mean.len() != log_std.len() || mean.is_empty() {
            return Err(Error::Shape(format!(
                "gaussian mean dim {} vs log_std dim {}",
                mean.len(),
                log_std.len()
            )));
        }
        if mean.iter().chain(&log_std).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("gaussian parameters".to_string()));
        }
        let log_std = log_std
            .into_iter()
            .map(|v| v.clamp(LOG_STD_MIN, LOG_STD_MAX))
            .collect();
        Ok(ActionDistribution::DiagGaussian { mean, log_std })
    }

    /// Normalized probabilities (softmax of the logits).
    pub fn probs(&self) -> Result<Vec<f64>> {
        match self {
            ActionDistribution::Categorical { logits } => {
                let mut ls = vec![0.0; logits.len()];
                kernels::log_softmax_rows(logits, logits.len(), &mut ls);
                Ok(ls.into_iter().map(f64::exp).collect())
            }
            _ => Err(Error::Contract("probs() on a gaussian".to_string())),
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Result<Action> {
        match self {
            ActionDistribution::Categorical { .. } => {
                let p = self.probs()?;
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (i, &pi) in p.iter().enumerate() {
                    acc += pi;
                    if u < acc {
                        return Ok(Action::Discrete(i));
                    }
                }
                Ok(Action::Discrete(p.len() - 1))
            }
            ActionDistribution::DiagGaussian { mean, log_std } => {
                let v = mean
                    .iter()
                    .zip(log_std)
                    .map(|(&m, &ls)| {
                        let z: f64 = rng.sample(StandardNormal);
                        m + ls.exp() * z
                    })
                    .collect();
                Ok(Action::Continuous(v))
            }
        }
    }

    /// Highest-probability action: argmax with lowest-index tie-break for
    /// categorical, the mean for gaussian.
    pub fn mode(&self) -> Action {
        match self {
            ActionDistribution::Categorical { logits } => {
                let mut best = 0;
                for (i, &v) in logits.iter().enumerate().skip(1) {
                    if v > logits[best] {
                        best = i;
                    }
                }
                Action::Discrete(best)
            }
            ActionDistribution::DiagGaussian { mean, .. } => Action::Continuous(mean.clone()),
        }
    }

    pub fn log_prob(&self, action: &Action) -> Result<f64> {
        match (self, action) {
            (ActionDistribution::Categorical { logits }, Action::Discrete(a)) => {
                if *a >= logits.len() {
                    return Err(Error::Contract(format!(
                        "action {a} outside categorical support {}",
                        logits.len()
                    )));
                }
                let mut ls = vec![0.0; logits.len()];
                kernels::log_softmax_rows(logits, logits.len(), &mut ls);
                Ok(ls[*a])
            }
            (ActionDistribution::DiagGaussian { mean, log_std }, Action::Continuous(x)) => {
                if x.len() != mean.len() {
                    return Err(Error::Shape(format!(
                        "action dim {} vs gaussian dim {}",
                        x.len(),
                        mean.len()
                    )));
                }
                let mut lp = -0.5 * mean.len() as f64 * LN_2PI;
                for ((&xi, &mi), &lsi) in x.iter().zip(mean).zip(log_std) {
                    let z = (xi - mi) / lsi.exp();
                    lp -= 0.5 * z * z + lsi;
                }
                Ok(lp)
            }
            _ => Err(Error::Contract(
                "action kind does not match distribution kind".to_string(),
            )),
        }
    }

    pub fn entropy(&self) -> Result<f64> {
        match self {
            ActionDistribution::Categorical { logits } => {
                let mut ls = vec![0.0; logits.len()];
                kernels::log_softmax_rows(logits, logits.len(), &mut ls);
                Ok(-ls.iter().map(|&l| l.exp() * l).sum::<f64>())
            }
            ActionDistribution::DiagGaussian { log_std, .. } => {
                let d = log_std.len() as f64;
                Ok(0.5 * d * (LN_2PI + 1.0) + log_std.iter().sum::<f64>())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_logits_give_uniform_probs_and_ln3_entropy() {
        let d = ActionDistribution::categorical(vec![0.0, 0.0, 0.0]).unwrap();
        let p = d.probs().unwrap();
        for &pi in &p {
            assert!((pi - 1.0 / 3.0).abs() < 1e-12);
        }
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!((d.entropy().unwrap() - 3.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn gaussian_density_at_mean_unit_sigma() {
        let d = ActionDistribution::diag_gaussian(vec![0.7], vec![0.0]).unwrap();
        let lp = d.log_prob(&Action::Continuous(vec![0.7])).unwrap();
        assert!((lp - (-0.5 * LN_2PI)).abs() < 1e-12);
        assert!((lp - (-0.918938533204672741780329736406)).abs() < 1e-12);
    }

    #[test]
    fn categorical_sampling_frequencies() {
        let p = [0.2, 0.3, 0.5];
        let logits: Vec<f64> = p.iter().map(|v| v.ln()).collect();
        let d = ActionDistribution::categorical(logits).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(20240501);
        let n = 100_000;
        let mut counts = [0usize; 3];
        for _ in 0..n {
            match d.sample(&mut rng).unwrap() {
                Action::Discrete(a) => counts[a] += 1,
                _ => unreachable!(),
            }
        }
        for (c, &pi) in counts.iter().zip(&p) {
            let freq = *c as f64 / n as f64;
            assert!(
                (freq - pi).abs() < 0.01,
                "freq {freq} vs prob {pi}"
            );
        }
    }

    #[test]
    fn action_outside_support_errors() {
        let d = ActionDistribution::categorical(vec![0.0, 0.0]).unwrap();
        assert!(d.log_prob(&Action::Discrete(2)).is_err());
        assert!(d.log_prob(&Action::Continuous(vec![0.0])).is_err());
    }

    #[test]
    fn log_std_clamped_on_construction() {
        let d = ActionDistribution::diag_gaussian(vec![0.0], vec![-20.0]).unwrap();
        match &d {
            ActionDistribution::DiagGaussian { log_std, .. } => {
                assert_eq!(log_std[0], LOG_STD_MIN)
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn mode_tie_break_lowest_index() {
        let d = ActionDistribution::categorical(vec![1.0, 1.0, 0.0]).unwrap();
        assert_eq!(d.mode(), Action::Discrete(0));
        let d = ActionDistribution::categorical(vec![2.0, 1.0, 1.0]).unwrap();
        assert_eq!(d.mode(), Action::Discrete(0));
    }

    #[test]
    fn categorical_entropy_nonnegative() {
        let d = ActionDistribution::categorical(vec![10.0, -10.0, 0.0]).unwrap();
        assert!(d.entropy().unwrap() >= 0.0);
    }
}
