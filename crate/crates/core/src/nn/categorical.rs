use rand::Rng;

use crate::scalar::Real;

/// Softmax distribution over `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Categorical<T> {
    probs: Vec<T>,
    log_probs: Vec<T>,
}

impl<T: Real> Categorical<T> {
    pub fn from_logits(logits: &[T]) -> Self {
        let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
        let shifted: Vec<T> = logits.iter().map(|z| *z - max).collect();
        let log_norm = shifted.iter().map(|z| z.exp()).sum::<T>().ln();
        let log_probs: Vec<T> = shifted.iter().map(|z| *z - log_norm).collect();
        let probs = log_probs.iter().map(|l| l.exp()).collect();
        Self { probs, log_probs }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn log_prob(&self, action: usize) -> T {
        self.log_probs[action]
    }

    pub fn entropy(&self) -> T {
        -self
            .probs
            .iter()
            .zip(&self.log_probs)
            .filter(|(p, _)| **p > T::zero())
            .map(|(p, l)| *p * *l)
            .sum::<T>()
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, p) in self.probs.iter().enumerate() {
            if *p > self.probs[best] {
                best = i;
            }
        }
        best
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u = T::lit(rng.random::<f64>());
        let mut acc = T::zero();
        for (i, p) in self.probs.iter().enumerate() {
            acc += *p;
            if u < acc {
                return i;
            }
        }
        // rounding left a sliver above the cumulative sum
        self.probs.iter().rposition(|p| *p > T::zero()).unwrap_or(0)
    }

    /// Gradient of `log_prob(action)` with respect to the logits.
    pub fn log_prob_grad(&self, action: usize) -> Vec<T> {
        self.probs
            .iter()
            .enumerate()
            .map(|(i, p)| if i == action { T::one() - *p } else { -*p })
            .collect()
    }

    /// Gradient of `entropy()` with respect to the logits.
    pub fn entropy_grad(&self) -> Vec<T> {
        let h = self.entropy();
        self.probs
            .iter()
            .zip(&self.log_probs)
            .map(|(p, l)| if *p > T::zero() { -*p * (*l + h) } else { T::zero() })
            .collect()
    }
}
