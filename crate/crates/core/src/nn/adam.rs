use log::warn;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Outcome of one optimizer call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepStatus {
    Applied,
    /// The gradient contained a non-finite entry; nothing changed.
    Skipped,
}

/// Bias-corrected adaptive-moment optimizer over a flat parameter buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam<T> {
    pub lr: T,
    pub beta1: T,
    pub beta2: T,
    pub eps: T,
    m: Vec<T>,
    v: Vec<T>,
    t: u64,
}

impl<T: Real> Adam<T> {
    pub fn new(n_params: usize, lr: T) -> Self {
        Self { lr, beta1: T::lit(0.9), beta2: T::lit(0.999), eps: T::lit(1e-8), m: vec![T::zero(); n_params], v: vec![T::zero(); n_params], t: 0 }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    pub fn step(&mut self, params: &mut [T], grads: &[T]) -> Result<StepStatus> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::Shape(format!(
                "optimizer sized for {} parameters, got {} params / {} grads",
                self.m.len(),
                params.len(),
                grads.len()
            )));
        }
        if grads.iter().any(|g| !g.is_finite()) {
            warn!("non-finite gradient, skipping optimizer step {}", self.t + 1);
            return Ok(StepStatus::Skipped);
        }
        self.t += 1;
        let t = i32::try_from(self.t).unwrap_or(i32::MAX);
        let c1 = T::one() - self.beta1.powi(t);
        let c2 = T::one() - self.beta2.powi(t);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (T::one() - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (T::one() - self.beta2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
        Ok(StepStatus::Applied)
    }
}

/// Rescale `grads` so its Euclidean norm is at most `max_norm`. Returns the
/// norm before clipping.
pub fn clip_grad_norm<T: Real>(grads: &mut [T], max_norm: T) -> T {
    let norm = grads.iter().map(|g| *g * *g).sum::<T>().sqrt();
    if norm > max_norm && norm > T::zero() {
        let s = max_norm / norm;
        for g in grads.iter_mut() {
            *g *= s;
        }
    }
    norm
}
