use rand::Rng;

use crate::error::{Error, Result};
use crate::nn::{Activation, Cache, Categorical, Mlp};

/// Network with one softmax head per bid unit; the joint log-probability is
/// the sum of the head log-probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct FactoredPolicy {
    pub net: Mlp<f64>,
    pub heads: usize,
    pub levels: usize,
}

/// Output layer scale for fresh policies, so they start close to uniform.
const HEAD_INIT_SCALE: f64 = 0.01;

impl FactoredPolicy {
    pub fn new<R: Rng + ?Sized>(input: usize, hidden: &[usize], heads: usize, levels: usize, rng: &mut R) -> Result<Self> {
        let mut widths = vec![input];
        widths.extend_from_slice(hidden);
        widths.push(heads * levels);
        let mut gains = vec![std::f64::consts::SQRT_2; widths.len() - 2];
        gains.push(HEAD_INIT_SCALE);
        let net = Mlp::orthogonal(&widths, Activation::Tanh, &gains, rng)?;
        Ok(Self { net, heads, levels })
    }

    pub fn from_net(net: Mlp<f64>, heads: usize, levels: usize) -> Result<Self> {
        if net.output_width() != heads * levels {
            return Err(Error::Shape(format!(
                "policy network emits {} logits, expected {heads}x{levels}",
                net.output_width()
            )));
        }
        Ok(Self { net, heads, levels })
    }

    pub fn dists(&self, obs: &[f64]) -> Result<(Vec<Categorical<f64>>, Cache<f64>)> {
        let (logits, cache) = self.net.forward(obs)?;
        let dists = logits.chunks(self.levels).map(Categorical::from_logits).collect();
        Ok((dists, cache))
    }

    fn check_action(&self, action: &[usize]) -> Result<()> {
        if action.len() != self.heads || action.iter().any(|a| *a >= self.levels) {
            return Err(Error::Shape(format!("action {action:?} does not fit {} heads of {}", self.heads, self.levels)));
        }
        Ok(())
    }

    pub fn joint_log_prob(dists: &[Categorical<f64>], action: &[usize]) -> f64 {
        dists.iter().zip(action).map(|(d, a)| d.log_prob(*a)).sum()
    }

    pub fn joint_entropy(dists: &[Categorical<f64>]) -> f64 {
        dists.iter().map(Categorical::entropy).sum()
    }

    /// Sample one level per head; returns the levels and their joint log-probability.
    pub fn sample<R: Rng + ?Sized>(&self, obs: &[f64], rng: &mut R) -> Result<(Vec<usize>, f64)> {
        let (dists, _) = self.dists(obs)?;
        let action: Vec<usize> = dists.iter().map(|d| d.sample(rng)).collect();
        let lp = Self::joint_log_prob(&dists, &action);
        Ok((action, lp))
    }

    pub fn log_prob(&self, obs: &[f64], action: &[usize]) -> Result<f64> {
        self.check_action(action)?;
        let (dists, _) = self.dists(obs)?;
        Ok(Self::joint_log_prob(&dists, action))
    }

    /// Accumulate the gradient of `w_logp * log pi(action) + w_ent * H` into `grads`.
    pub fn accumulate(
        &self,
        cache: &Cache<f64>,
        dists: &[Categorical<f64>],
        action: &[usize],
        w_logp: f64,
        w_ent: f64,
        grads: &mut [f64],
    ) -> Result<()> {
        self.accumulate_heads(cache, dists, action, &vec![w_logp; self.heads], w_ent, grads)
    }

    /// As [`accumulate`](Self::accumulate) with a separate log-probability
    /// weight for each head.
    pub fn accumulate_heads(
        &self,
        cache: &Cache<f64>,
        dists: &[Categorical<f64>],
        action: &[usize],
        w_logp: &[f64],
        w_ent: f64,
        grads: &mut [f64],
    ) -> Result<()> {
        self.check_action(action)?;
        if w_logp.len() != self.heads {
            return Err(Error::Shape(format!("{} head weights for {} heads", w_logp.len(), self.heads)));
        }
        let mut g_out = Vec::with_capacity(self.heads * self.levels);
        for ((d, a), w) in dists.iter().zip(action).zip(w_logp) {
            let gl = d.log_prob_grad(*a);
            if w_ent != 0.0 {
                let ge = d.entropy_grad();
                g_out.extend(gl.iter().zip(&ge).map(|(l, e)| w * l + w_ent * e));
            } else {
                g_out.extend(gl.iter().map(|l| w * l));
            }
        }
        self.net.backward(cache, &g_out, grads)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fresh_policy_is_nearly_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = FactoredPolicy::new(2, &[64, 64], 2, 21, &mut rng).unwrap();
        let (dists, _) = p.dists(&[0.5, 0.5]).unwrap();
        for d in &dists {
            assert!((d.entropy() - 21f64.ln()).abs() < 1e-3);
        }
    }

    #[test]
    fn joint_log_prob_adds_heads() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut p = FactoredPolicy::new(2, &[8], 2, 4, &mut rng).unwrap();
        for x in p.net.params_mut() {
            *x *= 50.0;
        }
        let (dists, _) = p.dists(&[0.2, 0.9]).unwrap();
        let lp = p.log_prob(&[0.2, 0.9], &[1, 3]).unwrap();
        assert!((lp - dists[0].log_prob(1) - dists[1].log_prob(3)).abs() < 1e-15);
        assert!(p.log_prob(&[0.2, 0.9], &[1, 4]).is_err());
    }
}
