use serde::{Deserialize, Serialize};

/// Exponentially decaying exploration rate, `eps_max * decay_rate^t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    pub eps_max: f64,
    pub decay_rate: f64,
    pub t: u64,
}

impl EpsilonSchedule {
    pub fn new(eps_max: f64, decay_rate: f64) -> Self {
        Self { eps_max, decay_rate, t: 0 }
    }

    pub fn epsilon_at(&self, t: u64) -> f64 {
        // powi takes i32; large t underflows to 0 either way
        let t = i32::try_from(t).unwrap_or(i32::MAX);
        self.eps_max * self.decay_rate.powi(t)
    }

    pub fn current(&self) -> f64 {
        self.epsilon_at(self.t)
    }

    pub fn advance(&mut self) {
        self.t += 1;
    }
}
