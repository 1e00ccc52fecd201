use serde::{Deserialize, Serialize};

/// Proportional controller for the fake-loss weight `k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumState {
    /// Always within `[0, 1]`.
    pub k: f64,
    /// Gain of the update.
    pub lambda: f64,
    /// Target ratio of fake to real reconstruction loss.
    pub gamma: f64,
}

impl EquilibriumState {
    pub fn new(k: f64, lambda: f64, gamma: f64) -> Self {
        Self {
            k: k.clamp(0.0, 1.0),
            lambda,
            gamma,
        }
    }

    /// `k ← clamp(k + λ(γ·loss_real − loss_gen), 0, 1)`
    pub fn update_k(self, loss_real: f64, loss_gen: f64) -> Self {
        let k = self.k + self.lambda * (self.gamma * loss_real - loss_gen);
        Self {
            k: k.clamp(0.0, 1.0),
            ..self
        }
    }
}

/// `M = loss_real + |γ·loss_real − loss_gen|`. Logged, never fed back.
pub fn convergence_measure(loss_real: f64, loss_gen: f64, gamma: f64) -> f64 {
    loss_real + (gamma * loss_real - loss_gen).abs()
}
