use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateKind {
    /// `γ0` for emission (`ω >= 0`), `γ0 e^{-β|ω|}` for absorption.
    Flat,
    /// `γ0 ω / (1 - e^{-βω})`, continuous at `ω = 0` with value `γ0/β`.
    Ohmic,
}

/// Bath spectral rate `γ(ω)` obeying `γ(-ω) = γ(ω) e^{-βω}` by construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateModel {
    pub kind: RateKind,
    pub gamma0: f64,
    pub beta: f64,
}

impl RateModel {
    pub fn flat(gamma0: f64, beta: f64) -> Self {
        Self {
            kind: RateKind::Flat,
            gamma0,
            beta,
        }
    }

    pub fn ohmic(gamma0: f64, beta: f64) -> Self {
        Self {
            kind: RateKind::Ohmic,
            gamma0,
            beta,
        }
    }

    /// Rate for a jump that hands energy `omega` to the bath.
    pub fn rate(&self, omega: f64) -> f64 {
        match self.kind {
            RateKind::Flat => {
                if omega >= 0.0 {
                    self.gamma0
                } else {
                    self.gamma0 * (-self.beta * omega.abs()).exp()
                }
            }
            RateKind::Ohmic => {
                let x = self.beta * omega;
                // x / (1 - e^{-x}), evaluated without cancellation near zero
                let bose = if x.abs() < 1e-5 {
                    1.0 + x / 2.0 + x * x / 12.0
                } else {
                    x / -(-x).exp_m1()
                };
                self.gamma0 / self.beta * bose
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn flat_at_zero_is_gamma0() {
        assert_eq!(RateModel::flat(0.7, 2.0).rate(0.0), 0.7);
    }

    #[test]
    fn flat_detailed_balance_ratio() {
        let m = RateModel::flat(1.3, 0.8);
        for omega in [0.1, 1.0, 2.5] {
            assert_relative_eq!(
                m.rate(-omega) / m.rate(omega),
                (-0.8 * omega).exp(),
                max_relative = 1e-15
            );
        }
    }

    #[test]
    fn ohmic_zero_frequency_limit() {
        let m = RateModel::ohmic(2.0, 0.5);
        // Oracle: plain evaluation of ω/(1-e^{-βω}) at ω = 1e-8 is accurate
        // to ~1e-8 relative; the limit value is γ0/β = 4.
        let omega = 1e-8;
        let naive = m.gamma0 * omega / (1.0 - (-m.beta * omega).exp());
        assert_relative_eq!(m.rate(0.0), 4.0, max_relative = 1e-15);
        assert_relative_eq!(m.rate(omega), naive, max_relative = 1e-7);
        assert_relative_eq!(m.rate(1e-3), 2.0 * 1e-3 / -(-0.5e-3f64).exp_m1(), max_relative = 1e-14);
    }

    #[test]
    fn detailed_balance_random_frequencies() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for model in [RateModel::flat(0.9, 1.7), RateModel::ohmic(0.9, 1.7)] {
            for _ in 0..100 {
                let omega: f64 = rng.random_range(-5.0..5.0);
                let lhs = model.rate(-omega);
                let rhs = model.rate(omega) * (-model.beta * omega).exp();
                assert_relative_eq!(lhs, rhs, max_relative = 1e-13);
                assert!(model.rate(omega) >= 0.0);
            }
        }
    }
}
