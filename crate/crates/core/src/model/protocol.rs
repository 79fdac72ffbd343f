use crate::error::{QslError, Result};
use crate::numerics::{pauli, CMatrix};

/// Time-dependent system Hamiltonian `H(t)`.
#[derive(Clone, Debug)]
pub enum HamiltonianProtocol {
    Constant(CMatrix),
    /// Entrywise linear interpolation between samples at strictly
    /// increasing `times`.
    LinearInterp {
        times: Vec<f64>,
        matrices: Vec<CMatrix>,
    },
    /// `(Δ/2) σx + (v t / 2) σz`.
    LandauZener {
        delta: f64,
        v: f64,
    },
    /// `(ε/2) σz + (A/2) cos(ν t) σx`.
    TwoLevelDrive {
        epsilon: f64,
        amplitude: f64,
        frequency: f64,
    },
}

impl HamiltonianProtocol {
    pub fn dim(&self) -> usize {
        match self {
            Self::Constant(m) => m.nrows(),
            Self::LinearInterp { matrices, .. } => matrices.first().map_or(0, |m| m.nrows()),
            Self::LandauZener { .. } | Self::TwoLevelDrive { .. } => 2,
        }
    }

    /// Closed interval on which `H(t)` is defined.
    pub fn range(&self) -> (f64, f64) {
        match self {
            Self::LinearInterp { times, .. } => (times[0], *times.last().unwrap()),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn has_analytic_derivative(&self) -> bool {
        !matches!(self, Self::LinearInterp { .. })
    }

    fn check_range(&self, t: f64) -> Result<()> {
        let (start, end) = self.range();
        let slack = 1e-9 * (1.0 + t.abs());
        if !t.is_finite() || t < start - slack || t > end + slack {
            return Err(QslError::OutOfRange { t, start, end });
        }
        Ok(())
    }

    pub fn hamiltonian_at(&self, t: f64) -> Result<CMatrix> {
        self.check_range(t)?;
        Ok(match self {
            Self::Constant(m) => m.clone(),
            Self::LinearInterp { times, matrices } => {
                if times.len() == 1 {
                    return Ok(matrices[0].clone());
                }
                let t = t.clamp(times[0], *times.last().unwrap());
                let k = times.partition_point(|&s| s <= t).clamp(1, times.len() - 1);
                let w = (t - times[k - 1]) / (times[k] - times[k - 1]);
                matrices[k - 1].scale(1.0 - w) + matrices[k].scale(w)
            }
            Self::LandauZener { delta, v } => pauli::x().scale(delta / 2.0) + pauli::z().scale(v * t / 2.0),
            Self::TwoLevelDrive {
                epsilon,
                amplitude,
                frequency,
            } => pauli::z().scale(epsilon / 2.0) + pauli::x().scale(amplitude / 2.0 * (frequency * t).cos()),
        })
    }

    /// `dH/dt`; analytic where available, otherwise a central difference with
    /// step `h` (one-sided at the ends of the protocol range).
    pub fn hamiltonian_derivative(&self, t: f64, h: f64) -> Result<CMatrix> {
        self.check_range(t)?;
        let dim = self.dim();
        Ok(match self {
            Self::Constant(_) => CMatrix::zeros(dim, dim),
            Self::LandauZener { v, .. } => pauli::z().scale(v / 2.0),
            Self::TwoLevelDrive {
                amplitude, frequency, ..
            } => pauli::x().scale(-amplitude / 2.0 * frequency * (frequency * t).sin()),
            Self::LinearInterp { .. } => {
                let (start, end) = self.range();
                let lo = (t - h).max(start);
                let hi = (t + h).min(end);
                if hi <= lo {
                    return Ok(CMatrix::zeros(dim, dim));
                }
                (self.hamiltonian_at(hi)? - self.hamiltonian_at(lo)?).unscale(hi - lo)
            }
        })
    }
}
