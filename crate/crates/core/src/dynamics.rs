//! Lindblad generator and fixed-step RK4 trajectories.

use crate::error::{QslError, Result};
use crate::model::{JumpOperatorSet, Scenario};
use crate::numerics::{
    anticommutator, c, check_hermitian, commutator, eigh_unchecked, hermitize, trace, trace_distance, CMatrix,
    EigenSystem, C64,
};

const TRACE_TOL: f64 = 1e-9;

/// Hermitian, unit-trace, positive semidefinite matrix together with its
/// spectral decomposition `ρ = Σ p_n |n⟩⟨n|`.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    matrix: CMatrix,
    spectrum: EigenSystem,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix, herm_tol: f64, psd_tol: f64) -> Result<Self> {
        check_hermitian(&matrix, herm_tol)?;
        let tr = trace(&matrix);
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(QslError::Validation(format!("density matrix trace {tr} != 1")));
        }
        let matrix = hermitize(&matrix);
        let spectrum = eigh_unchecked(&matrix);
        if spectrum.values[0] < -psd_tol {
            return Err(QslError::Validation(format!(
                "density matrix not positive (min eigenvalue {:.3e})",
                spectrum.values[0]
            )));
        }
        Ok(Self { matrix, spectrum })
    }

    pub fn from_pure(vector: &[C64]) -> Result<Self> {
        let norm = vector.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(QslError::Validation("pure state vector has zero norm".into()));
        }
        let n = vector.len();
        let psi: Vec<C64> = vector.iter().map(|z| z / norm).collect();
        let matrix = CMatrix::from_fn(n, n, |i, j| psi[i] * psi[j].conj());
        let spectrum = eigh_unchecked(&matrix);
        Ok(Self { matrix, spectrum })
    }

    /// The spectrum is reordered so populations ascend.
    pub fn from_spectrum(spectrum: EigenSystem) -> Self {
        let mut order: Vec<usize> = (0..spectrum.dim()).collect();
        order.sort_by(|&a, &b| spectrum.values[a].total_cmp(&spectrum.values[b]));
        let spectrum = EigenSystem {
            values: order.iter().map(|&k| spectrum.values[k]).collect(),
            vectors: spectrum.vectors.select_columns(&order),
        };
        let matrix = hermitize(&spectrum.reconstruct());
        Self { matrix, spectrum }
    }

    /// Hermitize and renormalize `matrix`, then require positivity within
    /// `psd_tol`; `t` labels the failure.
    pub fn repair(matrix: &CMatrix, psd_tol: f64, t: f64) -> Result<Self> {
        let m = hermitize(matrix);
        let tr = trace(&m).re;
        if !tr.is_finite() || tr <= 0.0 {
            return Err(QslError::NonFinite);
        }
        let matrix = m.unscale(tr);
        let spectrum = eigh_unchecked(&matrix);
        let min_eigenvalue = spectrum.values[0];
        if !min_eigenvalue.is_finite() {
            return Err(QslError::NonFinite);
        }
        if min_eigenvalue < -psd_tol {
            return Err(QslError::PositivityLost { t, min_eigenvalue });
        }
        Ok(Self { matrix, spectrum })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn spectrum(&self) -> &EigenSystem {
        &self.spectrum
    }

    /// Eigenvalues `p_n`, ascending.
    pub fn populations(&self) -> &[f64] {
        &self.spectrum.values
    }

    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        trace_distance(&self.matrix, &other.matrix)
    }
}

/// `D[ρ] = Σ γ(ω) (L ρ L† - ½{L†L, ρ})` with the rates carried by `jumps`.
pub fn dissipator_apply(rho: &CMatrix, jumps: &JumpOperatorSet) -> Result<CMatrix> {
    let dim = rho.nrows();
    if jumps.dim() != dim {
        return Err(QslError::DimensionMismatch {
            expected: dim,
            found: jumps.dim(),
        });
    }
    let mut out = CMatrix::zeros(dim, dim);
    for op in &jumps.ops {
        if op.rate == 0.0 {
            continue;
        }
        let l = &op.matrix;
        let l_dag = l.adjoint();
        let jump = l * rho * &l_dag;
        let decay = anticommutator(&(&l_dag * l), rho).scale(0.5);
        out += (jump - decay).scale(op.rate);
    }
    Ok(out)
}

/// `-(i/ħ)[H, ρ] + λ D[ρ]`.
pub fn lindbladian_apply(
    rho: &CMatrix,
    hamiltonian: &CMatrix,
    jumps: &JumpOperatorSet,
    lambda: f64,
    hbar: f64,
) -> Result<CMatrix> {
    let unitary = commutator(hamiltonian, rho)? * C64::new(0.0, -1.0 / hbar);
    if lambda == 0.0 {
        return Ok(unitary);
    }
    Ok(unitary + dissipator_apply(rho, jumps)?.scale(lambda))
}

/// Generator of the scenario at time `t` applied to `rho`.
pub fn generator_at(scenario: &Scenario, t: f64, rho: &CMatrix) -> Result<CMatrix> {
    let slice = scenario.slice(t)?;
    lindbladian_apply(rho, &slice.hamiltonian, &slice.jumps, scenario.lambda, scenario.hbar)
}

/// The raw RK4 update `ρ(t) -> ρ(t + dt)`, before positivity repair; jump
/// operators are rebuilt at every stage time.
pub fn rk4_update(rho: &DensityMatrix, scenario: &Scenario, t: f64, dt: f64) -> Result<CMatrix> {
    let r0 = rho.matrix();
    let half = c(0.5 * dt);
    let k1 = generator_at(scenario, t, r0)?;
    let mid = scenario.slice(t + 0.5 * dt)?;
    let mid_gen = |r: &CMatrix| lindbladian_apply(r, &mid.hamiltonian, &mid.jumps, scenario.lambda, scenario.hbar);
    let k2 = mid_gen(&(r0 + &k1 * half))?;
    let k3 = mid_gen(&(r0 + &k2 * half))?;
    let k4 = generator_at(scenario, t + dt, &(r0 + &k3 * c(dt)))?;
    Ok(r0 + (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(dt / 6.0))
}

/// One RK4 step of size `dt` from `t`.
pub fn step_with(rho: &DensityMatrix, scenario: &Scenario, t: f64, dt: f64) -> Result<DensityMatrix> {
    let next = rk4_update(rho, scenario, t, dt)?;
    DensityMatrix::repair(&next, scenario.tolerances.psd_tol, t + dt)
}

/// One step of the scenario grid spacing.
pub fn step(rho: &DensityMatrix, scenario: &Scenario, t: f64) -> Result<DensityMatrix> {
    step_with(rho, scenario, t, scenario.grid.spacing())
}

/// States on a uniform time grid.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub scenario: Scenario,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn duration(&self) -> f64 {
        match (self.times.first(), self.times.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    pub fn first(&self) -> &DensityMatrix {
        &self.states[0]
    }

    pub fn last(&self) -> &DensityMatrix {
        self.states.last().unwrap()
    }
}

/// Integrate the scenario over its full grid.
pub fn evolve(scenario: &Scenario) -> Result<Trajectory> {
    let times = scenario.grid.times();
    let mut states = Vec::with_capacity(times.len());
    states.push(scenario.initial_state()?);
    for w in times.windows(2) {
        let next = step_with(states.last().unwrap(), scenario, w[0], w[1] - w[0])?;
        states.push(next);
    }
    Ok(Trajectory {
        times,
        states,
        scenario: scenario.clone(),
    })
}
