//! Limiting regimes of the open-system speed limit: isolated dynamics,
//! relaxation-dominated (quasi-adiabatic) driving and the classical Pauli
//! limit.

use nalgebra::DMatrix;

use crate::dynamics::{evolve, Trajectory};
use crate::error::{QslError, Result};
use crate::model::{gibbs_state, Coupling, InitialState, Scenario};
use crate::numerics::{commutator, eigh, max_abs, trace_norm, CMatrix, EigenSystem, C64};
use crate::speedlimit::{dissipative_hamiltonian, energy_fluctuation, split_generator, time_average};

/// `T ħ / ⟨ΔE⟩`, the isolated-system bound.
pub fn mt_bound(trajectory: &Trajectory) -> Result<f64> {
    if trajectory.is_empty() {
        return Err(QslError::EmptyTrajectory);
    }
    let scenario = &trajectory.scenario;
    if scenario.rate_scale() > 0.0 {
        return Err(QslError::NotDissipationless(scenario.rate_scale()));
    }
    let spreads = trajectory
        .times
        .iter()
        .zip(&trajectory.states)
        .map(|(&t, rho)| Ok(energy_fluctuation(rho.matrix(), &scenario.protocol.hamiltonian_at(t)?)))
        .collect::<Result<Vec<f64>>>()?;
    let avg = time_average(&trajectory.times, &spreads);
    let distance = trajectory.first().trace_distance(trajectory.last())?;
    Ok(if avg == 0.0 {
        0.0
    } else {
        distance * scenario.hbar / avg
    })
}

#[derive(Clone, Debug)]
pub struct CounterDiabaticData {
    pub t: f64,
    /// `Σ_{m≠n} iħ ⟨ε_m|∂H|ε_n⟩ / (ε_n - ε_m) |ε_m⟩⟨ε_n|`.
    pub h_cd: CMatrix,
    /// `√Tr[H_cd² ρ_eq]`.
    pub delta_e_cd: f64,
    /// Fubini-Study metric `g^n = Σ_{m≠n} |⟨ε_m|∂H|ε_n⟩|² / (ε_n - ε_m)²`,
    /// indexed like `energies`.
    pub g_fs: Vec<f64>,
    pub p_eq: Vec<f64>,
    pub energies: EigenSystem,
}

pub fn counter_diabatic(
    t: f64,
    hamiltonian: &CMatrix,
    dh_dt: &CMatrix,
    beta: f64,
    hbar: f64,
    gap_tol: f64,
    herm_tol: f64,
) -> Result<CounterDiabaticData> {
    let energies = eigh(hamiltonian, herm_tol)?;
    let eps = &energies.values;
    if let Some(gap) = eps.windows(2).map(|w| w[1] - w[0]).find(|&g| g < gap_tol) {
        return Err(QslError::DegenerateSpectrum { gap });
    }
    let dim = energies.dim();
    let dh = energies.to_basis(dh_dt);
    let mut cd = CMatrix::zeros(dim, dim);
    let mut g_fs = vec![0.0; dim];
    for m in 0..dim {
        for n in 0..dim {
            if m == n {
                continue;
            }
            let gap = eps[n] - eps[m];
            cd[(m, n)] = dh[(m, n)] * C64::new(0.0, hbar / gap);
            g_fs[n] += dh[(m, n)].norm_sqr() / (gap * gap);
        }
    }
    let eq = gibbs_state(hamiltonian, beta, herm_tol)?;
    let p_eq: Vec<f64> = {
        let in_basis = energies.to_basis(eq.matrix());
        (0..dim).map(|n| in_basis[(n, n)].re).collect()
    };
    let delta_e_cd = (0..dim)
        .map(|n| p_eq[n] * (0..dim).map(|m| cd[(m, n)].norm_sqr()).sum::<f64>())
        .sum::<f64>()
        .sqrt();
    Ok(CounterDiabaticData {
        t,
        h_cd: energies.from_basis(&cd),
        delta_e_cd,
        g_fs,
        p_eq,
        energies,
    })
}

pub fn counter_diabatic_at(scenario: &Scenario, t: f64) -> Result<CounterDiabaticData> {
    let tol = &scenario.tolerances;
    counter_diabatic(
        t,
        &scenario.protocol.hamiltonian_at(t)?,
        &scenario.hamiltonian_derivative(t)?,
        scenario.beta,
        scenario.hbar,
        tol.gap_tol,
        tol.herm_tol,
    )
}

#[derive(Clone, Copy, Debug)]
pub struct QuasiAdiabaticRow {
    pub lambda: f64,
    pub t: f64,
    /// `‖H_D - H_cd‖_tr`.
    pub e_cd: f64,
    /// `T(ρ(t), ρ_eq(t))`.
    pub d_eq: f64,
}

#[derive(Clone, Debug)]
pub struct QuasiAdiabaticTable {
    pub rows: Vec<QuasiAdiabaticRow>,
    /// `k` in `e ~ λ^{-k}`; `None` when some `e` vanishes.
    pub exponent_e: Option<f64>,
    pub exponent_d: Option<f64>,
}

/// Evolve from `ρ_eq(t0)` at rate scale `lambda` to the protocol midpoint
/// and compare `H_D` with `H_cd` there.
pub fn quasi_adiabatic_point(scenario: &Scenario, lambda: f64) -> Result<QuasiAdiabaticRow> {
    let grid = &scenario.grid;
    let mid = 0.5 * (grid.t0 + grid.t1);
    let mut run = scenario.with_lambda(lambda).with_grid(grid.t0, mid, grid.dt);
    run.initial = InitialState::Gibbs;
    let trajectory = evolve(&run)?;
    let rho = trajectory.last();
    let slice = run.slice(mid)?;
    let tol = &run.tolerances;
    let split = split_generator(rho, &slice.hamiltonian, &slice.jumps, lambda, run.hbar, tol.pop_gap_tol)?;
    let h_d = dissipative_hamiltonian(&split.basis, &split.d_nondiag, run.hbar, tol.pop_gap_tol);
    let cd = counter_diabatic_at(&run, mid)?;
    let eq = gibbs_state(&slice.hamiltonian, run.beta, tol.herm_tol)?;
    Ok(QuasiAdiabaticRow {
        lambda,
        t: mid,
        e_cd: trace_norm(&(h_d.matrix - cd.h_cd)),
        d_eq: rho.trace_distance(&eq)?,
    })
}

pub fn quasi_adiabatic_check(scenario: &Scenario, lambdas: &[f64]) -> Result<QuasiAdiabaticTable> {
    if lambdas.len() < 3 || lambdas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(QslError::Validation(
            "quasi-adiabatic check needs at least three ascending lambda values".into(),
        ));
    }
    let rows = lambdas
        .iter()
        .map(|&l| quasi_adiabatic_point(scenario, l))
        .collect::<Result<Vec<_>>>()?;
    let fit = |f: fn(&QuasiAdiabaticRow) -> f64| {
        let ys: Vec<f64> = rows.iter().map(f).collect();
        decay_exponent(lambdas, &ys)
    };
    Ok(QuasiAdiabaticTable {
        exponent_e: fit(|r| r.e_cd),
        exponent_d: fit(|r| r.d_eq),
        rows,
    })
}

/// Least-squares `k` in `y = C x^{-k}` on log-log axes.
pub fn decay_exponent(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 2 || ys.iter().chain(xs).any(|&v| v.is_nan() || v <= 0.0) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    Some(-sxy / sxx)
}

/// Check the classical conditions: `[H(t0), H(t)] = 0` on the grid, a
/// nondegenerate `H(t0)`, and an initial state diagonal in its eigenbasis.
/// Returns the fixed eigenbasis.
pub fn classical_basis(scenario: &Scenario) -> Result<EigenSystem> {
    let tol = &scenario.tolerances;
    let h0 = scenario.protocol.hamiltonian_at(scenario.grid.t0)?;
    let basis = eigh(&h0, tol.herm_tol)?;
    if basis.values.windows(2).any(|w| w[1] - w[0] < tol.gap_tol) {
        return Err(QslError::NotClassical("H(t0) has a degenerate spectrum".into()));
    }
    for t in scenario.grid.times() {
        let h = scenario.protocol.hamiltonian_at(t)?;
        let defect = max_abs(&commutator(&h0, &h)?);
        if defect > 1e-10 * (max_abs(&h0) * max_abs(&h)).max(1.0) {
            return Err(QslError::NotClassical(format!(
                "[H(t0), H(t)] = {defect:.3e} at t = {t}"
            )));
        }
    }
    let rho0 = basis.to_basis(scenario.initial_state()?.matrix());
    let dim = basis.dim();
    for m in 0..dim {
        for n in 0..dim {
            if m != n && rho0[(m, n)].norm() > 1e-10 {
                return Err(QslError::NotClassical(
                    "initial state has coherence in the energy eigenbasis".into(),
                ));
            }
        }
    }
    Ok(basis)
}

/// `M^α_{nm} = λ γ_α(ε_m - ε_n) |⟨ε_n|L_α|ε_m⟩|²`, the rate of `m -> n`, one
/// matrix per coupling. Energies are read off the diagonal of `H` in `basis`.
pub fn pauli_rates(
    basis: &EigenSystem,
    hamiltonian: &CMatrix,
    couplings: &[Coupling],
    lambda: f64,
) -> Vec<DMatrix<f64>> {
    let dim = basis.dim();
    let hb = basis.to_basis(hamiltonian);
    let eps: Vec<f64> = (0..dim).map(|n| hb[(n, n)].re).collect();
    couplings
        .iter()
        .map(|c| {
            let l = basis.to_basis(&c.matrix);
            DMatrix::from_fn(dim, dim, |n, m| {
                if n == m {
                    0.0
                } else {
                    lambda * c.rate.rate(eps[m] - eps[n]) * l[(n, m)].norm_sqr()
                }
            })
        })
        .collect()
}

fn master_rhs(rates: &[DMatrix<f64>], p: &[f64]) -> Vec<f64> {
    let dim = p.len();
    let mut out = vec![0.0; dim];
    for m in rates {
        for n in 0..dim {
            for k in 0..dim {
                if n != k {
                    let flow = m[(n, k)] * p[k];
                    out[n] += flow;
                    out[k] -= flow;
                }
            }
        }
    }
    out
}

/// Populations `P_n(t)` of the Pauli master equation on the scenario grid.
#[derive(Clone, Debug)]
pub struct ClassicalTrajectory {
    pub times: Vec<f64>,
    pub populations: Vec<Vec<f64>>,
    pub basis: EigenSystem,
    pub scenario: Scenario,
}

impl ClassicalTrajectory {
    pub fn rates_at(&self, t: f64) -> Result<Vec<DMatrix<f64>>> {
        let sc = &self.scenario;
        Ok(pauli_rates(
            &self.basis,
            &sc.protocol.hamiltonian_at(t)?,
            &sc.couplings,
            sc.lambda,
        ))
    }
}

/// RK4 on the Pauli master equation, with the same stage times as the
/// quantum integrator.
pub fn evolve_classical(scenario: &Scenario) -> Result<ClassicalTrajectory> {
    let basis = classical_basis(scenario)?;
    let rho0 = basis.to_basis(scenario.initial_state()?.matrix());
    let dim = basis.dim();
    let mut p: Vec<f64> = (0..dim).map(|n| rho0[(n, n)].re).collect();
    let times = scenario.grid.times();
    let rates = |t: f64| -> Result<Vec<DMatrix<f64>>> {
        Ok(pauli_rates(
            &basis,
            &scenario.protocol.hamiltonian_at(t)?,
            &scenario.couplings,
            scenario.lambda,
        ))
    };
    let axpy = |p: &[f64], k: &[f64], h: f64| -> Vec<f64> { p.iter().zip(k).map(|(a, b)| a + h * b).collect() };
    let mut populations = vec![p.clone()];
    for w in times.windows(2) {
        let (t, dt) = (w[0], w[1] - w[0]);
        let r0 = rates(t)?;
        let rm = rates(t + 0.5 * dt)?;
        let r1 = rates(t + dt)?;
        let k1 = master_rhs(&r0, &p);
        let k2 = master_rhs(&rm, &axpy(&p, &k1, 0.5 * dt));
        let k3 = master_rhs(&rm, &axpy(&p, &k2, 0.5 * dt));
        let k4 = master_rhs(&r1, &axpy(&p, &k3, dt));
        for n in 0..dim {
            p[n] += dt / 6.0 * (k1[n] + 2.0 * k2[n] + 2.0 * k3[n] + k4[n]);
        }
        populations.push(p.clone());
    }
    Ok(ClassicalTrajectory {
        times,
        populations,
        basis,
        scenario: scenario.clone(),
    })
}

/// Classical `σ̇ = Σ_α Σ_{n≠m} M_{nm} P_m ln(M_{nm} P_m / M_{mn} P_n)`, with the
/// same `p_floor` clamp and negligible-traffic cut as the quantum version.
pub fn classical_entropy_production(rates: &[DMatrix<f64>], p: &[f64], p_floor: f64) -> Result<f64> {
    let scale = rates.iter().map(|m| m.max()).fold(0.0, f64::max);
    let floor = 1e-14 * scale;
    let ln_p: Vec<f64> = p.iter().map(|x| x.max(p_floor).ln()).collect();
    let mut sigma = 0.0;
    for m in rates {
        for n in 0..p.len() {
            for k in 0..p.len() {
                let forward = m[(n, k)] * p[k].max(0.0);
                if n == k || forward < floor || forward == 0.0 {
                    continue;
                }
                let reverse = m[(k, n)];
                if reverse <= 0.0 {
                    return Err(QslError::DivergentEntropyProduction {
                        omega: f64::NAN,
                        forward,
                    });
                }
                sigma += forward * (m[(n, k)].ln() + ln_p[k] - reverse.ln() - ln_p[n]);
            }
        }
    }
    Ok(sigma)
}

/// Classical `A = Σ_α Σ_{n≠m} M_{nm} P_m`.
pub fn classical_activity(rates: &[DMatrix<f64>], p: &[f64]) -> f64 {
    rates
        .iter()
        .map(|m| {
            let mut acc = 0.0;
            for n in 0..p.len() {
                for k in 0..p.len() {
                    if n != k {
                        acc += m[(n, k)] * p[k].max(0.0);
                    }
                }
            }
            acc
        })
        .sum()
}

#[derive(Clone, Copy, Debug)]
pub struct ClassicalBound {
    pub tau: f64,
    /// Total variation `½ Σ |P_n(0) - P_n(τ)|`.
    pub distance: f64,
    pub avg_sigma: f64,
    pub avg_activity: f64,
    /// `T / √(½⟨σ̇⟩⟨A⟩)`.
    pub bound: f64,
}

pub fn classical_speed_limit(trajectory: &ClassicalTrajectory) -> Result<ClassicalBound> {
    let (Some(first), Some(last)) = (trajectory.populations.first(), trajectory.populations.last()) else {
        return Err(QslError::EmptyTrajectory);
    };
    let p_floor = trajectory.scenario.tolerances.p_floor;
    let mut sigma = Vec::with_capacity(trajectory.times.len());
    let mut activity = Vec::with_capacity(trajectory.times.len());
    for (&t, p) in trajectory.times.iter().zip(&trajectory.populations) {
        let rates = trajectory.rates_at(t)?;
        sigma.push(classical_entropy_production(&rates, p, p_floor)?);
        activity.push(classical_activity(&rates, p));
    }
    let distance = 0.5 * first.iter().zip(last).map(|(a, b)| (a - b).abs()).sum::<f64>();
    let avg_sigma = time_average(&trajectory.times, &sigma);
    let avg_activity = time_average(&trajectory.times, &activity);
    let den = (0.5 * avg_sigma.max(0.0) * avg_activity).sqrt();
    Ok(ClassicalBound {
        tau: trajectory.times.last().unwrap() - trajectory.times[0],
        distance,
        avg_sigma,
        avg_activity,
        bound: if den == 0.0 { 0.0 } else { distance / den },
    })
}
