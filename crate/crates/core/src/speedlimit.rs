//! Generator split, velocity terms and the open-system speed limit
//! `τ ≥ T(ρ(0), ρ(τ)) / (⟨ΔE⟩/ħ + ⟨ΔE_D⟩/ħ + √(½⟨σ̇⟩⟨A⟩))`.

use rayon::prelude::*;

use crate::dynamics::{dissipator_apply, DensityMatrix, Trajectory};
use crate::error::{QslError, Result};
use crate::model::{JumpOperatorSet, Scenario};
use crate::numerics::{commutator, eigh_unchecked, max_abs, trace_norm, trace_product, CMatrix, EigenSystem, C64};
use crate::thermo::{entropy_flux_of, heat_flux, transition_matrix};

/// Eigenbasis of `ρ` in which every block of (near-)equal populations also
/// diagonalizes `∂ρ`.
///
/// Inside such a block the eigenvectors of `ρ` are arbitrary; this choice
/// makes the diagonal entries of `∂ρ` the actual eigenvalue velocities.
pub fn adapted_eigenbasis(spectrum: &EigenSystem, rho_dot: &CMatrix, pop_gap_tol: f64) -> EigenSystem {
    let mut out = spectrum.clone();
    for cluster in spectrum.clusters(pop_gap_tol) {
        let k = cluster.len();
        if k < 2 {
            continue;
        }
        let dim = spectrum.dim();
        let mut v = CMatrix::zeros(dim, k);
        for (j, &idx) in cluster.iter().enumerate() {
            v.set_column(j, &spectrum.vectors.column(idx));
        }
        let block = v.adjoint() * rho_dot * &v;
        let rot = eigh_unchecked(&block);
        let rotated = &v * &rot.vectors;
        for (j, &idx) in cluster.iter().enumerate() {
            out.vectors.set_column(idx, &rotated.column(j));
        }
    }
    out
}

/// `∂ρ = -(i/ħ)[H, ρ] + D_d + D_nd`, with the dissipative parts already
/// multiplied by `λ`. All matrices are in the lab frame.
#[derive(Clone, Debug)]
pub struct GeneratorSplit {
    pub unitary_part: CMatrix,
    pub d_diag: CMatrix,
    pub d_nondiag: CMatrix,
    pub basis: EigenSystem,
}

impl GeneratorSplit {
    pub fn rho_dot(&self) -> CMatrix {
        &self.unitary_part + &self.d_diag + &self.d_nondiag
    }

    /// `∂_t p_n = ⟨n|λ D[ρ]|n⟩`.
    pub fn population_rates(&self) -> Vec<f64> {
        let d = self.basis.to_basis(&self.d_diag);
        (0..self.basis.dim()).map(|n| d[(n, n)].re).collect()
    }
}

pub fn split_generator(
    rho: &DensityMatrix,
    hamiltonian: &CMatrix,
    jumps: &JumpOperatorSet,
    lambda: f64,
    hbar: f64,
    pop_gap_tol: f64,
) -> Result<GeneratorSplit> {
    let dim = rho.dim();
    let unitary_part = commutator(hamiltonian, rho.matrix())? * C64::new(0.0, -1.0 / hbar);
    let dissipative = if lambda == 0.0 {
        CMatrix::zeros(dim, dim)
    } else {
        dissipator_apply(rho.matrix(), jumps)?.scale(lambda)
    };
    let basis = adapted_eigenbasis(rho.spectrum(), &(&unitary_part + &dissipative), pop_gap_tol);
    let in_basis = basis.to_basis(&dissipative);
    let mut diag = CMatrix::zeros(dim, dim);
    let mut nondiag = in_basis;
    for n in 0..dim {
        diag[(n, n)] = nondiag[(n, n)];
        nondiag[(n, n)] = C64::new(0.0, 0.0);
    }
    Ok(GeneratorSplit {
        unitary_part,
        d_diag: basis.from_basis(&diag),
        d_nondiag: basis.from_basis(&nondiag),
        basis,
    })
}

/// `√(Tr[H²ρ] - Tr[Hρ]²)`.
pub fn energy_fluctuation(rho: &CMatrix, hamiltonian: &CMatrix) -> f64 {
    let mean = trace_product(hamiltonian, rho).re;
    let second = trace_product(&(hamiltonian * hamiltonian), rho).re;
    (second - mean * mean).max(0.0).sqrt()
}

/// A generator with singular elements removed.
#[derive(Clone, Debug)]
pub struct RegularizedGenerator {
    pub matrix: CMatrix,
    /// Unordered pairs `m ≠ n` with `|p_n - p_m| < pop_gap_tol`, whose
    /// elements were set to zero.
    pub zeroed_pairs: usize,
}

// Σ_{m≠n} iħ ⟨m|X|n⟩ / (p_n - p_m) |m⟩⟨n|
fn population_gap_generator(basis: &EigenSystem, x: &CMatrix, hbar: f64, pop_gap_tol: f64) -> RegularizedGenerator {
    let dim = basis.dim();
    let xb = basis.to_basis(x);
    let p = &basis.values;
    let mut g = CMatrix::zeros(dim, dim);
    let mut zeroed_pairs = 0;
    for m in 0..dim {
        for n in (m + 1)..dim {
            let gap = p[n] - p[m];
            if gap.abs() < pop_gap_tol {
                zeroed_pairs += 1;
                continue;
            }
            g[(m, n)] = xb[(m, n)] * C64::new(0.0, hbar / gap);
            g[(n, m)] = g[(m, n)].conj();
        }
    }
    RegularizedGenerator {
        matrix: basis.from_basis(&g),
        zeroed_pairs,
    }
}

/// `H_D = Σ_{m≠n} iħ ⟨m|D[ρ]|n⟩ / (p_n - p_m) |m⟩⟨n|` in the eigenbasis
/// `basis` of `ρ`; `D_nd = -(i/ħ)[H_D, ρ]` on all retained elements.
pub fn dissipative_hamiltonian(
    basis: &EigenSystem,
    d_nondiag: &CMatrix,
    hbar: f64,
    pop_gap_tol: f64,
) -> RegularizedGenerator {
    population_gap_generator(basis, d_nondiag, hbar, pop_gap_tol)
}

/// `ΔE_D = √Tr[H_D² ρ]`.
pub fn bath_unitary_fluctuation(rho: &CMatrix, h_d: &CMatrix) -> f64 {
    trace_product(&(h_d * h_d), rho).re.max(0.0).sqrt()
}

/// `ξ = Σ_{m≠n} iħ ⟨m|∂ρ|n⟩ / (p_n - p_m) |m⟩⟨n|`, the generator that
/// transports the eigenvectors of `ρ`.
pub fn escort_generator(basis: &EigenSystem, rho_dot: &CMatrix, hbar: f64, pop_gap_tol: f64) -> RegularizedGenerator {
    population_gap_generator(basis, rho_dot, hbar, pop_gap_tol)
}

/// `H̃ = H - Σ |n⟩⟨n|H|n⟩⟨n|` over the eigenbasis of `ρ`.
pub fn off_diagonal_hamiltonian(basis: &EigenSystem, hamiltonian: &CMatrix) -> CMatrix {
    let mut hb = basis.to_basis(hamiltonian);
    for n in 0..basis.dim() {
        hb[(n, n)] = C64::new(0.0, 0.0);
    }
    basis.from_basis(&hb)
}

/// Norms and identities of one slice that enter the pointwise checks.
#[derive(Clone, Debug, Default)]
pub struct ComponentNorms {
    /// `‖[H, ρ]‖_tr / ħ`.
    pub unitary: f64,
    /// `‖D_nd[ρ]‖_tr`.
    pub nondiag: f64,
    /// `‖D_d[ρ]‖_tr`.
    pub diag: f64,
    /// `½ Σ_n |∂_t p_n|`.
    pub population_speed: f64,
    /// `max |ξ - H̃ - H_D|`, when no population pair was regularized.
    pub escort_residual: Option<f64>,
    /// `max(|ξ|, 1)`: scale for `escort_residual`.
    pub escort_scale: f64,
    /// `Tr[H_D ρ]`.
    pub hd_mean: f64,
    /// `max(|H_D|, 1)`: scale for `hd_mean`.
    pub hd_scale: f64,
    /// `Ṡ - βQ̇`, the second route to `σ̇`.
    pub sigma_from_fluxes: f64,
}

/// Velocity and thermodynamic terms at one instant.
#[derive(Clone, Debug)]
pub struct VelocityTerms {
    pub t: f64,
    pub delta_e: f64,
    pub delta_e_d: f64,
    pub sigma_dot: f64,
    pub activity: f64,
    pub heat_flux: f64,
    pub entropy_flux: f64,
    /// `‖∂ρ‖_tr`.
    pub lhs_norm: f64,
    pub term_unitary: f64,
    pub term_bath_unitary: f64,
    pub term_population: f64,
    pub degeneracy_flags: usize,
    /// `1 + ‖H‖_max/ħ + λ γ_max dim²`, the tolerance unit for pointwise
    /// checks.
    pub scale: f64,
    pub components: ComponentNorms,
}

impl VelocityTerms {
    pub fn rhs_sum(&self) -> f64 {
        self.term_unitary + self.term_bath_unitary + self.term_population
    }
}

pub fn instantaneous_terms(rho: &DensityMatrix, scenario: &Scenario, t: f64) -> Result<VelocityTerms> {
    let slice = scenario.slice(t)?;
    let h = &slice.hamiltonian;
    let hbar = scenario.hbar;
    let tol = &scenario.tolerances;
    let jumps = slice.jumps.scaled(scenario.lambda);
    let split = split_generator(rho, h, &slice.jumps, scenario.lambda, hbar, tol.pop_gap_tol)?;
    let basis = &split.basis;
    let rho_dot = split.rho_dot();

    let h_d = dissipative_hamiltonian(basis, &split.d_nondiag, hbar, tol.pop_gap_tol);
    let xi = escort_generator(basis, &rho_dot, hbar, tol.pop_gap_tol);
    let h_tilde = off_diagonal_hamiltonian(basis, h);

    let transitions = transition_matrix(basis, &jumps)?;
    let sigma_dot = transitions.entropy_production(tol.p_floor)?;
    let activity = transitions.activity();
    let entropy_flux = entropy_flux_of(&rho_dot, basis, tol.p_floor);
    let heat = heat_flux(rho.matrix(), &jumps)?;

    let delta_e = energy_fluctuation(rho.matrix(), h);
    let delta_e_d = bath_unitary_fluctuation(rho.matrix(), &h_d.matrix);
    let population_speed = 0.5 * split.population_rates().iter().map(|r| r.abs()).sum::<f64>();
    let escort_residual = (xi.zeroed_pairs == 0).then(|| max_abs(&(&xi.matrix - &h_tilde - &h_d.matrix)));

    let dim = rho.dim() as f64;
    Ok(VelocityTerms {
        t,
        delta_e,
        delta_e_d,
        sigma_dot,
        activity,
        heat_flux: heat,
        entropy_flux,
        lhs_norm: trace_norm(&rho_dot),
        term_unitary: delta_e / hbar,
        term_bath_unitary: delta_e_d / hbar,
        term_population: (0.5 * sigma_dot.max(0.0) * activity).sqrt(),
        degeneracy_flags: h_d.zeroed_pairs,
        scale: 1.0 + max_abs(h) / hbar + jumps.max_rate() * dim * dim,
        components: ComponentNorms {
            unitary: trace_norm(&split.unitary_part),
            nondiag: trace_norm(&split.d_nondiag),
            diag: trace_norm(&split.d_diag),
            population_speed,
            escort_residual,
            escort_scale: max_abs(&xi.matrix).max(1.0),
            hd_mean: trace_product(&h_d.matrix, rho.matrix()).re,
            hd_scale: max_abs(&h_d.matrix).max(1.0),
            sigma_from_fluxes: entropy_flux - scenario.beta * heat,
        },
    })
}

/// [`instantaneous_terms`] at every state of a trajectory, in parallel.
pub fn trajectory_terms(trajectory: &Trajectory) -> Result<Vec<VelocityTerms>> {
    trajectory
        .states
        .par_iter()
        .zip(trajectory.times.par_iter())
        .map(|(rho, &t)| instantaneous_terms(rho, &trajectory.scenario, t))
        .collect()
}

/// `τ⁻¹ ∫ f dt` by the trapezoid rule; a single sample is its own average.
pub fn time_average(times: &[f64], values: &[f64]) -> f64 {
    match times.len() {
        0 => 0.0,
        1 => values[0],
        _ => {
            let span = times[times.len() - 1] - times[0];
            if span <= 0.0 {
                return values.iter().sum::<f64>() / values.len() as f64;
            }
            let integral: f64 = times
                .windows(2)
                .zip(values.windows(2))
                .map(|(t, v)| 0.5 * (v[0] + v[1]) * (t[1] - t[0]))
                .sum();
            integral / span
        }
    }
}

/// Time series from which the trajectory-level bound is assembled.
#[derive(Clone, Debug, Default)]
pub struct VelocitySeries {
    pub times: Vec<f64>,
    pub delta_e: Vec<f64>,
    pub delta_e_d: Vec<f64>,
    pub sigma_dot: Vec<f64>,
    pub activity: Vec<f64>,
    pub lhs_norm: Vec<f64>,
}

impl VelocitySeries {
    pub fn from_terms(terms: &[VelocityTerms]) -> Self {
        Self {
            times: terms.iter().map(|v| v.t).collect(),
            delta_e: terms.iter().map(|v| v.delta_e).collect(),
            delta_e_d: terms.iter().map(|v| v.delta_e_d).collect(),
            sigma_dot: terms.iter().map(|v| v.sigma_dot).collect(),
            activity: terms.iter().map(|v| v.activity).collect(),
            lhs_norm: terms.iter().map(|v| v.lhs_norm).collect(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SpeedLimitReport {
    pub tau: f64,
    pub distance: f64,
    pub avg_delta_e: f64,
    pub avg_delta_e_d: f64,
    pub avg_sigma: f64,
    pub avg_activity: f64,
    pub avg_lhs_norm: f64,
    pub hbar: f64,
    pub bound: f64,
    pub tightness: f64,
    /// `T / ⟨‖∂ρ‖_tr⟩`.
    pub formal_bound: f64,
}

impl SpeedLimitReport {
    /// The three denominator terms, in order: energy, bath-unitary,
    /// population transfer.
    pub fn denominator_terms(&self) -> [f64; 3] {
        [
            self.avg_delta_e / self.hbar,
            self.avg_delta_e_d / self.hbar,
            (0.5 * self.avg_sigma.max(0.0) * self.avg_activity).sqrt(),
        ]
    }

    /// Fraction of the denominator carried by each term; zeros when the
    /// denominator vanishes.
    pub fn shares(&self) -> [f64; 3] {
        let terms = self.denominator_terms();
        let total: f64 = terms.iter().sum();
        if total == 0.0 {
            return [0.0; 3];
        }
        terms.map(|x| x / total)
    }
}

fn ratio_or_zero(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

pub fn bound_from_series(series: &VelocitySeries, distance: f64, hbar: f64) -> Result<SpeedLimitReport> {
    let times = &series.times;
    if times.is_empty() {
        return Err(QslError::EmptyTrajectory);
    }
    let avg = |v: &[f64]| time_average(times, v);
    let tau = times[times.len() - 1] - times[0];
    let mut report = SpeedLimitReport {
        tau,
        distance,
        avg_delta_e: avg(&series.delta_e),
        avg_delta_e_d: avg(&series.delta_e_d),
        avg_sigma: avg(&series.sigma_dot),
        avg_activity: avg(&series.activity),
        avg_lhs_norm: avg(&series.lhs_norm),
        hbar,
        bound: 0.0,
        tightness: 0.0,
        formal_bound: 0.0,
    };
    report.bound = ratio_or_zero(distance, report.denominator_terms().iter().sum());
    report.tightness = ratio_or_zero(report.bound, tau);
    report.formal_bound = ratio_or_zero(distance, report.avg_lhs_norm);
    Ok(report)
}

fn check_trajectory(trajectory: &Trajectory) -> Result<()> {
    if trajectory.is_empty() {
        return Err(QslError::EmptyTrajectory);
    }
    Ok(())
}

/// Evaluate the speed limit for terms already computed along `trajectory`.
pub fn report_for(trajectory: &Trajectory, terms: &[VelocityTerms]) -> Result<SpeedLimitReport> {
    check_trajectory(trajectory)?;
    let distance = trajectory.first().trace_distance(trajectory.last())?;
    bound_from_series(&VelocitySeries::from_terms(terms), distance, trajectory.scenario.hbar)
}

pub fn qsl_bound(trajectory: &Trajectory) -> Result<SpeedLimitReport> {
    check_trajectory(trajectory)?;
    report_for(trajectory, &trajectory_terms(trajectory)?)
}

/// `T / ⟨‖∂ρ‖_tr⟩`, with `0/0 = 0`.
pub fn formal_bound_check(trajectory: &Trajectory) -> Result<f64> {
    Ok(qsl_bound(trajectory)?.formal_bound)
}

/// `T / (⟨‖[H,ρ]‖_tr⟩/ħ + ⟨‖D_nd‖_tr⟩ + √(½⟨σ̇⟩⟨A⟩))`: the bound before the
/// coherent norms are replaced by energy fluctuations.
pub fn norm_level_bound(times: &[f64], distance: f64, terms: &[VelocityTerms]) -> f64 {
    let avg = |f: fn(&VelocityTerms) -> f64| time_average(times, &terms.iter().map(f).collect::<Vec<_>>());
    let population = (0.5 * avg(|v| v.sigma_dot).max(0.0) * avg(|v| v.activity)).sqrt();
    ratio_or_zero(
        distance,
        avg(|v| v.components.unitary) + avg(|v| v.components.nondiag) + population,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{evolve, lindbladian_apply};
    use crate::model::{gibbs_state, Coupling, HamiltonianProtocol, InitialState, RateModel, TimeGrid, Tolerances};
    use crate::numerics::{c, pauli, real_diagonal, DEFAULT_HERM_TOL};
    use crate::random;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const GAP: f64 = 1e-10;

    fn scenario(
        h: HamiltonianProtocol,
        couplings: Vec<Coupling>,
        lambda: f64,
        initial: InitialState,
        t1: f64,
        dt: f64,
    ) -> Scenario {
        Scenario {
            dim: h.dim(),
            hbar: 1.0,
            beta: 1.0,
            lambda,
            protocol: h,
            couplings,
            initial,
            grid: TimeGrid { t0: 0.0, t1, dt },
            tolerances: Tolerances::default(),
        }
    }

    fn damping(gamma0: f64, beta: f64) -> Vec<Coupling> {
        vec![Coupling {
            matrix: pauli::x(),
            rate: RateModel::flat(gamma0, beta),
        }]
    }

    fn plus_state() -> DensityMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::from_pure(&[c(s), c(s)]).unwrap()
    }

    fn random_case(seed: u64, dim: usize) -> (Scenario, DensityMatrix) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random::hermitian(&mut rng, dim, 1.0);
        let couplings = (0..2)
            .map(|_| Coupling {
                matrix: random::hermitian(&mut rng, dim, 0.8),
                rate: RateModel::ohmic(0.7, 1.0),
            })
            .collect();
        let rho = random::density_matrix(&mut rng, dim);
        let sc = scenario(
            HamiltonianProtocol::Constant(h),
            couplings,
            1.3,
            InitialState::Matrix(rho.clone()),
            1.0,
            0.01,
        );
        let state = DensityMatrix::new(rho, DEFAULT_HERM_TOL, 1e-8).unwrap();
        (sc, state)
    }

    #[test]
    fn split_without_dissipation_is_unitary() {
        let jumps =
            crate::model::build_jump_operators(&pauli::z(), &damping(1.0, 1.0), 1e-9, DEFAULT_HERM_TOL, 0.0).unwrap();
        let split = split_generator(&plus_state(), &pauli::z(), &jumps, 0.0, 1.0, GAP).unwrap();
        assert_eq!(max_abs(&split.d_diag), 0.0);
        assert_eq!(max_abs(&split.d_nondiag), 0.0);
    }

    #[test]
    fn diagonal_damping_has_no_nondiagonal_part() {
        let h = pauli::z().scale(0.5);
        let jumps = crate::model::build_jump_operators(&h, &damping(1.0, 1.0), 1e-9, DEFAULT_HERM_TOL, 0.0).unwrap();
        let rho = DensityMatrix::new(real_diagonal(&[0.8, 0.2]), DEFAULT_HERM_TOL, 1e-8).unwrap();
        let split = split_generator(&rho, &h, &jumps, 1.0, 1.0, GAP).unwrap();
        assert!(max_abs(&split.d_nondiag) < 1e-15);
        assert!(max_abs(&split.d_diag) > 0.1);
    }

    #[test]
    fn split_reconstructs_generator() {
        for seed in 0..5 {
            let (sc, rho) = random_case(seed, 3 + seed as usize % 2);
            let slice = sc.slice(0.0).unwrap();
            let split = split_generator(&rho, &slice.hamiltonian, &slice.jumps, sc.lambda, sc.hbar, GAP).unwrap();
            let direct = lindbladian_apply(rho.matrix(), &slice.hamiltonian, &slice.jumps, sc.lambda, sc.hbar).unwrap();
            assert!(max_abs(&(split.rho_dot() - direct)) < 1e-10);
            let nd = split.basis.to_basis(&split.d_nondiag);
            let d = split.basis.to_basis(&split.d_diag);
            for m in 0..rho.dim() {
                assert!(nd[(m, m)].norm() < 1e-12);
                for n in 0..rho.dim() {
                    if m != n {
                        assert!(d[(m, n)].norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn energy_fluctuation_examples() {
        let eps = 1.7;
        let h = pauli::z().scale(eps / 2.0);
        assert_eq!(energy_fluctuation(&pauli::ket_bra(2, 0, 0), &h), 0.0);
        assert_abs_diff_eq!(
            energy_fluctuation(plus_state().matrix(), &h),
            eps / 2.0,
            epsilon = 1e-15
        );
        let eq = gibbs_state(&h, 1.0 / eps, DEFAULT_HERM_TOL).unwrap();
        let pe = 1.0 / (1.0 + 1f64.exp());
        assert_abs_diff_eq!(
            energy_fluctuation(eq.matrix(), &h),
            eps * (pe * (1.0 - pe)).sqrt(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn dissipative_hamiltonian_reconstructs_nondiagonal_part() {
        let h = pauli::z().scale(0.5);
        let jumps = crate::model::build_jump_operators(&h, &damping(0.9, 1.0), 1e-9, DEFAULT_HERM_TOL, 0.0).unwrap();
        let rho = DensityMatrix::new(
            real_diagonal(&[0.7, 0.3]) + (pauli::x().scale(0.2) + pauli::y().scale(0.1)),
            DEFAULT_HERM_TOL,
            1e-8,
        )
        .unwrap();
        let split = split_generator(&rho, &h, &jumps, 1.0, 1.0, GAP).unwrap();
        let h_d = dissipative_hamiltonian(&split.basis, &split.d_nondiag, 1.0, GAP);
        assert_eq!(h_d.zeroed_pairs, 0);
        assert!(max_abs(&(&h_d.matrix - h_d.matrix.adjoint())) < 1e-12);
        let rebuilt = commutator(&h_d.matrix, rho.matrix()).unwrap() * C64::new(0.0, -1.0);
        assert!(max_abs(&(rebuilt - &split.d_nondiag)) < 1e-9);
        assert!(trace_product(&h_d.matrix, rho.matrix()).norm() < 1e-10);
    }

    #[test]
    fn diagonal_dissipator_gives_zero_dissipative_hamiltonian() {
        let basis = eigh_unchecked(&real_diagonal(&[0.1, 0.3, 0.6]));
        let h_d = dissipative_hamiltonian(&basis, &CMatrix::zeros(3, 3), 1.0, GAP);
        assert_eq!(max_abs(&h_d.matrix), 0.0);
    }

    #[test]
    fn degenerate_populations_are_zeroed_and_counted() {
        let basis = eigh_unchecked(&real_diagonal(&[0.25, 0.25, 0.5]));
        let x = pauli::identity(3) + pauli::ket_bra(3, 0, 1) + pauli::ket_bra(3, 1, 0);
        let g = dissipative_hamiltonian(&basis, &x, 1.0, GAP);
        assert_eq!(g.zeroed_pairs, 1);
        let gb = basis.to_basis(&g.matrix);
        assert_eq!(gb[(0, 1)].norm(), 0.0);
    }

    #[test]
    fn bath_unitary_fluctuation_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = random::hermitian(&mut rng, 3, 1.0);
        assert_eq!(
            bath_unitary_fluctuation(&pauli::identity(3).scale(1.0 / 3.0), &CMatrix::zeros(3, 3)),
            0.0
        );
        let psi = nalgebra::DVector::from_vec(random::pure_state(&mut rng, 3));
        let rho = &psi * psi.adjoint();
        assert_abs_diff_eq!(bath_unitary_fluctuation(&rho, &g), (&g * &psi).norm(), epsilon = 1e-13);
        let rho = random::density_matrix(&mut rng, 3);
        let direct: f64 = (&g * &g * &rho).trace().re.sqrt();
        assert_abs_diff_eq!(bath_unitary_fluctuation(&rho, &g), direct, epsilon = 1e-14);
    }

    #[test]
    fn escort_generator_of_stationary_state_vanishes() {
        let basis = eigh_unchecked(&real_diagonal(&[0.2, 0.8]));
        let xi = escort_generator(&basis, &CMatrix::zeros(2, 2), 1.0, GAP);
        assert_eq!(max_abs(&xi.matrix), 0.0);
    }

    #[test]
    fn escort_generator_decomposes() {
        for seed in 10..15 {
            let (sc, rho) = random_case(seed, 3);
            let slice = sc.slice(0.0).unwrap();
            let split = split_generator(&rho, &slice.hamiltonian, &slice.jumps, sc.lambda, sc.hbar, GAP).unwrap();
            let xi = escort_generator(&split.basis, &split.rho_dot(), 1.0, GAP);
            let h_d = dissipative_hamiltonian(&split.basis, &split.d_nondiag, 1.0, GAP);
            let h_tilde = off_diagonal_hamiltonian(&split.basis, &slice.hamiltonian);
            assert!(max_abs(&(xi.matrix - h_tilde - h_d.matrix)) < 1e-9);
        }
    }

    #[test]
    fn isolated_pure_state_escort_is_off_diagonal_hamiltonian() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let h = random::hermitian(&mut rng, 2, 1.0);
        let psi = nalgebra::DVector::from_vec(random::pure_state(&mut rng, 2));
        let rho = DensityMatrix::from_pure(psi.as_slice()).unwrap();
        let jumps = crate::model::build_jump_operators(&h, &[], 1e-9, DEFAULT_HERM_TOL, 0.0).unwrap();
        let split = split_generator(&rho, &h, &jumps, 0.0, 1.0, GAP).unwrap();
        let xi = escort_generator(&split.basis, &split.rho_dot(), 1.0, GAP);
        // H minus its diagonal in the basis {ψ, ψ⊥}
        let perp = nalgebra::DVector::from_vec(vec![-psi[1].conj(), psi[0].conj()]);
        let project = |v: &nalgebra::DVector<C64>| {
            let e = (v.adjoint() * &h * v)[(0, 0)];
            (v * v.adjoint()) * e
        };
        let oracle = &h - project(&psi) - project(&perp);
        assert!(max_abs(&(xi.matrix - oracle)) < 1e-12);
    }

    #[test]
    fn stationary_point_has_no_velocity() {
        let h = pauli::z().scale(0.5);
        let sc = scenario(
            HamiltonianProtocol::Constant(h.clone()),
            damping(1.0, 1.0),
            1.0,
            InitialState::Gibbs,
            1.0,
            0.01,
        );
        let eq = gibbs_state(&h, 1.0, DEFAULT_HERM_TOL).unwrap();
        let v = instantaneous_terms(&eq, &sc, 0.0).unwrap();
        assert!(v.lhs_norm < 1e-15);
        assert!(v.delta_e_d < 1e-14);
        assert!(v.sigma_dot.abs() < 1e-14);
        assert!(v.term_population < 1e-6);
    }

    #[test]
    fn isolated_slice_has_only_energy_term() {
        let sc = scenario(
            HamiltonianProtocol::Constant(pauli::x()),
            damping(1.0, 1.0),
            0.0,
            InitialState::Gibbs,
            1.0,
            0.01,
        );
        let v = instantaneous_terms(&plus_state(), &sc, 0.0).unwrap();
        assert_eq!(v.term_bath_unitary, 0.0);
        assert_eq!(v.term_population, 0.0);
        let rho = DensityMatrix::from_pure(&[c(1.0), c(0.0)]).unwrap();
        let v = instantaneous_terms(&rho, &sc, 0.0).unwrap();
        assert!(v.components.unitary <= v.term_unitary + 1e-12);
        assert_abs_diff_eq!(v.lhs_norm, v.term_unitary, epsilon = 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn component_inequalities_hold(
            seed in 0u64..10_000,
            lambda in 0.0f64..20.0,
            t in 0.0f64..6.0,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sc = scenario(
                HamiltonianProtocol::TwoLevelDrive { epsilon: 1.0, amplitude: 0.8, frequency: 1.1 },
                vec![Coupling { matrix: random::hermitian(&mut rng, 2, 1.0), rate: RateModel::flat(0.6, 1.0) }],
                lambda,
                InitialState::Gibbs,
                6.0,
                0.01,
            );
            let rho = DensityMatrix::new(random::density_matrix(&mut rng, 2), DEFAULT_HERM_TOL, 1e-8).unwrap();
            let v = instantaneous_terms(&rho, &sc, t).unwrap();
            let tol = 1e-9 * v.scale;
            let cmp = &v.components;
            prop_assert!(v.term_unitary - cmp.unitary >= -tol);
            prop_assert!(v.term_bath_unitary - cmp.nondiag >= -tol);
            prop_assert!(v.term_population - cmp.diag >= -tol);
            prop_assert!(v.rhs_sum() - v.lhs_norm >= -tol);
            prop_assert!((cmp.diag - cmp.population_speed).abs() <= 1e-9);
        }
    }

    #[test]
    fn time_average_is_trapezoid() {
        let times = [0.0, 1.0, 3.0];
        let values = [1.0, 3.0, 1.0];
        assert_abs_diff_eq!(time_average(&times, &values), (2.0 + 4.0) / 3.0, epsilon = 1e-15);
        assert_eq!(time_average(&[2.0], &[5.0]), 5.0);
    }

    #[test]
    fn stationary_trajectory_has_zero_bounds() {
        let sc = scenario(
            HamiltonianProtocol::Constant(pauli::z()),
            vec![],
            1.0,
            InitialState::Pure(vec![c(1.0), c(0.0)]),
            1.0,
            0.1,
        );
        let report = qsl_bound(&evolve(&sc).unwrap()).unwrap();
        assert_eq!(report.distance, 0.0);
        assert_eq!(report.formal_bound, 0.0);
        assert_eq!(report.bound, 0.0);
        assert!(report.bound <= report.tau);
    }

    #[test]
    fn rabi_quarter_period_matches_analytic_bound() {
        let omega = 2.0;
        let tau = std::f64::consts::PI / (2.0 * omega);
        let sc = scenario(
            HamiltonianProtocol::Constant(pauli::x().scale(omega / 2.0)),
            vec![],
            0.0,
            InitialState::Pure(vec![c(1.0), c(0.0)]),
            tau,
            tau / 2000.0,
        );
        let report = qsl_bound(&evolve(&sc).unwrap()).unwrap();
        let analytic = 2.0 / omega * (omega * tau / 2.0).sin();
        assert_abs_diff_eq!(report.bound, analytic, epsilon = 1e-9);
        assert!(report.bound <= tau);
        assert_abs_diff_eq!(report.shares()[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn thermal_relaxation_bound_chain() {
        let sc = scenario(
            HamiltonianProtocol::Constant(pauli::z().scale(0.5)),
            damping(1.0, 1.0),
            1.0,
            InitialState::Pure(vec![c(1.0), c(0.0)]),
            5.0,
            0.005,
        );
        let report = qsl_bound(&evolve(&sc).unwrap()).unwrap();
        assert!(report.bound <= report.tau);
        assert!(report.formal_bound <= report.tau + 1e-9);
        assert!(report.bound <= report.formal_bound + 1e-9);
        assert_abs_diff_eq!(report.tightness, RELAXATION_TIGHTNESS, epsilon = 1e-6);
    }

    // regression pin from the first run at dt = 0.005
    const RELAXATION_TIGHTNESS: f64 = 0.197386442;

    #[test]
    fn empty_trajectory_is_rejected() {
        let sc = scenario(
            HamiltonianProtocol::Constant(pauli::z()),
            vec![],
            1.0,
            InitialState::Gibbs,
            1.0,
            0.1,
        );
        let traj = Trajectory {
            times: vec![],
            states: vec![],
            scenario: sc,
        };
        assert!(matches!(qsl_bound(&traj), Err(QslError::EmptyTrajectory)));
    }
}
