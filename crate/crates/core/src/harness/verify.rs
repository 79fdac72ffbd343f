//! Invariant suite over one scenario or the built-in corpus.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::corpus::{self, CorpusEntry};
use crate::dynamics::{evolve, lindbladian_apply, rk4_update, Trajectory};
use crate::error::Result;
use crate::limits::{
    classical_basis, classical_speed_limit, counter_diabatic, evolve_classical, mt_bound, quasi_adiabatic_check,
};
use crate::model::{build_jump_operators, gibbs_state, Coupling, HamiltonianProtocol, RateModel, Scenario};
use crate::numerics::{eigh_unchecked, max_abs, pauli, trace, trace_distance, DEFAULT_HERM_TOL};
use crate::random;
use crate::speedlimit::{norm_level_bound, report_for, time_average, trajectory_terms, VelocityTerms};

/// Deliberate defects, for checking that the suite notices them.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Fault {
    #[default]
    None,
    /// Trace norm taken without the factor ½.
    TraceNormWithoutHalf,
    /// Absorption rates off by 50% from detailed balance.
    BrokenDetailedBalance,
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub seed: u64,
    pub fault: Fault,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: corpus::DEFAULT_SEED,
            fault: Fault::None,
        }
    }
}

/// Outcome of one named check. Slacks are normalized so that a check passes
/// iff `worst_slack >= -tolerance`.
#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: String,
    pub tolerance: f64,
    pub worst_slack: f64,
    pub at_t: Option<f64>,
    /// Scenario (or sub-check) where the worst slack occurred.
    pub location: String,
    pub samples: usize,
    pub passed: bool,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<32} worst_slack={:+.3e} tol={:.1e} samples={}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.worst_slack,
            self.tolerance,
            self.samples
        )?;
        if let Some(t) = self.at_t {
            write!(f, " t={t:.6}")?;
        }
        if !self.location.is_empty() {
            write!(f, " [{}]", self.location)?;
        }
        Ok(())
    }
}

/// Running minimum of the slack for every check name.
#[derive(Clone, Debug, Default)]
pub struct Checks {
    results: Vec<CheckResult>,
}

impl Checks {
    pub fn observe(&mut self, name: &str, tolerance: f64, slack: f64, at_t: Option<f64>, location: &str) {
        let slack = if slack.is_nan() { f64::NEG_INFINITY } else { slack };
        let idx = match self.results.iter().position(|r| r.name == name) {
            Some(i) => i,
            None => {
                self.results.push(CheckResult {
                    name: name.to_string(),
                    tolerance,
                    worst_slack: f64::INFINITY,
                    at_t: None,
                    location: String::new(),
                    samples: 0,
                    passed: true,
                });
                self.results.len() - 1
            }
        };
        let r = &mut self.results[idx];
        r.samples += 1;
        if slack < r.worst_slack {
            r.worst_slack = slack;
            r.at_t = at_t;
            r.location = location.to_string();
        }
        r.passed = r.worst_slack >= -r.tolerance;
    }

    pub fn merge(&mut self, other: Checks) {
        for r in other.results {
            let before = self
                .results
                .iter()
                .position(|x| x.name == r.name)
                .map(|i| self.results[i].samples);
            self.observe(&r.name, r.tolerance, r.worst_slack, r.at_t, &r.location);
            let i = self.results.iter().position(|x| x.name == r.name).unwrap();
            self.results[i].samples = before.unwrap_or(0) + r.samples;
        }
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.results.iter().find(|r| r.name == name)
    }
}

#[derive(Clone, Debug)]
pub struct VerifySummary {
    pub checks: Vec<CheckResult>,
    pub trajectories: usize,
}

impl VerifySummary {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for VerifySummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        write!(
            f,
            "{} checks, {} failed, {} trajectories",
            self.checks.len(),
            failed,
            self.trajectories
        )
    }
}

fn relative(x: f64, y: f64) -> f64 {
    (x - y).abs() / x.abs().max(y.abs()).max(f64::MIN_POSITIVE)
}

fn pointwise_checks(checks: &mut Checks, name: &str, scenario: &Scenario, v: &VelocityTerms, fault: Fault) {
    let t = Some(v.t);
    let dim = scenario.dim as f64;
    let rate = scenario.rate_scale();
    let cmp = &v.components;
    let second_law_unit = if rate > 0.0 { rate * dim * dim } else { 1.0 };
    checks.observe("second_law", 1e-9, v.sigma_dot / second_law_unit, t, name);
    checks.observe(
        "component_unitary",
        1e-9,
        (v.term_unitary - cmp.unitary) / v.scale,
        t,
        name,
    );
    checks.observe(
        "component_bath_unitary",
        1e-9,
        (v.term_bath_unitary - cmp.nondiag) / v.scale,
        t,
        name,
    );
    checks.observe(
        "component_population",
        1e-9,
        (v.term_population - cmp.diag) / v.scale,
        t,
        name,
    );
    checks.observe("triangle_assembly", 1e-9, (v.rhs_sum() - v.lhs_norm) / v.scale, t, name);

    let diag_norm = if fault == Fault::TraceNormWithoutHalf {
        2.0 * cmp.diag
    } else {
        cmp.diag
    };
    checks.observe(
        "identity_population_speed",
        1e-9,
        -(diag_norm - cmp.population_speed).abs() / v.scale,
        t,
        name,
    );
    if let Some(r) = cmp.escort_residual {
        checks.observe("identity_escort_decomposition", 1e-9, -r / cmp.escort_scale, t, name);
    }
    checks.observe(
        "identity_hd_zero_mean",
        1e-10,
        -cmp.hd_mean.abs() / cmp.hd_scale,
        t,
        name,
    );
    let flux_scale = v
        .sigma_dot
        .abs()
        .max(v.entropy_flux.abs())
        .max((scenario.beta * v.heat_flux).abs())
        .max(1e-6 * v.scale);
    let balance = if flux_scale > 0.0 {
        -(v.sigma_dot - cmp.sigma_from_fluxes).abs() / flux_scale
    } else {
        0.0
    };
    checks.observe("identity_entropy_balance", 1e-8, balance, t, name);
}

fn state_checks(checks: &mut Checks, name: &str, trajectory: &Trajectory) -> Result<()> {
    let sc = &trajectory.scenario;
    let stride = (trajectory.len() / 25).max(1);
    for (i, w) in trajectory.times.windows(2).enumerate().step_by(stride) {
        let raw = rk4_update(&trajectory.states[i], sc, w[0], w[1] - w[0])?;
        checks.observe("trace_preserved", 1e-9, -(trace(&raw).re - 1.0).abs(), Some(w[1]), name);
        let min = eigh_unchecked(&crate::numerics::hermitize(&raw)).values[0];
        checks.observe(
            "positivity_preserved",
            sc.tolerances.psd_tol,
            min.min(0.0),
            Some(w[1]),
            name,
        );
    }
    Ok(())
}

/// `L[ρ_eq] = 0` for the generator built from `(H, couplings, β)`.
fn stationarity_residual(h: &crate::numerics::CMatrix, couplings: &[Coupling], beta: f64, fault: Fault) -> Result<f64> {
    let mut jumps = build_jump_operators(h, couplings, 1e-9, DEFAULT_HERM_TOL, 0.0)?;
    if fault == Fault::BrokenDetailedBalance {
        for k in 0..jumps.ops.len() {
            if jumps.ops[k].omega < 0.0 {
                let r = jumps.ops[k].rate;
                jumps.set_rate(k, 1.5 * r);
            }
        }
    }
    let eq = gibbs_state(h, beta, DEFAULT_HERM_TOL)?;
    let residual = lindbladian_apply(eq.matrix(), h, &jumps, 1.0, 1.0)?;
    let gamma0 = couplings
        .iter()
        .map(|c| c.rate.gamma0)
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    Ok(max_abs(&residual) / gamma0)
}

fn trajectory_checks(entry: &CorpusEntry, fault: Fault) -> Checks {
    let mut checks = Checks::default();
    let name = entry.name.as_str();
    match run_trajectory_checks(&mut checks, entry, fault) {
        Ok(()) => checks.observe("runs_complete", 0.0, 0.0, None, name),
        Err(e) => checks.observe("runs_complete", 0.0, -1.0, None, &format!("{name}: {e}")),
    }
    checks
}

fn run_trajectory_checks(checks: &mut Checks, entry: &CorpusEntry, fault: Fault) -> Result<()> {
    let name = entry.name.as_str();
    let sc = &entry.scenario;
    let trajectory = evolve(sc)?;
    let terms = trajectory_terms(&trajectory)?;
    let report = report_for(&trajectory, &terms)?;

    for v in &terms {
        pointwise_checks(checks, name, sc, v, fault);
    }
    state_checks(checks, name, &trajectory)?;

    let tau = report.tau;
    let rel = |x: f64| if tau > 0.0 { x / tau } else { x };
    checks.observe("main_bound", 1e-6, rel(tau - report.bound), None, name);
    checks.observe(
        "bound_chain_formal_le_tau",
        1e-9,
        rel(tau - report.formal_bound),
        None,
        name,
    );
    checks.observe(
        "bound_chain_main_le_formal",
        1e-9,
        rel(report.formal_bound - report.bound),
        None,
        name,
    );

    let sqrt_product: Vec<f64> = terms
        .iter()
        .map(|v| (v.sigma_dot.max(0.0) * v.activity).sqrt())
        .collect();
    let lhs = time_average(&trajectory.times, &sqrt_product);
    let rhs = (report.avg_sigma.max(0.0) * report.avg_activity).sqrt();
    checks.observe("averaging_cauchy_schwarz", 1e-9, (rhs - lhs) / lhs.max(1.0), None, name);

    let h0 = sc.protocol.hamiltonian_at(sc.grid.t0)?;
    if !sc.couplings.is_empty() {
        let residual = stationarity_residual(&h0, &sc.couplings, sc.beta, fault)?;
        checks.observe("gibbs_stationarity", 1e-9, -residual, Some(sc.grid.t0), name);
    }

    if sc.rate_scale() == 0.0 {
        let mt = mt_bound(&trajectory)?;
        checks.observe(
            "dissipationless_equals_mt",
            1e-10,
            -(report.bound - mt).abs(),
            None,
            name,
        );
    }

    if classical_basis(sc).is_ok() && !sc.couplings.is_empty() {
        classical_checks(checks, name, &trajectory, &terms)?;
    }
    Ok(())
}

fn classical_checks(checks: &mut Checks, name: &str, trajectory: &Trajectory, terms: &[VelocityTerms]) -> Result<()> {
    let ct = evolve_classical(&trajectory.scenario)?;
    let mut pop_err: f64 = 0.0;
    let mut coherence: f64 = 0.0;
    for (rho, p) in trajectory.states.iter().zip(&ct.populations) {
        let rb = ct.basis.to_basis(rho.matrix());
        for m in 0..p.len() {
            pop_err = pop_err.max((rb[(m, m)].re - p[m]).abs());
            for n in 0..p.len() {
                if m != n {
                    coherence = coherence.max(rb[(m, n)].norm());
                }
            }
        }
    }
    checks.observe("classical_populations", 1e-6, -pop_err, None, name);
    checks.observe("classical_coherence_free", 1e-10, -coherence, None, name);
    let classical = classical_speed_limit(&ct)?;
    let distance = trajectory.first().trace_distance(trajectory.last())?;
    let quantum = norm_level_bound(&trajectory.times, distance, terms);
    let slack = if classical.bound == 0.0 && quantum == 0.0 {
        0.0
    } else {
        -relative(classical.bound, quantum)
    };
    checks.observe("classical_bound_agreement", 1e-6, slack, None, name);
    Ok(())
}

fn run_global(checks: &mut Checks, name: &str, f: impl FnOnce(&mut Checks) -> Result<()>) {
    if let Err(e) = f(checks) {
        checks.observe(name, 0.0, -1.0, None, &e.to_string());
    }
}

fn stationarity_triples(checks: &mut Checks, seed: u64, fault: Fault) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x57a7);
    for k in 0..20 {
        let dim = 2 + k % 3;
        let h = random::hermitian(&mut rng, dim, 1.0);
        let beta = rng.random_range(0.2..3.0);
        let gamma0 = rng.random_range(0.1..2.0);
        let couplings = vec![Coupling {
            matrix: random::hermitian(&mut rng, dim, 1.0),
            rate: if k % 2 == 0 {
                RateModel::flat(gamma0, beta)
            } else {
                RateModel::ohmic(gamma0, beta)
            },
        }];
        let residual = stationarity_residual(&h, &couplings, beta, fault)?;
        checks.observe(
            "stationarity_random_triples",
            1e-9,
            -residual,
            None,
            &format!("triple {k}"),
        );
    }
    Ok(())
}

fn rabi_analytic(checks: &mut Checks) -> Result<()> {
    let omega = 1.0;
    let sc = corpus::rabi(omega);
    let trajectory = evolve(&sc)?;
    let tau = trajectory.duration();
    let mt = mt_bound(&trajectory)?;
    let analytic = 2.0 * sc.hbar / omega * (omega * tau / (2.0 * sc.hbar)).sin();
    checks.observe(
        "rabi_closed_form",
        1e-6,
        -(mt - analytic).abs(),
        None,
        "rabi_quarter_period",
    );
    checks.observe("rabi_bound_le_tau", 0.0, tau - analytic, None, "rabi_quarter_period");
    Ok(())
}

fn quasi_adiabatic(checks: &mut Checks) -> Result<()> {
    let table = quasi_adiabatic_check(&corpus::landau_zener(1.0), &[10.0, 100.0, 1000.0])?;
    let k = table.exponent_e.unwrap_or(f64::NAN);
    checks.observe(
        "quasi_adiabatic_exponent",
        0.0,
        0.3 - (k - 1.0).abs(),
        None,
        &format!("k={k:.4}"),
    );
    let kd = table.exponent_d.unwrap_or(f64::NAN);
    checks.observe(
        "quasi_adiabatic_distance_exponent",
        0.0,
        0.3 - (kd - 1.0).abs(),
        None,
        &format!("k={kd:.4}"),
    );
    Ok(())
}

fn cd_identity(checks: &mut Checks, seed: u64) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xcd);
    for k in 0..20 {
        let dim = 2 + k % 3;
        let h = random::hermitian(&mut rng, dim, 1.0);
        let dh = random::hermitian(&mut rng, dim, 1.0);
        let beta = rng.random_range(0.2..3.0);
        let hbar = rng.random_range(0.5..1.5);
        let cd = counter_diabatic(0.0, &h, &dh, beta, hbar, 1e-8, DEFAULT_HERM_TOL)?;
        let metric: f64 = hbar * hbar * cd.p_eq.iter().zip(&cd.g_fs).map(|(p, g)| p * g).sum::<f64>();
        checks.observe(
            "counter_diabatic_identity",
            1e-8,
            -relative(cd.delta_e_cd.powi(2), metric),
            None,
            &format!("H {k}"),
        );
    }
    Ok(())
}

/// Endpoint differences `T(ρ_h(τ), ρ_{h/2}(τ))` for a driven damped qubit.
pub fn rk4_successive_errors(steps: &[f64]) -> Result<Vec<f64>> {
    let sc = Scenario {
        protocol: HamiltonianProtocol::TwoLevelDrive {
            epsilon: 1.0,
            amplitude: 0.8,
            frequency: 1.3,
        },
        couplings: vec![Coupling {
            matrix: pauli::x(),
            rate: RateModel::flat(0.5, 1.0),
        }],
        ..corpus::thermalization()
    }
    .with_grid(0.0, 2.0, steps[0]);
    let endpoint =
        |dt: f64| -> Result<crate::numerics::CMatrix> { Ok(evolve(&sc.with_dt(dt))?.last().matrix().clone()) };
    steps
        .iter()
        .map(|&h| trace_distance(&endpoint(h)?, &endpoint(h / 2.0)?))
        .collect()
}

fn rk4_order(checks: &mut Checks) -> Result<()> {
    let steps = [0.2, 0.1, 0.05];
    let errors = rk4_successive_errors(&steps)?;
    for (w, h) in errors.windows(2).zip(&steps) {
        let ratio = w[0] / w[1];
        checks.observe(
            "rk4_order",
            4.0,
            -(ratio - 16.0).abs(),
            None,
            &format!("dt={h} ratio={ratio:.3}"),
        );
    }
    Ok(())
}

fn finish(checks: Checks, trajectories: usize) -> VerifySummary {
    VerifySummary {
        checks: checks.results,
        trajectories,
    }
}

pub fn verify_scenario(scenario: &Scenario, options: VerifyOptions) -> VerifySummary {
    let entry = CorpusEntry {
        name: "scenario".into(),
        scenario: scenario.clone(),
    };
    finish(trajectory_checks(&entry, options.fault), 1)
}

pub fn verify_corpus(options: VerifyOptions) -> VerifySummary {
    let corpus = corpus::builtin_corpus(options.seed);
    let per_entry: Vec<Checks> = corpus.par_iter().map(|e| trajectory_checks(e, options.fault)).collect();
    let mut checks = Checks::default();
    for c in per_entry {
        checks.merge(c);
    }
    run_global(&mut checks, "stationarity_random_triples", |c| {
        stationarity_triples(c, options.seed, options.fault)
    });
    run_global(&mut checks, "rabi_closed_form", rabi_analytic);
    run_global(&mut checks, "quasi_adiabatic_exponent", quasi_adiabatic);
    run_global(&mut checks, "counter_diabatic_identity", |c| {
        cd_identity(c, options.seed)
    });
    run_global(&mut checks, "rk4_order", rk4_order);
    finish(checks, corpus.len())
}
