//! Built-in verification corpus.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{Coupling, HamiltonianProtocol, InitialState, RateModel, Scenario, TimeGrid, Tolerances};
use crate::numerics::{c, pauli, real_diagonal, CMatrix};
use crate::random;

pub const DEFAULT_SEED: u64 = 0x5eed_2019;

/// Number of seeded random scenarios in the corpus.
pub const RANDOM_SCENARIOS: usize = 40;

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: String,
    pub scenario: Scenario,
}

fn entry(name: impl Into<String>, scenario: Scenario) -> CorpusEntry {
    CorpusEntry {
        name: name.into(),
        scenario,
    }
}

fn base(
    protocol: HamiltonianProtocol,
    couplings: Vec<Coupling>,
    lambda: f64,
    initial: InitialState,
    grid: TimeGrid,
) -> Scenario {
    Scenario {
        dim: protocol.dim(),
        hbar: 1.0,
        beta: 1.0,
        lambda,
        protocol,
        couplings,
        initial,
        grid,
        tolerances: Tolerances::default(),
    }
}

fn excited() -> InitialState {
    InitialState::Pure(vec![c(1.0), c(0.0)])
}

fn sigma_x_bath(gamma0: f64, beta: f64) -> Vec<Coupling> {
    vec![Coupling {
        matrix: pauli::x(),
        rate: RateModel::flat(gamma0, beta),
    }]
}

/// Isolated qubit `H = (Ω/2) σx` from `|0⟩` over a quarter period.
pub fn rabi(omega: f64) -> Scenario {
    let tau = std::f64::consts::PI / (2.0 * omega);
    base(
        HamiltonianProtocol::Constant(pauli::x().scale(omega / 2.0)),
        sigma_x_bath(1.0, 1.0),
        0.0,
        excited(),
        TimeGrid {
            t0: 0.0,
            t1: tau,
            dt: tau / 1000.0,
        },
    )
}

/// Static qubit `(ε/2)σz` relaxing from the excited state, `βε = 1`.
pub fn thermalization() -> Scenario {
    base(
        HamiltonianProtocol::Constant(pauli::z().scale(0.5)),
        sigma_x_bath(1.0, 1.0),
        1.0,
        excited(),
        TimeGrid {
            t0: 0.0,
            t1: 5.0,
            dt: 0.005,
        },
    )
}

/// Damped Landau-Zener sweep `Δ = v = 1` over `[-2, 2]` starting in
/// equilibrium, bath coupling `(σx + σz)/√2`.
pub fn landau_zener(lambda: f64) -> Scenario {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    base(
        HamiltonianProtocol::LandauZener { delta: 1.0, v: 1.0 },
        vec![Coupling {
            matrix: (pauli::x() + pauli::z()).scale(s),
            rate: RateModel::flat(1.0, 1.0),
        }],
        lambda,
        InitialState::Gibbs,
        TimeGrid {
            t0: -2.0,
            t1: 2.0,
            dt: 5e-4,
        },
    )
}

/// Qubit meeting the classical conditions.
pub fn classical_qubit() -> Scenario {
    base(
        HamiltonianProtocol::Constant(pauli::z().scale(0.5)),
        sigma_x_bath(1.0, 1.0),
        1.0,
        excited(),
        TimeGrid {
            t0: 0.0,
            t1: 3.0,
            dt: 0.005,
        },
    )
}

/// Qutrit with commuting (diagonal) driving and a diagonal initial state.
pub fn classical_qutrit() -> Scenario {
    let ladder = pauli::ket_bra(3, 0, 1)
        + pauli::ket_bra(3, 1, 0)
        + (pauli::ket_bra(3, 1, 2) + pauli::ket_bra(3, 2, 1)).scale(0.7)
        + (pauli::ket_bra(3, 0, 2) + pauli::ket_bra(3, 2, 0)).scale(0.3);
    base(
        HamiltonianProtocol::LinearInterp {
            times: vec![0.0, 1.0, 2.0],
            matrices: vec![
                real_diagonal(&[0.0, 1.0, 2.2]),
                real_diagonal(&[0.0, 1.4, 2.0]),
                real_diagonal(&[-0.2, 1.1, 2.5]),
            ],
        },
        vec![Coupling {
            matrix: ladder,
            rate: RateModel::ohmic(0.8, 1.2),
        }],
        1.0,
        InitialState::Matrix(real_diagonal(&[0.1, 0.3, 0.6])),
        TimeGrid {
            t0: 0.0,
            t1: 2.0,
            dt: 0.004,
        },
    )
    .with_beta(1.2)
}

fn degenerate_cases() -> Vec<CorpusEntry> {
    let mut out = vec![entry(
        "maximally_mixed_qubit",
        base(
            HamiltonianProtocol::Constant(pauli::z().scale(0.5)),
            sigma_x_bath(1.0, 1.0),
            1.0,
            InitialState::Matrix(pauli::identity(2).scale(0.5)),
            TimeGrid {
                t0: 0.0,
                t1: 2.0,
                dt: 0.005,
            },
        ),
    )];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let h = random::hermitian(&mut rng, 3, 1.0);
    out.push(entry(
        "maximally_mixed_qutrit",
        base(
            HamiltonianProtocol::Constant(h),
            vec![Coupling {
                matrix: random::hermitian(&mut rng, 3, 0.8),
                rate: RateModel::ohmic(0.6, 1.0),
            }],
            1.0,
            InitialState::Matrix(pauli::identity(3).scale(1.0 / 3.0)),
            TimeGrid {
                t0: 0.0,
                t1: 1.5,
                dt: 0.005,
            },
        ),
    ));
    out
}

fn near_stationary_cases() -> Vec<CorpusEntry> {
    let mut static_gibbs = thermalization();
    static_gibbs.initial = InitialState::Gibbs;
    static_gibbs.grid = TimeGrid {
        t0: 0.0,
        t1: 1.0,
        dt: 0.01,
    };
    let slow = base(
        HamiltonianProtocol::TwoLevelDrive {
            epsilon: 1.0,
            amplitude: 0.02,
            frequency: 0.05,
        },
        sigma_x_bath(1.0, 1.0),
        5.0,
        InitialState::Gibbs,
        TimeGrid {
            t0: 0.0,
            t1: 2.0,
            dt: 0.005,
        },
    );
    vec![
        entry("stationary_gibbs_qubit", static_gibbs),
        entry("slow_drive_near_equilibrium", slow),
    ]
}

/// A seeded random 3- or 4-level scenario: piecewise-linear `H(t)`, one or
/// two baths, random initial state.
pub fn random_scenario(rng: &mut ChaCha8Rng, dim: usize) -> Scenario {
    let knots = 3;
    let tau: f64 = rng.random_range(1.0..2.5);
    let times: Vec<f64> = (0..knots).map(|k| tau * k as f64 / (knots - 1) as f64).collect();
    let h0 = random::hermitian(rng, dim, 1.0);
    let matrices: Vec<CMatrix> = times.iter().map(|_| &h0 + random::hermitian(rng, dim, 0.4)).collect();
    let beta = rng.random_range(0.3..2.0);
    let n_baths = rng.random_range(1..=2);
    let couplings = (0..n_baths)
        .map(|_| {
            let gamma0 = rng.random_range(0.2..1.0);
            Coupling {
                matrix: random::hermitian(rng, dim, 0.7),
                rate: if rng.random_bool(0.5) {
                    RateModel::flat(gamma0, beta)
                } else {
                    RateModel::ohmic(gamma0, beta)
                },
            }
        })
        .collect();
    let initial = match rng.random_range(0..3) {
        0 => InitialState::Pure(random::pure_state(rng, dim)),
        1 => InitialState::Matrix(random::density_matrix(rng, dim)),
        _ => InitialState::Gibbs,
    };
    let lambda = rng.random_range(0.1..4.0);
    let mut sc = base(
        HamiltonianProtocol::LinearInterp { times, matrices },
        couplings,
        lambda,
        initial,
        TimeGrid {
            t0: 0.0,
            t1: tau,
            dt: 0.005,
        },
    );
    sc.beta = beta;
    sc
}

/// The full corpus: structured regimes plus [`RANDOM_SCENARIOS`] random ones.
pub fn builtin_corpus(seed: u64) -> Vec<CorpusEntry> {
    let mut out = vec![
        entry("rabi_quarter_period", rabi(1.0)),
        entry("thermalization_qubit", thermalization()),
    ];
    for lambda in [1.0, 10.0, 100.0, 1000.0] {
        out.push(entry(format!("landau_zener_lambda_{lambda}"), landau_zener(lambda)));
    }
    out.push(entry("classical_qubit", classical_qubit()));
    out.push(entry("classical_qutrit", classical_qutrit()));
    out.extend(degenerate_cases());
    out.extend(near_stationary_cases());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..RANDOM_SCENARIOS {
        let dim = 3 + k % 2;
        out.push(entry(format!("random_{k}_dim{dim}"), random_scenario(&mut rng, dim)));
    }
    out
}
