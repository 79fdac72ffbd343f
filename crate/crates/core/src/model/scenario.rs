use std::path::Path;

use serde::{Deserialize, Serialize};

use super::jumps::{build_jump_operators, Coupling, JumpOperatorSet};
use super::protocol::HamiltonianProtocol;
use super::rates::{RateKind, RateModel};
use crate::dynamics::DensityMatrix;
use crate::error::{QslError, Result};
use crate::numerics::{hermitian_deviation, is_finite, CMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub herm_tol: f64,
    pub p_floor: f64,
    pub omega_tol: f64,
    pub pop_gap_tol: f64,
    pub gap_tol: f64,
    pub psd_tol: f64,
    /// Finite-difference step for `dH/dt`; `dt / 10` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fd_step: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm_tol: 1e-10,
            p_floor: 1e-12,
            omega_tol: 1e-9,
            pop_gap_tol: 1e-10,
            gap_tol: 1e-8,
            psd_tol: 1e-8,
            fd_step: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
}

impl TimeGrid {
    /// Number of uniform steps; the realised spacing `(t1 - t0) / steps`
    /// never exceeds the requested `dt`.
    pub fn steps(&self) -> usize {
        let span = self.t1 - self.t0;
        if span <= 0.0 {
            return 0;
        }
        (span / self.dt - 1e-9).ceil().max(1.0) as usize
    }

    pub fn spacing(&self) -> f64 {
        match self.steps() {
            0 => self.dt,
            n => (self.t1 - self.t0) / n as f64,
        }
    }

    pub fn times(&self) -> Vec<f64> {
        let n = self.steps();
        let h = self.spacing();
        (0..=n)
            .map(|k| if k == n { self.t1 } else { self.t0 + k as f64 * h })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub enum InitialState {
    /// Gibbs state of `H(t0)`.
    Gibbs,
    Pure(Vec<C64>),
    Matrix(CMatrix),
}

/// Complete problem statement for one driven, damped run.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub dim: usize,
    pub hbar: f64,
    pub beta: f64,
    pub lambda: f64,
    pub protocol: HamiltonianProtocol,
    pub couplings: Vec<Coupling>,
    pub initial: InitialState,
    pub grid: TimeGrid,
    pub tolerances: Tolerances,
}

/// Hamiltonian and jump operators at one instant.
#[derive(Clone, Debug)]
pub struct Slice {
    pub t: f64,
    pub hamiltonian: CMatrix,
    pub jumps: JumpOperatorSet,
}

impl Scenario {
    pub fn slice(&self, t: f64) -> Result<Slice> {
        let hamiltonian = self.protocol.hamiltonian_at(t)?;
        let jumps = build_jump_operators(
            &hamiltonian,
            &self.couplings,
            self.tolerances.omega_tol,
            self.tolerances.herm_tol,
            t,
        )?;
        Ok(Slice { t, hamiltonian, jumps })
    }

    pub fn fd_step(&self) -> f64 {
        self.tolerances.fd_step.unwrap_or(self.grid.spacing() / 10.0)
    }

    pub fn hamiltonian_derivative(&self, t: f64) -> Result<CMatrix> {
        self.protocol.hamiltonian_derivative(t, self.fd_step())
    }

    /// Largest `λ γ0` over couplings: the dissipative rate scale.
    pub fn rate_scale(&self) -> f64 {
        self.couplings
            .iter()
            .fold(0.0, |acc, c| acc.max(self.lambda * c.rate.gamma0))
    }

    pub fn initial_state(&self) -> Result<DensityMatrix> {
        let tol = &self.tolerances;
        match &self.initial {
            InitialState::Gibbs => {
                let h = self.protocol.hamiltonian_at(self.grid.t0)?;
                super::gibbs_state(&h, self.beta, tol.herm_tol)
            }
            InitialState::Pure(v) => {
                if v.len() != self.dim {
                    return Err(QslError::DimensionMismatch {
                        expected: self.dim,
                        found: v.len(),
                    });
                }
                DensityMatrix::from_pure(v)
            }
            InitialState::Matrix(m) => DensityMatrix::new(m.clone(), tol.herm_tol, tol.psd_tol),
        }
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self { lambda, ..self.clone() }
    }

    pub fn with_beta(&self, beta: f64) -> Self {
        let mut out = self.clone();
        out.beta = beta;
        for c in &mut out.couplings {
            c.rate.beta = beta;
        }
        out
    }

    pub fn with_gamma0(&self, gamma0: f64) -> Self {
        let mut out = self.clone();
        for c in &mut out.couplings {
            c.rate.gamma0 = gamma0;
        }
        out
    }

    pub fn with_dt(&self, dt: f64) -> Self {
        let mut out = self.clone();
        out.grid.dt = dt;
        out
    }

    pub fn with_grid(&self, t0: f64, t1: f64, dt: f64) -> Self {
        let mut out = self.clone();
        out.grid = TimeGrid { t0, t1, dt };
        out
    }

    /// Check every scenario invariant, naming the first violation.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(QslError::Validation(msg));
        let tol = &self.tolerances;
        if self.dim == 0 {
            return bad("dim must be positive".into());
        }
        if !(self.hbar.is_finite() && self.hbar > 0.0) {
            return bad(format!("hbar must be positive, got {}", self.hbar));
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return bad(format!("beta must be nonnegative, got {}", self.beta));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return bad(format!("lambda must be nonnegative, got {}", self.lambda));
        }
        let g = &self.grid;
        if !(g.dt.is_finite() && g.dt > 0.0 && g.t0.is_finite() && g.t1.is_finite() && g.t1 >= g.t0) {
            return bad(format!(
                "grid: need dt > 0 and t1 >= t0 (t0={}, t1={}, dt={})",
                g.t0, g.t1, g.dt
            ));
        }
        let positive = [
            ("herm_tol", tol.herm_tol),
            ("p_floor", tol.p_floor),
            ("omega_tol", tol.omega_tol),
            ("pop_gap_tol", tol.pop_gap_tol),
            ("gap_tol", tol.gap_tol),
            ("psd_tol", tol.psd_tol),
            ("fd_step", tol.fd_step.unwrap_or(1.0)),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("tolerances: {name} must be positive, got {v}"));
            }
        }

        self.validate_protocol()?;

        for (k, c) in self.couplings.iter().enumerate() {
            if c.matrix.nrows() != self.dim || c.matrix.ncols() != self.dim {
                return bad(format!("coupling {k}: matrix must be {0}x{0}", self.dim));
            }
            if !is_finite(&c.matrix) {
                return bad(format!("coupling {k}: non-finite entries"));
            }
            if hermitian_deviation(&c.matrix) > tol.herm_tol {
                return bad(format!("coupling {k} not Hermitian"));
            }
            if !(c.rate.gamma0.is_finite() && c.rate.gamma0 >= 0.0) {
                return bad(format!("coupling {k}: gamma0 must be nonnegative"));
            }
            if c.rate.kind == RateKind::Ohmic && self.beta <= 0.0 {
                return bad(format!("coupling {k}: ohmic rates need beta > 0"));
            }
        }

        match &self.initial {
            InitialState::Gibbs => {}
            InitialState::Pure(v) => {
                if v.len() != self.dim {
                    return bad(format!("initial: vector length {} != dim {}", v.len(), self.dim));
                }
                if v.iter().map(|z| z.norm_sqr()).sum::<f64>() == 0.0 {
                    return bad("initial: zero vector".into());
                }
            }
            InitialState::Matrix(m) => {
                if m.nrows() != self.dim || m.ncols() != self.dim {
                    return bad(format!("initial: matrix must be {0}x{0}", self.dim));
                }
                DensityMatrix::new(m.clone(), tol.herm_tol, tol.psd_tol)
                    .map_err(|e| QslError::Validation(format!("initial: {e}")))?;
            }
        }
        Ok(())
    }

    fn validate_protocol(&self) -> Result<()> {
        let bad = |msg: String| Err(QslError::Validation(msg));
        let tol = self.tolerances.herm_tol;
        let check_matrix = |m: &CMatrix| -> Result<()> {
            if m.nrows() != self.dim || m.ncols() != self.dim {
                return bad(format!("hamiltonian: matrix must be {0}x{0}", self.dim));
            }
            if !is_finite(m) {
                return bad("hamiltonian: non-finite entries".into());
            }
            if hermitian_deviation(m) > tol {
                return bad(format!(
                    "hamiltonian not Hermitian (deviation {:.3e})",
                    hermitian_deviation(m)
                ));
            }
            Ok(())
        };
        match &self.protocol {
            HamiltonianProtocol::Constant(m) => check_matrix(m)?,
            HamiltonianProtocol::LinearInterp { times, matrices } => {
                if times.is_empty() || times.len() != matrices.len() {
                    return bad("hamiltonian: linear_interp needs matching nonempty times and matrices".into());
                }
                if times.windows(2).any(|w| w[1] <= w[0]) || times.iter().any(|t| !t.is_finite()) {
                    return bad("hamiltonian: linear_interp times must be strictly increasing".into());
                }
                for m in matrices {
                    check_matrix(m)?;
                }
                let (start, end) = self.protocol.range();
                let slack = 1e-9 * (1.0 + self.grid.t1.abs());
                let single = times.len() == 1;
                if !single && (self.grid.t0 < start - slack || self.grid.t1 > end + slack) {
                    return bad(format!(
                        "hamiltonian: linear_interp range [{start}, {end}] does not cover the grid"
                    ));
                }
            }
            HamiltonianProtocol::LandauZener { delta, v } => {
                if self.dim != 2 || !delta.is_finite() || !v.is_finite() {
                    return bad("hamiltonian: landau_zener needs dim 2 and finite parameters".into());
                }
            }
            HamiltonianProtocol::TwoLevelDrive {
                epsilon,
                amplitude,
                frequency,
            } => {
                if self.dim != 2 || ![epsilon, amplitude, frequency].iter().all(|x| x.is_finite()) {
                    return bad("hamiltonian: two_level_drive needs dim 2 and finite parameters".into());
                }
            }
        }
        Ok(())
    }

    pub fn from_json_str(text: &str, origin: &Path) -> Result<Self> {
        let file: ScenarioFile = serde_json::from_str(text).map_err(|e| QslError::Parse {
            path: origin.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let scenario = file.into_scenario()?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ScenarioFile::from_scenario(self)).expect("scenario serialization cannot fail")
    }
}

/// Read, parse and validate a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| QslError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Scenario::from_json_str(&text, path)
}

// ---- on-disk schema ----

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum Entry {
    Complex([f64; 2]),
    Real(f64),
}

impl From<Entry> for C64 {
    fn from(e: Entry) -> Self {
        match e {
            Entry::Complex([re, im]) => C64::new(re, im),
            Entry::Real(re) => C64::new(re, 0.0),
        }
    }
}

type MatrixRepr = Vec<Vec<Entry>>;

fn matrix_from_repr(rows: &MatrixRepr, what: &str) -> Result<CMatrix> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(QslError::Validation(format!("{what}: matrix must be square")));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| rows[i][j].into()))
}

fn matrix_to_repr(m: &CMatrix) -> MatrixRepr {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| Entry::Complex([m[(i, j)].re, m[(i, j)].im]))
                .collect()
        })
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum HamiltonianRepr {
    Constant {
        matrix: MatrixRepr,
    },
    LinearInterp {
        times: Vec<f64>,
        matrices: Vec<MatrixRepr>,
    },
    LandauZener {
        delta: f64,
        v: f64,
    },
    TwoLevelDrive {
        epsilon: f64,
        amplitude: f64,
        frequency: f64,
    },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RateRepr {
    kind: RateKind,
    gamma0: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CouplingRepr {
    matrix: MatrixRepr,
    rate: RateRepr,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum InitialRepr {
    Gibbs,
    Pure { vector: Vec<Entry> },
    Matrix { matrix: MatrixRepr },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridRepr {
    t0: f64,
    t1: f64,
    dt: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    dim: usize,
    #[serde(default)]
    hbar: Option<f64>,
    beta: f64,
    #[serde(default)]
    lambda: Option<f64>,
    hamiltonian: HamiltonianRepr,
    #[serde(default)]
    couplings: Vec<CouplingRepr>,
    initial: InitialRepr,
    grid: GridRepr,
    #[serde(default)]
    tolerances: Tolerances,
}

impl ScenarioFile {
    fn into_scenario(self) -> Result<Scenario> {
        let protocol = match self.hamiltonian {
            HamiltonianRepr::Constant { matrix } => {
                HamiltonianProtocol::Constant(matrix_from_repr(&matrix, "hamiltonian")?)
            }
            HamiltonianRepr::LinearInterp { times, matrices } => HamiltonianProtocol::LinearInterp {
                times,
                matrices: matrices
                    .iter()
                    .map(|m| matrix_from_repr(m, "hamiltonian"))
                    .collect::<Result<_>>()?,
            },
            HamiltonianRepr::LandauZener { delta, v } => HamiltonianProtocol::LandauZener { delta, v },
            HamiltonianRepr::TwoLevelDrive {
                epsilon,
                amplitude,
                frequency,
            } => HamiltonianProtocol::TwoLevelDrive {
                epsilon,
                amplitude,
                frequency,
            },
        };
        let couplings = self
            .couplings
            .iter()
            .enumerate()
            .map(|(k, c)| {
                Ok(Coupling {
                    matrix: matrix_from_repr(&c.matrix, &format!("coupling {k}"))?,
                    rate: RateModel {
                        kind: c.rate.kind,
                        gamma0: c.rate.gamma0,
                        beta: self.beta,
                    },
                })
            })
            .collect::<Result<_>>()?;
        let initial = match self.initial {
            InitialRepr::Gibbs => InitialState::Gibbs,
            InitialRepr::Pure { vector } => InitialState::Pure(vector.into_iter().map(C64::from).collect()),
            InitialRepr::Matrix { matrix } => InitialState::Matrix(matrix_from_repr(&matrix, "initial")?),
        };
        Ok(Scenario {
            dim: self.dim,
            hbar: self.hbar.unwrap_or(1.0),
            beta: self.beta,
            lambda: self.lambda.unwrap_or(1.0),
            protocol,
            couplings,
            initial,
            grid: TimeGrid {
                t0: self.grid.t0,
                t1: self.grid.t1,
                dt: self.grid.dt,
            },
            tolerances: self.tolerances,
        })
    }

    fn from_scenario(s: &Scenario) -> Self {
        let hamiltonian = match &s.protocol {
            HamiltonianProtocol::Constant(m) => HamiltonianRepr::Constant {
                matrix: matrix_to_repr(m),
            },
            HamiltonianProtocol::LinearInterp { times, matrices } => HamiltonianRepr::LinearInterp {
                times: times.clone(),
                matrices: matrices.iter().map(matrix_to_repr).collect(),
            },
            HamiltonianProtocol::LandauZener { delta, v } => HamiltonianRepr::LandauZener { delta: *delta, v: *v },
            HamiltonianProtocol::TwoLevelDrive {
                epsilon,
                amplitude,
                frequency,
            } => HamiltonianRepr::TwoLevelDrive {
                epsilon: *epsilon,
                amplitude: *amplitude,
                frequency: *frequency,
            },
        };
        let initial = match &s.initial {
            InitialState::Gibbs => InitialRepr::Gibbs,
            InitialState::Pure(v) => InitialRepr::Pure {
                vector: v.iter().map(|z| Entry::Complex([z.re, z.im])).collect(),
            },
            InitialState::Matrix(m) => InitialRepr::Matrix {
                matrix: matrix_to_repr(m),
            },
        };
        ScenarioFile {
            dim: s.dim,
            hbar: Some(s.hbar),
            beta: s.beta,
            lambda: Some(s.lambda),
            hamiltonian,
            couplings: s
                .couplings
                .iter()
                .map(|c| CouplingRepr {
                    matrix: matrix_to_repr(&c.matrix),
                    rate: RateRepr {
                        kind: c.rate.kind,
                        gamma0: c.rate.gamma0,
                    },
                })
                .collect(),
            initial,
            grid: GridRepr {
                t0: s.grid.t0,
                t1: s.grid.t1,
                dt: s.grid.dt,
            },
            tolerances: s.tolerances,
        }
    }
}
