//! Quantum stochastic thermodynamics in the eigenbasis of `ρ`.
//!
//! `k_B = 1`. All rates are taken from the jump set as given; pass
//! `jumps.scaled(λ)` to get the fluxes of the rescaled equation
//! `∂ρ = -(i/ħ)[H, ρ] + λ D[ρ]`.

use nalgebra::DMatrix;

use crate::dynamics::dissipator_apply;
use crate::error::{QslError, Result};
use crate::model::JumpOperatorSet;
use crate::numerics::{log_on_support, trace_product, CMatrix, EigenSystem};

/// `W^{ω,α}_{mn} = γ_α(ω) |⟨m|L_{ω,α}|n⟩|²` for one channel.
#[derive(Clone, Debug)]
pub struct ChannelRates {
    pub omega: f64,
    pub coupling: usize,
    pub mirror: usize,
    /// Entry `(m, n)` is the rate of the jump `n -> m`.
    pub rates: DMatrix<f64>,
}

/// Transition rates between eigenvectors of `ρ`, with the populations they
/// act on.
#[derive(Clone, Debug)]
pub struct TransitionMatrix {
    pub channels: Vec<ChannelRates>,
    /// `max(p_n, 0)`.
    pub populations: Vec<f64>,
    /// Largest rate in the jump set; sets the negligible-traffic floor.
    pub rate_scale: f64,
}

/// One term of the primed sum: forward traffic `W^{ω}_{mn} p_n` and its
/// reverse `W^{-ω}_{nm} p_m`.
#[derive(Clone, Copy, Debug)]
pub struct Traffic {
    pub channel: usize,
    pub m: usize,
    pub n: usize,
    pub forward: f64,
    pub reverse: f64,
}

impl TransitionMatrix {
    pub fn dim(&self) -> usize {
        self.populations.len()
    }

    /// Terms of the sum excluding `(m = n) ∧ (ω = 0)`.
    pub fn primed_terms(&self) -> impl Iterator<Item = Traffic> + '_ {
        let dim = self.dim();
        self.channels.iter().enumerate().flat_map(move |(k, ch)| {
            let mirror = &self.channels[ch.mirror];
            (0..dim).flat_map(move |m| {
                (0..dim).filter_map(move |n| {
                    if m == n && ch.omega == 0.0 {
                        return None;
                    }
                    Some(Traffic {
                        channel: k,
                        m,
                        n,
                        forward: ch.rates[(m, n)] * self.populations[n],
                        reverse: mirror.rates[(n, m)] * self.populations[m],
                    })
                })
            })
        })
    }

    fn term_floor(&self) -> f64 {
        1e-14 * self.rate_scale
    }

    /// `σ̇ = Σ' W^{ω}_{mn} p_n ln(W^{ω}_{mn} p_n / W^{-ω}_{nm} p_m)`.
    ///
    /// Populations inside the logarithm are clamped at `p_floor`, matching
    /// [`log_on_support`]. Terms with forward traffic below `1e-14` of the
    /// largest rate are skipped.
    pub fn entropy_production(&self, p_floor: f64) -> Result<f64> {
        let floor = self.term_floor();
        let mut sigma = 0.0;
        for term in self.primed_terms() {
            if term.forward < floor || term.forward == 0.0 {
                continue;
            }
            let ch = &self.channels[term.channel];
            let w_fwd = ch.rates[(term.m, term.n)];
            let w_rev = self.channels[ch.mirror].rates[(term.n, term.m)];
            if w_rev <= 0.0 {
                return Err(QslError::DivergentEntropyProduction {
                    omega: ch.omega,
                    forward: term.forward,
                });
            }
            let ln_ratio = w_fwd.ln() - w_rev.ln() + self.populations[term.n].max(p_floor).ln()
                - self.populations[term.m].max(p_floor).ln();
            sigma += term.forward * ln_ratio;
        }
        Ok(sigma)
    }

    /// `A = ½ Σ' (W^{ω}_{mn} p_n + W^{-ω}_{nm} p_m)`.
    pub fn activity(&self) -> f64 {
        0.5 * self.primed_terms().map(|t| t.forward + t.reverse).sum::<f64>()
    }

    /// Heat flux from rates: `Q̇ = -Σ' W^{ω}_{mn} p_n ω`.
    pub fn heat_flux(&self) -> f64 {
        -self
            .primed_terms()
            .map(|t| t.forward * self.channels[t.channel].omega)
            .sum::<f64>()
    }

    /// Entropy flux from rates:
    /// `Ṡ = Σ W^{ω}_{mn} p_n (ln p_n - ln p_m)`.
    pub fn entropy_flux(&self, p_floor: f64) -> f64 {
        let ln_p: Vec<f64> = self.populations.iter().map(|p| p.max(p_floor).ln()).collect();
        self.primed_terms().map(|t| t.forward * (ln_p[t.n] - ln_p[t.m])).sum()
    }

    /// `Σ'_{ω,α,n} (W^{ω}_{mn} p_n - W^{-ω}_{nm} p_m)` for each `m`: the
    /// population derivative driven by the bath.
    pub fn population_rates(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for t in self.primed_terms() {
            out[t.m] += t.forward - t.reverse;
        }
        out
    }
}

/// Rates `W^{ω,α}_{mn}` over the eigenvectors in `spectrum` (the eigenbasis
/// of `ρ`, not of `H`).
pub fn transition_matrix(spectrum: &EigenSystem, jumps: &JumpOperatorSet) -> Result<TransitionMatrix> {
    let dim = spectrum.dim();
    if jumps.dim() != dim {
        return Err(QslError::DimensionMismatch {
            expected: dim,
            found: jumps.dim(),
        });
    }
    let channels = jumps
        .ops
        .iter()
        .map(|op| {
            let elements = spectrum.to_basis(&op.matrix);
            ChannelRates {
                omega: op.omega,
                coupling: op.coupling,
                mirror: op.mirror,
                rates: DMatrix::from_fn(dim, dim, |m, n| op.rate * elements[(m, n)].norm_sqr()),
            }
        })
        .collect();
    Ok(TransitionMatrix {
        channels,
        populations: spectrum.values.iter().map(|p| p.max(0.0)).collect(),
        rate_scale: jumps.max_rate(),
    })
}

/// `Q̇ = Tr[D[ρ] H]`; the commutator part of `∂ρ` contributes nothing.
pub fn heat_flux(rho: &CMatrix, jumps: &JumpOperatorSet) -> Result<f64> {
    let d = dissipator_apply(rho, jumps)?;
    let h = jumps.energies.reconstruct();
    Ok(trace_product(&d, &h).re)
}

/// `Ṡ = -Tr[(∂ρ) ln ρ]` for a given `∂ρ`.
pub fn entropy_flux_of(rho_dot: &CMatrix, spectrum: &EigenSystem, p_floor: f64) -> f64 {
    -trace_product(rho_dot, &log_on_support(spectrum, p_floor)).re
}

/// `Ṡ = -Tr[D[ρ] ln ρ]`; the unitary part vanishes because `ln ρ` commutes
/// with `ρ`.
pub fn entropy_flux(rho: &CMatrix, spectrum: &EigenSystem, jumps: &JumpOperatorSet, p_floor: f64) -> Result<f64> {
    let d = dissipator_apply(rho, jumps)?;
    Ok(entropy_flux_of(&d, spectrum, p_floor))
}

pub fn entropy_production_rate(spectrum: &EigenSystem, jumps: &JumpOperatorSet, p_floor: f64) -> Result<f64> {
    transition_matrix(spectrum, jumps)?.entropy_production(p_floor)
}

pub fn dynamical_activity(spectrum: &EigenSystem, jumps: &JumpOperatorSet) -> Result<f64> {
    Ok(transition_matrix(spectrum, jumps)?.activity())
}

/// Thermodynamic record of one time slice.
#[derive(Clone, Debug)]
pub struct ThermoSample {
    pub t: f64,
    pub sigma_dot: f64,
    pub entropy_flux: f64,
    pub heat_flux: f64,
    pub activity: f64,
    pub transitions: TransitionMatrix,
}

pub fn thermo_sample(
    t: f64,
    rho: &CMatrix,
    spectrum: &EigenSystem,
    jumps: &JumpOperatorSet,
    p_floor: f64,
) -> Result<ThermoSample> {
    let transitions = transition_matrix(spectrum, jumps)?;
    Ok(ThermoSample {
        t,
        sigma_dot: transitions.entropy_production(p_floor)?,
        entropy_flux: entropy_flux(rho, spectrum, jumps, p_floor)?,
        heat_flux: heat_flux(rho, jumps)?,
        activity: transitions.activity(),
        transitions,
    })
}
