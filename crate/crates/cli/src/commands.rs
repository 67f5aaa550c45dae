//! Single computations behind the `gap`, `mixing` and `parent-check`
//! subcommands.

use qgibbs::graphs::DEFAULT_BASIS_CAP;
use qgibbs::markov::{check_detailed_balance, mixing_time, MixingOptions, MixingReport, StartDistribution, DETAILED_BALANCE_TOL};
use qgibbs::gibbs::gibbs_distribution;
use qgibbs::parent::{build_parent, energy_gap, gibbs_state_vector, lowest_levels};
use qgibbs::{Error, Result};

use crate::config::{ExperimentKind, ModelSpec};
use crate::experiments::build_instance;

/// Residual bound shared by the ground-state checks.
pub const GROUND_STATE_TOL: f64 = 1e-10;

/// Gap of the parent Hamiltonian of `model` at `beta`.
pub fn gap(model: ModelSpec, n: usize, beta: f64, seed: u64) -> Result<f64> {
    let (m, chain) = build_instance(model, n, beta, seed, DEFAULT_BASIS_CAP)?;
    energy_gap(&build_parent(&chain, &m, beta)?)
}

pub fn mixing(model: ModelSpec, n: usize, beta: f64, seed: u64, opts: &MixingOptions) -> Result<MixingReport> {
    let (m, chain) = build_instance(model, n, beta, seed, DEFAULT_BASIS_CAP)?;
    let p = gibbs_distribution(&m, beta)?;
    mixing_time(&chain, &p, &StartDistribution::WorstCase, opts)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParentCheck {
    pub basis_size: usize,
    pub detailed_balance_residual: f64,
    /// `‖H ψ(β)‖` for the coherent Gibbs state.
    pub ground_residual: f64,
    pub min_eigenvalue: f64,
}

impl ParentCheck {
    pub fn passes(&self) -> bool {
        self.detailed_balance_residual <= DETAILED_BALANCE_TOL
            && self.ground_residual < GROUND_STATE_TOL
            && self.min_eigenvalue >= -GROUND_STATE_TOL
    }
}

/// Detailed balance of the chain and the zero-energy ground state of its
/// parent. A detailed-balance violation is returned as an error.
pub fn parent_check(model: ModelSpec, n: usize, beta: f64, seed: u64) -> Result<ParentCheck> {
    let (m, chain) = build_instance(model, n, beta, seed, DEFAULT_BASIS_CAP)?;
    let p = gibbs_distribution(&m, beta)?;
    let detailed_balance_residual = check_detailed_balance(&chain, &p)?;
    let h = build_parent(&chain, &m, beta)?;
    let psi = gibbs_state_vector(&m, beta)?;
    let ground_residual = h.matrix().matvec(&psi.amplitudes).iter().map(|x| x * x).sum::<f64>().sqrt();
    let min_eigenvalue = lowest_levels(&h, 1)?[0];
    Ok(ParentCheck {
        basis_size: m.basis().len(),
        detailed_balance_residual,
        ground_residual,
        min_eigenvalue,
    })
}

/// Raises an accuracy error when the check fails.
pub fn require(check: &ParentCheck) -> Result<()> {
    if check.passes() {
        Ok(())
    } else {
        Err(Error::Accuracy {
            drift: check.ground_residual.max(-check.min_eigenvalue),
        })
    }
}

pub fn list_experiments() -> String {
    ExperimentKind::ALL
        .iter()
        .map(|k| format!("{:<20} {}  [{}]\n", k.label(), k.description(), k.files().join(", ")))
        .collect()
}
