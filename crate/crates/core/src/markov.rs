//! Single-site Markov chains that satisfy detailed balance.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gibbs::{check_beta, ClassicalModel, GibbsDistribution, ModelKind};
use crate::graphs::SpinBasis;
use crate::linalg::{dense_eigenvalues, lowest_eigenpairs, LanczosOptions, DENSE_LIMIT};
use crate::sparse::CsrMatrix;

/// Detailed-balance residual accepted by [`check_detailed_balance`].
pub const DETAILED_BALANCE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainKind {
    /// Heat-bath update of a uniformly chosen spin.
    Glauber,
    /// Metropolis toggle of a uniformly chosen vertex; blocked proposals
    /// are rejected.
    Metropolis,
}

/// Row-stochastic transition matrix over a model's basis, `M(x, y)` being
/// the probability of moving from `x` to `y`.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    kind: ChainKind,
    beta: f64,
    sites: usize,
    basis: Arc<SpinBasis>,
    energies: Vec<f64>,
    matrix: CsrMatrix,
}

impl TransitionMatrix {
    pub fn kind(&self) -> ChainKind {
        self.kind
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn basis(&self) -> &Arc<SpinBasis> {
        &self.basis
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

/// Glauber dynamics for an Ising model: pick spin `i` with probability
/// `1/n` and set it up with probability `1/(1 + e^{-2βhᵢ})`, where `hᵢ` is
/// the sum of neighbouring spins.
pub fn glauber_chain(model: &ClassicalModel, beta: f64) -> Result<TransitionMatrix> {
    check_beta(beta)?;
    if model.kind() != ModelKind::Ising {
        return Err(Error::domain("Glauber dynamics needs an Ising model"));
    }
    let g = model.graph();
    let n = model.sites();
    let basis = model.basis().clone();
    let inv_n = 1.0 / n as f64;
    let matrix = CsrMatrix::from_rows(basis.len(), |x, out| {
        let s = basis.state(x);
        for i in 0..n {
            let field: f64 = g
                .neighbors(i)
                .map(|j| if s >> j & 1 == 1 { 1.0 } else { -1.0 })
                .sum();
            let p_up = 1.0 / (1.0 + (-2.0 * beta * field).exp());
            let up = s | 1 << i;
            let down = s & !(1 << i);
            out.push((up as usize, p_up * inv_n));
            out.push((down as usize, (1.0 - p_up) * inv_n));
        }
    });
    Ok(TransitionMatrix {
        kind: ChainKind::Glauber,
        beta,
        sites: n,
        basis,
        energies: model.energies().to_vec(),
        matrix,
    })
}

/// Metropolis dynamics on weighted independent sets: pick vertex `i` with
/// probability `1/n` and propose toggling it. Additions next to an occupied
/// vertex are rejected; otherwise accept with `min(1, e^{-βΔE})`.
pub fn metropolis_is_chain(model: &ClassicalModel, beta: f64) -> Result<TransitionMatrix> {
    check_beta(beta)?;
    if model.kind() != ModelKind::WeightedIndependentSet {
        return Err(Error::domain("Metropolis chain needs an independent-set model"));
    }
    let g = model.graph();
    let n = model.sites();
    let basis = model.basis().clone();
    let inv_n = 1.0 / n as f64;
    let matrix = CsrMatrix::from_rows(basis.len(), |x, out| {
        let s = basis.state(x);
        let mut stay = 1.0;
        for i in 0..n {
            let occupied = s >> i & 1 == 1;
            if !occupied && s & g.neighbor_mask(i) != 0 {
                continue;
            }
            let delta = if occupied { g.weight(i) } else { -g.weight(i) };
            let accept = (-beta * delta).exp().min(1.0) * inv_n;
            let target = basis.index_of(s ^ 1 << i).expect("toggle stays independent");
            out.push((target, accept));
            stay -= accept;
        }
        out.push((x, stay.max(0.0)));
    });
    Ok(TransitionMatrix {
        kind: ChainKind::Metropolis,
        beta,
        sites: n,
        basis,
        energies: model.energies().to_vec(),
        matrix,
    })
}

fn same_basis(a: &Arc<SpinBasis>, b: &Arc<SpinBasis>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// Largest `|w(x)M(x,y) - w(y)M(y,x)|` with the weights `w = p / max p`.
/// Fails when it exceeds [`DETAILED_BALANCE_TOL`].
pub fn check_detailed_balance(m: &TransitionMatrix, p: &GibbsDistribution) -> Result<f64> {
    if !same_basis(&m.basis, p.basis()) || p.probabilities.len() != m.dim() {
        return Err(Error::domain("distribution and chain live on different bases"));
    }
    let p_max = p.probabilities.iter().copied().fold(0.0, f64::max);
    let w: Vec<f64> = p.probabilities.iter().map(|x| x / p_max).collect();
    let residual = m
        .matrix
        .iter()
        .map(|(x, y, v)| (w[x] * v - w[y] * m.matrix.get(y, x)).abs())
        .fold(0.0, f64::max);
    if residual > DETAILED_BALANCE_TOL {
        return Err(Error::DetailedBalance {
            residual,
            tolerance: DETAILED_BALANCE_TOL,
        });
    }
    Ok(residual)
}

/// `D^{1/2} M D^{-1/2}` with `D` the Gibbs weights, entrywise
/// `e^{-β(E_x - E_y)/2} M(x, y)`. Symmetric iff detailed balance holds.
pub fn symmetrized(m: &TransitionMatrix) -> CsrMatrix {
    let e = &m.energies;
    CsrMatrix::from_rows(m.dim(), |x, out| {
        let (cols, vals) = m.matrix.row(x);
        for (&y, &v) in cols.iter().zip(vals) {
            out.push((y, (-0.5 * m.beta * (e[x] - e[y])).exp() * v));
        }
    })
}

/// Eigenvalues of the chain, ascending, from its symmetrised form.
pub fn chain_spectrum(m: &TransitionMatrix) -> Vec<f64> {
    dense_eigenvalues(symmetrized(m).to_dense())
}

/// `1 - λ₂`, with `λ₂` the second largest eigenvalue of the chain.
pub fn spectral_gap(m: &TransitionMatrix) -> Result<f64> {
    let s = symmetrized(m);
    if s.dim() < 2 {
        return Err(Error::InvalidSize {
            what: "chain dimension",
            value: s.dim(),
        });
    }
    if s.dim() <= DENSE_LIMIT {
        let vals = dense_eigenvalues(s.to_dense());
        return Ok((1.0 - vals[vals.len() - 2]).max(0.0));
    }
    let laplacian = CsrMatrix::from_rows(s.dim(), |x, out| {
        out.push((x, 1.0));
        let (cols, vals) = s.row(x);
        out.extend(cols.iter().zip(vals).map(|(&y, &v)| (y, -v)));
    });
    let pairs = lowest_eigenpairs(&laplacian, 2, &LanczosOptions::default())?;
    Ok(pairs[1].value.max(0.0))
}

/// Starting distribution for a mixing-time computation.
#[derive(Debug, Clone, PartialEq)]
pub enum StartDistribution {
    /// Maximise the total-variation distance over every basis state.
    WorstCase,
    /// Evolve a single distribution, indexed like the basis.
    Given(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingOptions {
    /// Total-variation threshold `ε`.
    pub threshold: f64,
    /// Step cap; exceeding it is reported, not raised.
    pub max_steps: u64,
    /// Largest basis for which the worst case over all starts is computed.
    pub worst_case_limit: usize,
}

/// `1/(2e)`, the largest threshold for which `t_mix ≥ t_rel - 1` holds for
/// every reversible chain.
pub const DEFAULT_TV_THRESHOLD: f64 = 0.5 / std::f64::consts::E;

impl Default for MixingOptions {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_TV_THRESHOLD,
            max_steps: 1 << 40,
            worst_case_limit: 1 << 11,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MixingTime {
    Steps(u64),
    CapExceeded(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixingReport {
    pub threshold: f64,
    pub sites: usize,
    /// Gap of the chain, `1 - λ₂`.
    pub spectral_gap: f64,
    /// Gap of the parent Hamiltonian, `n (1 - λ₂)`.
    pub parent_gap: f64,
    pub t_mix: MixingTime,
}

impl MixingReport {
    /// Mixing time per site, `t_mix / n`.
    pub fn t_m(&self) -> Option<f64> {
        match self.t_mix {
            MixingTime::Steps(t) => Some(t as f64 / self.sites as f64),
            MixingTime::CapExceeded(_) => None,
        }
    }

    /// Right-hand side of the lower bound `t_m ≥ 1/Δ - 1/n`.
    pub fn lower_bound(&self) -> f64 {
        1.0 / self.parent_gap - 1.0 / self.sites as f64
    }

    /// `None` only when the step cap was hit below the bound, so that
    /// `t_mix > cap` does not decide it.
    pub fn bound_holds(&self) -> Option<bool> {
        let lb = self.lower_bound();
        match self.t_mix {
            MixingTime::Steps(t) => Some(t as f64 / self.sites as f64 >= lb - 1e-9 * lb.abs()),
            MixingTime::CapExceeded(cap) => (cap as f64 / self.sites as f64 >= lb).then_some(true),
        }
    }
}

fn worst_tv(p: &DMatrix<f64>, pi: &[f64]) -> f64 {
    (0..p.nrows())
        .map(|x| 0.5 * (0..p.ncols()).map(|y| (p[(x, y)] - pi[y]).abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn tv(mu: &[f64], pi: &[f64]) -> f64 {
    0.5 * mu.iter().zip(pi).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Smallest `t` with `max_x ‖M^t(x, ·) - π‖_TV ≤ ε`, by repeated squaring
/// followed by binary lifting. Every product has non-negative entries, so
/// round-off stays at the level of the entries themselves.
fn worst_case_mixing(m: &TransitionMatrix, pi: &[f64], opts: &MixingOptions) -> MixingTime {
    let eps = opts.threshold;
    let dim = m.dim();
    if worst_tv(&DMatrix::identity(dim, dim), pi) <= eps {
        return MixingTime::Steps(0);
    }
    let mut powers = vec![m.matrix.to_dense()];
    while worst_tv(powers.last().unwrap(), pi) > eps {
        let k = powers.len() as u32;
        if 1u64.checked_shl(k).map_or(true, |t| t > opts.max_steps) {
            return MixingTime::CapExceeded(opts.max_steps);
        }
        let last = powers.last().unwrap();
        powers.push(last * last);
    }
    let k = powers.len() - 1;
    if k == 0 {
        return MixingTime::Steps(1);
    }
    let mut current = powers[k - 1].clone();
    let mut t = 1u64 << (k - 1);
    for j in (0..k - 1).rev() {
        let candidate = &current * &powers[j];
        if worst_tv(&candidate, pi) > eps {
            current = candidate;
            t += 1 << j;
        }
    }
    MixingTime::Steps(t + 1)
}

fn given_start_mixing(
    m: &TransitionMatrix,
    pi: &[f64],
    start: &[f64],
    opts: &MixingOptions,
) -> MixingTime {
    let mut mu = start.to_vec();
    let mut t = 0u64;
    while tv(&mu, pi) > opts.threshold {
        if t >= opts.max_steps {
            return MixingTime::CapExceeded(opts.max_steps);
        }
        mu = m.matrix.vecmat(&mu);
        t += 1;
    }
    MixingTime::Steps(t)
}

/// Mixing time to total-variation threshold `opts.threshold`, together
/// with the gaps entering the lower bound.
pub fn mixing_time(
    m: &TransitionMatrix,
    p: &GibbsDistribution,
    start: &StartDistribution,
    opts: &MixingOptions,
) -> Result<MixingReport> {
    if !same_basis(&m.basis, p.basis()) {
        return Err(Error::domain("distribution and chain live on different bases"));
    }
    if !(opts.threshold > 0.0 && opts.threshold < 1.0) {
        return Err(Error::domain(format!(
            "threshold must lie in (0, 1), got {}",
            opts.threshold
        )));
    }
    let pi = &p.probabilities;
    let t_mix = match start {
        StartDistribution::WorstCase => {
            if m.dim() > opts.worst_case_limit {
                return Err(Error::Capacity {
                    requested: m.dim(),
                    cap: opts.worst_case_limit,
                });
            }
            worst_case_mixing(m, pi, opts)
        }
        StartDistribution::Given(mu) => {
            if mu.len() != m.dim() {
                return Err(Error::domain("start distribution has the wrong length"));
            }
            given_start_mixing(m, pi, mu, opts)
        }
    };
    let gap = spectral_gap(m)?;
    Ok(MixingReport {
        threshold: opts.threshold,
        sites: m.sites,
        spectral_gap: gap,
        parent_gap: gap * m.sites as f64,
        t_mix,
    })
}

/// Samples a trajectory of `steps` transitions from `start`, returning the
/// visited states including the initial one.
pub fn simulate_chain(m: &TransitionMatrix, start: u64, steps: usize, seed: u64) -> Result<Vec<u64>> {
    let mut x = m
        .basis
        .index_of(start)
        .ok_or_else(|| Error::domain(format!("start state {start:#b} is not in the basis")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut path = Vec::with_capacity(steps + 1);
    path.push(start);
    for _ in 0..steps {
        let (cols, vals) = m.matrix.row(x);
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut next = *cols.last().expect("stochastic rows are non-empty");
        for (&y, &v) in cols.iter().zip(vals) {
            acc += v;
            if u < acc {
                next = y;
                break;
            }
        }
        x = next;
        path.push(m.basis.state(x));
    }
    Ok(path)
}
