//! Parent Hamiltonians of weighted independent sets.
//!
//! `H = Σᵢ Pᵢ [V_e,ᵢ nᵢ + V_g,ᵢ (1 - nᵢ) - Ωᵢ σˣᵢ]` on the independent-set
//! subspace, where `Pᵢ` projects onto configurations with every neighbour
//! of `i` empty.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gibbs::{check_beta, gibbs_distribution, ClassicalModel};
use crate::graphs::{build_cycle, build_path, build_star, Graph, SpinBasis, DEFAULT_BASIS_CAP};
use crate::parent::{ground_state, lowest_levels, OperatorFamily, SymmetricOperator, DEGENERACY_TOL};

/// Per-vertex couplings of the independent-set parent.
#[derive(Debug, Clone, PartialEq)]
pub struct IsParentParams {
    pub v_e: Vec<f64>,
    pub v_g: Vec<f64>,
    pub omega: Vec<f64>,
}

impl IsParentParams {
    /// Couplings of the Metropolis parent: `V_e = e^{-βw}`, `V_g = 1`,
    /// `Ω = e^{-βw/2}`.
    pub fn from_beta(g: &Graph, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        Ok(Self {
            v_e: g.weights().iter().map(|w| (-beta * w).exp()).collect(),
            v_g: vec![1.0; g.vertex_count()],
            omega: g.weights().iter().map(|w| (-0.5 * beta * w).exp()).collect(),
        })
    }

    /// The same couplings on every vertex.
    pub fn uniform(n: usize, v_e: f64, v_g: f64, omega: f64) -> Self {
        Self {
            v_e: vec![v_e; n],
            v_g: vec![v_g; n],
            omega: vec![omega; n],
        }
    }

    /// Flattened `[V_e…, V_g…, Ω…]`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = self.v_e.clone();
        v.extend(&self.v_g);
        v.extend(&self.omega);
        v
    }

    pub fn from_slice(params: &[f64]) -> Result<Self> {
        if params.len() % 3 != 0 || params.is_empty() {
            return Err(Error::domain("parameter vector length must be a positive multiple of 3"));
        }
        let n = params.len() / 3;
        Ok(Self {
            v_e: params[..n].to_vec(),
            v_g: params[n..2 * n].to_vec(),
            omega: params[2 * n..].to_vec(),
        })
    }
}

/// Independent-set parent family; parameters are the flattened
/// [`IsParentParams`].
#[derive(Debug, Clone)]
pub struct IsFamily {
    graph: Graph,
    basis: Arc<SpinBasis>,
}

impl IsFamily {
    pub fn new(graph: Graph) -> Result<Self> {
        Self::with_cap(graph, DEFAULT_BASIS_CAP)
    }

    pub fn with_cap(graph: Graph, cap: usize) -> Result<Self> {
        let basis = Arc::new(SpinBasis::independent_sets(&graph, cap)?);
        Ok(Self { graph, basis })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }
}

impl OperatorFamily for IsFamily {
    fn basis(&self) -> &Arc<SpinBasis> {
        &self.basis
    }

    fn param_count(&self) -> usize {
        3 * self.graph.vertex_count()
    }

    fn row(&self, params: &[f64], s: u64, out: &mut Vec<(u64, f64)>) {
        let n = self.graph.vertex_count();
        let (v_e, rest) = params.split_at(n);
        let (v_g, omega) = rest.split_at(n);
        let mut diag = 0.0;
        for i in 0..n {
            if s & self.graph.neighbor_mask(i) != 0 {
                continue;
            }
            diag += if s >> i & 1 == 1 { v_e[i] } else { v_g[i] };
            out.push((s ^ 1 << i, -omega[i]));
        }
        out.push((s, diag));
    }
}

/// The parent operator on the independent sets of `g`.
pub fn build_is_parent(g: &Graph, p: &IsParentParams) -> Result<SymmetricOperator> {
    let n = g.vertex_count();
    if p.v_e.len() != n || p.v_g.len() != n || p.omega.len() != n {
        return Err(Error::domain(format!("couplings do not match {n} vertices")));
    }
    IsFamily::new(g.clone())?.build(&p.to_vec())
}

/// `|⟨M_k⟩|` with `M_k = (1/n) Σⱼ e^{2πij/k} σᶻⱼ` in the given state.
pub fn staggered_magnetization(basis: &SpinBasis, amplitudes: &[f64], k: usize) -> f64 {
    let n = basis.sites();
    let mut sigma = vec![0.0; n];
    let norm: f64 = amplitudes.iter().map(|a| a * a).sum();
    for (&s, a) in basis.states().iter().zip(amplitudes) {
        let p = a * a / norm;
        for (j, sj) in sigma.iter_mut().enumerate() {
            *sj += p * if s >> j & 1 == 1 { 1.0 } else { -1.0 };
        }
    }
    let (re, im) = phase_sum(&sigma, k);
    re.hypot(im) / n as f64
}

/// Finite-size estimator of `|M_k|` from two-point correlations,
/// `√max(0, Σ_{j≠l} e^{2πi(j−l)/k} ⟨σᶻⱼσᶻₗ⟩ / (n(n−1)))`.
///
/// Unlike [`staggered_magnetization`] it does not vanish when the ground
/// state superposes symmetry-related crystals, and dropping the `j = l`
/// terms removes the `1/√n` floor of the plain `√⟨M_k†M_k⟩`.
pub fn staggered_order(basis: &SpinBasis, amplitudes: &[f64], k: usize) -> f64 {
    let n = basis.sites();
    if n < 2 {
        return 0.0;
    }
    let norm: f64 = amplitudes.iter().map(|a| a * a).sum();
    let mut sigma = vec![0.0; n];
    let mut acc = 0.0;
    for (&s, a) in basis.states().iter().zip(amplitudes) {
        for (j, sj) in sigma.iter_mut().enumerate() {
            *sj = if s >> j & 1 == 1 { 1.0 } else { -1.0 };
        }
        let (re, im) = phase_sum(&sigma, k);
        acc += a * a / norm * (re * re + im * im - n as f64);
    }
    let nf = n as f64;
    (acc / (nf * (nf - 1.0))).max(0.0).sqrt()
}

/// Below this value of both order parameters a point counts as disordered.
pub const ORDER_THRESHOLD: f64 = 0.1;

/// Scale that maps the period-3 order of a perfect `100100…` crystal to 1
/// for large `n`.
pub const Z3_SCALE: f64 = 1.5;

fn phase_sum(sigma: &[f64], k: usize) -> (f64, f64) {
    sigma.iter().enumerate().fold((0.0, 0.0), |(re, im), (j, s)| {
        let phi = 2.0 * std::f64::consts::PI * j as f64 / k as f64;
        (re + s * phi.cos(), im + s * phi.sin())
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Open,
    Periodic,
}

impl Boundary {
    pub fn chain(self, n: usize) -> Result<Graph> {
        match self {
            Boundary::Open => build_path(n),
            Boundary::Periodic => build_cycle(n),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsPhase {
    Z2,
    Z3,
    Disordered,
}

impl IsPhase {
    pub fn label(self) -> &'static str {
        match self {
            IsPhase::Z2 => "Z2",
            IsPhase::Z3 => "Z3",
            IsPhase::Disordered => "disordered",
        }
    }
}

impl fmt::Display for IsPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderPoint {
    pub omega_over_vg: f64,
    pub ve_over_vg: f64,
    pub n: usize,
    /// [`staggered_order`] at period 2.
    pub m2: f64,
    /// [`staggered_order`] at period 3 times [`Z3_SCALE`].
    pub m3: f64,
    pub gap: f64,
    pub phase: IsPhase,
}

impl OrderPoint {
    pub fn order_parameter(&self) -> f64 {
        self.m2.max(self.m3)
    }
}

pub fn classify_order(m2: f64, m3: f64) -> IsPhase {
    if m2.max(m3) < ORDER_THRESHOLD {
        IsPhase::Disordered
    } else if m2 >= m3 {
        IsPhase::Z2
    } else {
        IsPhase::Z3
    }
}

/// Ground-state order parameters and gap of the uniform chain with
/// `V_g = 1` at each `(Ω/V_g, V_e/V_g)` grid point.
pub fn order_parameter_scan(n: usize, grid: &[(f64, f64)], boundary: Boundary) -> Result<Vec<OrderPoint>> {
    let g = boundary.chain(n)?;
    let family = IsFamily::new(g)?;
    let basis = family.basis().clone();
    grid.iter()
        .map(|&(omega, ve)| {
            let h = family.build(&IsParentParams::uniform(n, ve, 1.0, omega).to_vec())?;
            let gs = ground_state(&h)?;
            let levels = lowest_levels(&h, 2)?;
            let gap = levels[1] - levels[0];
            let m2 = staggered_order(&basis, &gs.vector, 2);
            let m3 = Z3_SCALE * staggered_order(&basis, &gs.vector, 3);
            let phase = classify_order(m2, m3);
            Ok(OrderPoint {
                omega_over_vg: omega,
                ve_over_vg: ve,
                n,
                m2,
                m3,
                gap: if gap < DEGENERACY_TOL { 0.0 } else { gap },
                phase,
            })
        })
        .collect()
}

/// Probabilities `(p01, p10)` of the star's center switching from empty to
/// occupied and back in one Metropolis sweep of the center:
/// `p01 = ((1 + e^β)/(1 + 2e^β))^b`, `p10 = e^{-bβ}`.
pub fn star_transition_probs(b: usize, beta: f64) -> Result<(f64, f64)> {
    check_beta(beta)?;
    let x = beta.exp();
    let bf = b as f64;
    Ok((((1.0 + x) / (1.0 + 2.0 * x)).powf(bf), (-bf * beta).exp()))
}

/// Projection of the star parent onto the two center sectors of the Gibbs
/// state, with the center's tunnelling set to `omega_center`.
#[derive(Debug, Clone, PartialEq)]
pub struct StarTwoState {
    pub b: usize,
    pub beta: f64,
    pub omega_center: f64,
    pub p01: f64,
    pub p10: f64,
    /// `[[⟨ψ₀|H|ψ₀⟩, ⟨ψ₀|H|ψ₁⟩], [⟨ψ₁|H|ψ₀⟩, ⟨ψ₁|H|ψ₁⟩]]`.
    pub h_eff: [[f64; 2]; 2],
}

impl StarTwoState {
    /// Tunnelling amplitude `J = Ω √p01` between the two sectors.
    pub fn coupling(&self) -> f64 {
        -self.h_eff[0][1]
    }

    pub fn gap(&self) -> f64 {
        let d = self.h_eff[0][0] - self.h_eff[1][1];
        (d * d + 4.0 * self.h_eff[0][1].powi(2)).sqrt()
    }

    /// Adiabatic time scale `1/J` of the sector crossing.
    pub fn predicted_ta(&self) -> f64 {
        1.0 / self.coupling()
    }
}

pub fn star_two_state_model(b: usize, beta: f64, omega_center: f64) -> Result<StarTwoState> {
    let (p01, p10) = star_transition_probs(b, beta)?;
    let j = omega_center * p01.sqrt();
    Ok(StarTwoState {
        b,
        beta,
        omega_center,
        p01,
        p10,
        h_eff: [[p01, -j], [-j, p10]],
    })
}

/// Normalised Gibbs amplitudes of the star restricted to the center-empty
/// (`occupied = false`) or center-occupied sector.
pub fn star_sector_state(b: usize, beta: f64, occupied: bool) -> Result<(Arc<SpinBasis>, Vec<f64>)> {
    let model = ClassicalModel::independent_set(build_star(b)?, DEFAULT_BASIS_CAP)?;
    let p = gibbs_distribution(&model, beta)?;
    let basis = model.basis().clone();
    let mut amps: Vec<f64> = basis
        .states()
        .iter()
        .zip(&p.probabilities)
        .map(|(&s, &q)| if (s & 1 == 1) == occupied { q.sqrt() } else { 0.0 })
        .collect();
    let norm = amps.iter().map(|a| a * a).sum::<f64>().sqrt();
    amps.iter_mut().for_each(|a| *a /= norm);
    Ok((basis, amps))
}
