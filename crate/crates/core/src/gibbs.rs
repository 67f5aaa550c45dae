//! Classical energy functions and their Gibbs distributions.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graphs::{build_cycle, Graph, SpinBasis, DEFAULT_BASIS_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// `H = -Σ_{⟨ij⟩} σᵢσⱼ` over the graph edges, full basis.
    Ising,
    /// `H = -Σ wᵢ nᵢ` restricted to independent sets.
    WeightedIndependentSet,
}

/// A classical energy function tabulated over its basis.
#[derive(Debug, Clone)]
pub struct ClassicalModel {
    kind: ModelKind,
    graph: Graph,
    basis: Arc<SpinBasis>,
    energies: Vec<f64>,
}

pub fn ising_energy(g: &Graph, state: u64) -> f64 {
    g.edges()
        .iter()
        .map(|&(u, v)| if (state >> u ^ state >> v) & 1 == 0 { -1.0 } else { 1.0 })
        .sum()
}

pub fn independent_set_energy(g: &Graph, state: u64) -> f64 {
    -(0..g.vertex_count())
        .filter(|&i| state >> i & 1 == 1)
        .map(|i| g.weight(i))
        .sum::<f64>()
}

impl ClassicalModel {
    pub fn ising(graph: Graph, cap: usize) -> Result<Self> {
        let basis = Arc::new(SpinBasis::full(graph.vertex_count(), cap)?);
        let energies = basis.states().iter().map(|&s| ising_energy(&graph, s)).collect();
        Ok(Self {
            kind: ModelKind::Ising,
            graph,
            basis,
            energies,
        })
    }

    /// Ferromagnetic Ising ring on `n ≥ 3` spins.
    pub fn ising_cycle(n: usize) -> Result<Self> {
        Self::ising(build_cycle(n)?, DEFAULT_BASIS_CAP)
    }

    pub fn independent_set(graph: Graph, cap: usize) -> Result<Self> {
        if let Some(w) = graph.weights().iter().find(|&&w| w <= 0.0) {
            return Err(Error::InvalidGraph(format!(
                "independent-set weights must be positive, found {w}"
            )));
        }
        let basis = Arc::new(SpinBasis::independent_sets(&graph, cap)?);
        let energies = basis
            .states()
            .iter()
            .map(|&s| independent_set_energy(&graph, s))
            .collect();
        Ok(Self {
            kind: ModelKind::WeightedIndependentSet,
            graph,
            basis,
            energies,
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn basis(&self) -> &Arc<SpinBasis> {
        &self.basis
    }

    pub fn sites(&self) -> usize {
        self.graph.vertex_count()
    }

    /// Energies indexed like the basis.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn energy(&self, state: u64) -> Result<f64> {
        self.basis
            .index_of(state)
            .map(|k| self.energies[k])
            .ok_or_else(|| Error::domain(format!("state {state:#b} is not in the basis")))
    }
}

/// Normalised Boltzmann weights `e^{-βH}/Z` over a basis.
#[derive(Debug, Clone)]
pub struct GibbsDistribution {
    pub beta: f64,
    pub probabilities: Vec<f64>,
    pub log_partition: f64,
    basis: Arc<SpinBasis>,
}

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() && beta >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("inverse temperature must be finite and ≥ 0, got {beta}")))
    }
}

/// Gibbs distribution at inverse temperature `beta`, computed with a shifted
/// exponent so large `beta` does not overflow.
pub fn gibbs_distribution(model: &ClassicalModel, beta: f64) -> Result<GibbsDistribution> {
    check_beta(beta)?;
    let e_min = model.energies.iter().copied().fold(f64::INFINITY, f64::min);
    let mut probabilities: Vec<f64> = model
        .energies
        .iter()
        .map(|&e| (-beta * (e - e_min)).exp())
        .collect();
    let z: f64 = probabilities.iter().sum();
    probabilities.iter_mut().for_each(|p| *p /= z);
    Ok(GibbsDistribution {
        beta,
        probabilities,
        log_partition: z.ln() - beta * e_min,
        basis: model.basis.clone(),
    })
}

impl GibbsDistribution {
    pub fn basis(&self) -> &Arc<SpinBasis> {
        &self.basis
    }

    /// Shannon entropy `-Σ p ln p`.
    pub fn entropy(&self) -> f64 {
        -self
            .probabilities
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|p| p * p.ln())
            .sum::<f64>()
    }
}

/// `β*` where the two center sectors of the star have equal weight, `ln φ`.
pub fn star_critical_beta() -> f64 {
    ((1.0 + 5f64.sqrt()) / 2.0).ln()
}

/// Log partition functions of the star's center-empty and center-occupied
/// sectors: `ln Z0 = b ln(1 + 2e^β)`, `ln Z1 = bβ + b ln(1 + e^β)`.
pub fn star_log_partitions(b: usize, beta: f64) -> (f64, f64) {
    let b = b as f64;
    let lz0 = b * (2.0 * beta.exp()).ln_1p();
    let lz1 = b * beta + b * beta.exp().ln_1p();
    (lz0, lz1)
}

/// Closed-form `(Z0, Z1)` for the star. Overflows to infinity for large
/// `bβ`; use [`star_log_partitions`] there.
pub fn star_partition_closed_form(b: usize, beta: f64) -> (f64, f64) {
    let (a, c) = star_log_partitions(b, beta);
    (a.exp(), c.exp())
}

/// Thermodynamics of the star from the closed-form partition function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarThermo {
    pub log_partition: f64,
    pub energy: f64,
    pub entropy: f64,
    /// Probability that the center is occupied.
    pub center_occupation: f64,
}

pub fn star_thermo(b: usize, beta: f64) -> StarThermo {
    let (lz0, lz1) = star_log_partitions(b, beta);
    let lz = lz0.max(lz1) + (-(lz0 - lz1).abs()).exp().ln_1p();
    let w1 = (lz1 - lz).exp();
    let w0 = (lz0 - lz).exp();
    let bf = b as f64;
    let x = beta.exp();
    let d0 = bf * 2.0 * x / (1.0 + 2.0 * x);
    let d1 = bf + bf * x / (1.0 + x);
    let energy = -(w0 * d0 + w1 * d1);
    StarThermo {
        log_partition: lz,
        energy,
        entropy: beta * energy + lz,
        center_occupation: w1,
    }
}

/// Location of the sharpest bend in the entropy per branch over a uniform
/// grid on `[lo, hi]`, from the largest second difference.
pub fn star_entropy_kink(b: usize, lo: f64, hi: f64, points: usize) -> f64 {
    let h = (hi - lo) / (points - 1) as f64;
    let s: Vec<f64> = (0..points)
        .map(|k| star_thermo(b, lo + k as f64 * h).entropy / b as f64)
        .collect();
    (1..points - 1)
        .max_by(|&i, &j| {
            let ci = (s[i + 1] - 2.0 * s[i] + s[i - 1]).abs();
            let cj = (s[j + 1] - 2.0 * s[j] + s[j - 1]).abs();
            ci.total_cmp(&cj)
        })
        .map(|k| lo + k as f64 * h)
        .unwrap_or(lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{build_path, build_star};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn ising_ring_energies() {
        let m = ClassicalModel::ising_cycle(4).unwrap();
        assert_eq!(m.energy(0b1111).unwrap(), -4.0);
        assert_eq!(m.energy(0b0000).unwrap(), -4.0);
        assert_eq!(m.energy(0b0101).unwrap(), 4.0);
        assert_eq!(m.energy(0b0011).unwrap(), 0.0);
    }

    #[test]
    fn independent_set_energy_rejects_non_members() {
        let m = ClassicalModel::independent_set(build_path(3).unwrap(), DEFAULT_BASIS_CAP).unwrap();
        assert_eq!(m.energy(0b101).unwrap(), -2.0);
        assert!(matches!(m.energy(0b011), Err(Error::Domain(_))));
    }

    #[test]
    fn negative_beta_is_rejected() {
        let m = ClassicalModel::ising_cycle(3).unwrap();
        assert!(gibbs_distribution(&m, -0.1).is_err());
        assert!(gibbs_distribution(&m, f64::NAN).is_err());
    }

    #[test]
    fn ising_ring_partition_function_matches_transfer_matrix() {
        for n in 3..=10 {
            for &beta in &[0.0, 0.3, 1.0, 2.5] {
                let m = ClassicalModel::ising_cycle(n).unwrap();
                let g = gibbs_distribution(&m, beta).unwrap();
                let z = (2.0 * beta.cosh()).powi(n as i32) + (2.0 * beta.sinh()).powi(n as i32);
                assert_relative_eq!(g.log_partition, z.ln(), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn star_partition_matches_enumeration() {
        for b in 1..=6 {
            for &beta in &[0.0, 0.2, star_critical_beta(), 1.5] {
                let m = ClassicalModel::independent_set(build_star(b).unwrap(), DEFAULT_BASIS_CAP)
                    .unwrap();
                let (z0, z1) = star_partition_closed_form(b, beta);
                let mut brute = (0.0, 0.0);
                for (k, &s) in m.basis().states().iter().enumerate() {
                    let w = (-beta * m.energies()[k]).exp();
                    if s & 1 == 0 {
                        brute.0 += w;
                    } else {
                        brute.1 += w;
                    }
                }
                assert_relative_eq!(z0, brute.0, max_relative = 1e-12);
                assert_relative_eq!(z1, brute.1, max_relative = 1e-12);
                let g = gibbs_distribution(&m, beta).unwrap();
                let t = star_thermo(b, beta);
                assert_relative_eq!(t.entropy, g.entropy(), epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn star_sectors_balance_at_golden_beta() {
        let (a, b) = star_log_partitions(7, star_critical_beta());
        assert_relative_eq!(a, b, epsilon = 1e-12);
    }

    #[test]
    fn star_entropy_at_infinite_temperature() {
        assert_relative_eq!(star_thermo(2, 0.0).entropy, 13f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn star_kink_approaches_golden_beta() {
        let k = star_entropy_kink(20_000, 0.3, 0.7, 4001);
        assert!((k - star_critical_beta()).abs() < 0.005, "kink at {k}");
    }

    proptest! {
        #[test]
        fn gibbs_is_normalised(n in 3usize..9, beta in 0.0f64..6.0) {
            let m = ClassicalModel::ising_cycle(n).unwrap();
            let g = gibbs_distribution(&m, beta).unwrap();
            let total: f64 = g.probabilities.iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            prop_assert!(g.probabilities.iter().all(|&p| p >= 0.0));
        }
    }
}
