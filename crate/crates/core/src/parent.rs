//! Quantum parent Hamiltonians whose ground states encode Gibbs distributions.

use std::io::{self, Write};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gibbs::{check_beta, gibbs_distribution, ClassicalModel};
use crate::graphs::SpinBasis;
use crate::linalg::{lowest_eigenpairs, LanczosOptions};
use crate::markov::{check_detailed_balance, TransitionMatrix};
use crate::sparse::CsrMatrix;

/// Tolerance on `|H(a,b) - H(b,a)|` for a stored operator.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Levels closer than this are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// Real symmetric operator on a bitstring basis.
#[derive(Debug, Clone)]
pub struct SymmetricOperator {
    basis: Arc<SpinBasis>,
    matrix: CsrMatrix,
}

impl SymmetricOperator {
    pub fn new(basis: Arc<SpinBasis>, matrix: CsrMatrix) -> Result<Self> {
        if basis.len() != matrix.dim() {
            return Err(Error::domain(format!(
                "operator of dimension {} on a basis of {} states",
                matrix.dim(),
                basis.len()
            )));
        }
        let scale = matrix.max_abs_row_sum().max(1.0);
        let asym = matrix.max_asymmetry();
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::domain(format!("operator is not symmetric: defect {asym:e}")));
        }
        Ok(Self { basis, matrix })
    }

    pub fn basis(&self) -> &Arc<SpinBasis> {
        &self.basis
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn expectation(&self, v: &[f64]) -> f64 {
        let hv = self.matrix.matvec(v);
        v.iter().zip(&hv).map(|(a, b)| a * b).sum::<f64>() / v.iter().map(|a| a * a).sum::<f64>()
    }

    /// Writes the nonzero entries as `row col value` lines, rows and columns
    /// being basis states, sorted by row then column.
    pub fn dump<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (i, j, v) in self.matrix.iter() {
            writeln!(out, "{} {} {:e}", self.basis.state(i), self.basis.state(j), v)?;
        }
        Ok(())
    }
}

/// A family of operators on a fixed basis that depends linearly on a
/// parameter vector.
pub trait OperatorFamily: Send + Sync {
    fn basis(&self) -> &Arc<SpinBasis>;

    fn param_count(&self) -> usize;

    /// Pushes the nonzero entries of the row for `state` as
    /// `(column state, value)`. Must be linear in `params`.
    fn row(&self, params: &[f64], state: u64, out: &mut Vec<(u64, f64)>);

    fn build(&self, params: &[f64]) -> Result<SymmetricOperator> {
        if params.len() != self.param_count() {
            return Err(Error::domain(format!(
                "expected {} parameters, got {}",
                self.param_count(),
                params.len()
            )));
        }
        let basis = self.basis().clone();
        let mut scratch = Vec::new();
        let matrix = CsrMatrix::from_rows(basis.len(), |x, out| {
            scratch.clear();
            self.row(params, basis.state(x), &mut scratch);
            out.extend(scratch.iter().map(|&(s, v)| {
                (basis.index_of(s).expect("family rows stay in the basis"), v)
            }));
        });
        SymmetricOperator::new(basis, matrix)
    }
}

/// Normalised amplitudes `√(e^{-βH}/Z)` of the Gibbs state.
#[derive(Debug, Clone)]
pub struct GibbsStateVector {
    pub beta: f64,
    pub amplitudes: Vec<f64>,
    basis: Arc<SpinBasis>,
}

impl GibbsStateVector {
    pub fn basis(&self) -> &Arc<SpinBasis> {
        &self.basis
    }
}

pub fn gibbs_state_vector(model: &ClassicalModel, beta: f64) -> Result<GibbsStateVector> {
    let p = gibbs_distribution(model, beta)?;
    Ok(GibbsStateVector {
        beta,
        amplitudes: p.probabilities.iter().map(|x| x.sqrt()).collect(),
        basis: model.basis().clone(),
    })
}

/// `H = n (I - e^{-βH_c/2} M e^{βH_c/2})`, assembled from energy differences
/// so no Boltzmann factor is formed on its own.
pub fn build_parent(m: &TransitionMatrix, model: &ClassicalModel, beta: f64) -> Result<SymmetricOperator> {
    check_beta(beta)?;
    if (beta - m.beta()).abs() > 1e-12 * beta.max(1.0) {
        return Err(Error::domain(format!(
            "chain built at β = {} but parent requested at β = {beta}",
            m.beta()
        )));
    }
    let p = gibbs_distribution(model, beta)?;
    check_detailed_balance(m, &p)?;
    let n = model.sites() as f64;
    let e = model.energies();
    let chain = m.matrix();
    let matrix = CsrMatrix::from_rows(chain.dim(), |x, out| {
        out.push((x, n));
        let (cols, vals) = chain.row(x);
        for (&y, &v) in cols.iter().zip(vals) {
            out.push((y, -n * (-0.5 * beta * (e[x] - e[y])).exp() * v));
        }
    });
    SymmetricOperator::new(model.basis().clone(), matrix)
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
}

/// Ground energy and normalised ground vector, largest component positive.
/// Fails if the eigen-residual exceeds `1e-8`.
pub fn ground_state(h: &SymmetricOperator) -> Result<GroundState> {
    let pair = lowest_eigenpairs(h.matrix(), 1, &LanczosOptions::default())?
        .into_iter()
        .next()
        .expect("one pair requested");
    let hv = h.matrix().matvec(&pair.vector);
    let residual = hv
        .iter()
        .zip(&pair.vector)
        .map(|(a, b)| (a - pair.value * b).powi(2))
        .sum::<f64>()
        .sqrt();
    if residual > 1e-8 {
        return Err(Error::Solver {
            residual,
            iterations: 0,
        });
    }
    Ok(GroundState {
        energy: pair.value,
        vector: pair.vector,
        residual,
    })
}

/// `k` lowest levels, ascending, with multiplicity.
pub fn lowest_levels(h: &SymmetricOperator, k: usize) -> Result<Vec<f64>> {
    Ok(lowest_eigenpairs(h.matrix(), k, &LanczosOptions::default())?
        .into_iter()
        .map(|p| p.value)
        .collect())
}

/// `E₁ - E₀`, or 0 when the two lowest levels agree within
/// [`DEGENERACY_TOL`].
pub fn energy_gap(h: &SymmetricOperator) -> Result<f64> {
    if h.dim() < 2 {
        return Err(Error::InvalidSize {
            what: "operator dimension",
            value: h.dim(),
        });
    }
    let levels = lowest_levels(h, 2)?;
    let gap = levels[1] - levels[0];
    Ok(if gap < DEGENERACY_TOL { 0.0 } else { gap })
}

pub fn fidelity(a: &[f64], b: &[f64]) -> f64 {
    let ab: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let aa: f64 = a.iter().map(|x| x * x).sum();
    let bb: f64 = b.iter().map(|x| x * x).sum();
    ab * ab / (aa * bb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{build_path, build_star, DEFAULT_BASIS_CAP};
    use crate::linalg::dense_eigenvalues;
    use crate::markov::{chain_spectrum, glauber_chain, metropolis_is_chain, spectral_gap};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn parent_spectrum_is_shifted_chain_spectrum() {
        let model = ClassicalModel::ising_cycle(6).unwrap();
        let m = glauber_chain(&model, 0.9).unwrap();
        let h = build_parent(&m, &model, 0.9).unwrap();
        let mut want: Vec<f64> = chain_spectrum(&m).iter().map(|l| 6.0 * (1.0 - l)).collect();
        want.sort_by(f64::total_cmp);
        let got = dense_eigenvalues(h.matrix().to_dense());
        for (a, b) in got.iter().zip(&want) {
            assert_relative_eq!(a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn gibbs_state_is_a_zero_mode() {
        let model =
            ClassicalModel::independent_set(build_star(4).unwrap(), DEFAULT_BASIS_CAP).unwrap();
        for &beta in &[0.0, 0.5, 2.0] {
            let m = metropolis_is_chain(&model, beta).unwrap();
            let h = build_parent(&m, &model, beta).unwrap();
            let psi = gibbs_state_vector(&model, beta).unwrap();
            let hv = h.matrix().matvec(&psi.amplitudes);
            assert!(hv.iter().all(|x| x.abs() < 1e-12));
            let gs = ground_state(&h).unwrap();
            assert!(gs.energy.abs() < 1e-10);
            assert!(fidelity(&gs.vector, &psi.amplitudes) > 1.0 - 1e-10);
        }
    }

    #[test]
    fn mismatched_beta_is_rejected() {
        let model = ClassicalModel::ising_cycle(4).unwrap();
        let m = glauber_chain(&model, 1.0).unwrap();
        assert!(build_parent(&m, &model, 1.5).is_err());
    }

    #[test]
    fn dump_lists_sorted_triples() {
        let model = ClassicalModel::independent_set(build_path(2).unwrap(), DEFAULT_BASIS_CAP).unwrap();
        let m = metropolis_is_chain(&model, 0.0).unwrap();
        let h = build_parent(&m, &model, 0.0).unwrap();
        let mut buf = Vec::new();
        h.dump(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rows: Vec<(u64, u64)> = text
            .lines()
            .map(|l| {
                let t: Vec<&str> = l.split(' ').collect();
                (t[0].parse().unwrap(), t[1].parse().unwrap())
            })
            .collect();
        let mut sorted = rows.clone();
        sorted.sort();
        assert_eq!(rows, sorted);
        assert!(rows.contains(&(0, 1)) && rows.contains(&(1, 0)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn parent_is_psd_and_gap_matches_chain(n in 3usize..8, beta in 0.0f64..3.0) {
            let model = ClassicalModel::ising_cycle(n).unwrap();
            let m = glauber_chain(&model, beta).unwrap();
            let h = build_parent(&m, &model, beta).unwrap();
            let spec = dense_eigenvalues(h.matrix().to_dense());
            prop_assert!(spec[0] > -1e-10);
            let gap = energy_gap(&h).unwrap();
            let want = n as f64 * spectral_gap(&m).unwrap();
            // eigenvalues are accurate to ε‖H‖ in absolute terms
            prop_assert!((gap - want).abs() <= 1e-9 * want + 1e-13 * n as f64);
        }
    }
}
