//! A path bound to its operator family and symmetry sector.

use std::sync::Arc;

use crate::adiabatic::path::{Family, ParameterPath, PathKind};
use crate::error::{Error, Result};
use crate::graphs::{build_path, build_star, SpinBasis, DEFAULT_BASIS_CAP};
use crate::indepset::IsFamily;
use crate::ising::IsingFamily;
use crate::linalg::{lowest_eigenpairs, LanczosOptions};
use crate::parent::{OperatorFamily, SymmetricOperator, DEGENERACY_TOL};
use crate::sparse::CsrMatrix;
use crate::symmetry::{BasisSymmetry, ChainReflection, RingSymmetry, StarBranchSymmetry, SymmetricSector};

/// Gaps below this at an interior point stop schedule construction.
pub const STALL_GAP: f64 = 1e-9;

/// `H(c) = Σₖ cₖ Hₖ` with every `Hₖ` stored on one shared sparsity pattern.
#[derive(Debug, Clone)]
pub struct AffineOperator {
    pattern: CsrMatrix,
    components: Vec<Vec<f64>>,
}

impl AffineOperator {
    pub fn new(parts: &[CsrMatrix]) -> Result<Self> {
        let Some(first) = parts.first() else {
            return Err(Error::InvalidSize {
                what: "affine components",
                value: 0,
            });
        };
        let dim = first.dim();
        if parts.iter().any(|p| p.dim() != dim) {
            return Err(Error::domain("affine components differ in dimension"));
        }
        let mut cols = Vec::new();
        let pattern = CsrMatrix::from_rows(dim, |i, out| {
            cols.clear();
            for p in parts {
                cols.extend_from_slice(p.row(i).0);
            }
            cols.sort_unstable();
            cols.dedup();
            // placeholder value so the entry survives zero-dropping
            out.extend(cols.iter().map(|&j| (j, 1.0)));
        });
        let components = parts
            .iter()
            .map(|p| pattern.iter().map(|(i, j, _)| p.get(i, j)).collect())
            .collect();
        Ok(Self { pattern, components })
    }

    pub fn dim(&self) -> usize {
        self.pattern.dim()
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    /// Writes `Σₖ cₖ Hₖ` into `out`, which must come from
    /// [`AffineOperator::zeros`] or an earlier `assemble_into`.
    pub fn assemble_into(&self, coeffs: &[f64], out: &mut CsrMatrix) {
        let vals = out.values_mut();
        vals.fill(0.0);
        for (c, comp) in coeffs.iter().zip(&self.components) {
            if *c != 0.0 {
                for (v, x) in vals.iter_mut().zip(comp) {
                    *v += c * x;
                }
            }
        }
    }

    pub fn zeros(&self) -> CsrMatrix {
        let mut m = self.pattern.clone();
        m.values_mut().fill(0.0);
        m
    }

    pub fn assemble(&self, coeffs: &[f64]) -> CsrMatrix {
        let mut m = self.zeros();
        self.assemble_into(coeffs, &mut m);
        m
    }
}

/// Ground state and gap of the reduced Hamiltonian at one path point.
#[derive(Debug, Clone)]
pub struct PathSample {
    pub s: f64,
    pub energy: f64,
    pub gap: f64,
    pub ground: Vec<f64>,
}

/// A path together with the family it runs through, restricted to the
/// symmetric sector that contains the initial ground state.
pub struct AdiabaticProblem {
    path: ParameterPath,
    family: Box<dyn OperatorFamily>,
    sector: SymmetricSector,
    vertices: usize,
    affine: AffineOperator,
}

impl std::fmt::Debug for AdiabaticProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AdiabaticProblem")
            .field("path", &self.path)
            .field("sector_dim", &self.sector.dim())
            .finish()
    }
}

impl AdiabaticProblem {
    pub fn new(path: ParameterPath) -> Result<Self> {
        Self::with_cap(path, DEFAULT_BASIS_CAP)
    }

    pub fn with_cap(path: ParameterPath, cap: usize) -> Result<Self> {
        let size = path.size;
        let (family, vertices, symmetry): (Box<dyn OperatorFamily>, usize, Box<dyn BasisSymmetry>) =
            match path.kind {
                PathKind::IsingBetaFamily | PathKind::IsingRatios(_) => (
                    Box::new(IsingFamily::with_cap(size, cap)?),
                    size,
                    Box::new(RingSymmetry::new(size)),
                ),
                PathKind::ChainBetaFamily { .. } | PathKind::ChainPolyline(_) => (
                    Box::new(IsFamily::with_cap(build_path(size)?, cap)?),
                    size,
                    Box::new(ChainReflection::new(size)),
                ),
                PathKind::StarBetaFamily { .. } | PathKind::StarSpeedup { .. } => (
                    Box::new(IsFamily::with_cap(build_star(size)?, cap)?),
                    2 * size + 1,
                    Box::new(StarBranchSymmetry::new(size)),
                ),
            };
        let sector = SymmetricSector::new(family.basis().clone(), symmetry.as_ref())?;
        let parts: Vec<CsrMatrix> = path
            .generators(vertices)
            .iter()
            .map(|g| sector.reduce(family.as_ref(), g))
            .collect();
        let affine = AffineOperator::new(&parts)?;
        Ok(Self {
            path,
            family,
            sector,
            vertices,
            affine,
        })
    }

    pub fn path(&self) -> &ParameterPath {
        &self.path
    }

    pub fn family(&self) -> Family {
        self.path.family()
    }

    pub fn sector(&self) -> &SymmetricSector {
        &self.sector
    }

    pub fn full_basis(&self) -> &Arc<SpinBasis> {
        self.family.basis()
    }

    pub fn affine(&self) -> &AffineOperator {
        &self.affine
    }

    pub fn dim(&self) -> usize {
        self.sector.dim()
    }

    /// Number of sites, for entanglement cuts.
    pub fn sites(&self) -> usize {
        self.vertices
    }

    pub fn coefficients(&self, s: f64) -> Result<Vec<f64>> {
        self.path.coefficients(s)
    }

    /// The operator on the family's full basis at `s`.
    pub fn hamiltonian_at(&self, s: f64) -> Result<SymmetricOperator> {
        let params = self.path.params(s, self.vertices)?;
        self.family.build(&params)
    }

    /// The operator restricted to the symmetric sector at `s`.
    pub fn reduced_at(&self, s: f64) -> Result<CsrMatrix> {
        Ok(self.affine.assemble(&self.coefficients(s)?))
    }

    /// Lowest `k` eigenpairs of the reduced operator at `s`.
    pub fn levels_at(&self, s: f64, k: usize) -> Result<Vec<crate::linalg::EigenPair>> {
        let h = self.reduced_at(s)?;
        lowest_eigenpairs(&h, k.min(self.dim()), &LanczosOptions::default())
    }

    /// Ground state and gap in the sector at `s`. A one-dimensional sector
    /// has infinite gap.
    pub fn sample(&self, s: f64) -> Result<PathSample> {
        let pairs = self.levels_at(s, 2)?;
        let gap = if pairs.len() > 1 {
            pairs[1].value - pairs[0].value
        } else {
            f64::INFINITY
        };
        let ground = pairs.into_iter().next().expect("at least one pair");
        Ok(PathSample {
            s,
            energy: ground.value,
            gap,
            ground: ground.vector,
        })
    }

    /// Orthonormal basis of the ground space at `s`: the ground vector plus
    /// any level degenerate with it within [`DEGENERACY_TOL`].
    pub fn ground_space(&self, s: f64) -> Result<Vec<Vec<f64>>> {
        let k = 4.min(self.dim());
        let pairs = self.levels_at(s, k)?;
        let e0 = pairs[0].value;
        Ok(pairs
            .into_iter()
            .take_while(|p| p.value - e0 < DEGENERACY_TOL)
            .map(|p| p.vector)
            .collect())
    }

    /// Sector vector of a full-basis state that respects the symmetry.
    pub fn reduce_state(&self, full: &[f64]) -> Vec<f64> {
        self.sector.reduce_vector(full)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adiabatic::path::IsingRoute;
    use crate::linalg::dense_eigenvalues;
    use approx::assert_relative_eq;

    #[test]
    fn affine_assembly_matches_direct_reduction() {
        let path = ParameterPath::ising(IsingRoute::III, 7).unwrap();
        let problem = AdiabaticProblem::new(path.clone()).unwrap();
        let fam = IsingFamily::new(7).unwrap();
        for &s in &[0.0, 0.37, 1.0] {
            let direct = problem.sector().reduce(&fam, &path.params(s, 7).unwrap());
            let assembled = problem.reduced_at(s).unwrap();
            let (a, b) = (direct.to_dense(), assembled.to_dense());
            assert!((a - b).abs().max() < 1e-14);
        }
    }

    #[test]
    fn sector_ground_state_is_the_full_ground_state() {
        for path in [
            ParameterPath::ising(IsingRoute::II, 8).unwrap(),
            ParameterPath::chain_crystal(9),
            ParameterPath::star_speedup(3),
        ] {
            let problem = AdiabaticProblem::new(path).unwrap();
            for &s in &[0.0, 0.5, 0.9] {
                let sample = problem.sample(s).unwrap();
                let full = dense_eigenvalues(problem.hamiltonian_at(s).unwrap().matrix().to_dense());
                assert_relative_eq!(sample.energy, full[0], epsilon = 1e-9);
                assert!(sample.gap >= full[1] - full[0] - 1e-9);
            }
        }
    }

    #[test]
    fn glauber_endpoint_ground_space_is_the_symmetric_cat() {
        let problem = AdiabaticProblem::new(ParameterPath::ising(IsingRoute::II, 6).unwrap()).unwrap();
        let space = problem.ground_space(1.0).unwrap();
        assert_eq!(space.len(), 1);
        let mut cat = vec![0.0; 64];
        cat[0] = std::f64::consts::FRAC_1_SQRT_2;
        cat[63] = std::f64::consts::FRAC_1_SQRT_2;
        let red = problem.reduce_state(&cat);
        let overlap: f64 = red.iter().zip(&space[0]).map(|(a, b)| a * b).sum();
        assert_relative_eq!(overlap.abs(), 1.0, epsilon = 1e-9);
    }
}
