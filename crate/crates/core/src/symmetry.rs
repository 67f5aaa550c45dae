//! Reduction to the fully symmetric sector of a permutation symmetry.
//!
//! Orbit states `|r⟩ = |O_r|^{-1/2} Σ_{s∈O_r} |s⟩` span the trivial
//! representation; a symmetric operator restricted to them has elements
//! `H(r', r) = √(|O_r'|/|O_r|) Σ_{s∈O_r} H(r', s)`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graphs::SpinBasis;
use crate::parent::OperatorFamily;
use crate::sparse::CsrMatrix;

/// A group acting on bitstrings by permuting (and possibly complementing)
/// bits.
pub trait BasisSymmetry: Send + Sync {
    /// Canonical representative of the orbit of `state` and the orbit size.
    fn canonical(&self, state: u64) -> (u64, usize);
}

/// The trivial group.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoSymmetry;

impl BasisSymmetry for NoSymmetry {
    fn canonical(&self, state: u64) -> (u64, usize) {
        (state, 1)
    }
}

fn reverse_bits(state: u64, n: usize) -> u64 {
    state.reverse_bits() >> (64 - n)
}

fn orbit_canonical(images: &mut Vec<u64>) -> (u64, usize) {
    images.sort_unstable();
    images.dedup();
    (images[0], images.len())
}

/// Translations, reflection and global spin flip of a ring of `n` sites.
#[derive(Debug, Clone, Copy)]
pub struct RingSymmetry {
    n: usize,
}

impl RingSymmetry {
    pub fn new(n: usize) -> Self {
        Self { n }
    }
}

impl BasisSymmetry for RingSymmetry {
    fn canonical(&self, state: u64) -> (u64, usize) {
        let n = self.n;
        let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let mut images = Vec::with_capacity(4 * n);
        for base in [state, reverse_bits(state, n)] {
            for flipped in [base, !base & mask] {
                let mut x = flipped;
                for _ in 0..n {
                    images.push(x);
                    x = ((x << 1) | (x >> (n - 1))) & mask;
                }
            }
        }
        orbit_canonical(&mut images)
    }
}

/// Mirror image of an open chain.
#[derive(Debug, Clone, Copy)]
pub struct ChainReflection {
    n: usize,
}

impl ChainReflection {
    pub fn new(n: usize) -> Self {
        Self { n }
    }
}

impl BasisSymmetry for ChainReflection {
    fn canonical(&self, state: u64) -> (u64, usize) {
        let r = reverse_bits(state, self.n);
        (state.min(r), if r == state { 1 } else { 2 })
    }
}

/// Permutations of the `b` two-vertex branches of a star.
#[derive(Debug, Clone, Copy)]
pub struct StarBranchSymmetry {
    b: usize,
}

impl StarBranchSymmetry {
    pub fn new(b: usize) -> Self {
        Self { b }
    }
}

impl BasisSymmetry for StarBranchSymmetry {
    fn canonical(&self, state: u64) -> (u64, usize) {
        let mut codes: Vec<u64> = (0..self.b).map(|j| state >> (1 + 2 * j) & 3).collect();
        codes.sort_unstable_by(|a, b| b.cmp(a));
        let mut canonical = state & 1;
        for (j, c) in codes.iter().enumerate() {
            canonical |= c << (1 + 2 * j);
        }
        let mut size = (1..=self.b).product::<usize>();
        let mut k = 0;
        while k < codes.len() {
            let run = codes[k..].iter().take_while(|&&c| c == codes[k]).count();
            size /= (1..=run).product::<usize>();
            k += run;
        }
        (canonical, size)
    }
}

/// The symmetric sector of a basis under a [`BasisSymmetry`].
#[derive(Debug, Clone)]
pub struct SymmetricSector {
    full: Arc<SpinBasis>,
    reps: Vec<u64>,
    orbit_sizes: Vec<usize>,
    rep_of: Vec<u32>,
}

impl SymmetricSector {
    pub fn new(full: Arc<SpinBasis>, sym: &dyn BasisSymmetry) -> Result<Self> {
        let canon: Vec<(u64, usize)> = full.states().iter().map(|&s| sym.canonical(s)).collect();
        let mut reps: Vec<(u64, usize)> = canon.clone();
        reps.sort_unstable();
        reps.dedup();
        let rep_of = canon
            .iter()
            .map(|(r, _)| {
                reps.binary_search_by_key(r, |&(x, _)| x)
                    .map(|k| k as u32)
                    .map_err(|_| Error::domain("symmetry maps a state outside its orbit table"))
            })
            .collect::<Result<Vec<_>>>()?;
        for (&(r, _), &s) in canon.iter().zip(full.states()) {
            if full.index_of(r).is_none() {
                return Err(Error::domain(format!(
                    "symmetry image {r:#b} of {s:#b} is outside the basis"
                )));
            }
        }
        Ok(Self {
            full,
            orbit_sizes: reps.iter().map(|&(_, k)| k).collect(),
            reps: reps.into_iter().map(|(r, _)| r).collect(),
            rep_of,
        })
    }

    pub fn dim(&self) -> usize {
        self.reps.len()
    }

    pub fn full_basis(&self) -> &Arc<SpinBasis> {
        &self.full
    }

    pub fn representatives(&self) -> &[u64] {
        &self.reps
    }

    pub fn orbit_sizes(&self) -> &[usize] {
        &self.orbit_sizes
    }

    /// Restriction of `family(params)` to the sector. The parameters must
    /// respect the symmetry.
    pub fn reduce(&self, family: &dyn OperatorFamily, params: &[f64]) -> CsrMatrix {
        let mut scratch = Vec::new();
        CsrMatrix::from_rows(self.dim(), |row, out| {
            scratch.clear();
            family.row(params, self.reps[row], &mut scratch);
            let size_row = self.orbit_sizes[row] as f64;
            for &(s, v) in &scratch {
                let idx = self.full.index_of(s).expect("family rows stay in the basis");
                let col = self.rep_of[idx] as usize;
                out.push((col, v * (size_row / self.orbit_sizes[col] as f64).sqrt()));
            }
        })
    }

    /// Sector coordinates of a symmetric full-basis vector.
    pub fn reduce_vector(&self, full: &[f64]) -> Vec<f64> {
        self.reps
            .iter()
            .zip(&self.orbit_sizes)
            .map(|(&r, &k)| full[self.full.index_of(r).expect("representative in basis")] * (k as f64).sqrt())
            .collect()
    }

    /// Full-basis amplitudes of a sector vector.
    pub fn expand<T>(&self, reduced: &[T]) -> Vec<T>
    where
        T: Copy + std::ops::Mul<f64, Output = T>,
    {
        self.rep_of
            .iter()
            .map(|&r| reduced[r as usize] * (1.0 / (self.orbit_sizes[r as usize] as f64).sqrt()))
            .collect()
    }
}
