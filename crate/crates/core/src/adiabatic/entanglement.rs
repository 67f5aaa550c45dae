//! Bipartite entanglement of states on bitstring bases.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graphs::SpinBasis;

/// Largest side of the amplitude matrix, `2^MAX_CUT_BITS`.
pub const MAX_CUT_BITS: usize = 14;

fn check_cut(n: usize, cut: usize) -> Result<()> {
    if cut == 0 || cut >= n {
        return Err(Error::domain(format!("cut {cut} does not split {n} sites")));
    }
    let bits = cut.max(n - cut);
    if bits > MAX_CUT_BITS {
        return Err(Error::Capacity {
            requested: 1 << bits,
            cap: 1 << MAX_CUT_BITS,
        });
    }
    Ok(())
}

fn entropy_of(singular_values: &[f64]) -> f64 {
    let total: f64 = singular_values.iter().map(|s| s * s).sum();
    singular_values
        .iter()
        .map(|s| s * s / total)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.ln())
        .sum()
}

/// Von Neumann entropy of sites `0..cut` for a state given by amplitudes
/// on `basis`; states outside a restricted basis have zero amplitude.
pub fn entanglement_entropy(basis: &SpinBasis, amplitudes: &[f64], cut: usize) -> Result<f64> {
    let n = basis.sites();
    check_cut(n, cut)?;
    let mask = (1u64 << cut) - 1;
    let mut psi = faer::Mat::<f64>::zeros(1 << cut, 1 << (n - cut));
    for (&s, &a) in basis.states().iter().zip(amplitudes) {
        psi[((s & mask) as usize, (s >> cut) as usize)] = a;
    }
    let sv = psi
        .singular_values()
        .map_err(|_| Error::domain("singular value decomposition did not converge"))?;
    Ok(entropy_of(&sv))
}

pub fn entanglement_entropy_complex(basis: &SpinBasis, amplitudes: &[Complex64], cut: usize) -> Result<f64> {
    let n = basis.sites();
    check_cut(n, cut)?;
    let mask = (1u64 << cut) - 1;
    let mut psi = faer::Mat::<faer::c64>::zeros(1 << cut, 1 << (n - cut));
    for (&s, &a) in basis.states().iter().zip(amplitudes) {
        psi[((s & mask) as usize, (s >> cut) as usize)] = a;
    }
    let sv = psi
        .singular_values()
        .map_err(|_| Error::domain("singular value decomposition did not converge"))?;
    Ok(entropy_of(&sv))
}

/// Entropy of the left half, `⌊n/2⌋` sites.
pub fn half_chain_entropy(basis: &SpinBasis, amplitudes: &[f64]) -> Result<f64> {
    entanglement_entropy(basis, amplitudes, basis.sites() / 2)
}
