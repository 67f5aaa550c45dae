//! Parent Hamiltonian of the Glauber-sampled Ising ring and its
//! free-fermion solution.
//!
//! `H = n(h + J₂) - Σᵢ [h Xᵢ + J₁ ZᵢZᵢ₊₁ - J₂ Zᵢ₋₁XᵢZᵢ₊₁]` with periodic
//! boundaries. On the Glauber line `h + J₂ = 1/2`, so the constant is `n/2`.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fit::{power_law_fit, LineFit};
use crate::gibbs::check_beta;
use crate::graphs::{SpinBasis, DEFAULT_BASIS_CAP};
use crate::parent::{OperatorFamily, SymmetricOperator};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsingParentParams {
    pub h: f64,
    pub j1: f64,
    pub j2: f64,
}

impl IsingParentParams {
    /// Couplings of the Glauber parent at inverse temperature `beta`:
    /// `4h = 1 + sech 2β`, `2J₁ = tanh 2β`, `4J₂ = 1 - sech 2β`.
    pub fn from_beta(beta: f64) -> Result<Self> {
        check_beta(beta)?;
        let sech = 1.0 / (2.0 * beta).cosh();
        Ok(Self {
            h: (1.0 + sech) / 4.0,
            j1: (2.0 * beta).tanh() / 2.0,
            j2: (1.0 - sech) / 4.0,
        })
    }

    /// Couplings with the given ratios `(J₁/h, J₂/h)` scaled so that
    /// `h + J₂ = 1/2`, as on the Glauber line.
    pub fn from_ratios(j1_over_h: f64, j2_over_h: f64) -> Result<Self> {
        if !(1.0 + j2_over_h > 0.0) || !j1_over_h.is_finite() {
            return Err(Error::domain(format!(
                "ratios ({j1_over_h}, {j2_over_h}) cannot be normalised to h + J₂ = 1/2"
            )));
        }
        let h = 0.5 / (1.0 + j2_over_h);
        Ok(Self {
            h,
            j1: j1_over_h * h,
            j2: j2_over_h * h,
        })
    }

    /// Couplings with `h = 1`.
    pub fn unit_h(j1_over_h: f64, j2_over_h: f64) -> Self {
        Self {
            h: 1.0,
            j1: j1_over_h,
            j2: j2_over_h,
        }
    }

    pub fn ratios(&self) -> (f64, f64) {
        (self.j1 / self.h, self.j2 / self.h)
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.h, self.j1, self.j2]
    }
}

/// The Ising parent family on the full `2^n` basis; parameters are
/// `[h, J₁, J₂]`.
#[derive(Debug, Clone)]
pub struct IsingFamily {
    n: usize,
    basis: Arc<SpinBasis>,
}

impl IsingFamily {
    pub fn new(n: usize) -> Result<Self> {
        Self::with_cap(n, DEFAULT_BASIS_CAP)
    }

    pub fn with_cap(n: usize, cap: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidSize {
                what: "ring length",
                value: n,
            });
        }
        Ok(Self {
            n,
            basis: Arc::new(SpinBasis::full(n, cap)?),
        })
    }

    pub fn sites(&self) -> usize {
        self.n
    }
}

#[inline]
fn spin(s: u64, i: usize) -> f64 {
    if s >> i & 1 == 1 {
        1.0
    } else {
        -1.0
    }
}

impl OperatorFamily for IsingFamily {
    fn basis(&self) -> &Arc<SpinBasis> {
        &self.basis
    }

    fn param_count(&self) -> usize {
        3
    }

    fn row(&self, params: &[f64], s: u64, out: &mut Vec<(u64, f64)>) {
        let (h, j1, j2) = (params[0], params[1], params[2]);
        let n = self.n;
        let bonds: f64 = (0..n).map(|i| spin(s, i) * spin(s, (i + 1) % n)).sum();
        out.push((s, n as f64 * (h + j2) - j1 * bonds));
        for i in 0..n {
            let outer = spin(s, (i + n - 1) % n) * spin(s, (i + 1) % n);
            out.push((s ^ 1 << i, -h + j2 * outer));
        }
    }
}

/// The parent Hamiltonian on `n ≥ 3` spins over the full basis.
pub fn build_ising_parent(n: usize, p: &IsingParentParams) -> Result<SymmetricOperator> {
    IsingFamily::new(n)?.build(&p.as_array())
}

/// Fermion-parity sector of the ring, `∏ Xᵢ = ±1`. The even sector holds
/// the Gibbs state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sector {
    Even,
    Odd,
}

impl Sector {
    fn sign(self) -> f64 {
        match self {
            Sector::Even => 1.0,
            Sector::Odd => -1.0,
        }
    }
}

/// Coupling matrix `K` of the quadratic form `(i/2) Σ K_{ji} aᵢ b_j` after
/// a Jordan–Wigner transformation in the `X` basis. Terms wrapping around
/// the ring pick up `-parity`.
fn coupling_matrix(n: usize, p: &IsingParentParams, sector: Sector) -> DMatrix<f64> {
    let wrap = -sector.sign();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        k[(i, i)] += 2.0 * p.h;
        let fwd = if i + 1 == n { wrap } else { 1.0 };
        k[((i + 1) % n, i)] += -2.0 * p.j1 * fwd;
        let across = if i == 0 || i + 1 == n { wrap } else { 1.0 };
        k[((i + 1) % n, (i + n - 1) % n)] += 2.0 * p.j2 * across;
    }
    k
}

/// Single-particle energies of the ring in one parity sector, ascending.
pub fn single_particle_energies(n: usize, p: &IsingParentParams, sector: Sector) -> Result<Vec<f64>> {
    if n < 3 {
        return Err(Error::InvalidSize {
            what: "ring length",
            value: n,
        });
    }
    let k = coupling_matrix(n, p, sector);
    let mut sv = faer::Mat::from_fn(n, n, |i, j| k[(i, j)])
        .singular_values()
        .map_err(|_| Error::domain("singular value decomposition did not converge"))?;
    sv.sort_by(f64::total_cmp);
    Ok(sv)
}

/// The two lowest many-body levels within one parity sector.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorLevels {
    pub vacuum_energy: f64,
    /// Fermion parity of the quasiparticle vacuum, or 0 if a zero mode
    /// makes it ambiguous.
    pub vacuum_parity: i8,
    pub single_particle: Vec<f64>,
    pub ground: f64,
    pub first_excited: f64,
}

impl SectorLevels {
    pub fn gap(&self) -> f64 {
        self.first_excited - self.ground
    }
}

fn determinant_sign(k: DMatrix<f64>) -> f64 {
    let lu = k.lu();
    let mut sign: f64 = lu.p().determinant();
    let u = lu.u();
    for i in 0..u.nrows() {
        sign *= u[(i, i)].signum();
    }
    sign
}

pub fn sector_levels(n: usize, p: &IsingParentParams, sector: Sector) -> Result<SectorLevels> {
    let sp = single_particle_energies(n, p, sector)?;
    let vacuum_energy = n as f64 * (p.h + p.j2) - sp.iter().sum::<f64>() / 2.0;
    let scale = sp.last().copied().unwrap_or(1.0).max(1e-300);
    let vacuum_parity = if sp[0] <= 1e-11 * scale {
        0
    } else {
        determinant_sign(coupling_matrix(n, p, sector)) as i8
    };
    let (ground, first_excited) = if vacuum_parity == 0 {
        (vacuum_energy, vacuum_energy + sp[1])
    } else if f64::from(vacuum_parity) == sector.sign() {
        (vacuum_energy, vacuum_energy + sp[0] + sp[1])
    } else {
        (vacuum_energy + sp[0], vacuum_energy + sp[1])
    };
    Ok(SectorLevels {
        vacuum_energy,
        vacuum_parity,
        single_particle: sp,
        ground,
        first_excited,
    })
}

/// Low-lying spectrum of the ring in both parity sectors.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeFermionSpectrum {
    pub even: SectorLevels,
    pub odd: SectorLevels,
}

pub fn free_fermion_spectrum(n: usize, p: &IsingParentParams) -> Result<FreeFermionSpectrum> {
    Ok(FreeFermionSpectrum {
        even: sector_levels(n, p, Sector::Even)?,
        odd: sector_levels(n, p, Sector::Odd)?,
    })
}

impl FreeFermionSpectrum {
    pub fn sector(&self, s: Sector) -> &SectorLevels {
        match s {
            Sector::Even => &self.even,
            Sector::Odd => &self.odd,
        }
    }

    pub fn ground_energy(&self) -> f64 {
        self.even.ground.min(self.odd.ground)
    }

    /// Gap between the two lowest levels regardless of sector.
    pub fn overall_gap(&self) -> f64 {
        let mut levels = [
            self.even.ground,
            self.even.first_excited,
            self.odd.ground,
            self.odd.first_excited,
        ];
        levels.sort_by(f64::total_cmp);
        levels[1] - levels[0]
    }

    pub fn sector_gap(&self, s: Sector) -> f64 {
        self.sector(s).gap()
    }
}

/// Gap of the even sector; the gap that controls evolution from the
/// infinite-temperature state.
pub fn even_sector_gap(n: usize, p: &IsingParentParams) -> Result<f64> {
    Ok(sector_levels(n, p, Sector::Even)?.gap())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsingPhase {
    Paramagnet,
    Ferromagnet,
    Cluster,
}

impl IsingPhase {
    pub fn label(self) -> &'static str {
        match self {
            IsingPhase::Paramagnet => "PM",
            IsingPhase::Ferromagnet => "FM",
            IsingPhase::Cluster => "CS",
        }
    }
}

impl fmt::Display for IsingPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Phase from the winding of the symbol `h - J₁z + J₂z²` around the unit
/// circle, that is the number of its roots inside the disk.
pub fn classify_phase(j1_over_h: f64, j2_over_h: f64) -> IsingPhase {
    let (a, b, c) = (j2_over_h, -j1_over_h, 1.0);
    let inside = if a.abs() < 1e-14 {
        usize::from(b != 0.0 && (c / b).abs() < 1.0)
    } else {
        let disc = b * b - 4.0 * a * c;
        let moduli = if disc >= 0.0 {
            let q = -0.5 * (b + b.signum() * disc.sqrt());
            let q = if q == 0.0 { disc.sqrt() * 0.5 } else { q };
            [(q / a).abs(), (c / q).abs()]
        } else {
            let m = (c / a).abs().sqrt();
            [m, m]
        };
        moduli.iter().filter(|&&m| m < 1.0).count()
    };
    match inside {
        0 => IsingPhase::Paramagnet,
        1 => IsingPhase::Ferromagnet,
        _ => IsingPhase::Cluster,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub j1_over_h: f64,
    pub j2_over_h: f64,
    pub n: usize,
    /// Even-sector gap in units of `h`.
    pub gap: f64,
    pub phase: IsingPhase,
}

/// Free-fermion gap and phase label at each `(J₁/h, J₂/h)` grid point.
pub fn phase_diagram_scan(grid: &[(f64, f64)], n: usize) -> Result<Vec<PhasePoint>> {
    grid.iter()
        .map(|&(r1, r2)| {
            Ok(PhasePoint {
                j1_over_h: r1,
                j2_over_h: r2,
                n,
                gap: even_sector_gap(n, &IsingParentParams::unit_h(r1, r2))?,
                phase: classify_phase(r1, r2),
            })
        })
        .collect()
}

/// Exponent `z` in `Δ ∝ n^{-z}` at fixed ratios, fitted over `ns`.
/// Returns the fit of `ln Δ` against `ln n`, whose slope is `-z`.
pub fn gap_scaling_exponent(j1_over_h: f64, j2_over_h: f64, ns: &[usize]) -> Result<LineFit> {
    let p = IsingParentParams::unit_h(j1_over_h, j2_over_h);
    let gaps = ns
        .iter()
        .map(|&n| even_sector_gap(n, &p))
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    power_law_fit(&xs, &gaps)
}

fn lerp(from: (f64, f64), to: (f64, f64), t: f64) -> (f64, f64) {
    (from.0 + t * (to.0 - from.0), from.1 + t * (to.1 - from.1))
}

fn gap_on_segment(n: usize, from: (f64, f64), to: (f64, f64), t: f64) -> Result<f64> {
    let (r1, r2) = lerp(from, to, t);
    even_sector_gap(n, &IsingParentParams::unit_h(r1, r2))
}

const SEGMENT_SAMPLES: usize = 200;

/// Point on the segment `from → to` (in ratio space, `h = 1`) where the
/// even-sector gap is smallest: a grid search followed by golden-section
/// refinement.
pub fn minimize_gap_along(n: usize, from: (f64, f64), to: (f64, f64)) -> Result<(f64, f64)> {
    let gaps = (0..=SEGMENT_SAMPLES)
        .map(|k| gap_on_segment(n, from, to, k as f64 / SEGMENT_SAMPLES as f64))
        .collect::<Result<Vec<_>>>()?;
    let best = (0..gaps.len()).min_by(|&a, &b| gaps[a].total_cmp(&gaps[b])).unwrap_or(0);
    let (t, _) = golden_minimum(n, from, to, best)?;
    Ok(lerp(from, to, t))
}

/// A local minimum of the even-sector gap along a segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapMinimum {
    pub j1_over_h: f64,
    pub j2_over_h: f64,
    /// Gap at the located point, in units of `h`.
    pub gap: f64,
}

/// Relative to `h`; a level crossing refined to 10⁻¹⁰ in position leaves a
/// residual far below this, an avoided crossing does not.
pub const GAP_CLOSING_TOL: f64 = 1e-7;

impl GapMinimum {
    /// Whether the finite-ring gap vanishes here rather than just dipping.
    pub fn is_closing(&self) -> bool {
        self.gap < GAP_CLOSING_TOL
    }
}

/// Interior local minima of the even-sector gap of the `n`-site ring on the
/// segment `from → to`, found on a grid and refined by golden section.
pub fn gap_minima_along(n: usize, from: (f64, f64), to: (f64, f64)) -> Result<Vec<GapMinimum>> {
    let gaps = (0..=SEGMENT_SAMPLES)
        .map(|k| gap_on_segment(n, from, to, k as f64 / SEGMENT_SAMPLES as f64))
        .collect::<Result<Vec<_>>>()?;
    let mut out: Vec<GapMinimum> = Vec::new();
    for k in 1..gaps.len() - 1 {
        if !(gaps[k] <= gaps[k - 1] && gaps[k] < gaps[k + 1]) {
            continue;
        }
        let (t, gap) = golden_minimum(n, from, to, k)?;
        let (r1, r2) = lerp(from, to, t);
        if out.last().map_or(true, |m| (m.j1_over_h - r1).hypot(m.j2_over_h - r2) > 1e-6) {
            out.push(GapMinimum {
                j1_over_h: r1,
                j2_over_h: r2,
                gap,
            });
        }
    }
    Ok(out)
}

fn golden_minimum(n: usize, from: (f64, f64), to: (f64, f64), k: usize) -> Result<(f64, f64)> {
    let at = |t: f64| gap_on_segment(n, from, to, t);
    let step = 1.0 / SEGMENT_SAMPLES as f64;
    let (mut a, mut b) = (
        (k as f64 - 1.0).max(0.0) * step,
        (k as f64 + 1.0).min(SEGMENT_SAMPLES as f64) * step,
    );
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (at(c)?, at(d)?);
    while b - a > 1e-10 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = at(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = at(d)?;
        }
    }
    let t = 0.5 * (a + b);
    Ok((t, at(t)?))
}
