//! Parameter paths `s ∈ [0, 1]` through the Ising and independent-set
//! families.
//!
//! Every family used here is linear in its parameters, so a path is stored
//! as a few fixed generator vectors and scalar coefficients `c(s)`, with
//! `params(s) = Σₖ cₖ(s) Gₖ`.

use std::fmt;

use crate::error::{Error, Result};
use crate::gibbs::star_critical_beta;
use crate::ising::{gap_minima_along, GapMinimum, IsingParentParams};

/// Endpoint of both star paths, `2β*`: inside the occupied-center phase
/// while single-branch moves, accepted with probability `e^{−β}`, stay fast.
pub fn star_beta_end() -> f64 {
    2.0 * star_critical_beta()
}

/// Center `V_e` on the far side of the speedup path's crossing.
pub const STAR_CENTER_BIAS: f64 = -1.0;

/// Which operator family a path runs through.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Ising,
    IndependentSet,
}

impl Family {
    pub fn label(self) -> &'static str {
        match self {
            Family::Ising => "ising",
            Family::IndependentSet => "indepset",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// The four Ising paths from the trivial paramagnet to the tricritical
/// point `(J₁/h, J₂/h) = (2, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsingRoute {
    /// Skirts the paramagnet/cluster boundary before turning to `(2, 1)`.
    I,
    /// The Glauber line `β: 0 → ∞`.
    II,
    /// Crosses into the ferromagnet at `(1.3, 0.3)`.
    III,
    /// Crosses into the ferromagnet at `(1.6, 0.6)`.
    IV,
}

impl IsingRoute {
    pub const ALL: [IsingRoute; 4] = [IsingRoute::I, IsingRoute::II, IsingRoute::III, IsingRoute::IV];

    pub fn label(self) -> &'static str {
        match self {
            IsingRoute::I => "(i)",
            IsingRoute::II => "(ii)",
            IsingRoute::III => "(iii)",
            IsingRoute::IV => "(iv)",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| {
            r.label() == label || r.label().trim_matches(|c| c == '(' || c == ')') == label
        })
    }

    /// Point where the route crosses out of the paramagnet.
    pub fn crossing(self) -> (f64, f64) {
        match self {
            IsingRoute::I => (1.0 / 1.05 * 0.5, 1.0),
            IsingRoute::II => (2.0, 1.0),
            IsingRoute::III => (1.3, 0.3),
            IsingRoute::IV => (1.6, 0.6),
        }
    }

    /// Local minima of the even-sector gap of the `n`-site ring along the
    /// route, including points where it closes exactly. The Glauber line is
    /// the Gibbs family and is gapped before its endpoint, so only the
    /// polyline routes are scanned.
    pub fn gap_minima(self, n: usize) -> Result<Vec<GapMinimum>> {
        let mut out = Vec::new();
        if let Some(points) = self.polyline() {
            for w in points.windows(2) {
                out.extend(gap_minima_along(n, w[0], w[1])?);
            }
        }
        Ok(out)
    }

    fn polyline(self) -> Option<Vec<(f64, f64)>> {
        match self {
            IsingRoute::I => Some(vec![(0.0, 0.0), (0.5, 1.05), (2.0, 1.0)]),
            IsingRoute::II => None,
            // the kink sits at 1.5× the crossing, off the boundary line
            IsingRoute::III => Some(vec![(0.0, 0.0), (1.95, 0.45), (2.0, 1.0)]),
            IsingRoute::IV => Some(vec![(0.0, 0.0), (2.4, 0.9), (2.0, 1.0)]),
        }
    }
}

/// A piecewise-linear curve in the plane, parameterised by arc length.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    points: Vec<(f64, f64)>,
    cumulative: Vec<f64>,
}

impl Polyline {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidSize {
                what: "polyline points",
                value: points.len(),
            });
        }
        if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::domain("polyline points must be finite"));
        }
        let mut cumulative = vec![0.0];
        for w in points.windows(2) {
            let d = (w[1].0 - w[0].0).hypot(w[1].1 - w[0].1);
            if d == 0.0 {
                return Err(Error::domain("polyline has a repeated point"));
            }
            cumulative.push(cumulative.last().unwrap() + d);
        }
        Ok(Self { points, cumulative })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    pub fn at(&self, s: f64) -> (f64, f64) {
        let target = s.clamp(0.0, 1.0) * self.length();
        let k = match self.cumulative.iter().position(|&c| c >= target) {
            Some(0) => 1,
            Some(k) => k,
            None => self.points.len() - 1,
        };
        let (a, b) = (self.points[k - 1], self.points[k]);
        let u = (target - self.cumulative[k - 1]) / (self.cumulative[k] - self.cumulative[k - 1]);
        (a.0 + u * (b.0 - a.0), a.1 + u * (b.1 - a.1))
    }
}

/// The curve itself, independent of system size.
#[derive(Debug, Clone, PartialEq)]
pub enum PathKind {
    /// Glauber line written as `J₂/h = s`, `J₁/h = 2√s`, so that `s = 1`
    /// is exactly the `β → ∞` limit.
    IsingBetaFamily,
    /// Straight segments in `(J₁/h, J₂/h)`, normalised to `h + J₂ = 1/2`.
    IsingRatios(Polyline),
    /// Uniform chain on the Metropolis line, `β = s β_end`.
    ChainBetaFamily { beta_end: f64 },
    /// Uniform chain along segments in `(Ω/V_g, V_e/V_g)` with `V_g = 1`.
    ChainPolyline(Polyline),
    /// Star on the Metropolis line, `β = s β_end`.
    StarBetaFamily { beta_end: f64 },
    /// Star whose center tunnels with `Ω_cen = 1` through the transition.
    /// The center is held at `(V_e, V_g, Ω) = (1, 1, 1)` while the branches
    /// follow the Metropolis line to `β*`. Then the center `V_e` is swept to
    /// [`STAR_CENTER_BIAS`], which is where the center flips, and the
    /// branches continue to `β_end`. Finally `Ω_cen` is lowered
    /// geometrically to `e^{−bβ_end/2}` and `V_e` is returned to
    /// `e^{−bβ_end}`.
    StarSpeedup { beta_end: f64 },
}

/// A labelled path for a system of a given size: the ring or chain length
/// for Ising and chain paths, the branch count for star paths.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterPath {
    pub label: String,
    pub size: usize,
    pub kind: PathKind,
}

impl ParameterPath {
    pub fn ising(route: IsingRoute, n: usize) -> Result<Self> {
        let kind = match route.polyline() {
            Some(p) => PathKind::IsingRatios(Polyline::new(p)?),
            None => PathKind::IsingBetaFamily,
        };
        Ok(Self {
            label: route.label().to_string(),
            size: n,
            kind,
        })
    }

    /// The chain's Metropolis line up to `β_c = 2 ln n`.
    pub fn chain_beta(n: usize) -> Self {
        Self {
            label: "is-path-i".to_string(),
            size: n,
            kind: PathKind::ChainBetaFamily {
                beta_end: 2.0 * (n as f64).ln(),
            },
        }
    }

    /// From the infinite-temperature point into the period-2 crystal:
    /// `(Ω/V_g, V_e/V_g) = (1, 1) → (1, −3) → (0, −3)`.
    pub fn chain_crystal(n: usize) -> Self {
        Self {
            label: "is-path-ii".to_string(),
            size: n,
            kind: PathKind::ChainPolyline(
                Polyline::new(vec![(1.0, 1.0), (1.0, -3.0), (0.0, -3.0)]).expect("fixed polyline"),
            ),
        }
    }

    /// The star's Metropolis line from `β = 0` to [`star_beta_end`].
    pub fn star_beta(b: usize) -> Self {
        Self::star_beta_to(b, star_beta_end())
    }

    pub fn star_beta_to(b: usize, beta_end: f64) -> Self {
        Self {
            label: "star-beta".to_string(),
            size: b,
            kind: PathKind::StarBetaFamily { beta_end },
        }
    }

    /// Crosses the transition with `Ω_cen = 1` and ends on the Metropolis
    /// line at [`star_beta_end`].
    pub fn star_speedup(b: usize) -> Self {
        Self::star_speedup_to(b, star_beta_end())
    }

    pub fn star_speedup_to(b: usize, beta_end: f64) -> Self {
        Self {
            label: "star-speedup".to_string(),
            size: b,
            kind: PathKind::StarSpeedup { beta_end },
        }
    }

    pub fn family(&self) -> Family {
        match self.kind {
            PathKind::IsingBetaFamily | PathKind::IsingRatios(_) => Family::Ising,
            _ => Family::IndependentSet,
        }
    }

    /// Number of coefficients returned by [`ParameterPath::coefficients`].
    pub fn generator_count(&self) -> usize {
        match self.kind {
            PathKind::IsingBetaFamily
            | PathKind::IsingRatios(_)
            | PathKind::ChainBetaFamily { .. }
            | PathKind::ChainPolyline(_) => 3,
            PathKind::StarBetaFamily { .. } | PathKind::StarSpeedup { .. } => 6,
        }
    }

    /// Full parameter vectors `Gₖ` of the family on `vertices` sites.
    ///
    /// Ising: `[h, J₁, J₂]` unit vectors. Chain: uniform `V_e`, `V_g`, `Ω`.
    /// Star: center `V_e`, `V_g`, `Ω`, then branch `V_e`, `V_g`, `Ω`.
    pub fn generators(&self, vertices: usize) -> Vec<Vec<f64>> {
        let unit = |k: usize, len: usize| {
            let mut v = vec![0.0; len];
            v[k] = 1.0;
            v
        };
        match self.kind {
            PathKind::IsingBetaFamily | PathKind::IsingRatios(_) => (0..3).map(|k| unit(k, 3)).collect(),
            PathKind::ChainBetaFamily { .. } | PathKind::ChainPolyline(_) => (0..3)
                .map(|block| {
                    let mut v = vec![0.0; 3 * vertices];
                    v[block * vertices..(block + 1) * vertices].fill(1.0);
                    v
                })
                .collect(),
            PathKind::StarBetaFamily { .. } | PathKind::StarSpeedup { .. } => {
                let mut gens: Vec<Vec<f64>> = (0..3).map(|block| unit(block * vertices, 3 * vertices)).collect();
                for block in 0..3 {
                    let mut v = vec![0.0; 3 * vertices];
                    v[block * vertices + 1..(block + 1) * vertices].fill(1.0);
                    gens.push(v);
                }
                gens
            }
        }
    }

    /// Generator coefficients at `s`.
    pub fn coefficients(&self, s: f64) -> Result<Vec<f64>> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::domain(format!("path parameter s = {s} outside [0, 1]")));
        }
        let b = self.size as f64;
        Ok(match &self.kind {
            PathKind::IsingBetaFamily => {
                let p = IsingParentParams::from_ratios(2.0 * s.sqrt(), s)?;
                vec![p.h, p.j1, p.j2]
            }
            PathKind::IsingRatios(line) => {
                let (r1, r2) = line.at(s);
                let p = IsingParentParams::from_ratios(r1, r2)?;
                vec![p.h, p.j1, p.j2]
            }
            PathKind::ChainBetaFamily { beta_end } => {
                let beta = s * beta_end;
                vec![(-beta).exp(), 1.0, (-0.5 * beta).exp()]
            }
            PathKind::ChainPolyline(line) => {
                let (omega, ve) = line.at(s);
                vec![ve, 1.0, omega]
            }
            PathKind::StarBetaFamily { beta_end } => {
                let beta = s * beta_end;
                vec![
                    (-b * beta).exp(),
                    1.0,
                    (-0.5 * b * beta).exp(),
                    (-beta).exp(),
                    1.0,
                    (-0.5 * beta).exp(),
                ]
            }
            PathKind::StarSpeedup { beta_end } => {
                let crossing = star_critical_beta();
                let end_bias = (-b * beta_end).exp();
                let (beta, ve_cen, omega_cen) = match s {
                    s if s <= 0.25 => (4.0 * s * crossing, 1.0, 1.0),
                    s if s <= 0.5 => {
                        let u = 4.0 * (s - 0.25);
                        (crossing, 1.0 + u * (STAR_CENTER_BIAS - 1.0), 1.0)
                    }
                    s if s <= 0.625 => {
                        let u = 8.0 * (s - 0.5);
                        (crossing + u * (beta_end - crossing), STAR_CENTER_BIAS, 1.0)
                    }
                    s if s <= 0.75 => {
                        let u = 8.0 * (s - 0.625);
                        (*beta_end, STAR_CENTER_BIAS, (-u * 0.5 * b * beta_end).exp())
                    }
                    s => {
                        let u = 4.0 * (s - 0.75);
                        (
                            *beta_end,
                            STAR_CENTER_BIAS + u * (end_bias - STAR_CENTER_BIAS),
                            (-0.5 * b * beta_end).exp(),
                        )
                    }
                };
                vec![
                    ve_cen,
                    1.0,
                    omega_cen,
                    (-beta).exp(),
                    1.0,
                    (-0.5 * beta).exp(),
                ]
            }
        })
    }

    /// Full family parameters at `s`.
    pub fn params(&self, s: f64, vertices: usize) -> Result<Vec<f64>> {
        let c = self.coefficients(s)?;
        let gens = self.generators(vertices);
        let mut out = vec![0.0; gens[0].len()];
        for (ck, g) in c.iter().zip(&gens) {
            for (o, x) in out.iter_mut().zip(g) {
                *o += ck * x;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{build_path, build_star};
    use crate::indepset::IsParentParams;
    use approx::assert_relative_eq;

    #[test]
    fn ising_beta_family_endpoints() {
        let p = ParameterPath::ising(IsingRoute::II, 8).unwrap();
        assert_eq!(p.coefficients(0.0).unwrap(), vec![0.5, 0.0, 0.0]);
        let end = p.coefficients(1.0).unwrap();
        assert_relative_eq!(end[1] / end[0], 2.0, epsilon = 1e-15);
        assert_relative_eq!(end[2] / end[0], 1.0, epsilon = 1e-15);
        // interior points are Glauber couplings at some β
        let c = p.coefficients(0.3).unwrap();
        let sech = (4.0 * c[0] - 1.0).max(0.0);
        let beta = (1.0 / sech).acosh() / 2.0;
        let g = IsingParentParams::from_beta(beta).unwrap();
        assert_relative_eq!(c[1], g.j1, epsilon = 1e-12);
        assert_relative_eq!(c[2], g.j2, epsilon = 1e-12);
    }

    #[test]
    fn polyline_routes_cross_the_boundary_where_labelled() {
        for route in [IsingRoute::III, IsingRoute::IV] {
            let line = Polyline::new(route.polyline().unwrap()).unwrap();
            let (x, y) = route.crossing();
            assert_relative_eq!(x - y, 1.0, epsilon = 1e-12);
            // the first segment passes through the crossing point
            let (a, b) = (line.points()[0], line.points()[1]);
            assert_relative_eq!((b.1 - a.1) * x, (b.0 - a.0) * y, epsilon = 1e-12);
            assert_eq!(line.at(1.0), (2.0, 1.0));
            assert_eq!(line.at(0.0), (0.0, 0.0));
        }
        assert_eq!(IsingRoute::from_label("iii"), Some(IsingRoute::III));
        assert_eq!(IsingRoute::from_label("(i)"), Some(IsingRoute::I));
    }

    #[test]
    fn route_one_dips_deepen_with_size_without_closing() {
        let deepest = |n| {
            let minima = IsingRoute::I.gap_minima(n).unwrap();
            assert!(minima.iter().all(|m| !m.is_closing()), "n = {n}: {minima:?}");
            minima.iter().map(|m| m.gap).fold(f64::INFINITY, f64::min)
        };
        let gaps: Vec<f64> = [6, 8, 10, 12, 16].into_iter().map(deepest).collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
        assert!(IsingRoute::II.gap_minima(8).unwrap().is_empty());
    }

    #[test]
    fn arc_length_is_uniform() {
        let line = Polyline::new(vec![(0.0, 0.0), (3.0, 0.0), (3.0, 1.0)]).unwrap();
        assert_eq!(line.length(), 4.0);
        assert_eq!(line.at(0.5), (2.0, 0.0));
        assert_eq!(line.at(0.875), (3.0, 0.5));
        assert!(Polyline::new(vec![(0.0, 0.0)]).is_err());
        assert!(Polyline::new(vec![(0.0, 0.0), (0.0, 0.0)]).is_err());
    }

    #[test]
    fn chain_beta_path_matches_metropolis_couplings() {
        let n = 9;
        let p = ParameterPath::chain_beta(n);
        let g = build_path(n).unwrap();
        let beta_c = 2.0 * (n as f64).ln();
        let full = p.params(1.0, n).unwrap();
        let want = IsParentParams::from_beta(&g, beta_c).unwrap().to_vec();
        for (a, b) in full.iter().zip(&want) {
            assert_relative_eq!(a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn star_paths_end_on_the_metropolis_line() {
        let b = 4;
        let g = build_star(b).unwrap();
        let want = IsParentParams::from_beta(&g, star_beta_end()).unwrap().to_vec();
        for path in [ParameterPath::star_beta(b), ParameterPath::star_speedup(b)] {
            let got = path.params(1.0, 2 * b + 1).unwrap();
            for (x, y) in got.iter().zip(&want) {
                assert_relative_eq!(x, y, max_relative = 1e-14);
            }
        }
        let mid = ParameterPath::star_speedup(b).params(0.5, 2 * b + 1).unwrap();
        assert_eq!(mid[2 * (2 * b + 1)], 1.0);
        assert!(ParameterPath::star_speedup(b).coefficients(1.5).is_err());
    }
}
