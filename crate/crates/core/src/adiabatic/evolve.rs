//! Schrödinger evolution along a schedule and the search for `t_a`.

use num_complex::Complex64;

use crate::adiabatic::problem::{AdiabaticProblem, AffineOperator};
use crate::adiabatic::schedule::{sample_profile, schedule_from_profile, Schedule, ScheduleOptions};
use crate::error::{Error, Result};
use crate::fit::{power_law_fit, LineFit};
use crate::linalg::expm_chebyshev;
use crate::sparse::CsrMatrix;

/// Fidelity the ground state must reach for `t_a`.
pub const DEFAULT_TARGET_FIDELITY: f64 = 1.0 - 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionOptions {
    /// Local error allowed per step, in state norm.
    pub step_tol: f64,
    /// Truncation error allowed in each step exponential.
    pub propagator_tol: f64,
    /// Evolutions whose norm drifts further than this fail.
    pub max_norm_drift: f64,
    /// The fidelity trace is thinned to at most this many points.
    pub trace_points: usize,
    pub initial_step: f64,
    /// Guard against runaway step counts.
    pub max_steps: usize,
}

impl Default for EvolutionOptions {
    fn default() -> Self {
        Self {
            step_tol: 1e-9,
            propagator_tol: 1e-12,
            max_norm_drift: 1e-8,
            trace_points: 200,
            initial_step: 0.05,
            max_steps: 5_000_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub state: Vec<Complex64>,
    /// Weight of the final state in the target space.
    pub fidelity: f64,
    pub t_tot: f64,
    pub norm_drift: f64,
    /// `(t, fidelity against the target)` at accepted steps, thinned.
    pub trace: Vec<(f64, f64)>,
    pub steps: usize,
    pub rejected_steps: usize,
}

// commutator-free fourth-order Magnus coefficients
const SQRT3: f64 = 1.732_050_807_568_877_2;
const C1: f64 = 0.5 - SQRT3 / 6.0;
const C2: f64 = 0.5 + SQRT3 / 6.0;
const A1: f64 = (3.0 - 2.0 * SQRT3) / 12.0;
const A2: f64 = (3.0 + 2.0 * SQRT3) / 12.0;

struct Propagator<'a, F: Fn(f64) -> Result<Vec<f64>>> {
    affine: &'a AffineOperator,
    coefficients: F,
    schedule: &'a Schedule,
    propagator_tol: f64,
    scratch: CsrMatrix,
}

impl<F: Fn(f64) -> Result<Vec<f64>>> Propagator<'_, F> {
    fn step(&mut self, t: f64, dt: f64, psi: &[Complex64]) -> Result<Vec<Complex64>> {
        let c1 = (self.coefficients)(self.schedule.s_at(t + C1 * dt))?;
        let c2 = (self.coefficients)(self.schedule.s_at(t + C2 * dt))?;
        let first: Vec<f64> = c1.iter().zip(&c2).map(|(a, b)| A2 * a + A1 * b).collect();
        let second: Vec<f64> = c1.iter().zip(&c2).map(|(a, b)| A1 * a + A2 * b).collect();
        self.affine.assemble_into(&first, &mut self.scratch);
        let mid = expm_chebyshev(&self.scratch, psi, dt, self.propagator_tol);
        self.affine.assemble_into(&second, &mut self.scratch);
        Ok(expm_chebyshev(&self.scratch, &mid, dt, self.propagator_tol))
    }
}

fn cnorm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn target_weight(psi: &[Complex64], targets: &[Vec<f64>]) -> f64 {
    targets
        .iter()
        .map(|t| t.iter().zip(psi).map(|(a, b)| b * a).sum::<Complex64>().norm_sqr())
        .sum()
}

/// Evolves `initial` under `H(s(t)) = Σₖ cₖ(s(t)) Hₖ` for the whole
/// schedule and measures the final weight in the span of `targets`, which
/// must be orthonormal.
pub fn evolve_affine<F>(
    affine: &AffineOperator,
    coefficients: F,
    schedule: &Schedule,
    initial: &[Complex64],
    targets: &[Vec<f64>],
    opts: &EvolutionOptions,
) -> Result<EvolutionResult>
where
    F: Fn(f64) -> Result<Vec<f64>>,
{
    if initial.len() != affine.dim() || targets.iter().any(|t| t.len() != affine.dim()) {
        return Err(Error::domain("state dimension does not match the operator"));
    }
    let n0 = cnorm(initial);
    if (n0 - 1.0).abs() > 1e-10 {
        return Err(Error::domain(format!("initial state has norm {n0}")));
    }
    let mut prop = Propagator {
        affine,
        coefficients,
        schedule,
        propagator_tol: opts.propagator_tol,
        scratch: affine.zeros(),
    };
    let knots = schedule.knot_times();
    let t_tot = schedule.total_time();
    let mut psi = initial.to_vec();
    let mut t = 0.0;
    let mut dt = opts.initial_step.min(t_tot.max(f64::MIN_POSITIVE));
    let mut next_knot = 1;
    let mut steps = 0;
    let mut rejected = 0;
    let mut drift = 0.0f64;
    let mut trace = vec![(0.0, target_weight(&psi, targets))];
    while t < t_tot {
        while next_knot < knots.len() - 1 && knots[next_knot] <= t {
            next_knot += 1;
        }
        let limit = knots[next_knot].min(t_tot) - t;
        let snapped = dt >= limit;
        let h = if snapped { limit } else { dt };
        if h <= 0.0 {
            next_knot += 1;
            continue;
        }
        let big = prop.step(t, h, &psi)?;
        let half = prop.step(t, h / 2.0, &psi)?;
        let small = prop.step(t + h / 2.0, h / 2.0, &half)?;
        let err = big.iter().zip(&small).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        let factor = if err == 0.0 {
            2.0
        } else {
            (0.9 * (opts.step_tol / err).powf(0.2)).clamp(0.2, 2.0)
        };
        if err <= opts.step_tol {
            psi = small;
            t = if snapped { knots[next_knot].min(t_tot) } else { t + h };
            steps += 1;
            drift = drift.max((cnorm(&psi) - 1.0).abs());
            if drift > opts.max_norm_drift {
                return Err(Error::Accuracy { drift });
            }
            trace.push((t, target_weight(&psi, targets)));
            dt = if snapped { dt.max(h * factor) } else { h * factor };
        } else {
            rejected += 1;
            dt = h * factor;
        }
        if steps + rejected > opts.max_steps {
            return Err(Error::Capacity {
                requested: steps + rejected,
                cap: opts.max_steps,
            });
        }
    }
    let fidelity = target_weight(&psi, targets);
    Ok(EvolutionResult {
        state: psi,
        fidelity,
        t_tot,
        norm_drift: drift,
        trace: thin(trace, opts.trace_points),
        steps,
        rejected_steps: rejected,
    })
}

fn thin(trace: Vec<(f64, f64)>, points: usize) -> Vec<(f64, f64)> {
    if trace.len() <= points || points < 2 {
        return trace;
    }
    let last = trace.len() - 1;
    (0..points)
        .map(|k| trace[(k * last + (points - 1) / 2) / (points - 1)])
        .collect()
}

/// Evolves `initial` along the problem's path; targets are sector vectors.
pub fn evolve(
    problem: &AdiabaticProblem,
    schedule: &Schedule,
    initial: &[Complex64],
    targets: &[Vec<f64>],
    opts: &EvolutionOptions,
) -> Result<EvolutionResult> {
    evolve_affine(
        problem.affine(),
        |s| problem.coefficients(s),
        schedule,
        initial,
        targets,
        opts,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaOptions {
    pub target_fidelity: f64,
    /// Bisection stops once `ε_fail/ε_ok` is below `1 + rel_tol`.
    pub rel_tol: f64,
    /// Largest total time tried before giving up.
    pub max_time: f64,
    pub start_epsilon: f64,
}

impl Default for TaOptions {
    fn default() -> Self {
        Self {
            target_fidelity: DEFAULT_TARGET_FIDELITY,
            rel_tol: 0.05,
            max_time: 1e6,
            start_epsilon: 1.0,
        }
    }
}

/// One evolution performed during the search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaEvaluation {
    pub epsilon: f64,
    pub t_tot: f64,
    pub fidelity: f64,
    pub norm_drift: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TaOutcome {
    Found { t_a: f64, epsilon: f64 },
    /// The target was missed even at the largest allowed time.
    CapExceeded { max_time: f64, best_fidelity: f64 },
}

#[derive(Debug, Clone)]
pub struct TaReport {
    pub outcome: TaOutcome,
    pub evaluations: Vec<TaEvaluation>,
    /// Schedule time at `ε = 1`.
    pub unit_time: f64,
    pub min_gap: f64,
    pub profile_points: usize,
}

impl TaReport {
    pub fn t_a(&self) -> Option<f64> {
        match self.outcome {
            TaOutcome::Found { t_a, .. } => Some(t_a),
            TaOutcome::CapExceeded { .. } => None,
        }
    }

    /// Evaluations with `t_tot` ascending, for checking monotonicity.
    pub fn sorted_evaluations(&self) -> Vec<TaEvaluation> {
        let mut v = self.evaluations.clone();
        v.sort_by(|a, b| a.t_tot.total_cmp(&b.t_tot));
        v
    }

    /// Whether fidelity never drops as the total time grows.
    pub fn fidelity_is_monotone(&self) -> bool {
        self.sorted_evaluations()
            .windows(2)
            .all(|w| w[1].fidelity >= w[0].fidelity - 1e-9)
    }
}

/// Smallest total time, over schedules of fixed shape and variable global
/// speed, that reaches the target fidelity.
pub fn find_ta(
    problem: &AdiabaticProblem,
    schedule_opts: &ScheduleOptions,
    ta_opts: &TaOptions,
    evo_opts: &EvolutionOptions,
) -> Result<TaReport> {
    if !(ta_opts.target_fidelity > 0.0 && ta_opts.target_fidelity < 1.0) {
        return Err(Error::domain("target fidelity must lie in (0, 1)"));
    }
    if !(ta_opts.rel_tol > 0.0) {
        return Err(Error::domain("bisection tolerance must be positive"));
    }
    let profile = sample_profile(problem, schedule_opts)?;
    let base = schedule_from_profile(problem, &profile, 1.0, schedule_opts.condition)?;
    let initial: Vec<Complex64> = profile[0].ground.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let targets = problem.ground_space(1.0)?;
    let unit = base.unit_time();
    let mut evaluations = Vec::new();
    let mut run = |epsilon: f64| -> Result<bool> {
        let sched = base.with_epsilon(epsilon)?;
        let r = evolve(problem, &sched, &initial, &targets, evo_opts)?;
        evaluations.push(TaEvaluation {
            epsilon,
            t_tot: r.t_tot,
            fidelity: r.fidelity,
            norm_drift: r.norm_drift,
        });
        Ok(r.fidelity >= ta_opts.target_fidelity)
    };
    let report = |outcome, evaluations| TaReport {
        outcome,
        evaluations,
        unit_time: unit,
        min_gap: base.min_gap(),
        profile_points: profile.len(),
    };
    let mut eps = ta_opts.start_epsilon;
    let (mut ok, mut fail);
    if run(eps)? {
        ok = eps;
        loop {
            eps *= 2.0;
            if unit / eps < 1e-9 {
                // the initial state already meets the target
                return Ok(report(TaOutcome::Found { t_a: unit / ok, epsilon: ok }, evaluations));
            }
            if !run(eps)? {
                fail = eps;
                break;
            }
            ok = eps;
        }
    } else {
        fail = eps;
        loop {
            eps /= 2.0;
            if unit / eps > ta_opts.max_time {
                let best = evaluations.iter().map(|e| e.fidelity).fold(0.0, f64::max);
                return Ok(report(
                    TaOutcome::CapExceeded {
                        max_time: ta_opts.max_time,
                        best_fidelity: best,
                    },
                    evaluations,
                ));
            }
            if run(eps)? {
                ok = eps;
                break;
            }
            fail = eps;
        }
    }
    while fail / ok > 1.0 + ta_opts.rel_tol {
        let mid = (ok * fail).sqrt();
        if run(mid)? {
            ok = mid;
        } else {
            fail = mid;
        }
    }
    Ok(report(TaOutcome::Found { t_a: unit / ok, epsilon: ok }, evaluations))
}

/// Power-law exponent of `times` against `sizes` with its standard error.
pub fn scaling_fit(sizes: &[f64], times: &[f64]) -> Result<LineFit> {
    if sizes.len() < 4 || sizes.len() != times.len() {
        return Err(Error::InvalidSize {
            what: "scaling points",
            value: sizes.len().min(times.len()),
        });
    }
    power_law_fit(sizes, times)
}
