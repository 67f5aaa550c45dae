//! Locally adiabatic schedules built from a sampled gap profile.

use crate::adiabatic::problem::{AdiabaticProblem, PathSample, STALL_GAP};
use crate::error::{Error, Result};
use crate::linalg::spectral_norm;

/// The local speed limit imposed on `ds/dt`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AdiabaticCondition {
    /// `ds/dt = ε Δ / ‖∂ₛψ₀‖`: the ground state may turn by at most an
    /// angle `ε Δ dt`.
    #[default]
    GroundStateVelocity,
    /// `ds/dt = ε Δ² / ‖∂ₛH‖`.
    OperatorNorm,
}

impl AdiabaticCondition {
    pub fn label(self) -> &'static str {
        match self {
            AdiabaticCondition::GroundStateVelocity => "ground-state-velocity",
            AdiabaticCondition::OperatorNorm => "operator-norm",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleOptions {
    pub condition: AdiabaticCondition,
    /// Uniform samples before refinement, endpoints included.
    pub initial_points: usize,
    /// Refine while neighbouring ground states have `1 − |⟨a|b⟩|²` above this.
    pub max_infidelity: f64,
    /// Refine while neighbouring gaps differ by more than this factor.
    pub max_gap_ratio: f64,
    /// Intervals are never split below this width.
    pub min_width: f64,
    pub max_points: usize,
}

impl Default for ScheduleOptions {
    fn default() -> Self {
        Self {
            condition: AdiabaticCondition::GroundStateVelocity,
            initial_points: 65,
            max_infidelity: 1e-3,
            max_gap_ratio: 1.2,
            min_width: 1e-10,
            max_points: 4000,
        }
    }
}

/// Local information a schedule needs about a path.
pub trait PathSampler {
    fn sample(&self, s: f64) -> Result<PathSample>;
    /// `‖H(b) − H(a)‖` in operator norm.
    fn hamiltonian_change(&self, a: f64, b: f64) -> Result<f64>;
}

impl PathSampler for AdiabaticProblem {
    fn sample(&self, s: f64) -> Result<PathSample> {
        AdiabaticProblem::sample(self, s)
    }

    fn hamiltonian_change(&self, a: f64, b: f64) -> Result<f64> {
        let ca = self.coefficients(a)?;
        let cb = self.coefficients(b)?;
        let diff: Vec<f64> = cb.iter().zip(&ca).map(|(x, y)| x - y).collect();
        Ok(spectral_norm(&self.affine().assemble(&diff)))
    }
}

fn overlap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>().abs().min(1.0)
}

/// Gap profile resolved finely enough for a schedule: neighbouring samples
/// have similar gaps and nearly parallel ground states.
pub fn sample_profile<P: PathSampler + ?Sized>(sampler: &P, opts: &ScheduleOptions) -> Result<Vec<PathSample>> {
    if opts.initial_points < 2 {
        return Err(Error::InvalidSize {
            what: "initial schedule points",
            value: opts.initial_points,
        });
    }
    let m = opts.initial_points - 1;
    let mut samples = Vec::with_capacity(opts.initial_points);
    for k in 0..=m {
        samples.push(checked_sample(sampler, k as f64 / m as f64)?);
    }
    loop {
        let mut next = Vec::with_capacity(samples.len() * 2);
        let mut refined = false;
        for w in samples.windows(2) {
            next.push(w[0].clone());
            let (a, b) = (&w[0], &w[1]);
            let infidelity = 1.0 - overlap(&a.ground, &b.ground).powi(2);
            let ratio = a.gap.max(b.gap) / a.gap.min(b.gap);
            if infidelity > opts.max_infidelity || ratio > opts.max_gap_ratio {
                if b.s - a.s > opts.min_width {
                    next.push(checked_sample(sampler, 0.5 * (a.s + b.s))?);
                    refined = true;
                } else if infidelity > 0.5 {
                    // the ground state jumps: a level crossing
                    return Err(Error::Stall { s: 0.5 * (a.s + b.s) });
                }
            }
        }
        next.push(samples.last().expect("nonempty").clone());
        samples = next;
        if !refined {
            return Ok(samples);
        }
        if samples.len() > opts.max_points {
            return Err(Error::Capacity {
                requested: samples.len(),
                cap: opts.max_points,
            });
        }
    }
}

fn checked_sample<P: PathSampler + ?Sized>(sampler: &P, s: f64) -> Result<PathSample> {
    let sample = sampler.sample(s)?;
    if sample.gap < STALL_GAP && s > 0.0 && s < 1.0 {
        return Err(Error::Stall { s });
    }
    Ok(sample)
}

/// A monotone map `t ↦ s` with `s(0) = 0` and `s(t_tot) = 1`, piecewise
/// linear between knots.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    s_knots: Vec<f64>,
    /// Knot times at `ε = 1`.
    unit_times: Vec<f64>,
    epsilon: f64,
    min_gap: f64,
    condition: AdiabaticCondition,
}

impl Schedule {
    /// Schedule through knots `s` whose interval durations at `ε = 1` are
    /// `durations`.
    pub fn from_durations(
        s_knots: Vec<f64>,
        durations: &[f64],
        epsilon: f64,
        min_gap: f64,
        condition: AdiabaticCondition,
    ) -> Result<Self> {
        if s_knots.len() != durations.len() + 1 || s_knots.len() < 2 {
            return Err(Error::domain("schedule needs one duration per knot interval"));
        }
        if s_knots[0] != 0.0 || *s_knots.last().unwrap() != 1.0 || s_knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("schedule knots must increase from 0 to 1"));
        }
        if durations.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return Err(Error::domain("schedule durations must be finite and nonnegative"));
        }
        check_epsilon(epsilon)?;
        let mut unit_times = vec![0.0];
        for d in durations {
            unit_times.push(unit_times.last().unwrap() + d);
        }
        Ok(Self {
            s_knots,
            unit_times,
            epsilon,
            min_gap,
            condition,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn condition(&self) -> AdiabaticCondition {
        self.condition
    }

    pub fn min_gap(&self) -> f64 {
        self.min_gap
    }

    /// Same shape, different global speed.
    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        Ok(Self {
            epsilon,
            ..self.clone()
        })
    }

    /// Total time at `ε = 1`.
    pub fn unit_time(&self) -> f64 {
        *self.unit_times.last().unwrap()
    }

    pub fn total_time(&self) -> f64 {
        self.unit_time() / self.epsilon
    }

    pub fn knots(&self) -> &[f64] {
        &self.s_knots
    }

    /// Times of the knots at the current `ε`.
    pub fn knot_times(&self) -> Vec<f64> {
        self.unit_times.iter().map(|t| t / self.epsilon).collect()
    }

    pub fn s_at(&self, t: f64) -> f64 {
        let u = (t * self.epsilon).clamp(0.0, self.unit_time());
        let k = self.unit_times.partition_point(|&x| x < u).clamp(1, self.s_knots.len() - 1);
        let (t0, t1) = (self.unit_times[k - 1], self.unit_times[k]);
        let (s0, s1) = (self.s_knots[k - 1], self.s_knots[k]);
        if t1 == t0 {
            return s1;
        }
        s0 + (s1 - s0) * (u - t0) / (t1 - t0)
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::domain(format!("speed scale ε = {epsilon} must be positive")));
    }
    Ok(())
}

/// Builds a schedule for `sampler` at global speed `epsilon`.
pub fn build_schedule<P: PathSampler + ?Sized>(sampler: &P, epsilon: f64, opts: &ScheduleOptions) -> Result<Schedule> {
    let profile = sample_profile(sampler, opts)?;
    schedule_from_profile(sampler, &profile, epsilon, opts.condition)
}

/// Schedule through the samples of an already resolved profile.
pub fn schedule_from_profile<P: PathSampler + ?Sized>(
    sampler: &P,
    profile: &[PathSample],
    epsilon: f64,
    condition: AdiabaticCondition,
) -> Result<Schedule> {
    let mut durations = Vec::with_capacity(profile.len() - 1);
    for w in profile.windows(2) {
        let gap = w[0].gap.min(w[1].gap);
        let d = match condition {
            AdiabaticCondition::GroundStateVelocity => overlap(&w[0].ground, &w[1].ground).acos() / gap,
            AdiabaticCondition::OperatorNorm => sampler.hamiltonian_change(w[0].s, w[1].s)? / (gap * gap),
        };
        durations.push(d);
    }
    let min_gap = profile.iter().map(|p| p.gap).fold(f64::INFINITY, f64::min);
    Schedule::from_durations(
        profile.iter().map(|p| p.s).collect(),
        &durations,
        epsilon,
        min_gap,
        condition,
    )
}
