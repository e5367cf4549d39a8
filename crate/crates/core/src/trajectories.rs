//! Single-molecule telegraph histories: the label flips between the two ends
//! of a consistent family's diameter at the family's rate `κ(t)`.
//!
//! Flips are drawn by thinning a rate-`γ` Poisson stream, which is exact
//! because `κ ≤ γ` for every diameter. Each trajectory owns a ChaCha stream
//! selected by its index, so ensembles are reproducible regardless of how the
//! work is scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::families::{transition_rate, BlochDirection, FamilyTrajectory};
use crate::ode::{Integrator, OdeOptions};
use crate::ptm::{BlochState, ModelParams};

/// A time-dependent flip rate with a global upper bound.
pub trait TransitionRate: Sync {
    fn rate(&self, t: f64) -> f64;
    /// Upper bound on [`TransitionRate::rate`] over the whole interval.
    fn bound(&self) -> f64;
}

impl TransitionRate for FamilyTrajectory {
    fn rate(&self, t: f64) -> f64 {
        self.kappa_at(t)
    }

    fn bound(&self) -> f64 {
        self.params.gamma
    }
}

/// Constant rate `rate`, thinned from a stream of rate `bound`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantRate {
    pub rate: f64,
    pub bound: f64,
}

impl TransitionRate for ConstantRate {
    fn rate(&self, _t: f64) -> f64 {
        self.rate
    }

    fn bound(&self) -> f64 {
        self.bound
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub seed: u64,
    pub n_trajectories: usize,
    /// Probability that a trajectory starts in state 0.
    pub p0: f64,
}

impl SamplerConfig {
    pub fn new(seed: u64, n_trajectories: usize, p0: f64) -> Result<Self> {
        let c = Self {
            seed,
            n_trajectories,
            p0,
        };
        c.validate()?;
        Ok(c)
    }

    /// Start from the Born probability of `rho` on the end `dir` of the
    /// initial diameter.
    pub fn born(
        seed: u64,
        n_trajectories: usize,
        rho: &BlochState,
        dir: &BlochDirection,
    ) -> Result<Self> {
        Self::new(seed, n_trajectories, born_probability(rho, dir))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trajectories == 0 {
            return Err(Error::InvalidParams(
                "n_trajectories must be at least 1".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.p0) {
            return Err(Error::InvalidDistribution(format!(
                "p0 = {} is not a probability",
                self.p0
            )));
        }
        Ok(())
    }
}

/// `Tr(P ρ)` for the projector on the end `dir`.
pub fn born_probability(rho: &BlochState, dir: &BlochDirection) -> f64 {
    (0.5 * (1.0 + rho.bloch_vector().dot(&dir.unit_vector()))).clamp(0.0, 1.0)
}

/// One telegraph history. State 0 is the end of the family's diameter
/// continuously connected to the initial direction.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub t_start: f64,
    pub t_end: f64,
    pub initial_state: u8,
    /// Flip times and the state entered at each.
    pub events: Vec<(f64, u8)>,
}

impl Trajectory {
    pub fn state_at(&self, t: f64) -> u8 {
        let k = self.events.partition_point(|e| e.0 <= t);
        if k == 0 {
            self.initial_state
        } else {
            self.events[k - 1].1
        }
    }

    pub fn flip_times(&self) -> Vec<f64> {
        self.events.iter().map(|e| e.0).collect()
    }

    /// Waiting times from the start to the first flip and between flips; the
    /// censored tail after the last flip is excluded. Keeping only completed
    /// intervals favors short ones near `t_end`, so distributional tests
    /// should take the leading few from trajectories much longer than `1/κ`.
    pub fn waiting_times(&self) -> Vec<f64> {
        let mut prev = self.t_start;
        self.events
            .iter()
            .map(|&(t, _)| {
                let w = t - prev;
                prev = t;
                w
            })
            .collect()
    }

    /// Fraction of `[t_start, t_end]` spent in state 0.
    pub fn occupation0(&self) -> f64 {
        let span = self.t_end - self.t_start;
        if span <= 0.0 {
            return if self.initial_state == 0 { 1.0 } else { 0.0 };
        }
        let mut time0 = 0.0;
        let mut state = self.initial_state;
        let mut prev = self.t_start;
        for &(t, s) in &self.events {
            if state == 0 {
                time0 += t - prev;
            }
            prev = t;
            state = s;
        }
        if state == 0 {
            time0 += self.t_end - prev;
        }
        time0 / span
    }

    /// CSV with columns `t,state`; the first row is the initial state.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,state\n");
        out.push_str(&format!("{},{}\n", self.t_start, self.initial_state));
        for (t, s) in &self.events {
            out.push_str(&format!("{t},{s}\n"));
        }
        out
    }
}

fn rng_for(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Sample one history on `[t_start, t_end]` from an explicit generator.
pub fn sample_with_rng<R: TransitionRate + ?Sized>(
    rate: &R,
    p0: f64,
    t_start: f64,
    t_end: f64,
    rng: &mut impl Rng,
) -> Trajectory {
    let initial_state = if rng.random::<f64>() < p0 { 0 } else { 1 };
    let bound = rate.bound();
    let mut events = Vec::new();
    if bound > 0.0 {
        let exp = Exp::new(bound).expect("positive rate");
        let mut state = initial_state;
        let mut t = t_start;
        loop {
            t += exp.sample(rng);
            if t > t_end {
                break;
            }
            if rng.random::<f64>() * bound < rate.rate(t) {
                state ^= 1;
                events.push((t, state));
            }
        }
    }
    Trajectory {
        t_start,
        t_end,
        initial_state,
        events,
    }
}

/// Trajectory number `index` of the ensemble described by `config`.
pub fn sample_trajectory<R: TransitionRate + ?Sized>(
    rate: &R,
    config: &SamplerConfig,
    t_start: f64,
    t_end: f64,
    index: u64,
) -> Trajectory {
    sample_with_rng(
        rate,
        config.p0,
        t_start,
        t_end,
        &mut rng_for(config.seed, index),
    )
}

/// All `config.n_trajectories` trajectories, sampled in parallel.
pub fn sample_ensemble<R: TransitionRate + ?Sized>(
    rate: &R,
    config: &SamplerConfig,
    t_start: f64,
    t_end: f64,
) -> Vec<Trajectory> {
    (0..config.n_trajectories as u64)
        .into_par_iter()
        .map(|i| sample_trajectory(rate, config, t_start, t_end, i))
        .collect()
}

/// Sample a family's telegraph process over the family's own time span.
pub fn sample_family(family: &FamilyTrajectory, config: &SamplerConfig) -> Result<Vec<Trajectory>> {
    config.validate()?;
    if family.samples.is_empty() {
        return Err(Error::InvalidParams("family has no samples".into()));
    }
    Ok(sample_ensemble(
        family,
        config,
        family.start(),
        family.end(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsemblePoint {
    pub t: f64,
    pub p0: f64,
    /// Standard error of `p0`.
    pub p0_err: f64,
    pub state: BlochState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSeries {
    pub n: usize,
    pub points: Vec<EnsemblePoint>,
}

impl EnsembleSeries {
    /// CSV with columns `t,p0,rx,ry,rz`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,p0,rx,ry,rz\n");
        for p in &self.points {
            let r = p.state.bloch_vector();
            out.push_str(&format!("{},{},{},{},{}\n", p.t, p.p0, r[0], r[1], r[2]));
        }
        out
    }
}

/// Mixture `p0 P(t) + p1 (I − P(t))` of the family's moving basis with the
/// empirical occupation probabilities, at each grid time.
pub fn ensemble_average(
    trajectories: &[Trajectory],
    family: &FamilyTrajectory,
    grid: &[f64],
) -> EnsembleSeries {
    let n = trajectories.len();
    let counts = trajectories
        .par_iter()
        .fold(
            || vec![0usize; grid.len()],
            |mut acc, tr| {
                for (c, &t) in acc.iter_mut().zip(grid) {
                    if tr.state_at(t) == 0 {
                        *c += 1;
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0usize; grid.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let points = grid
        .iter()
        .zip(counts)
        .map(|(&t, c)| {
            let p0 = if n > 0 { c as f64 / n as f64 } else { 0.0 };
            let dir = family.direction_at(t).unit_vector();
            EnsemblePoint {
                t,
                p0,
                p0_err: if n > 0 {
                    (p0 * (1.0 - p0) / n as f64).sqrt()
                } else {
                    0.0
                },
                state: BlochState::from_bloch_vector(dir * (2.0 * p0 - 1.0)),
            }
        })
        .collect();
    EnsembleSeries { n, points }
}

/// Deterministic rate-equation solution for the family:
/// `p0 − p1` decays as `exp(−2∫κ)`. Returns `p0` at each grid time.
pub fn rate_equation_solution(
    family: &FamilyTrajectory,
    p0: f64,
    grid: &[f64],
) -> Result<Vec<f64>> {
    let first = family
        .samples
        .first()
        .ok_or_else(|| Error::InvalidParams("empty family".into()))?;
    let params: ModelParams = family.params;
    let cond = family.condition;
    let rhs = move |_t: f64, y: &[f64; 3]| {
        let d = BlochDirection::new(y[0], y[1]);
        let (dt, dp) = crate::families::drift(&d, &params, cond);
        [dt, dp, transition_rate(&d, &params)]
    };
    let mut integ = Integrator::new(rhs, OdeOptions::default().with_tolerance(1e-12));
    let mut y = [first.direction.theta, first.direction.phi, 0.0];
    let mut t = first.t;
    let mut out = Vec::with_capacity(grid.len());
    for &tg in grid {
        y = integ.advance(t, y, tg)?;
        t = tg;
        out.push(0.5 * (1.0 + (2.0 * p0 - 1.0) * (-2.0 * y[2]).exp()));
    }
    Ok(out)
}

/// One-sample Kolmogorov–Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic 1% critical value of the one-sample KS statistic.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.6276 / (n as f64).sqrt()
}
