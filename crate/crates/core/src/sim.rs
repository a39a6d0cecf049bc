//! Fractional Adams-Bashforth-Moulton integration of `D^q z = f(z)` and
//! classification of the resulting trajectories.
//!
//! The scheme is the PECE form of the product-trapezoidal rule: one
//! rectangle-rule predictor, one trapezoidal corrector, no iteration.
//! Memory is full by default, which costs `O(N^2)` for `N` steps.

use crate::error::{Error, Result};
use crate::model::{split_state, NetworkSpec, RealSplitSystem};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use std::ops::{Add, Mul};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MemoryPolicy {
    #[default]
    Full,
    /// Only the last `L` history terms enter the sums. Not exact: the
    /// dropped tail of the memory integral is ignored.
    Truncated(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub q: f64,
    pub h: f64,
    pub t_end: f64,
    #[serde(default)]
    pub memory: MemoryPolicy,
}

impl SimConfig {
    pub fn new(q: f64, h: f64, t_end: f64) -> Self {
        SimConfig {
            q,
            h,
            t_end,
            memory: MemoryPolicy::Full,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut v = Vec::new();
        if !(self.q > 0.0 && self.q <= 1.0) {
            v.push(format!("q must be in (0, 1], got {}", self.q));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            v.push(format!("h must be > 0, got {}", self.h));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            v.push(format!("t_end must be > 0, got {}", self.t_end));
        } else if self.h > self.t_end {
            v.push(format!("h = {} exceeds t_end = {}", self.h, self.t_end));
        }
        if self.memory == MemoryPolicy::Truncated(0) {
            v.push("truncated memory needs a window of at least 1".into());
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(v.join("; ")))
        }
    }

    /// Number of steps, `t_end / h` rounded to the nearest integer.
    pub fn steps(&self) -> usize {
        (self.t_end / self.h).round().max(1.0) as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory<T = Complex64> {
    /// `t_k = k h`.
    pub times: Vec<f64>,
    pub states: Vec<Vec<T>>,
    /// Set when a non-finite state appeared; the trajectory then ends at the
    /// last finite step.
    pub diverged: bool,
}

impl<T> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Scalar types the integrator can advance.
pub trait Component: Copy + Add<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn is_finite(self) -> bool;
}

impl Component for f64 {
    fn zero() -> Self {
        0.0
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl Component for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn is_finite(self) -> bool {
        Complex64::is_finite(self)
    }
}

/// `(1 + x)^p - 1`.
fn pow1p_m1(x: f64, p: f64) -> f64 {
    (p * x.ln_1p()).exp_m1()
}

/// `(1 + x)^p + (1 - x)^p - 2` for `0 < x <= 1`.
fn second_difference(x: f64, p: f64) -> f64 {
    if x > 0.125 {
        return pow1p_m1(x, p) + pow1p_m1(-x, p);
    }
    // 2 sum_{k even >= 2} C(p, k) x^k
    let x2 = x * x;
    let mut binom = p * (p - 1.0) / 2.0;
    let mut power = x2;
    let mut sum = 0.0;
    let mut k = 2.0;
    loop {
        let term = binom * power;
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() || binom == 0.0 {
            break;
        }
        binom *= (p - k) * (p - k - 1.0) / ((k + 1.0) * (k + 2.0));
        power *= x2;
        k += 2.0;
    }
    2.0 * sum
}

/// Quadrature weights for `N` steps.
struct Weights {
    /// `b_m = (m+1)^q - m^q`.
    b: Vec<f64>,
    /// `c_m = (m+2)^{q+1} - 2 (m+1)^{q+1} + m^{q+1}`.
    c: Vec<f64>,
    /// `a_0(k) = k^{q+1} - (k - q)(k+1)^q`.
    a0: Vec<f64>,
}

impl Weights {
    fn new(q: f64, steps: usize) -> Self {
        let p = q + 1.0;
        let b = (0..steps)
            .map(|m| {
                if m == 0 {
                    1.0
                } else {
                    let mf = m as f64;
                    mf.powf(q) * pow1p_m1(1.0 / mf, q)
                }
            })
            .collect();
        let c = (0..steps)
            .map(|m| {
                let m1 = (m + 1) as f64;
                m1.powf(p) * second_difference(1.0 / m1, p)
            })
            .collect();
        let a0 = (0..steps)
            .map(|k| {
                if k == 0 {
                    q
                } else {
                    // (k+1)^q [k ((k/(k+1))^q - 1) + q]
                    let kf = k as f64;
                    let y = 1.0 / (kf + 1.0);
                    (kf + 1.0).powf(q) * (kf * pow1p_m1(-y, q) + q)
                }
            })
            .collect();
        Weights { b, c, a0 }
    }
}

/// Integrates `D^q u = f(u)` from `u0`. `field(u, out)` writes `f(u)`.
pub fn abm_integrate<T, F>(u0: &[T], cfg: &SimConfig, mut field: F) -> Result<Trajectory<T>>
where
    T: Component,
    F: FnMut(&[T], &mut [T]),
{
    cfg.validate()?;
    let dim = u0.len();
    let steps = cfg.steps();
    let w = Weights::new(cfg.q, steps);
    let hq = cfg.h.powf(cfg.q);
    let pred_scale = hq / gamma(cfg.q + 1.0);
    let corr_scale = hq / gamma(cfg.q + 2.0);
    let window = match cfg.memory {
        MemoryPolicy::Full => usize::MAX,
        MemoryPolicy::Truncated(l) => l,
    };

    let mut times = Vec::with_capacity(steps + 1);
    let mut states: Vec<Vec<T>> = Vec::with_capacity(steps + 1);
    // f(u_j) for every accepted step, flattened
    let mut history: Vec<T> = Vec::with_capacity((steps + 1) * dim);
    let mut f = vec![T::zero(); dim];
    let mut pred_acc = vec![T::zero(); dim];
    let mut corr_acc = vec![T::zero(); dim];
    let mut predictor = vec![T::zero(); dim];

    times.push(0.0);
    states.push(u0.to_vec());
    field(u0, &mut f);
    if !f.iter().all(|x| x.is_finite()) {
        return Ok(Trajectory { times, states, diverged: true });
    }
    history.extend_from_slice(&f);

    for k in 0..steps {
        let lo = (k + 1).saturating_sub(window);
        pred_acc.fill(T::zero());
        corr_acc.fill(T::zero());
        for j in lo..=k {
            let fj = &history[j * dim..(j + 1) * dim];
            let bw = w.b[k - j];
            let aw = if j == 0 { w.a0[k] } else { w.c[k - j] };
            for i in 0..dim {
                pred_acc[i] = pred_acc[i] + fj[i] * bw;
                corr_acc[i] = corr_acc[i] + fj[i] * aw;
            }
        }
        for i in 0..dim {
            predictor[i] = u0[i] + pred_acc[i] * pred_scale;
        }
        field(&predictor, &mut f);
        let next: Vec<T> = (0..dim).map(|i| u0[i] + (f[i] + corr_acc[i]) * corr_scale).collect();
        if !next.iter().all(|x| x.is_finite()) {
            return Ok(Trajectory { times, states, diverged: true });
        }
        field(&next, &mut f);
        if !f.iter().all(|x| x.is_finite()) {
            return Ok(Trajectory { times, states, diverged: true });
        }
        history.extend_from_slice(&f);
        times.push((k + 1) as f64 * cfg.h);
        states.push(next);
    }
    Ok(Trajectory { times, states, diverged: false })
}

/// Trajectory of the complex network from `z0`.
pub fn abm_simulate(spec: &NetworkSpec, z0: &[Complex64], cfg: &SimConfig) -> Result<Trajectory> {
    spec.ensure_valid()?;
    spec.check_state(z0)?;
    abm_integrate(z0, cfg, |z, out| out.copy_from_slice(&spec.field(z)))
}

/// Same recurrence on the real-split system, state layout `(x, y)`.
pub fn abm_simulate_split(sys: &RealSplitSystem, u0: &[f64], cfg: &SimConfig) -> Result<Trajectory<f64>> {
    if u0.len() != sys.dim {
        return Err(Error::StateLength {
            expected: sys.n(),
            got: u0.len() / 2,
        });
    }
    abm_integrate(u0, cfg, |u, out| out.copy_from_slice(sys.field(u).as_slice()))
}

/// Convenience: split-form trajectory of `spec` from a complex `z0`.
pub fn abm_simulate_via_split(spec: &NetworkSpec, z0: &[Complex64], cfg: &SimConfig) -> Result<Trajectory<f64>> {
    spec.ensure_valid()?;
    spec.check_state(z0)?;
    abm_simulate_split(&spec.real_split(), &split_state(z0), cfg)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailClass {
    Decayed,
    SustainedOscillation,
    Diverged,
    Indeterminate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailCriteria {
    pub window_fraction: f64,
    pub eps_decay: f64,
    pub eps_osc: f64,
}

impl Default for TailCriteria {
    fn default() -> Self {
        TailCriteria {
            window_fraction: 0.2,
            eps_decay: 1e-3,
            eps_osc: 1e-3,
        }
    }
}

pub const MIN_WINDOW: usize = 10;
/// Allowed relative amplitude drift across the window for an oscillation.
pub const TREND_TOLERANCE: f64 = 0.1;
const TREND_CHUNKS: usize = 5;

fn window_start(len: usize, fraction: f64) -> usize {
    let w = ((len as f64) * fraction).ceil() as usize;
    len - w.clamp(1, len)
}

/// Largest peak-to-peak swing over all real and imaginary parts.
fn peak_to_peak(states: &[Vec<Complex64>]) -> f64 {
    let n = states[0].len();
    let mut best: f64 = 0.0;
    for i in 0..n {
        for part in [|z: Complex64| z.re, |z: Complex64| z.im] {
            let (lo, hi) = states
                .iter()
                .map(|s| part(s[i]))
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
            best = best.max(hi - lo);
        }
    }
    best
}

/// Regime of the trailing `window_fraction` of the trajectory.
///
/// The amplitude trend is the least-squares slope of the peak-to-peak
/// amplitude over five consecutive chunks of the window; an oscillation is
/// sustained when that slope changes the amplitude by at most 10% of its
/// mean over the window.
pub fn classify_tail(traj: &Trajectory, criteria: &TailCriteria) -> Result<TailClass> {
    let TailCriteria {
        window_fraction,
        eps_decay,
        eps_osc,
    } = *criteria;
    if !(window_fraction > 0.0 && window_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "window fraction must be in (0, 1), got {window_fraction}"
        )));
    }
    if traj.diverged {
        return Ok(TailClass::Diverged);
    }
    let start = window_start(traj.len(), window_fraction);
    let tail = &traj.states[start..];
    if tail.len() < MIN_WINDOW {
        return Err(Error::InvalidArgument(format!(
            "trailing window has {} samples, need at least {MIN_WINDOW}",
            tail.len()
        )));
    }
    let max_mod = tail
        .iter()
        .flat_map(|s| s.iter().map(|z| z.norm()))
        .fold(0.0, f64::max);
    if max_mod <= eps_decay {
        return Ok(TailClass::Decayed);
    }
    if peak_to_peak(tail) < eps_osc {
        return Ok(TailClass::Indeterminate);
    }
    let chunk = tail.len() / TREND_CHUNKS;
    let amps: Vec<f64> = (0..TREND_CHUNKS)
        .map(|c| peak_to_peak(&tail[c * chunk..(c + 1) * chunk]))
        .collect();
    let mean = amps.iter().sum::<f64>() / TREND_CHUNKS as f64;
    let xm = (TREND_CHUNKS as f64 - 1.0) / 2.0;
    let (num, den) = amps.iter().enumerate().fold((0.0, 0.0), |(num, den), (i, a)| {
        let dx = i as f64 - xm;
        (num + dx * (a - mean), den + dx * dx)
    });
    let drift = num / den * (TREND_CHUNKS as f64 - 1.0);
    if drift.abs() <= TREND_TOLERANCE * mean {
        Ok(TailClass::SustainedOscillation)
    } else {
        Ok(TailClass::Indeterminate)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RingAttractorReport {
    /// `max |z_i - z_j|` over the trailing window.
    pub spread: f64,
    /// `max ||mean(z)| - 1|` over the trailing window.
    pub modulus_defect: f64,
}

/// Distance of the trailing fifth of a trajectory from the set of
/// equal-component states on the unit circle.
pub fn ring_attractor_check(traj: &Trajectory) -> RingAttractorReport {
    let mut spread: f64 = 0.0;
    let mut modulus_defect: f64 = 0.0;
    if traj.is_empty() {
        return RingAttractorReport {
            spread: f64::NAN,
            modulus_defect: f64::NAN,
        };
    }
    let start = window_start(traj.len(), TailCriteria::default().window_fraction);
    for s in &traj.states[start..] {
        for (i, a) in s.iter().enumerate() {
            for b in &s[i + 1..] {
                spread = spread.max((a - b).norm());
            }
        }
        let mean = s.iter().sum::<Complex64>() / s.len() as f64;
        modulus_defect = modulus_defect.max((mean.norm() - 1.0).abs());
    }
    RingAttractorReport { spread, modulus_defect }
}
