//! Algebra of time-indexed flow-rate signals.
//!
//! A [`Signal`] is a flow-rate density sampled on a uniform [`TimeGrid`],
//! plus a list of discrete impulses carrying finite mass at exact times.
//! Densities are piecewise constant: the value at sample `k` holds over
//! `[t_k, t_k + dt)`. Impulses are kept symbolic (time, mass) instead of
//! being smeared into tall density spikes, so compressed impulse models stay
//! exact regardless of the grid step.
//!
//! A [`CumulativeSignal`] is the running integral of a signal. It is
//! piecewise constant between its samples and holds its boundary value
//! outside the grid, which lets settled tails be integrated past the end of
//! the recorded window.
//!
//! Units are abstract throughout: time-units, quantity, currency. Callers
//! document per-channel units; nothing here checks them.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::num;
use crate::Result;

/// Relative slack used when snapping a time to a grid index, so that times
/// computed as `t_start + k*dt` land on sample `k` despite rounding.
const INDEX_SNAP: f64 = 1e-9;

/// A uniform sampling grid.
///
/// Sample `k` has timestamp `t_start + k * dt`. The densities of a signal on
/// this grid cover the half-open span `[t_start, end())`; impulse times may
/// lie anywhere in the closed span `[t_start, end()]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    t_start: f64,
    dt: f64,
    n_samples: usize,
}

impl TimeGrid {
    /// Creates a grid with `n_samples` samples of step `dt` starting at
    /// `t_start`. Fails if `dt` is not a positive finite number.
    pub fn new(t_start: f64, dt: f64, n_samples: usize) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Argument(format!(
                "dt must be positive and finite, got {dt}"
            )));
        }
        if !t_start.is_finite() {
            return Err(Error::Argument(format!("t_start must be finite, got {t_start}")));
        }
        Ok(TimeGrid { t_start, dt, n_samples })
    }

    /// Grid covering `[t_start, t_end)` with step `dt`; the sample count is
    /// `(t_end - t_start)/dt` rounded to the nearest integer.
    pub fn covering(t_start: f64, t_end: f64, dt: f64) -> Result<Self> {
        if !(t_end >= t_start) {
            return Err(Error::Argument(format!(
                "grid end {t_end} precedes start {t_start}"
            )));
        }
        let grid = TimeGrid::new(t_start, dt, 0)?;
        let n = num::round((t_end - t_start) / dt).max(0.0) as usize;
        Ok(TimeGrid { n_samples: n, ..grid })
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    /// Timestamp of sample `k`.
    pub fn time(&self, k: usize) -> f64 {
        self.t_start + (k as f64) * self.dt
    }

    /// End of the span covered by the densities: `t_start + n_samples * dt`.
    pub fn end(&self) -> f64 {
        self.time(self.n_samples)
    }

    /// True if `t` lies in the closed span `[t_start, end()]` (with snapping
    /// slack at both boundaries).
    pub fn contains(&self, t: f64) -> bool {
        let slack = INDEX_SNAP * self.dt.max(num::abs(t));
        t >= self.t_start - slack && t <= self.end() + slack
    }

    /// Fractional sample position of time `t`.
    fn position(&self, t: f64) -> f64 {
        (t - self.t_start) / self.dt
    }

    /// Index of the first sample whose timestamp is `>= t`, treating times
    /// within a relative `1e-9` of a sample as exactly on it. The result is
    /// not clamped to the sample count.
    pub fn index_at_or_after(&self, t: f64) -> usize {
        let p = self.position(t);
        let guarded = p - INDEX_SNAP * num::abs(p).max(1.0);
        let k = num::ceil(guarded);
        if k <= 0.0 {
            0
        } else {
            k as usize
        }
    }

    /// Index of the last sample whose timestamp is `<= t`, with the same
    /// snapping slack as [`TimeGrid::index_at_or_after`]. Times before the
    /// grid clamp to sample 0.
    pub fn index_at_or_before(&self, t: f64) -> usize {
        let p = self.position(t);
        let guarded = p + INDEX_SNAP * num::abs(p).max(1.0);
        let k = num::floor(guarded);
        if k <= 0.0 {
            0
        } else {
            k as usize
        }
    }

    /// Same grid extended by `extra` samples at the end.
    pub fn extended(&self, extra: usize) -> TimeGrid {
        TimeGrid {
            t_start: self.t_start,
            dt: self.dt,
            n_samples: self.n_samples + extra,
        }
    }
}

/// A discrete mass deposited at an exact time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Impulse {
    pub time: f64,
    pub mass: f64,
}

/// Sign convention for integration: inputs of an operation accumulate
/// negatively (they are committed resources, seen from the outside), outputs
/// accumulate positively.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    fn factor(self) -> f64 {
        match self {
            Sign::Positive => 1.0,
            Sign::Negative => -1.0,
        }
    }
}

/// Compensated (Kahan) accumulator. Integration sums thousands of samples;
/// plain summation would eat into the 1e-12 tolerances the cumulative
/// invariants are held to.
#[derive(Clone, Copy, Default)]
struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    fn add(&mut self, value: f64) {
        let y = value - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum
    }
}

/// A flow-rate signal: uniformly sampled density plus discrete impulses.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    grid: TimeGrid,
    density: Vec<f64>,
    impulses: Vec<Impulse>,
}

impl Signal {
    /// Builds a signal from per-sample densities and an impulse list.
    ///
    /// The density length must match the grid sample count, every impulse
    /// time must lie within the closed grid span, and the impulses must be
    /// sorted ascending by time (ties allowed).
    pub fn new(grid: TimeGrid, density: Vec<f64>, impulses: Vec<Impulse>) -> Result<Self> {
        if density.len() != grid.n_samples() {
            return Err(Error::Argument(format!(
                "density length {} does not match grid sample count {}",
                density.len(),
                grid.n_samples()
            )));
        }
        for imp in &impulses {
            if !grid.contains(imp.time) {
                return Err(Error::Argument(format!(
                    "impulse at t={} lies outside the grid span [{}, {}]",
                    imp.time,
                    grid.t_start(),
                    grid.end()
                )));
            }
        }
        if impulses.windows(2).any(|w| w[0].time > w[1].time) {
            return Err(Error::Argument(String::from(
                "impulse list must be sorted ascending by time",
            )));
        }
        Ok(Signal { grid, density, impulses })
    }

    /// All-zero signal on `grid`.
    pub fn zero(grid: TimeGrid) -> Self {
        let density = vec![0.0; grid.n_samples()];
        Signal { grid, density, impulses: Vec::new() }
    }

    /// Signal with zero density and a single impulse of `mass` at `t`.
    pub fn impulse(mass: f64, t: f64, grid: TimeGrid) -> Result<Self> {
        if !grid.contains(t) {
            return Err(Error::Argument(format!(
                "impulse time {} outside grid span [{}, {}]",
                t,
                grid.t_start(),
                grid.end()
            )));
        }
        let density = vec![0.0; grid.n_samples()];
        Ok(Signal {
            grid,
            density,
            impulses: vec![Impulse { time: t, mass }],
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn impulses(&self) -> &[Impulse] {
        &self.impulses
    }

    /// Density and impulse masses multiplied by `c`; grid unchanged.
    pub fn scale(&self, c: f64) -> Signal {
        Signal {
            grid: self.grid.clone(),
            density: self.density.iter().map(|d| d * c).collect(),
            impulses: self
                .impulses
                .iter()
                .map(|imp| Impulse { time: imp.time, mass: imp.mass * c })
                .collect(),
        }
    }

    /// Total integral of the signal: `dt * Σ density + Σ impulse masses`.
    pub fn total(&self) -> f64 {
        let mut acc = Kahan::default();
        for &d in &self.density {
            acc.add(d * self.grid.dt());
        }
        for imp in &self.impulses {
            acc.add(imp.mass);
        }
        acc.value()
    }

    /// Integral of the signal over the closed window `[t_a, t_b]`:
    /// density rectangles clipped to the window plus every impulse with
    /// `t_a <= time <= t_b`.
    pub fn integral_between(&self, t_a: f64, t_b: f64) -> Result<f64> {
        if !(t_a <= t_b) {
            return Err(Error::Argument(format!(
                "integration window start {t_a} exceeds end {t_b}"
            )));
        }
        let dt = self.grid.dt();
        let mut acc = Kahan::default();
        for (k, &d) in self.density.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            let lo = self.grid.time(k).max(t_a);
            let hi = (self.grid.time(k) + dt).min(t_b);
            if hi > lo {
                acc.add(d * (hi - lo));
            }
        }
        for imp in &self.impulses {
            if imp.time >= t_a && imp.time <= t_b {
                acc.add(imp.mass);
            }
        }
        Ok(acc.value())
    }

    /// Running integral of the signal.
    ///
    /// The result has one more sample than the input: value `k` is the signed
    /// sum of every density rectangle strictly before `t_k` plus every
    /// impulse at or before `t_k`, so the last value (at the end of the
    /// covered span) carries the full integral. An empty signal integrates to
    /// an empty cumulative signal.
    pub fn integrate_cumulative(&self, sign: Sign) -> CumulativeSignal {
        let n = self.grid.n_samples();
        if n == 0 && self.impulses.is_empty() {
            return CumulativeSignal {
                grid: self.grid.clone(),
                values: Vec::new(),
            };
        }
        let out_grid = self.grid.extended(1);
        let out_len = n + 1;

        // Impulse mass lands at the first sample at or after its time.
        let mut step_mass = vec![0.0; out_len];
        for imp in &self.impulses {
            let k = self.grid.index_at_or_after(imp.time).min(out_len - 1);
            step_mass[k] += imp.mass;
        }

        let factor = sign.factor();
        let dt = self.grid.dt();
        let mut values = Vec::with_capacity(out_len);
        let mut acc = Kahan::default();
        for (k, &mass) in step_mass.iter().enumerate() {
            acc.add(factor * mass);
            values.push(acc.value());
            if k < n {
                acc.add(factor * self.density[k] * dt);
            }
        }
        CumulativeSignal { grid: out_grid, values }
    }

    /// Conservative redistribution of the signal onto `target`.
    ///
    /// Each source rectangle's mass is split across the target rectangles it
    /// overlaps, preserving the total integral; impulses are snapped to the
    /// nearest target sample time. The target grid must span at least the
    /// source span.
    pub fn resample(&self, target: &TimeGrid) -> Result<Signal> {
        let src = &self.grid;
        let slack = INDEX_SNAP * src.dt().max(target.dt());
        if target.t_start() > src.t_start() + slack || target.end() < src.end() - slack {
            return Err(Error::Argument(format!(
                "target grid [{}, {}] does not span source [{}, {}]",
                target.t_start(),
                target.end(),
                src.t_start(),
                src.end()
            )));
        }
        let mut mass = vec![0.0; target.n_samples()];
        let t_dt = target.dt();
        for (k, &d) in self.density.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            let lo = src.time(k);
            let hi = lo + src.dt();
            // Target rectangles overlapping [lo, hi).
            let mut j = {
                let p = num::floor(target.position(lo) + INDEX_SNAP);
                if p <= 0.0 {
                    0
                } else {
                    (p as usize).min(target.n_samples().saturating_sub(1))
                }
            };
            while j < target.n_samples() {
                let cell_lo = target.time(j);
                if cell_lo >= hi {
                    break;
                }
                let overlap = (hi.min(cell_lo + t_dt) - lo.max(cell_lo)).max(0.0);
                mass[j] += d * overlap;
                j += 1;
            }
        }
        let density = mass.iter().map(|m| m / t_dt).collect();

        let mut impulses: Vec<Impulse> = self
            .impulses
            .iter()
            .map(|imp| {
                let k = num::round(target.position(imp.time))
                    .clamp(0.0, target.n_samples() as f64);
                Impulse { time: target.time(k as usize), mass: imp.mass }
            })
            .collect();
        impulses.sort_by(|a, b| a.time.partial_cmp(&b.time).expect("finite impulse times"));

        Ok(Signal { grid: target.clone(), density, impulses })
    }
}

/// Pointwise sum of signals sharing one grid. The impulse lists are
/// concatenated and re-sorted by time.
pub fn sum_signals(signals: &[Signal]) -> Result<Signal> {
    let first = signals
        .first()
        .ok_or_else(|| Error::Argument(String::from("cannot sum an empty list of signals")))?;
    let grid = first.grid().clone();
    for s in &signals[1..] {
        if *s.grid() != grid {
            return Err(Error::GridMismatch(format!(
                "signal on grid (start {}, dt {}, n {}) differs from (start {}, dt {}, n {}); \
                 resample first",
                s.grid().t_start(),
                s.grid().dt(),
                s.grid().n_samples(),
                grid.t_start(),
                grid.dt(),
                grid.n_samples()
            )));
        }
    }
    let mut density = vec![0.0; grid.n_samples()];
    let mut impulses = Vec::new();
    for s in signals {
        for (acc, d) in density.iter_mut().zip(s.density()) {
            *acc += d;
        }
        impulses.extend_from_slice(s.impulses());
    }
    impulses.sort_by(|a, b| a.time.partial_cmp(&b.time).expect("finite impulse times"));
    Ok(Signal { grid, density, impulses })
}

/// A cumulative quantity sampled on a uniform grid.
///
/// Piecewise-constant interpretation: the value at time `t` is `values[k]`
/// for the largest `k` with `t_k <= t`. Outside the grid the boundary value
/// is held, so a settled operation can be integrated past the end of its
/// recorded window.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeSignal {
    grid: TimeGrid,
    values: Vec<f64>,
}

impl CumulativeSignal {
    /// Builds a cumulative signal from explicit values (one per grid sample).
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_samples() {
            return Err(Error::Argument(format!(
                "value count {} does not match grid sample count {}",
                values.len(),
                grid.n_samples()
            )));
        }
        Ok(CumulativeSignal { grid, values })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at time `t` under the piecewise-constant interpretation with
    /// boundary hold. An empty signal evaluates to zero everywhere.
    pub fn value_at(&self, t: f64) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        let k = self.grid.index_at_or_before(t).min(self.values.len() - 1);
        self.values[k]
    }

    /// Last sampled value; zero for an empty signal.
    pub fn final_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// Integral of the piecewise-constant function over `[t_a, t_b]`, with
    /// the first/last value extended outside the grid.
    pub fn integrate_interval(&self, t_a: f64, t_b: f64) -> Result<f64> {
        if !(t_a <= t_b) {
            return Err(Error::Argument(format!(
                "integration window start {t_a} exceeds end {t_b}"
            )));
        }
        if self.values.is_empty() || t_a == t_b {
            return Ok(0.0);
        }
        let n = self.values.len();
        let first_t = self.grid.time(0);
        let last_t = self.grid.time(n - 1);
        let mut acc = Kahan::default();

        // Left extension: value before the first sample.
        if t_a < first_t {
            acc.add(self.values[0] * (t_b.min(first_t) - t_a));
        }
        // Interior rectangles [t_k, t_{k+1}).
        for k in 0..n - 1 {
            let lo = self.grid.time(k).max(t_a);
            let hi = self.grid.time(k + 1).min(t_b);
            if hi > lo {
                acc.add(self.values[k] * (hi - lo));
            }
        }
        // Right extension: last value holds from its sample onward.
        if t_b > last_t {
            acc.add(self.values[n - 1] * (t_b - last_t.max(t_a)));
        }
        Ok(acc.value())
    }

    /// Pointwise sum with another cumulative signal on the same grid.
    pub fn add(&self, other: &CumulativeSignal) -> Result<CumulativeSignal> {
        self.zip_with(other, |a, b| a + b)
    }

    /// Pointwise difference with another cumulative signal on the same grid.
    pub fn sub(&self, other: &CumulativeSignal) -> Result<CumulativeSignal> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(
        &self,
        other: &CumulativeSignal,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<CumulativeSignal> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(String::from(
                "cumulative signals must share a grid for pointwise arithmetic",
            )));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(CumulativeSignal { grid: self.grid.clone(), values })
    }
}
