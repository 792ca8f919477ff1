//! Queue evolution at the bottleneck for piecewise-constant departure rates.

use crate::error::{ModelError, Result};
use crate::model::{ScenarioParams, TimeGrid};
use crate::scalar::Scalar;

/// One constant-rate piece `[start, end)` of a departure profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePiece<T> {
    pub start: T,
    pub end: T,
    /// Departure rate, veh/min.
    pub rate: T,
}

/// Piecewise-constant departure rate `r(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DepartureProfile<T> {
    pieces: Vec<RatePiece<T>>,
}

impl<T: Scalar> DepartureProfile<T> {
    /// Validates that pieces are non-empty, ordered, contiguous and have
    /// non-negative rates. Zero-length pieces are dropped.
    pub fn new(pieces: Vec<RatePiece<T>>) -> Result<Self> {
        let pieces: Vec<_> = pieces.into_iter().filter(|p| p.end > p.start).collect();
        if pieces.is_empty() {
            return Err(ModelError::MalformedProfile(
                "no pieces of positive length".into(),
            ));
        }
        for p in &pieces {
            if !p.rate.is_finite() || p.rate < T::zero() {
                return Err(ModelError::MalformedProfile(format!(
                    "rate {} on [{}, {}) is not a non-negative number",
                    p.rate, p.start, p.end
                )));
            }
        }
        for w in pieces.windows(2) {
            let tol = T::epsilon() * T::lit(64.0) * (T::one() + w[0].end.abs());
            if (w[1].start - w[0].end).abs() > tol {
                return Err(ModelError::MalformedProfile(format!(
                    "gap or overlap between {} and {}",
                    w[0].end, w[1].start
                )));
            }
        }
        Ok(Self { pieces })
    }

    /// Constant rate over `[start, end)`.
    pub fn constant(start: T, end: T, rate: T) -> Result<Self> {
        Self::new(vec![RatePiece { start, end, rate }])
    }

    pub fn pieces(&self) -> &[RatePiece<T>] {
        &self.pieces
    }

    pub fn start(&self) -> T {
        self.pieces[0].start
    }

    pub fn end(&self) -> T {
        self.pieces[self.pieces.len() - 1].end
    }

    /// Piece index containing `t`; the right end of the profile maps to the
    /// last piece.
    pub fn piece_index(&self, t: T) -> Option<usize> {
        if t < self.start() || t > self.end() {
            return None;
        }
        let idx = self.pieces.partition_point(|p| p.end <= t);
        Some(idx.min(self.pieces.len() - 1))
    }

    /// Rate at `t`, zero outside the profile.
    pub fn rate(&self, t: T) -> T {
        self.piece_index(t)
            .map(|i| self.pieces[i].rate)
            .unwrap_or_else(T::zero)
    }

    /// Interior piece boundaries.
    pub fn breakpoints(&self) -> Vec<T> {
        self.pieces.iter().skip(1).map(|p| p.start).collect()
    }

    /// Total number of departures, `integral of r`.
    pub fn total_departures(&self) -> T {
        self.pieces.iter().map(|p| p.rate * (p.end - p.start)).sum()
    }

    /// Cumulative departures on `[start, t]`.
    pub fn cumulative(&self, t: T) -> T {
        self.pieces
            .iter()
            .map(|p| {
                let hi = p.end.min(t);
                if hi > p.start {
                    p.rate * (hi - p.start)
                } else {
                    T::zero()
                }
            })
            .sum()
    }
}

/// Queue length and waiting time sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct QueueTrajectory<T> {
    grid: TimeGrid<T>,
    capacity: T,
    queue: Vec<T>,
    waiting: Vec<T>,
}

impl<T: Scalar> QueueTrajectory<T> {
    pub fn grid(&self) -> &TimeGrid<T> {
        &self.grid
    }

    pub fn capacity(&self) -> T {
        self.capacity
    }

    /// Queue length at each grid point, vehicles.
    pub fn queue(&self) -> &[T] {
        &self.queue
    }

    /// Waiting time at each grid point, min.
    pub fn waiting(&self) -> &[T] {
        &self.waiting
    }

    /// Largest sampled queue and the grid time where it occurs.
    pub fn peak(&self) -> (T, T) {
        let mut best = (self.grid.point(0), self.queue[0]);
        for (i, &q) in self.queue.iter().enumerate() {
            if q > best.1 {
                best = (self.grid.point(i), q);
            }
        }
        best
    }

    /// Waiting time at `t`, linearly interpolated between grid points.
    pub fn waiting_time(&self, t: T) -> Result<T> {
        if !self.grid.contains(t) {
            return Err(ModelError::OutOfRange {
                value: t.as_f64(),
                lo: self.grid.start().as_f64(),
                hi: self.grid.end().as_f64(),
            });
        }
        let x = (t - self.grid.start()) / self.grid.step();
        let i = x.floor().to_usize().unwrap_or(0).min(self.grid.steps());
        if i >= self.grid.steps() {
            return Ok(self.waiting[self.grid.steps()]);
        }
        let frac = (t - self.grid.point(i)) / self.grid.step();
        let frac = frac.max(T::zero()).min(T::one());
        Ok(self.waiting[i] + (self.waiting[i + 1] - self.waiting[i]) * frac)
    }

    /// Time the commuter entering at `t` leaves the bottleneck.
    pub fn arrival_time(&self, t: T) -> Result<T> {
        Ok(t + self.waiting_time(t)?)
    }

    /// Trapezoid quadrature of the waiting time, `integral of Q / s`, min^2.
    pub fn integrated_waiting_time(&self) -> T {
        trapezoid(&self.waiting, self.grid.step())
    }

    /// Total system travel time: vehicle-minutes spent queueing,
    /// `integral of Q`, equal to `s` times [`Self::integrated_waiting_time`].
    /// This is the quantity the closed-form limited-budget travel time
    /// evaluates.
    pub fn total_system_travel_time(&self) -> T {
        trapezoid(&self.queue, self.grid.step())
    }
}

fn trapezoid<T: Scalar>(values: &[T], h: T) -> T {
    if values.len() < 2 {
        return T::zero();
    }
    let half = T::lit(0.5);
    let inner: T = values[1..values.len() - 1].iter().copied().sum();
    h * (inner + half * (values[0] + values[values.len() - 1]))
}

/// Integrates the queue analytically piece by piece and samples it on `grid`.
///
/// Within a constant-rate stretch the queue moves linearly at `r - s` and is
/// clamped at zero, so the samples are exact up to round-off.
pub fn evolve_queue<T: Scalar>(
    profile: &DepartureProfile<T>,
    params: &ScenarioParams<T>,
    grid: &TimeGrid<T>,
) -> Result<QueueTrajectory<T>> {
    let tol = T::epsilon() * T::lit(64.0) * (T::one() + grid.end().abs());
    if profile.start() > grid.start() + tol || profile.end() < grid.end() - tol {
        return Err(ModelError::MalformedProfile(format!(
            "profile [{}, {}] does not cover grid [{}, {}]",
            profile.start(),
            profile.end(),
            grid.start(),
            grid.end()
        )));
    }
    let s = params.capacity();
    let pieces = profile.pieces();
    let mut queue = Vec::with_capacity(grid.len());
    let mut q = T::zero();
    let mut now = grid.start();
    let mut k = profile.piece_index(now).unwrap_or(0);
    queue.push(q);
    for i in 1..grid.len() {
        let target = grid.point(i);
        while now < target {
            while k + 1 < pieces.len() && pieces[k].end <= now {
                k += 1;
            }
            let stop = if k + 1 < pieces.len() {
                pieces[k].end.min(target)
            } else {
                target
            };
            let stop = if stop <= now { target } else { stop };
            q = (q + (pieces[k].rate - s) * (stop - now)).max(T::zero());
            now = stop;
        }
        queue.push(q);
    }
    let waiting = queue.iter().map(|&q| q / s).collect();
    Ok(QueueTrajectory {
        grid: *grid,
        capacity: s,
        queue,
        waiting,
    })
}

/// Equilibrium without incentives.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalEquilibrium<T> {
    pub profile: DepartureProfile<T>,
    /// Departure time that arrives exactly at `t_star`; the queue peaks here.
    pub t_prime: T,
    pub t_star: T,
}

/// Departure rates `alpha s / (alpha - beta)` until `t'` and
/// `alpha s / (alpha + gamma)` afterwards over the whole rush hour.
pub fn classical_equilibrium<T: Scalar>(params: &ScenarioParams<T>) -> ClassicalEquilibrium<T> {
    let t_prime = params.on_time_departure();
    let horizon = params.horizon();
    let profile = DepartureProfile::new(vec![
        RatePiece {
            start: T::zero(),
            end: t_prime,
            rate: params.early_rate(),
        },
        RatePiece {
            start: t_prime,
            end: horizon,
            rate: params.late_rate(),
        },
    ])
    .expect("classical profile is contiguous");
    ClassicalEquilibrium {
        profile,
        t_prime,
        t_star: params.desired_arrival(),
    }
}
