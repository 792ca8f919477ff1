use crate::error::{ModelError, Result};
use crate::scalar::Scalar;

/// Scenario constants as they are usually quoted: cost rates in $/h,
/// capacity in veh/min, charging duration in min and base price in $/min.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawParams<T> {
    pub alpha_per_hour: T,
    pub beta_per_hour: T,
    pub gamma_per_hour: T,
    pub n_commuters: T,
    pub capacity: T,
    pub delta_bar: T,
    pub p_bar: T,
}

/// How the money paid out is tied to the perceived budget.
///
/// Paying `p` per minute for a `delta*` minute stop costs `delta* p`, of which
/// commuters perceive `delta_bar (p - alpha)^2 / (2p)`; the difference is
/// `delta_bar (p^2 - alpha^2) / (2p)`. The default convention drops the
/// `delta_bar` factor from that difference; the $37,400 full-removal budget of
/// the reference commute and the windows derived from it are computed so.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BudgetConvention {
    /// Gap density `(p^2 - alpha^2) / (2p)`; money spent is defined as the
    /// perceived budget plus this gap.
    #[default]
    Unscaled,
    /// Money spent is `integral of r delta* p`; the gap carries `delta_bar`.
    Physical,
}

/// Model constants in canonical units (minutes, vehicles, $/min).
///
/// Construction goes through [`ScenarioParams::new`] or [`canonical_params`],
/// both of which enforce `0 < beta < alpha < gamma` and positivity of the
/// population, capacity and charging duration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioParams<T> {
    alpha: T,
    beta: T,
    gamma: T,
    n_commuters: T,
    capacity: T,
    delta_bar: T,
    p_bar: T,
    convention: BudgetConvention,
}

impl<T: Scalar> ScenarioParams<T> {
    /// Builds a parameter set from per-minute rates.
    pub fn new(
        alpha: T,
        beta: T,
        gamma: T,
        n_commuters: T,
        capacity: T,
        delta_bar: T,
        p_bar: T,
    ) -> Result<Self> {
        let all = [alpha, beta, gamma, n_commuters, capacity, delta_bar, p_bar];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::InvalidParams("non-finite parameter".into()));
        }
        if !(T::zero() < beta && beta < alpha && alpha < gamma) {
            return Err(ModelError::InvalidParams(format!(
                "cost rates must satisfy 0 < beta < alpha < gamma (got alpha={alpha}, beta={beta}, gamma={gamma})"
            )));
        }
        if n_commuters < T::zero() {
            return Err(ModelError::InvalidParams(format!(
                "commuter count must be non-negative (got {n_commuters})"
            )));
        }
        if capacity <= T::zero() {
            return Err(ModelError::InvalidParams(format!(
                "capacity must be positive (got {capacity})"
            )));
        }
        if delta_bar <= T::zero() {
            return Err(ModelError::InvalidParams(format!(
                "charging duration must be positive (got {delta_bar})"
            )));
        }
        if p_bar < T::zero() {
            return Err(ModelError::InvalidParams(format!(
                "base electricity price must be non-negative (got {p_bar})"
            )));
        }
        Ok(Self {
            alpha,
            beta,
            gamma,
            n_commuters,
            capacity,
            delta_bar,
            p_bar,
            convention: BudgetConvention::Unscaled,
        })
    }

    /// Value of time, $/min.
    pub fn alpha(&self) -> T {
        self.alpha
    }

    /// Earliness penalty, $/min.
    pub fn beta(&self) -> T {
        self.beta
    }

    /// Lateness penalty, $/min.
    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn n_commuters(&self) -> T {
        self.n_commuters
    }

    /// Bottleneck capacity, veh/min.
    pub fn capacity(&self) -> T {
        self.capacity
    }

    /// Required charging duration, min.
    pub fn delta_bar(&self) -> T {
        self.delta_bar
    }

    /// Base electricity price, $/min of charging.
    pub fn p_bar(&self) -> T {
        self.p_bar
    }

    pub fn convention(&self) -> BudgetConvention {
        self.convention
    }

    pub fn with_convention(self, convention: BudgetConvention) -> Self {
        Self { convention, ..self }
    }

    /// Factor multiplying `(p^2 - alpha^2) / (2p)` in the inefficiency gap.
    pub fn gap_scale(&self) -> T {
        match self.convention {
            BudgetConvention::Unscaled => T::one(),
            BudgetConvention::Physical => self.delta_bar,
        }
    }

    pub fn with_delta_bar(self, delta_bar: T) -> Result<Self> {
        Self::new(
            self.alpha,
            self.beta,
            self.gamma,
            self.n_commuters,
            self.capacity,
            delta_bar,
            self.p_bar,
        )
        .map(|p| p.with_convention(self.convention))
    }

    pub fn with_p_bar(self, p_bar: T) -> Result<Self> {
        Self::new(
            self.alpha,
            self.beta,
            self.gamma,
            self.n_commuters,
            self.capacity,
            self.delta_bar,
            p_bar,
        )
        .map(|p| p.with_convention(self.convention))
    }

    pub fn with_n_commuters(self, n_commuters: T) -> Result<Self> {
        Self::new(
            self.alpha,
            self.beta,
            self.gamma,
            n_commuters,
            self.capacity,
            self.delta_bar,
            self.p_bar,
        )
        .map(|p| p.with_convention(self.convention))
    }

    /// Length of the rush hour, `N / s`.
    pub fn horizon(&self) -> T {
        self.n_commuters / self.capacity
    }

    /// Common desired arrival time `t* = gamma N / (s (beta + gamma))`.
    pub fn desired_arrival(&self) -> T {
        self.gamma * self.n_commuters / (self.capacity * (self.beta + self.gamma))
    }

    /// Departure time that arrives exactly at `t*` in the equilibrium without
    /// incentives: `t' = t* (alpha - beta) / alpha`.
    pub fn on_time_departure(&self) -> T {
        self.desired_arrival() * (self.alpha - self.beta) / self.alpha
    }

    /// Departure rate while the queue grows, `alpha s / (alpha - beta)`.
    pub fn early_rate(&self) -> T {
        self.alpha * self.capacity / (self.alpha - self.beta)
    }

    /// Departure rate while the queue drains, `alpha s / (alpha + gamma)`.
    pub fn late_rate(&self) -> T {
        self.alpha * self.capacity / (self.alpha + self.gamma)
    }

    /// Perceived budget that removes congestion entirely,
    /// `beta gamma N^2 / (2 s (beta + gamma))`.
    pub fn perceived_budget_star(&self) -> T {
        let two = T::lit(2.0);
        self.beta * self.gamma * self.n_commuters * self.n_commuters
            / (two * self.capacity * (self.beta + self.gamma))
    }

    /// Total system travel time without incentives,
    /// `nu = beta gamma N^2 / (2 s alpha (beta + gamma))`.
    pub fn nu(&self) -> T {
        self.perceived_budget_star() / self.alpha
    }

    /// Coefficient of the square-root term in the limited-budget travel time,
    /// `theta = (N / alpha) sqrt(2 beta gamma / (s (beta + gamma)))`.
    pub fn theta(&self) -> T {
        let two = T::lit(2.0);
        (self.n_commuters / self.alpha)
            * (two * self.beta * self.gamma / (self.capacity * (self.beta + self.gamma))).sqrt()
    }
}

/// Converts $/h cost rates to $/min and validates the result.
pub fn canonical_params<T: Scalar>(raw: &RawParams<T>) -> Result<ScenarioParams<T>> {
    let per_minute = T::lit(60.0);
    ScenarioParams::new(
        raw.alpha_per_hour / per_minute,
        raw.beta_per_hour / per_minute,
        raw.gamma_per_hour / per_minute,
        raw.n_commuters,
        raw.capacity,
        raw.delta_bar,
        raw.p_bar,
    )
}

/// Uniform grid `t0, t0 + dt, ..., t1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid<T> {
    t0: T,
    t1: T,
    dt: T,
    steps: usize,
}

impl<T: Scalar> TimeGrid<T> {
    pub fn new(t0: T, t1: T, dt: T) -> Result<Self> {
        if !(t0.is_finite() && t1.is_finite() && dt.is_finite()) {
            return Err(ModelError::InvalidGrid("non-finite bound or step".into()));
        }
        if t0 >= t1 {
            return Err(ModelError::InvalidGrid(format!(
                "need t0 < t1 (got {t0}, {t1})"
            )));
        }
        if dt <= T::zero() {
            return Err(ModelError::InvalidGrid(format!(
                "step must be positive (got {dt})"
            )));
        }
        let ratio = (t1 - t0) / dt;
        let steps = ratio.round();
        let slack = T::lit(1e-6).max(T::epsilon() * T::lit(16.0) * ratio);
        if (ratio - steps).abs() > slack {
            return Err(ModelError::InvalidGrid(format!(
                "span {} is not an integer multiple of the step {dt}",
                t1 - t0
            )));
        }
        let steps = steps
            .to_usize()
            .ok_or_else(|| ModelError::InvalidGrid("step count overflow".into()))?;
        Ok(Self { t0, t1, dt, steps })
    }

    /// Grid over the rush hour `[0, N/s]`.
    pub fn over_horizon(params: &ScenarioParams<T>, dt: T) -> Result<Self> {
        Self::new(T::zero(), params.horizon(), dt)
    }

    pub fn start(&self) -> T {
        self.t0
    }

    pub fn end(&self) -> T {
        self.t1
    }

    pub fn step(&self) -> T {
        self.dt
    }

    /// Number of intervals.
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Number of grid points (`steps + 1`).
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The `i`-th grid point; the last point is exactly `t1`.
    pub fn point(&self, i: usize) -> T {
        if i >= self.steps {
            self.t1
        } else {
            self.t0 + self.dt * T::from_count(i)
        }
    }

    pub fn points(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }

    pub fn contains(&self, t: T) -> bool {
        t >= self.t0 && t <= self.t1
    }
}
