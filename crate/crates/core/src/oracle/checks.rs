use crate::dynamics::{evolve_queue, DepartureProfile};
use crate::error::Result;
use crate::incentive::IncentiveSchedule;
use crate::model::{charging_cost, total_cost, ScenarioParams, TimeGrid};
use crate::scalar::Scalar;

/// Spread of total cost over the commuters of a profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EqualCostCheck<T> {
    pub min_cost: T,
    pub max_cost: T,
    /// `max_cost - min_cost`, $.
    pub deviation: T,
    pub passed: bool,
}

/// Simulates the queue induced by `profile` and measures the spread of
/// [`total_cost`] over the grid points where commuters depart.
pub fn equal_cost_check<T: Scalar>(
    schedule: &IncentiveSchedule<T>,
    profile: &DepartureProfile<T>,
    params: &ScenarioParams<T>,
    grid: &TimeGrid<T>,
    tol: T,
) -> Result<EqualCostCheck<T>> {
    equal_cost_check_where(schedule, profile, params, grid, tol, |_| true)
}

/// [`equal_cost_check`] restricted to departure times accepted by `keep`.
pub fn equal_cost_check_where<T, F>(
    schedule: &IncentiveSchedule<T>,
    profile: &DepartureProfile<T>,
    params: &ScenarioParams<T>,
    grid: &TimeGrid<T>,
    tol: T,
    keep: F,
) -> Result<EqualCostCheck<T>>
where
    T: Scalar,
    F: Fn(T) -> bool,
{
    let traj = evolve_queue(profile, params, grid)?;
    let t_star = params.desired_arrival();
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for (i, t) in grid.points().enumerate() {
        if !keep(t) || profile.rate(t) <= T::zero() {
            continue;
        }
        let c = total_cost(t, traj.waiting()[i], schedule.discount(t), params, t_star);
        lo = lo.min(c);
        hi = hi.max(c);
    }
    if lo > hi {
        return Ok(EqualCostCheck {
            min_cost: T::zero(),
            max_cost: T::zero(),
            deviation: T::zero(),
            passed: true,
        });
    }
    let deviation = hi - lo;
    Ok(EqualCostCheck {
        min_cost: lo,
        max_cost: hi,
        deviation,
        passed: deviation < tol,
    })
}

/// Charging stop minimising [`charging_cost`] over the grid
/// `0, step, 2 step, ..., delta_bar`; the first minimiser wins ties.
pub fn brute_force_delta<T: Scalar>(t: T, p_at_t: T, params: &ScenarioParams<T>, step: T) -> T {
    assert!(step > T::zero(), "grid step must be positive");
    let delta_bar = params.delta_bar();
    let n = (delta_bar / step).floor().to_usize().unwrap_or(0);
    let mut best = (T::zero(), charging_cost(t, T::zero(), p_at_t, params));
    let mut consider = |d: T| {
        let c = charging_cost(t, d, p_at_t, params);
        if c < best.1 {
            best = (d, c);
        }
    };
    for i in 1..=n {
        consider((step * T::from_count(i)).min(delta_bar));
    }
    consider(delta_bar);
    best.0
}
