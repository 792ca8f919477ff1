//! Per-commuter cost structure: schedule delay, charging with a linearly
//! decaying perceived discount, and their sum.

use crate::error::{ModelError, Result};
use crate::model::ScenarioParams;
use crate::scalar::Scalar;

/// Queueing plus early/late arrival penalty for a commuter entering the
/// bottleneck at `t` and waiting `waiting` minutes there.
pub fn schedule_delay_cost<T: Scalar>(
    t: T,
    t_star: T,
    waiting: T,
    params: &ScenarioParams<T>,
) -> T {
    debug_assert!(waiting >= T::zero(), "negative waiting time {waiting}");
    let d = t_star - t - waiting;
    params.alpha() * waiting + (params.beta() * d).max(-params.gamma() * d)
}

/// Discount rate perceived at instant `tau` by a commuter who charges on
/// `[t - delta, t]` under the discount `p_at_t`. Decays linearly with slope
/// `-p(t) / delta_bar` from the full discount at the start of charging.
pub fn perceived_incentive<T: Scalar>(
    tau: T,
    t: T,
    delta: T,
    p_at_t: T,
    params: &ScenarioParams<T>,
) -> Result<T> {
    let lo = t - delta;
    let slack = T::epsilon() * T::lit(64.0) * (T::one() + t.abs());
    if tau < lo - slack || tau > t + slack {
        return Err(ModelError::OutOfRange {
            value: tau.as_f64(),
            lo: lo.as_f64(),
            hi: t.as_f64(),
        });
    }
    let slope = p_at_t / params.delta_bar();
    Ok(-slope * tau + slope * (t - delta + params.delta_bar()))
}

/// Charging cost for a stop of `delta` minutes ending at `t`.
///
/// The integral of the affine perceived discount over the charging window is
/// evaluated analytically: `C = delta_bar p_bar + (alpha - p) delta + p delta^2 / (2 delta_bar)`.
pub fn charging_cost<T: Scalar>(_t: T, delta: T, p_at_t: T, params: &ScenarioParams<T>) -> T {
    debug_assert!(delta >= T::zero() && delta <= params.delta_bar());
    let two = T::lit(2.0);
    let perceived = p_at_t * delta - p_at_t * delta * delta / (two * params.delta_bar());
    params.alpha() * delta
        + (params.delta_bar() - delta) * params.p_bar()
        + (delta * params.p_bar() - perceived)
}

/// Optimal stop at the charging station, `max{(1 - alpha / p) delta_bar, 0}`.
///
/// Returns 0 whenever `p <= alpha`, including `p = 0`.
pub fn optimal_charging_time<T: Scalar>(p_at_t: T, params: &ScenarioParams<T>) -> T {
    if p_at_t <= params.alpha() {
        T::zero()
    } else {
        (T::one() - params.alpha() / p_at_t) * params.delta_bar()
    }
}

/// Charging cost at the optimal stop length.
pub fn optimal_charging_cost<T: Scalar>(_t: T, p_at_t: T, params: &ScenarioParams<T>) -> T {
    let base = params.delta_bar() * params.p_bar();
    if p_at_t <= params.alpha() {
        return base;
    }
    let excess = p_at_t - params.alpha();
    base - params.delta_bar() / (T::lit(2.0) * p_at_t) * excess * excess
}

/// Charging cost when the discount is perceived in full for the whole stop.
pub fn constant_incentive_charging_cost<T: Scalar>(
    _t: T,
    delta: T,
    p_at_t: T,
    params: &ScenarioParams<T>,
) -> T {
    (params.alpha() - p_at_t) * delta + params.delta_bar() * params.p_bar()
}

/// Minimiser of [`constant_incentive_charging_cost`]: all or nothing, with
/// the tie at `p = alpha` resolved to no stop.
pub fn constant_incentive_charging_time<T: Scalar>(p_at_t: T, params: &ScenarioParams<T>) -> T {
    if p_at_t > params.alpha() {
        params.delta_bar()
    } else {
        T::zero()
    }
}

/// Total cost of entering at `t` with the optimal charging stop.
pub fn total_cost<T: Scalar>(
    t: T,
    waiting: T,
    p_at_t: T,
    params: &ScenarioParams<T>,
    t_star: T,
) -> T {
    schedule_delay_cost(t, t_star, waiting, params) + optimal_charging_cost(t, p_at_t, params)
}
