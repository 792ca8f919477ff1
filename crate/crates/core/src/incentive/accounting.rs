//! Budget accounting for an arbitrary discount schedule and departure
//! profile: money spent, money perceived, and the gap between them.

use crate::dynamics::{evolve_queue, DepartureProfile};
use crate::error::Result;
use crate::incentive::schedule::{optimal_discount_unlimited, IncentiveSchedule};
use crate::model::{
    optimal_charging_cost, optimal_charging_time, total_cost, BudgetConvention, ScenarioParams,
    TimeGrid,
};
use crate::oracle::{piecewise_quadrature, quadrature, uniform_nodes};
use crate::scalar::Scalar;

/// Default quadrature step, min.
pub const DEFAULT_STEP: f64 = 0.01;

fn integrate_rate_weighted<T, F>(
    schedule: &IncentiveSchedule<T>,
    profile: &DepartureProfile<T>,
    params: &ScenarioParams<T>,
    grid: &TimeGrid<T>,
    integrand: F,
) -> T
where
    T: Scalar,
    F: Fn(T) -> T,
{
    let mut breaks = schedule.breakpoints();
    breaks.extend(profile.breakpoints());
    let (alpha, delta_bar) = (params.alpha(), params.delta_bar());
    piecewise_quadrature(
        |t, mid| {
            let seg = schedule.segment_at(mid);
            let p = seg
                .map(|s| s.discount(t, alpha, delta_bar))
                .unwrap_or_else(T::zero);
            let r = profile
                .piece_index(mid)
                .map(|i| profile.pieces()[i].rate)
                .unwrap_or_else(T::zero);
            r * integrand(p)
        },
        grid.start(),
        grid.end(),
        &breaks,
        grid.step(),
    )
}

/// Money paid out. Under [`BudgetConvention::Physical`] this is
/// `integral of r delta* p`; under [`BudgetConvention::Unscaled`] it is the
/// perceived incentive plus the unscaled gap density, integrated together.
pub fn budget_spent<T: Scalar>(
    schedule: &IncentiveSchedule<T>,
    profile: &DepartureProfile<T>,
    params: &ScenarioParams<T>,
    grid: &TimeGrid<T>,
) -> T {
    match params.convention() {
        BudgetConvention::Physical => {
            integrate_rate_weighted(schedule, profile, params, grid, |p| {
                optimal_charging_time(p, params) * p
            })
        }
        BudgetConvention::Unscaled => {
            let base = params.delta_bar() * params.p_bar();
            integrate_rate_weighted(schedule, profile, params, grid, |p| {
                base - optimal_charging_cost(T::zero(), p, params) + gap_density(p, params.alpha())
            })
        }
    }
}

/// Money as perceived by commuters, `-integral of r (C_ch - delta_bar p_bar)`.
pub fn budget_perceived<T: Scalar>(
    schedule: &IncentiveSchedule<T>,
    profile: &DepartureProfile<T>,
    params: &ScenarioParams<T>,
    grid: &TimeGrid<T>,
) -> T {
    let base = params.delta_bar() * params.p_bar();
    integrate_rate_weighted(schedule, profile, params, grid, |p| {
        base - optimal_charging_cost(T::zero(), p, params)
    })
}

/// Pointwise inefficiency `max{(p^2 - alpha^2) / (2p), 0}`, before the
/// convention's scale factor; zero for `p <= alpha` without dividing.
pub fn gap_density<T: Scalar>(p: T, alpha: T) -> T {
    if p <= alpha {
        T::zero()
    } else {
        (p * p - alpha * alpha) / (T::lit(2.0) * p)
    }
}

/// Inefficiency gap, `integral of r gap_scale gap_density(p)`.
pub fn inefficiency_gap<T: Scalar>(
    schedule: &IncentiveSchedule<T>,
    profile: &DepartureProfile<T>,
    params: &ScenarioParams<T>,
    grid: &TimeGrid<T>,
) -> T {
    let scale = params.gap_scale();
    integrate_rate_weighted(schedule, profile, params, grid, |p| {
        scale * gap_density(p, params.alpha())
    })
}

/// Antiderivative `y sqrt(y^2 - alpha^2) - alpha^2 ln(sqrt(y^2 - alpha^2) + y)`
/// used to integrate the inefficiency of an equalizing segment in closed
/// form (twice the antiderivative of `sqrt(y^2 - alpha^2)`).
pub fn gap_antiderivative<T: Scalar>(y: T, alpha: T) -> T {
    let root = (y * y - alpha * alpha).max(T::zero()).sqrt();
    y * root - alpha * alpha * (root + y).ln()
}

/// Closed-form inefficiency of an equalizing segment of length `span` whose
/// penalty grows at `rate`, under departures at capacity.
pub fn equalizing_gap_closed_form<T: Scalar>(span: T, rate: T, params: &ScenarioParams<T>) -> T {
    if span <= T::zero() {
        return T::zero();
    }
    let (alpha, delta_bar) = (params.alpha(), params.delta_bar());
    let upper = alpha + rate * span / delta_bar;
    params.capacity() * delta_bar * params.gap_scale() / (T::lit(2.0) * rate)
        * (gap_antiderivative(upper, alpha) - gap_antiderivative(alpha, alpha))
}

/// Inefficiency gap of the unlimited-budget policy by quadrature,
/// `s gap_scale integral of gap_density(p*)`.
pub fn unlimited_gap<T: Scalar>(params: &ScenarioParams<T>, step: T) -> T {
    if params.n_commuters() <= T::zero() {
        return T::zero();
    }
    let schedule = optimal_discount_unlimited(params);
    let t_star = params.desired_arrival();
    let horizon = params.horizon();
    let nodes = uniform_nodes(T::zero(), horizon, step, &[t_star]);
    params.capacity()
        * params.gap_scale()
        * quadrature(
            |t| gap_density(schedule.discount(t), params.alpha()),
            T::zero(),
            horizon,
            &nodes,
        )
}

/// Same quantity through the closed-form antiderivative.
pub fn unlimited_gap_closed_form<T: Scalar>(params: &ScenarioParams<T>) -> T {
    let t_star = params.desired_arrival();
    equalizing_gap_closed_form(t_star, params.beta(), params)
        + equalizing_gap_closed_form(params.horizon() - t_star, params.gamma(), params)
}

/// Budget required to remove congestion entirely: the perceived budget
/// `beta gamma N^2 / (2 s (beta + gamma))` plus the inefficiency of the
/// unlimited policy, integrated on a `DEFAULT_STEP` grid.
pub fn required_budget_star<T: Scalar>(params: &ScenarioParams<T>) -> T {
    required_budget_star_with_step(params, T::lit(DEFAULT_STEP))
}

pub fn required_budget_star_with_step<T: Scalar>(params: &ScenarioParams<T>, step: T) -> T {
    params.perceived_budget_star() + unlimited_gap(params, step)
}

/// Start, peak and end of the congested period, min.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CongestionWindow<T> {
    pub t_ell: T,
    pub t_dblprime: T,
    pub t_r: T,
}

impl<T: Scalar> CongestionWindow<T> {
    pub fn length(&self) -> T {
        self.t_r - self.t_ell
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ReportFlags {
    /// Some discount exceeds the base electricity price.
    pub discount_exceeds_base_price: bool,
    /// The requested budget exceeded what removing congestion needs; the
    /// unlimited-budget policy was used instead.
    pub over_budget: bool,
}

/// Budget and travel-time figures for one schedule/profile pair.
#[derive(Debug, Clone, PartialEq)]
pub struct BudgetReport<T> {
    /// Money spent, $.
    pub m_dollars: T,
    /// Money perceived by commuters, $.
    pub m_perceived: T,
    /// `m_dollars - m_perceived`, $.
    pub inefficiency_gap: T,
    /// Vehicle-minutes spent queueing, from the simulated queue.
    pub tstt: T,
    /// Departure-weighted mean total cost; the common cost at equilibrium, $.
    pub c_e: T,
    /// Largest simulated queue, vehicles.
    pub peak_queue: T,
    pub window: CongestionWindow<T>,
    /// `integral of r - N`, vehicles.
    pub mass_residual: T,
    pub flags: ReportFlags,
}

impl<T: Scalar> BudgetReport<T> {
    /// Integrates budgets by quadrature and simulates the queue induced by
    /// `profile` on `grid`.
    pub fn evaluate(
        schedule: &IncentiveSchedule<T>,
        profile: &DepartureProfile<T>,
        params: &ScenarioParams<T>,
        grid: &TimeGrid<T>,
        window: CongestionWindow<T>,
    ) -> Result<Self> {
        let m_dollars = budget_spent(schedule, profile, params, grid);
        let m_perceived = budget_perceived(schedule, profile, params, grid);
        let gap = inefficiency_gap(schedule, profile, params, grid);
        let traj = evolve_queue(profile, params, grid)?;
        let t_star = params.desired_arrival();

        let mut breaks = schedule.breakpoints();
        breaks.extend(profile.breakpoints());
        let weighted_cost = piecewise_quadrature(
            |t, mid| {
                let r = profile.rate(mid);
                let p = schedule
                    .segment_at(mid)
                    .map(|s| s.discount(t, params.alpha(), params.delta_bar()))
                    .unwrap_or_else(T::zero);
                let w = traj.waiting_time(t).unwrap_or_else(|_| T::zero());
                r * total_cost(t, w, p, params, t_star)
            },
            grid.start(),
            grid.end(),
            &breaks,
            grid.step(),
        );
        let departures = profile.total_departures();
        let c_e = if departures > T::zero() {
            weighted_cost / departures
        } else {
            T::zero()
        };

        Ok(Self {
            m_dollars,
            m_perceived,
            inefficiency_gap: gap,
            tstt: traj.total_system_travel_time(),
            c_e,
            peak_queue: traj.peak().1,
            window,
            mass_residual: departures - params.n_commuters(),
            flags: ReportFlags {
                discount_exceeds_base_price: schedule.exceeds_base_price(params.p_bar()),
                over_budget: false,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ScenarioParams<f64> {
        ScenarioParams::new(6.4 / 60.0, 0.065, 0.2535, 9000.0, 60.0, 20.0, 0.0).unwrap()
    }

    fn at_capacity(p: &ScenarioParams<f64>) -> DepartureProfile<f64> {
        DepartureProfile::constant(0.0, p.horizon(), p.capacity()).unwrap()
    }

    fn grid(p: &ScenarioParams<f64>) -> TimeGrid<f64> {
        TimeGrid::over_horizon(p, 0.01).unwrap()
    }

    #[test]
    fn no_discount_costs_nothing() {
        let p = params();
        let (prof, g) = (at_capacity(&p), grid(&p));
        for s in [
            IncentiveSchedule::zero(&p),
            IncentiveSchedule::constant(&p, p.alpha()),
        ] {
            assert_eq!(budget_spent(&s, &prof, &p, &g), 0.0);
            assert_eq!(budget_perceived(&s, &prof, &p, &g), 0.0);
            assert_eq!(inefficiency_gap(&s, &prof, &p, &g), 0.0);
        }
    }

    #[test]
    fn constant_discount_matches_hand_computation() {
        let p = params().with_convention(BudgetConvention::Physical);
        let (prof, g) = (at_capacity(&p), grid(&p));
        let price = 2.0 * p.alpha();
        let s = IncentiveSchedule::constant(&p, price);
        // delta* = 10 min, paid price * 10 per commuter
        let spent = budget_spent(&s, &prof, &p, &g);
        assert!((spent - 9000.0 * price * 10.0).abs() < 1e-6);
        let perceived = budget_perceived(&s, &prof, &p, &g);
        let per_head = 20.0 / (2.0 * price) * (price - p.alpha()).powi(2);
        assert!((perceived - 9000.0 * per_head).abs() < 1e-6);
        let gap = inefficiency_gap(&s, &prof, &p, &g);
        assert!((spent - perceived - gap).abs() < 1e-6);

        let unscaled = p.with_convention(BudgetConvention::Unscaled);
        let gap_pub = inefficiency_gap(&s, &prof, &unscaled, &g);
        assert!((gap_pub * 20.0 - gap).abs() < 1e-6);
        let spent_pub = budget_spent(&s, &prof, &unscaled, &g);
        assert!((spent_pub - perceived - gap_pub).abs() < 1e-6);
    }

    #[test]
    fn physical_convention_figures() {
        let p = params().with_convention(BudgetConvention::Physical);
        let (prof, g) = (at_capacity(&p), grid(&p));
        let s = optimal_discount_unlimited(&p);
        let spent = budget_spent(&s, &prof, &p, &g);
        assert!((spent - 84_498.7).abs() < 5.0, "{spent}");
        assert!((required_budget_star(&p) - spent).abs() / spent < 1e-3);
        assert!(
            (unlimited_gap_closed_form(&p) - 20.0 * unlimited_gap_closed_form(&params())).abs()
                < 1e-6
        );
    }

    #[test]
    fn halving_a_discount_changes_perceived_budget_pointwise() {
        let p = params();
        let (prof, g) = (at_capacity(&p), grid(&p));
        let high = 4.0 * p.alpha();
        let per_head = |price: f64| 20.0 * (price - p.alpha()).powi(2) / (2.0 * price);
        for price in [high, high / 2.0] {
            let s = IncentiveSchedule::constant(&p, price);
            let m = budget_perceived(&s, &prof, &p, &g);
            assert!((m - 9000.0 * per_head(price)).abs() < 1e-6);
        }
    }

    #[test]
    fn unlimited_budget_figures() {
        let p = params();
        let (prof, g) = (at_capacity(&p), grid(&p));
        let s = optimal_discount_unlimited(&p);
        let m_per = budget_perceived(&s, &prof, &p, &g);
        let closed = p.perceived_budget_star();
        assert!((m_per - closed).abs() / closed < 1e-3);
        assert!((closed - 34_920.9).abs() < 0.1);

        let spent = budget_spent(&s, &prof, &p, &g);
        let star = required_budget_star(&p);
        assert!((spent - star).abs() / star < 1e-3);
        assert!((star - 37_400.0).abs() / 37_400.0 < 0.01);

        let gap = inefficiency_gap(&s, &prof, &p, &g);
        assert!((gap - (spent - m_per)).abs() / gap < 1e-3);
        assert!((gap - 2_479.0).abs() < 10.0);
    }

    #[test]
    fn unlimited_gap_closed_form_agrees_with_quadrature() {
        let p = params();
        let q = unlimited_gap(&p, 0.01);
        let c = unlimited_gap_closed_form(&p);
        assert!((q - c).abs() / c < 1e-4, "{q} vs {c}");
    }

    #[test]
    fn longer_charging_shrinks_the_gap() {
        let p = params();
        let wide = p.with_delta_bar(200.0).unwrap();
        assert!(unlimited_gap(&wide, 0.01) < unlimited_gap(&p, 0.01));
        let near = required_budget_star(&wide) - wide.perceived_budget_star();
        let base = required_budget_star(&p) - p.perceived_budget_star();
        assert!(near < base);
    }

    #[test]
    fn empty_population_needs_no_budget() {
        let p = params().with_n_commuters(0.0).unwrap();
        assert_eq!(required_budget_star(&p), 0.0);
    }

    #[test]
    fn report_under_unlimited_policy() {
        let p = params();
        let (prof, g) = (at_capacity(&p), grid(&p));
        let s = optimal_discount_unlimited(&p);
        let ts = p.desired_arrival();
        let w = CongestionWindow {
            t_ell: ts,
            t_dblprime: ts,
            t_r: ts,
        };
        let r = BudgetReport::evaluate(&s, &prof, &p, &g, w).unwrap();
        assert_eq!(r.tstt, 0.0);
        assert_eq!(r.peak_queue, 0.0);
        assert!(r.mass_residual.abs() < 1e-9);
        assert!(r.c_e.abs() < 1e-6);
        assert!(r.flags.discount_exceeds_base_price);
        assert!((r.m_dollars - r.m_perceived - r.inefficiency_gap).abs() / r.m_dollars < 1e-3);
    }
}
