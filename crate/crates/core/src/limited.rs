//! Optimal discount under a budget cap.
//!
//! A perceived budget `m_per` in `[0, M*per]` fixes a congested window
//! `(t_ell, t_r)` with no discount inside it and equalizing discounts outside.
//! The money actually spent is `f(m_per)`, a strictly increasing closed form;
//! a monetary budget is mapped back to `m_per` by bisection.

use crate::dynamics::{DepartureProfile, RatePiece};
use crate::error::{ModelError, Result};
use crate::incentive::{
    equalizing_gap_closed_form, optimal_discount_unlimited, BudgetReport, CongestionWindow,
    IncentiveSchedule,
};
use crate::model::{ScenarioParams, TimeGrid};
use crate::oracle::bisect_monotone;
use crate::scalar::Scalar;

/// Relative tolerance of the budget inversion.
pub const INVERSION_RTOL: f64 = 1e-8;

fn check_perceived<T: Scalar>(m_perceived: T, params: &ScenarioParams<T>) -> Result<T> {
    let max = params.perceived_budget_star();
    let slack = T::lit(1e-12) * (T::one() + max);
    if !(m_perceived >= -slack && m_perceived <= max + slack) {
        return Err(ModelError::InfeasiblePerceivedBudget {
            requested: m_perceived.as_f64(),
            max: max.as_f64(),
        });
    }
    Ok(m_perceived.max(T::zero()).min(max))
}

/// Congested window for a perceived budget: `t_ell = sqrt(2 gamma m / (s beta (beta + gamma)))`,
/// `t_r = N/s - sqrt(2 beta m / (s gamma (beta + gamma)))` and the queue peak
/// `t'' = t' + sqrt(2 beta gamma m / (s (beta + gamma))) / alpha`.
pub fn window_for_perceived<T: Scalar>(
    m_perceived: T,
    params: &ScenarioParams<T>,
) -> Result<CongestionWindow<T>> {
    let m = check_perceived(m_perceived, params)?;
    let (b, g, s) = (params.beta(), params.gamma(), params.capacity());
    let two = T::lit(2.0);
    let t_ell = (two * g * m / (s * b * (b + g))).sqrt();
    let t_r = params.horizon() - (two * b * m / (s * g * (b + g))).sqrt();
    let t_dblprime =
        params.on_time_departure() + (two * b * g * m / (s * (b + g))).sqrt() / params.alpha();
    Ok(CongestionWindow {
        t_ell,
        t_dblprime,
        t_r,
    })
}

/// Money spent as a function of the perceived budget, in closed form.
pub fn budget_map_f<T: Scalar>(m_perceived: T, params: &ScenarioParams<T>) -> Result<T> {
    let m = check_perceived(m_perceived, params)?;
    let w = window_for_perceived(m, params)?;
    Ok(
        m + equalizing_gap_closed_form(w.t_ell, params.beta(), params)
            + equalizing_gap_closed_form(params.horizon() - w.t_r, params.gamma(), params),
    )
}

/// Budget that removes congestion entirely, through the closed-form map.
pub fn required_budget_closed_form<T: Scalar>(params: &ScenarioParams<T>) -> T {
    budget_map_f(params.perceived_budget_star(), params).expect("M*per is feasible")
}

/// Perceived budget delivered by spending `m_dollars`.
///
/// Budgets above the full-removal budget are rejected with
/// [`ModelError::OverBudget`] rather than clamped.
pub fn invert_budget_map<T: Scalar>(m_dollars: T, params: &ScenarioParams<T>) -> Result<T> {
    let star = required_budget_closed_form(params);
    let tol = (T::lit(INVERSION_RTOL).max(T::epsilon() * T::lit(64.0))) * star.max(T::one());
    if m_dollars > star + tol {
        return Err(ModelError::OverBudget {
            requested: m_dollars.as_f64(),
            required: star.as_f64(),
        });
    }
    if m_dollars < T::zero() {
        return Err(ModelError::OutOfRange {
            value: m_dollars.as_f64(),
            lo: 0.0,
            hi: star.as_f64(),
        });
    }
    let m_star = params.perceived_budget_star();
    let target = m_dollars.min(star);
    bisect_monotone(
        |m| budget_map_f(m, params).expect("probe inside [0, M*per]"),
        T::zero(),
        m_star,
        target,
        tol,
    )
}

/// Congested window delivered by a monetary budget.
pub fn congestion_window<T: Scalar>(
    m_dollars: T,
    params: &ScenarioParams<T>,
) -> Result<CongestionWindow<T>> {
    window_for_perceived(invert_budget_map(m_dollars, params)?, params)
}

/// Optimal discount for a monetary budget: none inside the congested window,
/// equalizing discounts anchored at the window ends outside it.
pub fn optimal_discount_limited<T: Scalar>(
    m_dollars: T,
    params: &ScenarioParams<T>,
) -> Result<IncentiveSchedule<T>> {
    let w = congestion_window(m_dollars, params)?;
    Ok(IncentiveSchedule::equalizing(params, w.t_ell, w.t_r))
}

/// Equilibrium departures for a window: capacity outside it, the queue
/// growing rate until `t''` and the draining rate afterwards.
pub fn departure_rate_for_window<T: Scalar>(
    window: &CongestionWindow<T>,
    params: &ScenarioParams<T>,
) -> DepartureProfile<T> {
    let s = params.capacity();
    DepartureProfile::new(vec![
        RatePiece {
            start: T::zero(),
            end: window.t_ell,
            rate: s,
        },
        RatePiece {
            start: window.t_ell,
            end: window.t_dblprime,
            rate: params.early_rate(),
        },
        RatePiece {
            start: window.t_dblprime,
            end: window.t_r,
            rate: params.late_rate(),
        },
        RatePiece {
            start: window.t_r,
            end: params.horizon(),
            rate: s,
        },
    ])
    .expect("window pieces are contiguous")
}

pub fn limited_departure_rate<T: Scalar>(
    m_dollars: T,
    params: &ScenarioParams<T>,
) -> Result<DepartureProfile<T>> {
    Ok(departure_rate_for_window(
        &congestion_window(m_dollars, params)?,
        params,
    ))
}

/// Closed-form total system travel time (vehicle-minutes) for a perceived
/// budget: `m / alpha - theta sqrt(m) + nu`.
pub fn tstt_for_perceived<T: Scalar>(m_perceived: T, params: &ScenarioParams<T>) -> Result<T> {
    let m = check_perceived(m_perceived, params)?;
    Ok((m / params.alpha() - params.theta() * m.sqrt() + params.nu()).max(T::zero()))
}

/// Same quantity from the triangular queue: `(s/2)(t_r - t_ell)(t* - t'')`.
pub fn tstt_geometric<T: Scalar>(window: &CongestionWindow<T>, params: &ScenarioParams<T>) -> T {
    params.capacity() / T::lit(2.0)
        * (window.t_r - window.t_ell)
        * (params.desired_arrival() - window.t_dblprime)
}

/// Closed-form total system travel time for a monetary budget. Over-budget
/// requests yield `OverBudget`; the congestion-free policy applies there.
pub fn tstt_limited<T: Scalar>(m_dollars: T, params: &ScenarioParams<T>) -> Result<T> {
    tstt_for_perceived(invert_budget_map(m_dollars, params)?, params)
}

/// Everything the limited-budget policy produces for one budget.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitedBudgetSolution<T> {
    pub t_ell: T,
    pub t_r: T,
    pub t_dblprime: T,
    /// Perceived budget `f^{-1}(m_dollars)`.
    pub m_perceived: T,
    /// Closed-form travel time, vehicle-minutes.
    pub tstt_closed_form: T,
    pub schedule: IncentiveSchedule<T>,
    pub profile: DepartureProfile<T>,
    pub report: BudgetReport<T>,
}

impl<T: Scalar> LimitedBudgetSolution<T> {
    /// Solves for `m_dollars`, which must not exceed the full-removal budget.
    pub fn solve(m_dollars: T, params: &ScenarioParams<T>, grid: &TimeGrid<T>) -> Result<Self> {
        let m_perceived = invert_budget_map(m_dollars, params)?;
        let window = window_for_perceived(m_perceived, params)?;
        let schedule = IncentiveSchedule::equalizing(params, window.t_ell, window.t_r);
        let profile = departure_rate_for_window(&window, params);
        let report = BudgetReport::evaluate(&schedule, &profile, params, grid, window)?;
        Ok(Self {
            t_ell: window.t_ell,
            t_r: window.t_r,
            t_dblprime: window.t_dblprime,
            m_perceived,
            tstt_closed_form: tstt_for_perceived(m_perceived, params)?,
            schedule,
            profile,
            report,
        })
    }

    /// Like [`Self::solve`], but a budget above the full-removal budget
    /// yields the unlimited-budget policy with `report.flags.over_budget` set.
    pub fn solve_or_unlimited(
        m_dollars: T,
        params: &ScenarioParams<T>,
        grid: &TimeGrid<T>,
    ) -> Result<Self> {
        match Self::solve(m_dollars, params, grid) {
            Err(ModelError::OverBudget { .. }) => Self::unlimited(params, grid),
            other => other,
        }
    }

    /// The congestion-free policy, flagged as an over-budget fallback.
    pub fn unlimited(params: &ScenarioParams<T>, grid: &TimeGrid<T>) -> Result<Self> {
        let t_star = params.desired_arrival();
        let window = CongestionWindow {
            t_ell: t_star,
            t_dblprime: t_star,
            t_r: t_star,
        };
        let schedule = optimal_discount_unlimited(params);
        let profile = DepartureProfile::constant(T::zero(), params.horizon(), params.capacity())?;
        let mut report = BudgetReport::evaluate(&schedule, &profile, params, grid, window)?;
        report.flags.over_budget = true;
        Ok(Self {
            t_ell: t_star,
            t_r: t_star,
            t_dblprime: t_star,
            m_perceived: params.perceived_budget_star(),
            tstt_closed_form: T::zero(),
            schedule,
            profile,
            report,
        })
    }

    pub fn window(&self) -> CongestionWindow<T> {
        CongestionWindow {
            t_ell: self.t_ell,
            t_dblprime: self.t_dblprime,
            t_r: self.t_r,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::evolve_queue;
    use crate::incentive::{gap_density, optimal_discount_unlimited};
    use crate::oracle::{quadrature, uniform_nodes};

    fn params() -> ScenarioParams<f64> {
        ScenarioParams::new(6.4 / 60.0, 0.065, 0.2535, 9000.0, 60.0, 20.0, 0.0).unwrap()
    }

    #[test]
    fn f_endpoints() {
        let p = params();
        assert_eq!(budget_map_f(0.0, &p).unwrap(), 0.0);
        let star = budget_map_f(p.perceived_budget_star(), &p).unwrap();
        assert!((star - 37_400.0).abs() / 37_400.0 < 0.01);
        assert!(budget_map_f(-1.0, &p).is_err());
        assert!(budget_map_f(p.perceived_budget_star() * 1.01, &p).is_err());
    }

    // Quadrature of the equalizing segments' inefficiency in time, the form
    // before the change of variables.
    fn f_by_quadrature(m: f64, p: &ScenarioParams<f64>) -> f64 {
        let w = window_for_perceived(m, p).unwrap();
        let sched = IncentiveSchedule::equalizing(p, w.t_ell, w.t_r);
        let dens = |t: f64| p.gap_scale() * gap_density(sched.discount(t), p.alpha());
        let left = quadrature(dens, 0.0, w.t_ell, &uniform_nodes(0.0, w.t_ell, 0.001, &[]));
        let right = quadrature(dens, w.t_r, 150.0, &uniform_nodes(w.t_r, 150.0, 0.001, &[]));
        m + p.capacity() * (left + right)
    }

    #[test]
    fn f_closed_form_matches_quadrature() {
        let p = params();
        for m in [500.0, 7_959.7, 20_000.0, 34_000.0] {
            let c = budget_map_f(m, &p).unwrap();
            let q = f_by_quadrature(m, &p);
            assert!((c - q).abs() / c < 1e-3, "m={m}: {c} vs {q}");
        }
    }

    #[test]
    fn inversion_examples() {
        let p = params();
        assert_eq!(invert_budget_map(0.0, &p).unwrap(), 0.0);
        let star = required_budget_closed_form(&p);
        let m_star = invert_budget_map(star, &p).unwrap();
        assert!((m_star - p.perceived_budget_star()).abs() < 1e-3);

        let m = invert_budget_map(8_660.0, &p).unwrap();
        // consistency with a 57-minute start of congestion
        let from_t_ell =
            60.0 * p.beta() * (p.beta() + p.gamma()) * 57.0f64.powi(2) / (2.0 * p.gamma());
        assert!(
            (m - from_t_ell).abs() / from_t_ell < 5e-3,
            "{m} vs {from_t_ell}"
        );
        assert!((m - 7_960.0).abs() < 10.0);
        let back = budget_map_f(m, &p).unwrap();
        assert!((back - 8_660.0).abs() <= (1e-6 * star).max(0.01));
    }

    #[test]
    fn over_budget_is_signalled() {
        let p = params();
        let err = invert_budget_map(40_000.0, &p).unwrap_err();
        assert!(matches!(err, ModelError::OverBudget { .. }));
        assert!(congestion_window(40_000.0, &p).is_err());
        assert!(tstt_limited(40_000.0, &p).is_err());
        assert!(optimal_discount_limited(40_000.0, &p).is_err());
    }

    #[test]
    fn window_examples() {
        let p = params();
        let w = congestion_window(8_660.0, &p).unwrap();
        assert!((w.t_ell - 57.0).abs() <= 0.5);
        assert!((w.t_r - 135.2).abs() <= 0.5);
        assert!((w.t_dblprime - 81.3).abs() <= 0.5);

        let w0 = congestion_window(0.0, &p).unwrap();
        assert_eq!(w0.t_ell, 0.0);
        assert!((w0.t_r - 150.0).abs() < 1e-12);
        assert!((w0.t_dblprime - 46.6).abs() < 0.05);

        let star = required_budget_closed_form(&p);
        let ws = congestion_window(star, &p).unwrap();
        for t in [ws.t_ell, ws.t_dblprime, ws.t_r] {
            assert!((t - 119.38).abs() < 0.01, "{t}");
        }
    }

    #[test]
    fn limited_discount_shape() {
        let p = params();
        let s = optimal_discount_limited(8_660.0, &p).unwrap();
        let w = congestion_window(8_660.0, &p).unwrap();
        assert_eq!(s.discount(100.0), 0.0);
        assert!((s.discount(w.t_ell) - p.alpha()).abs() < 1e-12);
        assert!((s.discount(w.t_r) - p.alpha()).abs() < 1e-12);
        let k = p.beta() * w.t_ell / p.delta_bar();
        let expected = p.alpha() + k + ((k + p.alpha()).powi(2) - p.alpha().powi(2)).sqrt();
        assert!((s.discount(0.0) - expected).abs() < 1e-12);
    }

    #[test]
    fn full_budget_reproduces_unlimited_schedule() {
        let p = params();
        let star = required_budget_closed_form(&p);
        let lim = optimal_discount_limited(star, &p).unwrap();
        let unl = optimal_discount_unlimited(&p);
        for i in 0..=300 {
            let t = i as f64 * 0.5;
            assert!((lim.discount(t) - unl.discount(t)).abs() < 1e-3, "t={t}");
        }
    }

    #[test]
    fn departure_rates_and_mass() {
        let p = params();
        let prof = limited_departure_rate(8_660.0, &p).unwrap();
        let rates: Vec<f64> = prof.pieces().iter().map(|x| x.rate).collect();
        assert_eq!(rates.len(), 4);
        assert!((rates[0] - 60.0).abs() < 1e-12);
        assert!((rates[1] - 153.6).abs() < 1e-9);
        assert!((rates[2] - 6.4 * 60.0 / 21.61).abs() < 1e-9);
        assert!((prof.total_departures() - 9000.0).abs() < 1e-6);

        let star = required_budget_closed_form(&p);
        let full = limited_departure_rate(star, &p).unwrap();
        for t in [0.0, 50.0, 119.0, 120.0, 149.0] {
            assert!((full.rate(t) - 60.0).abs() < 1e-9);
        }
    }

    #[test]
    fn simulated_queue_confined_to_window() {
        let p = params();
        let w = congestion_window(8_660.0, &p).unwrap();
        let prof = departure_rate_for_window(&w, &p);
        let grid = TimeGrid::over_horizon(&p, 0.01).unwrap();
        let traj = evolve_queue(&prof, &p, &grid).unwrap();
        for (i, t) in grid.points().enumerate() {
            if t <= w.t_ell || t >= w.t_r + 0.01 {
                assert!(traj.queue()[i] < 1e-6, "t={t} q={}", traj.queue()[i]);
            }
        }
        let (t_peak, _) = traj.peak();
        assert!((t_peak - w.t_dblprime).abs() <= 0.01);
        let wait = traj.waiting_time(w.t_dblprime).unwrap();
        assert!((wait - (p.desired_arrival() - w.t_dblprime)).abs() < 1e-2);
    }

    #[test]
    fn tstt_examples() {
        let p = params();
        assert!((tstt_limited(0.0, &p).unwrap() - p.nu()).abs() < 1e-6);
        let star = required_budget_closed_form(&p);
        assert!(tstt_limited(star, &p).unwrap() < 1e-3 * p.nu());
        let ratio = tstt_limited(8_660.0, &p).unwrap() / p.nu();
        assert!((ratio - 0.3).abs() <= 0.05, "{ratio}");
    }

    #[test]
    fn geometric_identity_matches_closed_form() {
        let p = params();
        for m in [0.0, 3_000.0, 8_660.0, 30_000.0] {
            let w = congestion_window(m, &p).unwrap();
            let a = tstt_limited(m, &p).unwrap();
            let b = tstt_geometric(&w, &p);
            assert!((a - b).abs() <= 1e-6 * p.nu(), "m={m}: {a} vs {b}");
        }
    }

    #[test]
    fn windows_nest() {
        let p = params();
        let star = required_budget_closed_form(&p);
        let mut prev = congestion_window(0.0, &p).unwrap();
        for k in 1..20 {
            let w = congestion_window(star * k as f64 / 20.0, &p).unwrap();
            assert!(w.t_ell > prev.t_ell && w.t_r < prev.t_r);
            assert!(w.t_ell <= w.t_dblprime && w.t_dblprime <= w.t_r);
            assert!(w.t_ell <= p.desired_arrival() && p.desired_arrival() <= w.t_r);
            prev = w;
        }
    }

    #[test]
    fn solve_or_unlimited_routes_over_budget() {
        let p = params();
        let grid = TimeGrid::over_horizon(&p, 0.05).unwrap();
        let sol = LimitedBudgetSolution::solve_or_unlimited(50_000.0, &p, &grid).unwrap();
        assert!(sol.report.flags.over_budget);
        assert_eq!(sol.report.tstt, 0.0);
        assert!(LimitedBudgetSolution::solve(50_000.0, &p, &grid).is_err());

        let sol = LimitedBudgetSolution::solve_or_unlimited(8_660.0, &p, &grid).unwrap();
        assert!(!sol.report.flags.over_budget);
        assert!((sol.report.m_dollars - 8_660.0).abs() / 8_660.0 < 1e-3);
        assert!(sol.report.mass_residual.abs() < 1e-6);
    }

    #[test]
    fn single_precision_window() {
        let p =
            ScenarioParams::<f32>::new(6.4 / 60.0, 0.065, 0.2535, 9000.0, 60.0, 20.0, 0.0).unwrap();
        let w = congestion_window(8_660.0f32, &p).unwrap();
        assert!((w.t_ell - 57.0).abs() <= 0.5);
        assert!((w.t_r - 135.2).abs() <= 0.5);
    }
}
