use pev_bottleneck::limited::{tstt_for_perceived, window_for_perceived};
use pev_bottleneck::model;
use pev_bottleneck::{
    budget_map_f, congestion_window, evolve_queue, invert_budget_map, required_budget_star,
    tstt_limited, LimitedBudgetSolution, ScenarioParams, TimeGrid,
};
use proptest::prelude::*;

fn commute() -> ScenarioParams {
    ScenarioParams::new(
        6.4 / 60.0,
        3.9 / 60.0,
        15.21 / 60.0,
        9000.0,
        60.0,
        20.0,
        0.0,
    )
    .unwrap()
}

/// Scenarios around the commute with `beta < alpha < gamma` and a horizon
/// `N / s` of whole minutes.
fn scenarios() -> impl Strategy<Value = ScenarioParams> {
    (
        4.0..10.0f64,
        0.1..0.9f64,
        1.1..5.0f64,
        10u32..120,
        20u32..200,
        5.0..40.0f64,
    )
        .prop_map(|(a, b, g, s, minutes, d)| {
            let (s, n) = (s as f64, (s * minutes) as f64);
            ScenarioParams::new(a / 60.0, b * a / 60.0, g * a / 60.0, n, s, d, 0.0).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn window_is_ordered_and_shrinks(p in scenarios(), a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let star = required_budget_star(&p);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let w_lo = congestion_window(lo * star * 0.999, &p).unwrap();
        let w_hi = congestion_window(hi * star * 0.999, &p).unwrap();
        for w in [w_lo, w_hi] {
            prop_assert!(w.t_ell <= w.t_dblprime && w.t_dblprime <= w.t_r);
            prop_assert!(w.t_ell >= 0.0 && w.t_r <= p.horizon() + 1e-9);
        }
        prop_assert!(w_hi.t_ell >= w_lo.t_ell - 1e-6);
        prop_assert!(w_hi.t_r <= w_lo.t_r + 1e-6);
    }

    #[test]
    fn budget_map_round_trips(p in scenarios(), frac in 0.0..1.0f64) {
        let m = frac * p.perceived_budget_star();
        let back = invert_budget_map(budget_map_f(m, &p).unwrap(), &p).unwrap();
        prop_assert!((back - m).abs() <= 1e-6 * p.perceived_budget_star().max(1.0));
    }

    #[test]
    fn spending_more_never_raises_travel_time(p in scenarios(), a in 0.0..0.99f64, b in 0.0..0.99f64) {
        let star = required_budget_star(&p);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let g_lo = tstt_limited(lo * star, &p).unwrap();
        let g_hi = tstt_limited(hi * star, &p).unwrap();
        prop_assert!(g_hi <= g_lo * (1.0 + 1e-9) + 1e-9);
        prop_assert!(g_lo <= p.nu() * (1.0 + 1e-9));
    }

    #[test]
    fn limited_profile_serves_everyone(p in scenarios(), frac in 0.01..0.99f64) {
        let g = TimeGrid::over_horizon(&p, 0.05).unwrap();
        let sol = LimitedBudgetSolution::solve(frac * required_budget_star(&p), &p, &g).unwrap();
        let n = p.n_commuters();
        prop_assert!((sol.profile.total_departures() - n).abs() <= 1e-6 * n);
        let traj = evolve_queue(&sol.profile, &p, &g).unwrap();
        prop_assert!(traj.queue().iter().all(|&q| q >= 0.0));
        prop_assert!(traj.queue().last().unwrap().abs() <= 1e-6 * n);
    }
}

#[test]
fn single_precision_tracks_double() {
    let p32 = model::ScenarioParams::<f32>::new(
        6.4 / 60.0,
        3.9 / 60.0,
        15.21 / 60.0,
        9000.0,
        60.0,
        20.0,
        0.0,
    )
    .unwrap();
    let p64 = commute();
    let m32 = p32.perceived_budget_star() * 0.3;
    let m64 = p64.perceived_budget_star() * 0.3;
    let w32 = window_for_perceived(m32, &p32).unwrap();
    let w64 = window_for_perceived(m64, &p64).unwrap();
    assert!((w32.t_ell as f64 - w64.t_ell).abs() < 1e-2);
    assert!((w32.t_r as f64 - w64.t_r).abs() < 1e-2);
    let g32 = tstt_for_perceived(m32, &p32).unwrap() as f64;
    let g64 = tstt_for_perceived(m64, &p64).unwrap();
    assert!((g32 - g64).abs() / g64 < 1e-4);
}
