use crate::model::{optimal_charging_time, ScenarioParams};
use crate::scalar::Scalar;

/// Which side of its anchor an equalizing segment lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `t <= anchor`, earliness side, `g = rate (t - anchor)`.
    Before,
    /// `t >= anchor`, lateness side, `g = rate (anchor - t)`.
    After,
}

/// One closed-form piece of a discount schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment<T> {
    /// No discount on the open interval `(start, end)`.
    Zero { start: T, end: T },
    /// Flat discount.
    Constant { start: T, end: T, value: T },
    /// Discount whose perceived value offsets a schedule penalty growing at
    /// `rate` away from `anchor`: with `u = -g / delta_bar >= 0`,
    /// `p = alpha + u + sqrt((alpha + u)^2 - alpha^2)`, so `p = alpha` at the
    /// anchor.
    Equalizing {
        start: T,
        end: T,
        anchor: T,
        rate: T,
        side: Side,
    },
}

impl<T: Scalar> Segment<T> {
    pub fn start(&self) -> T {
        match *self {
            Segment::Zero { start, .. }
            | Segment::Constant { start, .. }
            | Segment::Equalizing { start, .. } => start,
        }
    }

    pub fn end(&self) -> T {
        match *self {
            Segment::Zero { end, .. }
            | Segment::Constant { end, .. }
            | Segment::Equalizing { end, .. } => end,
        }
    }

    /// The `g` coefficient of an equalizing segment (non-positive on its
    /// support); zero for the other kinds.
    pub fn g(&self, t: T) -> T {
        match *self {
            Segment::Equalizing {
                anchor, rate, side, ..
            } => match side {
                Side::Before => rate * (t - anchor),
                Side::After => rate * (anchor - t),
            },
            _ => T::zero(),
        }
    }

    /// Discount given by this segment's formula at `t`, extended
    /// continuously to the closed ends.
    pub fn discount(&self, t: T, alpha: T, delta_bar: T) -> T {
        match *self {
            Segment::Zero { .. } => T::zero(),
            Segment::Constant { value, .. } => value,
            Segment::Equalizing { .. } => {
                let g = self.g(t);
                // (g/delta_bar - alpha)^2 - alpha^2 factored as u (2 alpha + u);
                // u is clamped at 0 so round-off at the anchor cannot go negative
                let u = if g.abs() < T::lit(1e-12) {
                    T::zero()
                } else {
                    (-g / delta_bar).max(T::zero())
                };
                let radicand = (u * (T::lit(2.0) * alpha + u)).max(T::zero());
                alpha + u + radicand.sqrt()
            }
        }
    }

    fn is_zero(&self) -> bool {
        matches!(self, Segment::Zero { .. })
    }
}

/// Electricity-price discount `p(t)` over the rush hour as a sequence of
/// closed-form segments.
///
/// Adjacent segments share their boundary; at a shared boundary a discount
/// segment wins over a [`Segment::Zero`] one, so the no-discount stretch is
/// open.
#[derive(Debug, Clone, PartialEq)]
pub struct IncentiveSchedule<T> {
    alpha: T,
    delta_bar: T,
    segments: Vec<Segment<T>>,
}

impl<T: Scalar> IncentiveSchedule<T> {
    pub fn from_segments(params: &ScenarioParams<T>, segments: Vec<Segment<T>>) -> Self {
        let segments = segments
            .into_iter()
            .filter(|s| s.end() >= s.start())
            .collect::<Vec<_>>();
        assert!(!segments.is_empty(), "schedule needs at least one segment");
        // zero-length pieces would otherwise claim their endpoint
        let segments = if segments.iter().any(|s| s.end() > s.start()) {
            segments
                .into_iter()
                .filter(|s| s.end() > s.start())
                .collect()
        } else {
            segments
        };
        Self {
            alpha: params.alpha(),
            delta_bar: params.delta_bar(),
            segments,
        }
    }

    /// `p = 0` everywhere.
    pub fn zero(params: &ScenarioParams<T>) -> Self {
        Self::from_segments(
            params,
            vec![Segment::Zero {
                start: T::zero(),
                end: params.horizon(),
            }],
        )
    }

    /// `p = value` everywhere.
    pub fn constant(params: &ScenarioParams<T>, value: T) -> Self {
        Self::from_segments(
            params,
            vec![Segment::Constant {
                start: T::zero(),
                end: params.horizon(),
                value,
            }],
        )
    }

    /// Equalizing discount anchored at `t_ell` on the left and `t_r` on the
    /// right with no discount in between.
    pub fn equalizing(params: &ScenarioParams<T>, t_ell: T, t_r: T) -> Self {
        let mut segments = vec![Segment::Equalizing {
            start: T::zero(),
            end: t_ell,
            anchor: t_ell,
            rate: params.beta(),
            side: Side::Before,
        }];
        if t_r > t_ell {
            segments.push(Segment::Zero {
                start: t_ell,
                end: t_r,
            });
        }
        segments.push(Segment::Equalizing {
            start: t_r,
            end: params.horizon(),
            anchor: t_r,
            rate: params.gamma(),
            side: Side::After,
        });
        Self::from_segments(params, segments)
    }

    pub fn segments(&self) -> &[Segment<T>] {
        &self.segments
    }

    pub fn start(&self) -> T {
        self.segments[0].start()
    }

    pub fn end(&self) -> T {
        self.segments[self.segments.len() - 1].end()
    }

    /// Segment governing `t`, or `None` outside the schedule.
    pub fn segment_at(&self, t: T) -> Option<&Segment<T>> {
        let mut found: Option<&Segment<T>> = None;
        for seg in &self.segments {
            if t >= seg.start() && t <= seg.end() {
                match found {
                    Some(prev) if !prev.is_zero() => {}
                    _ => found = Some(seg),
                }
            }
        }
        found
    }

    /// Discount `p(t)`, $/min; zero outside the schedule.
    pub fn discount(&self, t: T) -> T {
        self.segment_at(t)
            .map(|s| s.discount(t, self.alpha, self.delta_bar))
            .unwrap_or_else(T::zero)
    }

    /// Optimal charging stop `delta*(t)` under this schedule.
    pub fn charging_time(&self, t: T, params: &ScenarioParams<T>) -> T {
        optimal_charging_time(self.discount(t), params)
    }

    /// Interior segment boundaries.
    pub fn breakpoints(&self) -> Vec<T> {
        self.segments.iter().skip(1).map(|s| s.start()).collect()
    }

    /// Largest discount offered. Equalizing segments peak at the end farthest
    /// from their anchor.
    pub fn max_discount(&self) -> T {
        self.segments
            .iter()
            .map(|s| {
                let a = s.discount(s.start(), self.alpha, self.delta_bar);
                let b = s.discount(s.end(), self.alpha, self.delta_bar);
                a.max(b)
            })
            .fold(T::zero(), T::max)
    }

    /// True when the discount exceeds the base electricity price somewhere,
    /// i.e. the station would be paying commuters to charge.
    pub fn exceeds_base_price(&self, p_bar: T) -> bool {
        self.max_discount() > p_bar
    }
}

/// Unlimited-budget optimal discount: equalizing on both sides of `t*`, so
/// that with departures at capacity no queue forms and everyone faces the
/// same cost.
pub fn optimal_discount_unlimited<T: Scalar>(params: &ScenarioParams<T>) -> IncentiveSchedule<T> {
    let t_star = params.desired_arrival();
    IncentiveSchedule::equalizing(params, t_star, t_star)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{optimal_charging_cost, schedule_delay_cost};

    fn params() -> ScenarioParams<f64> {
        ScenarioParams::new(6.4 / 60.0, 0.065, 0.2535, 9000.0, 60.0, 20.0, 0.0).unwrap()
    }

    #[test]
    fn unlimited_is_alpha_at_t_star() {
        let p = params();
        let s = optimal_discount_unlimited(&p);
        let ts = p.desired_arrival();
        assert!((s.discount(ts) - p.alpha()).abs() < 1e-15);
        assert_eq!(s.charging_time(ts, &p), 0.0);
    }

    #[test]
    fn unlimited_at_zero_plugs_in() {
        let p = params();
        let s = optimal_discount_unlimited(&p);
        let ts = p.desired_arrival();
        let k = p.beta() * ts / p.delta_bar();
        let expected = p.alpha() + k + ((k + p.alpha()).powi(2) - p.alpha().powi(2)).sqrt();
        assert!((s.discount(0.0) - expected).abs() < 1e-12);
    }

    #[test]
    fn unlimited_shape() {
        let p = params();
        let s = optimal_discount_unlimited(&p);
        let ts = p.desired_arrival();
        let mut prev = f64::INFINITY;
        for i in 0..=1500 {
            let t = i as f64 * 0.1;
            let v = s.discount(t);
            assert!(v >= p.alpha() - 1e-15);
            if (t - ts).abs() > 1e-9 {
                assert!(v > p.alpha());
            }
            // radicand of the unfactored form stays non-negative
            let g = s.segment_at(t).unwrap().g(t);
            assert!(g <= 0.0);
            assert!((g / p.delta_bar() - p.alpha()).powi(2) - p.alpha().powi(2) >= -1e-15);
            if t < ts {
                assert!(v < prev);
            }
            prev = v;
        }
        assert!(s.discount(150.0) > s.discount(130.0));
    }

    #[test]
    fn unlimited_discount_equalizes_cost_without_queue() {
        let p = params();
        let s = optimal_discount_unlimited(&p);
        let ts = p.desired_arrival();
        let cost = |t: f64| {
            schedule_delay_cost(t, ts, 0.0, &p) + optimal_charging_cost(t, s.discount(t), &p)
        };
        let c_star = cost(ts);
        for i in 0..=150 {
            assert!((cost(i as f64) - c_star).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_window_is_open() {
        let p = params();
        let s = IncentiveSchedule::equalizing(&p, 57.0, 135.2);
        assert!((s.discount(57.0) - p.alpha()).abs() < 1e-15);
        assert!((s.discount(135.2) - p.alpha()).abs() < 1e-15);
        assert_eq!(s.discount(57.000_001), 0.0);
        assert_eq!(s.discount(100.0), 0.0);
        assert_eq!(s.breakpoints(), vec![57.0, 135.2]);
    }

    #[test]
    fn base_price_flag() {
        let p = params();
        let s = optimal_discount_unlimited(&p);
        assert!(s.exceeds_base_price(0.0));
        assert!(!s.exceeds_base_price(10.0));
        assert!(!IncentiveSchedule::zero(&p).exceeds_base_price(0.0));
    }
}
