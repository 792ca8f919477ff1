//! Discrete agent simulation of the departure-time game.
//!
//! A finite population of agents, each standing for a block of vehicles,
//! picks departure slots; every agent then stops to charge for the time that
//! minimises its charging cost at that slot, found by grid search. Agents
//! are served FIFO by a server of the bottleneck's capacity, and agents
//! sharing a slot are served in random order, so each expects to wait behind
//! half of the others there.
//!
//! Best-response dynamics started from an arbitrary spread do not settle in
//! this game: everyone races to depart just ahead of the queue and the
//! population cycles. The search therefore starts from an equal-cost
//! insertion, which only uses the cost model: for a trial cost `C`, agents
//! are placed in departure order at the earliest slot where their cost does
//! not exceed `C`, and `C` is bisected down to the smallest value that fits
//! everyone. Damped best-response rounds then run from there, and every
//! agent's best global deviation is evaluated exactly to decide convergence.
//!
//! A single agent's service time shifts the cost of everyone behind it, so
//! deviations can gain up to about `(alpha + gamma) m / s` for agents of `m`
//! vehicles purely through lumpiness. The convergence tolerance is
//! `epsilon` on top of that granularity.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{DepartureProfile, RatePiece};
use crate::incentive::IncentiveSchedule;
use crate::model::{charging_cost, schedule_delay_cost, ScenarioParams};
use crate::oracle::brute_force_delta;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestResponseConfig<T> {
    pub n_agents: usize,
    /// Width of a departure slot, min. Best kept a divisor of one agent's
    /// service time so that departures at capacity do not alias into
    /// spurious queues.
    pub slot: T,
    /// Resolution of the charging-stop search, min.
    pub delta_step: T,
    /// Largest share of agents allowed to move in one round.
    pub move_fraction: T,
    /// Smallest cost improvement worth a move beyond the granularity, $.
    pub epsilon: T,
    /// Best-response rounds.
    pub max_iters: usize,
    pub seed: u64,
}

impl<T: Scalar> Default for BestResponseConfig<T> {
    fn default() -> Self {
        Self {
            n_agents: 900,
            slot: T::lit(1.0 / 60.0),
            delta_step: T::lit(0.1),
            move_fraction: T::lit(0.1),
            epsilon: T::lit(1e-3),
            max_iters: 200,
            seed: 0,
        }
    }
}

/// Departure slot and charging stop of every agent.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentPopulation<T> {
    vehicles_per_agent: T,
    slot: T,
    n_slots: usize,
    departures: Vec<usize>,
    charging: Vec<T>,
}

impl<T: Scalar> AgentPopulation<T> {
    pub fn len(&self) -> usize {
        self.departures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.departures.is_empty()
    }

    pub fn vehicles_per_agent(&self) -> T {
        self.vehicles_per_agent
    }

    /// Width of a departure slot, min.
    pub fn slot_width(&self) -> T {
        self.slot
    }

    /// Departure slot index of each agent.
    pub fn slots(&self) -> &[usize] {
        &self.departures
    }

    /// Charging stop of each agent, min.
    pub fn charging(&self) -> &[T] {
        &self.charging
    }

    /// Departure time of agent `i` (centre of its slot), min.
    pub fn departure_time(&self, i: usize) -> T {
        slot_time(self.departures[i], self.slot)
    }

    /// Agents per slot.
    pub fn histogram(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_slots];
        for &k in &self.departures {
            counts[k] += 1;
        }
        counts
    }

    /// Vehicles whose slot centre lies in `[a, b]`.
    pub fn vehicles_between(&self, a: T, b: T) -> T {
        let n = (0..self.len())
            .filter(|&i| {
                let t = self.departure_time(i);
                t >= a && t <= b
            })
            .count();
        T::from_count(n) * self.vehicles_per_agent
    }

    /// Piecewise-constant departure rate spreading each agent's vehicles
    /// uniformly over its slot.
    pub fn departure_profile(&self) -> DepartureProfile<T> {
        let pieces = self
            .histogram()
            .into_iter()
            .enumerate()
            .map(|(k, c)| RatePiece {
                start: self.slot * T::from_count(k),
                end: self.slot * T::from_count(k + 1),
                rate: T::from_count(c) * self.vehicles_per_agent / self.slot,
            })
            .collect();
        DepartureProfile::new(pieces).expect("slots tile the horizon")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceReport<T> {
    /// Best-response rounds run.
    pub iterations: usize,
    /// Agents moved over all rounds.
    pub moves: usize,
    /// Largest gain any agent could still get by deviating, $.
    pub max_improvement: T,
    /// `epsilon` plus the granularity `(alpha + gamma) m / s`, $.
    pub tolerance: T,
    /// Spread of realised costs across agents, $.
    pub cost_dispersion: T,
    /// Common cost found by the equal-cost insertion, $.
    pub insertion_cost: T,
    pub converged: bool,
}

fn slot_time<T: Scalar>(k: usize, slot: T) -> T {
    slot * (T::from_count(k) + T::lit(0.5))
}

struct Game<'a, T> {
    params: &'a ScenarioParams<T>,
    slot: T,
    /// Time one agent occupies the server, min.
    service: T,
    t_star: T,
    /// Best charging cost and stop in each slot.
    charge: Vec<(T, T)>,
}

impl<T: Scalar> Game<'_, T> {
    fn n_slots(&self) -> usize {
        self.charge.len()
    }

    fn cost(&self, k: usize, waiting: T) -> T {
        let t = slot_time(k, self.slot);
        schedule_delay_cost(t, self.t_star, waiting, self.params) + self.charge[k].0
    }

    /// Cost of every slot for an agent currently in `own` (removed from the
    /// counts), served behind the agents ahead and half of its slot-mates.
    fn slot_costs(&self, counts: &[usize], own: Option<usize>, out: &mut Vec<T>) {
        out.clear();
        let half = T::lit(0.5);
        let mut free = T::zero();
        for (k, &c) in counts.iter().enumerate() {
            let c = if own == Some(k) { c - 1 } else { c };
            let t = slot_time(k, self.slot);
            let start = free.max(t);
            let others = T::from_count(c) * self.service;
            free = start + others;
            out.push(self.cost(k, start - t + half * others));
        }
    }

    /// Places `n` agents at the earliest slots costing at most `c`, in
    /// departure order; `None` if they do not fit.
    fn insert(&self, n: usize, c: T) -> Option<Vec<usize>> {
        let mut out = Vec::with_capacity(n);
        let mut k = 0;
        let mut free = T::zero();
        while out.len() < n {
            if k >= self.n_slots() {
                return None;
            }
            let t = slot_time(k, self.slot);
            if self.cost(k, free.max(t) - t) <= c {
                free = free.max(t) + self.service;
                out.push(k);
            } else {
                k += 1;
            }
        }
        Some(out)
    }

    /// Equal-cost insertion with the smallest common cost that fits.
    fn equal_cost_insertion(&self, n: usize) -> (Vec<usize>, T) {
        let mut hi = T::one();
        while self.insert(n, hi).is_none() {
            hi = hi * T::lit(2.0);
        }
        let mut lo = -hi;
        while self.insert(n, lo).is_some() {
            lo = lo * T::lit(2.0);
        }
        for _ in 0..200 {
            let mid = (lo + hi) / T::lit(2.0);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.insert(n, mid).is_some() {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        (self.insert(n, hi).expect("upper bound fits"), hi)
    }

    /// Largest gain any agent has from its best deviation.
    fn max_gain(&self, counts: &[usize], costs: &mut Vec<T>) -> T {
        let mut gain = T::zero();
        for (k, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            self.slot_costs(counts, Some(k), costs);
            let (_, best) = argmin(costs);
            gain = gain.max(costs[k] - best);
        }
        gain
    }
}

fn argmin<T: Scalar>(costs: &[T]) -> (usize, T) {
    let mut best = (0, costs[0]);
    for (k, &c) in costs.iter().enumerate().skip(1) {
        if c < best.1 {
            best = (k, c);
        }
    }
    best
}

/// Searches for a departure equilibrium of `config.n_agents` agents under
/// `schedule`. Deterministic for a given seed; non-convergence is reported,
/// not raised.
pub fn best_response_dynamics<T: Scalar>(
    schedule: &IncentiveSchedule<T>,
    params: &ScenarioParams<T>,
    config: &BestResponseConfig<T>,
) -> (AgentPopulation<T>, ConvergenceReport<T>) {
    assert!(config.n_agents > 0, "need at least one agent");
    assert!(config.slot > T::zero(), "slot width must be positive");
    let horizon = params.horizon();
    let n_slots = (horizon / config.slot)
        .round()
        .to_usize()
        .unwrap_or(1)
        .max(1);
    let slot = horizon / T::from_count(n_slots);
    let n = config.n_agents;
    let vehicles = params.n_commuters() / T::from_count(n);

    let charge = (0..n_slots)
        .map(|k| {
            let t = slot_time(k, slot);
            let p = schedule.discount(t);
            let d = brute_force_delta(t, p, params, config.delta_step);
            (charging_cost(t, d, p, params), d)
        })
        .collect();
    let game = Game {
        params,
        slot,
        service: vehicles / params.capacity(),
        t_star: params.desired_arrival(),
        charge,
    };
    let tolerance = config.epsilon + (params.alpha() + params.gamma()) * game.service;

    let (mut departures, insertion_cost) = game.equal_cost_insertion(n);
    let mut counts = vec![0usize; n_slots];
    for &k in &departures {
        counts[k] += 1;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let movers = (config.move_fraction * T::from_count(n))
        .ceil()
        .to_usize()
        .unwrap_or(1)
        .clamp(1, n);
    let mut costs = Vec::with_capacity(n_slots);
    let mut gain = game.max_gain(&counts, &mut costs);
    let mut iterations = 0;
    let mut moves = 0;
    while gain > tolerance && iterations < config.max_iters {
        iterations += 1;
        for i in sample(&mut rng, n, movers) {
            let own = departures[i];
            game.slot_costs(&counts, Some(own), &mut costs);
            let (best, best_cost) = argmin(&costs);
            if costs[own] - best_cost > tolerance {
                counts[own] -= 1;
                counts[best] += 1;
                departures[i] = best;
                moves += 1;
            }
        }
        gain = game.max_gain(&counts, &mut costs);
    }

    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for (k, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        game.slot_costs(&counts, Some(k), &mut costs);
        lo = lo.min(costs[k]);
        hi = hi.max(costs[k]);
    }
    let charging = departures.iter().map(|&k| game.charge[k].1).collect();

    (
        AgentPopulation {
            vehicles_per_agent: vehicles,
            slot,
            n_slots,
            departures,
            charging,
        },
        ConvergenceReport {
            iterations,
            moves,
            max_improvement: gain,
            tolerance,
            cost_dispersion: hi - lo,
            insertion_cost,
            converged: gain <= tolerance,
        },
    )
}
