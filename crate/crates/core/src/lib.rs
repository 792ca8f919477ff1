//! Electricity-price discounts for plug-in electric vehicles as a tool
//! against bottleneck congestion.
//!
//! Commuters pass a single bottleneck of capacity `s` and choose when to
//! depart; PEV owners may also stop at a charging station, where a
//! time-dependent discount `p(t)` makes leaving off-peak worthwhile. The
//! crate computes the discount that removes congestion entirely, the optimal
//! discount under a budget cap, the money they cost, and verifies the
//! resulting equilibria by simulation.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the aliases at the
//! crate root fix the scalar to `f64`.

pub mod dynamics;
pub mod error;
pub mod incentive;
pub mod limited;
pub mod model;
pub mod oracle;
mod scalar;

pub use dynamics::{classical_equilibrium, evolve_queue, ClassicalEquilibrium, RatePiece};
pub use error::{ModelError, Result};
pub use incentive::{
    optimal_discount_unlimited, required_budget_star, CongestionWindow, ReportFlags,
};
pub use limited::{
    budget_map_f, congestion_window, invert_budget_map, limited_departure_rate,
    optimal_discount_limited, tstt_limited,
};
pub use model::{canonical_params, BudgetConvention};
pub use scalar::Scalar;

pub type ScenarioParams = model::ScenarioParams<f64>;
pub type RawParams = model::RawParams<f64>;
pub type TimeGrid = model::TimeGrid<f64>;
pub type DepartureProfile = dynamics::DepartureProfile<f64>;
pub type QueueTrajectory = dynamics::QueueTrajectory<f64>;
pub type IncentiveSchedule = incentive::IncentiveSchedule<f64>;
pub type BudgetReport = incentive::BudgetReport<f64>;
pub type LimitedBudgetSolution = limited::LimitedBudgetSolution<f64>;
pub type AgentPopulation = oracle::AgentPopulation<f64>;
pub type ConvergenceReport = oracle::ConvergenceReport<f64>;
pub type BestResponseConfig = oracle::BestResponseConfig<f64>;
