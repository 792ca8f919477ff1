//! Independent checks for the closed forms: a discrete best-response
//! simulation, equal-cost and brute-force charging checks, bisection and
//! quadrature.

mod agents;
mod checks;
mod numeric;

pub use agents::{best_response_dynamics, AgentPopulation, BestResponseConfig, ConvergenceReport};
pub use checks::{brute_force_delta, equal_cost_check, equal_cost_check_where, EqualCostCheck};
pub use numeric::{bisect_monotone, piecewise_quadrature, quadrature, uniform_nodes};
