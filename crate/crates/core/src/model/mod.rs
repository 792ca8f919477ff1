//! Scenario parameters, time grids and the commuter cost structure.

mod cost;
mod params;

pub use cost::{
    charging_cost, constant_incentive_charging_cost, constant_incentive_charging_time,
    optimal_charging_cost, optimal_charging_time, perceived_incentive, schedule_delay_cost,
    total_cost,
};
pub use params::{canonical_params, BudgetConvention, RawParams, ScenarioParams, TimeGrid};
