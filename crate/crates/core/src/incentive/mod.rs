//! Discount schedules, the unlimited-budget optimum and budget accounting.

mod accounting;
mod schedule;

pub use accounting::{
    budget_perceived, budget_spent, equalizing_gap_closed_form, gap_antiderivative, gap_density,
    inefficiency_gap, required_budget_star, required_budget_star_with_step, unlimited_gap,
    unlimited_gap_closed_form, BudgetReport, CongestionWindow, ReportFlags, DEFAULT_STEP,
};
pub use schedule::{optimal_discount_unlimited, IncentiveSchedule, Segment, Side};
