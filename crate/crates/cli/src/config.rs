//! Scenario files: a flat TOML table plus an optional `[sweep]` table.
//!
//! Every diagnostic is anchored to `path:line:column` of the offending value.

use std::path::{Path, PathBuf};

use pev_bottleneck::model::BudgetConvention;
use pev_bottleneck::{canonical_params, required_budget_star, RawParams, ScenarioParams};
use serde::Deserialize;
use toml::Spanned;

use crate::error::CliError;

/// A budget given either in dollars or as `"star"`, the budget that removes
/// congestion entirely.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum BudgetEntry {
    Amount(f64),
    Keyword(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepFile {
    min: Spanned<BudgetEntry>,
    max: Spanned<BudgetEntry>,
    count: Spanned<i64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    alpha: Spanned<f64>,
    beta: Spanned<f64>,
    gamma: Spanned<f64>,
    n_commuters: Spanned<f64>,
    capacity: Spanned<f64>,
    delta_bar: Spanned<f64>,
    #[serde(default)]
    p_bar: Option<Spanned<f64>>,
    #[serde(default)]
    grid_dt: Option<Spanned<f64>>,
    #[serde(default)]
    seed: Option<Spanned<i64>>,
    #[serde(default)]
    output_dir: Option<String>,
    #[serde(default)]
    budget_convention: Option<Spanned<String>>,
    #[serde(default)]
    budgets: Vec<Spanned<BudgetEntry>>,
    #[serde(default)]
    sweep: Option<SweepFile>,
}

/// Evenly spaced budgets, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl SweepSpec {
    pub fn budgets(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.min],
            n => (0..n)
                .map(|k| self.min + (self.max - self.min) * k as f64 / (n - 1) as f64)
                .collect(),
        }
    }
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub params: ScenarioParams,
    /// Full-removal budget of `params`, $.
    pub budget_star: f64,
    pub grid_dt: f64,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub budgets: Vec<f64>,
    pub sweep: Option<SweepSpec>,
}

pub const DEFAULT_GRID_DT: f64 = 0.01;

struct Source<'a> {
    path: &'a Path,
    text: &'a str,
}

impl Source<'_> {
    fn error(&self, offset: usize, message: impl Into<String>) -> CliError {
        let before = &self.text[..offset.min(self.text.len())];
        let line = before.matches('\n').count() + 1;
        let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
        CliError::Config(format!(
            "{}:{line}:{column}: {}",
            self.path.display(),
            message.into()
        ))
    }

    fn check(&self, v: &Spanned<f64>, name: &str, ok: bool, rule: &str) -> Result<f64, CliError> {
        let x = *v.get_ref();
        if x.is_finite() && ok {
            Ok(x)
        } else {
            Err(self.error(v.span().start, format!("{name} = {x} must be {rule}")))
        }
    }

    fn positive(&self, v: &Spanned<f64>, name: &str) -> Result<f64, CliError> {
        self.check(v, name, *v.get_ref() > 0.0, "positive")
    }

    fn non_negative(&self, v: &Spanned<f64>, name: &str) -> Result<f64, CliError> {
        self.check(v, name, *v.get_ref() >= 0.0, "non-negative")
    }

    fn budget(&self, v: &Spanned<BudgetEntry>, star: f64) -> Result<f64, CliError> {
        match v.get_ref() {
            BudgetEntry::Amount(x) if x.is_finite() && *x >= 0.0 => Ok(*x),
            BudgetEntry::Amount(x) => Err(self.error(
                v.span().start,
                format!("budget {x} must be a non-negative amount"),
            )),
            BudgetEntry::Keyword(k) if k == "star" => Ok(star),
            BudgetEntry::Keyword(k) => Err(self.error(
                v.span().start,
                format!("unknown budget keyword {k:?}, expected a number or \"star\""),
            )),
        }
    }
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(path, &text)
    }

    /// Parses `text`; `path` only labels diagnostics.
    pub fn parse(path: &Path, text: &str) -> Result<Self, CliError> {
        let src = Source { path, text };
        let file: ConfigFile = toml::from_str(text).map_err(|e| {
            let offset = e.span().map_or(0, |s| s.start);
            src.error(offset, e.message().trim_end().replace('\n', "; "))
        })?;

        let alpha = src.positive(&file.alpha, "alpha")?;
        let beta = src.positive(&file.beta, "beta")?;
        if beta >= alpha {
            return Err(src.error(
                file.beta.span().start,
                format!("beta = {beta} must be below alpha = {alpha}"),
            ));
        }
        let raw = RawParams {
            alpha_per_hour: alpha,
            beta_per_hour: beta,
            gamma_per_hour: src.positive(&file.gamma, "gamma")?,
            n_commuters: src.non_negative(&file.n_commuters, "n_commuters")?,
            capacity: src.positive(&file.capacity, "capacity")?,
            delta_bar: src.positive(&file.delta_bar, "delta_bar")?,
            p_bar: match &file.p_bar {
                Some(v) => src.non_negative(v, "p_bar")?,
                None => 0.0,
            },
        };
        let mut params = canonical_params(&raw)
            .map_err(|e| src.error(file.alpha.span().start, e.to_string()))?;
        if let Some(c) = &file.budget_convention {
            let convention = match c.get_ref().as_str() {
                "unscaled" => BudgetConvention::Unscaled,
                "physical" => BudgetConvention::Physical,
                other => {
                    return Err(src.error(
                        c.span().start,
                        format!(
                            "unknown budget_convention {other:?}, expected \"unscaled\" or \"physical\""
                        ),
                    ))
                }
            };
            params = params.with_convention(convention);
        }

        let grid_dt = match &file.grid_dt {
            Some(v) => src.positive(v, "grid_dt")?,
            None => DEFAULT_GRID_DT,
        };
        let seed = match &file.seed {
            Some(v) if *v.get_ref() >= 0 => *v.get_ref() as u64,
            Some(v) => return Err(src.error(v.span().start, "seed must be non-negative")),
            None => 0,
        };

        let budget_star = required_budget_star(&params);
        let budgets = file
            .budgets
            .iter()
            .map(|b| src.budget(b, budget_star))
            .collect::<Result<Vec<_>, _>>()?;
        let sweep = match &file.sweep {
            None => None,
            Some(s) => {
                let min = src.budget(&s.min, budget_star)?;
                let max = src.budget(&s.max, budget_star)?;
                if max < min {
                    return Err(src.error(s.max.span().start, "sweep max must not be below min"));
                }
                let count = usize::try_from(*s.count.get_ref()).map_err(|_| {
                    src.error(s.count.span().start, "sweep count must be non-negative")
                })?;
                Some(SweepSpec { min, max, count })
            }
        };

        Ok(Self {
            params,
            budget_star,
            grid_dt,
            seed,
            output_dir: PathBuf::from(file.output_dir.unwrap_or_else(|| "out".into())),
            budgets,
            sweep,
        })
    }
}
