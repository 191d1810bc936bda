//! Total cost of ownership: cost buckets, freight premium, compound
//! escalation forecasts and domestic-vs-offshore comparison.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-unit cost buckets. Risk, strategic and green default to zero.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CostBuckets {
    pub fob_price: f64,
    pub cogs: f64,
    pub other_hard: f64,
    #[serde(default)]
    pub risk: f64,
    #[serde(default)]
    pub strategic: f64,
    #[serde(default)]
    pub green: f64,
}

impl CostBuckets {
    pub fn named(&self) -> [(&'static str, f64); 6] {
        [
            ("fob_price", self.fob_price),
            ("cogs", self.cogs),
            ("other_hard", self.other_hard),
            ("risk", self.risk),
            ("strategic", self.strategic),
            ("green", self.green),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in self.named() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::domain(format!("cost bucket '{name}' is {v}; must be >= 0")));
            }
        }
        Ok(())
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            fob_price: self.fob_price * c,
            cogs: self.cogs * c,
            other_hard: self.other_hard * c,
            risk: self.risk * c,
            strategic: self.strategic * c,
            green: self.green * c,
        }
    }
}

/// An itemized part of the CoGS bucket (shipping, packaging, duty, insurance).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CogsItem {
    pub item: String,
    pub amount: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourcingScenario {
    pub product_label: String,
    pub region_label: String,
    pub buckets: CostBuckets,
    pub freight_premium: f64,
    /// Annual compound escalation; may be negative but must exceed -1.
    pub escalation_rate: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cogs_items: Vec<CogsItem>,
}

const COGS_ITEM_TOLERANCE: f64 = 1e-9;

impl SourcingScenario {
    pub fn validate(&self) -> Result<()> {
        self.buckets
            .validate()
            .map_err(|e| Error::domain(format!("{} / {}: {e}", self.product_label, self.region_label)))?;
        if !self.freight_premium.is_finite() || self.freight_premium < 0.0 {
            return Err(Error::domain(format!(
                "{} / {}: freight premium {} must be >= 0",
                self.product_label, self.region_label, self.freight_premium
            )));
        }
        if !self.escalation_rate.is_finite() || self.escalation_rate <= -1.0 {
            return Err(Error::domain(format!(
                "{} / {}: escalation rate {} must exceed -1",
                self.product_label, self.region_label, self.escalation_rate
            )));
        }
        if !self.cogs_items.is_empty() {
            let itemized: f64 = self.cogs_items.iter().map(|i| i.amount).sum();
            if let Some(bad) = self.cogs_items.iter().find(|i| i.amount.is_nan() || i.amount < 0.0) {
                return Err(Error::domain(format!(
                    "{} / {}: CoGS item '{}' is negative",
                    self.product_label, self.region_label, bad.item
                )));
            }
            let tol = COGS_ITEM_TOLERANCE * self.buckets.cogs.abs().max(1.0);
            if (itemized - self.buckets.cogs).abs() > tol {
                return Err(Error::domain(format!(
                    "{} / {}: CoGS items sum to {itemized}, bucket is {}",
                    self.product_label, self.region_label, self.buckets.cogs
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TcoResult {
    pub pre_freight_total: f64,
    pub grand_total: f64,
    /// `forecast[t]` is the grand total after `t` years; `forecast[0]` is today.
    pub forecast: Vec<f64>,
}

impl TcoResult {
    pub fn at_year(&self, year: usize) -> Option<f64> {
        self.forecast.get(year).copied()
    }
}

/// Sum of the six cost buckets.
pub fn total_before_freight(buckets: &CostBuckets) -> Result<f64> {
    buckets.validate()?;
    Ok(buckets.named().iter().map(|(_, v)| v).sum())
}

/// Bucket total plus freight premium, with a one-entry forecast.
pub fn grand_total(scenario: &SourcingScenario) -> Result<TcoResult> {
    scenario.validate()?;
    let pre_freight_total = total_before_freight(&scenario.buckets)?;
    let grand_total = pre_freight_total + scenario.freight_premium;
    Ok(TcoResult {
        pre_freight_total,
        grand_total,
        forecast: vec![grand_total],
    })
}

/// Totals plus a forecast over `years` at the scenario's escalation rate.
pub fn evaluate(scenario: &SourcingScenario, years: usize) -> Result<TcoResult> {
    let mut result = grand_total(scenario)?;
    result.forecast = forecast_tco(result.grand_total, scenario.escalation_rate, years)?;
    Ok(result)
}

/// Compound escalation: `amount × (1 + rate)^t` for `t = 0..=years`.
pub fn forecast_tco(amount: f64, rate: f64, years: usize) -> Result<Vec<f64>> {
    if !rate.is_finite() || rate <= -1.0 {
        return Err(Error::domain(format!("escalation rate {rate} must exceed -1")));
    }
    let years = i32::try_from(years).map_err(|_| Error::domain("forecast horizon too long"))?;
    Ok((0..=years).map(|t| amount * (1.0 + rate).powi(t)).collect())
}

/// Annual rate that grows `now` into `future` over `years`.
pub fn back_solve_rate(now: f64, future: f64, years: usize) -> Result<f64> {
    if !(now > 0.0 && future > 0.0) || !now.is_finite() || !future.is_finite() {
        return Err(Error::domain(format!(
            "back-solving needs positive amounts (now {now}, future {future})"
        )));
    }
    if years == 0 {
        return Err(Error::domain("back-solving needs at least one year"));
    }
    Ok((future / now).powf(1.0 / years as f64) - 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TcoComparison {
    pub product_label: String,
    pub domestic_region: String,
    pub offshore_region: String,
    pub horizon_years: usize,
    pub domestic: TcoResult,
    pub offshore: TcoResult,
    pub domestic_buckets: CostBuckets,
    pub offshore_buckets: CostBuckets,
    pub domestic_freight_premium: f64,
    pub offshore_freight_premium: f64,
    /// Domestic FOB minus offshore FOB: what the offshore price appears to save.
    pub fob_advantage_offshore: f64,
    /// Offshore grand total minus domestic grand total today.
    pub tco_advantage_domestic_now: f64,
    /// Same difference at the end of the horizon.
    pub tco_advantage_domestic_horizon: f64,
}

pub fn compare_scenarios(
    domestic: &SourcingScenario,
    offshore: &SourcingScenario,
    horizon: usize,
) -> Result<TcoComparison> {
    if domestic.product_label != offshore.product_label {
        return Err(Error::input(format!(
            "cannot compare '{}' with '{}': product labels differ",
            domestic.product_label, offshore.product_label
        )));
    }
    let dom = evaluate(domestic, horizon)?;
    let off = evaluate(offshore, horizon)?;
    Ok(TcoComparison {
        product_label: domestic.product_label.clone(),
        domestic_region: domestic.region_label.clone(),
        offshore_region: offshore.region_label.clone(),
        horizon_years: horizon,
        fob_advantage_offshore: domestic.buckets.fob_price - offshore.buckets.fob_price,
        tco_advantage_domestic_now: off.grand_total - dom.grand_total,
        tco_advantage_domestic_horizon: off.forecast[horizon] - dom.forecast[horizon],
        domestic_buckets: domestic.buckets.clone(),
        offshore_buckets: offshore.buckets.clone(),
        domestic_freight_premium: domestic.freight_premium,
        offshore_freight_premium: offshore.freight_premium,
        domestic: dom,
        offshore: off,
    })
}
