//! Reshoring Index: indicator normalization, weighted country scores and the
//! three-factor candidate screen.
//!
//! Raw socioeconomic indicators are rescaled onto a 1-7 scale, averaged into
//! location-factor scores, weighted per industry and compared between the
//! domestic and the offshore country. The offshore score is adjusted for
//! logistics (`L_c`) and lead-time/duty (`C_L`) cost fractions.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCALE_MIN: f64 = 1.0;
pub const SCALE_MAX: f64 = 7.0;
/// Returned for an indicator whose observed range has collapsed to a point.
pub const SCALE_MIDPOINT: f64 = 4.0;
pub const DEFAULT_LEAD_TIME_COST_FRACTION: f64 = 0.03;

/// Rescale a raw indicator value onto the 1-7 scale.
pub fn normalize_indicator(raw: f64, min: f64, max: f64) -> Result<f64> {
    if !(raw.is_finite() && min.is_finite() && max.is_finite()) {
        return Err(Error::domain(format!(
            "non-finite indicator input (raw {raw}, min {min}, max {max})"
        )));
    }
    if min > max {
        return Err(Error::domain(format!(
            "observed minimum {min} exceeds observed maximum {max}"
        )));
    }
    if raw < min || raw > max {
        return Err(Error::domain(format!(
            "raw score {raw} outside observed range [{min}, {max}]"
        )));
    }
    if max == min {
        log::warn!("indicator range collapsed at {min}; using scale midpoint");
        return Ok(SCALE_MIDPOINT);
    }
    let scaled = (SCALE_MAX - SCALE_MIN) * (raw - min) / (max - min) + SCALE_MIN;
    // Rounding can push the endpoints a hair outside the scale.
    Ok(scaled.clamp(SCALE_MIN, SCALE_MAX))
}

/// Raw values of one indicator across countries with the observed range used
/// for normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorSeries {
    pub indicator_id: String,
    pub values: BTreeMap<String, f64>,
    pub observed_min: f64,
    pub observed_max: f64,
}

impl IndicatorSeries {
    pub fn new(
        indicator_id: impl Into<String>,
        observed_min: f64,
        observed_max: f64,
        values: BTreeMap<String, f64>,
    ) -> Result<Self> {
        let series = Self {
            indicator_id: indicator_id.into(),
            values,
            observed_min,
            observed_max,
        };
        series.validate()?;
        Ok(series)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.observed_min.is_finite() && self.observed_max.is_finite()) {
            return Err(Error::domain(format!(
                "indicator '{}': observed range must be finite",
                self.indicator_id
            )));
        }
        if self.observed_min > self.observed_max {
            return Err(Error::domain(format!(
                "indicator '{}': observed_min {} exceeds observed_max {}",
                self.indicator_id, self.observed_min, self.observed_max
            )));
        }
        for (country, &v) in &self.values {
            if !(self.observed_min..=self.observed_max).contains(&v) {
                return Err(Error::domain(format!(
                    "indicator '{}': value {v} for {country} outside [{}, {}]",
                    self.indicator_id, self.observed_min, self.observed_max
                )));
            }
        }
        Ok(())
    }

    /// Normalized score of `country` on this indicator.
    pub fn normalized(&self, country: &str) -> Result<SubfactorScore> {
        let raw = *self.values.get(country).ok_or_else(|| {
            Error::config(format!(
                "indicator '{}' has no value for country '{country}'",
                self.indicator_id
            ))
        })?;
        let value = normalize_indicator(raw, self.observed_min, self.observed_max)
            .map_err(|e| Error::domain(format!("indicator '{}': {e}", self.indicator_id)))?;
        SubfactorScore::new(self.indicator_id.clone(), value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubfactorScore {
    pub subfactor_id: String,
    pub value: f64,
}

impl SubfactorScore {
    pub fn new(subfactor_id: impl Into<String>, value: f64) -> Result<Self> {
        let subfactor_id = subfactor_id.into();
        if !(SCALE_MIN..=SCALE_MAX).contains(&value) {
            return Err(Error::domain(format!(
                "subfactor '{subfactor_id}' score {value} outside [1, 7]"
            )));
        }
        Ok(Self {
            subfactor_id,
            value,
        })
    }
}

/// A location factor and the subfactors (indicators) that feed it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocationFactor {
    pub factor_id: String,
    pub name: String,
    pub subfactor_ids: Vec<String>,
}

impl LocationFactor {
    pub fn new(
        factor_id: impl Into<String>,
        name: impl Into<String>,
        subfactor_ids: Vec<String>,
    ) -> Result<Self> {
        let factor = Self {
            factor_id: factor_id.into(),
            name: name.into(),
            subfactor_ids,
        };
        factor.validate()?;
        Ok(factor)
    }

    pub fn validate(&self) -> Result<()> {
        if self.subfactor_ids.is_empty() {
            return Err(Error::config(format!(
                "location factor '{}' has no subfactors",
                self.factor_id
            )));
        }
        let mut seen = BTreeSet::new();
        for id in &self.subfactor_ids {
            if !seen.insert(id) {
                return Err(Error::config(format!(
                    "location factor '{}' lists subfactor '{id}' twice",
                    self.factor_id
                )));
            }
        }
        Ok(())
    }
}

/// Six-digit NAICS industry code.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct NaicsCode(String);

impl NaicsCode {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl FromStr for NaicsCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.len() == 6 && s.bytes().all(|b| b.is_ascii_digit()) {
            Ok(Self(s.to_owned()))
        } else {
            Err(Error::input(format!(
                "'{s}' is not a 6-digit NAICS code"
            )))
        }
    }
}

impl TryFrom<String> for NaicsCode {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<NaicsCode> for String {
    fn from(code: NaicsCode) -> Self {
        code.0
    }
}

impl fmt::Display for NaicsCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Per-industry factor weights and offshore cost adjustments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndustryProfile {
    pub naics_code: NaicsCode,
    pub weights: BTreeMap<String, f64>,
    /// `L_c`: customs, insurance and freight as a fraction of value.
    pub logistics_cost_fraction: f64,
    /// `C_L`: duty and long-lead-time inventory surcharge.
    pub lead_time_cost_fraction: f64,
}

impl IndustryProfile {
    pub fn new(
        naics_code: NaicsCode,
        weights: BTreeMap<String, f64>,
        logistics_cost_fraction: f64,
        lead_time_cost_fraction: f64,
    ) -> Result<Self> {
        let profile = Self {
            naics_code,
            weights,
            logistics_cost_fraction,
            lead_time_cost_fraction,
        };
        profile.validate()?;
        Ok(profile)
    }

    pub fn validate(&self) -> Result<()> {
        for (factor, &w) in &self.weights {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::domain(format!(
                    "NAICS {}: weight {w} for factor '{factor}' must be finite and non-negative",
                    self.naics_code
                )));
            }
        }
        for (name, v) in [
            ("logistics_cost_fraction", self.logistics_cost_fraction),
            ("lead_time_cost_fraction", self.lead_time_cost_fraction),
        ] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::domain(format!(
                    "NAICS {}: {name} {v} must lie in [0, 1)",
                    self.naics_code
                )));
            }
        }
        self.cost_fraction().map(|_| ())
    }

    /// `L_c + C_L`, checked to stay below one.
    pub fn cost_fraction(&self) -> Result<f64> {
        let total = self.logistics_cost_fraction + self.lead_time_cost_fraction;
        if total >= 1.0 {
            return Err(Error::domain(format!(
                "NAICS {}: L_c + C_L = {total} must be below 1",
                self.naics_code
            )));
        }
        Ok(total)
    }
}

/// Mean of the subfactor scores feeding one location factor.
pub fn location_factor_score(scores: &[SubfactorScore]) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::domain("location factor has no subfactor scores"));
    }
    Ok(scores.iter().map(|s| s.value).sum::<f64>() / scores.len() as f64)
}

fn weighted_mean_score(factor_means: &BTreeMap<String, f64>, profile: &IndustryProfile) -> Result<f64> {
    let missing: Vec<&str> = profile
        .weights
        .keys()
        .filter(|k| !factor_means.contains_key(*k))
        .map(String::as_str)
        .collect();
    let extra: Vec<&str> = factor_means
        .keys()
        .filter(|k| !profile.weights.contains_key(*k))
        .map(String::as_str)
        .collect();
    if !missing.is_empty() || !extra.is_empty() {
        return Err(Error::config(format!(
            "factor means do not match weights of NAICS {}: missing {missing:?}, extra {extra:?}",
            profile.naics_code
        )));
    }
    if profile.weights.is_empty() {
        return Err(Error::config(format!(
            "NAICS {} has no location factor weights",
            profile.naics_code
        )));
    }
    let m = profile.weights.len() as f64;
    let sum: f64 = profile
        .weights
        .iter()
        .map(|(factor, w)| factor_means[factor] * w)
        .sum();
    Ok(sum / m)
}

/// Weighted location score of the domestic country.
pub fn domestic_score(factor_means: &BTreeMap<String, f64>, profile: &IndustryProfile) -> Result<f64> {
    weighted_mean_score(factor_means, profile)
}

/// How the logistics and lead-time fractions enter the offshore score.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OffshoreAdjustment {
    /// `base × (1 − (L_c + C_L))`: higher logistics cost lowers the offshore
    /// score and raises the Reshoring Index.
    #[default]
    Attenuate,
    /// `base / (1 − (L_c + C_L))`.
    LiteralDivide,
}

impl FromStr for OffshoreAdjustment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "attenuate" => Ok(Self::Attenuate),
            "literal_divide" => Ok(Self::LiteralDivide),
            other => Err(Error::input(format!(
                "unknown offshore adjustment '{other}' (expected attenuate or literal_divide)"
            ))),
        }
    }
}

/// Weighted location score of the offshore country, adjusted for logistics.
pub fn offshore_score(
    factor_means: &BTreeMap<String, f64>,
    profile: &IndustryProfile,
    adjustment: OffshoreAdjustment,
) -> Result<f64> {
    let keep = 1.0 - profile.cost_fraction()?;
    let base = weighted_mean_score(factor_means, profile)?;
    Ok(match adjustment {
        OffshoreAdjustment::Attenuate => base * keep,
        OffshoreAdjustment::LiteralDivide => base / keep,
    })
}

/// Percentage by which the domestic score exceeds the offshore score.
pub fn reshoring_index(us_score: f64, offshore_score: f64) -> Result<f64> {
    if offshore_score.is_nan() || offshore_score <= 0.0 {
        return Err(Error::domain(format!(
            "offshore score {offshore_score} must be positive"
        )));
    }
    Ok((us_score - offshore_score) / offshore_score * 100.0)
}

/// Location-factor means for `country`, computed from the raw indicators.
pub fn factor_means(
    factors: &[LocationFactor],
    indicators: &BTreeMap<String, IndicatorSeries>,
    country: &str,
) -> Result<BTreeMap<String, f64>> {
    let mut means = BTreeMap::new();
    for factor in factors {
        let scores = factor
            .subfactor_ids
            .iter()
            .map(|id| {
                indicators
                    .get(id)
                    .ok_or_else(|| {
                        Error::config(format!(
                            "factor '{}' references unknown indicator '{id}'",
                            factor.factor_id
                        ))
                    })?
                    .normalized(country)
            })
            .collect::<Result<Vec<_>>>()?;
        means.insert(factor.factor_id.clone(), location_factor_score(&scores)?);
    }
    Ok(means)
}

/// Reshoring Index of one industry, with the intermediate scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiEvaluation {
    pub naics_code: NaicsCode,
    pub domestic_means: BTreeMap<String, f64>,
    pub offshore_means: BTreeMap<String, f64>,
    pub domestic_score: f64,
    pub offshore_score: f64,
    pub ri_percent: f64,
}

pub fn evaluate_profile(
    profile: &IndustryProfile,
    factors: &[LocationFactor],
    indicators: &BTreeMap<String, IndicatorSeries>,
    domestic_country: &str,
    offshore_country: &str,
    adjustment: OffshoreAdjustment,
) -> Result<RiEvaluation> {
    let domestic_means = factor_means(factors, indicators, domestic_country)?;
    let offshore_means = factor_means(factors, indicators, offshore_country)?;
    let domestic = domestic_score(&domestic_means, profile)?;
    let offshore = offshore_score(&offshore_means, profile, adjustment)?;
    Ok(RiEvaluation {
        naics_code: profile.naics_code.clone(),
        ri_percent: reshoring_index(domestic, offshore)?,
        domestic_means,
        offshore_means,
        domestic_score: domestic,
        offshore_score: offshore,
    })
}

// ---------------------------------------------------------------------------
// Screening

/// One product group with its published RI, trade and logistics figures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeningRow {
    pub label: String,
    pub naics_code: NaicsCode,
    pub ri_percent: f64,
    /// Imports minus exports in units of $100,000; positive favors reshoring.
    pub trade_deficit_100k: f64,
    pub logistics_cost_percent: f64,
    /// Share of the total tariff cost carried by this group.
    pub tariff_share_percent: f64,
}

impl ScreeningRow {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("ri_percent", self.ri_percent),
            ("trade_deficit_100k", self.trade_deficit_100k),
            ("logistics_cost_percent", self.logistics_cost_percent),
            ("tariff_share_percent", self.tariff_share_percent),
        ] {
            if !v.is_finite() {
                return Err(Error::domain(format!("{}: {name} is not finite", self.label)));
            }
        }
        if self.tariff_share_percent < 0.0 {
            return Err(Error::domain(format!(
                "{}: tariff share {} is negative",
                self.label, self.tariff_share_percent
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankKey {
    #[default]
    TariffShare,
    Ri,
    /// Mean of RI, trade deficit and logistics cost, each rescaled to 1-7
    /// across the shortlist.
    Composite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScreeningPolicy {
    pub min_ri_percent: f64,
    pub min_logistics_percent: f64,
    pub require_positive_deficit: bool,
    pub rank_key: RankKey,
}

impl Default for ScreeningPolicy {
    fn default() -> Self {
        Self {
            min_ri_percent: 22.0,
            min_logistics_percent: 7.0,
            require_positive_deficit: true,
            rank_key: RankKey::TariffShare,
        }
    }
}

impl ScreeningPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.min_ri_percent.is_finite() && self.min_logistics_percent.is_finite()) {
            return Err(Error::config("screening thresholds must be finite"));
        }
        Ok(())
    }

    /// First criterion the row fails, if any.
    pub fn check(&self, row: &ScreeningRow) -> Option<ExclusionReason> {
        if row.ri_percent < self.min_ri_percent {
            Some(ExclusionReason::RiBelowThreshold)
        } else if self.require_positive_deficit && row.trade_deficit_100k <= 0.0 {
            Some(ExclusionReason::TradeDeficitNotPositive)
        } else if row.logistics_cost_percent < self.min_logistics_percent {
            Some(ExclusionReason::LogisticsBelowThreshold)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionReason {
    RiBelowThreshold,
    TradeDeficitNotPositive,
    LogisticsBelowThreshold,
}

impl fmt::Display for ExclusionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::RiBelowThreshold => "RI below threshold",
            Self::TradeDeficitNotPositive => "trade deficit not positive",
            Self::LogisticsBelowThreshold => "logistics cost below threshold",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcludedRow {
    pub row: ScreeningRow,
    pub reason: ExclusionReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeningReport {
    pub policy: ScreeningPolicy,
    pub shortlist: Vec<ScreeningRow>,
    pub excluded: Vec<ExcludedRow>,
    pub tariff_coverage_percent: f64,
}

impl ScreeningReport {
    pub fn reason_for(&self, label: &str) -> Option<ExclusionReason> {
        self.excluded
            .iter()
            .find(|e| e.row.label == label)
            .map(|e| e.reason)
    }
}

fn composite_scores(rows: &[ScreeningRow]) -> Vec<f64> {
    let columns: [fn(&ScreeningRow) -> f64; 3] = [
        |r| r.ri_percent,
        |r| r.trade_deficit_100k,
        |r| r.logistics_cost_percent,
    ];
    let mut totals = vec![0.0; rows.len()];
    for column in columns {
        let values: Vec<f64> = rows.iter().map(column).collect();
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for (total, v) in totals.iter_mut().zip(&values) {
            *total += if max > min {
                (SCALE_MAX - SCALE_MIN) * (v - min) / (max - min) + SCALE_MIN
            } else {
                SCALE_MIDPOINT
            };
        }
    }
    totals.iter().map(|t| t / columns.len() as f64).collect()
}

/// Split rows into a ranked shortlist and an excluded list.
pub fn screen_candidates(rows: &[ScreeningRow], policy: &ScreeningPolicy) -> Result<ScreeningReport> {
    policy.validate()?;
    let mut labels = BTreeSet::new();
    for row in rows {
        if !labels.insert(row.label.as_str()) {
            return Err(Error::input(format!("duplicate screening label '{}'", row.label)));
        }
        row.validate()?;
    }

    let mut shortlist = Vec::new();
    let mut excluded = Vec::new();
    for row in rows {
        match policy.check(row) {
            None => shortlist.push(row.clone()),
            Some(reason) => excluded.push(ExcludedRow {
                row: row.clone(),
                reason,
            }),
        }
    }

    let keys: Vec<f64> = match policy.rank_key {
        RankKey::TariffShare => shortlist.iter().map(|r| r.tariff_share_percent).collect(),
        RankKey::Ri => shortlist.iter().map(|r| r.ri_percent).collect(),
        RankKey::Composite => composite_scores(&shortlist),
    };
    let mut order: Vec<usize> = (0..shortlist.len()).collect();
    order.sort_by(|&a, &b| {
        keys[b]
            .partial_cmp(&keys[a])
            .unwrap_or(Ordering::Equal)
            .then_with(|| shortlist[a].label.cmp(&shortlist[b].label))
    });
    let shortlist: Vec<ScreeningRow> = order.into_iter().map(|i| shortlist[i].clone()).collect();
    let tariff_coverage_percent = shortlist.iter().map(|r| r.tariff_share_percent).sum();

    Ok(ScreeningReport {
        policy: policy.clone(),
        shortlist,
        excluded,
        tariff_coverage_percent,
    })
}
