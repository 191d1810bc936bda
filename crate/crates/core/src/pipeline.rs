//! Three-stage reshoring decision: RI screen, then TCO comparison, then the
//! transport-emission check.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ghg::{mode_totals, reduction_report, FactorTable, GwpSet, TransportLeg};
use crate::ri::{screen_candidates, NaicsCode, ScreeningPolicy, ScreeningRow};
use crate::tco::{compare_scenarios, SourcingScenario};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub screening_policy: ScreeningPolicy,
    pub horizon_years: usize,
    /// A negative CO₂e reduction vetoes reshoring, and missing leg data
    /// yields `insufficient_data`.
    pub require_ghg_non_negative: bool,
    /// Also compute TCO and GHG figures for products that failed the screen.
    pub evaluate_excluded: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            screening_policy: ScreeningPolicy::default(),
            horizon_years: 5,
            require_ghg_non_negative: true,
            evaluate_excluded: false,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.screening_policy.validate()?;
        if self.horizon_years < 1 {
            return Err(Error::config("horizon_years must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Recommendation {
    Reshore,
    RetainOffshore,
    InsufficientData,
}

impl fmt::Display for Recommendation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Reshore => "reshore",
            Self::RetainOffshore => "retain_offshore",
            Self::InsufficientData => "insufficient_data",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenOutcome {
    pub passed: bool,
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub product_label: String,
    pub naics_code: NaicsCode,
    pub screened: ScreenOutcome,
    pub tco_advantage_now: Option<f64>,
    pub tco_advantage_horizon: Option<f64>,
    /// `None` when no leg data exists or the offshore baseline is zero.
    pub ghg_co2e_reduction_percent: Option<f64>,
    pub recommendation: Recommendation,
    pub diagnostics: Vec<String>,
}

/// Domestic and offshore scenario for one product.
pub type TcoPair = (SourcingScenario, SourcingScenario);
/// Offshore and reshored leg lists for one product.
pub type LegPair = (Vec<TransportLeg>, Vec<TransportLeg>);

struct GhgOutcome {
    percent: Option<f64>,
    acceptable: bool,
}

fn ghg_stage(pair: &LegPair, factors: &FactorTable, gwp: &GwpSet) -> Result<GhgOutcome> {
    let offshore = mode_totals(&pair.0, factors)?.with_co2e(gwp);
    let reshore = mode_totals(&pair.1, factors)?.with_co2e(gwp);
    let reduction = reduction_report(&offshore, &reshore);
    let off = offshore.co2e_tonnes.unwrap_or(0.0);
    let re = reshore.co2e_tonnes.unwrap_or(0.0);
    Ok(GhgOutcome {
        percent: reduction.co2e_percent,
        acceptable: re <= off,
    })
}

pub fn run_pipeline(
    rows: &[ScreeningRow],
    tco_pairs: &BTreeMap<String, TcoPair>,
    ghg_pairs: &BTreeMap<String, LegPair>,
    factors: &FactorTable,
    gwp: &GwpSet,
    config: &PipelineConfig,
) -> Result<Vec<DecisionRecord>> {
    config.validate()?;
    gwp.validate()?;
    let screen = screen_candidates(rows, &config.screening_policy)?;

    let mut records: Vec<DecisionRecord> = rows
        .iter()
        .map(|row| {
            let exclusion = screen.reason_for(&row.label);
            let mut record = DecisionRecord {
                product_label: row.label.clone(),
                naics_code: row.naics_code.clone(),
                screened: ScreenOutcome {
                    passed: exclusion.is_none(),
                    reason: exclusion.map(|r| format!("screen: {r}")),
                },
                tco_advantage_now: None,
                tco_advantage_horizon: None,
                ghg_co2e_reduction_percent: None,
                recommendation: Recommendation::RetainOffshore,
                diagnostics: Vec::new(),
            };
            if record.screened.passed || config.evaluate_excluded {
                evaluate_stages(&mut record, tco_pairs, ghg_pairs, factors, gwp, config);
            }
            if !record.screened.passed {
                record.recommendation = Recommendation::RetainOffshore;
            }
            record
        })
        .collect();
    records.sort_by(|a, b| a.product_label.cmp(&b.product_label));
    Ok(records)
}

fn evaluate_stages(
    record: &mut DecisionRecord,
    tco_pairs: &BTreeMap<String, TcoPair>,
    ghg_pairs: &BTreeMap<String, LegPair>,
    factors: &FactorTable,
    gwp: &GwpSet,
    config: &PipelineConfig,
) {
    let label = record.product_label.clone();
    let Some((domestic, offshore)) = tco_pairs.get(&label) else {
        record.diagnostics.push(format!("tco: no scenario pair for '{label}'"));
        record.recommendation = Recommendation::InsufficientData;
        return;
    };
    let comparison = match compare_scenarios(domestic, offshore, config.horizon_years) {
        Ok(c) => c,
        Err(e) => {
            record.diagnostics.push(format!("tco: {e}"));
            record.recommendation = Recommendation::InsufficientData;
            return;
        }
    };
    record.tco_advantage_now = Some(comparison.tco_advantage_domestic_now);
    record.tco_advantage_horizon = Some(comparison.tco_advantage_domestic_horizon);
    let economic = comparison.tco_advantage_domestic_now > 0.0;
    if !economic {
        record.diagnostics.push("tco: no domestic advantage today".into());
    }

    let ghg = match ghg_pairs.get(&label) {
        Some(pair) => match ghg_stage(pair, factors, gwp) {
            Ok(outcome) => Some(outcome),
            Err(e) => {
                record.diagnostics.push(format!("ghg: {e}"));
                record.recommendation = Recommendation::InsufficientData;
                return;
            }
        },
        None => None,
    };
    record.ghg_co2e_reduction_percent = ghg.as_ref().and_then(|g| g.percent);

    record.recommendation = if !economic {
        Recommendation::RetainOffshore
    } else {
        match (ghg, config.require_ghg_non_negative) {
            (_, false) => Recommendation::Reshore,
            (Some(g), true) if g.acceptable => Recommendation::Reshore,
            (Some(_), true) => {
                record.diagnostics.push("ghg: reshoring increases CO2e".into());
                Recommendation::RetainOffshore
            }
            (None, true) => {
                record.diagnostics.push(format!("ghg: no transport leg data for '{label}'"));
                Recommendation::InsufficientData
            }
        }
    };
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ghg::{Distance, EmissionFactor, Gas, Mode};
    use crate::tco::CostBuckets;

    fn row(label: &str, ri: f64, deficit: f64, logistics: f64, tariff: f64) -> ScreeningRow {
        ScreeningRow {
            label: label.into(),
            naics_code: "331523".parse().unwrap(),
            ri_percent: ri,
            trade_deficit_100k: deficit,
            logistics_cost_percent: logistics,
            tariff_share_percent: tariff,
        }
    }

    fn scenario(product: &str, region: &str, fob: f64, premium: f64) -> SourcingScenario {
        SourcingScenario {
            product_label: product.into(),
            region_label: region.into(),
            buckets: CostBuckets { fob_price: fob, ..Default::default() },
            freight_premium: premium,
            escalation_rate: 0.02,
            cogs_items: Vec::new(),
        }
    }

    fn factors() -> FactorTable {
        FactorTable::new(Mode::ALL.iter().flat_map(|&mode| {
            Gas::ALL.iter().map(move |&gas| EmissionFactor { mode, gas, kg_per_tonne_km: 0.01 })
        }))
        .unwrap()
    }

    fn legs(road_km: f64, sea_km: f64) -> Vec<TransportLeg> {
        let mut out = vec![TransportLeg {
            item_id: "road".into(),
            mode: Mode::Road,
            mass_tonnes: 1.0,
            distance: Distance::km(road_km),
        }];
        if sea_km > 0.0 {
            out.push(TransportLeg {
                item_id: "sea".into(),
                mode: Mode::Sea,
                mass_tonnes: 1.0,
                distance: Distance::km(sea_km),
            });
        }
        out
    }

    fn run(
        rows: &[ScreeningRow],
        tco: &[(&str, f64, f64)],
        ghg: &[(&str, LegPair)],
        config: &PipelineConfig,
    ) -> Vec<DecisionRecord> {
        let tco_pairs = tco
            .iter()
            .map(|(p, us, cn)| (p.to_string(), (scenario(p, "US", *us, 0.0), scenario(p, "China", *cn, 0.67))))
            .collect();
        let ghg_pairs = ghg.iter().map(|(p, l)| (p.to_string(), l.clone())).collect();
        run_pipeline(rows, &tco_pairs, &ghg_pairs, &factors(), &GwpSet::default(), config).unwrap()
    }

    #[test]
    fn screened_out_product_is_retained_with_reason() {
        let rows = [row("Plastics", 23.0, -100.0, 10.26, 0.27)];
        let out = run(&rows, &[], &[], &PipelineConfig::default());
        assert_eq!(out[0].recommendation, Recommendation::RetainOffshore);
        assert_eq!(out[0].screened.reason.as_deref(), Some("screen: trade deficit not positive"));
    }

    #[test]
    fn reshore_when_all_stages_pass() {
        let rows = [row("Casting", 25.0, 55.0, 9.0, 41.13)];
        let out = run(&rows, &[("Casting", 4.5, 5.48)], &[("Casting", (legs(900.0, 11000.0), legs(300.0, 0.0)))], &PipelineConfig::default());
        assert_eq!(out[0].recommendation, Recommendation::Reshore);
        assert!(out[0].ghg_co2e_reduction_percent.unwrap() > 0.0);
    }

    #[test]
    fn no_tco_advantage_retains() {
        let rows = [row("Casting", 25.0, 55.0, 9.0, 41.13)];
        // Offshore 3.0 + 0.67 premium < 4.5 domestic.
        let out = run(&rows, &[("Casting", 4.5, 3.0)], &[("Casting", (legs(900.0, 11000.0), legs(300.0, 0.0)))], &PipelineConfig::default());
        assert_eq!(out[0].recommendation, Recommendation::RetainOffshore);
        assert!(out[0].tco_advantage_now.unwrap() <= 0.0);
    }

    #[test]
    fn missing_tco_is_insufficient_data() {
        let rows = [row("Casting", 25.0, 55.0, 9.0, 41.13)];
        let out = run(&rows, &[], &[], &PipelineConfig::default());
        assert_eq!(out[0].recommendation, Recommendation::InsufficientData);
        assert!(out[0].diagnostics[0].contains("tco"));
    }

    #[test]
    fn ghg_flag_controls_missing_and_negative_data() {
        let rows = [row("Casting", 25.0, 55.0, 9.0, 41.13)];
        let on = PipelineConfig::default();
        let off = PipelineConfig { require_ghg_non_negative: false, ..PipelineConfig::default() };

        let out = run(&rows, &[("Casting", 4.5, 5.48)], &[], &on);
        assert_eq!(out[0].recommendation, Recommendation::InsufficientData);
        let out = run(&rows, &[("Casting", 4.5, 5.48)], &[], &off);
        assert_eq!(out[0].recommendation, Recommendation::Reshore);

        let worse = [("Casting", (legs(100.0, 0.0), legs(5000.0, 0.0)))];
        let out = run(&rows, &[("Casting", 4.5, 5.48)], &worse, &on);
        assert_eq!(out[0].recommendation, Recommendation::RetainOffshore);
        assert!(out[0].ghg_co2e_reduction_percent.unwrap() < 0.0);
        let out = run(&rows, &[("Casting", 4.5, 5.48)], &worse, &off);
        assert_eq!(out[0].recommendation, Recommendation::Reshore);
    }

    #[test]
    fn evaluate_excluded_fills_numbers_but_keeps_verdict() {
        let rows = [row("Rubber", 22.0, -50.0, 9.16, 1.56)];
        let config = PipelineConfig { evaluate_excluded: true, ..PipelineConfig::default() };
        let out = run(&rows, &[("Rubber", 1.0, 2.0)], &[("Rubber", (legs(900.0, 11000.0), legs(300.0, 0.0)))], &config);
        assert_eq!(out[0].recommendation, Recommendation::RetainOffshore);
        assert!(out[0].tco_advantage_now.is_some());
        assert!(out[0].ghg_co2e_reduction_percent.is_some());
    }

    #[test]
    fn records_sorted_and_complete() {
        let rows = [
            row("Stamping", 30.0, 14.0, 12.89, 25.31),
            row("Casting", 25.0, 55.0, 9.0, 41.13),
            row("Mechanical", 20.0, 0.009, 5.25, 0.9),
        ];
        let out = run(&rows, &[], &[], &PipelineConfig::default());
        let labels: Vec<&str> = out.iter().map(|r| r.product_label.as_str()).collect();
        assert_eq!(labels, ["Casting", "Mechanical", "Stamping"]);
    }

    #[test]
    fn zero_horizon_rejected() {
        let config = PipelineConfig { horizon_years: 0, ..PipelineConfig::default() };
        assert!(run_pipeline(&[], &BTreeMap::new(), &BTreeMap::new(), &factors(), &GwpSet::default(), &config).is_err());
    }
}
