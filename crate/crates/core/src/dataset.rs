//! Dataset ingestion: one CSV file per dataset kind plus a JSON manifest.
//!
//! Loading is all-or-nothing. Every problem found is collected as a
//! [`Diagnostic`] carrying file, row and column; if any exist the load fails
//! with [`Error::Dataset`] and no partial bundle is returned.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Diagnostic, Diagnostics, Error, Result};
use crate::ghg::{Distance, DistanceUnit, EmissionFactor, FactorTable, Gas, GwpSet, Mode, TransportLeg};
use crate::pipeline::{LegPair, PipelineConfig, TcoPair};
use crate::ri::{
    IndicatorSeries, IndustryProfile, LocationFactor, NaicsCode, OffshoreAdjustment, ScreeningPolicy,
    ScreeningRow, DEFAULT_LEAD_TIME_COST_FRACTION,
};
use crate::tco::{CogsItem, CostBuckets, SourcingScenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DatasetKind {
    Manifest,
    Indicators,
    Factors,
    Profiles,
    Weights,
    Screening,
    Scenarios,
    CogsItems,
    Legs,
    EmissionFactors,
}

impl DatasetKind {
    pub const ALL: [DatasetKind; 10] = [
        DatasetKind::Manifest,
        DatasetKind::Indicators,
        DatasetKind::Factors,
        DatasetKind::Profiles,
        DatasetKind::Weights,
        DatasetKind::Screening,
        DatasetKind::Scenarios,
        DatasetKind::CogsItems,
        DatasetKind::Legs,
        DatasetKind::EmissionFactors,
    ];

    pub fn file_name(self) -> &'static str {
        match self {
            DatasetKind::Manifest => "manifest.json",
            DatasetKind::Indicators => "indicators.csv",
            DatasetKind::Factors => "factors.csv",
            DatasetKind::Profiles => "profiles.csv",
            DatasetKind::Weights => "weights.csv",
            DatasetKind::Screening => "screening.csv",
            DatasetKind::Scenarios => "scenarios.csv",
            DatasetKind::CogsItems => "cogs_items.csv",
            DatasetKind::Legs => "legs.csv",
            DatasetKind::EmissionFactors => "emission_factors.csv",
        }
    }

    fn columns(self) -> (&'static [&'static str], &'static [&'static str]) {
        match self {
            DatasetKind::Manifest => (&[], &[]),
            DatasetKind::Indicators => (&["indicator_id", "country", "value", "observed_min", "observed_max"], &[]),
            DatasetKind::Factors => (&["factor_id", "name", "subfactor_id"], &[]),
            DatasetKind::Profiles => (&["naics_code", "logistics_cost_fraction"], &["lead_time_cost_fraction"]),
            DatasetKind::Weights => (&["naics_code", "factor_id", "weight"], &[]),
            DatasetKind::Screening => (
                &[
                    "label",
                    "naics_code",
                    "ri_percent",
                    "trade_deficit_100k",
                    "logistics_cost_percent",
                    "tariff_share_percent",
                ],
                &[],
            ),
            DatasetKind::Scenarios => (
                &[
                    "product_label",
                    "region_label",
                    "role",
                    "fob_price",
                    "cogs",
                    "other_hard",
                    "freight_premium",
                    "escalation_rate",
                ],
                &["risk", "strategic", "green"],
            ),
            DatasetKind::CogsItems => (&["product_label", "role", "item", "amount"], &[]),
            DatasetKind::Legs => (
                &["product_label", "scenario", "item_id", "mode", "mass_tonnes", "distance", "distance_unit"],
                &[],
            ),
            DatasetKind::EmissionFactors => (&["mode", "gas", "kg_per_tonne_km"], &[]),
        }
    }
}

impl fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.file_name())
    }
}

/// Run-wide settings bound alongside the tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Manifest {
    pub domestic_country: String,
    pub offshore_country: String,
    pub offshore_adjustment: OffshoreAdjustment,
    pub gwp: GwpSet,
    pub screening_policy: ScreeningPolicy,
    pub horizon_years: usize,
    pub require_ghg_non_negative: bool,
    pub evaluate_excluded: bool,
}

impl Default for Manifest {
    fn default() -> Self {
        let pipeline = PipelineConfig::default();
        Self {
            domestic_country: "US".into(),
            offshore_country: "CN".into(),
            offshore_adjustment: OffshoreAdjustment::default(),
            gwp: GwpSet::default(),
            screening_policy: pipeline.screening_policy,
            horizon_years: pipeline.horizon_years,
            require_ghg_non_negative: pipeline.require_ghg_non_negative,
            evaluate_excluded: pipeline.evaluate_excluded,
        }
    }
}

impl Manifest {
    pub fn pipeline_config(&self) -> PipelineConfig {
        PipelineConfig {
            screening_policy: self.screening_policy.clone(),
            horizon_years: self.horizon_years,
            require_ghg_non_negative: self.require_ghg_non_negative,
            evaluate_excluded: self.evaluate_excluded,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioRole {
    Domestic,
    Offshore,
}

impl FromStr for ScenarioRole {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "domestic" => Ok(Self::Domestic),
            "offshore" => Ok(Self::Offshore),
            other => Err(Error::input(format!(
                "unknown role '{other}' (allowed: domestic, offshore)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LegScenario {
    Offshore,
    Reshore,
}

impl FromStr for LegScenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "offshore" => Ok(Self::Offshore),
            "reshore" => Ok(Self::Reshore),
            other => Err(Error::input(format!(
                "unknown scenario '{other}' (allowed: offshore, reshore)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRecord {
    pub role: ScenarioRole,
    pub scenario: SourcingScenario,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LegRecord {
    pub product_label: String,
    pub scenario: LegScenario,
    pub leg: TransportLeg,
}

/// A fully validated dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetBundle {
    pub manifest: Manifest,
    pub indicators: Vec<IndicatorSeries>,
    pub factors: Vec<LocationFactor>,
    pub profiles: Vec<IndustryProfile>,
    pub screening_rows: Vec<ScreeningRow>,
    pub scenarios: Vec<ScenarioRecord>,
    pub legs: Vec<LegRecord>,
    pub emission_factors: FactorTable,
    /// Where each loaded kind came from.
    pub sources: BTreeMap<DatasetKind, PathBuf>,
}

impl DatasetBundle {
    pub fn gwp(&self) -> &GwpSet {
        &self.manifest.gwp
    }

    /// Fail unless every listed kind was loaded.
    pub fn require(&self, kinds: &[DatasetKind]) -> Result<()> {
        let missing: Vec<Diagnostic> = kinds
            .iter()
            .filter(|k| !self.sources.contains_key(k))
            .map(|k| Diagnostic::new(k.file_name(), "required file is missing"))
            .collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Error::Dataset(Diagnostics(missing)))
        }
    }

    pub fn indicator_map(&self) -> BTreeMap<String, IndicatorSeries> {
        self.indicators
            .iter()
            .map(|s| (s.indicator_id.clone(), s.clone()))
            .collect()
    }

    /// Domestic and offshore scenario per product.
    pub fn tco_pairs(&self) -> BTreeMap<String, TcoPair> {
        let mut domestic = BTreeMap::new();
        let mut offshore = BTreeMap::new();
        for record in &self.scenarios {
            let target = match record.role {
                ScenarioRole::Domestic => &mut domestic,
                ScenarioRole::Offshore => &mut offshore,
            };
            target.insert(record.scenario.product_label.clone(), record.scenario.clone());
        }
        domestic
            .into_iter()
            .filter_map(|(label, d)| offshore.remove(&label).map(|o| (label, (d, o))))
            .collect()
    }

    /// Offshore and reshored legs per product.
    pub fn ghg_pairs(&self) -> BTreeMap<String, LegPair> {
        let mut pairs: BTreeMap<String, LegPair> = BTreeMap::new();
        for record in &self.legs {
            let pair = pairs.entry(record.product_label.clone()).or_default();
            match record.scenario {
                LegScenario::Offshore => pair.0.push(record.leg.clone()),
                LegScenario::Reshore => pair.1.push(record.leg.clone()),
            }
        }
        pairs
    }
}

/// Load whichever standard files exist in `dir`.
pub fn load_dir(dir: &Path) -> Result<DatasetBundle> {
    if !dir.is_dir() {
        return Err(Error::Dataset(Diagnostics(vec![Diagnostic::new(
            dir.display().to_string(),
            "data directory does not exist",
        )])));
    }
    let paths = DatasetKind::ALL
        .iter()
        .map(|&k| (k, dir.join(k.file_name())))
        .filter(|(_, p)| p.exists())
        .collect();
    load_dataset(&paths)
}

/// Load and validate the given files. Kinds not listed are treated as absent.
pub fn load_dataset(paths: &BTreeMap<DatasetKind, PathBuf>) -> Result<DatasetBundle> {
    let mut loader = Loader::default();
    let manifest = match paths.get(&DatasetKind::Manifest) {
        Some(p) => loader.manifest(p).unwrap_or_default(),
        None => Manifest::default(),
    };
    let tables: BTreeMap<DatasetKind, CsvTable> = paths
        .iter()
        .filter(|(k, _)| **k != DatasetKind::Manifest)
        .filter_map(|(&k, p)| loader.read_csv(k, p).map(|t| (k, t)))
        .collect();

    let emission_factors = tables
        .get(&DatasetKind::EmissionFactors)
        .map(|t| loader.emission_factors(t))
        .unwrap_or_default();
    let indicators = tables
        .get(&DatasetKind::Indicators)
        .map(|t| loader.indicators(t))
        .unwrap_or_default();
    let factors = tables
        .get(&DatasetKind::Factors)
        .map(|t| loader.factors(t, tables.contains_key(&DatasetKind::Indicators).then_some(&indicators)))
        .unwrap_or_default();
    let profiles = loader.profiles(&tables, &factors);
    let screening_rows = tables
        .get(&DatasetKind::Screening)
        .map(|t| loader.screening(t))
        .unwrap_or_default();
    let labels: Option<BTreeSet<String>> = tables
        .contains_key(&DatasetKind::Screening)
        .then(|| screening_rows.iter().map(|r| r.label.clone()).collect());
    let scenarios = loader.scenarios(&tables, labels.as_ref());
    let legs = tables
        .get(&DatasetKind::Legs)
        .map(|t| {
            loader.legs(
                t,
                labels.as_ref(),
                tables.contains_key(&DatasetKind::EmissionFactors).then_some(&emission_factors),
            )
        })
        .unwrap_or_default();

    if let Err(e) = manifest.pipeline_config().validate() {
        loader.push(Diagnostic::new(DatasetKind::Manifest.file_name(), e.to_string()));
    }

    if !loader.diagnostics.is_empty() {
        return Err(Error::Dataset(Diagnostics(loader.diagnostics)));
    }
    Ok(DatasetBundle {
        manifest,
        indicators,
        factors,
        profiles,
        screening_rows,
        scenarios,
        legs,
        emission_factors,
        sources: paths.clone(),
    })
}

struct CsvTable {
    file: String,
    columns: HashMap<String, usize>,
    rows: Vec<(usize, csv::StringRecord)>,
}

struct Row<'a> {
    file: &'a str,
    line: usize,
    columns: &'a HashMap<String, usize>,
    record: &'a csv::StringRecord,
}

impl Row<'_> {
    fn diag(&self, column: &str, message: impl Into<String>) -> Diagnostic {
        Diagnostic::new(self.file, message).at_row(self.line).at_column(column)
    }

    fn raw(&self, column: &str) -> Option<&str> {
        self.columns
            .get(column)
            .and_then(|&i| self.record.get(i))
            .map(str::trim)
    }

    fn text(&self, column: &str, diags: &mut Vec<Diagnostic>) -> Option<String> {
        match self.raw(column) {
            Some(v) if !v.is_empty() => Some(v.to_owned()),
            _ => {
                diags.push(self.diag(column, "value is empty"));
                None
            }
        }
    }

    fn parse<T>(&self, column: &str, diags: &mut Vec<Diagnostic>) -> Option<T>
    where
        T: FromStr<Err = Error>,
    {
        let text = self.text(column, diags)?;
        match text.parse() {
            Ok(v) => Some(v),
            Err(Error::Input(msg)) | Err(Error::Domain(msg)) | Err(Error::Config(msg)) => {
                diags.push(self.diag(column, msg));
                None
            }
            Err(e) => {
                diags.push(self.diag(column, e.to_string()));
                None
            }
        }
    }

    fn decimal(&self, column: &str, diags: &mut Vec<Diagnostic>) -> Option<f64> {
        let text = self.text(column, diags)?;
        match parse_decimal(&text) {
            Some(v) => Some(v),
            None => {
                diags.push(self.diag(column, format!("'{text}' is not a plain decimal number")));
                None
            }
        }
    }

    /// A decimal that must be >= 0.
    fn non_negative(&self, column: &str, diags: &mut Vec<Diagnostic>) -> Option<f64> {
        let v = self.decimal(column, diags)?;
        if v < 0.0 {
            diags.push(self.diag(column, format!("value {v} must not be negative")));
            return None;
        }
        Some(v)
    }

    /// Optional decimal column; empty or absent yields `default`.
    fn decimal_or(&self, column: &str, default: f64, diags: &mut Vec<Diagnostic>) -> Option<f64> {
        match self.raw(column) {
            None | Some("") => Some(default),
            Some(_) => self.decimal(column, diags),
        }
    }
}

/// Plain decimal notation: optional sign, digits, optional fraction.
/// No exponents, no thousands separators, no `inf`/`NaN`.
pub fn parse_decimal(text: &str) -> Option<f64> {
    let digits = text.strip_prefix(['+', '-']).unwrap_or(text);
    let (int, frac) = match digits.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (digits, None),
    };
    let all_digits = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
    let valid = all_digits(int)
        && frac.is_none_or(all_digits)
        && (!int.is_empty() || frac.is_some_and(|f| !f.is_empty()));
    if !valid {
        return None;
    }
    text.parse().ok()
}

#[derive(Default)]
struct Loader {
    diagnostics: Vec<Diagnostic>,
}

impl Loader {
    fn push(&mut self, d: Diagnostic) {
        self.diagnostics.push(d);
    }

    fn manifest(&mut self, path: &Path) -> Option<Manifest> {
        let file = path.display().to_string();
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                self.push(Diagnostic::new(file, format!("cannot read: {e}")));
                return None;
            }
        };
        match serde_json::from_str::<Manifest>(&text) {
            Ok(m) => Some(m),
            Err(e) => {
                self.push(
                    Diagnostic::new(file, format!("invalid manifest: {e}"))
                        .at_row(e.line())
                        .at_column(format!("char {}", e.column())),
                );
                None
            }
        }
    }

    fn read_csv(&mut self, kind: DatasetKind, path: &Path) -> Option<CsvTable> {
        let file = path.display().to_string();
        let mut reader = match csv::ReaderBuilder::new().has_headers(true).flexible(true).from_path(path) {
            Ok(r) => r,
            Err(e) => {
                self.push(Diagnostic::new(file, format!("cannot read: {e}")));
                return None;
            }
        };
        let headers = match reader.headers() {
            Ok(h) => h.clone(),
            Err(e) => {
                self.push(Diagnostic::new(file, format!("malformed header: {e}")).at_row(1));
                return None;
            }
        };
        let (required, optional) = kind.columns();
        if headers.iter().all(|h| h.trim().is_empty()) {
            self.push(
                Diagnostic::new(file, "missing header row")
                    .at_row(1)
                    .at_column(required.first().copied().unwrap_or_default()),
            );
            return None;
        }

        let mut columns = HashMap::new();
        let mut ok = true;
        for (i, h) in headers.iter().enumerate() {
            let name = h.trim();
            if !required.contains(&name) && !optional.contains(&name) {
                self.push(
                    Diagnostic::new(&file, format!("unknown column (expected {})", required.join(", ")))
                        .at_row(1)
                        .at_column(name),
                );
                ok = false;
            } else if columns.insert(name.to_owned(), i).is_some() {
                self.push(Diagnostic::new(&file, "duplicate column").at_row(1).at_column(name));
                ok = false;
            }
        }
        for name in required {
            if !columns.contains_key(*name) {
                self.push(Diagnostic::new(&file, "missing required column").at_row(1).at_column(*name));
                ok = false;
            }
        }

        let mut rows = Vec::new();
        for result in reader.records() {
            match result {
                Ok(record) => {
                    let line = record.position().map_or(0, |p| p.line() as usize);
                    if record.len() != headers.len() {
                        let column = headers
                            .get(record.len())
                            .map_or_else(|| format!("field {}", record.len()), |h| h.trim().to_owned());
                        self.push(
                            Diagnostic::new(
                                &file,
                                format!("row has {} fields, header has {}", record.len(), headers.len()),
                            )
                            .at_row(line)
                            .at_column(column),
                        );
                        ok = false;
                        continue;
                    }
                    rows.push((line, record));
                }
                Err(e) => {
                    let line = e.position().map_or(0, |p| p.line() as usize);
                    self.push(Diagnostic::new(&file, format!("malformed row: {e}")).at_row(line));
                    ok = false;
                }
            }
        }
        ok.then_some(CsvTable { file, columns, rows })
    }

    fn each_row<'t>(table: &'t CsvTable) -> impl Iterator<Item = Row<'t>> {
        table.rows.iter().map(move |(line, record)| Row {
            file: &table.file,
            line: *line,
            columns: &table.columns,
            record,
        })
    }

    fn emission_factors(&mut self, table: &CsvTable) -> FactorTable {
        let mut factors = Vec::new();
        let mut seen = BTreeSet::new();
        for row in Self::each_row(table) {
            let d = &mut self.diagnostics;
            let mode = row.parse::<Mode>("mode", d);
            let gas = row.parse::<Gas>("gas", d);
            let value = row.non_negative("kg_per_tonne_km", d);
            if let (Some(mode), Some(gas), Some(value)) = (mode, gas, value) {
                if !seen.insert((mode, gas)) {
                    d.push(row.diag("gas", format!("duplicate factor for {mode}/{gas}")));
                    continue;
                }
                factors.push(EmissionFactor { mode, gas, kg_per_tonne_km: value });
            }
        }
        FactorTable::new(factors).unwrap_or_default()
    }

    fn indicators(&mut self, table: &CsvTable) -> Vec<IndicatorSeries> {
        let mut series: BTreeMap<String, IndicatorSeries> = BTreeMap::new();
        for row in Self::each_row(table) {
            let d = &mut self.diagnostics;
            let id = row.text("indicator_id", d);
            let country = row.text("country", d);
            let value = row.decimal("value", d);
            let min = row.decimal("observed_min", d);
            let max = row.decimal("observed_max", d);
            let (Some(id), Some(country), Some(value), Some(min), Some(max)) = (id, country, value, min, max) else {
                continue;
            };
            if min > max {
                d.push(row.diag("observed_min", format!("observed_min {min} exceeds observed_max {max}")));
                continue;
            }
            if !(min..=max).contains(&value) {
                d.push(row.diag("value", format!("value {value} outside observed range [{min}, {max}]")));
                continue;
            }
            let entry = series.entry(id.clone()).or_insert_with(|| IndicatorSeries {
                indicator_id: id.clone(),
                values: BTreeMap::new(),
                observed_min: min,
                observed_max: max,
            });
            if entry.observed_min != min || entry.observed_max != max {
                d.push(row.diag(
                    "observed_min",
                    format!("observed range for '{id}' differs from an earlier row"),
                ));
                continue;
            }
            if entry.values.insert(country.clone(), value).is_some() {
                d.push(row.diag("country", format!("duplicate value for '{id}' / '{country}'")));
            }
        }
        series.into_values().collect()
    }

    fn factors(&mut self, table: &CsvTable, indicators: Option<&Vec<IndicatorSeries>>) -> Vec<LocationFactor> {
        let known: Option<BTreeSet<&str>> =
            indicators.map(|list| list.iter().map(|s| s.indicator_id.as_str()).collect());
        let mut order: Vec<String> = Vec::new();
        let mut factors: BTreeMap<String, LocationFactor> = BTreeMap::new();
        for row in Self::each_row(table) {
            let d = &mut self.diagnostics;
            let id = row.text("factor_id", d);
            let name = row.text("name", d);
            let sub = row.text("subfactor_id", d);
            let (Some(id), Some(name), Some(sub)) = (id, name, sub) else {
                continue;
            };
            match &known {
                Some(k) if !k.contains(sub.as_str()) => {
                    d.push(row.diag("subfactor_id", format!("unknown indicator '{sub}'")));
                    continue;
                }
                None => {
                    d.push(row.diag("subfactor_id", "references indicators.csv, which is not present"));
                    continue;
                }
                _ => {}
            }
            let factor = factors.entry(id.clone()).or_insert_with(|| {
                order.push(id.clone());
                LocationFactor { factor_id: id.clone(), name: name.clone(), subfactor_ids: Vec::new() }
            });
            if factor.name != name {
                d.push(row.diag("name", format!("factor '{id}' has conflicting names")));
            }
            if factor.subfactor_ids.contains(&sub) {
                d.push(row.diag("subfactor_id", format!("subfactor '{sub}' listed twice for '{id}'")));
                continue;
            }
            factor.subfactor_ids.push(sub);
        }
        order.into_iter().filter_map(|id| factors.remove(&id)).collect()
    }

    fn profiles(&mut self, tables: &BTreeMap<DatasetKind, CsvTable>, factors: &[LocationFactor]) -> Vec<IndustryProfile> {
        let mut profiles: BTreeMap<NaicsCode, (usize, IndustryProfile)> = BTreeMap::new();
        let profile_table = tables.get(&DatasetKind::Profiles);
        if let Some(table) = profile_table {
            for row in Self::each_row(table) {
                let d = &mut self.diagnostics;
                let code = row.parse::<NaicsCode>("naics_code", d);
                let lc = row.decimal("logistics_cost_fraction", d);
                let cl = row.decimal_or("lead_time_cost_fraction", DEFAULT_LEAD_TIME_COST_FRACTION, d);
                let (Some(code), Some(lc), Some(cl)) = (code, lc, cl) else {
                    continue;
                };
                let mut bad = false;
                for (col, v) in [("logistics_cost_fraction", lc), ("lead_time_cost_fraction", cl)] {
                    if !(0.0..1.0).contains(&v) {
                        d.push(row.diag(col, format!("fraction {v} must lie in [0, 1)")));
                        bad = true;
                    }
                }
                if !bad && lc + cl >= 1.0 {
                    d.push(row.diag("lead_time_cost_fraction", format!("L_c + C_L = {} must be below 1", lc + cl)));
                    bad = true;
                }
                if bad {
                    continue;
                }
                if profiles.contains_key(&code) {
                    d.push(row.diag("naics_code", format!("duplicate profile for {code}")));
                    continue;
                }
                let profile = IndustryProfile {
                    naics_code: code.clone(),
                    weights: BTreeMap::new(),
                    logistics_cost_fraction: lc,
                    lead_time_cost_fraction: cl,
                };
                profiles.insert(code, (row.line, profile));
            }
        }

        let factors_present = tables.contains_key(&DatasetKind::Factors);
        let factor_ids: BTreeSet<&str> = factors.iter().map(|f| f.factor_id.as_str()).collect();
        if let Some(table) = tables.get(&DatasetKind::Weights) {
            for row in Self::each_row(table) {
                let d = &mut self.diagnostics;
                let code = row.parse::<NaicsCode>("naics_code", d);
                let factor = row.text("factor_id", d);
                let weight = row.non_negative("weight", d);
                let (Some(code), Some(factor), Some(weight)) = (code, factor, weight) else {
                    continue;
                };
                if !factors_present {
                    d.push(row.diag("factor_id", "references factors.csv, which is not present"));
                    continue;
                }
                if !factor_ids.contains(factor.as_str()) {
                    d.push(row.diag("factor_id", format!("unknown location factor '{factor}'")));
                    continue;
                }
                let Some((_, profile)) = profiles.get_mut(&code) else {
                    d.push(row.diag("naics_code", format!("no profile for NAICS {code}")));
                    continue;
                };
                if profile.weights.insert(factor.clone(), weight).is_some() {
                    d.push(row.diag("factor_id", format!("duplicate weight for {code} / '{factor}'")));
                }
            }
        }

        if let (Some(table), true) = (profile_table, factors_present) {
            for (line, profile) in profiles.values() {
                let missing: Vec<&str> = factor_ids
                    .iter()
                    .filter(|f| !profile.weights.contains_key(**f))
                    .copied()
                    .collect();
                if !missing.is_empty() {
                    self.push(
                        Diagnostic::new(&table.file, format!("no weights for factors {missing:?}"))
                            .at_row(*line)
                            .at_column("naics_code"),
                    );
                }
            }
        }
        profiles.into_values().map(|(_, p)| p).collect()
    }

    fn screening(&mut self, table: &CsvTable) -> Vec<ScreeningRow> {
        let mut rows = Vec::new();
        let mut labels = BTreeSet::new();
        for row in Self::each_row(table) {
            let d = &mut self.diagnostics;
            let label = row.text("label", d);
            let code = row.parse::<NaicsCode>("naics_code", d);
            let ri = row.decimal("ri_percent", d);
            let deficit = row.decimal("trade_deficit_100k", d);
            let logistics = row.decimal("logistics_cost_percent", d);
            let tariff = row.non_negative("tariff_share_percent", d);
            let (Some(label), Some(code), Some(ri), Some(deficit), Some(logistics), Some(tariff)) =
                (label, code, ri, deficit, logistics, tariff)
            else {
                continue;
            };
            if !labels.insert(label.clone()) {
                d.push(row.diag("label", format!("duplicate label '{label}'")));
                continue;
            }
            rows.push(ScreeningRow {
                label,
                naics_code: code,
                ri_percent: ri,
                trade_deficit_100k: deficit,
                logistics_cost_percent: logistics,
                tariff_share_percent: tariff,
            });
        }
        rows
    }

    fn product_ref(row: &Row<'_>, label: &str, labels: Option<&BTreeSet<String>>, d: &mut Vec<Diagnostic>) -> bool {
        match labels {
            None => {
                d.push(row.diag("product_label", "references screening.csv, which is not present"));
                false
            }
            Some(l) if !l.contains(label) => {
                d.push(row.diag("product_label", format!("unknown product '{label}'")));
                false
            }
            Some(_) => true,
        }
    }

    fn scenarios(
        &mut self,
        tables: &BTreeMap<DatasetKind, CsvTable>,
        labels: Option<&BTreeSet<String>>,
    ) -> Vec<ScenarioRecord> {
        let mut records: Vec<ScenarioRecord> = Vec::new();
        let mut lines: BTreeMap<(String, ScenarioRole), usize> = BTreeMap::new();
        let Some(table) = tables.get(&DatasetKind::Scenarios) else {
            if let Some(items) = tables.get(&DatasetKind::CogsItems) {
                for row in Self::each_row(items) {
                    self.push(row.diag("product_label", "references scenarios.csv, which is not present"));
                }
            }
            return records;
        };
        for row in Self::each_row(table) {
            let d = &mut self.diagnostics;
            let product = row.text("product_label", d);
            let region = row.text("region_label", d);
            let role = row.parse::<ScenarioRole>("role", d);
            let fob = row.non_negative("fob_price", d);
            let cogs = row.non_negative("cogs", d);
            let hard = row.non_negative("other_hard", d);
            let risk = row.decimal_or("risk", 0.0, d);
            let strategic = row.decimal_or("strategic", 0.0, d);
            let green = row.decimal_or("green", 0.0, d);
            let premium = row.non_negative("freight_premium", d);
            let rate = row.decimal("escalation_rate", d);
            let (
                Some(product),
                Some(region),
                Some(role),
                Some(fob),
                Some(cogs),
                Some(hard),
                Some(risk),
                Some(strategic),
                Some(green),
                Some(premium),
                Some(rate),
            ) = (product, region, role, fob, cogs, hard, risk, strategic, green, premium, rate)
            else {
                continue;
            };
            let mut bad = false;
            for (col, v) in [("risk", risk), ("strategic", strategic), ("green", green)] {
                if v < 0.0 {
                    d.push(row.diag(col, format!("value {v} must not be negative")));
                    bad = true;
                }
            }
            if rate <= -1.0 {
                d.push(row.diag("escalation_rate", format!("rate {rate} must exceed -1")));
                bad = true;
            }
            if bad || !Self::product_ref(&row, &product, labels, d) {
                continue;
            }
            if lines.insert((product.clone(), role), row.line).is_some() {
                d.push(row.diag("role", format!("second {role:?} scenario for '{product}'")));
                continue;
            }
            records.push(ScenarioRecord {
                role,
                scenario: SourcingScenario {
                    product_label: product,
                    region_label: region,
                    buckets: CostBuckets { fob_price: fob, cogs, other_hard: hard, risk, strategic, green },
                    freight_premium: premium,
                    escalation_rate: rate,
                    cogs_items: Vec::new(),
                },
            });
        }

        for ((product, role), line) in &lines {
            let other = match role {
                ScenarioRole::Domestic => ScenarioRole::Offshore,
                ScenarioRole::Offshore => ScenarioRole::Domestic,
            };
            if !lines.contains_key(&(product.clone(), other)) {
                self.push(
                    Diagnostic::new(&table.file, format!("'{product}' has no {other:?} scenario"))
                        .at_row(*line)
                        .at_column("role"),
                );
            }
        }

        if let Some(items) = tables.get(&DatasetKind::CogsItems) {
            let mut item_lines: BTreeMap<(String, ScenarioRole), usize> = BTreeMap::new();
            for row in Self::each_row(items) {
                let d = &mut self.diagnostics;
                let product = row.text("product_label", d);
                let role = row.parse::<ScenarioRole>("role", d);
                let item = row.text("item", d);
                let amount = row.non_negative("amount", d);
                let (Some(product), Some(role), Some(item), Some(amount)) = (product, role, item, amount) else {
                    continue;
                };
                let Some(record) = records
                    .iter_mut()
                    .find(|r| r.role == role && r.scenario.product_label == product)
                else {
                    d.push(row.diag("product_label", format!("no {role:?} scenario for '{product}'")));
                    continue;
                };
                record.scenario.cogs_items.push(CogsItem { item, amount });
                item_lines.entry((product, role)).or_insert(row.line);
            }
            for record in &records {
                let key = (record.scenario.product_label.clone(), record.role);
                if let Some(line) = item_lines.get(&key) {
                    if let Err(e) = record.scenario.validate() {
                        self.push(
                            Diagnostic::new(&items.file, e.to_string())
                                .at_row(*line)
                                .at_column("amount"),
                        );
                    }
                }
            }
        }
        records
    }

    fn legs(
        &mut self,
        table: &CsvTable,
        labels: Option<&BTreeSet<String>>,
        factors: Option<&FactorTable>,
    ) -> Vec<LegRecord> {
        let mut legs = Vec::new();
        for row in Self::each_row(table) {
            let d = &mut self.diagnostics;
            let product = row.text("product_label", d);
            let scenario = row.parse::<LegScenario>("scenario", d);
            let item = row.text("item_id", d);
            let mode = row.parse::<Mode>("mode", d);
            let mass = row.non_negative("mass_tonnes", d);
            let distance = row.non_negative("distance", d);
            let unit = row.parse::<DistanceUnit>("distance_unit", d);
            let (Some(product), Some(scenario), Some(item), Some(mode), Some(mass), Some(distance), Some(unit)) =
                (product, scenario, item, mode, mass, distance, unit)
            else {
                continue;
            };
            if !Self::product_ref(&row, &product, labels, d) {
                continue;
            }
            match factors {
                None => {
                    d.push(row.diag("mode", "references emission_factors.csv, which is not present"));
                    continue;
                }
                Some(f) if !f.has_mode(mode) => {
                    d.push(row.diag("mode", format!("no complete CO2/CH4/N2O factor set for mode '{mode}'")));
                    continue;
                }
                Some(_) => {}
            }
            legs.push(LegRecord {
                product_label: product,
                scenario,
                leg: TransportLeg {
                    item_id: item,
                    mode,
                    mass_tonnes: mass,
                    distance: Distance { value: distance, unit },
                },
            });
        }
        legs
    }
}
