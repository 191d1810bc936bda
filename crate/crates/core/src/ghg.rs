//! Scope-3 upstream transport emissions, distance-based method.
//!
//! Each leg contributes `mass × distance × factor` per gas, with factors in
//! kilograms of gas per tonne-kilometer. CO₂ is reported in metric tonnes,
//! CH₄ and N₂O in kilograms.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, AddAssign};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const KM_PER_MILE: f64 = 1.609344;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Road,
    Sea,
}

impl Mode {
    pub const ALL: [Mode; 2] = [Mode::Road, Mode::Sea];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Road => "road",
            Mode::Sea => "sea",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "road" => Ok(Mode::Road),
            "sea" => Ok(Mode::Sea),
            other => Err(Error::input(format!(
                "unknown transport mode '{other}' (allowed: road, sea)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Gas {
    #[serde(rename = "CO2")]
    Co2,
    #[serde(rename = "CH4")]
    Ch4,
    #[serde(rename = "N2O")]
    N2o,
}

impl Gas {
    pub const ALL: [Gas; 3] = [Gas::Co2, Gas::Ch4, Gas::N2o];

    pub fn as_str(self) -> &'static str {
        match self {
            Gas::Co2 => "CO2",
            Gas::Ch4 => "CH4",
            Gas::N2o => "N2O",
        }
    }
}

impl fmt::Display for Gas {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Gas {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "CO2" => Ok(Gas::Co2),
            "CH4" => Ok(Gas::Ch4),
            "N2O" => Ok(Gas::N2o),
            other => Err(Error::input(format!(
                "unknown gas '{other}' (allowed: CO2, CH4, N2O)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceUnit {
    Km,
    Mile,
}

impl FromStr for DistanceUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "km" => Ok(DistanceUnit::Km),
            "mile" => Ok(DistanceUnit::Mile),
            other => Err(Error::input(format!(
                "unknown distance unit '{other}' (allowed: km, mile)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Distance {
    pub value: f64,
    pub unit: DistanceUnit,
}

impl Distance {
    pub fn km(value: f64) -> Self {
        Self { value, unit: DistanceUnit::Km }
    }

    pub fn miles(value: f64) -> Self {
        Self { value, unit: DistanceUnit::Mile }
    }

    pub fn to_km(self) -> f64 {
        match self.unit {
            DistanceUnit::Km => self.value,
            DistanceUnit::Mile => self.value * KM_PER_MILE,
        }
    }
}

/// One shipment segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportLeg {
    pub item_id: String,
    pub mode: Mode,
    pub mass_tonnes: f64,
    pub distance: Distance,
}

impl TransportLeg {
    pub fn validate(&self) -> Result<()> {
        if !self.mass_tonnes.is_finite() || self.mass_tonnes < 0.0 {
            return Err(Error::domain(format!(
                "leg '{}': mass {} must be >= 0",
                self.item_id, self.mass_tonnes
            )));
        }
        if !self.distance.value.is_finite() || self.distance.value < 0.0 {
            return Err(Error::domain(format!(
                "leg '{}': distance {} must be >= 0",
                self.item_id, self.distance.value
            )));
        }
        Ok(())
    }

    pub fn tonne_km(&self) -> f64 {
        self.mass_tonnes * self.distance.to_km()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmissionFactor {
    pub mode: Mode,
    pub gas: Gas,
    pub kg_per_tonne_km: f64,
}

/// Emission factors keyed by (mode, gas).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FactorTable {
    factors: Vec<EmissionFactor>,
}

impl FactorTable {
    pub fn new(factors: impl IntoIterator<Item = EmissionFactor>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for f in factors {
            if !f.kg_per_tonne_km.is_finite() || f.kg_per_tonne_km < 0.0 {
                return Err(Error::domain(format!(
                    "emission factor {}/{} is {}; must be >= 0",
                    f.mode, f.gas, f.kg_per_tonne_km
                )));
            }
            if !seen.insert((f.mode, f.gas)) {
                return Err(Error::config(format!(
                    "emission factor {}/{} given twice",
                    f.mode, f.gas
                )));
            }
            out.push(f);
        }
        Ok(Self { factors: out })
    }

    pub fn get(&self, mode: Mode, gas: Gas) -> Result<f64> {
        self.factors
            .iter()
            .find(|f| f.mode == mode && f.gas == gas)
            .map(|f| f.kg_per_tonne_km)
            .ok_or_else(|| Error::config(format!("no emission factor for {mode}/{gas}")))
    }

    pub fn has_mode(&self, mode: Mode) -> bool {
        Gas::ALL.iter().all(|&g| self.get(mode, g).is_ok())
    }

    pub fn entries(&self) -> &[EmissionFactor] {
        &self.factors
    }
}

/// Per-gas quantities: CO₂ in tonnes, CH₄ and N₂O in kilograms.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct GasVector {
    pub co2_tonnes: f64,
    pub ch4_kg: f64,
    pub n2o_kg: f64,
}

impl GasVector {
    pub fn get(&self, gas: Gas) -> f64 {
        match gas {
            Gas::Co2 => self.co2_tonnes,
            Gas::Ch4 => self.ch4_kg,
            Gas::N2o => self.n2o_kg,
        }
    }

    pub fn scaled(self, c: f64) -> Self {
        Self {
            co2_tonnes: self.co2_tonnes * c,
            ch4_kg: self.ch4_kg * c,
            n2o_kg: self.n2o_kg * c,
        }
    }
}

impl Add for GasVector {
    type Output = GasVector;

    fn add(self, rhs: Self) -> Self {
        Self {
            co2_tonnes: self.co2_tonnes + rhs.co2_tonnes,
            ch4_kg: self.ch4_kg + rhs.ch4_kg,
            n2o_kg: self.n2o_kg + rhs.n2o_kg,
        }
    }
}

impl AddAssign for GasVector {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

/// Global-warming potentials used for the CO₂e rollup.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGwpSet")]
pub struct GwpSet {
    pub ch4_gwp: f64,
    pub n2o_gwp: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGwpSet {
    ch4_gwp: f64,
    n2o_gwp: f64,
}

impl TryFrom<RawGwpSet> for GwpSet {
    type Error = Error;

    fn try_from(raw: RawGwpSet) -> Result<Self> {
        let gwp = GwpSet { ch4_gwp: raw.ch4_gwp, n2o_gwp: raw.n2o_gwp };
        gwp.validate()?;
        Ok(gwp)
    }
}

impl Default for GwpSet {
    fn default() -> Self {
        Self { ch4_gwp: 28.0, n2o_gwp: 265.0 }
    }
}

impl GwpSet {
    pub fn validate(&self) -> Result<()> {
        if !(self.ch4_gwp > 1.0 && self.n2o_gwp > 1.0) || !self.ch4_gwp.is_finite() || !self.n2o_gwp.is_finite() {
            return Err(Error::config(format!(
                "GWP values must exceed 1 (got CH4 {}, N2O {})",
                self.ch4_gwp, self.n2o_gwp
            )));
        }
        Ok(())
    }
}

/// Emissions of a single leg.
pub fn leg_emission(leg: &TransportLeg, factors: &FactorTable) -> Result<GasVector> {
    leg.validate()?;
    let tkm = leg.tonne_km();
    Ok(GasVector {
        co2_tonnes: tkm * factors.get(leg.mode, Gas::Co2)? / 1000.0,
        ch4_kg: tkm * factors.get(leg.mode, Gas::Ch4)?,
        n2o_kg: tkm * factors.get(leg.mode, Gas::N2o)?,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EmissionReport {
    /// Only modes that carried at least one leg appear.
    pub per_mode: BTreeMap<Mode, GasVector>,
    pub total: GasVector,
    pub co2e_tonnes: Option<f64>,
    pub gwp: Option<GwpSet>,
}

impl EmissionReport {
    pub fn mode(&self, mode: Mode) -> GasVector {
        self.per_mode.get(&mode).copied().unwrap_or_default()
    }

    pub fn with_co2e(mut self, gwp: &GwpSet) -> Self {
        self.co2e_tonnes = Some(co2e_total(&self.total, gwp));
        self.gwp = Some(*gwp);
        self
    }
}

/// Per-mode and total emissions over a list of legs.
///
/// Legs are summed in `item_id` order so the result does not depend on
/// input order.
pub fn mode_totals(legs: &[TransportLeg], factors: &FactorTable) -> Result<EmissionReport> {
    let mut ordered: Vec<&TransportLeg> = legs.iter().collect();
    ordered.sort_by(|a, b| a.item_id.cmp(&b.item_id));
    let mut per_mode: BTreeMap<Mode, GasVector> = BTreeMap::new();
    for leg in ordered {
        *per_mode.entry(leg.mode).or_default() += leg_emission(leg, factors)?;
    }
    let total = Mode::ALL
        .iter()
        .filter_map(|m| per_mode.get(m))
        .fold(GasVector::default(), |acc, v| acc + *v);
    Ok(EmissionReport {
        per_mode,
        total,
        co2e_tonnes: None,
        gwp: None,
    })
}

/// CO₂-equivalent in metric tonnes.
pub fn co2e_total(gases: &GasVector, gwp: &GwpSet) -> f64 {
    gases.co2_tonnes + gases.ch4_kg / 1000.0 * gwp.ch4_gwp + gases.n2o_kg / 1000.0 * gwp.n2o_gwp
}

/// Percent reduction per gas; `None` where the offshore baseline is zero.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct GasPercents {
    pub co2: Option<f64>,
    pub ch4: Option<f64>,
    pub n2o: Option<f64>,
}

impl GasPercents {
    pub fn get(&self, gas: Gas) -> Option<f64> {
        match gas {
            Gas::Co2 => self.co2,
            Gas::Ch4 => self.ch4,
            Gas::N2o => self.n2o,
        }
    }

    fn between(offshore: &GasVector, reshore: &GasVector) -> Self {
        Self {
            co2: percent_reduction(offshore.co2_tonnes, reshore.co2_tonnes),
            ch4: percent_reduction(offshore.ch4_kg, reshore.ch4_kg),
            n2o: percent_reduction(offshore.n2o_kg, reshore.n2o_kg),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub per_mode_percent: BTreeMap<Mode, GasPercents>,
    pub per_gas_percent: GasPercents,
    pub co2e_percent: Option<f64>,
}

/// `(offshore − reshore) / offshore × 100`, or `None` when offshore is zero.
pub fn percent_reduction(offshore: f64, reshore: f64) -> Option<f64> {
    (offshore != 0.0).then(|| (offshore - reshore) / offshore * 100.0)
}

pub fn reduction_report(offshore: &EmissionReport, reshore: &EmissionReport) -> ReductionReport {
    let modes: BTreeSet<Mode> = offshore
        .per_mode
        .keys()
        .chain(reshore.per_mode.keys())
        .copied()
        .collect();
    let per_mode_percent = modes
        .into_iter()
        .map(|m| (m, GasPercents::between(&offshore.mode(m), &reshore.mode(m))))
        .collect();
    let co2e_percent = match (offshore.co2e_tonnes, reshore.co2e_tonnes) {
        (Some(off), Some(re)) => percent_reduction(off, re),
        _ => None,
    };
    ReductionReport {
        per_mode_percent,
        per_gas_percent: GasPercents::between(&offshore.total, &reshore.total),
        co2e_percent,
    }
}
