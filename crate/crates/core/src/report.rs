//! Report rendering as aligned text tables, long-form CSV or JSON.
//!
//! Every report exposes its figures as [`Table`]s. Text output lays those
//! out with the familiar row labels; CSV emits one line per cell with the
//! full-precision value next to a 2-decimal display string; JSON carries the
//! typed report (full precision, parseable back) plus the display tables.

use std::fmt::Write as _;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ghg::{EmissionFactor, EmissionReport, Gas, GasPercents, GasVector, GwpSet, Mode, ReductionReport};
use crate::pipeline::DecisionRecord;
use crate::ri::{OffshoreAdjustment, RiEvaluation, ScreeningReport};
use crate::tco::TcoComparison;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Number(f64),
    Percent(f64),
    Text(String),
    NotApplicable,
    Blank,
}

impl Cell {
    fn display(&self) -> String {
        match self {
            Cell::Number(v) => format!("{v:.2}"),
            Cell::Percent(v) => format!("{v:.2}%"),
            Cell::Text(t) => t.clone(),
            Cell::NotApplicable => "n/a".into(),
            Cell::Blank => String::new(),
        }
    }

    fn value(&self) -> String {
        match self {
            Cell::Number(v) | Cell::Percent(v) => format!("{v}"),
            Cell::Text(t) => t.clone(),
            Cell::NotApplicable | Cell::Blank => String::new(),
        }
    }

    fn is_numeric(&self) -> bool {
        matches!(self, Cell::Number(_) | Cell::Percent(_) | Cell::NotApplicable)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Number(v)
    }
}

fn pct(v: Option<f64>) -> Cell {
    v.map_or(Cell::NotApplicable, Cell::Percent)
}

fn num(v: Option<f64>) -> Cell {
    v.map_or(Cell::NotApplicable, Cell::Number)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub title: String,
    /// Header of the row-label column.
    pub corner: String,
    pub columns: Vec<String>,
    pub rows: Vec<(String, Vec<Cell>)>,
    pub notes: Vec<String>,
}

impl Table {
    pub fn new(title: impl Into<String>, corner: impl Into<String>, columns: &[&str]) -> Self {
        Self {
            title: title.into(),
            corner: corner.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn row(&mut self, label: impl Into<String>, cells: Vec<Cell>) -> &mut Self {
        self.rows.push((label.into(), cells));
        self
    }

    pub fn note(&mut self, note: impl Into<String>) -> &mut Self {
        self.notes.push(note.into());
        self
    }

    fn render_text(&self, out: &mut String) {
        let ncols = self.columns.len();
        let mut widths: Vec<usize> = std::iter::once(self.corner.chars().count())
            .chain(self.columns.iter().map(|c| c.chars().count()))
            .collect();
        let shown: Vec<(String, Vec<(String, bool)>)> = self
            .rows
            .iter()
            .map(|(label, cells)| {
                let cells = (0..ncols)
                    .map(|i| cells.get(i).map_or((String::new(), false), |c| (c.display(), c.is_numeric())))
                    .collect();
                (label.clone(), cells)
            })
            .collect();
        for (label, cells) in &shown {
            widths[0] = widths[0].max(label.chars().count());
            for (i, (text, _)) in cells.iter().enumerate() {
                widths[i + 1] = widths[i + 1].max(text.chars().count());
            }
        }

        let _ = writeln!(out, "{}", self.title);
        let mut line = format!("{:<w$}", self.corner, w = widths[0]);
        for (i, c) in self.columns.iter().enumerate() {
            let numeric = shown.first().is_none_or(|(_, cells)| cells[i].1);
            if numeric {
                let _ = write!(line, "  {:>w$}", c, w = widths[i + 1]);
            } else {
                let _ = write!(line, "  {:<w$}", c, w = widths[i + 1]);
            }
        }
        let _ = writeln!(out, "{}", line.trim_end());
        let _ = writeln!(out, "{}", "-".repeat(widths.iter().sum::<usize>() + 2 * ncols));
        for (label, cells) in &shown {
            let mut line = format!("{:<w$}", label, w = widths[0]);
            for (i, (text, numeric)) in cells.iter().enumerate() {
                if *numeric {
                    let _ = write!(line, "  {:>w$}", text, w = widths[i + 1]);
                } else {
                    let _ = write!(line, "  {:<w$}", text, w = widths[i + 1]);
                }
            }
            let _ = writeln!(out, "{}", line.trim_end());
        }
        for note in &self.notes {
            let _ = writeln!(out, "note: {note}");
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    #[value(name = "table")]
    TableText,
    Csv,
    Json,
}

/// Anything that can be rendered.
pub trait Report: Serialize + DeserializeOwned {
    const KIND: &'static str;

    fn tables(&self) -> Vec<Table>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderedReport {
    pub format: Format,
    pub content: Vec<u8>,
}

impl RenderedReport {
    pub fn as_str(&self) -> &str {
        std::str::from_utf8(&self.content).unwrap_or_default()
    }
}

#[derive(Serialize)]
struct DisplayTable<'a> {
    title: &'a str,
    columns: Vec<&'a str>,
    rows: Vec<DisplayRow<'a>>,
    notes: &'a [String],
}

#[derive(Serialize)]
struct DisplayRow<'a> {
    label: &'a str,
    display: Vec<String>,
}

#[derive(Serialize)]
struct JsonEnvelope<'a, R> {
    kind: &'static str,
    report: &'a R,
    tables: Vec<DisplayTable<'a>>,
}

#[derive(Deserialize)]
struct JsonEnvelopeIn<R> {
    kind: String,
    report: R,
}

pub fn render_report<R: Report>(report: &R, format: Format) -> RenderedReport {
    let tables = report.tables();
    let content = match format {
        Format::TableText => {
            let mut out = String::new();
            for (i, t) in tables.iter().enumerate() {
                if i > 0 {
                    out.push('\n');
                }
                t.render_text(&mut out);
            }
            out.into_bytes()
        }
        Format::Csv => {
            let mut writer = csv::Writer::from_writer(Vec::new());
            // Writing to memory cannot fail.
            let _ = writer.write_record(["table", "row", "column", "value", "display"]);
            for t in &tables {
                for (label, cells) in &t.rows {
                    for (column, cell) in t.columns.iter().zip(cells) {
                        if *cell == Cell::Blank {
                            continue;
                        }
                        let _ = writer.write_record([&t.title, label, column, &cell.value(), &cell.display()]);
                    }
                }
            }
            writer.into_inner().unwrap_or_default()
        }
        Format::Json => {
            let display = tables
                .iter()
                .map(|t| DisplayTable {
                    title: &t.title,
                    columns: std::iter::once(t.corner.as_str())
                        .chain(t.columns.iter().map(String::as_str))
                        .collect(),
                    rows: t
                        .rows
                        .iter()
                        .map(|(label, cells)| DisplayRow {
                            label,
                            display: cells.iter().map(Cell::display).collect(),
                        })
                        .collect(),
                    notes: &t.notes,
                })
                .collect();
            let envelope = JsonEnvelope { kind: R::KIND, report, tables: display };
            let mut bytes = serde_json::to_vec_pretty(&envelope).unwrap_or_default();
            bytes.push(b'\n');
            bytes
        }
    };
    RenderedReport { format, content }
}

/// Recover the typed report from JSON produced by [`render_report`].
pub fn parse_json_report<R: Report>(bytes: &[u8]) -> Result<R> {
    let envelope: JsonEnvelopeIn<R> =
        serde_json::from_slice(bytes).map_err(|e| Error::input(format!("invalid report JSON: {e}")))?;
    if envelope.kind != R::KIND {
        return Err(Error::input(format!(
            "expected a '{}' report, found '{}'",
            R::KIND,
            envelope.kind
        )));
    }
    Ok(envelope.report)
}

// ---------------------------------------------------------------------------
// Report types

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiReport {
    pub domestic_country: String,
    pub offshore_country: String,
    pub adjustment: OffshoreAdjustment,
    pub evaluations: Vec<RiEvaluation>,
}

impl Report for RiReport {
    const KIND: &'static str = "ri";

    fn tables(&self) -> Vec<Table> {
        let mut summary = Table::new(
            format!(
                "Reshoring Index, {} vs {} ({})",
                self.domestic_country,
                self.offshore_country,
                match self.adjustment {
                    OffshoreAdjustment::Attenuate => "attenuated offshore score",
                    OffshoreAdjustment::LiteralDivide => "divided offshore score",
                }
            ),
            "NAICS Code",
            &["Domestic score", "Offshore score", "RI %"],
        );
        for e in &self.evaluations {
            summary.row(
                e.naics_code.as_str(),
                vec![e.domestic_score.into(), e.offshore_score.into(), Cell::Percent(e.ri_percent)],
            );
        }
        let mut tables = vec![summary];
        if let Some(first) = self.evaluations.first() {
            let mut means = Table::new(
                "Location factor means (1-7 scale)",
                "Location factor",
                &[&self.domestic_country, &self.offshore_country],
            );
            for (factor, d) in &first.domestic_means {
                let o = first.offshore_means.get(factor).copied();
                means.row(factor.clone(), vec![Cell::Number(*d), num(o)]);
            }
            tables.push(means);
        }
        tables
    }
}

impl Report for ScreeningReport {
    const KIND: &'static str = "screen";

    fn tables(&self) -> Vec<Table> {
        let mut t = Table::new(
            "RI %, trade deficit and logistics cost % by NAICS code",
            "Items",
            &["NAICS Code", "RI %", "Trade Deficit 100 K", "Logistics cost %", "Tariff %", "Status"],
        );
        let cells = |r: &crate::ri::ScreeningRow, status: String| {
            vec![
                Cell::Text(r.naics_code.to_string()),
                Cell::Number(r.ri_percent),
                Cell::Number(r.trade_deficit_100k),
                Cell::Number(r.logistics_cost_percent),
                Cell::Number(r.tariff_share_percent),
                Cell::Text(status),
            ]
        };
        for r in &self.shortlist {
            t.row(r.label.clone(), cells(r, "shortlisted".into()));
        }
        for e in &self.excluded {
            t.row(e.row.label.clone(), cells(&e.row, format!("excluded: {}", e.reason)));
        }
        t.row(
            "Shortlist tariff coverage",
            vec![Cell::Blank, Cell::Blank, Cell::Blank, Cell::Blank, Cell::Percent(self.tariff_coverage_percent)],
        );
        t.note(format!(
            "policy: RI >= {}, logistics >= {}%, positive deficit {}",
            self.policy.min_ri_percent,
            self.policy.min_logistics_percent,
            if self.policy.require_positive_deficit { "required" } else { "not required" }
        ));
        vec![t]
    }
}

fn comparison_table(c: &TcoComparison) -> Table {
    let mut t = Table::new(
        format!("Total cost of ownership: {}, {} vs {}", c.product_label, c.offshore_region, c.domestic_region),
        "Cost Factor",
        &[&c.domestic_region, &c.offshore_region],
    );
    let (d, o) = (&c.domestic_buckets, &c.offshore_buckets);
    t.row("FOB price", vec![d.fob_price.into(), o.fob_price.into()]);
    t.row("Total CoGS", vec![d.cogs.into(), o.cogs.into()]);
    t.row("Total Other Hard Costs", vec![d.other_hard.into(), o.other_hard.into()]);
    t.row("Total Risk Cost", vec![d.risk.into(), o.risk.into()]);
    t.row("Total Strategic Cost", vec![d.strategic.into(), o.strategic.into()]);
    t.row("Total Green Cost", vec![d.green.into(), o.green.into()]);
    t.row(
        "Total Cost Before Freight Premium",
        vec![c.domestic.pre_freight_total.into(), c.offshore.pre_freight_total.into()],
    );
    t.row("Freight Premium", vec![c.domestic_freight_premium.into(), c.offshore_freight_premium.into()]);
    t.row("Grand Total Cost of Ownership", vec![c.domestic.grand_total.into(), c.offshore.grand_total.into()]);
    t.row(
        format!("Forecast TCO ({} years)", c.horizon_years),
        vec![num(c.domestic.at_year(c.horizon_years)), num(c.offshore.at_year(c.horizon_years))],
    );
    t
}

impl Report for TcoComparison {
    const KIND: &'static str = "tco_comparison";

    fn tables(&self) -> Vec<Table> {
        vec![comparison_table(self)]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TcoReport {
    pub horizon_years: usize,
    pub comparisons: Vec<TcoComparison>,
}

impl Report for TcoReport {
    const KIND: &'static str = "tco";

    fn tables(&self) -> Vec<Table> {
        let mut tables: Vec<Table> = self.comparisons.iter().map(comparison_table).collect();
        let (domestic, offshore) = self
            .comparisons
            .first()
            .map_or(("Domestic", "Offshore"), |c| (c.domestic_region.as_str(), c.offshore_region.as_str()));
        let fob = format!("{offshore} Advantage on FOB Present day (per unit)");
        let now = format!("{domestic} Advantage on TCO Present Day (per unit)");
        let horizon = format!("{domestic} Advantage on TCO after {} years (per unit)", self.horizon_years);
        let mut summary = Table::new(
            "Purchase price difference after TCO analysis",
            "Product Name",
            &[&fob, &now, &horizon],
        );
        for c in &self.comparisons {
            summary.row(
                c.product_label.clone(),
                vec![
                    c.fob_advantage_offshore.into(),
                    c.tco_advantage_domestic_now.into(),
                    c.tco_advantage_domestic_horizon.into(),
                ],
            );
        }
        tables.push(summary);
        tables
    }
}

const GAS_COLUMNS: [&str; 3] = ["Fossil Fuel CO2 (metric tonnes)", "CH4 (kilograms)", "N2O (kilograms)"];

fn mode_label(mode: Mode) -> &'static str {
    match mode {
        Mode::Road => "Road",
        Mode::Sea => "Water",
    }
}

fn gas_cells(v: &GasVector) -> Vec<Cell> {
    Gas::ALL.iter().map(|&g| Cell::Number(v.get(g))).collect()
}

fn percent_cells(p: &GasPercents) -> Vec<Cell> {
    Gas::ALL.iter().map(|&g| pct(p.get(g))).collect()
}

fn gwp_note(gwp: Option<&GwpSet>) -> String {
    match gwp {
        Some(g) => format!("CO2e uses GWP CH4 = {}, N2O = {}", g.ch4_gwp, g.n2o_gwp),
        None => "CO2e not computed".into(),
    }
}

const PORT_NOTE: &str = "port handling and idling emissions are not included";

fn inventory_table(title: String, r: &EmissionReport) -> Table {
    let mut t = Table::new(title, "Mode of Transport", &GAS_COLUMNS);
    for (mode, v) in &r.per_mode {
        t.row(mode_label(*mode), gas_cells(v));
    }
    t.row("Total Emissions", gas_cells(&r.total));
    t.row("Total GHG Emission (metric tonnes CO2 e)", vec![num(r.co2e_tonnes)]);
    t.note(gwp_note(r.gwp.as_ref()));
    t.note(PORT_NOTE);
    t
}

fn reduction_table(title: String, r: &ReductionReport) -> Table {
    let mut t = Table::new(title, "Mode of Transport", &GAS_COLUMNS);
    for (mode, p) in &r.per_mode_percent {
        t.row(mode_label(*mode), percent_cells(p));
    }
    t.row("Total Emissions", percent_cells(&r.per_gas_percent));
    t.row("Total GHG Emission (metric tonnes CO2 e)", vec![pct(r.co2e_percent)]);
    t
}

impl Report for EmissionReport {
    const KIND: &'static str = "emissions";

    fn tables(&self) -> Vec<Table> {
        vec![inventory_table("Scope-3 upstream transport emissions".into(), self)]
    }
}

impl Report for ReductionReport {
    const KIND: &'static str = "reduction";

    fn tables(&self) -> Vec<Table> {
        vec![reduction_table("Emission reduction from reshoring".into(), self)]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductEmissions {
    pub product_label: String,
    pub offshore: EmissionReport,
    pub reshore: EmissionReport,
    pub reduction: ReductionReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GhgReport {
    pub gwp: GwpSet,
    pub factors: Vec<EmissionFactor>,
    pub products: Vec<ProductEmissions>,
    /// All products' legs combined.
    pub combined: ProductEmissions,
}

impl Report for GhgReport {
    const KIND: &'static str = "ghg";

    fn tables(&self) -> Vec<Table> {
        let mut tables = vec![
            reduction_table(
                "Greenhouse gas emissions reduced, offshore to reshored supply chain (all products)".into(),
                &self.combined.reduction,
            ),
            inventory_table("Offshore supply chain emissions (all products)".into(), &self.combined.offshore),
            inventory_table("Reshored supply chain emissions (all products)".into(), &self.combined.reshore),
        ];
        for p in &self.products {
            tables.push(reduction_table(format!("Emission reduction: {}", p.product_label), &p.reduction));
        }
        let mut factors = Table::new("Emission factors (kg per tonne-km)", "Mode", &["Gas", "kg/t-km"]);
        for f in &self.factors {
            factors.row(f.mode.as_str(), vec![Cell::Text(f.gas.to_string()), Cell::Text(f.kg_per_tonne_km.to_string())]);
        }
        factors.note(gwp_note(Some(&self.gwp)));
        tables.push(factors);
        tables
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionReport {
    pub horizon_years: usize,
    pub records: Vec<DecisionRecord>,
}

impl Report for DecisionReport {
    const KIND: &'static str = "decision";

    fn tables(&self) -> Vec<Table> {
        let horizon = format!("TCO advantage after {} years", self.horizon_years);
        let mut t = Table::new(
            "Reshoring decisions",
            "Product",
            &[
                "NAICS Code",
                "Screen",
                "TCO advantage now",
                &horizon,
                "CO2e reduction %",
                "Recommendation",
            ],
        );
        for r in &self.records {
            t.row(
                r.product_label.clone(),
                vec![
                    Cell::Text(r.naics_code.to_string()),
                    Cell::Text(match &r.screened.reason {
                        None => "pass".into(),
                        Some(reason) => reason.clone(),
                    }),
                    num(r.tco_advantage_now),
                    num(r.tco_advantage_horizon),
                    pct(r.ghg_co2e_reduction_percent),
                    Cell::Text(r.recommendation.to_string()),
                ],
            );
            for d in &r.diagnostics {
                t.note(format!("{}: {d}", r.product_label));
            }
        }
        vec![t]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tco::{compare_scenarios, CostBuckets, SourcingScenario};

    fn casting() -> TcoComparison {
        let s = |region: &str, fob, cogs, hard, premium, rate| SourcingScenario {
            product_label: "Casting".into(),
            region_label: region.into(),
            buckets: CostBuckets { fob_price: fob, cogs, other_hard: hard, ..Default::default() },
            freight_premium: premium,
            escalation_rate: rate,
            cogs_items: Vec::new(),
        };
        compare_scenarios(
            &s("The U.S.", 4.46, 0.0, 0.04, 0.0, 0.0087349514),
            &s("China", 3.66, 1.67, 0.15, 0.67, 0.0297243332),
            5,
        )
        .unwrap()
    }

    #[test]
    fn tco_table_text_layout() {
        let text = render_report(&casting(), Format::TableText);
        let text = text.as_str();
        let line = text.lines().find(|l| l.starts_with("Total Cost Before Freight Premium")).unwrap();
        assert!(line.contains("4.50") && line.contains("5.48"), "{line}");
        let line = text.lines().find(|l| l.starts_with("Grand Total Cost of Ownership")).unwrap();
        assert!(line.contains("4.50") && line.contains("6.15"), "{line}");
        let line = text.lines().find(|l| l.starts_with("Forecast TCO (5 years)")).unwrap();
        assert!(line.contains("4.70") && line.contains("7.12"), "{line}");
    }

    #[test]
    fn json_round_trip() {
        let c = casting();
        let back: TcoComparison = parse_json_report(&render_report(&c, Format::Json).content).unwrap();
        assert_eq!(back, c);
        assert!(parse_json_report::<EmissionReport>(&render_report(&c, Format::Json).content).is_err());
    }

    #[test]
    fn zero_emission_csv() {
        let r = EmissionReport::default().with_co2e(&GwpSet::default());
        let out = render_report(&r, Format::Csv);
        let mut lines = out.as_str().lines();
        assert_eq!(lines.next(), Some("table,row,column,value,display"));
        let rows: Vec<&str> = lines.collect();
        assert!(!rows.is_empty());
        for row in rows {
            let fields: Vec<&str> = row.rsplitn(3, ',').collect();
            assert_eq!(fields[1], "0", "{row}");
            assert_eq!(fields[0], "0.00", "{row}");
        }
    }

    #[test]
    fn csv_keeps_full_precision() {
        let out = render_report(&casting(), Format::Csv);
        assert!(out.as_str().contains("0.04,0.04"));
        let forecast = out.as_str().lines().find(|l| l.contains("Forecast TCO") && l.contains(",China,")).unwrap();
        assert!(forecast.ends_with(",7.12"), "{forecast}");
        assert!(!forecast.contains(",7.12,"), "{forecast}");
    }
}
