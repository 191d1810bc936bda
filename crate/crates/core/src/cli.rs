//! Command-line entry point.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::dataset::{load_dir, DatasetBundle, DatasetKind};
use crate::error::{Error, Result};
use crate::ghg::{mode_totals, reduction_report, TransportLeg};
use crate::pipeline::run_pipeline;
use crate::report::{
    render_report, DecisionReport, Format, GhgReport, ProductEmissions, Report, RiReport, TcoReport,
};
use crate::ri::{evaluate_profile, screen_candidates, OffshoreAdjustment, ScreeningReport};
use crate::tco::compare_scenarios;

pub const DATA_ENV: &str = "RESHOREVAL_DATA";

#[derive(Debug, Parser)]
#[command(name = "reshoreval", version, about = "Reshoring decision analytics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Dataset directory
    #[arg(long, env = DATA_ENV)]
    data: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::TableText)]
    format: Format,
    /// Write the report here instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Normalized scores and Reshoring Index per industry profile
    Ri {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        adjustment: Option<String>,
    },
    /// Three-factor candidate screen
    Screen {
        #[command(flatten)]
        common: Common,
    },
    /// Total cost of ownership comparison
    Tco {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Scope-3 transport emissions and reductions
    Ghg {
        #[command(flatten)]
        common: Common,
    },
    /// Full pipeline: screen, TCO and emissions
    Decide {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        horizon: Option<usize>,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Ri { common, .. }
            | Command::Screen { common }
            | Command::Tco { common, .. }
            | Command::Ghg { common }
            | Command::Decide { common, .. } => common,
        }
    }
}

pub fn build_ri_report(bundle: &DatasetBundle, adjustment: Option<OffshoreAdjustment>) -> Result<RiReport> {
    bundle.require(&[DatasetKind::Indicators, DatasetKind::Factors, DatasetKind::Profiles, DatasetKind::Weights])?;
    let m = &bundle.manifest;
    let adjustment = adjustment.unwrap_or(m.offshore_adjustment);
    let indicators = bundle.indicator_map();
    let evaluations = bundle
        .profiles
        .iter()
        .map(|p| evaluate_profile(p, &bundle.factors, &indicators, &m.domestic_country, &m.offshore_country, adjustment))
        .collect::<Result<Vec<_>>>()?;
    Ok(RiReport {
        domestic_country: m.domestic_country.clone(),
        offshore_country: m.offshore_country.clone(),
        adjustment,
        evaluations,
    })
}

pub fn build_screening_report(bundle: &DatasetBundle) -> Result<ScreeningReport> {
    bundle.require(&[DatasetKind::Screening])?;
    screen_candidates(&bundle.screening_rows, &bundle.manifest.screening_policy)
}

pub fn build_tco_report(bundle: &DatasetBundle, horizon: Option<usize>) -> Result<TcoReport> {
    bundle.require(&[DatasetKind::Scenarios])?;
    let horizon_years = horizon.unwrap_or(bundle.manifest.horizon_years);
    let comparisons = bundle
        .tco_pairs()
        .values()
        .map(|(d, o)| compare_scenarios(d, o, horizon_years))
        .collect::<Result<Vec<_>>>()?;
    Ok(TcoReport { horizon_years, comparisons })
}

fn product_emissions(
    label: &str,
    offshore: &[TransportLeg],
    reshore: &[TransportLeg],
    bundle: &DatasetBundle,
) -> Result<ProductEmissions> {
    let gwp = bundle.gwp();
    let offshore = mode_totals(offshore, &bundle.emission_factors)?.with_co2e(gwp);
    let reshore = mode_totals(reshore, &bundle.emission_factors)?.with_co2e(gwp);
    Ok(ProductEmissions {
        product_label: label.to_owned(),
        reduction: reduction_report(&offshore, &reshore),
        offshore,
        reshore,
    })
}

pub fn build_ghg_report(bundle: &DatasetBundle) -> Result<GhgReport> {
    bundle.require(&[DatasetKind::Legs, DatasetKind::EmissionFactors])?;
    let pairs = bundle.ghg_pairs();
    let products = pairs
        .iter()
        .map(|(label, (off, re))| product_emissions(label, off, re, bundle))
        .collect::<Result<Vec<_>>>()?;
    let all_off: Vec<TransportLeg> = pairs.values().flat_map(|p| p.0.iter().cloned()).collect();
    let all_re: Vec<TransportLeg> = pairs.values().flat_map(|p| p.1.iter().cloned()).collect();
    Ok(GhgReport {
        gwp: *bundle.gwp(),
        factors: bundle.emission_factors.entries().to_vec(),
        combined: product_emissions("All products", &all_off, &all_re, bundle)?,
        products,
    })
}

pub fn build_decision_report(bundle: &DatasetBundle, horizon: Option<usize>) -> Result<DecisionReport> {
    bundle.require(&[DatasetKind::Screening, DatasetKind::Scenarios])?;
    let mut config = bundle.manifest.pipeline_config();
    if let Some(h) = horizon {
        config.horizon_years = h;
    }
    let records = run_pipeline(
        &bundle.screening_rows,
        &bundle.tco_pairs(),
        &bundle.ghg_pairs(),
        &bundle.emission_factors,
        bundle.gwp(),
        &config,
    )?;
    Ok(DecisionReport { horizon_years: config.horizon_years, records })
}

fn emit<R: Report>(report: &R, common: &Common, stdout: &mut dyn Write) -> Result<()> {
    let rendered = render_report(report, common.format);
    match &common.out {
        Some(path) => std::fs::write(path, &rendered.content).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        }),
        None => stdout
            .write_all(&rendered.content)
            .map_err(|source| Error::Io { path: PathBuf::from("<stdout>"), source }),
    }
}

fn data_dir(common: &Common) -> Result<&Path> {
    common
        .data
        .as_deref()
        .ok_or_else(|| Error::input(format!("no data directory: pass --data or set {DATA_ENV}")))
}

fn execute(command: &Command, stdout: &mut dyn Write) -> Result<()> {
    let common = command.common();
    let bundle = load_dir(data_dir(common)?)?;
    match command {
        Command::Ri { adjustment, .. } => {
            let adjustment = adjustment.as_deref().map(str::parse).transpose()?;
            emit(&build_ri_report(&bundle, adjustment)?, common, stdout)
        }
        Command::Screen { .. } => emit(&build_screening_report(&bundle)?, common, stdout),
        Command::Tco { horizon, .. } => emit(&build_tco_report(&bundle, *horizon)?, common, stdout),
        Command::Ghg { .. } => emit(&build_ghg_report(&bundle)?, common, stdout),
        Command::Decide { horizon, .. } => emit(&build_decision_report(&bundle, *horizon)?, common, stdout),
    }
}

/// Run the CLI. Returns 0 on success, 1 on input errors (including usage),
/// 2 on internal errors.
pub fn cli_main<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    1
                }
            };
        }
    };
    match execute(&cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
