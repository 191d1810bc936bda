mod common;

use common::{abc_dir, run_cli};
use reshoreval::report::{parse_json_report, DecisionReport, GhgReport, RiReport, TcoReport};
use reshoreval::ri::ScreeningReport;

fn abc() -> String {
    abc_dir().to_str().unwrap().to_owned()
}

#[test]
fn no_arguments_prints_usage_and_fails() {
    let run = run_cli(&[]);
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("Usage"), "{}", run.stderr);
}

#[test]
fn unknown_subcommand_fails() {
    let run = run_cli(&["forecast"]);
    assert_eq!(run.code, 1);
    assert!(run.stdout.is_empty());
}

#[test]
fn help_succeeds() {
    let run = run_cli(&["--help"]);
    assert_eq!(run.code, 0);
    for sub in ["ri", "screen", "tco", "ghg", "decide"] {
        assert!(run.stdout.contains(sub));
    }
}

#[test]
fn unknown_format_fails() {
    let data = abc();
    let run = run_cli(&["screen", "--data", &data, "--format", "xml"]);
    assert_eq!(run.code, 1);
}

#[test]
fn screen_reports_shortlist_and_coverage() {
    let data = abc();
    let run = run_cli(&["screen", "--data", &data, "--format", "json"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let report: ScreeningReport = parse_json_report(run.stdout.as_bytes()).unwrap();
    let labels: Vec<_> = report.shortlist.iter().map(|r| r.label.as_str()).collect();
    assert_eq!(labels, ["Casting", "Stamping", "Forming", "Mounting"]);
    assert!((report.tariff_coverage_percent - 96.64).abs() < 0.01);

    let text = run_cli(&["screen", "--data", &data]);
    assert!(text.stdout.contains("96.64"), "{}", text.stdout);
}

#[test]
fn decide_json_recommends_four_products() {
    let data = abc();
    let run = run_cli(&["decide", "--data", &data, "--format", "json"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let report: DecisionReport = parse_json_report(run.stdout.as_bytes()).unwrap();
    assert_eq!(report.records.len(), 7);
    let reshore: Vec<_> = report
        .records
        .iter()
        .filter(|r| r.recommendation == reshoreval::pipeline::Recommendation::Reshore)
        .map(|r| r.product_label.as_str())
        .collect();
    assert_eq!(reshore, ["Casting", "Forming", "Mounting", "Stamping"]);
}

#[test]
fn every_subcommand_renders_every_format() {
    let data = abc();
    for sub in ["ri", "screen", "tco", "ghg", "decide"] {
        for format in ["table", "csv", "json"] {
            let run = run_cli(&[sub, "--data", &data, "--format", format]);
            assert_eq!(run.code, 0, "{sub} {format}: {}", run.stderr);
            assert!(!run.stdout.is_empty());
        }
    }
}

#[test]
fn csv_output_is_long_form() {
    let data = abc();
    let run = run_cli(&["tco", "--data", &data, "--format", "csv"]);
    let mut lines = run.stdout.lines();
    assert_eq!(lines.next(), Some("table,row,column,value,display"));
    assert!(lines.count() > 20);
}

#[test]
fn json_reports_survive_a_round_trip() {
    use reshoreval::report::{render_report, Format, Report};
    fn check<R: Report>(json: &str) {
        let report: R = parse_json_report(json.as_bytes()).unwrap();
        assert_eq!(render_report(&report, Format::Json).as_str(), json);
    }
    let data = abc();
    let out = |sub: &str| run_cli(&[sub, "--data", &data, "--format", "json"]).stdout;
    check::<RiReport>(&out("ri"));
    check::<ScreeningReport>(&out("screen"));
    check::<TcoReport>(&out("tco"));
    check::<GhgReport>(&out("ghg"));
    check::<DecisionReport>(&out("decide"));
}

#[test]
fn json_of_the_wrong_kind_is_rejected() {
    let data = abc();
    let json = run_cli(&["screen", "--data", &data, "--format", "json"]).stdout;
    assert!(parse_json_report::<TcoReport>(json.as_bytes()).is_err());
}

#[test]
fn out_flag_writes_file() {
    let data = abc();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ghg.txt");
    let run = run_cli(&["ghg", "--data", &data, "--out", path.to_str().unwrap()]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert!(run.stdout.is_empty());
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.contains("78.01"), "{text}");
}

#[test]
fn unwritable_out_path_is_an_io_error() {
    let data = abc();
    let run = run_cli(&["screen", "--data", &data, "--out", "/nonexistent-dir/x.txt"]);
    assert_eq!(run.code, 2);
}

#[test]
fn horizon_override_changes_tco() {
    let data = abc();
    let five = run_cli(&["tco", "--data", &data, "--format", "json"]).stdout;
    let ten = run_cli(&["tco", "--data", &data, "--format", "json", "--horizon", "10"]).stdout;
    let five: TcoReport = parse_json_report(five.as_bytes()).unwrap();
    let ten: TcoReport = parse_json_report(ten.as_bytes()).unwrap();
    assert_eq!(ten.horizon_years, 10);
    assert_eq!(five.horizon_years, 5);
    assert_ne!(
        five.comparisons[0].tco_advantage_domestic_horizon,
        ten.comparisons[0].tco_advantage_domestic_horizon
    );
    assert_eq!(run_cli(&["tco", "--data", &data, "--horizon", "0"]).code, 0);
    assert_eq!(run_cli(&["decide", "--data", &data, "--horizon", "0"]).code, 1);
}

#[test]
fn ri_adjustment_flag() {
    let data = abc();
    let att = run_cli(&["ri", "--data", &data, "--format", "json"]);
    let div = run_cli(&["ri", "--data", &data, "--format", "json", "--adjustment", "literal_divide"]);
    assert_eq!(att.code, 0, "{}", att.stderr);
    assert_eq!(div.code, 0, "{}", div.stderr);
    let att: RiReport = parse_json_report(att.stdout.as_bytes()).unwrap();
    let div: RiReport = parse_json_report(div.stdout.as_bytes()).unwrap();
    for (a, d) in att.evaluations.iter().zip(&div.evaluations) {
        assert!(a.ri_percent >= d.ri_percent);
    }
    assert_eq!(run_cli(&["ri", "--data", &data, "--adjustment", "sideways"]).code, 1);
}

#[test]
fn data_directory_from_environment() {
    std::env::remove_var(reshoreval::cli::DATA_ENV);
    let run = run_cli(&["screen"]);
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains(reshoreval::cli::DATA_ENV));

    std::env::set_var(reshoreval::cli::DATA_ENV, abc());
    let run = run_cli(&["screen"]);
    std::env::remove_var(reshoreval::cli::DATA_ENV);
    assert_eq!(run.code, 0, "{}", run.stderr);
}

#[test]
fn missing_data_directory_fails_cleanly() {
    let run = run_cli(&["decide", "--data", "/nonexistent/reshoreval"]);
    assert_ne!(run.code, 0);
    assert!(run.stderr.starts_with("error:"));
}
