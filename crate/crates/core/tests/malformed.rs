mod common;

use common::{check_malformed, malformed_cases};

#[test]
fn corpus_has_at_least_twenty_cases() {
    assert!(malformed_cases().len() >= 20);
}

#[test]
fn every_malformed_case_is_rejected_with_a_diagnostic() {
    let failures: Vec<String> = malformed_cases()
        .iter()
        .filter_map(|c| check_malformed(c).map(|f| format!("{}.{}: {f}", c.name, c.target)))
        .collect();
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}
