//! Hand-labelled completions covering well-formed, repairable and hopeless
//! outputs for every task.

#[path = "common/fixtures.rs"]
mod fixtures;

#[test]
fn parser_fixtures() {
    let cases = fixtures::cases();
    assert!(cases.len() >= 30);
    let bad = fixtures::mismatches(&cases);
    assert!(bad.is_empty(), "{}", bad.join("\n"));
}
