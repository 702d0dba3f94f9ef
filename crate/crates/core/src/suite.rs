//! The bundled golden scenarios.

use crate::report::{run_queries_with, Report, RunOptions};
use crate::scenario::{parse_scenario, Scenario, ScenarioError};

/// Name and TOML source of each bundled scenario, in run order.
pub const BUILTIN_SCENARIOS: [(&str, &str); 5] = [
    ("machina_5051", include_str!("../scenarios/machina_5051.toml")),
    ("machina_reflection", include_str!("../scenarios/machina_reflection.toml")),
    ("machina_ellsberg", include_str!("../scenarios/machina_ellsberg.toml")),
    ("dual_self", include_str!("../scenarios/dual_self.toml")),
    ("auxiliary", include_str!("../scenarios/auxiliary.toml")),
];

pub fn builtin_scenario(name: &str) -> Option<Result<Scenario, ScenarioError>> {
    BUILTIN_SCENARIOS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(n, text)| parse_scenario(text, &format!("<builtin {n}>"), n))
}

pub fn builtin_scenarios() -> Vec<Scenario> {
    BUILTIN_SCENARIOS
        .iter()
        .map(|(n, text)| parse_scenario(text, &format!("<builtin {n}>"), n).expect("bundled scenarios are valid"))
        .collect()
}

pub fn builtin_machina_suite() -> Report {
    builtin_machina_suite_with(&RunOptions::default())
}

pub fn builtin_machina_suite_with(opts: &RunOptions) -> Report {
    let mut report = Report::default();
    for s in builtin_scenarios() {
        report.sections.extend(run_queries_with(&s, opts).sections);
    }
    report
}
