//! Scenario files, instance generators, the runner and its reports.

pub mod checks;
pub mod generate;
pub mod report;
pub mod run;
pub mod scenario;
pub mod suite;

pub use generate::{generate_random, generate_two_subspace, rng_for};
pub use report::{emit_report, render_report, CheckOutcome, Format, Report, TraceSummary};
pub use run::{analyze_scenario, run_scenario, with_all_checks};
pub use scenario::{parse_scenario, read_scenario, Check, Method, Mode, Scenario, Starts};
pub use suite::{run_suite, SuiteConfig, SuiteReport};
