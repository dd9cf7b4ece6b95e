//! Instance generation, file formats, audit ensembles and the CLI.

pub mod cli;
pub mod instance;
pub mod profiles;
pub mod report;
pub mod suite;

pub use instance::{parse_instance, Instance, InstanceFile};
pub use profiles::{random_instance, trial_instance, Profile};
pub use report::RunReport;
pub use suite::{run_suite, Suite, SuiteConfig};
