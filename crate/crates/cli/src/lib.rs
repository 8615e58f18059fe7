//! Command-line front end: metric files, reports and the `concirc` driver.

pub mod metric_file;
pub mod report;
pub mod run;

pub use run::run_with;
