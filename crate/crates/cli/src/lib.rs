//! Command-line front end for `hill-spectral`: band charts, density grids,
//! edge diagnostics and variational checks as CSV or JSON.

pub mod format;
pub mod report;
pub mod run;
