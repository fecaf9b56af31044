//! Command-line front end: election files in, equilibrium reports out.

mod app;
pub mod document;
mod report;

pub use app::{run, exit_code};
