//! File formats: electorate text, DOT graphs and CSV tables.

mod dot;
mod electorate;
mod export;

pub use dot::export_dot;
pub use electorate::{parse_electorate, serialize_electorate};
pub use export::{write_grid_csv, write_orbit_csv, write_profile_csv};
