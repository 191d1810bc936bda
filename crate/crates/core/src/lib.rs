//! Reshoring decision analytics.
//!
//! Three stages evaluated per product group:
//!
//! 1. [`ri`]: Reshoring Index scoring and the trade/logistics candidate screen.
//! 2. [`tco`]: total cost of ownership, domestic vs offshore, with forecasts.
//! 3. [`ghg`]: Scope-3 upstream transport emissions (tonne-km method).
//!
//! [`pipeline`] chains them into per-product recommendations; [`dataset`],
//! [`report`] and [`cli`] handle files, rendering and the command line.

pub mod cli;
pub mod dataset;
pub mod error;
pub mod ghg;
pub mod pipeline;
pub mod report;
pub mod ri;
pub mod tco;

pub use error::{Diagnostic, Error, Result};
