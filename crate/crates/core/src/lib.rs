//! Energy-efficient wireless-sensor-network monitoring as a data-mining
//! pipeline: pick a minimal subset of sensors by correlation-based feature
//! selection, predict the sink sensor with Akaike-stepwise linear
//! regression, quantify the accuracy/energy trade-off (RMSE vs. life-time
//! extension factor), and simulate the resulting active/sleep routing plan
//! over the sensor field.
//!
//! The crate is organized along the pipeline:
//!
//! - [`dataset`] — raw log and positions parsing, epoch alignment, gap
//!   handling, matrix windows and CSV round-trips
//! - [`stats`] — Pearson correlation, standardization, correlation matrices
//! - [`select`] — CFS merit, best-first subset search, the
//!   locally-predictive post-pass
//! - [`regress`] — least-squares fitting, AIC, backward stepwise
//!   elimination, prediction
//! - [`eval`] — fold plans, RMSE, cross-validation and per-window
//!   scenario reports
//! - [`sim`] — greedy geographic routing, LTEF, the energy ledger and the
//!   adaptive re-selection loop
//! - [`config`] / [`commands`] — the config file and the `motesel` CLI
//!   commands built on top of everything above
//!
//! Each major capability has a runnable example under `examples/`; start
//! with `examples/ingest_dataset.rs`.

pub mod commands;
pub mod config;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod regress;
pub mod select;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};
