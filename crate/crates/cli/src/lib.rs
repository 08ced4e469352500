//! Command line and JSON service for the `exactjack` engine.
//!
//! [`run`] drives the `exactjack` binary; [`api::router`] builds the HTTP
//! service started by `exactjack serve`.

pub mod api;
mod cli;
mod json;

pub use cli::{run, MAX_DEPTH};
pub use json::{parse as parse_json, JsonError};
