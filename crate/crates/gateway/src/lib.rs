//! HTTP service and command line for the aku engine.
//!
//! [`api::Service`] holds the store and implements every operation once; [`http`] and [`cli`]
//! are thin front ends that render its JSON results.

pub mod api;
pub mod cli;
pub mod http;

pub use api::{ApiError, Envelope, ErrorCode, Service};
